//! Finite differences for `Δu + nku = −1` in a warped `(r, θ)` chart.
//!
//! The chart is a tensor grid, periodic in θ, that never contains the pole.
//! For `n > 2` the fiber is a flat torus and fields are constant along the
//! `n − 2` extra directions, so only the `(n−1)σ′/σ` drift changes.

mod domains;
mod eikonal;
mod mask;
mod solve;
mod sparse;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::WarpedManifold;

pub use domains::{closed_form_distance, Domain2D};
pub use eikonal::{eikonal_distance, eikonal_distance_limited, geodesic_ball_mask, DistanceField};
pub use mask::{Cut, DomainMask};
pub use solve::{
    boundary_gradient_stats, effective_dimension_laplacian, gradient_components, gradient_norm, solve_dirichlet,
    BoundaryGradientStats, BoundarySample, DirichletSolution, SolverOptions,
};

/// Grid edge directions out of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    RMinus,
    RPlus,
    ThetaMinus,
    ThetaPlus,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::RMinus, Dir::RPlus, Dir::ThetaMinus, Dir::ThetaPlus];

    pub fn opposite(self) -> Dir {
        match self {
            Dir::RMinus => Dir::RPlus,
            Dir::RPlus => Dir::RMinus,
            Dir::ThetaMinus => Dir::ThetaPlus,
            Dir::ThetaPlus => Dir::ThetaMinus,
        }
    }

    /// Unit vector in the orthonormal frame `(∂_r, σ⁻¹∂_θ)`.
    pub fn unit(self) -> [f64; 2] {
        match self {
            Dir::RMinus => [-1.0, 0.0],
            Dir::RPlus => [1.0, 0.0],
            Dir::ThetaMinus => [0.0, -1.0],
            Dir::ThetaPlus => [0.0, 1.0],
        }
    }

    pub fn is_radial(self) -> bool {
        matches!(self, Dir::RMinus | Dir::RPlus)
    }
}

/// Tensor grid `r_lo + i h_r`, `j h_θ` with `h_θ = 2π / n_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub r_lo: f64,
    pub h_r: f64,
    pub nr: usize,
    pub n_theta: usize,
    pub h_theta: f64,
}

impl Grid2D {
    pub fn new(r_lo: f64, r_hi: f64, nr: usize, n_theta: usize) -> Result<Self> {
        if nr < 3 || n_theta < 4 || !(r_hi > r_lo) {
            return Err(Error::Precondition(format!(
                "grid needs nr >= 3, n_theta >= 4 and r_hi > r_lo (got {nr}, {n_theta}, [{r_lo}, {r_hi}])"
            )));
        }
        Ok(Grid2D { r_lo, h_r: (r_hi - r_lo) / (nr - 1) as f64, nr, n_theta, h_theta: 2.0 * PI / n_theta as f64 })
    }

    /// Grid over `[r_min, r_max]` plus a four-cell margin, with radial spacing
    /// and arc spacing both at most `h`. The chart must avoid the pole and the
    /// ends of the warping interval.
    pub fn covering(m: &WarpedManifold, r_min: f64, r_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Precondition("grid spacing must be positive".into()));
        }
        let lo = r_min - 4.0 * h;
        let hi = r_max + 4.0 * h;
        let dom = m.sigma.domain;
        if lo <= dom.lo || hi >= dom.hi {
            return Err(Error::ChartOverflow(format!(
                "chart [{lo}, {hi}] does not fit strictly inside the warping interval ({}, {})",
                dom.lo, dom.hi
            )));
        }
        let nr = ((hi - lo) / h).ceil() as usize + 1;
        let sigma_max = (0..=64).map(|i| m.sigma.sigma(lo + (hi - lo) * i as f64 / 64.0)).fold(0.0, f64::max);
        let n_theta = ((2.0 * PI * sigma_max / h).ceil() as usize).max(8);
        Grid2D::new(lo, hi, nr.max(3), n_theta)
    }

    pub fn r_hi(&self) -> f64 {
        self.r_lo + self.h_r * (self.nr - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nr * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_lo + self.h_r * i as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.h_theta * j as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_theta, idx % self.n_theta)
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.coords(idx);
        (self.r(i), self.theta(j))
    }

    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.n_theta as isize) as usize
    }

    /// Neighbor across one edge; `None` past the radial chart edge.
    pub fn neighbor(&self, idx: usize, dir: Dir) -> Option<usize> {
        let (i, j) = self.coords(idx);
        match dir {
            Dir::RMinus => (i > 0).then(|| idx - self.n_theta),
            Dir::RPlus => (i + 1 < self.nr).then(|| idx + self.n_theta),
            Dir::ThetaMinus => Some(self.index(i, self.wrap(j as isize - 1))),
            Dir::ThetaPlus => Some(self.index(i, self.wrap(j as isize + 1))),
        }
    }

    /// Physical length of the edge leaving node `idx` in direction `dir`.
    pub fn edge_length(&self, m: &WarpedManifold, idx: usize, dir: Dir) -> f64 {
        if dir.is_radial() {
            self.h_r
        } else {
            m.sigma.sigma(self.point(idx).0) * self.h_theta
        }
    }

    /// Point at fraction `t` along the edge from `idx` in direction `dir`.
    pub fn along(&self, idx: usize, dir: Dir, t: f64) -> (f64, f64) {
        let (r, th) = self.point(idx);
        match dir {
            Dir::RMinus => (r - t * self.h_r, th),
            Dir::RPlus => (r + t * self.h_r, th),
            Dir::ThetaMinus => (r, th - t * self.h_theta),
            Dir::ThetaPlus => (r, th + t * self.h_theta),
        }
    }

    /// Fractional grid position `(i, j)` of a chart point.
    pub fn locate(&self, r: f64, theta: f64) -> (f64, f64) {
        ((r - self.r_lo) / self.h_r, theta.rem_euclid(2.0 * PI) / self.h_theta)
    }
}

/// A field on the inside nodes of a mask, with values at every boundary cut.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub mask: Arc<DomainMask>,
    /// One entry per grid node; NaN outside the mask.
    pub values: Vec<f64>,
    /// One entry per cut, the value on the boundary point of that cut.
    pub boundary: Vec<f64>,
}

impl ScalarField2D {
    pub fn grid(&self) -> &Grid2D {
        &self.mask.grid
    }

    pub fn from_fn(mask: Arc<DomainMask>, f: impl Fn(f64, f64) -> f64) -> Self {
        let grid = mask.grid;
        let values = (0..grid.len())
            .map(|idx| {
                if mask.inside[idx] {
                    let (r, th) = grid.point(idx);
                    f(r, th)
                } else {
                    f64::NAN
                }
            })
            .collect();
        let boundary = mask
            .cuts
            .iter()
            .map(|c| {
                let (r, th) = grid.along(c.node, c.dir, c.frac);
                f(r, th)
            })
            .collect();
        ScalarField2D { mask, values, boundary }
    }

    /// Inside values with zero boundary data.
    pub fn with_zero_boundary(mask: Arc<DomainMask>, values: Vec<f64>) -> Self {
        let boundary = vec![0.0; mask.cuts.len()];
        ScalarField2D { mask, values, boundary }
    }

    pub fn inside_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(|&i| self.mask.inside[i])
    }

    pub fn max_inside(&self) -> f64 {
        self.inside_nodes().map(|i| self.values[i]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_inside(&self) -> f64 {
        self.inside_nodes().map(|i| self.values[i]).fold(f64::INFINITY, f64::min)
    }

    /// Same mask, new values produced node by node.
    pub fn map(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if self.mask.inside[i] { f(i, v) } else { f64::NAN })
            .collect();
        ScalarField2D { mask: self.mask.clone(), values, boundary: self.boundary.clone() }
    }

    /// Writes `r,theta,value` rows for the inside nodes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,theta,value")?;
        for idx in self.inside_nodes() {
            let (r, th) = self.grid().point(idx);
            writeln!(out, "{r},{th},{}", self.values[idx])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
