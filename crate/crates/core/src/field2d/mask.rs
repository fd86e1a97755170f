use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Dir, Grid2D};
use crate::error::{Error, Result};
use crate::geometry::WarpedManifold;

/// Intersection of the boundary with the grid edge leaving an inside node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub node: usize,
    pub dir: Dir,
    /// Distance to the boundary as a fraction of the edge, in `(0, 1]`.
    pub frac: f64,
    /// Outward unit normal at the boundary point, orthonormal frame.
    pub normal: [f64; 2],
}

/// Inside nodes of a domain plus the boundary cuts on their edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMask {
    pub grid: Grid2D,
    pub inside: Vec<bool>,
    pub cuts: Vec<Cut>,
    #[serde(skip)]
    lookup: HashMap<(usize, Dir), usize>,
}

const MIN_FRAC: f64 = 1e-8;

fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if n > 0.0 {
        [v[0] / n, v[1] / n]
    } else {
        [0.0, 0.0]
    }
}

impl DomainMask {
    /// Domain `{φ < 0}`. Cut positions are located by bisection on φ and
    /// normals come from differences of φ.
    pub fn from_level_set(m: &WarpedManifold, grid: Grid2D, phi: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let (r, th) = grid.point(idx);
                phi(r, th)
            })
            .collect();
        let inside: Vec<bool> = values.iter().map(|&v| v < 0.0).collect();
        Self::check_chart(&grid, &inside)?;
        let mut cuts = Vec::new();
        for idx in (0..grid.len()).filter(|&i| inside[i]) {
            for dir in Dir::ALL {
                let nb = grid.neighbor(idx, dir).expect("inside nodes are off the chart edge");
                if inside[nb] {
                    continue;
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let (r, th) = grid.along(idx, dir, mid);
                    if phi(r, th) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let frac = (0.5 * (lo + hi)).clamp(MIN_FRAC, 1.0);
                let (r, th) = grid.along(idx, dir, frac);
                let dr = 1e-6 * grid.h_r.max(1e-3);
                let dt = 1e-6;
                let pr = (phi(r + dr, th) - phi(r - dr, th)) / (2.0 * dr);
                let pt = (phi(r, th + dt) - phi(r, th - dt)) / (2.0 * dt);
                let normal = normalize([pr, pt / m.sigma.sigma(r)]);
                cuts.push(Cut { node: idx, dir, frac, normal });
            }
        }
        Self::finish(grid, inside, cuts)
    }

    /// Domain `{v < 0}` for node values `v`, with cuts by linear interpolation
    /// along edges and normals from interpolated node gradients.
    pub fn from_node_values(m: &WarpedManifold, grid: Grid2D, v: &[f64]) -> Result<Self> {
        assert_eq!(v.len(), grid.len());
        let inside: Vec<bool> = v.iter().map(|&x| x < 0.0).collect();
        Self::check_chart(&grid, &inside)?;
        let grad = |idx: usize| -> [f64; 2] {
            let mut g = [0.0; 2];
            for (axis, (minus, plus)) in [(Dir::RMinus, Dir::RPlus), (Dir::ThetaMinus, Dir::ThetaPlus)].into_iter().enumerate() {
                let h = grid.edge_length(m, idx, plus);
                let vm = grid.neighbor(idx, minus).map(|i| v[i]).filter(|x| x.is_finite());
                let vp = grid.neighbor(idx, plus).map(|i| v[i]).filter(|x| x.is_finite());
                g[axis] = match (vm, vp) {
                    (Some(a), Some(b)) => (b - a) / (2.0 * h),
                    (Some(a), None) => (v[idx] - a) / h,
                    (None, Some(b)) => (b - v[idx]) / h,
                    (None, None) => 0.0,
                };
            }
            g
        };
        let mut cuts = Vec::new();
        for idx in (0..grid.len()).filter(|&i| inside[i]) {
            for dir in Dir::ALL {
                let nb = grid.neighbor(idx, dir).expect("inside nodes are off the chart edge");
                if inside[nb] {
                    continue;
                }
                let frac = if v[nb].is_finite() { v[idx] / (v[idx] - v[nb]) } else { 1.0 };
                let frac = frac.clamp(MIN_FRAC, 1.0);
                let (ga, gb) = (grad(idx), grad(nb));
                let normal = normalize([ga[0] + frac * (gb[0] - ga[0]), ga[1] + frac * (gb[1] - ga[1])]);
                cuts.push(Cut { node: idx, dir, frac, normal });
            }
        }
        Self::finish(grid, inside, cuts)
    }

    fn check_chart(grid: &Grid2D, inside: &[bool]) -> Result<()> {
        for j in 0..grid.n_theta {
            for i in [0, grid.nr - 1] {
                if inside[grid.index(i, j)] {
                    return Err(Error::ChartOverflow(format!(
                        "domain reaches the chart edge r = {} (grid covers [{}, {}])",
                        grid.r(i),
                        grid.r_lo,
                        grid.r_hi()
                    )));
                }
            }
        }
        Ok(())
    }

    fn finish(grid: Grid2D, inside: Vec<bool>, cuts: Vec<Cut>) -> Result<Self> {
        let lookup = cuts.iter().enumerate().map(|(k, c)| ((c.node, c.dir), k)).collect();
        let mask = DomainMask { grid, inside, cuts, lookup };
        let count = mask.inside_count();
        if count > 0 {
            let reached = mask.component_size(mask.inside.iter().position(|&b| b).unwrap());
            if reached != count {
                return Err(Error::Construction(format!(
                    "domain mask is not connected ({reached} of {count} inside nodes reachable)"
                )));
            }
        }
        Ok(mask)
    }

    fn component_size(&self, start: usize) -> usize {
        let mut seen = vec![false; self.inside.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 0;
        while let Some(idx) = queue.pop_front() {
            count += 1;
            for dir in Dir::ALL {
                if let Some(nb) = self.grid.neighbor(idx, dir) {
                    if self.inside[nb] && !seen[nb] {
                        seen[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
        }
        count
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.inside_count() == 0
    }

    pub fn cut_index(&self, node: usize, dir: Dir) -> Option<usize> {
        self.lookup.get(&(node, dir)).copied()
    }

    pub fn cut(&self, node: usize, dir: Dir) -> Option<&Cut> {
        self.cut_index(node, dir).map(|k| &self.cuts[k])
    }

    /// Graph distance from the nearest node that owns a cut; `None` outside.
    pub fn depth(&self) -> Vec<Option<usize>> {
        let mut depth = vec![None; self.inside.len()];
        let mut queue = VecDeque::new();
        for c in &self.cuts {
            if depth[c.node].is_none() {
                depth[c.node] = Some(0);
                queue.push_back(c.node);
            }
        }
        while let Some(idx) = queue.pop_front() {
            let d = depth[idx].unwrap();
            for dir in Dir::ALL {
                if let Some(nb) = self.grid.neighbor(idx, dir) {
                    if self.inside[nb] && depth[nb].is_none() {
                        depth[nb] = Some(d + 1);
                        queue.push_back(nb);
                    }
                }
            }
        }
        depth
    }

    /// Volume weight of each inside node: the part of its dual cell inside the
    /// domain times `σ^{n−1}`. Cut edges give the node the whole segment up to
    /// the boundary.
    pub fn weights(&self, m: &WarpedManifold) -> Vec<f64> {
        let g = &self.grid;
        (0..g.len())
            .map(|idx| {
                if !self.inside[idx] {
                    return 0.0;
                }
                let extent = |dir: Dir, h: f64| self.cut(idx, dir).map_or(0.5 * h, |c| c.frac * h);
                let dr = extent(Dir::RMinus, g.h_r) + extent(Dir::RPlus, g.h_r);
                let dt = extent(Dir::ThetaMinus, g.h_theta) + extent(Dir::ThetaPlus, g.h_theta);
                let r = g.point(idx).0;
                dr * dt * m.sigma.sigma(r).powi(m.n as i32 - 1)
            })
            .collect()
    }

    /// Domain volume `∫ σ^{n−1} dr dθ`.
    pub fn volume(&self, m: &WarpedManifold) -> f64 {
        self.weights(m).iter().sum()
    }
}
