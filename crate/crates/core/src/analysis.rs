//! P-function, integral identities and their residuals, for radial profiles
//! on model balls and for fields on 2D masks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field2d::{effective_dimension_laplacian, gradient_components, ScalarField2D};
use crate::geometry::{RadialFunction, WarpedManifold};

/// Two sides of an integral identity at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub grid_spacing: f64,
    pub convergence_order_estimate: Option<f64>,
}

impl QuadratureReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, h: f64) -> Self {
        QuadratureReport {
            name: name.to_string(),
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            grid_spacing: h,
            convergence_order_estimate: None,
        }
    }
}

/// `log(e_coarse/e_fine) / log(h_coarse/h_fine)`.
pub fn order_estimate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Fills in order estimates along a refinement sequence (coarse first).
pub fn with_orders(mut reports: Vec<QuadratureReport>) -> Vec<QuadratureReport> {
    for i in 1..reports.len() {
        let (a, b) = (&reports[i - 1], &reports[i]);
        let p = order_estimate(a.residual, b.residual, a.grid_spacing, b.grid_spacing);
        reports[i].convergence_order_estimate = Some(p);
    }
    reports
}

/// Area of the unit sphere `S^{m}`.
pub fn unit_sphere_area(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * unit_sphere_area(m - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadNode {
    pub r: f64,
    /// Volume weight including `σ^{n−1}`.
    pub weight: f64,
    pub u: f64,
    pub u_r: f64,
    pub grad_sq: f64,
}

/// Quadrature nodes carrying `u` and its gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub nodes: Vec<QuadNode>,
    pub h: f64,
}

impl Quadrature {
    /// Composite midpoint rule on the ball `r < radius` about the pole, with
    /// the full fiber area `|S^{n−1}|`.
    pub fn radial(m: &WarpedManifold, u: &dyn RadialFunction, radius: f64, h: f64) -> Result<Self> {
        if !m.is_model() {
            return Err(Error::Precondition("radial quadrature needs a model manifold".into()));
        }
        if !(radius > 0.0 && h > 0.0) {
            return Err(Error::Precondition("radius and spacing must be positive".into()));
        }
        let cells = (radius / h).ceil() as usize;
        let dr = radius / cells as f64;
        let area = unit_sphere_area(m.n - 1);
        let nodes = (0..cells)
            .map(|i| {
                let r = (i as f64 + 0.5) * dr;
                let s = m.sigma.sigma(r);
                let d1 = u.d1(r);
                QuadNode { r, weight: area * s.powi(m.n as i32 - 1) * dr, u: u.value(r), u_r: d1, grad_sq: d1 * d1 }
            })
            .collect();
        Ok(Quadrature { nodes, h: dr })
    }

    /// Cut-cell weights of the mask, derivatives from the field stencils.
    pub fn field(m: &WarpedManifold, u: &ScalarField2D) -> Self {
        let w = u.mask.weights(m);
        let (dr, ds) = gradient_components(m, u);
        let grid = u.grid();
        let nodes = u
            .inside_nodes()
            .map(|i| QuadNode {
                r: grid.point(i).0,
                weight: w[i],
                u: u.values[i],
                u_r: dr.values[i],
                grad_sq: dr.values[i].powi(2) + ds.values[i].powi(2),
            })
            .collect();
        Quadrature { nodes, h: grid.h_r }
    }

    pub fn integrate(&self, f: impl Fn(&QuadNode) -> f64) -> f64 {
        self.nodes.iter().map(|q| q.weight * f(q)).sum()
    }
}

struct Warp {
    s: f64,
    s1: f64,
    s2: f64,
    /// `(σ″σ^{n−1})′/σ^{n−1}`.
    lap_s1: f64,
}

fn warp(m: &WarpedManifold, r: f64) -> Warp {
    Warp {
        s: m.sigma.eval_unchecked(r, 0),
        s1: m.sigma.eval_unchecked(r, 1),
        s2: m.sigma.eval_unchecked(r, 2),
        lap_s1: m.laplacian_of_sigma_prime(r),
    }
}

/// `(n+2)/n ∫σ′u` against `c²∫σ′ + (n−2)/(2n) ∫(σ″σ^{n−1})′/σ^{n−1} u² − 2k∫σ′u²`.
pub fn pohozaev_sides(q: &Quadrature, m: &WarpedManifold, k: f64, c: f64) -> QuadratureReport {
    let n = m.n as f64;
    let lhs = (n + 2.0) / n * q.integrate(|p| warp(m, p.r).s1 * p.u);
    let rhs = q.integrate(|p| {
        let w = warp(m, p.r);
        c * c * w.s1 + (n - 2.0) / (2.0 * n) * w.lap_s1 * p.u * p.u - 2.0 * k * w.s1 * p.u * p.u
    });
    QuadratureReport::new("pohozaev", lhs, rhs, q.h)
}

/// `∫(kσ′ + (σ″σ^{n−1})′/(nσ^{n−1}))u²`.
pub fn compatibility_integral(q: &Quadrature, m: &WarpedManifold, k: f64) -> f64 {
    let n = m.n as f64;
    q.integrate(|p| {
        let w = warp(m, p.r);
        (k * w.s1 + w.lap_s1 / n) * p.u * p.u
    })
}

/// The three integration-by-parts identities used on the way to the
/// Pohozaev identity, for `u` vanishing on the boundary:
///
/// * `∫σu_r = −n∫σ′u`
/// * `∫σ″uu_r = −½∫(σ″σ^{n−1})′/σ^{n−1} u²`
/// * `∫σ′|∇u|² = ∫σ′u + nk∫σ′u² − ∫σ″uu_r`
pub fn intermediate_identity_checks(q: &Quadrature, m: &WarpedManifold, k: f64) -> Vec<QuadratureReport> {
    let n = m.n as f64;
    let at = |p: &QuadNode| warp(m, p.r);
    vec![
        QuadratureReport::new(
            "divergence_sigma_dr",
            q.integrate(|p| at(p).s * p.u_r),
            -n * q.integrate(|p| at(p).s1 * p.u),
            q.h,
        ),
        QuadratureReport::new(
            "sigma_pp_u_ur",
            q.integrate(|p| at(p).s2 * p.u * p.u_r),
            -0.5 * q.integrate(|p| at(p).lap_s1 * p.u * p.u),
            q.h,
        ),
        QuadratureReport::new(
            "weighted_dirichlet",
            q.integrate(|p| at(p).s1 * p.grad_sq),
            q.integrate(|p| {
                let w = at(p);
                w.s1 * p.u + n * k * w.s1 * p.u * p.u - w.s2 * p.u * p.u_r
            }),
            q.h,
        ),
    ]
}

/// `P = |∇u|² + (2/n)u + ku²` at the nodes of a radial profile.
pub fn p_function_radial(u: &dyn RadialFunction, r: &[f64], n: usize, k: f64) -> Vec<f64> {
    r.iter()
        .map(|&x| {
            let (v, d) = (u.value(x), u.d1(x));
            d * d + 2.0 / n as f64 * v + k * v * v
        })
        .collect()
}

/// Inside values of `f` with unknown (NaN) boundary data, so stencils that
/// reach the boundary are visibly invalid.
fn derived(field: &ScalarField2D, f: impl Fn(usize, f64) -> f64) -> ScalarField2D {
    let mut out = field.map(f);
    out.boundary.iter_mut().for_each(|b| *b = f64::NAN);
    out
}

/// `P` at every inside node, with the metric gradient norm.
pub fn p_function(m: &WarpedManifold, u: &ScalarField2D, k: f64) -> ScalarField2D {
    let (dr, ds) = gradient_components(m, u);
    let n = m.n as f64;
    derived(u, |i, v| dr.values[i].powi(2) + ds.values[i].powi(2) + 2.0 / n * v + k * v * v)
}

/// `max |P − c²|` and `max P − c²`.
pub fn p_deviation(p: &[f64], c: f64) -> (f64, f64) {
    let c2 = c * c;
    let dev = p.iter().map(|v| (v - c2).abs()).fold(0.0, f64::max);
    let top = p.iter().copied().fold(f64::NEG_INFINITY, f64::max) - c2;
    (dev, top)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicityReport {
    pub min: f64,
    pub max: f64,
    pub max_abs: f64,
    pub nodes: usize,
    pub h: f64,
}

fn summarize(values: impl Iterator<Item = f64>, h: f64) -> SubharmonicityReport {
    let mut rep = SubharmonicityReport { min: f64::INFINITY, max: f64::NEG_INFINITY, max_abs: 0.0, nodes: 0, h };
    for v in values {
        rep.min = rep.min.min(v);
        rep.max = rep.max.max(v);
        rep.max_abs = rep.max_abs.max(v.abs());
        rep.nodes += 1;
    }
    rep
}

/// Minimum graph distance from the boundary for nested difference stencils:
/// at this depth no stencil of a stencil touches a cut arm.
pub const INTERIOR_DEPTH: usize = 2;

/// Discrete `ΔP` at the interior nodes `0 < r_i < r_last` of a radial grid,
/// with three-point differences of the nodal `P`.
pub fn p_subharmonicity_radial(m: &WarpedManifold, r: &[f64], p: &[f64]) -> SubharmonicityReport {
    let n = m.n as f64;
    let vals = (1..r.len().saturating_sub(1)).filter(|&i| r[i] > 0.0).map(|i| {
        let (hl, hr) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let s = hl + hr;
        let d1 = -hr / (hl * s) * p[i - 1] + (hr - hl) / (hl * hr) * p[i] + hl / (hr * s) * p[i + 1];
        let d2 = 2.0 / (hl * s) * p[i - 1] - 2.0 / (hl * hr) * p[i] + 2.0 / (hr * s) * p[i + 1];
        let w = warp(m, r[i]);
        d2 + (n - 1.0) * w.s1 / w.s * d1
    });
    let h = r.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    summarize(vals, h)
}

/// Discrete `ΔP` over nodes at depth at least [`INTERIOR_DEPTH`].
pub fn p_subharmonicity_check(m: &WarpedManifold, u: &ScalarField2D, k: f64) -> Result<SubharmonicityReport> {
    let p = p_function(m, u, k);
    let lap = effective_dimension_laplacian(m, &p)?;
    let depth = u.mask.depth();
    let vals = interior(u, &depth).map(|i| lap.values[i]);
    let rep = summarize(vals, u.grid().h_r);
    if rep.nodes == 0 {
        return Err(Error::InsufficientResolution("no interior nodes deep enough for a nested stencil".into()));
    }
    Ok(rep)
}

fn interior<'a>(u: &'a ScalarField2D, depth: &'a [Option<usize>]) -> impl Iterator<Item = usize> + 'a {
    u.inside_nodes().filter(move |&i| depth[i].is_some_and(|d| d >= INTERIOR_DEPTH))
}

/// `max |Δ(σu_r) − σ(Δu)_r − 2σ′Δu − (2−n)σ″u_r|` over interior nodes, every
/// operator discrete. The field's boundary values must be exact.
pub fn commutator_identity_residual(m: &WarpedManifold, u: &ScalarField2D) -> Result<f64> {
    let n = m.n as f64;
    let grid = *u.grid();
    let (ur, _) = gradient_components(m, u);
    let lap_u = effective_dimension_laplacian(m, u)?;
    let v = derived(u, |i, _| m.sigma.sigma(grid.point(i).0) * ur.values[i]);
    let lap_v = effective_dimension_laplacian(m, &v)?;
    let lap_u_inner = derived(&lap_u, |_, x| x);
    let (lap_u_r, _) = gradient_components(m, &lap_u_inner);
    let depth = u.mask.depth();
    let res = interior(u, &depth)
        .map(|i| {
            let w = warp(m, grid.point(i).0);
            let rhs = w.s * lap_u_r.values[i] + 2.0 * w.s1 * lap_u.values[i] + (2.0 - n) * w.s2 * ur.values[i];
            (lap_v.values[i] - rhs).abs()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if res == f64::NEG_INFINITY {
        return Err(Error::InsufficientResolution("no interior nodes deep enough for a nested stencil".into()));
    }
    Ok(res)
}

/// Hessian proportionality `∇²u = −(1/n + ku)g` in the frame
/// `(∂_r, σ⁻¹∂_θ, fiber)`: the largest component residual over nodes of
/// depth at least 1.
pub fn hessian_residual(m: &WarpedManifold, u: &ScalarField2D, k: f64) -> f64 {
    let n = m.n as f64;
    let grid = *u.grid();
    let (ur, us) = gradient_components(m, u);
    // u_rr and u_θθ/σ² + (σ′/σ)u_r from the Laplacian split.
    let (urr, _) = gradient_components(m, &derived(u, |i, _| ur.values[i]));
    let (_, uss) = gradient_components(m, &derived(u, |i, _| us.values[i]));
    let (_, urs) = gradient_components(m, &derived(u, |i, _| ur.values[i]));
    let depth = u.mask.depth();
    u.inside_nodes()
        .filter(|&i| depth[i].is_some_and(|d| d >= 1))
        .map(|i| {
            let w = warp(m, grid.point(i).0);
            let target = -(1.0 / n + k * u.values[i]);
            let ratio = w.s1 / w.s;
            // The connection adds (σ′/σ)u_r to e_θ(e_θ u) and removes
            // (σ′/σ)σ⁻¹u_θ from e_θ(e_r u).
            let h_rr = urr.values[i];
            let h_tt = uss.values[i] + ratio * ur.values[i];
            let h_rt = urs.values[i] - ratio * us.values[i];
            let h_fiber = ratio * ur.values[i];
            let mut worst = (h_rr - target).abs().max((h_tt - target).abs()).max(h_rt.abs());
            if m.n > 2 {
                worst = worst.max((h_fiber - target).abs());
            }
            worst
        })
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
}

/// `max |Ric(∇u,∇u) − (n−1)k|∇u|²|`, zero in the equality case.
pub fn ricci_gradient_defect(m: &WarpedManifold, u: &ScalarField2D, k: f64) -> Result<f64> {
    let (ur, us) = gradient_components(m, u);
    let grid = *u.grid();
    let mut worst: f64 = 0.0;
    for i in u.inside_nodes() {
        let g2 = ur.values[i].powi(2) + us.values[i].powi(2);
        let ric = m.ricci_on_gradient(grid.point(i).0, ur.values[i], g2)?;
        worst = worst.max((ric - (m.n as f64 - 1.0) * k * g2).abs());
    }
    Ok(worst)
}
