use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sparse::{bicgstab, Csr};
use super::{Dir, DomainMask, ScalarField2D};
use crate::error::{Error, Result};
use crate::geometry::WarpedManifold;

/// Where a stencil arm ends: another inside node or a boundary cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Slot {
    Node(usize),
    Boundary(usize),
}

#[derive(Debug, Clone, Copy)]
struct Arm {
    slot: Slot,
    h: f64,
}

fn arm(m: &WarpedManifold, mask: &DomainMask, idx: usize, dir: Dir) -> Arm {
    let len = mask.grid.edge_length(m, idx, dir);
    match mask.cut_index(idx, dir) {
        Some(k) => Arm { slot: Slot::Boundary(k), h: mask.cuts[k].frac * len },
        None => Arm { slot: Slot::Node(mask.grid.neighbor(idx, dir).expect("inside node on chart edge")), h: len },
    }
}

/// Three-point weights `(left, centre, right)` for the first and second
/// derivative on a nonuniform stencil with spacings `hl`, `hr`.
fn weights(hl: f64, hr: f64) -> ([f64; 3], [f64; 3]) {
    let s = hl + hr;
    let first = [-hr / (hl * s), (hr - hl) / (hl * hr), hl / (hr * s)];
    let second = [2.0 / (hl * s), -2.0 / (hl * hr), 2.0 / (hr * s)];
    (first, second)
}

/// Linear combination `centre * u_C + Σ w u_slot`.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub centre: f64,
    pub terms: [(Slot, f64); 4],
}

impl Stencil {
    pub fn apply(&self, field: &ScalarField2D, idx: usize) -> f64 {
        let mut acc = self.centre * field.values[idx];
        for &(slot, w) in &self.terms {
            acc += w * match slot {
                Slot::Node(i) => field.values[i],
                Slot::Boundary(k) => field.boundary[k],
            };
        }
        acc
    }
}

struct NodeStencils {
    laplacian: Stencil,
    d_r: Stencil,
    d_s: Stencil,
}

fn node_stencils(m: &WarpedManifold, mask: &DomainMask, idx: usize) -> NodeStencils {
    let r = mask.grid.point(idx).0;
    let drift = (m.n as f64 - 1.0) * m.sigma.eval_unchecked(r, 1) / m.sigma.sigma(r);
    let (rl, rr) = (arm(m, mask, idx, Dir::RMinus), arm(m, mask, idx, Dir::RPlus));
    let (tl, tr) = (arm(m, mask, idx, Dir::ThetaMinus), arm(m, mask, idx, Dir::ThetaPlus));
    let (fr, sr) = weights(rl.h, rr.h);
    let (ft, st) = weights(tl.h, tr.h);
    NodeStencils {
        laplacian: Stencil {
            centre: sr[1] + drift * fr[1] + st[1],
            terms: [
                (rl.slot, sr[0] + drift * fr[0]),
                (rr.slot, sr[2] + drift * fr[2]),
                (tl.slot, st[0]),
                (tr.slot, st[2]),
            ],
        },
        d_r: Stencil { centre: fr[1], terms: [(rl.slot, fr[0]), (rr.slot, fr[2]), (tl.slot, 0.0), (tr.slot, 0.0)] },
        d_s: Stencil { centre: ft[1], terms: [(rl.slot, 0.0), (rr.slot, 0.0), (tl.slot, ft[0]), (tr.slot, ft[2])] },
    }
}

/// Discrete `u_rr + (n−1)(σ′/σ)u_r + u_θθ/σ²` at every inside node, using the
/// field's boundary values on cut arms.
pub fn effective_dimension_laplacian(m: &WarpedManifold, field: &ScalarField2D) -> Result<ScalarField2D> {
    if m.n < 2 {
        return Err(Error::Precondition("dimension must be at least 2".into()));
    }
    let mask = &field.mask;
    Ok(field.map(|idx, _| node_stencils(m, mask, idx).laplacian.apply(field, idx)))
}

/// `(u_r, σ⁻¹u_θ)` at every inside node.
pub fn gradient_components(m: &WarpedManifold, field: &ScalarField2D) -> (ScalarField2D, ScalarField2D) {
    let mask = &field.mask;
    let dr = field.map(|idx, _| node_stencils(m, mask, idx).d_r.apply(field, idx));
    let ds = field.map(|idx, _| node_stencils(m, mask, idx).d_s.apply(field, idx));
    (dr, ds)
}

/// `|∇u|_g = (u_r² + u_θ²/σ²)^{1/2}` at every inside node.
pub fn gradient_norm(m: &WarpedManifold, field: &ScalarField2D) -> ScalarField2D {
    let (dr, ds) = gradient_components(m, field);
    dr.map(|idx, a| a.hypot(ds.values[idx]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Row partitions for the matrix-vector products; results are
    /// reproducible for a fixed count.
    pub partitions: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-10, max_iterations: 20_000, partitions: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub field: ScalarField2D,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Set when some inside value is not positive.
    pub warning: Option<String>,
}

/// Solves `Δu + nku = −1` with `u = 0` on the mask boundary.
pub fn solve_dirichlet(m: &WarpedManifold, k: f64, mask: Arc<DomainMask>, opts: &SolverOptions) -> Result<DirichletSolution> {
    if mask.is_empty() {
        return Err(Error::Precondition("empty domain mask".into()));
    }
    let grid = mask.grid;
    let mut unknown = vec![usize::MAX; grid.len()];
    let nodes: Vec<usize> = (0..grid.len()).filter(|&i| mask.inside[i]).collect();
    for (u, &idx) in nodes.iter().enumerate() {
        unknown[idx] = u;
    }
    let nk = m.n as f64 * k;
    let rows: Vec<Vec<(usize, f64)>> = nodes
        .iter()
        .map(|&idx| {
            let st = node_stencils(m, &mask, idx).laplacian;
            let mut row = vec![(unknown[idx], st.centre + nk)];
            for (slot, w) in st.terms {
                if let Slot::Node(nb) = slot {
                    row.push((unknown[nb], w));
                }
            }
            row
        })
        .collect();
    let a = Csr::from_rows(rows);
    let b = vec![-1.0; nodes.len()];
    let mut x = vec![0.0; nodes.len()];
    let mut stats = None;
    let mut total_iterations = 0;
    let mut inner = 0.0;
    // A restart recovers the rare case where the recurrence drifts from the true residual.
    for _ in 0..3 {
        let mut resid = vec![0.0; nodes.len()];
        a.mul(&x, &mut resid, opts.partitions);
        for (ri, bi) in resid.iter_mut().zip(&b) {
            *ri = bi - *ri;
        }
        let (dx, st) = bicgstab(&a, &resid, opts.tolerance * 0.5, opts.max_iterations, opts.partitions);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        let mut ax = vec![0.0; nodes.len()];
        a.mul(&x, &mut ax, opts.partitions);
        let rel = ax.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
            / (nodes.len() as f64).sqrt();
        total_iterations += st.iterations;
        inner = st.relative_residual;
        stats = Some((total_iterations, rel));
        if rel < opts.tolerance {
            break;
        }
    }
    let (iterations, relative_residual) = stats.unwrap();
    if !(relative_residual < opts.tolerance) {
        let area = mask.volume(m);
        return Err(Error::Solver(format!(
            "no convergence for k = {k} on a domain of volume {area:.6} ({} unknowns): relative residual {relative_residual:e} (last correction solve {inner:e})",
            nodes.len()
        )));
    }
    let mut values = vec![f64::NAN; grid.len()];
    for (u, &idx) in nodes.iter().enumerate() {
        values[idx] = x[u];
    }
    let field = ScalarField2D::with_zero_boundary(mask, values);
    let min = field.min_inside();
    let warning = (min <= 0.0).then(|| {
        format!("solution is not positive (min {min:e}); k = {k} may be at or beyond the first eigenvalue of this domain")
    });
    Ok(DirichletSolution { field, iterations, relative_residual, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub r: f64,
    pub theta: f64,
    pub grad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGradientStats {
    pub samples: Vec<BoundarySample>,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl BoundaryGradientStats {
    /// `std / mean`, the overdetermined defect.
    pub fn relative_defect(&self) -> f64 {
        self.std / self.mean
    }
}

/// Minimum `n·e` between the outward normal and the cut edge for a sample to
/// be used; shallower edges make `|∇u| = −∂_e u / (n·e)` ill-conditioned.
const MIN_EDGE_ALIGNMENT: f64 = 0.3;

/// `|∇u|` on the boundary, one sample per well-aligned cut.
///
/// The derivative along the cut edge comes from the quadratic through the
/// boundary point, the cut node and the node behind it; since `u` is constant
/// on the boundary, the gradient is normal there.
pub fn boundary_gradient_stats(m: &WarpedManifold, field: &ScalarField2D) -> Result<BoundaryGradientStats> {
    let mask = &field.mask;
    let grid = &mask.grid;
    let mut samples = Vec::new();
    for (k, cut) in mask.cuts.iter().enumerate() {
        let e = cut.dir.unit();
        let align = e[0] * cut.normal[0] + e[1] * cut.normal[1];
        if align < MIN_EDGE_ALIGNMENT {
            continue;
        }
        let len = grid.edge_length(m, cut.node, cut.dir);
        let back = arm(m, mask, cut.node, cut.dir.opposite());
        let x0 = -back.h;
        let u0 = match back.slot {
            Slot::Node(i) => field.values[i],
            Slot::Boundary(b) => field.boundary[b],
        };
        let (x1, u1) = (0.0, field.values[cut.node]);
        let (x2, u2) = (cut.frac * len, field.boundary[k]);
        let d = u0 * (x2 - x1) / ((x0 - x1) * (x0 - x2))
            + u1 * (x2 - x0) / ((x1 - x0) * (x1 - x2))
            + u2 * (2.0 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1));
        let (r, theta) = grid.along(cut.node, cut.dir, cut.frac);
        samples.push(BoundarySample { r, theta, grad: (-d / align).abs() });
    }
    if samples.len() < 8 {
        return Err(Error::InsufficientResolution(format!(
            "only {} usable boundary samples; refine the grid",
            samples.len()
        )));
    }
    let count = samples.len() as f64;
    let mean = samples.iter().map(|s| s.grad).sum::<f64>() / count;
    let var = samples.iter().map(|s| (s.grad - mean).powi(2)).sum::<f64>() / count;
    let min = samples.iter().map(|s| s.grad).fold(f64::INFINITY, f64::min);
    let max = samples.iter().map(|s| s.grad).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundaryGradientStats { samples, mean, std: var.sqrt(), min, max })
}
