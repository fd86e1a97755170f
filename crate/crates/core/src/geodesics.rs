//! Geodesics of `dr² + σ(r)² dθ²` in a warped chart.
//!
//! `r″ = σσ′θ′²`, `θ″ = −2(σ′/σ) r′θ′`; the Clairaut quantity `σ²θ′` is
//! conserved. On model manifolds with odd σ the equations are invariant under
//! `(r, θ) ↦ (−r, θ + π)`, so paths through the pole are integrated in the
//! extended chart and folded back.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field2d::DistanceField;
use crate::geometry::WarpedManifold;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    /// `σ²θ′` at the start.
    pub clairaut_constant: f64,
    /// Initial speed, 1 for unit directions.
    pub speed: f64,
    pub max_speed_drift: f64,
    pub max_clairaut_drift: f64,
    /// True when the path left the chart and was truncated.
    pub exited: bool,
}

impl GeodesicPath {
    pub fn end(&self) -> (f64, f64) {
        (*self.r.last().unwrap(), *self.theta.last().unwrap())
    }

    pub fn length(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,r,theta")?;
        for i in 0..self.t.len() {
            writeln!(out, "{},{},{}", self.t[i], self.r[i], self.theta[i])?;
        }
        Ok(())
    }
}

type State = [f64; 4];

fn rhs(m: &WarpedManifold, y: &State) -> State {
    let s = m.sigma.eval_unchecked(y[0], 0);
    let s1 = m.sigma.eval_unchecked(y[0], 1);
    let tt = if y[3] == 0.0 { 0.0 } else { -2.0 * s1 / s * y[2] * y[3] };
    [y[2], y[3], s * s1 * y[3] * y[3], tt]
}

fn rk4(m: &WarpedManifold, y: &State, h: f64) -> State {
    let add = |a: &State, b: &State, c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2], a[3] + c * b[3]];
    let k1 = rhs(m, y);
    let k2 = rhs(m, &add(y, &k1, 0.5 * h));
    let k3 = rhs(m, &add(y, &k2, 0.5 * h));
    let k4 = rhs(m, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Extended radial range: models continue through the pole to `−hi`.
fn extended_range(m: &WarpedManifold) -> (f64, f64) {
    let d = m.sigma.domain;
    if m.is_model() {
        (-d.hi, d.hi)
    } else {
        (d.lo, d.hi)
    }
}

fn fold(r: f64, theta: f64) -> (f64, f64) {
    if r < 0.0 {
        (-r, theta + PI)
    } else {
        (r, theta)
    }
}

/// Integrates the geodesic from `start` with initial tangent `direction`
/// given in the orthonormal frame `(∂_r, σ⁻¹∂_θ)`.
pub fn geodesic_shoot(m: &WarpedManifold, start: (f64, f64), direction: [f64; 2], length: f64, step: f64) -> Result<GeodesicPath> {
    if !m.sigma.domain.contains(start.0) || (m.is_model() && start.0 == 0.0) {
        return Err(Error::Domain(format!("start radius {} is not an interior chart point", start.0)));
    }
    if !(step > 0.0) || length < 0.0 {
        return Err(Error::Precondition("step must be positive and length nonnegative".into()));
    }
    let speed = direction[0].hypot(direction[1]);
    if speed == 0.0 {
        return Err(Error::Precondition("direction must be nonzero".into()));
    }
    let s0 = m.sigma.sigma(start.0);
    let mut y: State = [start.0, start.1, direction[0], direction[1] / s0];
    let clairaut = s0 * s0 * y[3];
    let steps = (length / step).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { length / steps as f64 };
    let (lo, hi) = extended_range(m);
    let mut path = GeodesicPath {
        t: vec![0.0],
        r: vec![start.0],
        theta: vec![start.1],
        clairaut_constant: clairaut,
        speed,
        max_speed_drift: 0.0,
        max_clairaut_drift: 0.0,
        exited: false,
    };
    for i in 0..steps {
        let next = rk4(m, &y, h);
        if !(next[0] > lo && next[0] < hi) || !next.iter().all(|v| v.is_finite()) {
            path.exited = true;
            break;
        }
        y = next;
        let s = m.sigma.eval_unchecked(y[0], 0);
        let v = y[2].hypot(s * y[3]);
        path.max_speed_drift = path.max_speed_drift.max((v - speed).abs());
        path.max_clairaut_drift = path.max_clairaut_drift.max((s * s * y[3] - clairaut).abs());
        let (r, th) = fold(y[0], y[1]);
        path.t.push(if i + 1 == steps { length } else { (i + 1) as f64 * h });
        path.r.push(r);
        path.theta.push(th);
    }
    Ok(path)
}

/// Unit direction making angle `psi` with `∂_r`. Components below rounding
/// are snapped to zero so radial shots stay exactly radial.
pub fn direction(psi: f64) -> [f64; 2] {
    let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    [snap(psi.cos()), snap(psi.sin())]
}

fn wrap(t: f64) -> f64 {
    (t + PI).rem_euclid(2.0 * PI) - PI
}

/// Length of the coordinate segment from `p` to `q` (θ taken the short way),
/// an upper bound for the distance.
fn coordinate_segment_length(m: &WarpedManifold, p: (f64, f64), q: (f64, f64)) -> f64 {
    let dr = q.0 - p.0;
    let dt = wrap(q.1 - p.1);
    let n = 256;
    (0..n)
        .map(|i| {
            let s = (i as f64 + 0.5) / n as f64;
            let r = p.0 + s * dr;
            dr.hypot(m.sigma.sigma(r) * dt) / n as f64
        })
        .sum()
}

/// Chart-local miss distance between two points.
fn miss(m: &WarpedManifold, a: (f64, f64), b: (f64, f64)) -> f64 {
    let rm = 0.5 * (a.0 + b.0);
    (a.0 - b.0).hypot(m.sigma.eval_unchecked(rm, 0).abs() * wrap(a.1 - b.1))
}

const SWEEP_ANGLES: usize = 256;

/// Shoots from `p` to `q`: an angle sweep followed by Newton refinement on
/// (initial angle, length). Returns the shortest connecting geodesic found.
pub fn distance_by_shooting(m: &WarpedManifold, p: (f64, f64), q: (f64, f64), tol: f64) -> Result<f64> {
    for pt in [p, q] {
        if !m.sigma.domain.contains(pt.0) {
            return Err(Error::Domain(format!("point radius {} outside the chart", pt.0)));
        }
    }
    if p.0 == q.0 && wrap(q.1 - p.1) == 0.0 {
        return Ok(0.0);
    }
    let l_max = 1.05 * coordinate_segment_length(m, p, q);
    let coarse = l_max / 200.0;
    let mut sweep = Vec::with_capacity(SWEEP_ANGLES);
    for i in 0..SWEEP_ANGLES {
        let psi = 2.0 * PI * i as f64 / SWEEP_ANGLES as f64;
        let path = geodesic_shoot(m, p, direction(psi), l_max, coarse)?;
        let (best, at) = (0..path.t.len())
            .map(|k| (miss(m, (path.r[k], path.theta[k]), q), path.t[k]))
            .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
        sweep.push((psi, best, at));
    }
    // Local minima of the miss over the circular sweep.
    let mut candidates: Vec<(f64, f64, f64)> = (0..SWEEP_ANGLES)
        .filter(|&i| {
            let prev = sweep[(i + SWEEP_ANGLES - 1) % SWEEP_ANGLES].1;
            let next = sweep[(i + 1) % SWEEP_ANGLES].1;
            sweep[i].1 < prev && sweep[i].1 <= next
        })
        .map(|i| sweep[i])
        .collect();
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    candidates.truncate(6);

    let fine = (l_max / 2000.0).min(1e-3);
    let mut best: Option<f64> = None;
    for (psi0, _, l0) in candidates {
        if let Some(len) = refine(m, p, q, psi0, l0.max(coarse), fine, tol) {
            if best.is_none_or(|b| len < b) {
                best = Some(len);
            }
        }
    }
    best.ok_or_else(|| Error::NotFound(format!("no geodesic from {p:?} reaches {q:?} within tolerance {tol:e}")))
}

fn endpoint_residual(m: &WarpedManifold, p: (f64, f64), q: (f64, f64), psi: f64, len: f64, step: f64) -> Option<[f64; 2]> {
    let path = geodesic_shoot(m, p, direction(psi), len, step).ok()?;
    if path.exited || path.max_speed_drift > 1e-8 * len.max(1.0) || path.max_clairaut_drift > 1e-8 * len.max(1.0) {
        return None;
    }
    let (r, th) = path.end();
    Some([r - q.0, m.sigma.sigma(q.0) * wrap(th - q.1)])
}

fn refine(m: &WarpedManifold, p: (f64, f64), q: (f64, f64), mut psi: f64, mut len: f64, step: f64, tol: f64) -> Option<f64> {
    let eps = 1e-7;
    if psi.sin() == 0.0 || (psi.sin().abs() < 1e-12) {
        // Radial shot: only the length is free, and nearby angles pass
        // arbitrarily close to the pole where polar coordinates degenerate.
        psi = psi.cos().signum().min(0.0).abs() * PI;
        for _ in 0..40 {
            let f = endpoint_residual(m, p, q, psi, len, step)?;
            if f[0].hypot(f[1]) < tol {
                return Some(len);
            }
            if f[1].abs() >= tol {
                return None;
            }
            let fl = endpoint_residual(m, p, q, psi, len + eps, step)?;
            let slope = (fl[0] - f[0]) / eps;
            if slope.abs() < 1e-14 {
                return None;
            }
            len -= f[0] / slope;
            if len <= 0.0 {
                return None;
            }
        }
        return None;
    }
    for _ in 0..40 {
        let f = endpoint_residual(m, p, q, psi, len, step)?;
        if f[0].hypot(f[1]) < tol {
            return Some(len);
        }
        let fp = endpoint_residual(m, p, q, psi + eps, len, step)?;
        let fl = endpoint_residual(m, p, q, psi, len + eps, step)?;
        let j = [[(fp[0] - f[0]) / eps, (fl[0] - f[0]) / eps], [(fp[1] - f[1]) / eps, (fl[1] - f[1]) / eps]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let dpsi = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dlen = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        // Damp large steps; the sweep already puts us near the root.
        let scale = 1.0f64.min(0.5 / dpsi.abs().max(1e-300)).min(0.5 * len / dlen.abs().max(1e-300));
        psi -= scale * dpsi;
        len -= scale * dlen;
        if len <= 0.0 {
            return None;
        }
    }
    None
}

/// Source of distances from a fixed centre.
pub enum DistanceOracle<'a> {
    /// Interpolated fast-marching field; its centre must match.
    Eikonal(&'a DistanceField),
    Shooting { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarReport {
    /// `min (radius − d(center, γ(t)))` over rays and samples `t ∈ (0, radius]`.
    pub margin: f64,
    pub rays: usize,
    pub truncated_rays: usize,
}

/// Shoots `n_rays` unit geodesics of length `radius` from `center` and checks
/// that every sample stays in the closed ball.
pub fn star_shapedness_check(
    m: &WarpedManifold,
    center: (f64, f64),
    radius: f64,
    n_rays: usize,
    oracle: &DistanceOracle<'_>,
) -> Result<StarReport> {
    if n_rays == 0 {
        return Err(Error::Precondition("need at least one ray".into()));
    }
    let step = (radius / 400.0).min(1e-3);
    let stride = match oracle {
        DistanceOracle::Eikonal(_) => 1,
        DistanceOracle::Shooting { .. } => 25,
    };
    let mut margin = f64::INFINITY;
    let mut truncated = 0;
    for i in 0..n_rays {
        let psi = 2.0 * PI * i as f64 / n_rays as f64;
        let path = geodesic_shoot(m, center, direction(psi), radius, step)?;
        if path.exited {
            truncated += 1;
        }
        let last = path.t.len() - 1;
        for k in (1..=last).filter(|k| k % stride == 0 || *k == last) {
            let pt = (path.r[k], path.theta[k]);
            let d = match oracle {
                DistanceOracle::Eikonal(f) => f.interpolate(pt.0, pt.1),
                DistanceOracle::Shooting { tol } => distance_by_shooting(m, center, pt, *tol)?,
            };
            margin = margin.min(radius - d);
        }
    }
    Ok(StarReport { margin, rays: n_rays, truncated_rays: truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::entry;
    use crate::field2d::{eikonal_distance, Grid2D};
    use crate::geometry::{Fiber, Interval, WarpFamily, WarpingFunction};

    fn flat() -> WarpedManifold {
        entry("space_form:k=0", 2).unwrap().manifold
    }

    fn hyperbolic() -> WarpedManifold {
        entry("space_form:k=-1", 2).unwrap().manifold
    }

    #[test]
    fn radial_and_tangential_shots() {
        let p = geodesic_shoot(&flat(), (1.0, 0.0), [1.0, 0.0], 1.0, 1e-3).unwrap();
        let (r, th) = p.end();
        assert!((r - 2.0).abs() < 1e-12 && th.abs() < 1e-12);
        let p = geodesic_shoot(&flat(), (1.0, 0.0), [0.0, 1.0], 2.0, 1e-3).unwrap();
        assert!((p.end().0 - 5f64.sqrt()).abs() < 1e-10);
        assert!((p.end().1 - 2f64.atan()).abs() < 1e-10);
        assert!(p.max_speed_drift < 1e-8 * 2.0 && p.max_clairaut_drift < 1e-8 * 2.0);
    }

    #[test]
    fn cylinder_geodesics_are_straight() {
        let w = WarpingFunction::new(WarpFamily::Constant { c: 1.0 }, Interval::real_line()).unwrap();
        let m = WarpedManifold::new(2, w, Fiber::circle(), 0.0).unwrap();
        let p = geodesic_shoot(&m, (0.2, 0.5), direction(0.7), 1.5, 1e-3).unwrap();
        for i in 0..p.t.len() {
            assert!((p.r[i] - 0.2 - p.t[i] * 0.7f64.cos()).abs() < 1e-12);
            assert!((p.theta[i] - 0.5 - p.t[i] * 0.7f64.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn pass_through_pole_folds_chart() {
        let p = geodesic_shoot(&flat(), (1.0, 0.0), [-1.0, 0.0], 1.5, 1e-3).unwrap();
        let (r, th) = p.end();
        assert!(!p.exited);
        assert!((r - 0.5).abs() < 1e-12 && (th - PI).abs() < 1e-12);
    }

    #[test]
    fn conservation_on_hyperbolic_plane() {
        for psi in [0.3, 1.2, 2.0, 4.0] {
            let p = geodesic_shoot(&hyperbolic(), (1.0, 0.2), direction(psi), 1.0, 1e-3).unwrap();
            assert!(p.max_speed_drift < 1e-8 && p.max_clairaut_drift < 1e-8);
        }
    }

    #[test]
    fn chart_exit_truncates() {
        let m = entry("space_form:k=1", 2).unwrap().manifold;
        let p = geodesic_shoot(&m, (1.0, 0.0), [1.0, 0.0], 2.0, 1e-3).unwrap();
        assert!(p.exited && p.length() < PI / 2.0);
    }

    #[test]
    fn shooting_distance_examples() {
        let d = distance_by_shooting(&flat(), (2.0, 0.0), (2.0, PI / 8.0), 1e-9).unwrap();
        assert!((d - 4.0 * (PI / 16.0).sin()).abs() < 1e-8, "{d}");
        assert_eq!(distance_by_shooting(&flat(), (2.0, 0.3), (2.0, 0.3), 1e-9).unwrap(), 0.0);
        // cosh d = cosh²1 − sinh²1 cos π = cosh 2: the geodesic runs through the pole.
        let d = distance_by_shooting(&hyperbolic(), (1.0, 0.0), (1.0, PI), 1e-9).unwrap();
        assert!((d - 2.0).abs() < 1e-7, "{d}");
        let d = distance_by_shooting(&hyperbolic(), (1.0, 0.0), (1.3, 0.5), 1e-9).unwrap();
        let exact = (1f64.cosh() * 1.3f64.cosh() - 1f64.sinh() * 1.3f64.sinh() * 0.5f64.cos()).acosh();
        assert!((d - exact).abs() < 1e-7);
    }

    #[test]
    fn star_shaped_flat_and_hyperbolic_balls() {
        let h = 1.0 / 64.0;
        for (m, c, rad) in [(flat(), (2.0, 0.0), 0.5), (hyperbolic(), (1.0, 0.0), 0.3)] {
            let grid = Grid2D::covering(&m, c.0 - rad, c.0 + rad, h).unwrap();
            let field = eikonal_distance(&m, c, &grid).unwrap();
            let rep = star_shapedness_check(&m, c, rad, 64, &DistanceOracle::Eikonal(&field)).unwrap();
            assert!(rep.margin >= -h, "{}", rep.margin);
            assert_eq!(rep.truncated_rays, 0);
        }
    }

    #[test]
    fn single_radial_ray_has_zero_margin() {
        let rep = star_shapedness_check(&hyperbolic(), (1.0, 0.0), 0.3, 1, &DistanceOracle::Shooting { tol: 1e-10 }).unwrap();
        assert!(rep.margin.abs() < 1e-8, "{}", rep.margin);
    }
}
