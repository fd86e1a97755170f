use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use super::{Dir, DomainMask, Grid2D};
use crate::error::{Error, Result};
use crate::geometry::WarpedManifold;

/// Distance from a centre point, sampled on every grid node (infinite where
/// the march was stopped early).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub grid: Grid2D,
    pub center: (f64, f64),
    pub values: Vec<f64>,
}

impl DistanceField {
    /// Bilinear interpolation, periodic in θ.
    pub fn interpolate(&self, r: f64, theta: f64) -> f64 {
        let g = &self.grid;
        let (x, y) = g.locate(r, theta);
        if x < 0.0 || x > (g.nr - 1) as f64 {
            return f64::INFINITY;
        }
        let i = (x.floor() as usize).min(g.nr - 2);
        let j = y.floor() as usize % g.n_theta;
        let (fx, fy) = (x - i as f64, y - y.floor());
        let j1 = (j + 1) % g.n_theta;
        let v = |a: usize, b: usize| self.values[g.index(a, b)];
        (1.0 - fx) * ((1.0 - fy) * v(i, j) + fy * v(i, j1)) + fx * ((1.0 - fy) * v(i + 1, j) + fy * v(i + 1, j1))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum State {
    Far,
    Trial,
    Known,
}

/// Fast marching for `d_r² + d_θ²/σ² = 1`, `d(center) = 0`.
pub fn eikonal_distance(m: &WarpedManifold, center: (f64, f64), grid: &Grid2D) -> Result<DistanceField> {
    eikonal_distance_limited(m, center, grid, f64::INFINITY)
}

/// As [`eikonal_distance`], stopping once the front passes `limit`.
pub fn eikonal_distance_limited(m: &WarpedManifold, center: (f64, f64), grid: &Grid2D, limit: f64) -> Result<DistanceField> {
    let (r0, t0) = center;
    if !(r0 >= grid.r_lo && r0 <= grid.r_hi()) {
        return Err(Error::Domain(format!("centre r = {r0} outside the chart [{}, {}]", grid.r_lo, grid.r_hi())));
    }
    let n = grid.len();
    let arc: Vec<f64> = (0..grid.nr).map(|i| m.sigma.sigma(grid.r(i)) * grid.h_theta).collect();
    let mut d = vec![f64::INFINITY; n];
    let mut state = vec![State::Far; n];
    let mut heap = BinaryHeap::new();

    // Nodes within a couple of cells get the local metric distance directly.
    let reach = 2.5 * grid.h_r.max(m.sigma.sigma(r0) * grid.h_theta);
    let i0 = ((r0 - grid.r_lo) / grid.h_r).round() as isize;
    let di = (reach / grid.h_r).ceil() as isize + 1;
    let s_min = (0..grid.nr).map(|i| arc[i]).fold(f64::INFINITY, f64::min) / grid.h_theta;
    let dj = ((reach / (s_min * grid.h_theta)).ceil() as isize + 1).min(grid.n_theta as isize / 2);
    let j0 = (t0.rem_euclid(2.0 * PI) / grid.h_theta).round() as isize;
    for i in (i0 - di).max(0)..=(i0 + di).min(grid.nr as isize - 1) {
        for jj in j0 - dj..=j0 + dj {
            let (i, j) = (i as usize, grid.wrap(jj));
            let idx = grid.index(i, j);
            let r = grid.r(i);
            let dth = wrapped(grid.theta(j) - t0);
            let s_mid = m.sigma.sigma(0.5 * (r + r0));
            let dist = ((r - r0).powi(2) + (s_mid * dth).powi(2)).sqrt();
            if dist <= reach && dist < d[idx] {
                d[idx] = dist;
                state[idx] = State::Known;
            }
        }
    }
    let known: Vec<usize> = (0..n).filter(|&i| state[i] == State::Known).collect();
    if known.is_empty() {
        let idx = grid.index(i0.clamp(0, grid.nr as isize - 1) as usize, grid.wrap(j0));
        d[idx] = 0.0;
        state[idx] = State::Trial;
        heap.push(Entry(0.0, idx));
    }
    for &idx in &known {
        for dir in Dir::ALL {
            if let Some(nb) = grid.neighbor(idx, dir) {
                if state[nb] != State::Known {
                    let v = update(grid, &arc, &d, &state, nb);
                    if v < d[nb] {
                        d[nb] = v;
                        state[nb] = State::Trial;
                        heap.push(Entry(v, nb));
                    }
                }
            }
        }
    }
    while let Some(Entry(v, idx)) = heap.pop() {
        if state[idx] == State::Known || v > d[idx] {
            continue;
        }
        if v > limit {
            break;
        }
        state[idx] = State::Known;
        for dir in Dir::ALL {
            if let Some(nb) = grid.neighbor(idx, dir) {
                if state[nb] != State::Known {
                    let nv = update(grid, &arc, &d, &state, nb);
                    if nv < d[nb] {
                        d[nb] = nv;
                        state[nb] = State::Trial;
                        heap.push(Entry(nv, nb));
                    }
                }
            }
        }
    }
    for i in 0..n {
        if state[i] != State::Known {
            d[i] = f64::INFINITY;
        }
    }
    Ok(DistanceField { grid: *grid, center, values: d })
}

fn wrapped(t: f64) -> f64 {
    (t + PI).rem_euclid(2.0 * PI) - PI
}

/// Upwind value and weight along one axis: `c (d − a)²` with second-order
/// data when the next node is also known and monotone.
fn axis_term(grid: &Grid2D, d: &[f64], state: &[State], idx: usize, minus: Dir, plus: Dir, h: f64) -> Option<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for dir in [minus, plus] {
        let Some(n1) = grid.neighbor(idx, dir) else { continue };
        if state[n1] != State::Known {
            continue;
        }
        let a1 = d[n1];
        let term = match grid.neighbor(n1, dir) {
            Some(n2) if state[n2] == State::Known && d[n2] <= a1 => {
                ((4.0 * a1 - d[n2]) / 3.0, 9.0 / (4.0 * h * h), a1)
            }
            _ => (a1, 1.0 / (h * h), a1),
        };
        if best.is_none_or(|b| term.2 < b.2) {
            best = Some(term);
        }
    }
    best
}

fn solve_terms(terms: &[(f64, f64, f64)]) -> Option<f64> {
    let a: f64 = terms.iter().map(|t| t.1).sum();
    let b: f64 = -2.0 * terms.iter().map(|t| t.1 * t.0).sum::<f64>();
    let c: f64 = terms.iter().map(|t| t.1 * t.0 * t.0).sum::<f64>() - 1.0;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let v = (-b + disc.sqrt()) / (2.0 * a);
    terms.iter().all(|t| v >= t.2).then_some(v)
}

fn update(grid: &Grid2D, arc: &[f64], d: &[f64], state: &[State], idx: usize) -> f64 {
    let (i, _) = grid.coords(idx);
    let tr = axis_term(grid, d, state, idx, Dir::RMinus, Dir::RPlus, grid.h_r);
    let tt = axis_term(grid, d, state, idx, Dir::ThetaMinus, Dir::ThetaPlus, arc[i]);
    let first = |t: (f64, f64, f64), h: f64| (t.2, 1.0 / (h * h), t.2);
    let mut candidates = Vec::new();
    match (tr, tt) {
        (Some(a), Some(b)) => {
            if let Some(v) = solve_terms(&[a, b]) {
                candidates.push(v);
            } else if let Some(v) = solve_terms(&[first(a, grid.h_r), first(b, arc[i])]) {
                candidates.push(v);
            }
            candidates.push(a.0 + 1.0 / a.1.sqrt());
            candidates.push(b.0 + 1.0 / b.1.sqrt());
        }
        (Some(a), None) => candidates.push(a.0 + 1.0 / a.1.sqrt()),
        (None, Some(b)) => candidates.push(b.0 + 1.0 / b.1.sqrt()),
        (None, None) => {}
    }
    candidates.into_iter().fold(f64::INFINITY, f64::min)
}

/// `{d < radius}` for the eikonal distance from `center`, cut by linear
/// interpolation of `d` along edges.
pub fn geodesic_ball_mask(m: &WarpedManifold, center: (f64, f64), radius: f64, grid: &Grid2D) -> Result<DomainMask> {
    let h_max = grid.h_r.max(m.sigma.sigma(grid.r_hi()) * grid.h_theta).max(m.sigma.sigma(grid.r_lo) * grid.h_theta);
    let dist = eikonal_distance_limited(m, center, grid, radius + 4.0 * h_max)?;
    let v: Vec<f64> = dist.values.iter().map(|&x| x - radius).collect();
    DomainMask::from_node_values(m, *grid, &v)
}
