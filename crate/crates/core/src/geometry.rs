//! Warped product manifolds `I × N` with metric `dr² + σ(r)² g_N`.
//!
//! Curvature is evaluated in closed form from `σ` and its derivatives; the
//! fiber enters only through a scalar lower bound on its Ricci tensor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial coordinate interval of a warped product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    #[serde(with = "finite_or_null")]
    pub hi: f64,
    /// True for model manifolds, whose interval is `[0, R)` with a pole at `r = 0`.
    pub closed_at_lo: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::build(lo, hi, false)
    }

    /// `[0, hi)`, the radial range of a model manifold.
    pub fn with_pole(hi: f64) -> Result<Self> {
        Self::build(0.0, hi, true)
    }

    pub fn real_line() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, closed_at_lo: false }
    }

    fn build(lo: f64, hi: f64, closed_at_lo: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Construction(format!("empty interval ({lo}, {hi})")));
        }
        if closed_at_lo && lo != 0.0 {
            return Err(Error::Construction("a closed lower end is only allowed at r = 0".into()));
        }
        Ok(Interval { lo, hi, closed_at_lo })
    }

    pub fn contains(&self, r: f64) -> bool {
        let above = if self.closed_at_lo { r >= self.lo } else { r > self.lo };
        above && r < self.hi
    }

    /// Finite window used when an end is infinite: at most 10 units long.
    pub fn sample_window(&self) -> (f64, f64) {
        let lo = if self.lo.is_finite() {
            self.lo
        } else if self.hi.is_finite() {
            self.hi - 10.0
        } else {
            -5.0
        };
        let hi = if self.hi.is_finite() { self.hi } else { lo + 10.0 };
        (lo, hi)
    }

    /// `count` strictly interior radii, evenly spaced over the sample window.
    pub fn interior_samples(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.sample_window();
        (0..count)
            .map(|i| lo + (hi - lo) * (i as f64 + 1.0) / (count as f64 + 1.0))
            .collect()
    }
}

pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Samples of a warping function interpolated by local cubics through the
/// four nearest nodes. Interpolation error is `O(h⁴)` for `σ`, `O(h³)` for
/// `σ′` and `O(h²)` for `σ″`; `σ‴` is a centered difference of `σ″`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedSigma {
    pub r: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl TabulatedSigma {
    pub fn new(r: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if r.len() != sigma.len() || r.len() < 4 {
            return Err(Error::Construction("tabulated warping needs at least 4 aligned samples".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Construction("tabulated radii must be strictly increasing".into()));
        }
        Ok(TabulatedSigma { r, sigma })
    }

    pub fn from_fn(lo: f64, hi: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let r: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
        let sigma = r.iter().map(|&x| f(x)).collect();
        Self::new(r, sigma)
    }

    fn spacing(&self) -> f64 {
        (self.r[self.r.len() - 1] - self.r[0]) / (self.r.len() - 1) as f64
    }

    fn local(&self, x: f64, order: usize) -> f64 {
        let n = self.r.len();
        let idx = self.r.partition_point(|&v| v <= x).saturating_sub(1);
        let start = idx.saturating_sub(1).min(n - 4);
        let xs = &self.r[start..start + 4];
        let ys = &self.sigma[start..start + 4];
        let mut acc = 0.0;
        for j in 0..4 {
            let others: Vec<usize> = (0..4).filter(|&m| m != j).collect();
            let den: f64 = others.iter().map(|&m| xs[j] - xs[m]).product();
            let d = |m: usize| x - xs[m];
            let num = match order {
                0 => others.iter().map(|&m| d(m)).product::<f64>(),
                1 => d(others[1]) * d(others[2]) + d(others[0]) * d(others[2]) + d(others[0]) * d(others[1]),
                2 => 2.0 * (d(others[0]) + d(others[1]) + d(others[2])),
                3 => 6.0,
                _ => 0.0,
            };
            acc += ys[j] * num / den;
        }
        acc
    }
}

/// Closed-form warping families plus tabulated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WarpFamily {
    /// `c1 + c2 r`
    Linear { c1: f64, c2: f64 },
    /// `c1 e^{√−k r} + c2 e^{−√−k r}`, `k < 0`
    Exponential { c1: f64, c2: f64, k: f64 },
    /// `c1 cos(√k r) + c2 sin(√k r)`, `k > 0`
    Trigonometric { c1: f64, c2: f64, k: f64 },
    /// `√ρ sn_k(r)` with `sn_k` the sine of curvature `k`.
    ScaledModel { rho: f64, k: f64 },
    /// `r` on `(a, b]`, `r (1 − e^{−1/(r−b)})` beyond `b`.
    Glued { a: f64, b: f64, eps: f64 },
    Constant { c: f64 },
    Tabulated(TabulatedSigma),
}

/// How a derivative value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Accuracy {
    Exact,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpingFunction {
    pub family: WarpFamily,
    pub domain: Interval,
}

/// `d^m/dr^m` of the curvature-`k` sine `sn_k`.
pub fn sn_k_derivative(k: f64, r: f64, m: usize) -> f64 {
    if k == 0.0 {
        return match m {
            0 => r,
            1 => 1.0,
            _ => 0.0,
        };
    }
    let a = k.abs().sqrt();
    let scale = a.powi(m as i32 - 1);
    if k < 0.0 {
        let x = a * r;
        scale * if m % 2 == 0 { x.sinh() } else { x.cosh() }
    } else {
        scale * sin_derivative(a * r, m)
    }
}

pub fn sn_k(k: f64, r: f64) -> f64 {
    sn_k_derivative(k, r, 0)
}

/// `sin^{(m)}` evaluated at `x` (unit frequency).
fn sin_derivative(x: f64, m: usize) -> f64 {
    match m % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    }
}

fn cos_derivative(x: f64, m: usize) -> f64 {
    match m % 4 {
        0 => x.cos(),
        1 => -x.sin(),
        2 => -x.cos(),
        _ => x.sin(),
    }
}

/// `e^{−1/t} / t^p` without overflow for small `t`.
fn bump_over_power(t: f64, p: i32) -> f64 {
    (-1.0 / t - p as f64 * t.ln()).exp()
}

/// Derivatives of `E(t) = e^{−1/t}` for `t > 0`, orders 0..=3.
fn bump_derivative(t: f64, m: usize) -> f64 {
    match m {
        0 => (-1.0 / t).exp(),
        1 => bump_over_power(t, 2),
        2 => bump_over_power(t, 4) - 2.0 * bump_over_power(t, 3),
        3 => bump_over_power(t, 6) - 6.0 * bump_over_power(t, 5) + 6.0 * bump_over_power(t, 4),
        _ => unreachable!("bump derivatives are only needed up to order 3"),
    }
}

impl WarpingFunction {
    pub fn new(family: WarpFamily, domain: Interval) -> Result<Self> {
        match &family {
            WarpFamily::Exponential { k, .. } if *k >= 0.0 => {
                return Err(Error::Construction("exponential family requires k < 0".into()))
            }
            WarpFamily::Trigonometric { k, .. } if *k <= 0.0 => {
                return Err(Error::Construction("trigonometric family requires k > 0".into()))
            }
            WarpFamily::ScaledModel { rho, .. } if *rho <= 0.0 => {
                return Err(Error::Construction("scaled model requires a positive fiber constant".into()))
            }
            WarpFamily::Glued { a, b, eps } if !(*a >= 0.0 && a < b && *eps > 0.0) => {
                return Err(Error::Construction("glued warping requires 0 <= a < b and eps > 0".into()))
            }
            WarpFamily::Tabulated(t) => {
                let (lo, hi) = (t.r[0], t.r[t.r.len() - 1]);
                if domain.lo < lo || (domain.hi > hi) {
                    return Err(Error::Construction("tabulated samples do not cover the domain".into()));
                }
            }
            _ => {}
        }
        let w = WarpingFunction { family, domain };
        let samples = domain.interior_samples(1000);
        if let Some(&bad) = samples.iter().find(|&&r| w.eval_unchecked(r, 0) <= 0.0) {
            return Err(Error::Construction(format!("sigma must be positive on the interval; sigma({bad}) <= 0")));
        }
        Ok(w)
    }

    /// σ, σ′ or σ″ (order 0, 1, 2) at `r`; order 3 is also accepted.
    pub fn eval(&self, r: f64, order: usize) -> Result<f64> {
        self.check_domain(r)?;
        Ok(self.eval_unchecked(r, order))
    }

    pub fn sigma(&self, r: f64) -> f64 {
        self.eval_unchecked(r, 0)
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if self.domain.contains(r) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "r = {r} outside warping interval ({}, {})",
                self.domain.lo, self.domain.hi
            )))
        }
    }

    /// Whether derivatives of order `m` are computed in closed form.
    pub fn derivative_accuracy(&self, m: usize) -> Accuracy {
        match &self.family {
            WarpFamily::Tabulated(_) if m >= 3 => Accuracy::FiniteDifference,
            WarpFamily::Glued { .. } if m >= 4 => Accuracy::FiniteDifference,
            _ => Accuracy::Exact,
        }
    }

    /// Derivative of arbitrary order `m`, falling back to finite differences
    /// where no closed form is carried.
    pub fn derivative(&self, r: f64, m: usize) -> Result<(f64, Accuracy)> {
        self.check_domain(r)?;
        Ok((self.eval_unchecked(r, m), self.derivative_accuracy(m)))
    }

    pub(crate) fn eval_unchecked(&self, r: f64, m: usize) -> f64 {
        match &self.family {
            WarpFamily::Linear { c1, c2 } => match m {
                0 => c1 + c2 * r,
                1 => *c2,
                _ => 0.0,
            },
            WarpFamily::Exponential { c1, c2, k } => {
                let a = (-k).sqrt();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                a.powi(m as i32) * (c1 * (a * r).exp() + sign * c2 * (-a * r).exp())
            }
            WarpFamily::Trigonometric { c1, c2, k } => {
                let a = k.sqrt();
                a.powi(m as i32) * (c1 * cos_derivative(a * r, m) + c2 * sin_derivative(a * r, m))
            }
            WarpFamily::ScaledModel { rho, k } => rho.sqrt() * sn_k_derivative(*k, r, m),
            WarpFamily::Constant { c } => {
                if m == 0 {
                    *c
                } else {
                    0.0
                }
            }
            WarpFamily::Glued { b, .. } => {
                if r <= *b {
                    return match m {
                        0 => r,
                        1 => 1.0,
                        _ => 0.0,
                    };
                }
                if m >= 4 {
                    return self.finite_difference(r, m, 1e-3);
                }
                let t = r - b;
                let head = match m {
                    0 => r,
                    1 => 1.0,
                    _ => 0.0,
                };
                let tail = r * bump_derivative(t, m) + if m > 0 { m as f64 * bump_derivative(t, m - 1) } else { 0.0 };
                head - tail
            }
            WarpFamily::Tabulated(t) => {
                if m <= 2 {
                    t.local(r, m)
                } else {
                    self.finite_difference(r, m, t.spacing())
                }
            }
        }
    }

    /// `(C, κ)` with `σ′² + κσ² = C` identically, for the closed-form families.
    pub(crate) fn first_integral(&self) -> Option<(f64, f64)> {
        match &self.family {
            WarpFamily::Linear { c2, .. } => Some((c2 * c2, 0.0)),
            WarpFamily::Constant { .. } => Some((0.0, 0.0)),
            WarpFamily::Exponential { c1, c2, k } => Some((4.0 * k * c1 * c2, *k)),
            WarpFamily::Trigonometric { c1, c2, k } => Some((k * (c1 * c1 + c2 * c2), *k)),
            WarpFamily::ScaledModel { rho, k } => Some((*rho, *k)),
            _ => None,
        }
    }

    /// Differences of σ″ (order `m − 2`), centered when the stencil fits in the
    /// domain and forward or backward otherwise.
    fn finite_difference(&self, r: f64, m: usize, h: f64) -> f64 {
        let p = m - 2;
        let (lo, hi) = self.domain.sample_window();
        let width = p as f64 * h;
        let start = if r - width / 2.0 >= lo && r + width / 2.0 <= hi {
            r - width / 2.0
        } else if r + width <= hi {
            r
        } else {
            r - width
        };
        // p-th forward difference of σ″ over the stencil start, start + h, ...
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=p {
            let sign = if (p - j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * self.second_derivative_at(start + j as f64 * h);
            binom = binom * (p - j) as f64 / (j + 1) as f64;
        }
        acc / h.powi(p as i32)
    }

    fn second_derivative_at(&self, r: f64) -> f64 {
        match &self.family {
            WarpFamily::Tabulated(t) => t.local(r, 2),
            _ => self.eval_unchecked(r, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    RoundSphere,
    Circle,
    FlatTorus,
    Abstract,
}

/// The `(n−1)`-dimensional fiber, represented by its Ricci lower bound:
/// `Ric_N ≥ (n−2) ρ g_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub dim: usize,
    pub ricci_lower_bound: f64,
    pub kind: FiberKind,
}

impl Fiber {
    pub fn round_sphere(dim: usize) -> Self {
        Fiber { dim, ricci_lower_bound: 1.0, kind: FiberKind::RoundSphere }
    }

    pub fn circle() -> Self {
        Fiber { dim: 1, ricci_lower_bound: 0.0, kind: FiberKind::Circle }
    }

    pub fn flat_torus(dim: usize) -> Self {
        Fiber { dim, ricci_lower_bound: 0.0, kind: FiberKind::FlatTorus }
    }

    pub fn with_bound(dim: usize, rho: f64) -> Self {
        Fiber { dim, ricci_lower_bound: rho, kind: FiberKind::Abstract }
    }

    /// Flat fiber of the given dimension: the circle or a flat torus.
    pub fn flat(dim: usize) -> Self {
        if dim == 1 {
            Self::circle()
        } else {
            Self::flat_torus(dim)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Construction("fiber dimension must be at least 1".into()));
        }
        let ok = match self.kind {
            FiberKind::RoundSphere => self.ricci_lower_bound == 1.0,
            FiberKind::Circle => self.dim == 1 && self.ricci_lower_bound == 0.0,
            FiberKind::FlatTorus => self.ricci_lower_bound == 0.0,
            FiberKind::Abstract => self.ricci_lower_bound.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Construction(format!("inconsistent fiber descriptor {self:?}")))
        }
    }

    /// Whether `Ric_N = (n−2) ρ g_N` holds with equality.
    pub fn is_einstein(&self) -> bool {
        !matches!(self.kind, FiberKind::Abstract)
    }
}

/// A warped product `(I × N, dr² + σ² g_N)` of dimension `n`, together with
/// the constant `k` of its asserted Ricci bound `Ric ≥ (n−1) k g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedManifold {
    pub n: usize,
    pub sigma: WarpingFunction,
    pub fiber: Fiber,
    pub k: f64,
}

/// A radial function with two derivatives, evaluated on demand.
pub trait RadialFunction {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
}

/// Polynomial `Σ cᵢ rⁱ`; mostly useful as a test input.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPolynomial(pub Vec<f64>);

impl RadialPolynomial {
    fn eval_derivative(&self, r: f64, m: usize) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(m)
            .map(|(i, c)| c * (0..m).map(|j| (i - j) as f64).product::<f64>() * r.powi((i - m) as i32))
            .sum()
    }
}

impl RadialFunction for RadialPolynomial {
    fn value(&self, r: f64) -> f64 {
        self.eval_derivative(r, 0)
    }
    fn d1(&self, r: f64) -> f64 {
        self.eval_derivative(r, 1)
    }
    fn d2(&self, r: f64) -> f64 {
        self.eval_derivative(r, 2)
    }
}

impl WarpedManifold {
    pub fn new(n: usize, sigma: WarpingFunction, fiber: Fiber, k: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Construction("dimension must be at least 2".into()));
        }
        if fiber.dim != n - 1 {
            return Err(Error::Construction(format!("fiber dimension {} does not match n - 1 = {}", fiber.dim, n - 1)));
        }
        fiber.validate()?;
        Ok(WarpedManifold { n, sigma, fiber, k })
    }

    pub fn is_model(&self) -> bool {
        self.sigma.domain.closed_at_lo
    }

    /// The same warping with a flat fiber, i.e. the manifold seen by the
    /// two-parameter `(r, θ)` solvers.
    pub fn with_flat_fiber(&self) -> Self {
        WarpedManifold { fiber: Fiber::flat(self.n - 1), ..self.clone() }
    }

    /// Radial Ricci eigenvalue `−(n−1)σ″/σ` and the lower bound
    /// `((n−2)ρ − σσ″ − (n−2)σ′²)/σ²` on the g-normalized tangential ones.
    pub fn ricci_eigenvalue_bounds(&self, r: f64) -> Result<(f64, f64)> {
        let s = self.sigma.eval(r, 0)?;
        let s1 = self.sigma.eval_unchecked(r, 1);
        let s2 = self.sigma.eval_unchecked(r, 2);
        let nm = self.n as f64;
        let radial = -(nm - 1.0) * s2 / s;
        // ρ − σ′² is formed from the first integral when one exists, which avoids
        // cancellation near the pole.
        let gap = match self.sigma.first_integral() {
            Some((c, kk)) => (self.fiber.ricci_lower_bound - c) + kk * s * s,
            None => self.fiber.ricci_lower_bound - s1 * s1,
        };
        let tangential = (nm - 2.0) * gap / (s * s) - s2 / s;
        Ok((radial, tangential))
    }

    /// `min_r min(radial, tangential) − (n−1)k` over `n_samples` interior radii.
    pub fn check_ricci_bound(&self, k: f64, n_samples: usize) -> Result<f64> {
        self.check_ricci_bound_on(k, &self.sigma.domain.interior_samples(n_samples), n_samples)
    }

    pub(crate) fn check_ricci_bound_on(&self, k: f64, radii: &[f64], n_samples: usize) -> Result<f64> {
        if n_samples < 2 {
            return Err(Error::Precondition("at least two curvature samples are required".into()));
        }
        if radii.is_empty() {
            return Err(Error::Domain("empty sampling domain".into()));
        }
        let target = (self.n as f64 - 1.0) * k;
        let mut margin = f64::INFINITY;
        for &r in radii {
            let (rad, tan) = self.ricci_eigenvalue_bounds(r)?;
            margin = margin.min(rad.min(tan) - target);
        }
        Ok(margin)
    }

    /// `kσ′ + (σ″σ^{n−1})′/(nσ^{n−1})`, expanded as `kσ′ + (σ‴σ + (n−1)σ″σ′)/(nσ)`.
    pub fn serrin_coefficient(&self, k: f64, r: f64) -> Result<(f64, Accuracy)> {
        let s = self.sigma.eval(r, 0)?;
        if s <= 0.0 {
            return Err(Error::Singular(format!("sigma({r}) = {s}")));
        }
        let s1 = self.sigma.eval_unchecked(r, 1);
        let s2 = self.sigma.eval_unchecked(r, 2);
        let s3 = self.sigma.eval_unchecked(r, 3);
        let nm = self.n as f64;
        let value = k * s1 + (s3 * s + (nm - 1.0) * s2 * s1) / (nm * s);
        Ok((value, self.sigma.derivative_accuracy(3)))
    }

    /// `(σ″σ^{n−1})′/σ^{n−1} = σ‴ + (n−1)σ″σ′/σ`, which is `Δσ′`.
    /// `Δσ′ = (σ″σ^{n−1})′/σ^{n−1}`.
    pub fn laplacian_of_sigma_prime(&self, r: f64) -> f64 {
        let s = self.sigma.eval_unchecked(r, 0);
        let s1 = self.sigma.eval_unchecked(r, 1);
        let s2 = self.sigma.eval_unchecked(r, 2);
        let s3 = self.sigma.eval_unchecked(r, 3);
        s3 + (self.n as f64 - 1.0) * s2 * s1 / s
    }

    /// Laplace–Beltrami of a radial function, `u″ + (n−1)(σ′/σ)u′`; at the
    /// pole of a model manifold the limit `n u″(0)`.
    pub fn laplacian_radial(&self, u: &dyn RadialFunction, r: f64) -> Result<f64> {
        if r == 0.0 && self.is_model() {
            return Ok(self.n as f64 * u.d2(0.0));
        }
        let s = self.sigma.eval(r, 0)?;
        let s1 = self.sigma.eval_unchecked(r, 1);
        Ok(u.d2(r) + (self.n as f64 - 1.0) * s1 / s * u.d1(r))
    }

    /// Hessian of a radial function in an orthonormal frame: `(u″, u′σ′/σ)`.
    pub fn radial_hessian_components(&self, u: &dyn RadialFunction, r: f64) -> Result<(f64, f64)> {
        let s = self.sigma.eval(r, 0)?;
        if s == 0.0 {
            return Err(Error::Singular(format!("sigma vanishes at r = {r}")));
        }
        let s1 = self.sigma.eval_unchecked(r, 1);
        Ok((u.d2(r), u.d1(r) * s1 / s))
    }

    /// `Ric(∇u, ∇u)` for a gradient with radial part `u_r` and squared norm
    /// `grad_sq`, using the radial eigenvalue and the tangential bound (exact
    /// for Einstein fibers).
    pub fn ricci_on_gradient(&self, r: f64, u_r: f64, grad_sq: f64) -> Result<f64> {
        let (rad, tan) = self.ricci_eigenvalue_bounds(r)?;
        Ok(rad * u_r * u_r + tan * (grad_sq - u_r * u_r).max(0.0))
    }
}
