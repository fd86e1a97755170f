//! Radial reduction of `Δu + nku = −1` on model balls centred at the pole,
//! the geodesic ODE `f″ = −1/n − k f`, and recovery of σ from the Hessian
//! equation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sn_k, Accuracy, RadialFunction, WarpedManifold};

/// The explicit torsion function of a geodesic ball of radius `radius`
/// about the pole of the constant-curvature model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub k: f64,
    pub n: usize,
    pub radius: f64,
}

impl ClosedForm {
    pub fn new(k: f64, n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || n < 1 {
            return Err(Error::Precondition(format!("need radius > 0 and n >= 1, got radius {radius}, n {n}")));
        }
        if k > 0.0 && (k.sqrt() * radius).cos() <= 0.0 {
            return Err(Error::InadmissibleRadius(format!(
                "cos(sqrt(k) * radius) <= 0 for k = {k}, radius = {radius}; need radius < pi / (2 sqrt(k))"
            )));
        }
        Ok(ClosedForm { k, n, radius })
    }

    /// `|u′(radius)|`.
    pub fn boundary_gradient(&self) -> f64 {
        let n = self.n as f64;
        let (k, rad) = (self.k, self.radius);
        if k == 0.0 {
            rad / n
        } else if k > 0.0 {
            let a = k.sqrt();
            (a * rad).tan() / (a * n)
        } else {
            let a = (-k).sqrt();
            (a * rad).tanh() / (a * n)
        }
    }

    /// m-th derivative; `u = (C(r)/C(ρ) − 1)/(kn)` with `C` = cos or cosh.
    pub fn derivative(&self, r: f64, m: usize) -> f64 {
        let n = self.n as f64;
        let (k, rad) = (self.k, self.radius);
        if k == 0.0 {
            return match m {
                0 => (rad * rad - r * r) / (2.0 * n),
                1 => -r / n,
                2 => -1.0 / n,
                _ => 0.0,
            };
        }
        let a = k.abs().sqrt();
        let x = a * r;
        let (c, dc) = if k > 0.0 {
            let c = match m % 4 {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            };
            (c, (a * rad).cos())
        } else {
            let c = if m % 2 == 0 { x.cosh() } else { x.sinh() };
            (c, (a * rad).cosh())
        };
        if m == 0 {
            (c / dc - 1.0) / (k * n)
        } else {
            a.powi(m as i32) * c / (dc * k * n)
        }
    }

    /// Samples the closed form on a uniform grid with spacing at most `step`.
    pub fn sample(&self, step: f64) -> RadialProfile {
        let count = (self.radius / step).ceil().max(1.0) as usize;
        let h = self.radius / count as f64;
        let r: Vec<f64> = (0..=count).map(|i| if i == count { self.radius } else { i as f64 * h }).collect();
        RadialProfile {
            n: self.n,
            k: self.k,
            ball_radius: self.radius,
            u: r.iter().map(|&x| self.derivative(x, 0)).collect(),
            du: r.iter().map(|&x| self.derivative(x, 1)).collect(),
            d2u: r.iter().map(|&x| self.derivative(x, 2)).collect(),
            r,
            boundary_gradient_c: self.boundary_gradient(),
        }
    }
}

impl RadialFunction for ClosedForm {
    fn value(&self, r: f64) -> f64 {
        self.derivative(r, 0)
    }
    fn d1(&self, r: f64) -> f64 {
        self.derivative(r, 1)
    }
    fn d2(&self, r: f64) -> f64 {
        self.derivative(r, 2)
    }
}

pub fn closed_form_solution(k: f64, n: usize, ball_radius: f64, r: f64) -> Result<f64> {
    let cf = ClosedForm::new(k, n, ball_radius)?;
    if !(0.0..=ball_radius).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, {ball_radius}]")));
    }
    Ok(cf.derivative(r, 0))
}

pub fn closed_form_boundary_gradient(k: f64, n: usize, ball_radius: f64) -> Result<f64> {
    Ok(ClosedForm::new(k, n, ball_radius)?.boundary_gradient())
}

/// A sampled radial solution with first and second derivatives.
///
/// Between nodes it is evaluated by quintic Hermite interpolation of
/// `(u, u′, u″)`, which keeps fourth-order accuracy in `u″`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub k: f64,
    pub ball_radius: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
    pub boundary_gradient_c: f64,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `u(0)`, the maximum of the solution.
    pub fn center_value(&self) -> f64 {
        self.u[0]
    }

    fn hermite(&self, x: f64, order: usize) -> f64 {
        let last = self.r.len() - 1;
        let i = self.r.partition_point(|&v| v <= x).saturating_sub(1).min(last - 1);
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let c0 = self.u[i];
        let c1 = h * self.du[i];
        let c2 = 0.5 * h * h * self.d2u[i];
        let p1 = self.u[i + 1] - (c0 + c1 + c2);
        let v1 = h * self.du[i + 1] - (c1 + 2.0 * c2);
        let a1 = h * h * self.d2u[i + 1] - 2.0 * c2;
        let c3 = 10.0 * p1 - 4.0 * v1 + 0.5 * a1;
        let c4 = -15.0 * p1 + 7.0 * v1 - a1;
        let c5 = 6.0 * p1 - 3.0 * v1 + 0.5 * a1;
        match order {
            0 => c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5)))),
            1 => (c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)))) / h,
            _ => (2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5))) / (h * h),
        }
    }

    /// Writes `r,u,du,d2u` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,u,du,d2u")?;
        for i in 0..self.r.len() {
            writeln!(out, "{},{},{},{}", self.r[i], self.u[i], self.du[i], self.d2u[i])?;
        }
        Ok(())
    }

    /// Maximum of `|u″ + (n−1)(σ′/σ)u′ + nku + 1|` at cell midpoints, where
    /// the interpolant (not the nodal ODE relation) supplies the derivatives.
    pub fn ode_residual(&self, m: &WarpedManifold) -> f64 {
        let n = self.n as f64;
        let mut worst: f64 = 0.0;
        for w in self.r.windows(2) {
            let x = 0.5 * (w[0] + w[1]);
            let s = m.sigma.sigma(x);
            let s1 = m.sigma.eval_unchecked(x, 1);
            let res = self.d2(x) + (n - 1.0) * s1 / s * self.d1(x) + n * self.k * self.value(x) + 1.0;
            worst = worst.max(res.abs());
        }
        worst
    }

    /// `(max |u″ + 1/n + ku|, max |u′σ′/σ + 1/n + ku|)` over nodes off the pole.
    pub fn hessian_residual(&self, m: &WarpedManifold) -> (f64, f64) {
        let n = self.n as f64;
        let (mut rr, mut tt) = (0.0f64, 0.0f64);
        for i in 0..self.r.len() {
            let target = 1.0 / n + self.k * self.u[i];
            rr = rr.max((self.d2u[i] + target).abs());
            let r = self.r[i];
            if r > 0.0 {
                let t = self.du[i] * m.sigma.eval_unchecked(r, 1) / m.sigma.sigma(r);
                tt = tt.max((t + target).abs());
            }
        }
        (rr, tt)
    }
}

impl RadialFunction for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        self.hermite(r, 0)
    }
    fn d1(&self, r: f64) -> f64 {
        self.hermite(r, 1)
    }
    fn d2(&self, r: f64) -> f64 {
        self.hermite(r, 2)
    }
}

type State = [f64; 2];

fn rk4_step(f: &dyn Fn(f64, State) -> State, r: f64, y: State, h: f64) -> State {
    let k1 = f(r, y);
    let k2 = f(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Highest Taylor degree used for the start near the pole.
const SERIES_DEGREE: usize = 14;

struct Shooter<'a> {
    m: &'a WarpedManifold,
    k: f64,
    n: f64,
    h: f64,
    steps: usize,
    /// Taylor coefficients of `u` at the pole, split as `particular + u0 * homogeneous`.
    particular: Vec<f64>,
    homogeneous: Vec<f64>,
    /// Nodes `0..=series_nodes` are filled from the series.
    series_nodes: usize,
}

impl<'a> Shooter<'a> {
    fn new(m: &'a WarpedManifold, k: f64, ball_radius: f64, steps: usize) -> Self {
        let n = m.n as f64;
        let h = ball_radius / steps as f64;
        // Degree limited by how many derivatives of σ are known exactly.
        let mut degree = 2;
        while degree < SERIES_DEGREE && m.sigma.derivative_accuracy(degree + 2) == Accuracy::Exact {
            degree += 1;
        }
        // q = rσ′/σ as a series: q · (σ/r) = σ′.
        let a: Vec<f64> = (0..=degree + 1).map(|j| m.sigma.eval_unchecked(0.0, j) / factorial(j)).collect();
        let num: Vec<f64> = (0..=degree).map(|j| (j + 1) as f64 * a[j + 1]).collect();
        let den: Vec<f64> = (0..=degree).map(|j| a[j + 1]).collect();
        let mut q = vec![0.0; degree + 1];
        for j in 0..=degree {
            let acc: f64 = (0..j).map(|i| q[i] * den[j - i]).sum();
            q[j] = (num[j] - acc) / den[0];
        }
        let solve = |b0: f64, forcing: f64| {
            let mut b = vec![0.0; degree + 1];
            b[0] = b0;
            for j in 2..=degree {
                let mut rhs = if j == 2 { -forcing } else { 0.0 } - n * k * b[j - 2];
                for i in 1..j {
                    rhs -= (n - 1.0) * q[j - i] * i as f64 * b[i];
                }
                b[j] = rhs / (j as f64 * (j as f64 - 1.0 + (n - 1.0) * q[0]));
            }
            b
        };
        let particular = solve(0.0, 1.0);
        let homogeneous = solve(1.0, 0.0);
        let mut series_nodes = 1;
        if degree >= 8 {
            let tail = |r: f64| {
                (degree - 1..=degree)
                    .map(|j| (particular[j].abs() + homogeneous[j].abs()) * r.powi(j as i32))
                    .sum::<f64>()
            };
            while series_nodes + 1 < steps / 2 && tail((series_nodes + 1) as f64 * h) < 1e-16 {
                series_nodes += 1;
            }
        }
        Shooter { m, k, n, h, steps, particular, homogeneous, series_nodes }
    }

    fn rhs(&self, r: f64, y: State) -> State {
        let s = self.m.sigma.sigma(r);
        let s1 = self.m.sigma.eval_unchecked(r, 1);
        [y[1], -1.0 - self.n * self.k * y[0] - (self.n - 1.0) * s1 / s * y[1]]
    }

    fn series(&self, u0: f64, r: f64) -> State {
        let (mut v, mut dv) = (0.0, 0.0);
        for j in (0..self.particular.len()).rev() {
            let b = self.particular[j] + u0 * self.homogeneous[j];
            v = v * r + b;
            if j > 0 {
                dv = dv * r + j as f64 * b;
            }
        }
        [v, dv]
    }

    fn integrate(&self, u0: f64, mut record: Option<&mut Vec<State>>) -> State {
        let mut y = [u0, 0.0];
        for i in 0..=self.series_nodes {
            y = self.series(u0, i as f64 * self.h);
            if let Some(rec) = record.as_deref_mut() {
                rec.push(y);
            }
        }
        let f = |r: f64, y: State| self.rhs(r, y);
        for i in self.series_nodes..self.steps {
            y = rk4_step(&f, i as f64 * self.h, y, self.h);
            if let Some(rec) = record.as_deref_mut() {
                rec.push(y);
            }
        }
        y
    }
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

/// Shooting on `u(0)` with `u′(0) = 0` for `u″ + (n−1)(σ′/σ)u′ + nku = −1`,
/// `u(ball_radius) = 0`, using RK4 after a series start at the pole.
pub fn solve_radial_bvp(m: &WarpedManifold, k: f64, ball_radius: f64, step: f64) -> Result<RadialProfile> {
    if !m.is_model() {
        return Err(Error::Precondition("radial solver needs a model manifold with a pole".into()));
    }
    let s0 = m.sigma.eval(0.0, 0)?;
    let s1 = m.sigma.eval_unchecked(0.0, 1);
    if s0.abs() > 1e-12 || (s1 - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("warping is not smooth at the pole: sigma(0) = {s0}, sigma'(0) = {s1}")));
    }
    if !(step > 0.0) || !(ball_radius > 0.0) {
        return Err(Error::Precondition("step and ball radius must be positive".into()));
    }
    m.sigma.eval(ball_radius, 0)?;
    if k > 0.0 && k.sqrt() * ball_radius >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::NoSolution(format!(
            "k = {k}: ball radius {ball_radius} is not below pi / (2 sqrt(k)); positivity fails"
        )));
    }
    let steps = (ball_radius / step).ceil().max(2.0) as usize;
    let shooter = Shooter::new(m, k, ball_radius, steps);
    let miss = |u0: f64| shooter.integrate(u0, None)[0];

    let (mut lo, mut f_lo) = (0.0, miss(0.0));
    if f_lo >= 0.0 {
        return Err(Error::NoSolution(format!("u(0) = 0 already reaches u(rho) = {f_lo} >= 0")));
    }
    let mut hi = 2.0;
    let mut f_hi = miss(hi);
    while f_hi <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoSolution(format!("could not bracket u(0) for k = {k}, radius = {ball_radius}")));
        }
        f_hi = miss(hi);
    }
    for _ in 0..8 {
        let mid = 0.5 * (lo + hi);
        let f_mid = miss(mid);
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // Secant from the bracket ends; the map u(0) -> u(rho) is affine.
    let (mut x0, mut f0, mut x1, mut f1) = (lo, f_lo, hi, f_hi);
    let mut converged = None;
    for _ in 0..60 {
        if f1.abs() < 1e-12 * x1.abs().max(1.0) {
            converged = Some(x1);
            break;
        }
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = miss(x1);
    }
    let u0 = converged.ok_or_else(|| Error::NoSolution("secant refinement did not converge".into()))?;

    let mut states = Vec::with_capacity(steps + 1);
    shooter.integrate(u0, Some(&mut states));
    let h = shooter.h;
    let n = shooter.n;
    let r: Vec<f64> = (0..=steps).map(|i| if i == steps { ball_radius } else { i as f64 * h }).collect();
    let u: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let du: Vec<f64> = states.iter().map(|s| s[1]).collect();
    let d2u = r
        .iter()
        .zip(&states)
        .map(|(&x, s)| if x == 0.0 { -(1.0 + n * k * s[0]) / n } else { shooter.rhs(x, *s)[1] })
        .collect();
    Ok(RadialProfile {
        n: m.n,
        k,
        ball_radius,
        r,
        u,
        boundary_gradient_c: du[steps].abs(),
        du,
        d2u,
    })
}

/// Solution samples of `y″ = −1/n − k y`, `y(0) = y0`, `y′(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObataTrajectory {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

pub fn obata_ode_solve(k: f64, n: usize, y0: f64, t_max: f64, step: f64) -> Result<ObataTrajectory> {
    if !(step > 0.0) || t_max < 0.0 {
        return Err(Error::Precondition("step must be positive and t_max nonnegative".into()));
    }
    let steps = (t_max / step).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_max / steps as f64 };
    let nn = n as f64;
    let f = |_t: f64, y: State| [y[1], -1.0 / nn - k * y[0]];
    let mut traj = ObataTrajectory { t: vec![0.0], y: vec![y0], dy: vec![0.0] };
    let mut y = [y0, 0.0];
    for i in 0..steps {
        y = rk4_step(&f, i as f64 * h, y, h);
        traj.t.push(if i + 1 == steps { t_max } else { (i + 1) as f64 * h });
        traj.y.push(y[0]);
        traj.dy.push(y[1]);
    }
    Ok(traj)
}

/// Closed-form solution of the same initial value problem.
pub fn obata_closed_form(k: f64, n: usize, y0: f64, t: f64) -> f64 {
    let nn = n as f64;
    if k == 0.0 {
        y0 - t * t / (2.0 * nn)
    } else {
        let shift = 1.0 / (k * nn);
        let a = k.abs().sqrt();
        let c = if k > 0.0 { (a * t).cos() } else { (a * t).cosh() };
        (y0 + shift) * c - shift
    }
}

/// Warping function reconstructed from `u′σσ′ = −(1/n + ku)σ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecovery {
    pub r: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    /// `max |σ̂ − sn_k|` over the grid.
    pub branch_residual: f64,
    /// `max |σ̂ − σ|` against the manifold's own warping.
    pub manifold_residual: f64,
}

pub fn recover_metric_from_hessian(u: &RadialProfile, m: &WarpedManifold) -> Result<MetricRecovery> {
    let n = u.n as f64;
    let k = u.k;
    let (rr, _) = u.hessian_residual(m);
    if rr > 1e-6 {
        return Err(Error::Precondition(format!("profile does not satisfy the Hessian equation (residual {rr:e})")));
    }
    if u.r[0] != 0.0 {
        return Err(Error::Precondition("profile must start at the pole".into()));
    }
    // log(σ̂/r) = ∫₀ʳ (σ̂′/σ̂ − 1/s) ds; the integrand is odd and vanishes at 0.
    let mut integrand = Vec::with_capacity(u.len());
    integrand.push(0.0);
    for i in 1..u.len() {
        let r = u.r[i];
        if u.du[i].abs() < 1e-14 {
            return Err(Error::DegenerateRecovery(format!("u'({r}) = 0 off the pole")));
        }
        integrand.push(-(1.0 / n + k * u.u[i]) / u.du[i] - 1.0 / r);
    }
    let mut sigma_hat = vec![0.0; u.len()];
    let mut acc = 0.0;
    for i in 1..u.len() {
        acc += 0.5 * (u.r[i] - u.r[i - 1]) * (integrand[i] + integrand[i - 1]);
        sigma_hat[i] = u.r[i] * acc.exp();
    }
    let mut branch_residual: f64 = 0.0;
    let mut manifold_residual: f64 = 0.0;
    for (i, &r) in u.r.iter().enumerate() {
        branch_residual = branch_residual.max((sigma_hat[i] - sn_k(k, r)).abs());
        manifold_residual = manifold_residual.max((sigma_hat[i] - m.sigma.sigma(r)).abs());
    }
    Ok(MetricRecovery { r: u.r.clone(), sigma_hat, branch_residual, manifold_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Fiber, Interval, WarpFamily, WarpingFunction};
    use std::f64::consts::PI;

    fn model(k: f64, n: usize) -> WarpedManifold {
        let hi = if k > 0.0 { PI / (2.0 * k.sqrt()) } else { f64::INFINITY };
        let w = WarpingFunction::new(WarpFamily::ScaledModel { rho: 1.0, k }, Interval::with_pole(hi).unwrap()).unwrap();
        WarpedManifold::new(n, w, Fiber::round_sphere(n - 1), k).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_solution(0.0, 2, 1.0, 0.0).unwrap(), 0.25);
        // 1/sqrt(2) - 1/2 and (1 - sech 1)/3, evaluated independently
        assert!((closed_form_solution(1.0, 2, PI / 4.0, 0.0).unwrap() - 0.207_106_781_186_547_5).abs() < 1e-15);
        assert!((closed_form_solution(-1.0, 3, 1.0, 0.0).unwrap() - 0.117_315_242_112_038_2).abs() < 1e-15);
        for (k, n, rad) in [(0.0, 2, 1.0), (1.0, 2, PI / 4.0), (-1.0, 3, 1.0)] {
            assert_eq!(closed_form_solution(k, n, rad, rad).unwrap(), 0.0);
        }
    }

    #[test]
    fn closed_form_gradient_examples() {
        assert_eq!(closed_form_boundary_gradient(0.0, 2, 1.0).unwrap(), 0.5);
        assert!((closed_form_boundary_gradient(1.0, 2, PI / 4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((closed_form_boundary_gradient(-1.0, 3, 1.0).unwrap() - 0.253_864_718_651_921_6).abs() < 1e-9);
    }

    #[test]
    fn inadmissible_radius_is_rejected() {
        assert!(matches!(closed_form_solution(1.0, 2, 2.0, 0.0), Err(Error::InadmissibleRadius(_))));
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        for (k, n, rad) in [(0.0, 2, 1.0), (1.0, 2, PI / 4.0), (-1.0, 3, 1.0), (-2.5, 4, 0.7)] {
            let cf = ClosedForm::new(k, n, rad).unwrap();
            let h = 1e-5;
            for &r in &[0.1, 0.4, 0.6] {
                for m in 1..=3 {
                    let fd = (cf.derivative(r + h, m - 1) - cf.derivative(r - h, m - 1)) / (2.0 * h);
                    assert!((fd - cf.derivative(r, m)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn bvp_examples() {
        let p = solve_radial_bvp(&model(0.0, 2), 0.0, 1.0, 1e-3).unwrap();
        assert!((p.center_value() - 0.25).abs() < 1e-8);
        let p = solve_radial_bvp(&model(1.0, 2), 1.0, PI / 4.0, 1e-3).unwrap();
        assert!((p.boundary_gradient_c - 0.5).abs() < 1e-7);
        let p = solve_radial_bvp(&model(-1.0, 3), -1.0, 1.0, 1e-3).unwrap();
        assert!((p.center_value() - 0.117_315_242_112_038).abs() < 1e-7);
    }

    #[test]
    fn bvp_rejects_non_models_and_large_balls() {
        let w = WarpingFunction::new(WarpFamily::Constant { c: 1.0 }, Interval::real_line()).unwrap();
        let cyl = WarpedManifold::new(2, w, Fiber::circle(), 0.0).unwrap();
        assert!(matches!(solve_radial_bvp(&cyl, 0.0, 1.0, 1e-2), Err(Error::Precondition(_))));
        let w = WarpingFunction::new(WarpFamily::ScaledModel { rho: 1.0, k: 1.0 }, Interval::with_pole(PI).unwrap()).unwrap();
        let sphere = WarpedManifold::new(2, w, Fiber::round_sphere(1), 1.0).unwrap();
        assert!(matches!(solve_radial_bvp(&sphere, 1.0, 2.0, 1e-2), Err(Error::NoSolution(_))));
    }

    #[test]
    fn bvp_residual_is_fourth_order_small() {
        for (k, n, rad) in [(0.0, 2, 1.0), (1.0, 2, PI / 4.0), (-1.0, 3, 1.0)] {
            for step in [1e-2, 5e-3] {
                let m = model(k, n);
                let p = solve_radial_bvp(&m, k, rad, step).unwrap();
                let res = p.ode_residual(&m);
                assert!(res < 10.0 * step.powi(4), "k={k} step={step}: residual {res:e}");
            }
        }
    }

    #[test]
    fn shooting_converges_at_fourth_order() {
        for (k, n, rad) in [(1.0, 2, PI / 4.0), (-1.0, 3, 1.0), (-1.0, 2, 1.5)] {
            let m = model(k, n);
            let exact = closed_form_solution(k, n, rad, 0.0).unwrap();
            let e1 = (solve_radial_bvp(&m, k, rad, 0.1).unwrap().center_value() - exact).abs();
            let e2 = (solve_radial_bvp(&m, k, rad, 0.05).unwrap().center_value() - exact).abs();
            assert!(e1 / e2 >= 12.0, "k={k}: {e1:e} -> {e2:e}");
        }
    }

    #[test]
    fn obata_examples() {
        let t = obata_ode_solve(0.0, 2, 1.0, 1.0, 1e-3).unwrap();
        assert!((t.y.last().unwrap() - 0.75).abs() < 1e-12);
        let t = obata_ode_solve(1.0, 2, 1.0, PI, 1e-3).unwrap();
        assert!((t.y.last().unwrap() + 2.0).abs() < 1e-10);
        let eq = -1.0 / (-2.0 * 3.0);
        let t = obata_ode_solve(-2.0, 3, eq, 3.0, 1e-2).unwrap();
        assert!(t.y.iter().all(|&y| (y - eq).abs() < 1e-15));
    }

    #[test]
    fn obata_matches_closed_form() {
        for k in [-1.0, 0.0, 1.0] {
            let t = obata_ode_solve(k, 3, 0.4, 2.0, 1e-3).unwrap();
            for (ti, yi) in t.t.iter().zip(&t.y) {
                assert!((yi - obata_closed_form(k, 3, 0.4, *ti)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn metric_recovery_branches() {
        for (k, n, rad) in [(0.0, 2, 1.0), (1.0, 2, PI / 4.0), (-1.0, 3, 1.0)] {
            let m = model(k, n);
            let p = ClosedForm::new(k, n, rad).unwrap().sample(1e-3);
            let rec = recover_metric_from_hessian(&p, &m).unwrap();
            assert!(rec.branch_residual < 1e-7, "k={k}: {:e}", rec.branch_residual);
            assert!(rec.manifold_residual < 1e-7);
        }
    }

    #[test]
    fn metric_recovery_rejects_non_hessian_profiles() {
        let m = model(0.0, 2);
        let mut p = ClosedForm::new(0.0, 2, 1.0).unwrap().sample(1e-2);
        for v in p.d2u.iter_mut() {
            *v += 0.1;
        }
        assert!(matches!(recover_metric_from_hessian(&p, &m), Err(Error::Precondition(_))));
        let mut p = ClosedForm::new(0.0, 2, 1.0).unwrap().sample(1e-2);
        p.du[10] = 0.0;
        assert!(matches!(recover_metric_from_hessian(&p, &m), Err(Error::DegenerateRecovery(_))));
    }

    #[test]
    fn closed_form_is_positive_and_decreasing() {
        for (k, n, rad) in [(0.0, 2, 1.0), (1.0, 2, 1.5), (-1.0, 3, 2.0)] {
            let cf = ClosedForm::new(k, n, rad).unwrap();
            let vals: Vec<f64> = (0..1000).map(|i| cf.value(rad * i as f64 / 1000.0)).collect();
            assert!(vals.iter().all(|&v| v > 0.0));
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
