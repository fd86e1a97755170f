//! Named warped products with their hypotheses checked numerically.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Accuracy, Fiber, Interval, WarpFamily, WarpedManifold, WarpingFunction};

/// Number of radii used for every sampled hypothesis check.
pub const HYPOTHESIS_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "hypothesis", content = "k")]
pub enum Hypothesis {
    SigmaPositive,
    SigmaPrimeNonneg,
    SigmaPrimeNotIdentZero,
    RicciBound(f64),
    SerrinCoefficientZero,
    ModelSmoothAtPole,
    CompatibilityTrivial,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::SigmaPositive => write!(f, "sigma>0"),
            Hypothesis::SigmaPrimeNonneg => write!(f, "sigma'>=0"),
            Hypothesis::SigmaPrimeNotIdentZero => write!(f, "sigma'!=0"),
            Hypothesis::RicciBound(k) => write!(f, "Ric>=(n-1)({k})"),
            Hypothesis::SerrinCoefficientZero => write!(f, "serrin=0"),
            Hypothesis::ModelSmoothAtPole => write!(f, "smooth-pole"),
            Hypothesis::CompatibilityTrivial => write!(f, "compat"),
        }
    }
}

/// Sampled quantities behind the hypothesis flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sigma_min: f64,
    pub sigma_prime_min: f64,
    pub sigma_prime_max_abs: f64,
    pub ricci_margin: f64,
    pub serrin_max_abs: f64,
    pub serrin_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub manifold: WarpedManifold,
    pub hypotheses: Vec<Hypothesis>,
    pub diagnostics: Diagnostics,
}

impl CatalogEntry {
    pub fn holds(&self, h: Hypothesis) -> bool {
        self.hypotheses.contains(&h)
    }

    pub fn has_ricci_bound(&self) -> bool {
        self.hypotheses.iter().any(|h| matches!(h, Hypothesis::RicciBound(_)))
    }

    pub fn summary_line(&self) -> String {
        let hyps: Vec<String> = self.hypotheses.iter().map(|h| h.to_string()).collect();
        format!(
            "{:<36} n={} k={:<6} ricci_margin={:+.3e} serrin_max={:.3e} [{}]",
            self.name,
            self.manifold.n,
            self.manifold.k,
            self.diagnostics.ricci_margin,
            self.diagnostics.serrin_max_abs,
            hyps.join(", ")
        )
    }
}

/// An entry name with its parameters, written `family:key=value,key=value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl EntrySpec {
    pub fn new(name: &str) -> Self {
        EntrySpec { name: name.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (name, rest) = match text.split_once(':') {
            Some((a, b)) => (a.trim(), b),
            None => (text.trim(), ""),
        };
        let mut spec = EntrySpec::new(name);
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in entry parameters, got `{part}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("parameter `{key}` is not a number: `{value}`")))?;
            spec.params.insert(key.trim().to_string(), value);
        }
        Ok(spec)
    }

    fn get(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match (self.params.get(key), default) {
            (Some(v), _) => Ok(*v),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::Config(format!("entry `{}` requires parameter `{key}`", self.name))),
        }
    }

    fn label(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}:{}", self.name, parts.join(","))
    }
}

impl fmt::Display for EntrySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn model_radius(k: f64) -> f64 {
    if k > 0.0 {
        PI / (2.0 * k.sqrt())
    } else {
        f64::INFINITY
    }
}

fn sphere_or_flat(n: usize, rho: f64) -> Fiber {
    if n == 2 {
        Fiber::circle()
    } else if rho == 1.0 {
        Fiber::round_sphere(n - 1)
    } else if rho == 0.0 {
        Fiber::flat(n - 1)
    } else {
        Fiber::with_bound(n - 1, rho)
    }
}

/// Builds a catalog entry. Recognised names: `space_form(k)`,
/// `scaled_model(rho, k)`, `exponential(k)`, `two_exponential(c1, c2, k)`,
/// `glued(a, b, eps)`, `cylinder` and `family(c1, c2, k)`.
pub fn build_entry(spec: &EntrySpec, n: usize) -> Result<CatalogEntry> {
    let key = spec.name.as_str();
    let (manifold, ricci_tol) = match key {
        "space_form" => {
            let k = spec.get("k", Some(0.0))?;
            let w = WarpingFunction::new(WarpFamily::ScaledModel { rho: 1.0, k }, Interval::with_pole(model_radius(k))?)?;
            (WarpedManifold::new(n, w, Fiber::round_sphere(n - 1), k)?, 1e-12)
        }
        "scaled_model" => {
            let k = spec.get("k", Some(0.0))?;
            let rho = spec.get("rho", None)?;
            if rho <= 0.0 {
                return Err(Error::Construction(format!("scaled_model needs rho > 0 for sigma > 0, got {rho}")));
            }
            let hi = model_radius(k);
            let (domain, fiber) = if rho == 1.0 {
                (Interval::with_pole(hi)?, Fiber::round_sphere(n - 1))
            } else {
                (Interval::open(0.0, hi)?, sphere_or_flat(n, rho))
            };
            let w = WarpingFunction::new(WarpFamily::ScaledModel { rho, k }, domain)?;
            (WarpedManifold::new(n, w, fiber, k)?, 1e-12)
        }
        "exponential" => {
            let k = spec.get("k", Some(-1.0))?;
            if k >= 0.0 {
                return Err(Error::Construction(format!("exponential needs k < 0, got {k}")));
            }
            let w = WarpingFunction::new(WarpFamily::Exponential { c1: 1.0, c2: 0.0, k }, Interval::real_line())?;
            (WarpedManifold::new(n, w, Fiber::flat(n - 1), k)?, 1e-12)
        }
        "two_exponential" => {
            let k = spec.get("k", Some(-1.0))?;
            let c1 = spec.get("c1", Some(1.0))?;
            let c2 = spec.get("c2", Some(1.0))?;
            if k >= 0.0 {
                return Err(Error::Construction(format!("two_exponential needs k < 0, got {k}")));
            }
            if !(c1 >= c2 && c2 > 0.0) {
                return Err(Error::Construction(format!("two_exponential needs c1 >= c2 > 0, got c1 = {c1}, c2 = {c2}")));
            }
            let rho = 4.0 * k * c1 * c2;
            let w = WarpingFunction::new(WarpFamily::Exponential { c1, c2, k }, Interval::open(0.0, f64::INFINITY)?)?;
            (WarpedManifold::new(n, w, sphere_or_flat(n, rho), k)?, 1e-12)
        }
        "family" => {
            let k = spec.get("k", None)?;
            let c1 = spec.get("c1", None)?;
            let c2 = spec.get("c2", None)?;
            let lo = spec.get("lo", Some(0.0))?;
            let hi = spec.get("hi", Some(model_radius(k).min(lo + 10.0)))?;
            let (family, rho) = if k < 0.0 {
                (WarpFamily::Exponential { c1, c2, k }, 4.0 * k * c1 * c2)
            } else if k == 0.0 {
                (WarpFamily::Linear { c1, c2 }, c2 * c2)
            } else {
                (WarpFamily::Trigonometric { c1, c2, k }, k * (c1 * c1 + c2 * c2))
            };
            let w = WarpingFunction::new(family, Interval::open(lo, hi)?)?;
            (WarpedManifold::new(n, w, sphere_or_flat(n, rho), k)?, 1e-12)
        }
        "glued" => {
            let a = spec.get("a", Some(0.0))?;
            let b = spec.get("b", Some(1.0))?;
            let eps = spec.get("eps", Some(0.1 * (b - a)))?;
            let domain = if a == 0.0 { Interval::with_pole(b + eps)? } else { Interval::open(a, b + eps)? };
            let w = WarpingFunction::new(WarpFamily::Glued { a, b, eps }, domain)?;
            check_glued_continuity(&w, b)?;
            (WarpedManifold::new(n, w, Fiber::round_sphere(n - 1), 0.0)?, 1e-9)
        }
        "cylinder" => {
            let w = WarpingFunction::new(WarpFamily::Constant { c: 1.0 }, Interval::real_line())?;
            (WarpedManifold::new(n, w, Fiber::flat(n - 1), 0.0)?, 1e-12)
        }
        other => return Err(Error::Config(format!("unknown catalog entry `{other}`"))),
    };
    Ok(classify(spec.label(), manifold, ricci_tol))
}

/// Parses `text` and builds the entry in dimension `n`.
pub fn entry(text: &str, n: usize) -> Result<CatalogEntry> {
    build_entry(&EntrySpec::parse(text)?, n)
}

fn check_glued_continuity(w: &WarpingFunction, b: f64) -> Result<()> {
    let delta = 1e-2;
    let r = b + delta;
    for (m, left) in [(0, r), (1, 1.0), (2, 0.0)] {
        let right = w.eval_unchecked(r, m);
        if (right - left).abs() > 1e-8 {
            return Err(Error::Construction(format!(
                "glued warping is discontinuous in derivative {m} across r = {b}: {right} vs {left}"
            )));
        }
    }
    Ok(())
}

/// Re-derives the hypothesis set of a manifold from samples.
pub fn classify(name: String, manifold: WarpedManifold, ricci_tol: f64) -> CatalogEntry {
    let radii = manifold.sigma.domain.interior_samples(HYPOTHESIS_SAMPLES);
    let k = manifold.k;
    let mut d = Diagnostics {
        sigma_min: f64::INFINITY,
        sigma_prime_min: f64::INFINITY,
        sigma_prime_max_abs: 0.0,
        ricci_margin: f64::INFINITY,
        serrin_max_abs: 0.0,
        serrin_min: f64::INFINITY,
    };
    for &r in &radii {
        let s = manifold.sigma.eval_unchecked(r, 0);
        let s1 = manifold.sigma.eval_unchecked(r, 1);
        d.sigma_min = d.sigma_min.min(s);
        d.sigma_prime_min = d.sigma_prime_min.min(s1);
        d.sigma_prime_max_abs = d.sigma_prime_max_abs.max(s1.abs());
        let c = manifold.serrin_coefficient(k, r).map(|(c, _)| c).unwrap_or(f64::NAN);
        d.serrin_max_abs = d.serrin_max_abs.max(c.abs());
        d.serrin_min = d.serrin_min.min(c);
    }
    d.ricci_margin = manifold.check_ricci_bound_on(k, &radii, radii.len()).unwrap_or(f64::NEG_INFINITY);

    let mut hypotheses = Vec::new();
    if d.sigma_min > 0.0 {
        hypotheses.push(Hypothesis::SigmaPositive);
    }
    if d.sigma_prime_min >= -1e-12 {
        hypotheses.push(Hypothesis::SigmaPrimeNonneg);
    }
    if d.sigma_prime_max_abs > 1e-12 {
        hypotheses.push(Hypothesis::SigmaPrimeNotIdentZero);
    }
    if d.ricci_margin >= -ricci_tol {
        hypotheses.push(Hypothesis::RicciBound(k));
    }
    if d.serrin_max_abs < 1e-10 {
        hypotheses.push(Hypothesis::SerrinCoefficientZero);
    }
    if manifold.is_model() && pole_is_smooth(&manifold, 6) {
        hypotheses.push(Hypothesis::ModelSmoothAtPole);
    }
    if d.serrin_min >= -1e-10 {
        hypotheses.push(Hypothesis::CompatibilityTrivial);
    }
    CatalogEntry { name, manifold, hypotheses, diagnostics: d }
}

fn pole_is_smooth(m: &WarpedManifold, order_checked: usize) -> bool {
    let w = &m.sigma;
    let tol = |order: usize| match (&w.family, w.derivative_accuracy(order)) {
        (WarpFamily::Tabulated(_), _) | (_, Accuracy::FiniteDifference) => 1e-4,
        _ => 1e-10,
    };
    if w.eval_unchecked(0.0, 0).abs() > tol(0) || (w.eval_unchecked(0.0, 1) - 1.0).abs() > tol(1) {
        return false;
    }
    (2..=order_checked.max(2)).step_by(2).all(|m| w.eval_unchecked(0.0, m).abs() <= tol(m))
}

/// Whether `σ(0) = 0`, `σ′(0) = 1` and the even derivatives up to
/// `order_checked` vanish at the pole.
pub fn validate_model_pole(entry: &CatalogEntry, order_checked: usize) -> Result<bool> {
    if !entry.manifold.is_model() {
        return Err(Error::Precondition(format!("`{}` is not a model manifold (interval not closed at 0)", entry.name)));
    }
    Ok(pole_is_smooth(&entry.manifold, order_checked))
}

/// The entries reported by `catalog list`.
pub fn default_entries(n: usize) -> Vec<CatalogEntry> {
    let specs = [
        "space_form:k=0",
        "space_form:k=1",
        "space_form:k=-1",
        "scaled_model:rho=2,k=-1",
        "exponential:k=-1",
        "two_exponential:c1=1,c2=1,k=-1",
        "two_exponential:c1=2,c2=1,k=-1",
        "glued:a=0.5,b=1,eps=0.05",
        "glued:a=0,b=1",
        "cylinder",
    ];
    specs.iter().filter_map(|s| entry(s, n).ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TabulatedSigma;

    #[test]
    fn space_form_flat() {
        let e = entry("space_form:k=0", 3).unwrap();
        assert_eq!(e.manifold.sigma.sigma(2.5), 2.5);
        for h in [
            Hypothesis::SigmaPositive,
            Hypothesis::SigmaPrimeNonneg,
            Hypothesis::SigmaPrimeNotIdentZero,
            Hypothesis::RicciBound(0.0),
            Hypothesis::SerrinCoefficientZero,
            Hypothesis::ModelSmoothAtPole,
            Hypothesis::CompatibilityTrivial,
        ] {
            assert!(e.holds(h), "{h}");
        }
    }

    #[test]
    fn two_exponential_example() {
        let e = entry("two_exponential:c1=1,c2=1,k=-1", 3).unwrap();
        assert!((e.manifold.sigma.sigma(0.7) - 2.0 * 0.7f64.cosh()).abs() < 1e-14);
        assert_eq!(e.manifold.fiber.ricci_lower_bound, -4.0);
        assert!(e.holds(Hypothesis::RicciBound(-1.0)));
        assert!(e.holds(Hypothesis::SigmaPrimeNonneg));
        assert!(e.holds(Hypothesis::SerrinCoefficientZero));
        assert!(e.diagnostics.ricci_margin.abs() < 1e-12);
    }

    #[test]
    fn cylinder_lacks_nonconstant_warping() {
        let e = entry("cylinder", 2).unwrap();
        assert_eq!(e.manifold.sigma.sigma(3.0), 1.0);
        assert!(!e.holds(Hypothesis::SigmaPrimeNotIdentZero));
        assert!(e.holds(Hypothesis::RicciBound(0.0)));
    }

    #[test]
    fn glued_has_nonnegative_ricci() {
        for n in [2, 3, 4] {
            let e = entry("glued:a=0.5,b=1,eps=0.05", n).unwrap();
            assert!(e.diagnostics.ricci_margin >= -1e-9, "n={n}: {}", e.diagnostics.ricci_margin);
            assert!(e.holds(Hypothesis::RicciBound(0.0)));
        }
        let e = entry("glued:a=0,b=1", 3).unwrap();
        assert!(e.manifold.is_model());
        assert_eq!(validate_model_pole(&e, 6), Ok(true));
    }

    #[test]
    fn invalid_parameters_are_named() {
        match entry("scaled_model:rho=-1,k=0", 3) {
            Err(Error::Construction(msg)) => assert!(msg.contains("rho")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(entry("two_exponential:c1=1,c2=2,k=-1", 3), Err(Error::Construction(_))));
        assert!(matches!(entry("nonsense", 3), Err(Error::Config(_))));
        assert!(matches!(entry("space_form:k", 3), Err(Error::Config(_))));
    }

    #[test]
    fn model_pole_examples() {
        let sinh = entry("space_form:k=-1", 3).unwrap();
        assert_eq!(validate_model_pole(&sinh, 8), Ok(true));
        assert_eq!(validate_model_pole(&entry("space_form:k=0", 3).unwrap(), 8), Ok(true));
        let tab = TabulatedSigma::from_fn(0.0, 2.0, 401, |r| r + r * r).unwrap();
        let w = WarpingFunction::new(WarpFamily::Tabulated(tab), Interval::with_pole(2.0).unwrap()).unwrap();
        let m = WarpedManifold::new(3, w, Fiber::round_sphere(2), 0.0).unwrap();
        let e = classify("tab".into(), m, 1e-12);
        assert_eq!(validate_model_pole(&e, 4), Ok(false));
        assert!(!e.holds(Hypothesis::ModelSmoothAtPole));
        let cyl = entry("cylinder", 2).unwrap();
        assert!(matches!(validate_model_pole(&cyl, 4), Err(Error::Precondition(_))));
    }

    #[test]
    fn claimed_hypotheses_are_rechecked() {
        for n in [2, 3, 4] {
            for e in default_entries(n) {
                if let Some(Hypothesis::RicciBound(k)) = e.hypotheses.iter().find(|h| matches!(h, Hypothesis::RicciBound(_))) {
                    let tol = if e.name.starts_with("glued") { 1e-9 } else { 1e-12 };
                    assert!(e.manifold.check_ricci_bound(*k, 1000).unwrap() >= -tol, "{}", e.name);
                }
                if e.holds(Hypothesis::SerrinCoefficientZero) {
                    for r in e.manifold.sigma.domain.interior_samples(1000) {
                        assert!(e.manifold.serrin_coefficient(e.manifold.k, r).unwrap().0.abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn entry_spec_round_trip() {
        let s = EntrySpec::parse("two_exponential:c1=2, c2=1,k=-0.5").unwrap();
        assert_eq!(s.params["c2"], 1.0);
        assert_eq!(EntrySpec::parse(&s.to_string()).unwrap(), s);
    }
}
