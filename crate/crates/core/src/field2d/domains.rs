use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DomainMask, Grid2D};
use crate::error::{Error, Result};
use crate::geometry::{WarpFamily, WarpedManifold};

/// Closed-form distance between chart points on the flat plane, the round
/// sphere, hyperbolic space and the flat cylinder; `None` for other warpings.
pub fn closed_form_distance(m: &WarpedManifold, p: (f64, f64), q: (f64, f64)) -> Option<f64> {
    let dth = q.1 - p.1;
    match m.sigma.family {
        WarpFamily::Linear { c1, c2 } if c1 == 0.0 && c2 == 1.0 => Some(euclid_polar(p.0, q.0, dth)),
        WarpFamily::ScaledModel { rho, k } if rho == 1.0 => {
            if k == 0.0 {
                Some(euclid_polar(p.0, q.0, dth))
            } else if k < 0.0 {
                let a = (-k).sqrt();
                let (x, y) = (a * p.0, a * q.0);
                let ch = x.cosh() * y.cosh() - x.sinh() * y.sinh() * dth.cos();
                Some(ch.max(1.0).acosh() / a)
            } else {
                let a = k.sqrt();
                let (x, y) = (a * p.0, a * q.0);
                let c = x.cos() * y.cos() + x.sin() * y.sin() * dth.cos();
                Some(c.clamp(-1.0, 1.0).acos() / a)
            }
        }
        WarpFamily::Constant { c } => {
            let w = (dth + PI).rem_euclid(2.0 * PI) - PI;
            Some((q.0 - p.0).hypot(c * w))
        }
        _ => None,
    }
}

fn euclid_polar(r1: f64, r2: f64, dth: f64) -> f64 {
    // |x − y|² = (r1 − r2)² + 4 r1 r2 sin²(Δθ/2), stable for nearby points
    ((r1 - r2).powi(2) + 4.0 * r1 * r2 * (0.5 * dth).sin().powi(2)).sqrt()
}

/// Two-parameter test domains in the `(r, θ)` chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain2D {
    /// Geodesic ball about `(r0, theta0)`.
    Ball { r0: f64, theta0: f64, radius: f64 },
    /// Ellipse in the Cartesian overlay `x = r cos θ`, `y = r sin θ`.
    Ellipse { cx: f64, cy: f64, a: f64, b: f64 },
    /// `|r| < w`, all θ.
    Band { w: f64 },
    Annulus { r1: f64, r2: f64 },
}

impl fmt::Display for Domain2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain2D::Ball { r0, theta0, radius } => write!(f, "ball:r0={r0},theta0={theta0},radius={radius}"),
            Domain2D::Ellipse { cx, cy, a, b } => write!(f, "ellipse:cx={cx},cy={cy},a={a},b={b}"),
            Domain2D::Band { w } => write!(f, "band:w={w}"),
            Domain2D::Annulus { r1, r2 } => write!(f, "annulus:r1={r1},r2={r2}"),
        }
    }
}

impl Domain2D {
    /// Parses `shape:key=value,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let (shape, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in domain, got `{part}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("domain parameter `{k}` is not a number")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |k: &str, default: Option<f64>| {
            kv.get(k).copied().or(default).ok_or_else(|| Error::Config(format!("domain `{shape}` needs `{k}`")))
        };
        let d = match shape.trim() {
            "ball" => Domain2D::Ball { r0: get("r0", None)?, theta0: get("theta0", Some(0.0))?, radius: get("radius", None)? },
            "ellipse" => Domain2D::Ellipse {
                cx: get("cx", None)?,
                cy: get("cy", Some(0.0))?,
                a: get("a", None)?,
                b: get("b", None)?,
            },
            "band" => Domain2D::Band { w: get("w", None)? },
            "annulus" => Domain2D::Annulus { r1: get("r1", None)?, r2: get("r2", None)? },
            other => return Err(Error::Config(format!("unknown domain shape `{other}`"))),
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain2D::Ball { radius, .. } => radius > 0.0,
            Domain2D::Ellipse { a, b, .. } => a > 0.0 && b > 0.0,
            Domain2D::Band { w } => w > 0.0,
            Domain2D::Annulus { r1, r2 } => r2 > r1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("degenerate domain {self}")))
        }
    }

    /// Radial extent `[r_min, r_max]` of the domain.
    pub fn radial_range(&self) -> (f64, f64) {
        match *self {
            Domain2D::Ball { r0, radius, .. } => (r0 - radius, r0 + radius),
            Domain2D::Ellipse { cx, cy, a, b } => {
                let c = cx.hypot(cy);
                let e = a.max(b);
                ((c - e).max(0.0), c + e)
            }
            Domain2D::Band { w } => (-w, w),
            Domain2D::Annulus { r1, r2 } => (r1, r2),
        }
    }

    /// Level set, negative inside. Balls need a closed-form distance.
    pub fn level_set<'a>(&self, m: &'a WarpedManifold) -> Option<Box<dyn Fn(f64, f64) -> f64 + 'a>> {
        Some(match *self {
            Domain2D::Ball { r0, theta0, radius } => {
                closed_form_distance(m, (r0, theta0), (r0, theta0))?;
                Box::new(move |r, t| closed_form_distance(m, (r0, theta0), (r, t)).unwrap() - radius)
            }
            Domain2D::Ellipse { cx, cy, a, b } => {
                Box::new(move |r, t| ((r * t.cos() - cx) / a).powi(2) + ((r * t.sin() - cy) / b).powi(2) - 1.0)
            }
            Domain2D::Band { w } => Box::new(move |r, _| r.abs() - w),
            Domain2D::Annulus { r1, r2 } => Box::new(move |r, _| (r1 - r).max(r - r2)),
        })
    }

    /// Grid covering the domain at spacing `h` and its mask. Balls on
    /// warpings without a closed-form distance use the eikonal field.
    pub fn mask(&self, m: &WarpedManifold, h: f64) -> Result<(Grid2D, DomainMask)> {
        let (lo, hi) = self.radial_range();
        let grid = Grid2D::covering(m, lo, hi, h)?;
        let mask = match (self.level_set(m), *self) {
            (Some(phi), _) => DomainMask::from_level_set(m, grid, phi)?,
            (None, Domain2D::Ball { r0, theta0, radius }) => super::geodesic_ball_mask(m, (r0, theta0), radius, &grid)?,
            (None, _) => unreachable!("only balls lack a level set"),
        };
        Ok((grid, mask))
    }
}
