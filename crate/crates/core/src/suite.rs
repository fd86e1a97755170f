//! Check runners behind the command-line subcommands. Each returns report
//! rows; errors carry the name of the check that failed.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{self, Quadrature, QuadratureReport};
use crate::catalog::{self, CatalogEntry, Hypothesis};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field2d::{
    boundary_gradient_stats, closed_form_distance, eikonal_distance_limited, solve_dirichlet, DirichletSolution, Domain2D,
    Grid2D, ScalarField2D, SolverOptions,
};
use crate::geodesics::{self, DistanceOracle};
use crate::geometry::{RadialFunction, WarpFamily, WarpedManifold};
use crate::radial::{self, ClosedForm, RadialProfile};
use crate::report::{write_csv_atomic, Row};

fn context(check: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| e.in_check(check)
}

struct Setup {
    entry: CatalogEntry,
    k: f64,
    case: String,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let entry = catalog::entry(&cfg.entry, cfg.n)?;
    let k = cfg.k.unwrap_or(entry.manifold.k);
    let mut case = format!("{} n={}", entry.name, cfg.n);
    if let Some(b) = cfg.ball {
        case += &format!(" ball={b}");
    }
    if let Some(d) = &cfg.domain {
        case += &format!(" domain={d}");
    }
    Ok(Setup { entry, k, case })
}

fn spacings(cfg: &RunConfig, default: &[f64]) -> Vec<f64> {
    if cfg.h.is_empty() {
        default.to_vec()
    } else {
        cfg.h.clone()
    }
}

/// 2D computations see extra fiber directions as flat.
fn planar(m: &WarpedManifold) -> WarpedManifold {
    if m.n > 2 {
        m.with_flat_fiber()
    } else {
        m.clone()
    }
}

/// Closed-form `σ = sn_k` with the equation's `k`, so the radial solution is known.
fn closed_form_for(m: &WarpedManifold, k: f64, radius: f64) -> Option<ClosedForm> {
    let exact = match m.sigma.family {
        WarpFamily::ScaledModel { rho, k: mk } => rho == 1.0 && mk == k,
        WarpFamily::Linear { c1, c2 } => c1 == 0.0 && c2 == 1.0 && k == 0.0,
        _ => false,
    };
    (exact && m.is_model()).then(|| ClosedForm::new(k, m.n, radius).ok()).flatten()
}

/// Exact boundary gradient of the 2D problem where one is known: geodesic
/// balls in space forms and the symmetric band on the flat cylinder.
fn known_boundary_gradient(m: &WarpedManifold, k: f64, domain: &Domain2D) -> Option<f64> {
    if m.n != 2 {
        return None;
    }
    match (*domain, &m.sigma.family) {
        (Domain2D::Ball { radius, .. }, WarpFamily::ScaledModel { rho, k: mk }) if *rho == 1.0 && *mk == k => {
            ClosedForm::new(k, 2, radius).ok().map(|c| c.boundary_gradient())
        }
        (Domain2D::Ball { radius, .. }, WarpFamily::Linear { c1, c2 }) if *c1 == 0.0 && *c2 == 1.0 && k == 0.0 => {
            Some(radius / 2.0)
        }
        (Domain2D::Band { w }, WarpFamily::Constant { .. }) if k == 0.0 => Some(w),
        _ => None,
    }
}

fn domain(cfg: &RunConfig) -> Result<Domain2D> {
    let text = cfg.domain.as_deref().ok_or_else(|| Error::Config("this check needs --domain".into()))?;
    Domain2D::parse(text)
}

fn solve_field(cfg: &RunConfig, m: &WarpedManifold, k: f64, d: &Domain2D, h: f64) -> Result<DirichletSolution> {
    let (_, mask) = d.mask(m, h)?;
    solve_dirichlet(m, k, Arc::new(mask), &SolverOptions { partitions: cfg.partitions, ..Default::default() })
}

/// Rows for a refinement sequence: each passes when its residual is within
/// `tol` or every order estimate reaches `min_order`.
fn refinement_rows(case: &str, identity: &str, reps: Vec<QuadratureReport>, tol: f64, min_order: f64) -> Vec<Row> {
    let reps = analysis::with_orders(reps);
    let orders_ok = reps.len() > 1
        && reps.iter().filter_map(|r| r.convergence_order_estimate).all(|p| p >= min_order);
    reps.into_iter()
        .map(|r| {
            let mut row = Row::compare(case, identity, r.lhs, r.rhs, tol).at(r.grid_spacing);
            row.order_estimate = r.convergence_order_estimate;
            row.pass = row.pass || orders_ok;
            row
        })
        .collect()
}

pub fn catalog_list(n: usize) -> Vec<CatalogEntry> {
    catalog::default_entries(n)
}

/// Ricci lower bound and the Serrin coefficient of the entry.
pub fn check_curvature(cfg: &RunConfig) -> Result<Vec<Row>> {
    let s = setup(cfg).map_err(context("check-curvature"))?;
    let d = &s.entry.diagnostics;
    let tol = cfg.tolerance.unwrap_or(1e-12);
    let margin = s.entry.manifold.check_ricci_bound(s.k, catalog::HYPOTHESIS_SAMPLES).map_err(context("ricci_bound"))?;
    let ricci = Row::at_least(&s.case, "ricci_bound", margin, -tol);
    let expect_zero = matches!(
        s.entry.manifold.sigma.family,
        WarpFamily::Linear { .. } | WarpFamily::Exponential { .. } | WarpFamily::Trigonometric { .. } | WarpFamily::ScaledModel { .. }
    ) && s.k == s.entry.manifold.k;
    let mut serrin = Row::compare(&s.case, "serrin_coefficient", d.serrin_max_abs, 0.0, 1e-10);
    if !expect_zero {
        serrin.pass = true;
        serrin = serrin.note(format!("not identically zero here (min {:.3e}); the compatibility integral decides", d.serrin_min));
    }
    Ok(vec![ricci, serrin])
}

/// Shooting solutions of the radial problem, against closed forms where known.
pub fn solve_radial(cfg: &RunConfig) -> Result<Vec<Row>> {
    let s = setup(cfg).map_err(context("solve-radial"))?;
    let m = &s.entry.manifold;
    let radius = cfg.ball.ok_or_else(|| Error::Config("solve-radial needs --ball".into()))?;
    let mut rows = Vec::new();
    let mut finest: Option<RadialProfile> = None;
    for h in spacings(cfg, &[1e-3]) {
        let prof = radial::solve_radial_bvp(m, s.k, radius, h).map_err(context("solve-radial"))?;
        let floor = 100.0 * h.powi(4);
        // Second derivatives of the interpolant cancel to about ε|u|/h².
        let umax = prof.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let rounding = 100.0 * f64::EPSILON * umax / (h * h);
        rows.push(Row::compare(&s.case, "ode_residual", prof.ode_residual(m), 0.0, 10.0 * h.powi(4) + rounding).at(h));
        if let Some(cf) = closed_form_for(m, s.k, radius) {
            rows.push(Row::compare(&s.case, "closed_form_center", prof.center_value(), cf.value(0.0), 1e-7f64.max(floor)).at(h));
            rows.push(
                Row::compare(&s.case, "boundary_gradient", prof.boundary_gradient_c, cf.boundary_gradient(), 1e-6f64.max(floor))
                    .at(h),
            );
        }
        let (rr, tt) = prof.hessian_residual(m);
        rows.push(Row::compare(&s.case, "hessian_proportional", rr.max(tt), 0.0, 1e-6f64.max(floor)).at(h));
        match radial::recover_metric_from_hessian(&prof, m) {
            Ok(rec) => rows.push(Row::compare(&s.case, "metric_recovery", rec.manifold_residual, 0.0, 1e-6f64.max(floor)).at(h)),
            Err(e) => rows.push(Row::compare(&s.case, "metric_recovery", f64::NAN, 0.0, 0.0).at(h).note(e.to_string())),
        }
        finest = Some(prof);
    }
    if let (Some(path), Some(prof)) = (&cfg.csv, &finest) {
        write_csv_atomic(path, |buf| prof.write_csv(buf))?;
    }
    Ok(rows)
}

/// 2D Dirichlet solve; optionally the boundary-gradient defect.
pub fn solve_2d(cfg: &RunConfig, report_defect: bool) -> Result<Vec<Row>> {
    let s = setup(cfg).map_err(context("solve-2d"))?;
    let m = planar(&s.entry.manifold);
    let d = domain(cfg)?;
    let hs = spacings(cfg, &[1.0 / 64.0]);
    let mut rows = Vec::new();
    let mut defects = Vec::new();
    let mut last = None;
    for &h in &hs {
        let sol = solve_field(cfg, &m, s.k, &d, h).map_err(context("solve-2d"))?;
        let mut row = Row::compare(&s.case, "dirichlet_solve", sol.relative_residual, 0.0, 1e-10).at(h);
        if let Some(w) = &sol.warning {
            row = row.note(w.clone());
        }
        rows.push(row);
        if report_defect {
            let st = boundary_gradient_stats(&m, &sol.field).map_err(context("boundary_defect"))?;
            let mut row = Row::compare(&s.case, "boundary_defect", st.relative_defect(), 0.0, cfg.tolerance.unwrap_or(0.02))
                .at(h)
                .note(format!("mean |grad u| = {:.6}, {} samples", st.mean, st.samples.len()));
            if !s.entry.holds(Hypothesis::SigmaPrimeNotIdentZero) {
                row = row.note("hypothesis σ′≢0 violated; rigidity not expected");
            }
            defects.push((h, st.relative_defect()));
            rows.push(row);
        }
        last = Some(sol);
    }
    if defects.len() > 1 {
        let (a, b) = (defects[defects.len() - 2], defects[defects.len() - 1]);
        if let Some(row) = rows.iter_mut().rev().find(|r| r.identity == "boundary_defect") {
            row.order_estimate = Some(analysis::order_estimate(a.1, b.1, a.0, b.0));
        }
    }
    if let (Some(path), Some(sol)) = (&cfg.csv, &last) {
        write_csv_atomic(path, |buf| sol.field.write_csv(buf))?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verify {
    Pohozaev,
    PFunction,
    Compat,
    Identity,
    Intermediate,
}

pub fn verify(cfg: &RunConfig, which: Verify) -> Result<Vec<Row>> {
    let name = match which {
        Verify::Pohozaev => "pohozaev",
        Verify::PFunction => "pfunction",
        Verify::Compat => "compat",
        Verify::Identity => "identity",
        Verify::Intermediate => "intermediate",
    };
    let s = setup(cfg).map_err(context(name))?;
    let out = match which {
        Verify::Identity => verify_commutator(cfg, &s),
        _ if cfg.ball.is_some() => verify_radial(cfg, &s, which),
        _ => verify_planar(cfg, &s, which),
    };
    out.map_err(context(name))
}

fn verify_radial(cfg: &RunConfig, s: &Setup, which: Verify) -> Result<Vec<Row>> {
    let m = &s.entry.manifold;
    let radius = cfg.ball.unwrap();
    let hs = spacings(cfg, &[1e-3, 5e-4]);
    let cf = closed_form_for(m, s.k, radius);
    let tol = cfg.tolerance.unwrap_or(1e-6);
    let profiles: Vec<RadialProfile> =
        hs.iter().map(|&h| radial::solve_radial_bvp(m, s.k, radius, h)).collect::<Result<_>>()?;
    let quads: Vec<Quadrature> =
        profiles.iter().zip(&hs).map(|(p, &h)| Quadrature::radial(m, p, radius, h)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    match which {
        Verify::Pohozaev => {
            let reps = quads.iter().zip(&profiles).map(|(q, p)| analysis::pohozaev_sides(q, m, s.k, p.boundary_gradient_c));
            rows.extend(refinement_rows(&s.case, "pohozaev", reps.collect(), tol, 1.0));
            if let Some(cf) = &cf {
                // Pure quadrature error; its bound is stated at spacing 1e-3.
                let q = Quadrature::radial(m, cf, radius, hs.last().unwrap().min(1e-3))?;
                let rep = analysis::pohozaev_sides(&q, m, s.k, cf.boundary_gradient());
                rows.push(Row::compare(&s.case, "pohozaev", rep.lhs, rep.rhs, tol).at(rep.grid_spacing).note("closed-form input"));
            }
        }
        Verify::PFunction => {
            for (p, &h) in profiles.iter().zip(&hs) {
                let pv = analysis::p_function_radial(p, &p.r, m.n, s.k);
                let (dev, top) = analysis::p_deviation(&pv, p.boundary_gradient_c);
                rows.push(Row::compare(&s.case, "p_constant", dev, 0.0, 1e-8f64.max(100.0 * h.powi(4))).at(h).note(format!("max P − c² = {top:.3e}")));
                let sub = analysis::p_subharmonicity_radial(m, &p.r, &pv);
                rows.push(Row::at_least(&s.case, "p_subharmonic", sub.min, -tol).at(h));
                let (rr, tt) = p.hessian_residual(m);
                let mut row = Row::compare(&s.case, "hessian_proportional", rr.max(tt), 0.0, tol).at(h);
                if sub.max_abs >= tol {
                    row.pass = true;
                    row = row.note("ΔP not identically zero; proportionality not implied");
                }
                rows.push(row);
            }
        }
        Verify::Compat => {
            for (q, &h) in quads.iter().zip(&hs) {
                rows.push(Row::at_least(&s.case, "compatibility", analysis::compatibility_integral(q, m, s.k), -1e-8).at(h));
            }
        }
        Verify::Intermediate => {
            let all: Vec<Vec<QuadratureReport>> = quads.iter().map(|q| analysis::intermediate_identity_checks(q, m, s.k)).collect();
            for i in 0..3 {
                let reps = all.iter().map(|v| v[i].clone()).collect::<Vec<_>>();
                let id = reps[0].name.clone();
                rows.extend(refinement_rows(&s.case, &id, reps, tol, 1.0));
            }
        }
        Verify::Identity => unreachable!(),
    }
    Ok(rows)
}

fn verify_planar(cfg: &RunConfig, s: &Setup, which: Verify) -> Result<Vec<Row>> {
    let m = planar(&s.entry.manifold);
    let d = domain(cfg)?;
    let hs = spacings(cfg, &[1.0 / 64.0, 1.0 / 128.0]);
    let known_c = known_boundary_gradient(&m, s.k, &d);
    let sols: Vec<DirichletSolution> = hs.iter().map(|&h| solve_field(cfg, &m, s.k, &d, h)).collect::<Result<_>>()?;
    let boundary_c = |sol: &DirichletSolution| -> Result<(f64, Option<&'static str>)> {
        match known_c {
            Some(c) => Ok((c, None)),
            None => Ok((boundary_gradient_stats(&m, &sol.field)?.mean, Some("c taken as the mean boundary gradient"))),
        }
    };
    let mut rows = Vec::new();
    match which {
        Verify::Pohozaev => {
            let mut reps = Vec::new();
            let mut note = None;
            for sol in &sols {
                let (c, n) = boundary_c(sol)?;
                note = n;
                reps.push(analysis::pohozaev_sides(&Quadrature::field(&m, &sol.field), &m, s.k, c));
            }
            let tol = cfg.tolerance.unwrap_or(0.05 * reps.last().unwrap().lhs.abs());
            let mut out = refinement_rows(&s.case, "pohozaev", reps, tol, 1.0);
            if let Some(n) = note {
                out.iter_mut().for_each(|r| r.note = Some(n.into()));
            }
            rows.extend(out);
        }
        Verify::PFunction => {
            for (sol, &h) in sols.iter().zip(&hs) {
                let sub = analysis::p_subharmonicity_check(&m, &sol.field, s.k)?;
                let mut row = Row::at_least(&s.case, "p_subharmonic", sub.min, -10.0 * h).at(h);
                if !s.entry.has_ricci_bound() {
                    row.pass = true;
                    row = row.note("Ricci bound fails for this entry; sign not guaranteed");
                }
                rows.push(row.note(format!("max ΔP = {:.3e} over {} interior nodes", sub.max, sub.nodes)));
                let p = analysis::p_function(&m, &sol.field, s.k);
                let vals: Vec<f64> = p.inside_nodes().map(|i| p.values[i]).collect();
                let (c, note) = boundary_c(sol)?;
                let (dev, top) = analysis::p_deviation(&vals, c);
                let row = if known_c.is_some() {
                    Row::compare(&s.case, "p_constant", dev, 0.0, cfg.tolerance.unwrap_or(5e-3)).at(h)
                } else {
                    let mut r = Row::compare(&s.case, "p_max_minus_c2", top, 0.0, f64::INFINITY).at(h);
                    r.note = Some(format!("{}; the dichotomy is not decided discretely", note.unwrap_or("")));
                    r
                };
                rows.push(row);
                let hr = analysis::hessian_residual(&m, &sol.field, s.k);
                let ric = analysis::ricci_gradient_defect(&m, &sol.field, s.k)?;
                rows.push(Row::compare(&s.case, "hessian_proportional", hr, 0.0, f64::INFINITY).at(h).note("reported"));
                rows.push(Row::compare(&s.case, "ricci_on_gradient", ric, 0.0, f64::INFINITY).at(h).note("reported"));
            }
        }
        Verify::Compat => {
            for (sol, &h) in sols.iter().zip(&hs) {
                let v = analysis::compatibility_integral(&Quadrature::field(&m, &sol.field), &m, s.k);
                rows.push(Row::at_least(&s.case, "compatibility", v, -1e-8).at(h));
            }
        }
        Verify::Intermediate => {
            let all: Vec<Vec<QuadratureReport>> =
                sols.iter().map(|sol| analysis::intermediate_identity_checks(&Quadrature::field(&m, &sol.field), &m, s.k)).collect();
            for i in 0..3 {
                let reps = all.iter().map(|v| v[i].clone()).collect::<Vec<_>>();
                let id = reps[0].name.clone();
                let tol = cfg.tolerance.unwrap_or(0.05 * reps.last().unwrap().lhs.abs().max(1e-3));
                rows.extend(refinement_rows(&s.case, &id, reps, tol, 1.0));
            }
        }
        Verify::Identity => unreachable!(),
    }
    Ok(rows)
}

/// Commutator identity on `r²cos θ`, default domain an annulus.
fn verify_commutator(cfg: &RunConfig, s: &Setup) -> Result<Vec<Row>> {
    let m = planar(&s.entry.manifold);
    let d = match &cfg.domain {
        Some(t) => Domain2D::parse(t)?,
        None => Domain2D::Annulus { r1: 1.0, r2: 2.0 },
    };
    let hs = spacings(cfg, &[1.0 / 32.0, 1.0 / 64.0]);
    let mut res = Vec::new();
    let mut floors = Vec::new();
    for &h in &hs {
        let (_, mask) = d.mask(&m, h)?;
        let u = ScalarField2D::from_fn(Arc::new(mask), |r, t| r * r * t.cos());
        res.push(analysis::commutator_identity_residual(&m, &u)?);
        // Nested second differences amplify rounding like ε|u|/h⁴.
        let scale = u.inside_nodes().map(|i| u.values[i].abs()).fold(1.0, f64::max);
        floors.push(cfg.tolerance.unwrap_or(100.0 * f64::EPSILON * scale / h.powi(4)));
    }
    let mut rows = Vec::new();
    for (i, (&h, &e)) in hs.iter().zip(&res).enumerate() {
        let exact = floors[i];
        let mut row = Row::compare(&s.case, "commutator", e, 0.0, exact).at(h);
        if i > 0 {
            let p = analysis::order_estimate(res[i - 1], e, hs[i - 1], h);
            row.order_estimate = Some(p);
            if res[i - 1] > floors[i - 1] {
                row.pass = row.pass || (p - 2.0).abs() <= 0.3;
            }
        } else if hs.len() > 1 && e > exact {
            // Judged by the order of the next level.
            let p = analysis::order_estimate(e, res[1], h, hs[1]);
            row.pass = (p - 2.0).abs() <= 0.3;
        }
        if e <= exact {
            row = row.note("identity holds to rounding on this stencil");
        }
        rows.push(row);
    }
    Ok(rows)
}

fn point_note(p: (f64, f64)) -> String {
    format!("({:.6}, {:.6})", p.0, p.1)
}

/// One geodesic with its conservation diagnostics.
pub fn geodesics_shoot(cfg: &RunConfig, from: (f64, f64), psi: f64, length: f64, step: f64) -> Result<Vec<Row>> {
    let s = setup(cfg).map_err(context("geodesics shoot"))?;
    let path = geodesics::geodesic_shoot(&s.entry.manifold, from, geodesics::direction(psi), length, step)
        .map_err(context("geodesics shoot"))?;
    let tol = 1e-8 * length.max(1.0);
    let mut rows = vec![
        Row::compare(&s.case, "clairaut", path.max_clairaut_drift, 0.0, tol).at(step),
        Row::compare(&s.case, "unit_speed", path.max_speed_drift, 0.0, tol).at(step),
    ];
    let end = format!("end {}", point_note(path.end()));
    for r in &mut rows {
        r.note = Some(if path.exited { format!("left the chart at t = {:.6}; {end}", path.length()) } else { end.clone() });
    }
    if let Some(p) = &cfg.csv {
        write_csv_atomic(p, |buf| path.write_csv(buf))?;
    }
    Ok(rows)
}

/// Shooting distance against the closed form, or the eikonal field.
pub fn geodesics_distance(cfg: &RunConfig, p: (f64, f64), q: (f64, f64), tol: f64) -> Result<Vec<Row>> {
    let s = setup(cfg).map_err(context("geodesics distance"))?;
    let m = &s.entry.manifold;
    let d = geodesics::distance_by_shooting(m, p, q, tol).map_err(context("geodesics distance"))?;
    let case = format!("{} p={} q={}", s.case, point_note(p), point_note(q));
    if let Some(exact) = closed_form_distance(m, p, q) {
        return Ok(vec![Row::compare(&case, "shooting_distance", d, exact, 1e-6f64.max(10.0 * tol)).note("closed-form reference")]);
    }
    let mp = planar(m);
    let mut rows = Vec::new();
    for h in spacings(cfg, &[1.0 / 64.0]) {
        let span = 1.5 * d + 4.0 * h;
        let grid = Grid2D::covering(&mp, p.0.min(q.0) - span, p.0.max(q.0) + span, h).map_err(context("geodesics distance"))?;
        let field = eikonal_distance_limited(&mp, p, &grid, d + 4.0 * h)?;
        rows.push(Row::compare(&case, "shooting_distance", d, field.interpolate(q.0, q.1), h.max(1e-6)).at(h).note("eikonal reference"));
    }
    Ok(rows)
}

/// Star-shapedness of a geodesic ball and shooting/eikonal agreement on
/// random pairs inside it.
pub fn geodesics_star(cfg: &RunConfig, rays: usize, pairs: usize) -> Result<Vec<Row>> {
    let s = setup(cfg).map_err(context("geodesics star"))?;
    let (c, radius) = match domain(cfg)? {
        Domain2D::Ball { r0, theta0, radius } => ((r0, theta0), radius),
        other => return Err(Error::Config(format!("geodesics star needs a ball domain, got {other}"))),
    };
    let m = planar(&s.entry.manifold);
    let mut rows = Vec::new();
    for h in spacings(cfg, &[1.0 / 64.0]) {
        let grid = Grid2D::covering(&m, c.0 - radius, c.0 + radius, h).map_err(context("geodesics star"))?;
        let field = eikonal_distance_limited(&m, c, &grid, radius + 4.0 * h)?;
        let rep = geodesics::star_shapedness_check(&m, c, radius, rays, &DistanceOracle::Eikonal(&field))?;
        let mut row = Row::at_least(&s.case, "star_shaped", rep.margin, -h).at(h).note(format!("{rays} rays"));
        if rep.truncated_rays > 0 {
            row.pass = false;
            row = row.note(format!("{} rays left the chart", rep.truncated_rays));
        }
        rows.push(row);
        if pairs > 0 {
            let (worst, regenerated) = random_pair_agreement(&m, c, radius, h, pairs, cfg.seed)?;
            rows.push(
                Row::compare(&s.case, "shooting_vs_eikonal", worst, 0.0, h.max(1e-6))
                    .at(h)
                    .note(format!("{pairs} pairs, seed {}, {regenerated} redrawn", cfg.seed)),
            );
        }
    }
    Ok(rows)
}

/// Largest `|d_shoot − d_eikonal|` over random pairs in the ball; pairs the
/// shooting cannot connect inside the chart are redrawn.
pub fn random_pair_agreement(m: &WarpedManifold, c: (f64, f64), radius: f64, h: f64, pairs: usize, seed: u64) -> Result<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| loop {
        // Uniform in the chart box around the centre, kept if inside the ball.
        let r = rng.random_range(c.0 - radius..c.0 + radius);
        let half = radius / m.sigma.sigma(c.0 - radius).max(1e-3);
        let t = c.1 + rng.random_range(-half.min(PI)..half.min(PI));
        let inside = closed_form_distance(m, c, (r, t)).map_or_else(|| (r - c.0).hypot(m.sigma.sigma(r) * (t - c.1)) < radius, |d| d < radius);
        if inside {
            break (r, t);
        }
    };
    let grid = Grid2D::covering(m, c.0 - 2.0 * radius, c.0 + 2.0 * radius, h)?;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut redrawn = 0;
    while done < pairs {
        let (p, q) = (sample(&mut rng), sample(&mut rng));
        let d = match geodesics::distance_by_shooting(m, p, q, 1e-10) {
            Ok(d) => d,
            Err(Error::NotFound(_)) if redrawn < 10 * pairs => {
                redrawn += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let field = eikonal_distance_limited(m, p, &grid, d + 4.0 * h)?;
        worst = worst.max((d - field.interpolate(q.0, q.1)).abs());
        done += 1;
    }
    Ok((worst, redrawn))
}
