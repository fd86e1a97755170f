use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::catalog::entry;
use crate::geometry::{Fiber, Interval, WarpFamily, WarpingFunction};

fn flat(n: usize) -> WarpedManifold {
    entry("space_form:k=0", n).unwrap().manifold.with_flat_fiber()
}

fn cylinder(c: f64) -> WarpedManifold {
    let w = WarpingFunction::new(WarpFamily::Constant { c }, Interval::real_line()).unwrap();
    WarpedManifold::new(2, w, Fiber::circle(), 0.0).unwrap()
}

fn solve(m: &WarpedManifold, k: f64, d: Domain2D, h: f64) -> DirichletSolution {
    let (_, mask) = d.mask(m, h).unwrap();
    solve_dirichlet(m, k, Arc::new(mask), &SolverOptions::default()).unwrap()
}

#[test]
fn laplacian_of_quadratic_on_annulus() {
    let m = flat(2);
    let mut errs = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let (_, mask) = Domain2D::Annulus { r1: 1.0, r2: 2.0 }.mask(&m, h).unwrap();
        let u = ScalarField2D::from_fn(Arc::new(mask), |r, t| r * r * t.cos());
        let lap = effective_dimension_laplacian(&m, &u).unwrap();
        let err = u.inside_nodes().map(|i| (lap.values[i] - 3.0 * u.grid().point(i).1.cos()).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < 1e-2, "{errs:?}");
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}

#[test]
fn laplacian_of_constant_and_cylinder_sine() {
    let m = flat(3);
    let (_, mask) = Domain2D::Annulus { r1: 1.0, r2: 2.0 }.mask(&m, 1.0 / 16.0).unwrap();
    let u = ScalarField2D::from_fn(Arc::new(mask), |_, _| 4.2);
    let lap = effective_dimension_laplacian(&m, &u).unwrap();
    assert!(u.inside_nodes().all(|i| lap.values[i].abs() < 1e-9));

    let m = cylinder(1.0);
    let (_, mask) = Domain2D::Band { w: 0.5 }.mask(&m, 1.0 / 64.0).unwrap();
    let u = ScalarField2D::from_fn(Arc::new(mask), |_, t| t.sin());
    let lap = effective_dimension_laplacian(&m, &u).unwrap();
    let err = u.inside_nodes().map(|i| (lap.values[i] + u.values[i]).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn eikonal_examples() {
    let m = flat(2);
    let h = 1.0 / 64.0;
    let grid = Grid2D::covering(&m, 1.0, 3.0, h).unwrap();
    let d = eikonal_distance(&m, (2.0, 0.0), &grid).unwrap();
    assert!((d.interpolate(2.5, 0.0) - 0.5).abs() < h);
    assert!(d.interpolate(2.0, 0.0).abs() < 1e-12);
    let q = (2.6, 0.3);
    let exact = ((2.6 * 0.3f64.cos() - 2.0).powi(2) + (2.6 * 0.3f64.sin()).powi(2)).sqrt();
    assert!((d.interpolate(q.0, q.1) - exact).abs() < h, "{} vs {exact}", d.interpolate(q.0, q.1));

    let c = cylinder(1.0);
    let grid = Grid2D::covering(&c, -1.0, 1.0, h).unwrap();
    let d = eikonal_distance(&c, (0.0, 0.0), &grid).unwrap();
    assert!((d.interpolate(0.0, PI / 2.0) - PI / 2.0).abs() < h);
}

#[test]
fn ball_mask_areas() {
    let m = flat(2);
    for h in [1.0 / 64.0, 1.0 / 128.0] {
        let grid = Grid2D::covering(&m, 1.5, 2.5, h).unwrap();
        let mask = geodesic_ball_mask(&m, (2.0, 0.0), 0.5, &grid).unwrap();
        assert!((mask.volume(&m) - PI / 4.0).abs() < 2.0 * h, "{}", mask.volume(&m));
    }
    let hyp = entry("space_form:k=-1", 2).unwrap().manifold;
    let h = 1.0 / 128.0;
    let grid = Grid2D::covering(&hyp, 0.7, 1.3, h).unwrap();
    let mask = geodesic_ball_mask(&hyp, (1.0, 0.0), 0.3, &grid).unwrap();
    let exact = 2.0 * PI * (0.3f64.cosh() - 1.0);
    assert!((mask.volume(&hyp) - exact).abs() < h, "{} vs {exact}", mask.volume(&hyp));
}

#[test]
fn tiny_ball_is_empty_or_single_node() {
    let m = flat(2);
    let grid = Grid2D::covering(&m, 1.9, 2.1, 1.0 / 16.0).unwrap();
    let mask = geodesic_ball_mask(&m, (2.0, 0.01), 1e-4, &grid).unwrap();
    assert!(mask.inside_count() <= 1);
}

#[test]
fn ball_touching_chart_edge_overflows() {
    let m = flat(2);
    let grid = Grid2D::covering(&m, 1.8, 2.2, 1.0 / 32.0).unwrap();
    assert!(matches!(geodesic_ball_mask(&m, (2.0, 0.0), 0.5, &grid), Err(Error::ChartOverflow(_))));
    assert!(matches!(Grid2D::covering(&m, 0.01, 1.0, 0.1), Err(Error::ChartOverflow(_))));
}

#[test]
fn dirichlet_examples() {
    let m = flat(2);
    let disk = solve(&m, 0.0, Domain2D::Ball { r0: 2.0, theta0: 0.0, radius: 0.5 }, 1.0 / 64.0);
    assert!(disk.relative_residual < 1e-10);
    assert!((disk.field.max_inside() - 0.0625).abs() < 1e-3);
    assert!(disk.warning.is_none());

    let ell = solve(&m, 0.0, Domain2D::Ellipse { cx: 3.0, cy: 0.0, a: 1.0, b: 0.6 }, 1.0 / 64.0);
    assert!((ell.field.max_inside() - 0.132_352_941_176_470_6).abs() < 1e-3, "{}", ell.field.max_inside());

    let c = cylinder(1.0);
    let band = solve(&c, 0.0, Domain2D::Band { w: 0.5 }, 1.0 / 64.0);
    let f = &band.field;
    let err = f.inside_nodes().map(|i| (f.values[i] - (0.25 - f.grid().point(i).0.powi(2)) / 2.0).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");
}

#[test]
fn dirichlet_converges_at_least_three_halves() {
    let m = flat(2);
    let err = |h: f64| {
        let s = solve(&m, 0.0, Domain2D::Ball { r0: 2.0, theta0: 0.0, radius: 0.5 }, h);
        let f = &s.field;
        f.inside_nodes()
            .map(|i| {
                let (r, t) = f.grid().point(i);
                let d2 = r * r + 4.0 - 4.0 * r * t.cos();
                (f.values[i] - (0.25 - d2) / 4.0).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(1.0 / 32.0), err(1.0 / 64.0));
    assert!((e1 / e2).log2() >= 1.5, "{e1:e} {e2:e}");
}

#[test]
fn gradient_norm_examples() {
    let m = entry("space_form:k=-1", 2).unwrap().manifold;
    let (_, mask) = Domain2D::Ball { r0: 1.0, theta0: 0.0, radius: 0.3 }.mask(&m, 1.0 / 32.0).unwrap();
    let u = ScalarField2D::from_fn(Arc::new(mask), |r, _| r);
    let g = gradient_norm(&m, &u);
    assert!(u.inside_nodes().all(|i| (g.values[i] - 1.0).abs() < 1e-9));

    let c = cylinder(2.0);
    let (_, mask) = Domain2D::Ball { r0: 0.0, theta0: PI, radius: 0.5 }.mask(&c, 1.0 / 32.0).unwrap();
    let u = ScalarField2D::from_fn(Arc::new(mask), |_, t| t);
    let g = gradient_norm(&c, &u);
    assert!(u.inside_nodes().all(|i| (g.values[i] - 0.5).abs() < 1e-9));
}

#[test]
fn boundary_defects() {
    let m = flat(2);
    let disk = solve(&m, 0.0, Domain2D::Ball { r0: 2.0, theta0: 0.0, radius: 0.5 }, 1.0 / 64.0);
    let st = boundary_gradient_stats(&m, &disk.field).unwrap();
    assert!((st.mean - 0.25).abs() < 5e-3, "{}", st.mean);
    assert!(st.relative_defect() < 0.02, "{}", st.relative_defect());

    let ell = solve(&m, 0.0, Domain2D::Ellipse { cx: 3.0, cy: 0.0, a: 1.0, b: 0.6 }, 1.0 / 64.0);
    assert!(boundary_gradient_stats(&m, &ell.field).unwrap().relative_defect() > 0.05);

    let c = cylinder(1.0);
    let band = solve(&c, 0.0, Domain2D::Band { w: 0.5 }, 1.0 / 64.0);
    let st = boundary_gradient_stats(&c, &band.field).unwrap();
    assert!(st.relative_defect() < 0.02 && (st.mean - 0.5).abs() < 1e-8);
}

#[test]
fn too_coarse_boundary_is_rejected() {
    let m = flat(2);
    let grid = Grid2D::covering(&m, 1.9, 2.1, 0.05).unwrap();
    let mask = geodesic_ball_mask(&m, (2.0, 0.0), 0.035, &grid).unwrap();
    if mask.is_empty() {
        return;
    }
    let s = solve_dirichlet(&m, 0.0, Arc::new(mask), &SolverOptions::default()).unwrap();
    assert!(matches!(boundary_gradient_stats(&m, &s.field), Err(Error::InsufficientResolution(_))));
}

#[test]
fn maximum_principle_on_hyperbolic_ball() {
    let m = entry("space_form:k=-1", 3).unwrap().manifold.with_flat_fiber();
    let s = solve(&m, -1.0, Domain2D::Ball { r0: 1.5, theta0: 1.0, radius: 0.4 }, 1.0 / 32.0);
    assert!(s.field.min_inside() > 0.0);
}

#[test]
fn partitions_give_identical_fields() {
    let m = flat(2);
    let (_, mask) = Domain2D::Ellipse { cx: 3.0, cy: 0.0, a: 1.0, b: 0.6 }.mask(&m, 1.0 / 32.0).unwrap();
    let mask = Arc::new(mask);
    let opts = SolverOptions { partitions: 3, ..Default::default() };
    let a = solve_dirichlet(&m, 0.0, mask.clone(), &opts).unwrap();
    let b = solve_dirichlet(&m, 0.0, mask, &opts).unwrap();
    assert_eq!(a.field.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.field.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
}

#[test]
fn indefinite_problem_is_flagged() {
    // Far above the first Dirichlet eigenvalue of a unit flat disk.
    let m = flat(2);
    let s = solve(&m, 20.0, Domain2D::Ball { r0: 3.0, theta0: 0.0, radius: 1.0 }, 1.0 / 16.0);
    assert!(s.warning.is_some());
}
