use std::f64::consts::PI;

use num_complex::Complex64;
use obstruct_core::circle_bundle::{from_xy, obstruction_density, MetricGerm};
use obstruct_core::series::{CoeffField, GaussianRational as Q, Monomial, MultiSeries};
use obstruct_core::torus::*;
use proptest::prelude::*;

#[test]
fn cosine_curvature_converges_at_second_order() {
    let eps = 0.1;
    let mut errs = Vec::new();
    for n in [32usize, 64, 128] {
        let g = TorusGrid::from_fn(n, n, 1.0, 1.0, cos_family(eps, 1.0)).unwrap();
        let k = grid_curvature(&g);
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let x = i as f64 / n as f64;
                let phi = eps * (2.0 * PI * x).cos();
                let exact = -0.5 * (-2.0 * phi).exp() * (-(2.0 * PI).powi(2) * phi);
                worst = worst.max((k.at(i, j) - exact).abs());
            }
        }
        errs.push(worst);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }
}

#[test]
fn cosine_density_report() {
    let g = TorusGrid::from_fn(256, 256, 1.0, 1.0, cos_family(0.1, 1.0)).unwrap();
    let r = grid_density(&g);
    assert!(r.integral.abs() <= 1e-10, "{}", r.integral);
    assert!(r.min < -r.tol && r.max > r.tol);
    assert!(!r.zero_set.is_empty());
    assert!(!r.zero_circles.is_empty());
    assert!(r.zero_circles.iter().all(|c| c.kind == "x = const"));
    assert!(r.sign_dichotomy_holds());
}

#[test]
fn summation_by_parts_for_any_field() {
    let g = TorusGrid::from_fn(40, 24, 2.0, 1.5, |x, y| 0.2 * (PI * x).sin() * (4.0 * PI * y / 1.5).cos() + 0.05 * x.sin()).unwrap();
    let f: Vec<f64> = (0..40 * 24).map(|k| ((k * 7919) % 101) as f64 / 50.0 - 1.0).collect();
    let lg = g.laplace_g(&f);
    let (hx, hy) = g.spacing();
    let w: Vec<f64> = lg.iter().zip(g.values()).map(|(d, p)| d * 2.0 * (2.0 * p).exp() * hx * hy).collect();
    let scale: f64 = w.iter().map(|x| x.abs()).sum();
    assert!(pairwise_sum(&w).abs() <= 1e-13 * scale.max(1.0));
}

#[test]
fn refinement_zero_field() {
    let g = TorusGrid::from_fn(16, 16, 1.0, 1.0, |_, _| 0.0).unwrap();
    let t = refine_and_extrapolate(&g, 3, Refiner::Spectral).unwrap();
    assert!(t.rows.iter().all(|r| r.integral == 0.0 && r.max_abs_density == 0.0));
}

#[test]
fn refinement_orders_spectral_and_analytic_agree() {
    let f = cos_family(0.1, 1.0);
    let g = TorusGrid::from_fn(16, 16, 1.0, 1.0, &f).unwrap();
    let a = refine_and_extrapolate(&g, 4, Refiner::Analytic(&f)).unwrap();
    let s = refine_and_extrapolate(&g, 4, Refiner::Spectral).unwrap();
    assert_eq!(a.orders().len(), 2);
    for (x, y) in a.orders().iter().zip(s.orders()) {
        assert!((x - 2.0).abs() < 0.3, "{x}");
        assert!((x - y).abs() < 1e-3, "{x} vs {y}");
    }
    assert!(a.rows.iter().all(|r| !r.roundoff_dominated));
}

#[test]
fn roundoff_is_flagged_on_very_fine_grids() {
    let f = cos_family(0.1, 1.0);
    let g = TorusGrid::from_fn(512, 512, 1.0, 1.0, &f).unwrap();
    let t = refine_and_extrapolate(&g, 2, Refiner::Analytic(&f)).unwrap();
    assert!(t.rows[0].roundoff_dominated);
}

#[test]
fn matches_series_density_at_a_point() {
    // φ = 0.3x² + 0.2xy − 0.1y³ in the x/y slot encoding.
    let ex = CoeffField::ExactGaussianRational;
    let xy = MultiSeries::from_terms(
        2,
        ex,
        16,
        [
            (Monomial::new(&[2], &[0], 0, 0), Q::from_ratio(3, 10)),
            (Monomial::new(&[1], &[1], 0, 0), Q::from_ratio(1, 5)),
            (Monomial::new(&[0], &[3], 0, 0), Q::from_ratio(-1, 10)),
        ],
    )
    .unwrap();
    let m = MetricGerm::new(from_xy(&xy).unwrap()).unwrap();
    let d = obstruction_density(&m).unwrap();
    let (x0, y0) = (0.04, -0.03);
    let series = d.eval(&[Complex64::new(x0, y0)], Complex64::new(0.0, 0.0)).re;
    let p = |x: f64, y: f64| 0.3 * x * x + 0.2 * x * y - 0.1 * y * y * y;
    let mut prev = None;
    for n in [32usize, 64, 128] {
        let g = TorusGrid::from_fn(n, n, 1.0, 1.0, |x, y| p(x - 0.5 + x0, y - 0.5 + y0)).unwrap();
        let r = grid_density(&g);
        let grid = r.density[(n / 2) * n + n / 2];
        let err = (grid - series).abs();
        if let Some(e) = prev {
            assert!(err < e / 3.0, "{err} vs {e}");
        }
        prev = Some(err);
        assert!(err < 1e-2 * series.abs().max(1.0), "n={n}: {grid} vs {series}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sign_dichotomy(a in -0.2f64..0.2, b in -0.2f64..0.2, c in -0.1f64..0.1, kx in 1i32..3, ky in 1i32..3) {
        let g = TorusGrid::from_fn(48, 48, 1.0, 1.0, move |x, y| {
            a * (2.0 * PI * kx as f64 * x).cos() + b * (2.0 * PI * ky as f64 * y).sin() + c * (2.0 * PI * (x + y)).cos()
        }).unwrap();
        let r = grid_density(&g);
        prop_assert!(r.sign_dichotomy_holds());
        prop_assert!(r.integral.abs() <= 1e-9 * r.abs_integral.max(1.0));
        if r.max > r.tol && r.min < -r.tol {
            prop_assert!(!r.zero_set.is_empty());
        }
    }
}

#[test]
fn coarsening_study_matches_upward_refinement() {
    let f = cos_family(0.1, 1.0);
    let fine = TorusGrid::from_fn(256, 256, 1.0, 1.0, &f).unwrap();
    let down = coarsening_study(&fine, 4).unwrap();
    assert_eq!(down.rows.first().unwrap().nx, 32);
    assert_eq!(down.rows.last().unwrap().nx, 256);
    let up = refine_and_extrapolate(&TorusGrid::from_fn(32, 32, 1.0, 1.0, &f).unwrap(), 4, Refiner::Analytic(&f)).unwrap();
    for (a, b) in down.orders().iter().zip(up.orders()) {
        assert!((a - 2.0).abs() < 0.3);
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    assert!(TorusGrid::from_fn(9, 16, 1.0, 1.0, &f).unwrap().coarsen().is_err());
    assert!(TorusGrid::from_fn(12, 12, 1.0, 1.0, &f).unwrap().coarsen().is_err());
}
