use num_complex::Complex64;
use obstruct_core::circle_bundle::*;
use obstruct_core::series::{CoeffField, GaussianRational as Q, Monomial, MultiSeries, Order, Scalar};
use proptest::prelude::*;

const EX: CoeffField = CoeffField::ExactGaussianRational;

fn germ(terms: &[((u8, u8), Q)], degree: i32) -> MetricGerm<Q> {
    let t = terms.iter().map(|((a, b), c)| (Monomial::new(&[*a], &[*b], 0, 0), c.clone()));
    MetricGerm::new(MultiSeries::from_terms(2, EX, degree, t).unwrap()).unwrap()
}

/// Real polynomial with `φ(0) = 0` and total degree at most 8.
fn real_poly() -> impl Strategy<Value = Vec<((u8, u8), Q)>> {
    proptest::collection::vec(((0u8..5, 0u8..5), -3i64..4, 1i64..4, -2i64..3), 1..5).prop_map(|raw| {
        let mut out = Vec::new();
        for ((a, b), p, q, im) in raw {
            if a + b == 0 || a + b > 8 {
                continue;
            }
            let c = Q::new(num_rational::BigRational::new(p.into(), q.into()), num_rational::BigRational::new(im.into(), 3.into()));
            if a == b {
                out.push(((a, b), Q::real(c.re.clone())));
            } else {
                out.push(((a, b), c.clone()));
                out.push(((b, a), c.conj()));
            }
        }
        out
    })
}

fn quarter() -> Q {
    Q::from_ratio(1, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn density_identity(t in real_poly()) {
        let m = germ(&t, 10);
        let lhs = m.exp_factor(-4).unwrap().mul(&k_zbzbzz(&m).unwrap()).unwrap();
        let rhs = obstruction_density(&m).unwrap().scale(&quarter());
        let k = lhs.valid_weight().min(rhs.valid_weight());
        prop_assert!(k >= 4);
        prop_assert_eq!(lhs.truncate(k), rhs.truncate(k));
        prop_assert!(k_zbzbzz(&m).unwrap().is_real());
    }

    #[test]
    fn ricci_identity(t in real_poly()) {
        let m = germ(&t, 9);
        let k = TensorField::scalar(gauss_curvature(&m).unwrap());
        let a = covariant_chain(&k, &[Dir::Z, Dir::Z, Dir::Zbar], &m).unwrap().component;
        let b = covariant_chain(&k, &[Dir::Z, Dir::Zbar, Dir::Z], &m).unwrap().component;
        let k2 = k.component.mul(&k.component).unwrap();
        let rhs = m.exp_factor(2).unwrap().mul(&k2.derive(obstruct_core::series::Var::Z(0))).unwrap().scale(&Q::from_ratio(1, 2));
        let lhs = a.sub(&b).unwrap();
        let v = lhs.valid_weight().min(rhs.valid_weight());
        prop_assert_eq!(lhs.truncate(v), rhs.truncate(v));
    }

    #[test]
    fn flat_residual_is_density_multiple(t in real_poly()) {
        let m = germ(&t, 10);
        let flat = flat_residual(&m).unwrap();
        let d = obstruction_density(&m).unwrap();
        let rhs = m.exp_factor(2).unwrap().mul(&d).unwrap().scale(&Q::from_integer(-8));
        let v = flat.valid_weight().min(rhs.valid_weight());
        prop_assert_eq!(flat.truncate(v), rhs.truncate(v));
        let r = pde_residuals(&m).unwrap();
        prop_assert!(r.flat.is_real() && r.spherical_xx.is_real() && r.spherical_xy.is_real());
    }

    #[test]
    fn potential_roundtrip(t in real_poly()) {
        let m = germ(&t, 8);
        let g = potential_from_phi(&m).unwrap();
        let back = g.derive(obstruct_core::series::Var::Z(0)).derive(obstruct_core::series::Var::Zbar(0));
        prop_assert_eq!(back, m.exp_factor(2).unwrap());
    }

    #[test]
    fn spherical_solve_roundtrip(t in real_poly()) {
        let m = germ(&t, 9);
        let data = extract_cauchy_data(&m, 4).unwrap();
        let sol = ck_solve_spherical_first(&data, 9).unwrap();
        prop_assert_eq!(extract_cauchy_data(&sol.phi, 4).unwrap(), data);
        prop_assert!(sol.residual_order.is_at_least(6));
    }
}

#[test]
fn curvature_matches_finite_differences() {
    let m = germ(&[((1, 1), Q::from_ratio(1, 2)), ((2, 1), Q::from_ratio(1, 3)), ((1, 2), Q::from_ratio(1, 3)), ((3, 0), Q::from_ratio(1, 5)), ((0, 3), Q::from_ratio(1, 5))], 40);
    let k = gauss_curvature(&m).unwrap();
    let phi = |x: f64, y: f64| m.phi().eval(&[Complex64::new(x, y)], Complex64::new(0.0, 0.0)).re;
    let (x, y, h) = (0.01, -0.015, 1e-3);
    let lap = (phi(x + h, y) + phi(x - h, y) + phi(x, y + h) + phi(x, y - h) - 4.0 * phi(x, y)) / (h * h);
    let fd = -0.5 * (-2.0 * phi(x, y)).exp() * lap;
    let series = k.eval(&[Complex64::new(x, y)], Complex64::new(0.0, 0.0)).re;
    assert!((series - fd).abs() < 1e-5, "{series} vs {fd}");
}

#[test]
fn constant_curvature_has_zero_density() {
    let m = round_metric::<Q>(EX, 12);
    assert!(obstruction_density(&m).unwrap().is_empty());
    let r = pde_residuals(&m).unwrap();
    assert!(r.flat.is_empty() && r.spherical_xx.is_empty() && r.spherical_xy.is_empty());
    let flat = germ(&[], 10);
    assert!(obstruction_density(&flat).unwrap().is_empty());
}

#[test]
fn zero_data_gives_zero() {
    let s = ck_solve_flat(&CauchyData::<Q>::zero(EX, 6, 12), 12).unwrap();
    assert!(s.phi.phi().is_empty());
    let s = ck_solve_spherical_first(&CauchyData::<Q>::zero(EX, 4, 10), 10).unwrap();
    assert!(s.phi.phi().is_empty());
}

#[test]
fn round_metric_is_recovered() {
    let round = round_metric::<Q>(EX, 12);
    let data = extract_cauchy_data(&round, 4).unwrap();
    let s = ck_solve_spherical_first(&data, 12).unwrap();
    assert_eq!(s.phi, round);
    let data6 = extract_cauchy_data(&round, 6).unwrap();
    assert_eq!(ck_solve_flat(&data6, 12).unwrap().phi, round);
}

#[test]
fn harmonic_germ_is_recovered() {
    // x³ − 3xy² = Re z³
    let h = germ(&[((3, 0), Q::from_ratio(1, 2)), ((0, 3), Q::from_ratio(1, 2))], 11);
    assert!(flat_residual(&h).unwrap().is_empty());
    let data = extract_cauchy_data(&h, 6).unwrap();
    assert_eq!(ck_solve_flat(&data, 11).unwrap().phi, h);
}

#[test]
fn manufactured_solution() {
    let target = germ(
        &[((1, 1), Q::from_ratio(1, 3)), ((2, 1), Q::from_ratio(-1, 2)), ((1, 2), Q::from_ratio(-1, 2)), ((4, 2), Q::from_ratio(1, 7)), ((2, 4), Q::from_ratio(1, 7)), ((3, 3), Q::one())],
        12,
    );
    let forcing = flat_residual(&target).unwrap();
    let data = extract_cauchy_data(&target, 6).unwrap();
    let s = ck_solve_flat_forced(&data, &forcing, 12).unwrap();
    assert_eq!(s.phi, target);
    let sol = ck_solve_flat(&data, 12).unwrap();
    assert_eq!(extract_cauchy_data(&sol.phi, 6).unwrap(), data);
    assert!(flat_residual(&sol.phi).unwrap().weight_order().is_at_least(7));
}

#[test]
fn flat_nonspherical_construction() {
    let r = flat_nonspherical_germ::<Q>(EX, 12).unwrap();
    assert!(r.flat_residual_order.is_at_least(r.flat_order as u32));
    assert_eq!(r.flat_order, 7);
    assert!(!r.spherical_leading.is_empty());
    let xy = to_xy(r.phi.phi()).unwrap();
    assert_eq!(y_coefficient(&xy, 5).coeff(0).unwrap(), &Q::from_ratio(1, 120));
    for k in 0..5 {
        assert!(y_coefficient(&xy, k).coeffs().iter().all(|c| c.is_zero()), "y^{k}");
    }
    assert_eq!(extract_cauchy_data(&r.phi, 6).unwrap(), r.data);
    assert!(matches!(r.flat_residual_order, Order::AtLeast(_) | Order::Exact(_)));
}

#[test]
fn nonzero_base_value_needs_float() {
    let m = germ(&[((0, 0), Q::one())], 6);
    assert!(gauss_curvature(&m).is_err());
    let f = MetricGerm::new(m.phi().to_float(128).unwrap()).unwrap();
    let k = gauss_curvature(&f).unwrap();
    assert!(k.terms().values().all(|c| c.is_negligible()));
}
