//! A fast subset of the library's invariant checks.

use obstruct_core::chern_moser::{build_defining_series, hyperquadric, NormalForm};
use obstruct_core::circle_bundle::{
    extract_cauchy_data, flat_residual, k_zbzbzz, obstruction_density, flat_nonspherical_germ, MetricGerm,
};
use obstruct_core::monge_ampere::{j_operator, obstruction_at_origin, DefiningSeries};
use obstruct_core::series::{CoeffField, ComplexFloat, GaussianRational as Q, Monomial, MultiSeries, Scalar};
use obstruct_core::torus::{cos_family, grid_density, TorusGrid};
use serde_json::json;

use crate::manifest::{CliError, CliResult};
use crate::Outcome;

const EX: CoeffField = CoeffField::ExactGaussianRational;

type Check = fn() -> Result<bool, String>;

fn hyperquadric_flat() -> Result<bool, String> {
    let rho = hyperquadric::<Q>(2, EX, 10);
    let j = j_operator(&rho).map_err(|e| e.to_string())?;
    let o = obstruction_at_origin(&DefiningSeries::new(rho).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok(j == MultiSeries::one(2, EX, j.valid_weight()) && o.value.is_zero())
}

fn a44_normalization() -> Result<bool, String> {
    let nf = NormalForm::diagonal(2, EX, &[4], 0, Q::from_ratio(1, 3)).map_err(|e| e.to_string())?;
    let o = obstruction_at_origin(&build_defining_series(&nf, 10).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok(o.value == Q::from_ratio(4, 3) && o.k_value == Q::from_ratio(16, 3))
}

fn trace_term_n3() -> Result<bool, String> {
    let nf = NormalForm::diagonal(3, EX, &[5, 0], 0, Q::one()).map_err(|e| e.to_string())?;
    let o = obstruction_at_origin(&build_defining_series(&nf, 12).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok(o.k_value == Q::from_integer(25))
}

fn float_backend_agrees() -> Result<bool, String> {
    let field = CoeffField::ComplexFloat { bits: 128 };
    let nf = NormalForm::diagonal(2, field, &[4], 0, ComplexFloat::from_ratio(1, 3, &field)).map_err(|e| e.to_string())?;
    let o = obstruction_at_origin(&build_defining_series(&nf, 10).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let err = o.value.minus(&ComplexFloat::from_ratio(4, 3, &field)).to_c64().norm();
    Ok(err <= 1e-30)
}

fn sample_germ() -> Result<MetricGerm<Q>, String> {
    let t = [((1, 1), Q::from_ratio(1, 2)), ((2, 1), Q::from_ratio(-1, 3)), ((1, 2), Q::from_ratio(-1, 3)), ((3, 0), Q::from_ratio(1, 5)), ((0, 3), Q::from_ratio(1, 5))];
    let s = MultiSeries::from_terms(2, EX, 10, t.iter().map(|((a, b), c)| (Monomial::new(&[*a], &[*b], 0, 0), c.clone())))
        .map_err(|e| e.to_string())?;
    MetricGerm::new(s).map_err(|e| e.to_string())
}

fn density_identity() -> Result<bool, String> {
    let m = sample_germ()?;
    let lhs = m.exp_factor(-4).and_then(|e| Ok(e.mul(&k_zbzbzz(&m)?)?)).map_err(|e| e.to_string())?;
    let rhs = obstruction_density(&m).map_err(|e| e.to_string())?.scale(&Q::from_ratio(1, 4));
    let k = lhs.valid_weight().min(rhs.valid_weight());
    Ok(k >= 4 && lhs.truncate(k) == rhs.truncate(k))
}

fn flat_residual_identity() -> Result<bool, String> {
    let m = sample_germ()?;
    let flat = flat_residual(&m).map_err(|e| e.to_string())?;
    let d = obstruction_density(&m).map_err(|e| e.to_string())?;
    let rhs = m.exp_factor(2).and_then(|e| Ok(e.mul(&d)?)).map_err(|e| e.to_string())?.scale(&Q::from_integer(-8));
    let k = flat.valid_weight().min(rhs.valid_weight());
    Ok(flat.truncate(k) == rhs.truncate(k))
}

fn flat_germ_construction() -> Result<bool, String> {
    let r = flat_nonspherical_germ::<Q>(EX, 10).map_err(|e| e.to_string())?;
    let back = extract_cauchy_data(&r.phi, 6).map_err(|e| e.to_string())?;
    Ok(back == r.data && r.flat_residual_order.is_at_least(r.flat_order as u32) && !r.spherical_leading.is_empty())
}

fn torus_integral() -> Result<bool, String> {
    let g = TorusGrid::from_fn(32, 32, 1.0, 1.0, cos_family(0.1, 1.0)).map_err(|e| e.to_string())?;
    let r = grid_density(&g);
    Ok(r.integral.abs() <= 1e-10 && r.sign_dichotomy_holds() && !r.zero_circles.is_empty())
}

const CHECKS: &[(&str, Check)] = &[
    ("hyperquadric J = 1 and O = 0", hyperquadric_flat),
    ("O = 4A for A = 1/3", a44_normalization),
    ("trace term n = 3", trace_term_n3),
    ("float backend agrees", float_backend_agrees),
    ("density identity", density_identity),
    ("flat residual = -8 e^{2phi} D", flat_residual_identity),
    ("flat non-spherical germ", flat_germ_construction),
    ("torus integral and sign change", torus_integral),
];

pub fn run() -> CliResult<Outcome> {
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (name, check) in CHECKS {
        let (pass, detail) = match check() {
            Ok(p) => (p, None),
            Err(e) => (false, Some(e)),
        };
        if !pass {
            failed.push(*name);
        }
        rows.push(json!({ "name": name, "pass": pass, "error": detail }));
    }
    let failure = (!failed.is_empty()).then(|| CliError::Invariant(format!("selftest failed: {}", failed.join(", "))));
    Ok(Outcome { body: json!({ "checks": rows, "pass": failed.is_empty() }), failure })
}
