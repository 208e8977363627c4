//! ck-solve, thm41.

use std::path::Path;

use clap::ValueEnum;
use obstruct_core::circle_bundle::{
    ck_solve_flat, ck_solve_spherical_first, extract_cauchy_data, flat_nonspherical_germ, CauchyData, CauchyDataJson, CbError,
};
use obstruct_core::series::{CoeffField, ComplexFloat, GaussianRational, Scalar};
use serde_json::{json, Value};

use crate::manifest::{input_err, CliError, CliResult, RunManifest};
use crate::surface::scalar_json;
use crate::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// `Δ_g²K + Δ_gK² = 0`, six Cauchy germs.
    Flat,
    /// `K_{;z̄z̄} = 0` (real part), four Cauchy germs.
    Spherical,
}

pub fn cb_err(e: CbError) -> CliError {
    match e {
        CbError::Invariant(m) => CliError::Invariant(m),
        other => CliError::Input(other.to_string()),
    }
}

pub fn ck_solve(m: &mut RunManifest, kind: Kind, data: &Path, degree: i32, field: CoeffField) -> CliResult<Outcome> {
    let doc: CauchyDataJson = serde_json::from_slice(&m.read_input(data)?).map_err(input_err)?;
    m.set_truncation("degree", degree);
    match field {
        CoeffField::ExactGaussianRational => ck_with::<GaussianRational>(kind, &doc, degree, field),
        CoeffField::ComplexFloat { .. } => ck_with::<ComplexFloat>(kind, &doc, degree, field),
    }
}

fn ck_with<C: Scalar>(kind: Kind, doc: &CauchyDataJson, degree: i32, field: CoeffField) -> CliResult<Outcome> {
    let data = CauchyData::<C>::from_json(doc, field).map_err(cb_err)?;
    let need = match kind {
        Kind::Flat => 6,
        Kind::Spherical => 4,
    };
    if data.len() != need {
        return Err(CliError::Input(format!("{kind:?} solve takes {need} germs, got {}", data.len())));
    }
    let sol = match kind {
        Kind::Flat => ck_solve_flat(&data, degree),
        Kind::Spherical => ck_solve_spherical_first(&data, degree),
    }
    .map_err(cb_err)?;
    let back = extract_cauchy_data(&sol.phi, need).map_err(cb_err)?;
    let roundtrip = same_data(&back, &data);
    let mut failure = None;
    if !sol.residual_order.is_at_least(sol.certified_order.max(0) as u32) {
        failure = Some(CliError::Invariant(format!("residual order {} below certificate {}", sol.residual_order, sol.certified_order)));
    } else if !roundtrip {
        failure = Some(CliError::Invariant("Cauchy data do not round-trip".into()));
    }
    let body = json!({
        "kind": format!("{kind:?}").to_lowercase(),
        "phi": sol.phi.phi().to_json(),
        "certified_order": sol.certified_order,
        "residual_order": sol.residual_order,
        "data_roundtrip": roundtrip,
    });
    Ok(Outcome { body, failure })
}

/// Equal germ by germ through the common valid order, up to rounding for
/// float data. Input data may be known further than the solve degree.
fn same_data<C: Scalar>(a: &CauchyData<C>, b: &CauchyData<C>) -> bool {
    a.len() == b.len()
        && a.germs.iter().zip(&b.germs).all(|(x, y)| {
            let v = x.valid_order().min(y.valid_order());
            v >= 0
                && (0..=v as usize).all(|k| {
                    let zero = C::zero(&x.field());
                    let cx = x.coeffs().get(k).unwrap_or(&zero);
                    let cy = y.coeffs().get(k).unwrap_or(&zero);
                    cx.minus(cy).is_negligible()
                })
        })
}

pub fn thm41(m: &mut RunManifest, degree: i32) -> CliResult<Outcome> {
    m.set_truncation("degree", degree);
    let field = CoeffField::ExactGaussianRational;
    let r = flat_nonspherical_germ::<GaussianRational>(field, degree).map_err(cb_err)?;
    let back = extract_cauchy_data(&r.phi, r.data.len()).map_err(cb_err)?;
    let roundtrip = back == r.data;
    let flat_ok = r.flat_residual_order.is_at_least(r.flat_order.max(0) as u32);
    let leading: Vec<Value> = r
        .spherical_leading
        .iter()
        .map(|(mono, c)| json!({ "monomial": mono.to_string(), "coeff": scalar_json(c) }))
        .collect();
    let body = json!({
        "phi": r.phi.phi().to_json(),
        "cauchy_data": r.data.to_json(),
        "flat_order": r.flat_order,
        "flat_residual_order": r.flat_residual_order,
        "spherical_leading_degree": r.spherical_leading_degree,
        "spherical_leading": leading,
        "data_roundtrip": roundtrip,
    });
    let failure = if !flat_ok {
        Some(CliError::Invariant("flat residual below its certificate".into()))
    } else if !roundtrip {
        Some(CliError::Invariant("Cauchy data do not round-trip".into()))
    } else {
        None
    };
    Ok(Outcome { body, failure })
}
