//! compute, cm-validate, osculate, thm31.

use std::path::Path;

use obstruct_core::chern_moser::{
    build_defining_series, osculating_psi0, osculation_order, osculation_order_of_defining, psi0_data_check,
    validate_trace_conditions, CmError, NormalForm, NormalFormJson, OsculationReport,
};
use obstruct_core::monge_ampere::{default_weight, minimal_weight, obstruction_at_origin, DefiningSeries, MaError};
use obstruct_core::series::{CoeffField, ComplexFloat, GaussianRational, MultiSeries, Scalar, SeriesError, SeriesJson};
use serde_json::{json, Value};

use crate::manifest::{input_err, CliError, CliResult, RunManifest};
use crate::Outcome;

/// A real value as a string; a complex one as `{"re", "im"}`.
pub fn scalar_json<C: Scalar>(c: &C) -> Value {
    let (re, im) = c.to_strings();
    if c.minus(&c.conj()).is_negligible() {
        Value::String(re)
    } else {
        json!({ "re": re, "im": im })
    }
}

pub fn ma_err(e: MaError) -> CliError {
    match e {
        MaError::Invariant(m) => CliError::Invariant(m),
        other => CliError::Input(other.to_string()),
    }
}

pub fn cm_err(e: CmError) -> CliError {
    match e {
        CmError::Ma(m) => ma_err(m),
        other => CliError::Input(other.to_string()),
    }
}

fn series_err(e: SeriesError) -> CliError {
    input_err(e)
}

/// The two accepted input schemas, told apart by `"entries"` vs `"terms"`.
pub enum SurfaceDoc {
    NormalForm(NormalFormJson),
    Series(SeriesJson),
}

impl SurfaceDoc {
    pub fn parse(bytes: &[u8]) -> CliResult<Self> {
        let v: Value = serde_json::from_slice(bytes).map_err(input_err)?;
        if v.get("entries").is_some() {
            Ok(SurfaceDoc::NormalForm(serde_json::from_value(v).map_err(input_err)?))
        } else if v.get("terms").is_some() {
            Ok(SurfaceDoc::Series(serde_json::from_value(v).map_err(input_err)?))
        } else {
            Err(CliError::Input("expected a normal form (\"entries\") or a series (\"terms\")".into()))
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SurfaceDoc::NormalForm(d) => d.n,
            SurfaceDoc::Series(d) => d.n,
        }
    }

    fn load(m: &mut RunManifest, path: &Path) -> CliResult<Self> {
        Self::parse(&m.read_input(path)?)
    }

    /// Defining series truncated at `weight`.
    fn defining<C: Scalar>(&self, field: CoeffField, weight: i32) -> CliResult<DefiningSeries<C>> {
        match self {
            SurfaceDoc::NormalForm(d) => {
                let nf = NormalForm::<C>::from_json(d, field).map_err(cm_err)?;
                build_defining_series(&nf, weight).map_err(cm_err)
            }
            SurfaceDoc::Series(d) => {
                let s = MultiSeries::<C>::from_json(d, field).map_err(series_err)?;
                let w = weight.min(s.valid_weight());
                DefiningSeries::new(s.truncate(w)).map_err(ma_err)
            }
        }
    }
}

fn check_weight(n: usize, w: i32) -> CliResult<()> {
    if w < minimal_weight(n) {
        return Err(CliError::Input(format!("weight {w} is below the minimum {} for n = {n}", minimal_weight(n))));
    }
    Ok(())
}

pub fn compute(m: &mut RunManifest, input: &Path, weight: Option<i32>, field: CoeffField) -> CliResult<Outcome> {
    let doc = SurfaceDoc::load(m, input)?;
    let n = doc.n();
    let mut w = weight.unwrap_or_else(|| default_weight(n));
    if let SurfaceDoc::Series(s) = &doc {
        w = w.min(s.valid_weight);
    }
    check_weight(n, w)?;
    m.set_truncation("weight", w);
    match field {
        CoeffField::ExactGaussianRational => compute_with::<GaussianRational>(&doc, field, w),
        CoeffField::ComplexFloat { .. } => compute_with::<ComplexFloat>(&doc, field, w),
    }
}

fn compute_with<C: Scalar>(doc: &SurfaceDoc, field: CoeffField, w: i32) -> CliResult<Outcome> {
    let d = doc.defining::<C>(field, w)?;
    let o = obstruction_at_origin(&d).map_err(ma_err)?;
    Ok(Outcome::ok(json!({
        "n": d.n(),
        "obstruction": scalar_json(&o.value),
        "k_value": scalar_json(&o.k_value),
        "residual_orders": o.residual_orders.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        "weight": o.weight,
    })))
}

pub fn cm_validate(m: &mut RunManifest, input: &Path) -> CliResult<Outcome> {
    let SurfaceDoc::NormalForm(doc) = SurfaceDoc::load(m, input)? else {
        return Err(CliError::Input("cm-validate takes a normal form".into()));
    };
    let field = CoeffField::ExactGaussianRational;
    let nf = NormalForm::<GaussianRational>::from_json(&doc, field).map_err(cm_err)?;
    let report = validate_trace_conditions(&nf);
    let failure = (!report.pass).then(|| CliError::Input(format!("{} trace condition(s) fail", report.failures.len())));
    Ok(Outcome { body: json!({ "n": nf.n(), "pass": report.pass, "failures": report.failures }), failure })
}

fn osculation_json(r: &OsculationReport) -> Value {
    json!({
        "order": r.order,
        "agree_through_weight": r.order.lower_bound() as i64 - 1,
        "first_discrepant_weight_terms": r.first_discrepant_weight_terms,
    })
}

pub fn osculate(m: &mut RunManifest, a: &Path, b: Option<&Path>, weight: Option<i32>) -> CliResult<Outcome> {
    let field = CoeffField::ExactGaussianRational;
    let da = SurfaceDoc::load(m, a)?;
    let n = da.n();
    let w = weight.unwrap_or_else(|| default_weight(n) + 2);
    check_weight(n, w)?;
    m.set_truncation("weight", w);
    let Some(b) = b else {
        let SurfaceDoc::NormalForm(doc) = &da else {
            return Err(CliError::Input("without --b, --a must be a normal form".into()));
        };
        let nf = NormalForm::<GaussianRational>::from_json(doc, field).map_err(cm_err)?;
        let rho = build_defining_series(&nf, w).map_err(cm_err)?;
        let (psi0, _) = osculating_psi0(&nf, w).map_err(cm_err)?;
        let r = osculation_order_of_defining(rho.series(), psi0.series()).map_err(cm_err)?;
        let o = obstruction_at_origin(&rho).map_err(ma_err)?.value;
        let top = 2 * n as u32 + 4;
        let mut failure = None;
        if !r.order.is_at_least(top) {
            failure = Some(CliError::Invariant(format!("psi0 departs from rho below weight {top}")));
        } else if o.is_zero() != r.order.is_at_least(top + 1) {
            failure = Some(CliError::Invariant("contact beyond weight 2n+4 does not match O(0) = 0".into()));
        }
        let mut body = osculation_json(&r);
        body["mode"] = json!("rho-vs-psi0");
        body["n"] = json!(n);
        body["obstruction"] = scalar_json(&o);
        return Ok(Outcome { body, failure });
    };
    let db = SurfaceDoc::load(m, b)?;
    if db.n() != n {
        return Err(CliError::Input(format!("dimension mismatch: {n} vs {}", db.n())));
    }
    let (r, mode) = match (&da, &db) {
        (SurfaceDoc::NormalForm(x), SurfaceDoc::NormalForm(y)) => {
            let fa = NormalForm::<GaussianRational>::from_json(x, field).map_err(cm_err)?.graphing_function(w).map_err(cm_err)?;
            let fb = NormalForm::<GaussianRational>::from_json(y, field).map_err(cm_err)?.graphing_function(w).map_err(cm_err)?;
            (osculation_order(&fa, &fb).map_err(cm_err)?, "graphs")
        }
        _ => {
            let ra = da.defining::<GaussianRational>(field, w)?;
            let rb = db.defining::<GaussianRational>(field, w)?;
            (osculation_order_of_defining(ra.series(), rb.series()).map_err(cm_err)?, "defining")
        }
    };
    let mut body = osculation_json(&r);
    body["mode"] = json!(mode);
    body["n"] = json!(n);
    Ok(Outcome::ok(body))
}

pub fn thm31(m: &mut RunManifest, input: &Path, weight: Option<i32>, field: CoeffField) -> CliResult<Outcome> {
    let SurfaceDoc::NormalForm(doc) = SurfaceDoc::load(m, input)? else {
        return Err(CliError::Input("thm31 takes a normal form".into()));
    };
    if !(2..=3).contains(&doc.n) {
        return Err(CliError::Input(format!("thm31 supports n = 2 or 3, got {}", doc.n)));
    }
    let w = weight.unwrap_or_else(|| default_weight(doc.n) + 2);
    check_weight(doc.n, w)?;
    m.set_truncation("weight", w);
    match field {
        CoeffField::ExactGaussianRational => thm31_with::<GaussianRational>(&doc, field, w),
        CoeffField::ComplexFloat { .. } => thm31_with::<ComplexFloat>(&doc, field, w),
    }
}

fn thm31_with<C: Scalar>(doc: &NormalFormJson, field: CoeffField, w: i32) -> CliResult<Outcome> {
    let nf = NormalForm::<C>::from_json(doc, field).map_err(cm_err)?;
    let r = psi0_data_check(&nf, w).map_err(cm_err)?;
    let body = json!({
        "n": r.n,
        "k_rho": scalar_json(&r.k_rho),
        "k_psi0": scalar_json(&r.k_psi0),
        "k_at_t": [scalar_json(&r.k_at_t[0]), scalar_json(&r.k_at_t[1])],
        "slope": scalar_json(&r.slope),
        "closed_form_magnitude": scalar_json(&r.closed_form_magnitude),
        "k_psi0_vanishes": r.k_psi0_vanishes,
        "linear_in_t": r.linear_in_t,
        "magnitude_matches": r.magnitude_matches,
        "sign_consistent": r.sign_consistent,
        "pass": r.ok(),
    });
    let failure = (!r.ok()).then(|| CliError::Invariant("psi0 data checks failed".into()));
    Ok(Outcome { body, failure })
}
