//! Chern–Moser normal-form data
//!
//! ```text
//! 2u = |z|² + Σ A^l_{αβ̄} z^α z̄^β v^l,   |α|, |β| ≥ 2,   conj(A^l_{αβ̄}) = A^l_{βᾱ}
//! ```
//!
//! with the trace conditions `Δ A^l_{22̄} = Δ² A^l_{23̄} = Δ³ A^l_{33̄} = 0`,
//! weighted osculation orders between graphs, and the consistency checks on
//! the osculating defining function `ψ₀` used for obstruction-flat
//! osculation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::monge_ampere::{k_operator_at_origin, DefiningSeries, MaError};
use crate::series::{CoeffField, Monomial, MultiSeries, Order, Scalar, SeriesError, Var, MAX_N, UNBOUNDED};

#[derive(Debug, Error)]
pub enum CmError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ma(#[from] MaError),
    #[error("invalid normal form: {0}")]
    Invalid(String),
    #[error("not in graph form: {0}")]
    NotGraph(String),
    #[error("unsupported dimension {0} for this check")]
    Dimension(usize),
}

/// Index of a normal-form coefficient `A^l_{αβ̄}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NfIndex {
    pub alpha: Vec<u8>,
    pub beta: Vec<u8>,
    pub l: u8,
}

impl NfIndex {
    pub fn new(alpha: &[u8], beta: &[u8], l: u8) -> Self {
        NfIndex { alpha: alpha.to_vec(), beta: beta.to_vec(), l }
    }

    pub fn weight(&self) -> u32 {
        deg(&self.alpha) + deg(&self.beta) + 2 * self.l as u32
    }

    fn swapped(&self) -> Self {
        NfIndex { alpha: self.beta.clone(), beta: self.alpha.clone(), l: self.l }
    }
}

fn deg(a: &[u8]) -> u32 {
    a.iter().map(|&x| x as u32).sum()
}

/// Sparse normal-form coefficient table.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm<C> {
    n: usize,
    field: CoeffField,
    entries: BTreeMap<NfIndex, C>,
}

impl<C: Scalar> NormalForm<C> {
    pub fn empty(n: usize, field: CoeffField) -> Result<Self, CmError> {
        if !(2..=MAX_N).contains(&n) {
            return Err(CmError::Dimension(n));
        }
        Ok(NormalForm { n, field, entries: BTreeMap::new() })
    }

    /// Validates index shapes, `|α|, |β| ≥ 2`, and the reality condition.
    /// Zero coefficients are dropped.
    pub fn new<I>(n: usize, field: CoeffField, entries: I) -> Result<Self, CmError>
    where
        I: IntoIterator<Item = (NfIndex, C)>,
    {
        let mut nf = Self::empty(n, field)?;
        for (idx, c) in entries {
            if idx.alpha.len() != n - 1 || idx.beta.len() != n - 1 {
                return Err(CmError::Invalid(format!("multi-indices must have length {}", n - 1)));
            }
            if deg(&idx.alpha) < 2 || deg(&idx.beta) < 2 {
                return Err(CmError::Invalid(format!(
                    "entry {:?},{:?},l={} has |alpha| or |beta| below 2",
                    idx.alpha, idx.beta, idx.l
                )));
            }
            if nf.entries.contains_key(&idx) {
                return Err(CmError::Invalid(format!("duplicate entry {:?},{:?},l={}", idx.alpha, idx.beta, idx.l)));
            }
            if !c.is_zero() {
                nf.entries.insert(idx, c);
            }
        }
        for (idx, c) in &nf.entries {
            let partner = nf.entries.get(&idx.swapped()).cloned().unwrap_or_else(|| C::zero(&field));
            if !partner.minus(&c.conj()).is_negligible() {
                return Err(CmError::Invalid(format!(
                    "reality fails: A[{:?},{:?},{}] = {c} but the swapped entry is {partner}",
                    idx.alpha, idx.beta, idx.l
                )));
            }
        }
        Ok(nf)
    }

    /// A single real diagonal coefficient `A^l_{αᾱ} = c`.
    pub fn diagonal(n: usize, field: CoeffField, alpha: &[u8], l: u8, c: C) -> Result<Self, CmError> {
        Self::new(n, field, [(NfIndex::new(alpha, alpha, l), c)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> CoeffField {
        self.field
    }

    pub fn entries(&self) -> &BTreeMap<NfIndex, C> {
        &self.entries
    }

    pub fn get(&self, idx: &NfIndex) -> C {
        self.entries.get(idx).cloned().unwrap_or_else(|| C::zero(&self.field))
    }

    /// Highest weight `|α| + |β| + 2l` among stored entries.
    pub fn max_weight(&self) -> u32 {
        self.entries.keys().map(NfIndex::weight).max().unwrap_or(0)
    }

    /// Entries of weight at most `k`.
    pub fn truncated(&self, k: u32) -> Self {
        NormalForm {
            n: self.n,
            field: self.field,
            entries: self.entries.iter().filter(|(i, _)| i.weight() <= k).map(|(i, c)| (i.clone(), c.clone())).collect(),
        }
    }

    /// `Σ A^l_{αβ̄} z^α z̄^β v^l` as a series known through `weight`.
    pub fn graphing_function(&self, weight: i32) -> Result<MultiSeries<C>, CmError> {
        let n = self.n;
        let v = MultiSeries::v(n, self.field, weight);
        let mut v_powers = vec![MultiSeries::one(n, self.field, weight)];
        let mut phi = MultiSeries::zero(n, self.field, weight);
        for (idx, c) in &self.entries {
            if idx.weight() as i32 > weight {
                continue;
            }
            while v_powers.len() <= idx.l as usize {
                let next = v_powers.last().expect("non-empty").mul(&v)?;
                v_powers.push(next);
            }
            let zpart = MultiSeries::from_terms(n, self.field, weight, [(Monomial::new(&idx.alpha, &idx.beta, 0, 0), c.clone())])?;
            phi = phi.add(&zpart.mul(&v_powers[idx.l as usize])?)?;
        }
        Ok(phi.truncate(weight))
    }
}

/// `w + w̄ − Σ z_j z̄_j`.
pub fn hyperquadric<C: Scalar>(n: usize, field: CoeffField, weight: i32) -> MultiSeries<C> {
    let mut rho = MultiSeries::zero(n, field, weight);
    let mut terms = vec![(Monomial::var(Var::W), C::one(&field)), (Monomial::var(Var::Wbar), C::one(&field))];
    for j in 0..n - 1 {
        terms.push((Monomial::var(Var::Z(j)).times(&Monomial::var(Var::Zbar(j))), C::from_i64(-1, &field)));
    }
    for (m, c) in terms {
        rho = rho.add(&MultiSeries::from_terms(n, field, weight, [(m, c)]).expect("valid monomial")).expect("same field");
    }
    rho.truncate(weight)
}

/// `ρ = 2u − |z|² − Σ A^l_{αβ̄} z^α z̄^β v^l`, truncated at `weight`. The
/// result is marked polynomial when no entry was cut off.
pub fn build_defining_series<C: Scalar>(nf: &NormalForm<C>, weight: i32) -> Result<DefiningSeries<C>, CmError> {
    if weight < 2 {
        return Err(CmError::Invalid(format!("truncation weight {weight} below 2")));
    }
    let rho = hyperquadric(nf.n, nf.field, weight).sub(&nf.graphing_function(weight)?)?;
    let complete = nf.max_weight() as i32 <= weight;
    Ok(if complete { DefiningSeries::polynomial(rho)? } else { DefiningSeries::new(rho)? })
}

// ---------------------------------------------------------------------------
// Trace conditions

/// One violated trace condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceFailure {
    pub l: u8,
    pub p: u32,
    pub q: u32,
    /// How many times the Laplacian was applied (or 0 for the plain
    /// vanishing required when `n = 2`).
    pub laplacian_power: u32,
    /// Surviving monomials of the result, rendered as text.
    pub monomials: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub pass: bool,
    pub failures: Vec<TraceFailure>,
}

/// `Δ = Σ_k ∂_{z_k} ∂_{z̄_k}`.
pub fn laplacian<C: Scalar>(f: &MultiSeries<C>) -> MultiSeries<C> {
    let mut acc = MultiSeries::zero(f.n(), f.field(), f.valid_weight());
    for k in 0..f.nz() {
        acc = acc.add(&f.derive(Var::Z(k)).derive(Var::Zbar(k))).expect("same field");
    }
    acc
}

/// Checks `Δ A^l_{22̄} = Δ² A^l_{23̄} = Δ² A^l_{32̄} = Δ³ A^l_{33̄} = 0` for
/// every `l`, plus vanishing of those blocks outright when `n = 2`.
pub fn validate_trace_conditions<C: Scalar>(nf: &NormalForm<C>) -> TraceReport {
    let ls: std::collections::BTreeSet<u8> = nf.entries.keys().map(|i| i.l).collect();
    let mut failures = Vec::new();
    for &l in &ls {
        for (p, q, power) in [(2, 2, 1), (2, 3, 2), (3, 2, 2), (3, 3, 3)] {
            let block: Vec<(Monomial, C)> = nf
                .entries
                .iter()
                .filter(|(i, _)| i.l == l && deg(&i.alpha) == p && deg(&i.beta) == q)
                .map(|(i, c)| (Monomial::new(&i.alpha, &i.beta, 0, 0), c.clone()))
                .collect();
            if block.is_empty() {
                continue;
            }
            let poly = MultiSeries::from_terms(nf.n, nf.field, UNBOUNDED, block).expect("valid block");
            if nf.n == 2 {
                failures.push(TraceFailure { l, p, q, laplacian_power: 0, monomials: render(&poly) });
                continue;
            }
            let mut image = poly;
            for _ in 0..power {
                image = laplacian(&image);
            }
            if image.terms().values().any(|c| !c.is_negligible()) {
                failures.push(TraceFailure { l, p, q, laplacian_power: power, monomials: render(&image) });
            }
        }
    }
    TraceReport { pass: failures.is_empty(), failures }
}

fn render<C: Scalar>(s: &MultiSeries<C>) -> Vec<String> {
    s.terms().iter().filter(|(_, c)| !c.is_negligible()).map(|(m, c)| format!("({c})·{m}")).collect()
}

// ---------------------------------------------------------------------------
// Osculation

/// First weight where two graphs differ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OsculationReport {
    /// `Exact(k)`: agreement through weight `k − 1`; `AtLeast(k)`: no
    /// difference up to the common truncation.
    pub order: Order,
    /// Monomials of weight `k` where the graphs differ.
    pub first_discrepant_weight_terms: Vec<String>,
}

/// Checks that `phi` is a graphing function for `2u = |z|² + φ(z, z̄, v)`:
/// no terms of weight ≤ 2 and no dependence on `u`.
pub fn check_graphing_function<C: Scalar>(phi: &MultiSeries<C>) -> Result<(), CmError> {
    if let Some((m, _)) = phi.terms().iter().find(|(m, c)| m.weight() <= 2 && !c.is_negligible()) {
        return Err(CmError::NotGraph(format!("term {m} has weight at most 2")));
    }
    let du = phi.derive(Var::W).add(&phi.derive(Var::Wbar))?;
    if du.terms().values().any(|c| !c.is_negligible()) {
        return Err(CmError::NotGraph("depends on u".into()));
    }
    Ok(())
}

/// Extracts `φ = 2u − |z|² − ρ` from a defining series in graph form.
pub fn graphing_function_of<C: Scalar>(rho: &MultiSeries<C>) -> Result<MultiSeries<C>, CmError> {
    let base = hyperquadric(rho.n(), rho.field(), rho.valid_weight());
    let phi = base.sub(rho)?;
    check_graphing_function(&phi)?;
    Ok(phi)
}

/// Weighted osculation order of two graphing functions.
pub fn osculation_order<C: Scalar>(a: &MultiSeries<C>, b: &MultiSeries<C>) -> Result<OsculationReport, CmError> {
    check_graphing_function(a)?;
    check_graphing_function(b)?;
    let diff = a.sub(b)?;
    let first = diff.terms().iter().find(|(_, c)| !c.is_negligible()).map(|(m, _)| m.weight());
    Ok(match first {
        Some(k) => OsculationReport {
            order: Order::Exact(k),
            first_discrepant_weight_terms: diff
                .homogeneous_part(k)
                .filter(|(_, c)| !c.is_negligible())
                .map(|(m, c)| format!("({c})·{m}"))
                .collect(),
        },
        None => OsculationReport {
            order: Order::AtLeast((diff.valid_weight() + 1).max(0) as u32),
            first_discrepant_weight_terms: Vec::new(),
        },
    })
}

/// Osculation order of two defining series in graph form.
pub fn osculation_order_of_defining<C: Scalar>(a: &MultiSeries<C>, b: &MultiSeries<C>) -> Result<OsculationReport, CmError> {
    osculation_order(&graphing_function_of(a)?, &graphing_function_of(b)?)
}

// ---------------------------------------------------------------------------
// Osculating defining function

/// `|z₁|^{2k}`.
fn z1_power<C: Scalar>(n: usize, field: CoeffField, k: u8, weight: i32) -> MultiSeries<C> {
    let mut alpha = vec![0u8; n - 1];
    alpha[0] = k;
    MultiSeries::from_terms(n, field, weight, [(Monomial::new(&alpha, &alpha, 0, 0), C::one(&field))]).expect("valid")
}

/// `x₁^k` with `x₁ = (z₁ + z̄₁)/2`.
pub fn x1_power<C: Scalar>(n: usize, field: CoeffField, k: u32, weight: i32) -> Result<MultiSeries<C>, SeriesError> {
    let half = C::from_ratio(1, 2, &field);
    let x = MultiSeries::var(n, field, Var::Z(0), weight)
        .add(&MultiSeries::var(n, field, Var::Zbar(0), weight))?
        .scale(&half);
    x.pow(k)
}

/// `ψ₀ = ρ + K(ρ)(0)/(n+2)² · |z₁|^{2n+4}` with `ρ` built from the
/// normal form truncated to weight `2n + 4`. Returns `(ψ₀, K(ρ)(0))`.
pub fn osculating_psi0<C: Scalar>(nf: &NormalForm<C>, weight: i32) -> Result<(DefiningSeries<C>, C), CmError> {
    let n = nf.n();
    let top = 2 * n as u32 + 4;
    let rho = build_defining_series(&nf.truncated(top), weight)?;
    let k_rho = k_operator_at_origin(&rho)?;
    let n2 = C::from_i64(((n + 2) * (n + 2)) as i64, &nf.field);
    let c = k_rho.over(&n2).expect("nonzero");
    let bump = z1_power::<C>(n, nf.field, (n + 2) as u8, weight).scale(&c);
    let psi0 = DefiningSeries::polynomial(rho.series().add(&bump)?)?;
    Ok((psi0, k_rho))
}

/// Result of the consistency checks on `ψ₀`.
#[derive(Clone, Debug)]
pub struct Psi0Report<C> {
    pub n: usize,
    /// `K(ρ)(0)` for the truncated normal form.
    pub k_rho: C,
    /// `K(ψ₀)(0)`, which must vanish.
    pub k_psi0: C,
    /// `K(ψ₀ + t x₁^{2n+4})(0)` at `t = 1` and `t = 2`.
    pub k_at_t: [C; 2],
    /// Slope in `t` read from `t = 1`.
    pub slope: C,
    /// `(n+2)² 2^{−(2n+4)} binom(2n+4, n+2)`.
    pub closed_form_magnitude: C,
    pub k_psi0_vanishes: bool,
    /// `K(ψ₀ + 2t…) = 2 K(ψ₀ + t…)`.
    pub linear_in_t: bool,
    /// `|slope|` equals the closed form and the slope is nonzero.
    pub magnitude_matches: bool,
    /// The sign forced by `K(ψ₀)(0) = 0`: adding `c|z₁|^{2n+4}` lowers `K`
    /// by `(n+2)² c`, so the slope is `−(closed form)`.
    pub sign_consistent: bool,
}

impl<C: Scalar> Psi0Report<C> {
    pub fn ok(&self) -> bool {
        self.k_psi0_vanishes && self.linear_in_t && self.magnitude_matches && self.sign_consistent
    }
}

/// `(n+2)² 2^{−(2n+4)} binom(2n+4, n+2)` as an exact rational.
pub fn psi0_slope_magnitude(n: usize) -> num_rational::BigRational {
    use num_bigint::BigInt;
    let m = 2 * n as u32 + 4;
    let mut binom = BigInt::from(1);
    for i in 0..(n as u32 + 2) {
        binom = binom * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    let n2 = BigInt::from(((n + 2) * (n + 2)) as u64);
    num_rational::BigRational::new(n2 * binom, BigInt::from(1u64) << m)
}

/// Builds `ψ₀`, verifies `K(ψ₀)(0) = 0`, and measures the `t`-slope of
/// `K(ψ₀ + t x₁^{2n+4})(0)`. Supported for `n ∈ {2, 3}`.
pub fn psi0_data_check<C: Scalar>(nf: &NormalForm<C>, weight: i32) -> Result<Psi0Report<C>, CmError> {
    let n = nf.n();
    if !(2..=3).contains(&n) {
        return Err(CmError::Dimension(n));
    }
    let field = nf.field();
    let (psi0, k_rho) = osculating_psi0(nf, weight)?;
    let k_psi0 = k_operator_at_origin(&psi0)?;
    let x = x1_power::<C>(n, field, 2 * n as u32 + 4, weight)?;
    let k_of = |t: i64| -> Result<C, CmError> {
        let s = psi0.series().add(&x.scale(&C::from_i64(t, &field)))?;
        Ok(k_operator_at_origin(&DefiningSeries::new(s)?)?)
    };
    let k1 = k_of(1)?;
    let k2 = k_of(2)?;
    let slope = k1.minus(&k_psi0);
    let closed = C::from_gaussian(&crate::series::GaussianRational::real(psi0_slope_magnitude(n)), &field);
    let two = C::from_i64(2, &field);
    let linear_in_t = k2.minus(&k_psi0).minus(&slope.times(&two)).is_negligible();
    let magnitude_matches = slope.minus(&closed).is_negligible() || slope.plus(&closed).is_negligible();
    let sign_consistent = slope.plus(&closed).is_negligible();
    Ok(Psi0Report {
        n,
        k_psi0_vanishes: k_psi0.is_negligible(),
        k_rho,
        k_psi0,
        k_at_t: [k1, k2],
        slope,
        closed_form_magnitude: closed,
        linear_in_t,
        magnitude_matches,
        sign_consistent,
    })
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfEntryJson {
    pub alpha: Vec<u8>,
    pub beta: Vec<u8>,
    #[serde(default)]
    pub l: u8,
    pub re: String,
    #[serde(default = "zero_string")]
    pub im: String,
}

fn zero_string() -> String {
    "0".into()
}

/// `{"n": 2, "entries": [{"alpha": [4], "beta": [4], "l": 0, "re": "1", "im": "0"}]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub n: usize,
    pub entries: Vec<NfEntryJson>,
}

impl<C: Scalar> NormalForm<C> {
    pub fn from_json(doc: &NormalFormJson, field: CoeffField) -> Result<Self, CmError> {
        let mut entries = Vec::with_capacity(doc.entries.len());
        for e in &doc.entries {
            entries.push((NfIndex::new(&e.alpha, &e.beta, e.l), C::parse(&e.re, &e.im, &field)?));
        }
        NormalForm::new(doc.n, field, entries)
    }

    pub fn to_json(&self) -> NormalFormJson {
        NormalFormJson {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|(i, c)| {
                    let (re, im) = c.to_strings();
                    NfEntryJson { alpha: i.alpha.clone(), beta: i.beta.clone(), l: i.l, re, im }
                })
                .collect(),
        }
    }
}
