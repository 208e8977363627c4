//! Curvature calculus for conformal metrics `g = 2e^{2φ}|dz|²` on a
//! Riemann surface, the obstruction density of the associated circle
//! bundle, and formal Cauchy–Kowalevski solvers.
//!
//! Germs are [`MultiSeries`] with `n = 2` and no `w` terms, so weight is
//! total degree in `z, z̄`. Key formulas:
//!
//! ```text
//! K = −2e^{−2φ} ∂∂̄φ,   Δ_g f = 2e^{−2φ} ∂∂̄f,   D = Δ_g²K + Δ_g K²
//! e^{−4φ} K_{;z̄z̄zz} = ¼ D
//! Δ(e^{−2φ}Δ(e^{−2φ}Δφ)) − Δ(e^{−4φ}(Δφ)²) = −8e^{2φ} D,   Δ = 4∂∂̄
//! ```
//!
//! Real coordinates `z = x + iy` are encoded in the same series type with
//! the `z` slot holding `x` and the `z̄` slot holding `y` (see [`to_xy`]).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{CoeffField, GaussianRational, Monomial, MultiSeries, Order, Scalar, SeriesError, UniSeries, Var};

#[derive(Debug, Error)]
pub enum CbError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("not a metric germ: {0}")]
    NotGerm(String),
    #[error("truncation degree {have} too small, need at least {need}")]
    Degree { need: i32, have: i32 },
    #[error("bad Cauchy data: {0}")]
    Data(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

const Z: Var = Var::Z(0);
const ZB: Var = Var::Zbar(0);

/// Real conformal factor `φ(z, z̄)` of `g = 2e^{2φ}|dz|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGerm<C> {
    phi: MultiSeries<C>,
}

impl<C: Scalar> MetricGerm<C> {
    pub fn new(phi: MultiSeries<C>) -> Result<Self, CbError> {
        if phi.n() != 2 {
            return Err(CbError::NotGerm(format!("expected a series in one complex variable, got n = {}", phi.n())));
        }
        if phi.terms().keys().any(|m| m.p() > 0 || m.q() > 0) {
            return Err(CbError::NotGerm("depends on w".into()));
        }
        if !phi.is_real() {
            return Err(CbError::NotGerm("not real".into()));
        }
        Ok(MetricGerm { phi })
    }

    pub fn phi(&self) -> &MultiSeries<C> {
        &self.phi
    }

    pub fn valid_degree(&self) -> i32 {
        self.phi.valid_weight()
    }

    pub fn field(&self) -> CoeffField {
        self.phi.field()
    }

    /// `e^{kφ}`.
    pub fn exp_factor(&self, k: i64) -> Result<MultiSeries<C>, CbError> {
        Ok(self.phi.scale(&C::from_i64(k, &self.field())).exp()?)
    }

    fn need(&self, need: i32) -> Result<(), CbError> {
        if self.valid_degree() < need {
            return Err(CbError::Degree { need, have: self.valid_degree() });
        }
        Ok(())
    }
}

/// Germ `φ = −log(1 + zz̄)` of the round metric, known through `degree`.
pub fn round_metric<C: Scalar>(field: CoeffField, degree: i32) -> MetricGerm<C> {
    let zzb = Monomial::new(&[1], &[1], 0, 0);
    let mut terms = Vec::new();
    let mut m = Monomial::ONE;
    for k in 1..=(degree / 2).max(0) {
        m = m.times(&zzb);
        let sign = if k % 2 == 1 { -1 } else { 1 };
        terms.push((m, C::from_ratio(sign, k as i64, &field)));
    }
    MetricGerm::new(MultiSeries::from_terms(2, field, degree, terms).expect("valid")).expect("real")
}

// ---------------------------------------------------------------------------
// Curvature

fn ddbar<C: Scalar>(f: &MultiSeries<C>) -> MultiSeries<C> {
    f.derive(Z).derive(ZB)
}

/// `K = −2e^{−2φ} ∂∂̄φ`.
pub fn gauss_curvature<C: Scalar>(m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    m.need(2)?;
    let f = m.exp_factor(-2)?;
    Ok(f.mul(&ddbar(m.phi()))?.scale(&C::from_i64(-2, &m.field())))
}

/// Holomorphic or antiholomorphic tangent direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    Z,
    Zbar,
}

impl Dir {
    fn var(self) -> Var {
        match self {
            Dir::Z => Z,
            Dir::Zbar => ZB,
        }
    }
}

/// Covariant tensor with component series and index signature, e.g.
/// `K_{;z̄z̄}` has indices `[Zbar, Zbar]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField<C> {
    pub indices: Vec<Dir>,
    pub component: MultiSeries<C>,
}

impl<C: Scalar> TensorField<C> {
    pub fn scalar(f: MultiSeries<C>) -> Self {
        TensorField { indices: Vec::new(), component: f }
    }
}

/// Levi-Civita derivative along `dir`: `Γ^z_{zz} = 2∂φ`, `Γ^{z̄}_{z̄z̄} = 2∂̄φ`,
/// mixed symbols vanish.
pub fn covariant_derivative<C: Scalar>(t: &TensorField<C>, dir: Dir, m: &MetricGerm<C>) -> Result<TensorField<C>, CbError> {
    let v = dir.var();
    let mut out = t.component.derive(v);
    let matching = t.indices.iter().filter(|&&d| d == dir).count() as i64;
    if matching > 0 {
        let gamma = m.phi().derive(v).scale(&C::from_i64(2 * matching, &m.field()));
        out = out.sub(&gamma.mul(&t.component)?)?;
    }
    let mut indices = t.indices.clone();
    indices.push(dir);
    Ok(TensorField { indices, component: out })
}

/// Applies covariant derivatives in order.
pub fn covariant_chain<C: Scalar>(t: &TensorField<C>, dirs: &[Dir], m: &MetricGerm<C>) -> Result<TensorField<C>, CbError> {
    let mut cur = t.clone();
    for &d in dirs {
        cur = covariant_derivative(&cur, d, m)?;
    }
    Ok(cur)
}

/// `K_{;z̄z̄}`.
pub fn k_zbzb<C: Scalar>(m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    let k = TensorField::scalar(gauss_curvature(m)?);
    Ok(covariant_chain(&k, &[Dir::Zbar, Dir::Zbar], m)?.component)
}

/// `K_{;z̄z̄zz}`.
pub fn k_zbzbzz<C: Scalar>(m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    m.need(6)?;
    let k = TensorField::scalar(gauss_curvature(m)?);
    Ok(covariant_chain(&k, &[Dir::Zbar, Dir::Zbar, Dir::Z, Dir::Z], m)?.component)
}

/// `Δ_g f = 2e^{−2φ}∂∂̄f` on functions.
pub fn laplace_g<C: Scalar>(f: &MultiSeries<C>, m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    Ok(m.exp_factor(-2)?.mul(&ddbar(f))?.scale(&C::from_i64(2, &m.field())))
}

/// `D = Δ_g²K + Δ_g K²`.
pub fn obstruction_density<C: Scalar>(m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    m.need(6)?;
    let k = gauss_curvature(m)?;
    let lk = laplace_g(&k, m)?;
    let llk = laplace_g(&lk, m)?;
    let lk2 = laplace_g(&k.mul(&k)?, m)?;
    Ok(llk.add(&lk2)?)
}

/// Residuals of the obstruction-flat equation and of the two real
/// equations of `K_{;z̄z̄} = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeResiduals<C> {
    /// `Δ(e^{−2φ}Δ(e^{−2φ}Δφ)) − Δ(e^{−4φ}(Δφ)²)`.
    pub flat: MultiSeries<C>,
    /// `K_xx − K_yy − 2φ_x K_x + 2φ_y K_y`.
    pub spherical_xx: MultiSeries<C>,
    /// `K_xy − φ_x K_y − φ_y K_x`.
    pub spherical_xy: MultiSeries<C>,
}

fn euclid_laplace<C: Scalar>(f: &MultiSeries<C>) -> MultiSeries<C> {
    ddbar(f).scale(&C::from_i64(4, &f.field()))
}

fn dx<C: Scalar>(f: &MultiSeries<C>) -> MultiSeries<C> {
    f.derive(Z).add(&f.derive(ZB)).expect("same field")
}

fn dy<C: Scalar>(f: &MultiSeries<C>) -> MultiSeries<C> {
    let i = C::from_gaussian(&GaussianRational::i(), &f.field());
    f.derive(Z).sub(&f.derive(ZB)).expect("same field").scale(&i)
}

/// The flat-equation residual alone.
pub fn flat_residual<C: Scalar>(m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    m.need(6)?;
    let e2 = m.exp_factor(-2)?;
    let e4 = m.exp_factor(-4)?;
    let lphi = euclid_laplace(m.phi());
    let inner = euclid_laplace(&e2.mul(&lphi)?);
    let first = euclid_laplace(&e2.mul(&inner)?);
    let second = euclid_laplace(&e4.mul(&lphi.mul(&lphi)?)?);
    Ok(first.sub(&second)?)
}

/// First spherical residual `K_xx − K_yy − 2φ_x K_x + 2φ_y K_y`.
pub fn spherical_first_residual<C: Scalar>(m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    m.need(4)?;
    let k = gauss_curvature(m)?;
    let (kx, ky) = (dx(&k), dy(&k));
    let (px, py) = (dx(m.phi()), dy(m.phi()));
    let two = C::from_i64(2, &m.field());
    Ok(dx(&kx)
        .sub(&dy(&ky))?
        .sub(&px.mul(&kx)?.scale(&two))?
        .add(&py.mul(&ky)?.scale(&two))?)
}

pub fn pde_residuals<C: Scalar>(m: &MetricGerm<C>) -> Result<PdeResiduals<C>, CbError> {
    let flat = flat_residual(m)?;
    let spherical_xx = spherical_first_residual(m)?;
    let k = gauss_curvature(m)?;
    let (kx, ky) = (dx(&k), dy(&k));
    let (px, py) = (dx(m.phi()), dy(m.phi()));
    let spherical_xy = dy(&kx).sub(&px.mul(&ky)?)?.sub(&py.mul(&kx)?)?;
    Ok(PdeResiduals { flat, spherical_xx, spherical_xy })
}

/// A formal `G` with `∂∂̄G = e^{2φ}`, with no pure-`z` or pure-`z̄` terms.
pub fn potential_from_phi<C: Scalar>(m: &MetricGerm<C>) -> Result<MultiSeries<C>, CbError> {
    let e = m.exp_factor(2)?;
    let field = m.field();
    let terms = e.terms().iter().map(|(mono, c)| {
        let (a, b) = (mono.alpha(1)[0], mono.beta(1)[0]);
        let k = C::from_ratio(1, (a as i64 + 1) * (b as i64 + 1), &field);
        (Monomial::new(&[a + 1], &[b + 1], 0, 0), c.times(&k))
    });
    Ok(MultiSeries::from_terms(2, field, e.valid_weight() + 2, terms)?)
}

// ---------------------------------------------------------------------------
// Real coordinates

fn substitute<C: Scalar>(s: &MultiSeries<C>, zs: &MultiSeries<C>, zbs: &MultiSeries<C>) -> Result<MultiSeries<C>, SeriesError> {
    let mut zp: HashMap<u8, MultiSeries<C>> = HashMap::new();
    let mut zbp: HashMap<u8, MultiSeries<C>> = HashMap::new();
    let mut out = MultiSeries::zero(2, s.field(), s.valid_weight());
    for (m, c) in s.terms() {
        let (a, b) = (m.alpha(1)[0], m.beta(1)[0]);
        if let std::collections::hash_map::Entry::Vacant(e) = zp.entry(a) {
            e.insert(zs.pow(a as u32)?);
        }
        if let std::collections::hash_map::Entry::Vacant(e) = zbp.entry(b) {
            e.insert(zbs.pow(b as u32)?);
        }
        let term = zp[&a].mul(&zbp[&b])?.scale(c);
        out = out.add(&term)?;
    }
    Ok(out.truncate(s.valid_weight()))
}

/// Rewrites a germ in `x, y` (`z = x + iy`); in the result the `z` slot is
/// `x` and the `z̄` slot is `y`.
pub fn to_xy<C: Scalar>(s: &MultiSeries<C>) -> Result<MultiSeries<C>, SeriesError> {
    let f = s.field();
    let i = C::from_gaussian(&GaussianRational::i(), &f);
    let x = MultiSeries::var(2, f, Z, crate::series::UNBOUNDED);
    let y = MultiSeries::var(2, f, ZB, crate::series::UNBOUNDED).scale(&i);
    substitute(s, &x.add(&y)?, &x.sub(&y)?)
}

/// Inverse of [`to_xy`].
pub fn from_xy<C: Scalar>(s: &MultiSeries<C>) -> Result<MultiSeries<C>, SeriesError> {
    let f = s.field();
    let half = C::from_ratio(1, 2, &f);
    let minus_half_i = C::from_gaussian(&GaussianRational::i(), &f).times(&half).negated();
    let z = MultiSeries::var(2, f, Z, crate::series::UNBOUNDED);
    let zb = MultiSeries::var(2, f, ZB, crate::series::UNBOUNDED);
    let x = z.add(&zb)?.scale(&half);
    let y = z.sub(&zb)?.scale(&minus_half_i);
    substitute(s, &x, &y)
}

/// `[y^k] f(x, y)` as a series in `x`, for an `x, y` encoded series.
pub fn y_coefficient<C: Scalar>(xy: &MultiSeries<C>, k: u8) -> UniSeries<C> {
    let field = xy.field();
    let valid = xy.valid_weight() - k as i32;
    let mut out = UniSeries::zero(field, valid);
    let mut coeffs = vec![C::zero(&field); (valid + 1).max(0) as usize];
    for (m, c) in xy.terms() {
        if m.beta(1)[0] == k {
            let a = m.alpha(1)[0] as usize;
            if a < coeffs.len() {
                coeffs[a] = coeffs[a].plus(c);
            }
        }
    }
    if !coeffs.is_empty() {
        out = UniSeries::from_coeffs(field, coeffs, valid);
    }
    out
}

fn xy_term<C: Scalar>(a: usize, k: u8, c: C) -> (Monomial, C) {
    (Monomial::new(&[a as u8], &[k], 0, 0), c)
}

// ---------------------------------------------------------------------------
// Cauchy data and solvers

/// `(∂_y^k φ)|_{y=0}` for `k = 0 … count−1`, each a real series in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData<C> {
    pub germs: Vec<UniSeries<C>>,
}

impl<C: Scalar> CauchyData<C> {
    pub fn new(germs: Vec<UniSeries<C>>) -> Result<Self, CbError> {
        if let Some(k) = germs.iter().position(|g| !g.is_real()) {
            return Err(CbError::Data(format!("germ {k} is not real")));
        }
        Ok(CauchyData { germs })
    }

    pub fn zero(field: CoeffField, count: usize, degree: i32) -> Self {
        CauchyData { germs: (0..count).map(|k| UniSeries::zero(field, degree - k as i32)).collect() }
    }

    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }

    /// Adds `c` to the constant term of germ `k`.
    pub fn bump(&mut self, k: usize, c: &C) {
        let g = &self.germs[k];
        let mut coeffs = g.coeffs().to_vec();
        if coeffs.is_empty() {
            return;
        }
        coeffs[0] = coeffs[0].plus(c);
        self.germs[k] = UniSeries::from_coeffs(g.field(), coeffs, g.valid_order());
    }
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Reads `count` Cauchy germs off a metric germ.
pub fn extract_cauchy_data<C: Scalar>(m: &MetricGerm<C>, count: usize) -> Result<CauchyData<C>, CbError> {
    let xy = to_xy(m.phi())?;
    let field = m.field();
    let germs = (0..count)
        .map(|k| y_coefficient(&xy, k as u8).scale(&C::from_i64(factorial(k), &field)))
        .collect();
    CauchyData::new(germs)
}

/// Solution of a formal solve with its certified residual order.
#[derive(Clone, Debug)]
pub struct CkSolution<C> {
    pub phi: MetricGerm<C>,
    /// The residual vanishes through degree `certified_order − 1`.
    pub certified_order: i32,
    /// Observed vanishing order of the residual.
    pub residual_order: Order,
}

fn seed<C: Scalar>(data: &CauchyData<C>, degree: i32) -> Result<(Vec<UniSeries<C>>, CoeffField), CbError> {
    let field = data.germs.first().map(|g| g.field()).ok_or_else(|| CbError::Data("empty".into()))?;
    let mut parts = Vec::new();
    for (k, g) in data.germs.iter().enumerate() {
        if g.valid_order() < degree - k as i32 {
            return Err(CbError::Data(format!(
                "germ {k} known through x^{} but degree {degree} needs x^{}",
                g.valid_order(),
                degree - k as i32
            )));
        }
        parts.push(g.scale(&C::from_ratio(1, factorial(k), &field)).truncate(degree - k as i32));
    }
    Ok((parts, field))
}

fn assemble<C: Scalar>(parts: &[UniSeries<C>], field: CoeffField, degree: i32) -> Result<MultiSeries<C>, CbError> {
    let mut terms = Vec::new();
    for (k, p) in parts.iter().enumerate() {
        for (a, c) in p.coeffs().iter().enumerate() {
            if !c.is_zero() && (a + k) as i32 <= degree {
                terms.push(xy_term(a, k as u8, c.clone()));
            }
        }
    }
    Ok(from_xy(&MultiSeries::from_terms(2, field, degree, terms)?)?)
}

/// `e^{k φ₀(x)}` as a univariate series, `φ₀ = φ|_{y=0}`.
fn exp_of_trace<C: Scalar>(phi0: &UniSeries<C>, k: i64) -> Result<UniSeries<C>, CbError> {
    Ok(phi0.scale(&C::from_i64(k, &phi0.field())).exp()?)
}

/// Generic order-by-order solve: `order` is the PDE order in `y`,
/// `residual` evaluates the equation, `top(m)` is the constant factor
/// `(m+order)!/m!` times `scale`, multiplied by `e^{weight·φ₀(x)}`.
fn ck_solve<C: Scalar>(
    data: &CauchyData<C>,
    degree: i32,
    order: usize,
    scale: (i64, i64),
    weight: i64,
    residual: impl Fn(&MetricGerm<C>) -> Result<MultiSeries<C>, CbError>,
) -> Result<CkSolution<C>, CbError> {
    if data.len() != order {
        return Err(CbError::Data(format!("expected {order} germs, got {}", data.len())));
    }
    if degree < order as i32 {
        return Err(CbError::Degree { need: order as i32, have: degree });
    }
    let (mut parts, field) = seed(data, degree)?;
    let inv_factor = exp_of_trace(&parts[0], -weight)?;
    for m in 0..=(degree - order as i32) as usize {
        let germ = MetricGerm::new(assemble(&parts, field, degree)?)?;
        let r = to_xy(&residual(&germ)?)?;
        let rm = y_coefficient(&r, m as u8).truncate(degree - order as i32 - m as i32);
        let factor = factorial(m + order) / factorial(m);
        let k = C::from_ratio(-scale.1, scale.0 * factor, &field);
        let next = rm.mul(&inv_factor)?.scale(&k).truncate(degree - order as i32 - m as i32);
        parts.push(next);
    }
    let phi = MetricGerm::new(assemble(&parts, field, degree)?)?;
    let res = residual(&phi)?;
    let residual_order = res.significant_order();
    let certified_order = degree - order as i32 + 1;
    if !residual_order.is_at_least(certified_order as u32) {
        return Err(CbError::Invariant(format!("residual vanishes only to order {residual_order}")));
    }
    Ok(CkSolution { phi, certified_order, residual_order })
}

/// Solves the obstruction-flat equation from six Cauchy germs, to total
/// degree `degree`. The residual vanishes through degree `degree − 6`.
pub fn ck_solve_flat<C: Scalar>(data: &CauchyData<C>, degree: i32) -> Result<CkSolution<C>, CbError> {
    ck_solve(data, degree, 6, (1, 1), -4, flat_residual)
}

/// Same with a right-hand side: `flat_residual(φ) = forcing`.
pub fn ck_solve_flat_forced<C: Scalar>(data: &CauchyData<C>, forcing: &MultiSeries<C>, degree: i32) -> Result<CkSolution<C>, CbError> {
    ck_solve(data, degree, 6, (1, 1), -4, |m| Ok(flat_residual(m)?.sub(forcing)?))
}

/// Solves the first real equation of `K_{;z̄z̄} = 0` from four Cauchy germs.
pub fn ck_solve_spherical_first<C: Scalar>(data: &CauchyData<C>, degree: i32) -> Result<CkSolution<C>, CbError> {
    ck_solve(data, degree, 4, (1, 2), -2, spherical_first_residual)
}

/// Output of [`flat_nonspherical_germ`].
#[derive(Clone, Debug)]
pub struct FlatGermResult<C> {
    pub phi: MetricGerm<C>,
    pub data: CauchyData<C>,
    /// The flat residual vanishes through degree `flat_order − 1`.
    pub flat_order: i32,
    pub flat_residual_order: Order,
    /// Lowest-degree nonzero part of `K_{;z̄z̄}`.
    pub spherical_leading_degree: u32,
    pub spherical_leading: Vec<(Monomial, C)>,
}

/// Obstruction-flat, non-spherical germ: start from the spherical solution
/// with zero data, perturb the fifth `y`-derivative by 1, solve the flat
/// equation, and report the leading part of `K_{;z̄z̄}`.
pub fn flat_nonspherical_germ<C: Scalar>(field: CoeffField, degree: i32) -> Result<FlatGermResult<C>, CbError> {
    if degree < 8 {
        return Err(CbError::Degree { need: 8, have: degree });
    }
    let base = ck_solve_spherical_first(&CauchyData::zero(field, 4, degree), degree)?;
    let mut data = extract_cauchy_data(&base.phi, 6)?;
    data.bump(5, &C::one(&field));
    let sol = ck_solve_flat(&data, degree)?;
    let kzz = k_zbzb(&sol.phi)?;
    let (d, lead) = kzz
        .leading_terms()
        .ok_or_else(|| CbError::Invariant("K_{;zbzb} vanishes to truncation".into()))?;
    Ok(FlatGermResult {
        phi: sol.phi,
        data,
        flat_order: sol.certified_order,
        flat_residual_order: sol.residual_order,
        spherical_leading_degree: d,
        spherical_leading: lead,
    })
}

// ---------------------------------------------------------------------------
// JSON

/// `{"valid_order": N, "coeffs": ["0", "1/2", …]}`; coefficients real.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermJson {
    pub valid_order: i32,
    pub coeffs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyDataJson {
    pub germs: Vec<GermJson>,
}

impl<C: Scalar> CauchyData<C> {
    pub fn from_json(doc: &CauchyDataJson, field: CoeffField) -> Result<Self, CbError> {
        let mut germs = Vec::new();
        for g in &doc.germs {
            let coeffs = g.coeffs.iter().map(|s| C::parse(s, "0", &field)).collect::<Result<Vec<_>, _>>()?;
            germs.push(UniSeries::from_coeffs(field, coeffs, g.valid_order));
        }
        CauchyData::new(germs)
    }

    pub fn to_json(&self) -> CauchyDataJson {
        CauchyDataJson {
            germs: self
                .germs
                .iter()
                .map(|g| GermJson { valid_order: g.valid_order(), coeffs: g.coeffs().iter().map(|c| c.to_strings().0).collect() })
                .collect(),
        }
    }
}
