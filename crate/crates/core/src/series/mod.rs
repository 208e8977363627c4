//! Truncated weighted formal power series in `z, z̄, w, w̄`.
//!
//! A [`MultiSeries`] stores a sparse map from [`Monomial`] to coefficient
//! together with `valid_weight`: every term of weight at most
//! `valid_weight` is correct, nothing above it is known. Products certify
//! `min(Na + ord b, Nb + ord a)` where `ord` is the lowest weight that can
//! be nonzero, so that factors vanishing to high weight do not throw away
//! precision. Derivatives lose the weight of the variable.

mod json;
mod monomial;
mod scalar;
mod univariate;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

pub use json::{SeriesJson, TermJson};
pub use monomial::{Monomial, Var, MAX_N};
pub use scalar::{binomial_rational, CoeffField, ComplexFloat, GaussianRational, Scalar, MIN_FLOAT_BITS};
pub use univariate::{Order, UniSeries};

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("coefficient field mismatch: {0} vs {1}")]
    FieldMismatch(CoeffField, CoeffField),
    #[error("unsupported ambient dimension {0} (need 1 <= n <= {MAX_N})")]
    Dimension(usize),
    #[error("series is not a unit: constant term is {0}")]
    NotUnit(String),
    #[error("float precision {0} bits is below the 53-bit minimum")]
    Precision(usize),
    #[error("exponential of a nonzero constant is not representable in the exact field")]
    Transcendental,
    #[error("parse error: {0}")]
    Parse(String),
}

/// A real line through the origin along which a series can be restricted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// `w = w̄ = t`.
    U,
    /// `w = it, w̄ = −it`.
    V,
    /// `z_j = z̄_j = t`.
    X(usize),
    /// `z_j = it, z̄_j = −it`.
    Y(usize),
}

impl Axis {
    /// Weight carried by one power of `t`.
    pub fn weight_per_power(self) -> i32 {
        match self {
            Axis::U | Axis::V => 2,
            Axis::X(_) | Axis::Y(_) => 1,
        }
    }
}

/// Products with fewer term pairs than this run on the calling thread.
const PARALLEL_PAIRS: usize = 1 << 16;
const CHUNK: usize = 32;

/// Certificate used for exact polynomials: larger than any weight a
/// monomial key can hold.
pub const UNBOUNDED: i32 = i32::MAX / 4;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiSeries<C> {
    n: usize,
    field: CoeffField,
    terms: BTreeMap<Monomial, C>,
    valid_weight: i32,
}

pub type ExactSeries = MultiSeries<GaussianRational>;

impl<C: Scalar> MultiSeries<C> {
    pub fn zero(n: usize, field: CoeffField, valid_weight: i32) -> Self {
        assert!((1..=MAX_N).contains(&n), "dimension {n} out of range");
        MultiSeries { n, field, terms: BTreeMap::new(), valid_weight }
    }

    pub fn constant(n: usize, field: CoeffField, c: C, valid_weight: i32) -> Self {
        let mut s = Self::zero(n, field, valid_weight);
        s.insert(Monomial::ONE, c);
        s
    }

    pub fn one(n: usize, field: CoeffField, valid_weight: i32) -> Self {
        Self::constant(n, field, C::one(&field), valid_weight)
    }

    /// The single variable `v`.
    pub fn var(n: usize, field: CoeffField, v: Var, valid_weight: i32) -> Self {
        let mut s = Self::zero(n, field, valid_weight);
        s.insert(Monomial::var(v), C::one(&field));
        s
    }

    /// Builds a series from `(monomial, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(n: usize, field: CoeffField, valid_weight: i32, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        if !(1..=MAX_N).contains(&n) {
            return Err(SeriesError::Dimension(n));
        }
        let mut s = Self::zero(n, field, valid_weight);
        for (m, c) in terms {
            if !m.fits(n - 1) {
                return Err(SeriesError::Parse(format!("monomial {m} uses variables beyond n = {n}")));
            }
            if c.field() != field {
                return Err(SeriesError::FieldMismatch(field, c.field()));
            }
            s.accumulate(m, &c);
        }
        Ok(s)
    }

    /// `u = (w + w̄)/2`.
    pub fn u(n: usize, field: CoeffField, valid_weight: i32) -> Self {
        let half = C::from_ratio(1, 2, &field);
        let mut s = Self::zero(n, field, valid_weight);
        s.insert(Monomial::var(Var::W), half.clone());
        s.insert(Monomial::var(Var::Wbar), half);
        s
    }

    /// `v = (w − w̄)/(2i)`.
    pub fn v(n: usize, field: CoeffField, valid_weight: i32) -> Self {
        let c = C::from_gaussian(&GaussianRational::new(BigRational::from_integer(0.into()), BigRational::new((-1).into(), 2.into())), &field);
        let mut s = Self::zero(n, field, valid_weight);
        s.insert(Monomial::var(Var::W), c.clone());
        s.insert(Monomial::var(Var::Wbar), c.negated());
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `z` variables, `n − 1`.
    pub fn nz(&self) -> usize {
        self.n - 1
    }

    pub fn field(&self) -> CoeffField {
        self.field
    }

    pub fn valid_weight(&self) -> i32 {
        self.valid_weight
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(|| C::zero(&self.field))
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::ONE)
    }

    /// Lowest weight at which the true series can be nonzero.
    pub fn order(&self) -> i32 {
        let known = self.terms.keys().next().map(|m| m.weight() as i32);
        let unknown = self.valid_weight + 1;
        known.map_or(unknown, |k| k.min(unknown))
    }

    /// Largest stored weight, `None` for the zero series.
    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::weight)
    }

    fn insert(&mut self, m: Monomial, c: C) {
        if (m.weight() as i32) <= self.valid_weight && !c.is_zero() {
            self.terms.insert(m, c);
        }
    }

    fn accumulate(&mut self, m: Monomial, c: &C) {
        if (m.weight() as i32) > self.valid_weight {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                let s = slot.plus(c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *slot = s;
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(m, c.clone());
                }
            }
        }
    }

    fn check(&self, o: &Self) -> Result<(), SeriesError> {
        if self.n != o.n {
            return Err(SeriesError::DimensionMismatch(self.n, o.n));
        }
        if self.field != o.field {
            return Err(SeriesError::FieldMismatch(self.field, o.field));
        }
        Ok(())
    }

    /// Drops everything above weight `valid_weight` (never raises it).
    pub fn truncate(&self, valid_weight: i32) -> Self {
        let v = valid_weight.min(self.valid_weight);
        let mut s = Self::zero(self.n, self.field, v);
        if v >= 0 {
            let cut = Monomial::weight_floor(v as u32 + 1);
            s.terms = self.terms.range(..cut).map(|(m, c)| (*m, c.clone())).collect();
        }
        s
    }

    /// Same terms with a new certificate; the caller vouches for it.
    pub fn with_valid_weight(mut self, valid_weight: i32) -> Self {
        self.valid_weight = valid_weight;
        if valid_weight >= 0 {
            let cut = Monomial::weight_floor(valid_weight as u32 + 1);
            self.terms.split_off(&cut);
        } else {
            self.terms.clear();
        }
        self
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        self.check(o)?;
        let mut r = self.truncate(o.valid_weight);
        for (m, c) in &o.terms {
            r.accumulate(*m, c);
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.negated())
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero(self.n, self.field, self.valid_weight);
        }
        self.map_coeffs(|c| c.times(k))
    }

    fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let d = f(c);
                (!d.is_zero()).then_some((*m, d))
            })
            .collect();
        MultiSeries { n: self.n, field: self.field, terms, valid_weight: self.valid_weight }
    }

    /// Adds a constant.
    pub fn add_constant(&self, c: &C) -> Self {
        let mut r = self.clone();
        r.accumulate(Monomial::ONE, c);
        r
    }

    /// Truncated product.
    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        self.check(o)?;
        let valid = (self.valid_weight as i64 + o.order() as i64)
            .min(o.valid_weight as i64 + self.order() as i64)
            .min(UNBOUNDED as i64) as i32;
        let mut r = Self::zero(self.n, self.field, valid);
        if valid < 0 || self.terms.is_empty() || o.terms.is_empty() {
            return Ok(r);
        }
        let left: Vec<(&Monomial, &C)> = self.terms.iter().collect();
        let right: Vec<(&Monomial, &C)> = o.terms.iter().collect();
        let partial = |chunk: &[(&Monomial, &C)]| {
            let mut acc: HashMap<Monomial, C> = HashMap::new();
            for (ma, ca) in chunk {
                let wa = ma.weight() as i32;
                for (mb, cb) in &right {
                    if wa + mb.weight() as i32 > valid {
                        break;
                    }
                    let m = ma.times(mb);
                    let p = ca.times(cb);
                    match acc.get_mut(&m) {
                        Some(slot) => *slot = slot.plus(&p),
                        None => {
                            acc.insert(m, p);
                        }
                    }
                }
            }
            acc
        };
        // Fixed chunking keeps the summation order independent of the
        // number of worker threads.
        let parts: Vec<HashMap<Monomial, C>> = if left.len() * right.len() >= PARALLEL_PAIRS {
            left.par_chunks(CHUNK).map(partial).collect()
        } else {
            left.chunks(CHUNK).map(partial).collect()
        };
        let mut merged: BTreeMap<Monomial, C> = BTreeMap::new();
        for part in parts {
            for (m, c) in part {
                match merged.get_mut(&m) {
                    Some(slot) => *slot = slot.plus(&c),
                    None => {
                        merged.insert(m, c);
                    }
                }
            }
        }
        merged.retain(|_, c| !c.is_zero());
        r.terms = merged;
        Ok(r)
    }

    pub fn pow(&self, k: u32) -> Result<Self, SeriesError> {
        let mut acc = Self::one(self.n, self.field, UNBOUNDED);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Formal partial derivative in `v`.
    pub fn derive(&self, v: Var) -> Self {
        if let Var::Z(j) | Var::Zbar(j) = v {
            assert!(j < self.nz(), "variable index {j} out of range for n = {}", self.n);
        }
        let mut r = Self::zero(self.n, self.field, self.valid_weight - v.weight() as i32);
        for (m, c) in &self.terms {
            if let Some((e, lowered)) = m.lower(v) {
                r.accumulate(lowered, &c.times(&C::from_i64(e as i64, &self.field)));
            }
        }
        r
    }

    /// `self^r` for a unit whose constant term is exactly 1, via the
    /// truncated binomial series.
    pub fn unit_power(&self, r: &BigRational) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        if !c0.is_one() {
            return Err(SeriesError::NotUnit(c0.to_string()));
        }
        let s = self.add_constant(&C::one(&self.field).negated());
        let n_valid = self.valid_weight;
        let step = s.order().max(1);
        let mut acc = Self::one(self.n, self.field, n_valid);
        let mut power = Self::one(self.n, self.field, n_valid);
        let mut k = 1u32;
        while (k as i32) * step <= n_valid {
            power = power.mul(&s)?.truncate(n_valid);
            let b = binomial_rational(r, k);
            acc = acc.add(&power.scale(&C::from_gaussian(&GaussianRational::real(b), &self.field)))?;
            k += 1;
        }
        Ok(acc.with_valid_weight(n_valid))
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        let inv0 = C::one(&self.field).over(&c0).ok_or_else(|| SeriesError::NotUnit(c0.to_string()))?;
        let normalized = self.scale(&inv0);
        let minus_one = BigRational::from_integer(BigInt::from(-1));
        Ok(normalized.unit_power(&minus_one)?.scale(&inv0))
    }

    /// `self / b` for a unit `b`.
    pub fn unit_divide(&self, b: &Self) -> Result<Self, SeriesError> {
        self.check(b)?;
        self.mul(&b.inverse()?)
    }

    /// `exp(self)`. In the exact field the constant term must vanish.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        let e0 = c0.exp().ok_or(SeriesError::Transcendental)?;
        let s = self.add_constant(&c0.negated());
        let n_valid = self.valid_weight;
        let step = s.order().max(1);
        let mut acc = Self::one(self.n, self.field, n_valid);
        let mut term = Self::one(self.n, self.field, n_valid);
        let mut k = 1i64;
        while (k as i32) * step <= n_valid {
            term = term.mul(&s)?.truncate(n_valid).scale(&C::from_ratio(1, k, &self.field));
            acc = acc.add(&term)?;
            k += 1;
        }
        Ok(acc.with_valid_weight(n_valid).scale(&e0))
    }

    /// Complex conjugate: exponents swap and coefficients conjugate.
    pub fn conj(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.conj(), c.conj())).collect();
        MultiSeries { n: self.n, field: self.field, terms, valid_weight: self.valid_weight }
    }

    /// Conjugate symmetry `coeff(α,β,p,q) = conj(coeff(β,α,q,p))`, up to
    /// rounding for float coefficients.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(m, c)| match self.terms.get(&m.conj()) {
            Some(d) => d.minus(&c.conj()).is_negligible(),
            None => c.is_negligible(),
        })
    }

    /// The real part `(self + conj self)/2`.
    pub fn real_part(&self) -> Self {
        let half = C::from_ratio(1, 2, &self.field);
        self.add(&self.conj()).expect("same shape").scale(&half)
    }

    /// Substitutes the line `axis` parametrized by `t`.
    pub fn restrict_to_curve(&self, axis: Axis) -> UniSeries<C> {
        let per = axis.weight_per_power();
        let valid = if self.valid_weight < 0 { -1 } else { self.valid_weight / per };
        let mut out = UniSeries::zero(self.field, valid);
        let i = C::from_gaussian(&GaussianRational::i(), &self.field);
        let mi = i.negated();
        let nz = self.nz();
        for (m, c) in &self.terms {
            let (a, b) = match axis {
                Axis::U | Axis::V => {
                    if m.z_degree() != 0 {
                        continue;
                    }
                    (m.p(), m.q())
                }
                Axis::X(j) | Axis::Y(j) => {
                    if m.p() != 0 || m.q() != 0 {
                        continue;
                    }
                    let others = (0..nz).filter(|&k| k != j).any(|k| m.alpha(nz)[k] != 0 || m.beta(nz)[k] != 0);
                    if others {
                        continue;
                    }
                    (m.alpha(nz)[j], m.beta(nz)[j])
                }
            };
            let mut coeff = c.clone();
            if matches!(axis, Axis::V | Axis::Y(_)) {
                for _ in 0..a {
                    coeff = coeff.times(&i);
                }
                for _ in 0..b {
                    coeff = coeff.times(&mi);
                }
            }
            out.add_to((a + b) as usize, &coeff);
        }
        out
    }

    /// Evaluates the stored polynomial at independent values of every
    /// variable (`zbar` need not be the conjugate of `z`).
    pub fn eval_independent(&self, z: &[Complex64], zbar: &[Complex64], w: Complex64, wbar: Complex64) -> Complex64 {
        let nz = self.nz();
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_c64();
            for j in 0..nz {
                t *= z[j].powu(m.alpha(nz)[j] as u32) * zbar[j].powu(m.beta(nz)[j] as u32);
            }
            t *= w.powu(m.p() as u32) * wbar.powu(m.q() as u32);
            total += t;
        }
        total
    }

    /// Evaluates at a point of `C^n`, with barred variables set to the
    /// conjugates.
    pub fn eval(&self, z: &[Complex64], w: Complex64) -> Complex64 {
        let zbar: Vec<Complex64> = z.iter().map(|x| x.conj()).collect();
        self.eval_independent(z, &zbar, w, w.conj())
    }

    /// Re-expands the stored polynomial around `(z0, w0)`, i.e. returns
    /// `P(z + z0, w + w0)` truncated at `valid_weight`. The stored terms are
    /// taken as an exact polynomial.
    pub fn recenter(&self, z0: &[C], w0: &C, valid_weight: i32) -> Result<Self, SeriesError> {
        let nz = self.nz();
        if z0.len() != nz {
            return Err(SeriesError::DimensionMismatch(nz + 1, z0.len() + 1));
        }
        let mut shifted: Vec<(Var, C)> = Vec::with_capacity(2 * nz + 2);
        for (j, a) in z0.iter().enumerate() {
            shifted.push((Var::Z(j), a.clone()));
            shifted.push((Var::Zbar(j), a.conj()));
        }
        shifted.push((Var::W, w0.clone()));
        shifted.push((Var::Wbar, w0.conj()));
        // Powers of each shifted variable, computed once.
        let mut cache: HashMap<(Var, u8), Self> = HashMap::new();
        let big = UNBOUNDED;
        let mut out = Self::zero(self.n, self.field, valid_weight);
        for (m, c) in &self.terms {
            let mut prod = Self::constant(self.n, self.field, c.clone(), big);
            for (v, shift) in &shifted {
                let e = m.exponent(*v);
                if e == 0 {
                    continue;
                }
                let factor = cache.entry((*v, e)).or_insert_with(|| {
                    let lin = Self::var(self.n, self.field, *v, big).add_constant(shift);
                    lin.pow(e as u32).expect("same shape")
                });
                prod = prod.mul(factor)?.truncate(big);
            }
            for (mm, cc) in prod.terms {
                out.accumulate(mm, &cc);
            }
        }
        Ok(out)
    }

    /// Same polynomial with coefficients mapped into another field.
    pub fn convert<D: Scalar>(&self, field: CoeffField, f: impl Fn(&C) -> D) -> MultiSeries<D> {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let d = f(c);
                (!d.is_zero()).then_some((*m, d))
            })
            .collect();
        MultiSeries { n: self.n, field, terms, valid_weight: self.valid_weight }
    }

    /// Terms of weight exactly `k`.
    pub fn homogeneous_part(&self, k: u32) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.range(Monomial::weight_floor(k)..Monomial::weight_floor(k + 1))
    }

    /// Lowest-weight nonzero terms, or `None` when every certified weight
    /// vanishes.
    pub fn leading_terms(&self) -> Option<(u32, Vec<(Monomial, C)>)> {
        let k = self.terms.keys().next()?.weight();
        Some((k, self.homogeneous_part(k).map(|(m, c)| (*m, c.clone())).collect()))
    }

    /// Certified vanishing order in weight.
    pub fn weight_order(&self) -> Order {
        match self.terms.keys().next() {
            Some(m) => Order::Exact(m.weight()),
            None => Order::AtLeast((self.valid_weight + 1).max(0) as u32),
        }
    }

    /// Like [`weight_order`](Self::weight_order), skipping coefficients
    /// that are zero up to rounding.
    pub fn significant_order(&self) -> Order {
        match self.terms.iter().find(|(_, c)| !c.is_negligible()) {
            Some((m, _)) => Order::Exact(m.weight()),
            None => Order::AtLeast((self.valid_weight + 1).max(0) as u32),
        }
    }
}

impl MultiSeries<GaussianRational> {
    /// Rounds every coefficient into the float backend.
    pub fn to_float(&self, bits: usize) -> Result<MultiSeries<ComplexFloat>, SeriesError> {
        let field = CoeffField::float(bits)?;
        Ok(self.convert(field, |c| ComplexFloat::from_gaussian(c, &field)))
    }
}
