//! Coefficient fields for truncated series.
//!
//! Two backends are provided: exact Gaussian rationals and complex binary
//! floats of configurable precision. Generic code is written against
//! [`Scalar`]; the active field travels with every series as a
//! [`CoeffField`] tag so that zero and one can be materialized at the
//! correct precision.

use std::fmt;
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::SeriesError;

/// Smallest float precision accepted by the float backend.
pub const MIN_FLOAT_BITS: usize = 53;

/// Which coefficient field a series lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoeffField {
    ExactGaussianRational,
    ComplexFloat { bits: usize },
}

impl CoeffField {
    pub fn float(bits: usize) -> Result<Self, SeriesError> {
        if bits < MIN_FLOAT_BITS {
            return Err(SeriesError::Precision(bits));
        }
        Ok(CoeffField::ComplexFloat { bits })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CoeffField::ExactGaussianRational)
    }
}

impl fmt::Display for CoeffField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffField::ExactGaussianRational => write!(f, "exact"),
            CoeffField::ComplexFloat { bits } => write!(f, "float{bits}"),
        }
    }
}

/// Arithmetic required of a series coefficient.
///
/// Method names avoid the `std::ops` vocabulary so that concrete types can
/// still implement the operator traits without ambiguity.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero(field: &CoeffField) -> Self;
    fn from_gaussian(q: &GaussianRational, field: &CoeffField) -> Self;
    fn field(&self) -> CoeffField;

    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    /// `None` when dividing by zero.
    fn over(&self, other: &Self) -> Option<Self>;
    fn negated(&self) -> Self;
    fn conj(&self) -> Self;

    /// `exp(self)`, or `None` when the field cannot represent it
    /// (exact backend with a nonzero argument).
    fn exp(&self) -> Option<Self>;

    fn to_c64(&self) -> Complex64;

    /// `(re, im)` as decimal strings: `"p/q"` for exact, scientific decimal
    /// for float.
    fn to_strings(&self) -> (String, String);
    fn parse(re: &str, im: &str, field: &CoeffField) -> Result<Self, SeriesError>;

    fn one(field: &CoeffField) -> Self {
        Self::from_gaussian(&GaussianRational::one(), field)
    }

    fn from_i64(k: i64, field: &CoeffField) -> Self {
        Self::from_gaussian(&GaussianRational::from_integer(k), field)
    }

    fn from_ratio(num: i64, den: i64, field: &CoeffField) -> Self {
        Self::from_gaussian(&GaussianRational::from_ratio(num, den), field)
    }

    fn is_one(&self) -> bool {
        self.minus(&Self::one(&self.field())).is_zero()
    }

    /// Zero up to rounding noise. Exact fields use exact comparison; float
    /// fields treat magnitudes below `2^(−3·bits/4)` as zero.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

// ---------------------------------------------------------------------------
// Exact backend

/// `re + i·im` with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussianRational { re, im: BigRational::zero() }
    }

    pub fn zero() -> Self {
        Self::real(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::real(BigRational::one())
    }

    pub fn i() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_integer(k: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Norm `re² + im²`.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = GaussianRational::one();
        for _ in 0..k {
            acc = acc.times(self);
        }
        acc
    }
}

fn parse_rational(s: &str) -> Result<BigRational, SeriesError> {
    let t = s.trim();
    BigRational::from_str(t).map_err(|_| SeriesError::Parse(format!("not a rational: {s:?}")))
}

fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Very large parts: scale both down through their bit length.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Scalar for GaussianRational {
    fn zero(_field: &CoeffField) -> Self {
        GaussianRational::zero()
    }

    fn from_gaussian(q: &GaussianRational, _field: &CoeffField) -> Self {
        q.clone()
    }

    fn field(&self) -> CoeffField {
        CoeffField::ExactGaussianRational
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn plus(&self, o: &Self) -> Self {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }

    fn minus(&self, o: &Self) -> Self {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }

    fn times(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::real(&self.re * &o.re);
        }
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    fn over(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        if o.im.is_zero() {
            return Some(GaussianRational::new(&self.re / &o.re, &self.im / &o.re));
        }
        let d = o.norm_sqr();
        let num = self.times(&o.conj());
        Some(GaussianRational::new(num.re / &d, num.im / d))
    }

    fn negated(&self) -> Self {
        GaussianRational::new(-&self.re, -&self.im)
    }

    fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -&self.im)
    }

    fn exp(&self) -> Option<Self> {
        if self.is_zero() {
            Some(GaussianRational::one())
        } else {
            None
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn to_strings(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }

    fn parse(re: &str, im: &str, _field: &CoeffField) -> Result<Self, SeriesError> {
        Ok(GaussianRational::new(parse_rational(re)?, parse_rational(im)?))
    }
}

// ---------------------------------------------------------------------------
// Float backend

type Real = FBig<HalfEven, 2>;

/// Complex number with binary floating-point parts at a fixed precision.
#[derive(Clone, Debug)]
pub struct ComplexFloat {
    re: Real,
    im: Real,
    bits: usize,
}

impl PartialEq for ComplexFloat {
    fn eq(&self, o: &Self) -> bool {
        self.re == o.re && self.im == o.im
    }
}

fn real_zero(bits: usize) -> Real {
    Real::ZERO.with_precision(bits).value()
}

fn real_from_bigint(k: &BigInt, bits: usize) -> Real {
    let i = IBig::from_str_radix(&k.to_str_radix(16), 16).expect("hex digits of a BigInt");
    Real::from(i).with_precision(bits).value()
}

fn real_from_rational(q: &BigRational, bits: usize) -> Real {
    real_from_bigint(q.numer(), bits) / real_from_bigint(q.denom(), bits)
}

fn parse_real(s: &str, bits: usize) -> Result<Real, SeriesError> {
    let t = s.trim();
    if t.contains('/') {
        return Ok(real_from_rational(&parse_rational(t)?, bits));
    }
    let d = FBig::<HalfEven, 10>::from_str(t).map_err(|_| SeriesError::Parse(format!("not a decimal: {s:?}")))?;
    Ok(d.with_base_and_precision::<2>(bits).value().with_precision(bits).value())
}

fn real_to_decimal(x: &Real, bits: usize) -> String {
    // Enough decimal digits to round-trip `bits` binary digits.
    let digits = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
    let d: FBig<HalfEven, 10> = x.clone().with_base_and_precision::<10>(digits).value();
    d.to_string()
}

impl ComplexFloat {
    pub fn new_f64(re: f64, im: f64, bits: usize) -> Self {
        let re = Real::try_from(re).expect("finite float").with_precision(bits).value();
        let im = Real::try_from(im).expect("finite float").with_precision(bits).value();
        ComplexFloat { re, im, bits }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn from_parts(re: Real, im: Real, bits: usize) -> Self {
        ComplexFloat { re, im, bits }
    }

    /// `|self|` as an f64, used for relative-error reporting.
    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Relative distance `|self − exact| / |exact|`, evaluated at this
    /// precision before narrowing to f64.
    pub fn relative_error_to(&self, exact: &GaussianRational) -> f64 {
        let e = ComplexFloat::from_gaussian(exact, &self.field());
        let diff = self.minus(&e);
        let num = (&diff.re * &diff.re + &diff.im * &diff.im).to_f64().value().sqrt();
        let den = (&e.re * &e.re + &e.im * &e.im).to_f64().value().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

impl fmt::Display for ComplexFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_strings();
        if self.im.repr().is_zero() {
            write!(f, "{re}")
        } else {
            write!(f, "{re}{}{im}i", if im.starts_with('-') { "" } else { "+" })
        }
    }
}

impl Scalar for ComplexFloat {
    fn zero(field: &CoeffField) -> Self {
        let bits = float_bits(field);
        ComplexFloat::from_parts(real_zero(bits), real_zero(bits), bits)
    }

    fn from_gaussian(q: &GaussianRational, field: &CoeffField) -> Self {
        let bits = float_bits(field);
        ComplexFloat::from_parts(
            real_from_rational(&q.re, bits),
            real_from_rational(&q.im, bits),
            bits,
        )
    }

    fn field(&self) -> CoeffField {
        CoeffField::ComplexFloat { bits: self.bits }
    }

    fn is_zero(&self) -> bool {
        self.re.repr().is_zero() && self.im.repr().is_zero()
    }

    fn is_negligible(&self) -> bool {
        let cutoff = 2f64.powi(-((3 * self.bits / 4).min(1000) as i32));
        let c = self.to_c64();
        c.re.abs() < cutoff && c.im.abs() < cutoff
    }

    fn plus(&self, o: &Self) -> Self {
        ComplexFloat::from_parts(&self.re + &o.re, &self.im + &o.im, self.bits)
    }

    fn minus(&self, o: &Self) -> Self {
        ComplexFloat::from_parts(&self.re - &o.re, &self.im - &o.im, self.bits)
    }

    fn times(&self, o: &Self) -> Self {
        ComplexFloat::from_parts(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
            self.bits,
        )
    }

    fn over(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        let d = &o.re * &o.re + &o.im * &o.im;
        let num = self.times(&o.conj());
        Some(ComplexFloat::from_parts(&num.re / &d, &num.im / &d, self.bits))
    }

    fn negated(&self) -> Self {
        ComplexFloat::from_parts(-self.re.clone(), -self.im.clone(), self.bits)
    }

    fn conj(&self) -> Self {
        ComplexFloat::from_parts(self.re.clone(), -self.im.clone(), self.bits)
    }

    fn exp(&self) -> Option<Self> {
        if !self.im.repr().is_zero() {
            return None;
        }
        Some(ComplexFloat::from_parts(self.re.exp(), real_zero(self.bits), self.bits))
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }

    fn to_strings(&self) -> (String, String) {
        (real_to_decimal(&self.re, self.bits), real_to_decimal(&self.im, self.bits))
    }

    fn parse(re: &str, im: &str, field: &CoeffField) -> Result<Self, SeriesError> {
        let bits = float_bits(field);
        Ok(ComplexFloat::from_parts(parse_real(re, bits)?, parse_real(im, bits)?, bits))
    }
}

fn float_bits(field: &CoeffField) -> usize {
    match field {
        CoeffField::ComplexFloat { bits } => *bits,
        CoeffField::ExactGaussianRational => {
            panic!("float coefficient requested for an exact field")
        }
    }
}

/// Generalized binomial coefficient `r choose k` for rational `r`.
pub fn binomial_rational(r: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * (r - BigRational::from_integer(BigInt::from(i)))
            / BigRational::from_integer(BigInt::from(i + 1));
    }
    acc
}
