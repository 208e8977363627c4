use std::fmt;

use serde::{Deserialize, Serialize};

use super::scalar::{CoeffField, Scalar};
use super::SeriesError;

/// Certified vanishing order of a truncated series.
///
/// `AtLeast(k)` means every coefficient that the truncation can speak for
/// is zero, and the first uncertified one sits at `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Order {
    Exact(u32),
    AtLeast(u32),
}

impl Order {
    /// The largest order the data certifies.
    pub fn lower_bound(&self) -> u32 {
        match *self {
            Order::Exact(k) | Order::AtLeast(k) => k,
        }
    }

    pub fn is_at_least(&self, k: u32) -> bool {
        self.lower_bound() >= k
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact(k) => write!(f, "{k}"),
            Order::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

/// Truncated series in a single variable `t`, known through `t^valid_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniSeries<C> {
    field: CoeffField,
    coeffs: Vec<C>,
    valid_order: i32,
}

impl<C: Scalar> UniSeries<C> {
    pub fn zero(field: CoeffField, valid_order: i32) -> Self {
        let len = (valid_order + 1).max(0) as usize;
        UniSeries { field, coeffs: vec![C::zero(&field); len], valid_order }
    }

    /// Builds from coefficients of `t^0, t^1, …`; entries past
    /// `valid_order` are dropped, missing ones are zero.
    pub fn from_coeffs(field: CoeffField, coeffs: Vec<C>, valid_order: i32) -> Self {
        let mut s = UniSeries::zero(field, valid_order);
        for (k, c) in coeffs.into_iter().enumerate() {
            if k < s.coeffs.len() {
                s.coeffs[k] = c;
            }
        }
        s
    }

    pub fn field(&self) -> CoeffField {
        self.field
    }

    pub fn valid_order(&self) -> i32 {
        self.valid_order
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `t^k`, or `None` beyond the certified range.
    pub fn coeff(&self, k: usize) -> Option<&C> {
        self.coeffs.get(k)
    }

    pub(crate) fn add_to(&mut self, k: usize, c: &C) {
        if let Some(slot) = self.coeffs.get_mut(k) {
            *slot = slot.plus(c);
        }
    }

    /// Lowest power with a nonzero coefficient.
    pub fn vanishing_order(&self) -> Order {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(k) => Order::Exact(k as u32),
            None => Order::AtLeast((self.valid_order + 1).max(0) as u32),
        }
    }

    /// Like [`vanishing_order`](Self::vanishing_order) but skipping
    /// coefficients that are zero up to rounding.
    pub fn significant_order(&self) -> Order {
        match self.coeffs.iter().position(|c| !c.is_negligible()) {
            Some(k) => Order::Exact(k as u32),
            None => Order::AtLeast((self.valid_order + 1).max(0) as u32),
        }
    }

    fn order_bound(&self) -> i32 {
        match self.vanishing_order() {
            Order::Exact(k) | Order::AtLeast(k) => k as i32,
        }
    }

    pub fn truncate(&self, valid_order: i32) -> Self {
        let v = valid_order.min(self.valid_order);
        UniSeries::from_coeffs(self.field, self.coeffs.clone(), v)
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        check_field(self.field, o.field)?;
        let v = self.valid_order.min(o.valid_order);
        let mut r = self.truncate(v);
        for (k, c) in o.coeffs.iter().enumerate() {
            r.add_to(k, c);
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        UniSeries {
            field: self.field,
            coeffs: self.coeffs.iter().map(Scalar::negated).collect(),
            valid_order: self.valid_order,
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        UniSeries {
            field: self.field,
            coeffs: self.coeffs.iter().map(|x| x.times(c)).collect(),
            valid_order: self.valid_order,
        }
    }

    /// Truncated product; the certified order uses the vanishing orders of
    /// both factors.
    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        check_field(self.field, o.field)?;
        let v = (self.valid_order + o.order_bound()).min(o.valid_order + self.order_bound());
        let mut r = UniSeries::zero(self.field, v);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j > v.max(-1) as usize {
                    break;
                }
                if !b.is_zero() {
                    r.add_to(i + j, &a.times(b));
                }
            }
        }
        Ok(r)
    }

    /// `exp(self)`; the constant term must be exponentiable in the field.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        let c0 = self.coeffs.first().cloned().unwrap_or_else(|| C::zero(&self.field));
        let e0 = c0.exp().ok_or(SeriesError::Transcendental)?;
        let mut s = self.clone();
        if let Some(first) = s.coeffs.first_mut() {
            *first = C::zero(&self.field);
        }
        let mut acc = UniSeries::from_coeffs(self.field, vec![C::one(&self.field)], self.valid_order);
        let mut term = acc.clone();
        for k in 1..=self.valid_order.max(0) {
            term = term.mul(&s)?.scale(&C::from_ratio(1, k as i64, &self.field));
            term = term.truncate(self.valid_order);
            acc = acc.add(&term)?;
        }
        Ok(acc.scale(&e0))
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.minus(&c.conj()).is_negligible())
    }
}

fn check_field(a: CoeffField, b: CoeffField) -> Result<(), SeriesError> {
    if a != b {
        return Err(SeriesError::FieldMismatch(a, b));
    }
    Ok(())
}
