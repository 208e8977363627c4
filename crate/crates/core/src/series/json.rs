//! JSON form of a series:
//! `{"n", "valid_weight", "terms": [{"alpha", "beta", "p", "q", "re", "im"}]}`
//! with an optional `"precision"` (bits) marking float coefficients.

use serde::{Deserialize, Serialize};

use super::{CoeffField, Monomial, MultiSeries, Scalar, SeriesError, MAX_N};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u8>,
    pub beta: Vec<u8>,
    pub p: u8,
    pub q: u8,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub n: usize,
    pub valid_weight: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    pub terms: Vec<TermJson>,
}

impl SeriesJson {
    /// Field implied by the document: float iff `precision` is present.
    pub fn field(&self) -> Result<CoeffField, SeriesError> {
        match self.precision {
            Some(bits) => CoeffField::float(bits),
            None => Ok(CoeffField::ExactGaussianRational),
        }
    }
}

impl<C: Scalar> MultiSeries<C> {
    pub fn to_json(&self) -> SeriesJson {
        let nz = self.nz();
        let terms = self
            .terms()
            .iter()
            .map(|(m, c)| {
                let (re, im) = c.to_strings();
                TermJson { alpha: m.alpha(nz).to_vec(), beta: m.beta(nz).to_vec(), p: m.p(), q: m.q(), re, im }
            })
            .collect();
        let precision = match self.field() {
            CoeffField::ComplexFloat { bits } => Some(bits),
            CoeffField::ExactGaussianRational => None,
        };
        SeriesJson { n: self.n(), valid_weight: self.valid_weight(), precision, terms }
    }

    /// Reads a document into the given field (coefficients are parsed at
    /// that field's precision).
    pub fn from_json(doc: &SeriesJson, field: CoeffField) -> Result<Self, SeriesError> {
        if !(1..=MAX_N).contains(&doc.n) {
            return Err(SeriesError::Dimension(doc.n));
        }
        let nz = doc.n - 1;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in &doc.terms {
            if t.alpha.len() != nz || t.beta.len() != nz {
                return Err(SeriesError::Parse(format!(
                    "term multi-indices must have length {nz}, got {} and {}",
                    t.alpha.len(),
                    t.beta.len()
                )));
            }
            let m = Monomial::new(&t.alpha, &t.beta, t.p, t.q);
            terms.push((m, C::parse(&t.re, &t.im, &field)?));
        }
        MultiSeries::from_terms(doc.n, field, doc.valid_weight, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{GaussianRational, Var};

    #[test]
    fn exact_document_roundtrip() {
        let f = CoeffField::ExactGaussianRational;
        let s = MultiSeries::var(3, f, Var::Z(1), 6)
            .mul(&MultiSeries::var(3, f, Var::W, 6))
            .unwrap()
            .scale(&GaussianRational::from_ratio(-3, 7));
        let doc = s.to_json();
        assert_eq!(doc.terms[0].re, "-3/7");
        assert_eq!(doc.terms[0].alpha, vec![0, 1]);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SeriesJson = serde_json::from_str(&text).unwrap();
        assert_eq!(MultiSeries::<GaussianRational>::from_json(&back, f).unwrap(), s);
    }

    #[test]
    fn rejects_wrong_index_length() {
        let doc = SeriesJson {
            n: 2,
            valid_weight: 4,
            precision: None,
            terms: vec![TermJson { alpha: vec![1, 0], beta: vec![0], p: 0, q: 0, re: "1".into(), im: "0".into() }],
        };
        assert!(MultiSeries::<GaussianRational>::from_json(&doc, CoeffField::ExactGaussianRational).is_err());
    }
}
