//! The complex Monge–Ampère operator
//!
//! ```text
//! J(u) = (−1)^n det [[u, u_{z̄_k}], [u_{z_j}, u_{z_j z̄_k}]]
//! ```
//!
//! (indices over `z_1 … z_{n−1}, w`), Fefferman's recursion producing a
//! defining function with `J(ρ) = 1 + O(ρ^{n+1})`, and extraction of the
//! obstruction function at a point from the `t^{n+1}` coefficient of
//! `J(ρ) − 1` along a transversal line:
//!
//! ```text
//! J(ρ) = 1 + (n+2) O ρ^{n+1} + O(ρ^{n+2}),   ρ∘γ(t) = c₁ t + O(t²)
//!   ⇒  O(0) = [t^{n+1}](J(ρ)∘γ − 1) / ((n+2) c₁^{n+1}).
//! ```
//!
//! The recursion needs `J(ψ)^{−1/(n+1)}`. When the constant term `J₀` of
//! `J(ψ)` is not 1 the chain is carried in normalized form `ψ̃_p` with
//! `ψ_p = λ ψ̃_p`, `λ^{n+1} = 1/J₀`; by homogeneity of `J`,
//! `J(ψ_p) = J(ψ̃_p)/J₀`, so the whole computation stays in the
//! coefficient field.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::series::{Axis, MultiSeries, Order, Scalar, SeriesError, UniSeries, Var, UNBOUNDED};

#[derive(Debug, Error)]
pub enum MaError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("not a defining series: {0}")]
    NotDefining(String),
    #[error("J(psi) has zero constant term; the recursion cannot be normalized")]
    DegenerateJ,
    #[error("truncation weight too small: need {need}, have {have}")]
    WeightTooSmall { need: i32, have: i32 },
    #[error("the {0:?} axis is not transversal (zero linear coefficient)")]
    NonTransversal(Axis),
    #[error("no coordinate axis is transversal at the point")]
    NoTransversalAxis,
    #[error("recentering needs an exact polynomial input")]
    NonPolynomial,
    #[error("the point is not on the hypersurface (psi(p) = {0})")]
    NotOnSurface(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Default truncation weight for obstruction extraction, `2n + 6`.
pub fn default_weight(n: usize) -> i32 {
    2 * n as i32 + 6
}

/// Smallest weight that certifies the obstruction at the origin, `2n + 4`.
pub fn minimal_weight(n: usize) -> i32 {
    2 * n as i32 + 4
}

/// Default truncation after recentering at a generic point, `4n + 12`.
/// Weight-one linear terms appear there, so every derivative in `J` costs
/// more certified weight than at a normalized origin.
pub fn default_point_weight(n: usize) -> i32 {
    4 * n as i32 + 12
}

/// A real defining series `ρ` with `ρ(0) = 0` and `∂ρ/∂w (0) ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DefiningSeries<C> {
    rho: MultiSeries<C>,
    polynomial: bool,
}

impl<C: Scalar> DefiningSeries<C> {
    pub fn new(rho: MultiSeries<C>) -> Result<Self, MaError> {
        if !rho.constant_term().is_negligible() {
            return Err(MaError::NotDefining(format!("rho(0) = {}", rho.constant_term())));
        }
        if rho.coeff(&crate::series::Monomial::var(Var::W)).is_negligible() {
            return Err(MaError::NotDefining("coefficient of w vanishes".into()));
        }
        if !rho.is_real() {
            return Err(MaError::NotDefining("series is not real".into()));
        }
        Ok(DefiningSeries { rho, polynomial: false })
    }

    /// Marks the stored terms as an exact polynomial, which allows
    /// recentering at other points.
    pub fn polynomial(rho: MultiSeries<C>) -> Result<Self, MaError> {
        let mut d = Self::new(rho)?;
        d.polynomial = true;
        Ok(d)
    }

    pub fn series(&self) -> &MultiSeries<C> {
        &self.rho
    }

    pub fn into_series(self) -> MultiSeries<C> {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.rho.n()
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    pub fn valid_weight(&self) -> i32 {
        self.rho.valid_weight()
    }

    /// Multiplies by a constant (keeps the polynomial marker).
    pub fn scaled(&self, c: &C) -> Result<Self, MaError> {
        let mut d = Self::new(self.rho.scale(c))?;
        d.polynomial = self.polynomial;
        Ok(d)
    }

    /// Truncates to a lower weight; the result is no longer an exact
    /// polynomial unless nothing was dropped.
    pub fn truncated(&self, weight: i32) -> Self {
        let rho = self.rho.truncate(weight);
        let polynomial = self.polynomial && rho.len() == self.rho.len();
        DefiningSeries { rho, polynomial }
    }
}

/// `(−1)^n` times the determinant of the bordered complex Hessian.
pub fn j_operator<C: Scalar>(u: &MultiSeries<C>) -> Result<MultiSeries<C>, SeriesError> {
    let n = u.n();
    let nz = n - 1;
    // Row/column 0 is u itself, 1..=nz the z_j, n the w direction.
    let holo = |i: usize| if i == nz + 1 { Var::W } else { Var::Z(i - 1) };
    let first: Vec<MultiSeries<C>> = (0..=n)
        .map(|i| if i == 0 { u.clone() } else { u.derive(holo(i)) })
        .collect();
    let mut matrix: Vec<Vec<MultiSeries<C>>> = Vec::with_capacity(n + 1);
    for row_base in &first {
        let row = (0..=n)
            .map(|k| if k == 0 { row_base.clone() } else { row_base.derive(holo(k).conj()) })
            .collect();
        matrix.push(row);
    }
    let det = determinant(&matrix)?;
    Ok(if n % 2 == 1 { det.neg() } else { det })
}

/// Laplace expansion along rows with memoized minors, keyed by the set of
/// remaining columns.
fn determinant<C: Scalar>(m: &[Vec<MultiSeries<C>>]) -> Result<MultiSeries<C>, SeriesError> {
    let size = m.len();
    let mut memo: HashMap<u32, MultiSeries<C>> = HashMap::new();
    minor(m, 0, (1u32 << size) - 1, &mut memo)
}

fn minor<C: Scalar>(
    m: &[Vec<MultiSeries<C>>],
    row: usize,
    cols: u32,
    memo: &mut HashMap<u32, MultiSeries<C>>,
) -> Result<MultiSeries<C>, SeriesError> {
    if let Some(v) = memo.get(&cols) {
        return Ok(v.clone());
    }
    let size = m.len();
    if row == size - 1 {
        let c = cols.trailing_zeros() as usize;
        return Ok(m[row][c].clone());
    }
    let mut acc: Option<MultiSeries<C>> = None;
    let mut position = 0;
    for c in 0..size {
        if cols & (1 << c) == 0 {
            continue;
        }
        let entry = &m[row][c];
        // An exactly-zero entry contributes nothing, not even a truncation bound.
        if !entry.is_empty() || entry.valid_weight() < UNBOUNDED {
            let sub = minor(m, row + 1, cols & !(1 << c), memo)?;
            let mut term = entry.mul(&sub)?;
            if position % 2 == 1 {
                term = term.neg();
            }
            acc = Some(match acc {
                Some(a) => a.add(&term)?,
                None => term,
            });
        }
        position += 1;
    }
    let out = acc.unwrap_or_else(|| MultiSeries::zero(m[0][0].n(), m[0][0].field(), UNBOUNDED));
    memo.insert(cols, out.clone());
    Ok(out)
}

/// Output of [`fefferman_recursion`].
#[derive(Clone, Debug)]
pub struct FeffermanChain<C> {
    /// Constant term `J₀` of `J(ψ)`; the true `ψ_p` are `J₀^{−1/(n+1)} ψ̃_p`.
    pub normalizer: C,
    /// Normalized iterates `ψ̃_1 … ψ̃_{n+1}`.
    pub psis: Vec<MultiSeries<C>>,
    /// `J(ψ_p)` for `p = 1 … n+1` (already divided by `J₀`).
    pub js: Vec<MultiSeries<C>>,
    /// Vanishing order of `J(ψ_p) − 1` along `axis`.
    pub residual_orders: Vec<Order>,
    /// Whether the truncation reaches far enough to certify order `≥ p`.
    pub certified: Vec<bool>,
    pub axis: Axis,
}

impl<C: Scalar> FeffermanChain<C> {
    pub fn n(&self) -> usize {
        self.psis.len() - 1
    }

    /// `ψ̃_{n+1}`.
    pub fn last_psi(&self) -> &MultiSeries<C> {
        self.psis.last().expect("non-empty chain")
    }

    pub fn last_j(&self) -> &MultiSeries<C> {
        self.js.last().expect("non-empty chain")
    }
}

/// Runs `ψ₁ = J(ψ)^{−1/(n+1)} ψ`,
/// `ψ_p = ψ_{p−1}(1 + (1 − J(ψ_{p−1}))/(p(n+2−p)))` for `2 ≤ p ≤ n+1`,
/// recording the vanishing order of `J(ψ_p) − 1` along `axis`.
pub fn fefferman_recursion<C: Scalar>(psi: &MultiSeries<C>, axis: Axis) -> Result<FeffermanChain<C>, MaError> {
    let n = psi.n();
    let field = psi.field();
    let one = C::one(&field);
    let j0_series = j_operator(psi)?;
    let j0 = j0_series.constant_term();
    if j0.is_negligible() {
        return Err(MaError::DegenerateJ);
    }
    let inv_j0 = one.over(&j0).expect("nonzero");
    let normalized_j = j0_series.scale(&inv_j0);
    let exponent = BigRational::new(BigInt::from(-1), BigInt::from(n as i64 + 1));
    let mut current = normalized_j.unit_power(&exponent)?.mul(psi)?;

    let mut psis = Vec::with_capacity(n + 1);
    let mut js = Vec::with_capacity(n + 1);
    let mut residual_orders = Vec::with_capacity(n + 1);
    let mut certified = Vec::with_capacity(n + 1);
    for p in 1..=n + 1 {
        let jp = j_operator(&current)?.scale(&inv_j0);
        let residual = jp.add_constant(&one.negated()).restrict_to_curve(axis);
        let order = residual.significant_order();
        let can_certify = residual.valid_order() >= p as i32 - 1;
        if let Order::Exact(k) = order {
            if (k as usize) < p {
                return Err(MaError::Invariant(format!(
                    "J(psi_{p}) - 1 vanishes only to order {k} along {axis:?}"
                )));
            }
        }
        residual_orders.push(order);
        certified.push(can_certify);
        psis.push(current.clone());
        if p <= n {
            let next_p = p + 1;
            let denom = (next_p * (n + 2 - next_p)) as i64;
            let factor = jp
                .neg()
                .add_constant(&one)
                .scale(&C::from_ratio(1, denom, &field))
                .add_constant(&one);
            current = current.mul(&factor)?;
        }
        js.push(jp);
    }
    Ok(FeffermanChain { normalizer: j0, psis, js, residual_orders, certified, axis })
}

/// Pointwise obstruction value with the data it was read from.
#[derive(Clone, Debug)]
pub struct Obstruction<C> {
    /// `O(0)`.
    pub value: C,
    /// `K(ψ)(0) = (n+2) O(0)`.
    pub k_value: C,
    pub residual_orders: Vec<Order>,
    pub axis: Axis,
    /// Truncation weight of the input series.
    pub weight: i32,
}

/// `O(0)` for a defining series, read along `axis` (the u-axis by default
/// in the callers).
pub fn obstruction_along<C: Scalar>(psi: &MultiSeries<C>, axis: Axis) -> Result<Obstruction<C>, MaError> {
    let n = psi.n();
    let chain = fefferman_recursion(psi, axis)?;
    let field = psi.field();
    let one = C::one(&field);
    let residual: UniSeries<C> = chain.last_j().add_constant(&one.negated()).restrict_to_curve(axis);
    if residual.valid_order() < n as i32 + 1 {
        let per = axis.weight_per_power();
        return Err(MaError::WeightTooSmall {
            need: psi.valid_weight() + per * (n as i32 + 1 - residual.valid_order()),
            have: psi.valid_weight(),
        });
    }
    if let Some(k) = (0..=n).find(|&k| !residual.coeff(k).expect("in range").is_negligible()) {
        return Err(MaError::Invariant(format!("J(psi_{}) - 1 has a t^{k} term", n + 1)));
    }
    let c_top = residual.coeff(n + 1).expect("in range").clone();
    let line = chain.last_psi().restrict_to_curve(axis);
    let c1 = line.coeff(1).cloned().unwrap_or_else(|| C::zero(&field));
    if c1.is_negligible() {
        return Err(MaError::NonTransversal(axis));
    }
    let mut c1_pow = one.clone();
    for _ in 0..=n {
        c1_pow = c1_pow.times(&c1);
    }
    let n2 = C::from_i64(n as i64 + 2, &field);
    let k_value = c_top.times(&chain.normalizer).over(&c1_pow).expect("c1 nonzero");
    let value = k_value.over(&n2).expect("nonzero");
    Ok(Obstruction { value, k_value, residual_orders: chain.residual_orders, axis, weight: psi.valid_weight() })
}

/// `O(0)` along the u-axis.
pub fn obstruction_at_origin<C: Scalar>(psi: &DefiningSeries<C>) -> Result<Obstruction<C>, MaError> {
    obstruction_along(psi.series(), Axis::U)
}

/// `K(ψ)(0) = (J(ψ_{n+1}) − 1)/ψ_{n+1}^{n+1}` at the origin, which equals
/// `(n+2) O(0)`.
pub fn k_operator_at_origin<C: Scalar>(psi: &DefiningSeries<C>) -> Result<C, MaError> {
    Ok(obstruction_at_origin(psi)?.k_value)
}

/// First coordinate axis along which `rho` has a nonzero linear term.
pub fn transversal_axis<C: Scalar>(rho: &MultiSeries<C>) -> Option<Axis> {
    let mut candidates = vec![Axis::U, Axis::V];
    for j in 0..rho.nz() {
        candidates.push(Axis::X(j));
        candidates.push(Axis::Y(j));
    }
    candidates.into_iter().find(|&a| {
        let line = rho.restrict_to_curve(a);
        line.coeff(1).is_some_and(|c| !c.is_negligible())
    })
}

/// `O(p)` for a polynomial defining function: re-expand around `p`, pick a
/// transversal axis, and extract there. `weight` is the truncation used
/// after recentering.
pub fn obstruction_at_point<C: Scalar>(
    psi: &DefiningSeries<C>,
    z0: &[C],
    w0: &C,
    weight: i32,
) -> Result<Obstruction<C>, MaError> {
    if !psi.is_polynomial() {
        return Err(MaError::NonPolynomial);
    }
    let rho = psi.series();
    let moved = rho.recenter(z0, w0, weight)?;
    let value_at_p = moved.constant_term();
    if !value_at_p.is_negligible() {
        return Err(MaError::NotOnSurface(value_at_p.to_string()));
    }
    let axis = transversal_axis(&moved).ok_or(MaError::NoTransversalAxis)?;
    obstruction_along(&moved, axis)
}

/// Same as [`obstruction_at_point`] along a caller-chosen axis (for
/// curve-independence diagnostics).
pub fn obstruction_at_point_along<C: Scalar>(
    psi: &DefiningSeries<C>,
    z0: &[C],
    w0: &C,
    weight: i32,
    axis: Axis,
) -> Result<Obstruction<C>, MaError> {
    if !psi.is_polynomial() {
        return Err(MaError::NonPolynomial);
    }
    let moved = psi.series().recenter(z0, w0, weight)?;
    if !moved.constant_term().is_negligible() {
        return Err(MaError::NotOnSurface(moved.constant_term().to_string()));
    }
    obstruction_along(&moved, axis)
}
