use std::fmt;

/// Largest ambient dimension supported by the packed monomial key.
pub const MAX_N: usize = 6;
const MAX_Z: usize = MAX_N - 1;

const W_AT: usize = 0;
const A_AT: usize = 1;
const B_AT: usize = A_AT + MAX_Z;
const P_AT: usize = B_AT + MAX_Z;
const Q_AT: usize = P_AT + 1;
const KEY_LEN: usize = Q_AT + 1;

/// A monomial `z^α z̄^β w^p w̄^q` in the weighted grading where
/// `wt(z_j) = wt(z̄_j) = 1` and `wt(w) = wt(w̄) = 2`.
///
/// The packed key stores the weight first, so the derived ordering sorts by
/// weight and then lexicographically by exponents. Truncation by weight is a
/// range query on an ordered map.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    key: [u8; KEY_LEN],
}

/// One of the series variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Z(usize),
    Zbar(usize),
    W,
    Wbar,
}

impl Var {
    pub fn weight(self) -> u8 {
        match self {
            Var::Z(_) | Var::Zbar(_) => 1,
            Var::W | Var::Wbar => 2,
        }
    }

    pub fn conj(self) -> Var {
        match self {
            Var::Z(j) => Var::Zbar(j),
            Var::Zbar(j) => Var::Z(j),
            Var::W => Var::Wbar,
            Var::Wbar => Var::W,
        }
    }

    fn slot(self) -> usize {
        match self {
            Var::Z(j) => A_AT + j,
            Var::Zbar(j) => B_AT + j,
            Var::W => P_AT,
            Var::Wbar => Q_AT,
        }
    }
}

impl Monomial {
    pub const ONE: Monomial = Monomial { key: [0; KEY_LEN] };

    /// Builds `z^alpha z̄^beta w^p w̄^q`. Panics if the multi-indices are
    /// longer than the packed key allows.
    pub fn new(alpha: &[u8], beta: &[u8], p: u8, q: u8) -> Monomial {
        assert!(alpha.len() <= MAX_Z && beta.len() <= MAX_Z, "too many z variables");
        let mut key = [0u8; KEY_LEN];
        key[A_AT..A_AT + alpha.len()].copy_from_slice(alpha);
        key[B_AT..B_AT + beta.len()].copy_from_slice(beta);
        key[P_AT] = p;
        key[Q_AT] = q;
        let wt: u32 = alpha.iter().chain(beta).map(|&e| e as u32).sum::<u32>() + 2 * (p as u32 + q as u32);
        key[W_AT] = u8::try_from(wt).expect("monomial weight exceeds 255");
        Monomial { key }
    }

    /// Smallest key of a given weight; every monomial of weight `< w`
    /// sorts strictly before it.
    pub fn weight_floor(w: u32) -> Monomial {
        let mut key = [0u8; KEY_LEN];
        key[W_AT] = w.min(255) as u8;
        Monomial { key }
    }

    pub fn var(v: Var) -> Monomial {
        let mut key = [0u8; KEY_LEN];
        key[v.slot()] = 1;
        key[W_AT] = v.weight();
        Monomial { key }
    }

    pub fn weight(&self) -> u32 {
        self.key[W_AT] as u32
    }

    pub fn exponent(&self, v: Var) -> u8 {
        self.key[v.slot()]
    }

    pub fn alpha(&self, nz: usize) -> &[u8] {
        &self.key[A_AT..A_AT + nz]
    }

    pub fn beta(&self, nz: usize) -> &[u8] {
        &self.key[B_AT..B_AT + nz]
    }

    pub fn p(&self) -> u8 {
        self.key[P_AT]
    }

    pub fn q(&self) -> u8 {
        self.key[Q_AT]
    }

    /// Total z-degree `|α| + |β|`.
    pub fn z_degree(&self) -> u32 {
        self.key[A_AT..P_AT].iter().map(|&e| e as u32).sum()
    }

    /// True when only variables with index `< nz` (plus w, w̄) occur.
    pub fn fits(&self, nz: usize) -> bool {
        (nz..MAX_Z).all(|j| self.key[A_AT + j] == 0 && self.key[B_AT + j] == 0)
    }

    pub fn times(&self, o: &Monomial) -> Monomial {
        let mut key = self.key;
        for (k, e) in key.iter_mut().zip(o.key.iter()) {
            *k = k.checked_add(*e).expect("monomial exponent overflow");
        }
        Monomial { key }
    }

    /// Exponent swap `(α, β, p, q) ↦ (β, α, q, p)`, the monomial of the
    /// complex conjugate.
    pub fn conj(&self) -> Monomial {
        let mut key = self.key;
        key[A_AT..B_AT].copy_from_slice(&self.key[B_AT..P_AT]);
        key[B_AT..P_AT].copy_from_slice(&self.key[A_AT..B_AT]);
        key[P_AT] = self.key[Q_AT];
        key[Q_AT] = self.key[P_AT];
        Monomial { key }
    }

    /// `∂_v` of the monomial: the multiplicity and the lowered monomial, or
    /// `None` if `v` does not occur.
    pub fn lower(&self, v: Var) -> Option<(u8, Monomial)> {
        let e = self.key[v.slot()];
        if e == 0 {
            return None;
        }
        let mut key = self.key;
        key[v.slot()] -= 1;
        key[W_AT] -= v.weight();
        Some((e, Monomial { key }))
    }

    pub fn raise(&self, v: Var) -> Monomial {
        let mut key = self.key;
        key[v.slot()] += 1;
        key[W_AT] += v.weight();
        Monomial { key }
    }

    /// Iterates `(variable, exponent)` over the nonzero exponents.
    pub fn factors(&self, nz: usize) -> impl Iterator<Item = (Var, u8)> + '_ {
        let zs = (0..nz).map(|j| (Var::Z(j), self.key[A_AT + j]));
        let zbs = (0..nz).map(|j| (Var::Zbar(j), self.key[B_AT + j]));
        zs.chain(zbs)
            .chain([(Var::W, self.key[P_AT]), (Var::Wbar, self.key[Q_AT])])
            .filter(|&(_, e)| e > 0)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nz = (0..MAX_Z)
            .rev()
            .find(|&j| self.key[A_AT + j] != 0 || self.key[B_AT + j] != 0)
            .map_or(1, |j| j + 1);
        let mut first = true;
        for (v, e) in self.factors(nz) {
            if !first {
                write!(f, "·")?;
            }
            first = false;
            match v {
                Var::Z(j) => write!(f, "z{}", j + 1)?,
                Var::Zbar(j) => write!(f, "zb{}", j + 1)?,
                Var::W => write!(f, "w")?,
                Var::Wbar => write!(f, "wb")?,
            }
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
