use std::collections::BTreeMap;

use super::scalar::{LogScalar, Scalar};
use super::vseq::{v_at_scalar, VSequence};
use super::weights::WeightRule;
use crate::Result;

/// Finitely supported sequence over `Z`; zero entries are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteVector<S> {
    entries: BTreeMap<i64, S>,
}

impl<S: Scalar> Default for FiniteVector<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> FiniteVector<S> {
    pub fn zero() -> Self {
        FiniteVector { entries: BTreeMap::new() }
    }

    /// `e_n`
    pub fn unit(n: i64) -> Self {
        let mut x = Self::zero();
        x.set(n, S::one());
        x
    }

    /// Later duplicates overwrite earlier ones.
    pub fn from_entries(entries: impl IntoIterator<Item = (i64, S)>) -> Self {
        let mut x = Self::zero();
        for (n, s) in entries {
            x.set(n, s);
        }
        x
    }

    pub fn set(&mut self, n: i64, value: S) {
        if value.is_zero() {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, value);
        }
    }

    pub fn get(&self, n: i64) -> S {
        self.entries.get(&n).cloned().unwrap_or_else(S::zero)
    }

    /// Entries in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &S)> + '_ {
        self.entries.iter().map(|(&n, s)| (n, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest index of the support.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.entries.keys().next()?, *self.entries.keys().next_back()?))
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, s) in other.iter() {
            let d = out.get(n).minus(s);
            out.set(n, d);
        }
        out
    }

    pub fn scaled(&self, c: &S) -> Self {
        Self::from_entries(self.iter().map(|(n, s)| (n, s.times(c))))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FiniteVector<T> {
        FiniteVector::from_entries(self.iter().map(|(n, s)| (n, f(s))))
    }

    /// Keeps the entries with index in `[lo, hi]`; empty when `lo > hi`.
    pub fn truncated(&self, lo: i64, hi: i64) -> Self {
        if lo > hi {
            return FiniteVector::zero();
        }
        FiniteVector { entries: self.entries.range(lo..=hi).map(|(&n, s)| (n, s.clone())).collect() }
    }
}

/// `B_w^m x`: `(B_w^m x)_n = (prod_{nu=n+1}^{n+m} w_nu) x_{n+m}`.
pub fn apply_shift_power<S: Scalar>(w: &WeightRule, m: u64, x: &FiniteVector<S>) -> FiniteVector<S> {
    let m = m as i64;
    FiniteVector::from_entries(x.iter().map(|(k, s)| {
        let factor = (k - m + 1..=k).fold(S::one(), |acc, nu| acc.times(&S::weight(w, nu)));
        (k - m, factor.times(s))
    }))
}

/// `B_w^m x` with products read from a cached `v` window (`v_{k-m} / v_k`).
pub fn apply_shift_power_cached(v: &VSequence, m: u64, x: &FiniteVector<LogScalar>) -> Result<FiniteVector<LogScalar>> {
    let m = m as i64;
    let mut out = FiniteVector::zero();
    for (k, s) in x.iter() {
        out.set(k - m, v.v_at(k - m)?.over(&v.v_at(k)?).times(s));
    }
    Ok(out)
}

/// `F_{1/w}^m x` where one step maps `x` to `((1/w_n) x_{n-1})_n`.
pub fn apply_forward_power<S: Scalar>(w: &WeightRule, m: u64, x: &FiniteVector<S>) -> Result<FiniteVector<S>> {
    w.require_invertible()?;
    let m = m as i64;
    Ok(FiniteVector::from_entries(x.iter().map(|(k, s)| {
        let factor = (k + 1..=k + m).fold(S::one(), |acc, nu| acc.times(&S::weight(w, nu)));
        (k + m, s.over(&factor))
    })))
}

/// `(x_{-n})_n`
pub fn reflect_vector<S: Scalar>(x: &FiniteVector<S>) -> FiniteVector<S> {
    FiniteVector::from_entries(x.iter().map(|(n, s)| (-n, s.clone())))
}

/// `phi_v(x) = (x_n v_n)_n`, with `v` computed by direct products.
pub fn conjugate_phi_v<S: Scalar>(w: &WeightRule, x: &FiniteVector<S>) -> FiniteVector<S> {
    FiniteVector::from_entries(x.iter().map(|(n, s)| (n, s.times(&v_at_scalar::<S>(w, n)))))
}

/// `phi_v^{-1}(x) = (x_n / v_n)_n`.
pub fn unconjugate_phi_v<S: Scalar>(w: &WeightRule, x: &FiniteVector<S>) -> FiniteVector<S> {
    FiniteVector::from_entries(x.iter().map(|(n, s)| (n, s.over(&v_at_scalar::<S>(w, n)))))
}

impl VSequence {
    /// `phi_v(x)` from the cached window; indices outside it are errors.
    pub fn conjugate(&self, x: &FiniteVector<LogScalar>) -> Result<FiniteVector<LogScalar>> {
        let mut out = FiniteVector::zero();
        for (n, s) in x.iter() {
            out.set(n, s.times(&self.v_at(n)?));
        }
        Ok(out)
    }

    pub fn unconjugate(&self, x: &FiniteVector<LogScalar>) -> Result<FiniteVector<LogScalar>> {
        let mut out = FiniteVector::zero();
        for (n, s) in x.iter() {
            out.set(n, s.over(&self.v_at(n)?));
        }
        Ok(out)
    }
}
