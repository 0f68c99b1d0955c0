use std::fmt;

use serde::Serialize;

use super::index_set::IndexSet;
use crate::{Error, Result};

/// An exact density threshold `num / den` in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Density {
    pub num: u64,
    pub den: u64,
}

impl Density {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(Error::InvalidParameter(format!("density {num}/{den} outside (0, 1]")));
        }
        Ok(Density { num, den })
    }

    /// `1 / k`, the grid `D` of thresholds.
    pub fn reciprocal(k: u64) -> Result<Self> {
        Self::new(1, k)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `count / (n + 1) > num / den`, in integers.
    fn exceeded_by(&self, count: u64, n: u64) -> bool {
        count as u128 * self.den as u128 > self.num as u128 * (n as u128 + 1)
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Outcome of a membership test in `A_{delta, mu}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    /// The first `n >= mu` with ratio above `delta`, and the prefix
    /// `A ∩ [0, n]`: every superset of the prefix is also a member.
    Member { witness: u64, prefix: IndexSet },
    /// No such `n` up to the horizon.
    NonMemberToHorizon { horizon: u64 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// The upper-density family `A_{delta, mu}`: sets `A` with
/// `card(A ∩ [0, n]) / (n + 1) > delta` for some `n >= mu`.
///
/// The whole upper family of sets with positive upper density is the union
/// over `delta = 1/k` of the intersections over `mu` of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpperDensityFamily {
    pub delta: Density,
    pub mu: u64,
}

impl UpperDensityFamily {
    pub fn membership(&self, a: &IndexSet, horizon: u64) -> Result<Membership> {
        upper_family_membership(a, self.delta, self.mu, horizon)
    }
}

/// Decides membership of `A` in `A_{delta, mu}` up to `horizon` exactly.
///
/// Between elements of `A` the counting ratio decreases, so only `n = mu`
/// and the elements of `A` in `[mu, horizon]` need testing.
pub fn upper_family_membership(a: &IndexSet, delta: Density, mu: u64, horizon: u64) -> Result<Membership> {
    if mu > horizon {
        return Err(Error::InvalidParameter(format!("threshold index {mu} beyond horizon {horizon}")));
    }
    let a = if horizon > a.horizon() { a.with_horizon(horizon)? } else { a.clone() };
    let mut count = a.count_upto(mu)?;
    let mut witness = delta.exceeded_by(count, mu).then_some(mu);
    if witness.is_none() {
        for &n in a.range(mu + 1, horizon) {
            count += 1;
            if delta.exceeded_by(count, n) {
                witness = Some(n);
                break;
            }
        }
    }
    Ok(match witness {
        Some(n) => Membership::Member { witness: n, prefix: a.with_horizon(n)? },
        None => Membership::NonMemberToHorizon { horizon },
    })
}
