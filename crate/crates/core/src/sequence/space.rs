use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::scalar::{log_sum_exp, Scalar};
use super::vector::FiniteVector;
use crate::{Error, Result};

/// A monotone sequence norm evaluated from log-moduli.
///
/// Implementors must be monotone under coordinatewise decrease of moduli
/// and must not depend on the order of coordinates beyond summation order.
pub trait MonotoneNorm {
    /// `ln ||x||` given `ln |x_n|` in ascending index order.
    fn log_norm_of(&self, log_moduli: &mut dyn Iterator<Item = f64>) -> f64;
}

/// The supported sequence spaces: `c0` and `lp` over `Z` or `N0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceModel {
    C0Z,
    LpZ(f64),
    C0N,
    LpN(f64),
}

impl SpaceModel {
    pub fn is_bilateral(&self) -> bool {
        matches!(self, SpaceModel::C0Z | SpaceModel::LpZ(_))
    }

    /// `Some(p)` for `lp` variants.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            SpaceModel::LpZ(p) | SpaceModel::LpN(p) => Some(*p),
            _ => None,
        }
    }

    /// Constant of the unconditional basis property.
    pub fn unconditional_constant(&self) -> f64 {
        1.0
    }

    /// `|x_n| <= bound * ||x||` for every coordinate.
    pub fn coordinate_bound(&self) -> f64 {
        1.0
    }

    /// `ln ||x||`
    pub fn log_norm<S: Scalar>(&self, x: &FiniteVector<S>) -> f64 {
        self.log_norm_of(&mut x.iter().map(|(_, s)| s.ln_abs()))
    }

    pub fn norm<S: Scalar>(&self, x: &FiniteVector<S>) -> f64 {
        self.log_norm(x).exp()
    }

    /// Combines two log-norms of vectors with disjoint supports.
    pub fn combine_disjoint(&self, a: f64, b: f64) -> f64 {
        match self.exponent() {
            None => a.max(b),
            Some(p) => log_sum_exp([p * a, p * b]) / p,
        }
    }
}

impl MonotoneNorm for SpaceModel {
    fn log_norm_of(&self, log_moduli: &mut dyn Iterator<Item = f64>) -> f64 {
        match self.exponent() {
            None => log_moduli.fold(f64::NEG_INFINITY, f64::max),
            Some(p) => log_sum_exp(log_moduli.map(|l| p * l)) / p,
        }
    }
}

/// `||x||`
pub fn norm<S: Scalar>(space: &SpaceModel, x: &FiniteVector<S>) -> f64 {
    space.norm(x)
}

/// `|||x||| = sup_{m,n>=0} ||sum_{-m<=k<=n} x_k e_k||`.
///
/// All supported spaces are monotone, so this equals [`norm`]; see
/// [`triple_norm_by_truncations`] for the direct computation.
pub fn triple_norm<S: Scalar>(space: &SpaceModel, x: &FiniteVector<S>) -> f64 {
    space.norm(x)
}

/// [`triple_norm`] evaluated literally as a supremum over interval
/// truncations. Only truncation endpoints at support points matter.
pub fn triple_norm_by_truncations<S: Scalar>(space: &SpaceModel, x: &FiniteVector<S>) -> f64 {
    let lefts: Vec<i64> = std::iter::once(0).chain(x.iter().map(|(k, _)| -k).filter(|m| *m > 0)).collect();
    let rights: Vec<i64> = std::iter::once(0).chain(x.iter().map(|(k, _)| k).filter(|n| *n > 0)).collect();
    let mut best = 0.0_f64;
    for &m in &lefts {
        for &n in &rights {
            best = best.max(space.norm(&x.truncated(-m, n)));
        }
    }
    best
}

impl fmt::Display for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceModel::C0Z => write!(f, "c0_z"),
            SpaceModel::C0N => write!(f, "c0_n"),
            SpaceModel::LpZ(p) => write!(f, "lp_z:{p}"),
            SpaceModel::LpN(p) => write!(f, "lp_n:{p}"),
        }
    }
}

impl FromStr for SpaceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown space {s:?}; expected c0_z, c0_n, lp_z:<p> or lp_n:<p>"));
        let exponent = |t: &str| -> Result<f64> {
            let p: f64 = t.parse().map_err(|_| bad())?;
            if p >= 1.0 && p.is_finite() {
                Ok(p)
            } else {
                Err(Error::InvalidParameter(format!("lp exponent must lie in [1, inf), got {p}")))
            }
        };
        match s.trim().split_once(':') {
            None if s.trim() == "c0_z" => Ok(SpaceModel::C0Z),
            None if s.trim() == "c0_n" => Ok(SpaceModel::C0N),
            Some(("lp_z", p)) => Ok(SpaceModel::LpZ(exponent(p)?)),
            Some(("lp_n", p)) => Ok(SpaceModel::LpN(exponent(p)?)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for SpaceModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpaceModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}
