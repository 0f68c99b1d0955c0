use std::fmt;

use num::{BigRational, Signed, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::sequence::{v_at_exact, FiniteVector, Param, Scalar, WeightRule};
use crate::{Error, Result};

/// Where a target came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    /// Position `rank` (1-based) of the dyadic enumeration.
    Dyadic { rank: u64 },
    /// The `index`-th (0-based) user target.
    Explicit { index: usize },
    /// A free slot filled with the zero vector.
    Padding,
}

/// Target `z^(p)` in `X` and its preimage `y^(p) = phi_v^{-1}(z^(p))` in
/// the unweighted picture; `supp y ⊆ [-p, p]` and `|y_j| <= p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Target {
    pub p: usize,
    #[serde(serialize_with = "serialize_sparse")]
    pub z: FiniteVector<f64>,
    #[serde(serialize_with = "serialize_sparse")]
    pub y: FiniteVector<f64>,
    pub source: TargetSource,
}

impl Target {
    /// `max_j |y_j|`
    pub fn max_abs_y(&self) -> f64 {
        self.y.iter().map(|(_, s)| s.abs()).fold(0.0, f64::max)
    }
}

/// Targets for `p = 1..=P`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetList {
    entries: Vec<Target>,
}

impl TargetList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `z^(p)`, `p >= 1`.
    pub fn get(&self, p: usize) -> &Target {
        &self.entries[p - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Target> {
        self.entries.iter()
    }

    /// `max_{p, j} |y_j^(p)|`.
    pub fn max_abs_y(&self) -> f64 {
        self.entries.iter().map(Target::max_abs_y).fold(0.0, f64::max)
    }

    /// Largest `|j|` over all supports of `y^(p)`.
    pub fn max_support(&self) -> i64 {
        self.entries.iter().flat_map(|t| t.y.iter().map(|(j, _)| j.abs())).max().unwrap_or(0)
    }
}

/// How to choose the targets.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetRule {
    /// Enumerates every finitely supported dyadic vector. Level `L` holds the
    /// vectors on `[-L, L]` with coefficients in `2^{-L} Z ∩ [-L, L]`;
    /// levels are concatenated and `y^(p)` is the `p`-th vector.
    Dyadic,
    /// User targets `z` in `X`, each placed at the smallest free admissible `p`.
    Explicit(Vec<FiniteVector<BigRational>>),
}

/// The targets `z^(1), ..., z^(P)` for the weight `w`.
pub fn enumerate_targets(w: &WeightRule, count: usize, rule: &TargetRule) -> Result<TargetList> {
    if count == 0 {
        return Err(Error::InvalidParameter("the construction needs at least one target".into()));
    }
    let entries = match rule {
        TargetRule::Dyadic => (1..=count)
            .map(|p| {
                let y = dyadic_vector(p as u64);
                Target { p, z: conjugate_exact(w, &y), y: to_f64(&y), source: TargetSource::Dyadic { rank: p as u64 } }
            })
            .collect(),
        TargetRule::Explicit(zs) => explicit_targets(w, count, zs)?,
    };
    Ok(TargetList { entries })
}

fn to_f64(x: &FiniteVector<BigRational>) -> FiniteVector<f64> {
    x.map(Scalar::to_f64)
}

/// `phi_v(y)` evaluated exactly, rounded once.
fn conjugate_exact(w: &WeightRule, y: &FiniteVector<BigRational>) -> FiniteVector<f64> {
    FiniteVector::from_entries(y.iter().map(|(j, s)| (j, Scalar::to_f64(&(s * v_at_exact(w, j))))))
}

/// Smallest `p` with `supp y ⊆ [-p, p]` and `max |y_j| <= p`.
pub fn minimal_admissible_p(y: &FiniteVector<BigRational>) -> usize {
    let support = y.iter().map(|(j, _)| j.unsigned_abs()).max().unwrap_or(0);
    let coefficient = y
        .iter()
        .map(|(_, s)| s.abs().ceil().to_integer().to_u64().unwrap_or(u64::MAX))
        .max()
        .unwrap_or(0);
    support.max(coefficient).max(1) as usize
}

fn explicit_targets(w: &WeightRule, count: usize, zs: &[FiniteVector<BigRational>]) -> Result<Vec<Target>> {
    let mut slots: Vec<Option<Target>> = vec![None; count];
    for (index, z) in zs.iter().enumerate() {
        let mut y = FiniteVector::zero();
        for (j, s) in z.iter() {
            y.set(j, s / v_at_exact(w, j));
        }
        let minimal_p = minimal_admissible_p(&y);
        let p = (minimal_p..=count)
            .find(|&p| slots[p - 1].is_none())
            .ok_or(Error::TargetNotAdmissible { index, minimal_p, max_p: count })?;
        slots[p - 1] = Some(Target { p, z: to_f64(z), y: to_f64(&y), source: TargetSource::Explicit { index } });
    }
    Ok(slots
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            t.unwrap_or(Target { p: i + 1, z: FiniteVector::zero(), y: FiniteVector::zero(), source: TargetSource::Padding })
        })
        .collect())
}

/// Number of vectors on level `L`: `(2 L 2^L + 1)^(2L + 1)`, saturating.
fn level_size(level: u32) -> u128 {
    let digits = 2 * level as u128 * (1u128 << level) + 1;
    (0..2 * level + 1).fold(1u128, |acc, _| acc.saturating_mul(digits))
}

/// Coordinate order within a level: `0, 1, -1, 2, -2, ...`.
fn zigzag(i: u128) -> i64 {
    let k = i.div_ceil(2) as i64;
    if i % 2 == 1 {
        k
    } else {
        -k
    }
}

/// The `rank`-th (1-based) vector of the dyadic enumeration.
pub fn dyadic_vector(rank: u64) -> FiniteVector<BigRational> {
    let mut offset = rank as u128 - 1;
    let mut level = 1;
    while offset >= level_size(level) {
        offset -= level_size(level);
        level += 1;
    }
    let digits = 2 * level as u128 * (1u128 << level) + 1;
    let step = BigRational::new(1.into(), (1u64 << level).into());
    let mut y = FiniteVector::zero();
    for coordinate in 0..2 * level as u128 + 1 {
        let digit = offset % digits;
        offset /= digits;
        y.set(zigzag(coordinate), &step * BigRational::from_integer(zigzag(digit).into()));
    }
    y
}

/// `j:value` pairs separated by commas; `zero` (or nothing) is the zero vector.
pub struct Sparse<'a, S>(pub &'a FiniteVector<S>);

impl<S: Scalar + fmt::Display> fmt::Display for Sparse<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("zero");
        }
        for (i, (j, s)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{j}:{s}")?;
        }
        Ok(())
    }
}

fn serialize_sparse<S: Serializer>(x: &FiniteVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|(j, v)| (j, *v)))
}

/// Parses the `j:value` format; values are exact (`1/3`, `0.25`, `-2`).
pub fn parse_sparse(text: &str) -> Result<FiniteVector<BigRational>> {
    let text = text.trim();
    let mut x = FiniteVector::zero();
    if text.is_empty() || text == "zero" {
        return Ok(x);
    }
    let mut seen = std::collections::BTreeSet::new();
    for item in text.split(',') {
        let (j, value) =
            item.split_once(':').ok_or_else(|| Error::Parse(format!("expected `index:value`, found `{}`", item.trim())))?;
        let j: i64 = j.trim().parse().map_err(|_| Error::Parse(format!("bad index `{}`", j.trim())))?;
        let value: Param = value.trim().parse()?;
        if !seen.insert(j) {
            return Err(Error::Parse(format!("index {j} given twice")));
        }
        x.set(j, value.exact().clone());
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn two_sided() -> WeightRule {
        WeightRule::two_sided("2".parse().unwrap(), "1/2".parse().unwrap()).unwrap()
    }

    #[test]
    fn explicit_examples() {
        let w = two_sided();
        let zero = FiniteVector::zero();
        let t = enumerate_targets(&w, 1, &TargetRule::Explicit(vec![zero])).unwrap();
        assert!(t.get(1).y.is_empty());
        let t = enumerate_targets(&w, 1, &TargetRule::Explicit(vec![FiniteVector::unit(0)])).unwrap();
        assert_eq!(t.get(1).y.get(0), 1.0);
        let e2 = FiniteVector::unit(2);
        let t = enumerate_targets(&w, 5, &TargetRule::Explicit(vec![e2.clone()])).unwrap();
        assert_eq!(t.get(4).y.get(2), 4.0);
        assert_eq!(t.get(4).source, TargetSource::Explicit { index: 0 });
        assert_eq!(t.get(1).source, TargetSource::Padding);
        match enumerate_targets(&w, 3, &TargetRule::Explicit(vec![e2])) {
            Err(Error::TargetNotAdmissible { index: 0, minimal_p: 4, max_p: 3 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_targets_take_the_next_free_slot() {
        let w = two_sided();
        let e0 = FiniteVector::unit(0);
        let t = enumerate_targets(&w, 3, &TargetRule::Explicit(vec![e0.clone(), e0.clone(), e0.clone()])).unwrap();
        assert!(t.iter().all(|t| t.y.get(0) == 1.0));
        assert!(matches!(
            enumerate_targets(&w, 2, &TargetRule::Explicit(vec![e0.clone(), e0.clone(), e0])),
            Err(Error::TargetNotAdmissible { index: 2, minimal_p: 1, max_p: 2 })
        ));
    }

    #[test]
    fn minimal_p_uses_support_and_size() {
        let y = FiniteVector::from_entries([(-3, rat(1, 2)), (1, rat(-5, 2))]);
        assert_eq!(minimal_admissible_p(&y), 3);
        let y = FiniteVector::from_entries([(0, rat(7, 2))]);
        assert_eq!(minimal_admissible_p(&y), 4);
    }

    #[test]
    fn dyadic_enumeration_is_admissible_and_injective() {
        let mut seen = Vec::new();
        for rank in 1..=600u64 {
            let y = dyadic_vector(rank);
            assert!(minimal_admissible_p(&y) as u64 <= rank);
            // distinct within a level
            if rank <= 125 {
                assert!(!seen.contains(&y));
                seen.push(y);
            }
        }
        assert!(dyadic_vector(1).is_empty());
        assert_eq!(dyadic_vector(2), FiniteVector::from_entries([(0, rat(1, 2))]));
        assert_eq!(dyadic_vector(3), FiniteVector::from_entries([(0, rat(-1, 2))]));
        // level 1 holds 5^3 vectors; level 2 starts with zero again on [-2, 2]
        assert_eq!(dyadic_vector(126), FiniteVector::zero());
        assert_eq!(dyadic_vector(127), FiniteVector::from_entries([(0, rat(1, 4))]));
    }

    #[test]
    fn dyadic_targets_are_conjugated() {
        let w = two_sided();
        let t = enumerate_targets(&w, 8, &TargetRule::Dyadic).unwrap();
        // rank 6 is 1/2 e_1; z_1 = y_1 v_1 = 1/4
        assert_eq!(t.get(6).y, FiniteVector::from_entries([(1, 0.5)]));
        assert_eq!(t.get(6).z, FiniteVector::from_entries([(1, 0.25)]));
    }

    #[test]
    fn sparse_text_round_trip() {
        let x = parse_sparse("2:1/2, -1:3").unwrap();
        assert_eq!(x.get(2), rat(1, 2));
        assert_eq!(Sparse(&x).to_string(), "-1:3, 2:1/2");
        assert_eq!(parse_sparse(&Sparse(&x).to_string()).unwrap(), x);
        assert!(parse_sparse("zero").unwrap().is_empty());
        assert!(parse_sparse("1:2, 1:3").is_err());
        assert!(parse_sparse("x").is_err());
    }
}
