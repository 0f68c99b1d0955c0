//! Subsets of `N_0`, their densities, and pairwise-disjoint hitting-set
//! families `A_1, ..., A_P` with prescribed separation.
//!
//! A family is *separated* by `sep` when `|n - m| >= sep(p, q)` for all
//! `n in A_p`, `m in A_q`, `n != m` (including `p = q`); every separation
//! function satisfies `sep(p, q) >= p + q + 1`.

mod density;
mod generators;
mod index_set;
mod upper;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

pub use density::{counting_ratio, density_report, geometric_grid, upper_density_at, DensityReport, DensitySample};
pub use generators::{generate_block_family, generate_lower_family};
pub use index_set::{IndexSet, SetRule};
pub use upper::{upper_family_membership, Density, Membership, UpperDensityFamily};

use index_set::{parse_header, parse_u64};

use crate::{Error, Result};

/// Required minimal gap between elements of `A_p` and `A_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SepFn {
    /// `p + q + 1 + extra`
    Offset { extra: u64 },
    /// `factor (p + q) + 1 + extra`, `factor >= 1`
    Scaled { factor: u64, extra: u64 },
}

impl Default for SepFn {
    fn default() -> Self {
        SepFn::Offset { extra: 0 }
    }
}

impl SepFn {
    /// `p + q + 1 + ceil(log2(1 / eps_min))`: with weights of modulus
    /// `2^{-|k|}` on the conjugating sequence, every cross term then falls
    /// below `eps_min`.
    pub fn for_schedule(eps_min: f64) -> Self {
        let extra = if eps_min >= 1.0 { 0 } else { (1.0 / eps_min).log2().ceil() as u64 };
        SepFn::Offset { extra }
    }

    pub fn required(&self, p: usize, q: usize) -> u64 {
        let s = (p + q) as u64;
        match *self {
            SepFn::Offset { extra } => s + 1 + extra,
            SepFn::Scaled { factor, extra } => factor.max(1) * s + 1 + extra,
        }
    }

    /// `max_{p, q <= count} sep(p, q)`.
    pub fn max_required(&self, count: usize) -> u64 {
        self.required(count, count)
    }
}

impl fmt::Display for SepFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SepFn::Offset { extra } => write!(f, "offset:{extra}"),
            SepFn::Scaled { factor, extra } => write!(f, "scaled:{factor}:{extra}"),
        }
    }
}

impl FromStr for SepFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        Ok(match parts.as_slice() {
            ["offset", extra] => SepFn::Offset { extra: parse_u64(extra)? },
            ["scaled", factor, extra] => {
                let factor = parse_u64(factor)?;
                if factor == 0 {
                    return Err(Error::Parse("separation factor must be positive".into()));
                }
                SepFn::Scaled { factor, extra: parse_u64(extra)? }
            }
            _ => return Err(Error::Parse(format!("unknown separation function `{s}`"))),
        })
    }
}

impl Serialize for SepFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SepFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// How a family was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Blocks `[growth^k, 2 growth^k)`, `k >= first_block`, dealt round-robin.
    Block { growth: u64, first_block: u32 },
    /// Pruned `{K 2^p (2k + 1)}`.
    Lower { base: u64 },
    /// Supplied by the user.
    Explicit,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::Block { growth, first_block } => write!(f, "block:{growth}:{first_block}"),
            Construction::Lower { base } => write!(f, "lower:{base}"),
            Construction::Explicit => write!(f, "explicit"),
        }
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        Ok(match parts.as_slice() {
            ["block", growth, first] => Construction::Block {
                growth: parse_u64(growth)?,
                first_block: first.trim().parse().map_err(|e| Error::Parse(format!("`{first}`: {e}")))?,
            },
            ["lower", base] => Construction::Lower { base: parse_u64(base)? },
            ["explicit"] => Construction::Explicit,
            _ => return Err(Error::Parse(format!("unknown construction `{s}`"))),
        })
    }
}

impl Serialize for Construction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The sets `A_1, ..., A_P` (stored 0-based), all known up to `horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct HittingFamily {
    sets: Vec<IndexSet>,
    sep: SepFn,
    horizon: u64,
    construction: Construction,
}

impl HittingFamily {
    /// A user-supplied family; separation is not checked here (see
    /// [`check_separation`]).
    pub fn explicit(sets: Vec<IndexSet>, sep: SepFn, horizon: u64) -> Result<Self> {
        Self::assemble(sets, sep, horizon, Construction::Explicit)
    }

    pub(crate) fn assemble(sets: Vec<IndexSet>, sep: SepFn, horizon: u64, construction: Construction) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidParameter("a family needs at least one set".into()));
        }
        let sets = sets.iter().map(|s| s.with_horizon(horizon)).collect::<Result<Vec<_>>>()?;
        Ok(HittingFamily { sets, sep, horizon, construction })
    }

    /// Number of sets `P`.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `A_p` for `p = 1..=P`.
    pub fn set(&self, p: usize) -> &IndexSet {
        &self.sets[p - 1]
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn sep(&self) -> SepFn {
        self.sep
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// Largest element over all sets.
    pub fn max_element(&self) -> Option<u64> {
        self.sets.iter().filter_map(IndexSet::max).max()
    }

    /// The family with every set truncated to `horizon` (which may only shrink).
    pub fn truncated(&self, horizon: u64) -> Result<Self> {
        if horizon > self.horizon {
            return Err(Error::HorizonTooSmall {
                horizon: self.horizon,
                reason: format!("family requested up to {horizon}"),
            });
        }
        Self::assemble(self.sets.clone(), self.sep, horizon, self.construction)
    }

    /// Replaces `A_p`, keeping metadata; used by post-filters.
    pub fn with_set(&self, p: usize, set: IndexSet) -> Result<Self> {
        let mut sets = self.sets.clone();
        sets[p - 1] = set;
        Self::assemble(sets, self.sep, self.horizon, self.construction)
    }

    /// Ends `2 growth^k - 1` of the complete blocks dealt to `A_p`, for block
    /// families; empty otherwise.
    pub fn block_ends(&self, p: usize) -> Vec<u64> {
        let Construction::Block { growth, first_block } = self.construction else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut k = first_block as u64 + (p as u64 - 1);
        loop {
            let end = growth.checked_pow(k as u32).and_then(|b| b.checked_mul(2)).map(|e| e - 1);
            match end {
                Some(e) if e <= self.horizon => out.push(e),
                _ => break,
            }
            k += self.sets.len() as u64;
        }
        out
    }

    /// Header block followed by one `# set: p` section per set.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# kind: hitting_family\n");
        out.push_str(&format!("# sets: {}\n", self.sets.len()));
        out.push_str(&format!("# sep: {}\n", self.sep));
        out.push_str(&format!("# horizon: {}\n", self.horizon));
        out.push_str(&format!("# construction: {}\n", self.construction));
        for (i, set) in self.sets.iter().enumerate() {
            out.push_str(&format!("# set: {}\n", i + 1));
            for x in set.iter() {
                out.push_str(&format!("{x}\n"));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut count = None;
        let mut sep = None;
        let mut horizon = None;
        let mut construction = Construction::Explicit;
        let mut sets: Vec<Vec<u64>> = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some((key, value)) = parse_header(line) {
                match key {
                    "kind" if value == "hitting_family" => {}
                    "sets" => count = Some(parse_u64(value)? as usize),
                    "sep" => sep = Some(value.parse()?),
                    "horizon" => horizon = Some(parse_u64(value)?),
                    "construction" => construction = value.parse()?,
                    "set" => {
                        if parse_u64(value)? as usize != sets.len() + 1 {
                            return Err(Error::Parse(format!("set sections out of order at `{line}`")));
                        }
                        sets.push(Vec::new());
                    }
                    _ => return Err(Error::Parse(format!("unexpected header `{line}`"))),
                }
            } else {
                let current = sets.last_mut().ok_or_else(|| Error::Parse("element before first `# set:`".into()))?;
                current.push(parse_u64(line)?);
            }
        }
        let horizon = horizon.ok_or_else(|| Error::Parse("missing `# horizon:`".into()))?;
        if count.is_some_and(|c| c != sets.len()) {
            return Err(Error::Parse(format!("header announces {} sets, found {}", count.unwrap(), sets.len())));
        }
        let sets = sets.into_iter().map(|s| IndexSet::new(s, horizon)).collect::<Result<Vec<_>>>()?;
        Self::assemble(sets, sep.unwrap_or_default(), horizon, construction)
    }
}

/// A pair of elements closer than the separation function allows, normalised
/// so that `p < q`, or `p == q` and `n < m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SeparationViolation {
    pub p: usize,
    pub q: usize,
    pub n: u64,
    pub m: u64,
    pub gap: u64,
    pub required: u64,
}

impl fmt::Display for SeparationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A_{} contains {} and A_{} contains {}: gap {} below required {}",
            self.p, self.n, self.q, self.m, self.gap, self.required
        )
    }
}

/// Exhaustive separation check of `sets` (indexed from 1) up to their
/// horizons; returns the lexicographically first violation `(p, q, n, m)`.
pub fn check_separation_sets(sets: &[IndexSet], sep: SepFn) -> std::result::Result<(), SeparationViolation> {
    let mut labelled: Vec<(u64, usize)> =
        sets.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |n| (n, i + 1))).collect();
    labelled.sort_unstable();
    let window = sep.max_required(sets.len());
    let mut first: Option<SeparationViolation> = None;
    for (i, &(n, p)) in labelled.iter().enumerate() {
        for &(m, q) in labelled[i + 1..].iter().take_while(|(m, _)| m - n < window) {
            let required = sep.required(p, q);
            if m - n >= required {
                continue;
            }
            let v = if p <= q {
                SeparationViolation { p, q, n, m, gap: m - n, required }
            } else {
                SeparationViolation { p: q, q: p, n: m, m: n, gap: m - n, required }
            };
            if first.is_none_or(|f| v < f) {
                first = Some(v);
            }
        }
    }
    first.map_or(Ok(()), Err)
}

/// [`check_separation_sets`] on a family with its own separation function.
pub fn check_separation(family: &HittingFamily) -> std::result::Result<(), SeparationViolation> {
    check_separation_sets(family.sets(), family.sep())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(elements: &[u64], horizon: u64) -> IndexSet {
        IndexSet::new(elements.to_vec(), horizon).unwrap()
    }

    #[test]
    fn sep_fn_values_and_text() {
        let s = SepFn::for_schedule(1.0 / 9216.0);
        assert_eq!(s, SepFn::Offset { extra: 14 });
        assert_eq!(s.required(1, 2), 18);
        assert_eq!(SepFn::Scaled { factor: 2, extra: 1 }.required(1, 1), 6);
        for s in [SepFn::Offset { extra: 3 }, SepFn::Scaled { factor: 3, extra: 0 }] {
            assert_eq!(s.to_string().parse::<SepFn>().unwrap(), s);
        }
        assert!("scaled:0:1".parse::<SepFn>().is_err());
        assert_eq!(SepFn::for_schedule(1.0 / 12.0), SepFn::Offset { extra: 4 });
    }

    #[test]
    fn separation_examples() {
        let sep = SepFn::default();
        let ok = [set(&[10, 20], 30), set(&[15], 30)];
        assert_eq!(check_separation_sets(&ok, sep), Ok(()));
        let bad = [set(&[10, 20], 30), set(&[12], 30)];
        let v = check_separation_sets(&bad, sep).unwrap_err();
        assert_eq!((v.p, v.q, v.n, v.m, v.gap, v.required), (1, 2, 10, 12, 2, 4));
        assert_eq!(check_separation_sets(&[set(&[0], 0)], sep), Ok(()));
    }

    #[test]
    fn separation_reports_the_lexicographically_first_violation() {
        let sep = SepFn::default();
        // (2,2,...) pair at 40/41 is found first in the sweep but (1,2,...) wins
        let sets = [set(&[100], 200), set(&[40, 41, 102], 200)];
        let v = check_separation_sets(&sets, sep).unwrap_err();
        assert_eq!((v.p, v.q, v.n, v.m), (1, 2, 100, 102));
        // shared element: gap zero
        let sets = [set(&[7], 10), set(&[7], 10)];
        assert_eq!(check_separation_sets(&sets, sep).unwrap_err().gap, 0);
        // within one set
        let v = check_separation_sets(&[set(&[5, 7], 10)], sep).unwrap_err();
        assert_eq!((v.p, v.q, v.n, v.m, v.required), (1, 1, 5, 7, 3));
    }

    #[test]
    fn family_text_round_trip() {
        let f = HittingFamily::explicit(vec![set(&[10, 20], 30), set(&[15], 30)], SepFn::Offset { extra: 2 }, 30)
            .unwrap();
        let text = f.to_text();
        assert!(text.starts_with(
            "# kind: hitting_family\n# sets: 2\n# sep: offset:2\n# horizon: 30\n# construction: explicit\n# set: 1\n10\n20\n"
        ));
        assert_eq!(HittingFamily::from_text(&text).unwrap(), f);
        assert!(HittingFamily::from_text("# horizon: 3\n1\n").is_err());
    }

    #[test]
    fn construction_text_round_trip() {
        for c in [Construction::Block { growth: 4, first_block: 2 }, Construction::Lower { base: 16 }, Construction::Explicit] {
            assert_eq!(c.to_string().parse::<Construction>().unwrap(), c);
        }
    }
}
