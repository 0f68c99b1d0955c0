use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EpsilonSchedule;
use crate::{Error, Result};

/// Which shifts `j` of the tuple `(p, q, m, j)` are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JMode {
    /// `j = -p..=p`
    Full,
    /// `j = 0`; sufficient when the shift is invertible.
    Zero,
    /// `j = 0..=p`, for shifts on `N_0`.
    Unilateral,
}

impl JMode {
    pub fn range(&self, p: usize) -> std::ops::RangeInclusive<i64> {
        let p = p as i64;
        match self {
            JMode::Full => -p..=p,
            JMode::Zero => 0..=0,
            JMode::Unilateral => 0..=p,
        }
    }
}

impl fmt::Display for JMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JMode::Full => "full",
            JMode::Zero => "zero",
            JMode::Unilateral => "unilateral",
        })
    }
}

impl FromStr for JMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(JMode::Full),
            "zero" => Ok(JMode::Zero),
            "unilateral" => Ok(JMode::Unilateral),
            _ => Err(Error::Parse(format!("unknown j mode `{s}`"))),
        }
    }
}

/// `m` ranges over `A_q ∩ [0, outer]`, `n` over `A_p ∩ [0, inner]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizons {
    pub outer: u64,
    pub inner: u64,
}

impl Horizons {
    pub fn new(outer: u64, inner: u64) -> Self {
        Horizons { outer, inner }
    }

    /// The same horizon for `m` and `n`.
    pub fn uniform(horizon: u64) -> Self {
        Horizons { outer: horizon, inner: horizon }
    }
}

/// Which quantity a witness value refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// Norm of the `v`-weighted sum; violated when `>= bound`.
    Norm,
    /// `prod_{nu=n-m+j+1}^{0} |w_nu|` for `n < m`; violated when `>= bound`.
    BackwardProduct,
    /// `prod_{nu=1}^{n-m+j} |w_nu|` for `n > m`; violated when `<= bound`.
    ForwardProduct,
}

/// The first failing tuple in the order `p, q, m, j`, with the largest term
/// `n` (first in ascending order on ties).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub p: usize,
    pub q: usize,
    pub m: u64,
    pub n: u64,
    pub j: i64,
    pub term: TermKind,
    /// Natural log of the offending value.
    pub log_value: f64,
    /// Natural log of the bound it should respect.
    pub log_bound: f64,
}

impl Witness {
    /// `(p, q, m, n, j)`, the part shared by all criterion forms.
    pub fn tuple(&self) -> (usize, usize, u64, u64, i64) {
        (self.p, self.q, self.m, self.n, self.j)
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    pub fn bound(&self) -> f64 {
        self.log_bound.exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// Every tuple up to the horizons passes and the omitted tail is bounded.
    SatisfiedToHorizon,
    Violated { witness: Witness },
    /// Every tuple passes but the omitted tail could not be bounded.
    InconclusiveTail { reason: String },
}

impl Verdict {
    /// CLI exit status: 0 satisfied, 1 violated, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::SatisfiedToHorizon => 0,
            Verdict::Violated { .. } => 1,
            Verdict::InconclusiveTail { .. } => 2,
        }
    }

    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::SatisfiedToHorizon)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Violated { witness } => Some(witness),
            _ => None,
        }
    }

    /// Same outcome class, ignoring witnesses and reasons.
    pub fn same_kind(&self, other: &Verdict) -> bool {
        self.exit_code() == other.exit_code()
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::SatisfiedToHorizon => "satisfied_to_horizon",
            Verdict::Violated { .. } => "violated",
            Verdict::InconclusiveTail { .. } => "inconclusive_tail",
        }
    }
}

/// Extremes of one `(p, q)` pair over all its tuples, in log domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairExtremum {
    pub p: usize,
    pub q: usize,
    pub tuples: u64,
    /// `ln min(eps_p, eps_q)`.
    pub log_threshold: f64,
    /// Largest tuple value (`None` when no tuple had any term).
    pub max_log_value: Option<f64>,
    /// `(m, j, n)` of the largest value.
    pub argmax: Option<(u64, i64, u64)>,
    /// Bound on what the omitted `n > inner` could add, when certified.
    pub tail_log_bound: Option<f64>,
    pub violations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    NormForm,
    C0Products,
    Unilateral,
}

/// Outcome of a finite-horizon criterion check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub space: String,
    pub j_mode: JMode,
    pub sets: usize,
    pub horizons: Horizons,
    pub schedule: EpsilonSchedule,
    pub verdict: Verdict,
    pub tuples_checked: u64,
    /// Tuples whose log margin is below `1e-9` in modulus.
    pub marginal_tuples: u64,
    pub pairs: Vec<PairExtremum>,
}

#[derive(Serialize)]
struct PairRow {
    p: usize,
    q: usize,
    tuples: u64,
    log_threshold: f64,
    max_log_value: Option<f64>,
    arg_m: Option<u64>,
    arg_j: Option<i64>,
    arg_n: Option<u64>,
    tail_log_bound: Option<f64>,
    violations: u64,
}

impl CriterionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One row per `(p, q)` pair.
    pub fn write_pairs_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for e in &self.pairs {
            w.serialize(PairRow {
                p: e.p,
                q: e.q,
                tuples: e.tuples,
                log_threshold: e.log_threshold,
                max_log_value: e.max_log_value,
                arg_m: e.argmax.map(|a| a.0),
                arg_j: e.argmax.map(|a| a.1),
                arg_n: e.argmax.map(|a| a.2),
                tail_log_bound: e.tail_log_bound,
                violations: e.violations,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn pairs_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_pairs_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
