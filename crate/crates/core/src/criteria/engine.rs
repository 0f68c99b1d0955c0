//! Shared evaluation loop of the norm, product and unilateral forms.

use rayon::prelude::*;

use super::report::{Criterion, CriterionReport, Horizons, JMode, PairExtremum, TermKind, Verdict, Witness};
use super::EpsilonSchedule;
use crate::families::{check_separation, HittingFamily};
use crate::sequence::{Direction, VSequence, WeightRule};
use crate::{Error, Result};

/// Tuples whose log margin is smaller than this are counted as marginal.
pub const MARGINAL_LOG_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Form {
    /// Norm of the `v`-weighted sum; `exponent` is `None` for `c_0`.
    Norm { exponent: Option<f64> },
    /// Backward/forward weight products (the `c_0` split form).
    Products,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sides {
    /// Every `n != m`.
    Both,
    /// Only `n > m` (shifts on `N_0`).
    ForwardOnly,
}

pub(crate) struct Run<'a> {
    pub criterion: Criterion,
    pub space_label: String,
    pub form: Form,
    pub sides: Sides,
    pub w: &'a WeightRule,
    pub family: &'a HittingFamily,
    pub schedule: &'a EpsilonSchedule,
    pub horizons: Horizons,
    pub j_mode: JMode,
}

/// The largest term of one tuple.
struct TupleValue {
    /// Compared against `ln min(eps_p, eps_q)`; violation when `>=`.
    badness: f64,
    n: u64,
    term: TermKind,
    log_value: f64,
}

struct PairOutcome {
    extremum: PairExtremum,
    first_violation: Option<Witness>,
    marginal: u64,
}

/// `ln |v_k|` on `[-radius, radius]` as a flat array.
struct LogV {
    radius: i64,
    values: Vec<f64>,
}

impl LogV {
    fn new(v: &VSequence) -> Self {
        let radius = v.radius();
        LogV { radius, values: (-radius..=radius).map(|k| v.ln_abs(k)).collect() }
    }

    #[inline]
    fn at(&self, k: i64) -> f64 {
        self.values[(k + self.radius) as usize]
    }
}

/// Streaming `ln sum exp`.
#[derive(Clone, Copy)]
pub(crate) struct Lse {
    max: f64,
    sum: f64,
}

impl Lse {
    pub(crate) fn new() -> Self {
        Lse { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    pub(crate) fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Run<'_> {
    fn validate(&self) -> Result<()> {
        let h = self.family.horizon();
        if self.horizons.outer > h || self.horizons.inner > h {
            return Err(Error::HorizonTooSmall {
                horizon: h,
                reason: format!(
                    "family known up to {h}, criterion horizons are outer {} / inner {}",
                    self.horizons.outer, self.horizons.inner
                ),
            });
        }
        if self.schedule.len() < self.family.len() {
            return Err(Error::InvalidParameter(format!(
                "schedule has {} entries for {} sets",
                self.schedule.len(),
                self.family.len()
            )));
        }
        if self.j_mode == JMode::Zero {
            self.w.require_invertible()?;
        }
        if let Form::Norm { exponent: Some(r) } = self.form {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!("norm exponent {r} outside [1, inf)")));
            }
        }
        check_separation(self.family).map_err(Error::Separation)
    }

    pub(crate) fn execute(&self) -> Result<CriterionReport> {
        self.validate()?;
        let count = self.family.len();
        let radius = self.horizons.outer.max(self.horizons.inner) + count as u64 + 1;
        let v = VSequence::new(self.w, radius);
        let lv = LogV::new(&v);
        let pairs: Vec<(usize, usize)> = (1..=count).flat_map(|p| (1..=count).map(move |q| (p, q))).collect();
        let ln_m = self
            .w
            .is_invertible()
            .then(|| self.w.two_sided_operator_bound().ln().max(0.0));
        let mut outcomes: Vec<PairOutcome> = pairs.par_iter().map(|&(p, q)| self.evaluate_pair(&v, &lv, p, q)).collect();
        outcomes.par_iter_mut().for_each(|o| {
            o.extremum.tail_log_bound = self.tail_bound(&v, o.extremum.p, o.extremum.q, ln_m);
        });

        let verdict = match outcomes.iter().find_map(|o| o.first_violation) {
            Some(witness) => Verdict::Violated { witness },
            None => self.tail_verdict(&outcomes),
        };
        Ok(CriterionReport {
            criterion: self.criterion,
            space: self.space_label.clone(),
            j_mode: self.j_mode,
            sets: count,
            horizons: self.horizons,
            schedule: self.schedule.truncated(count)?,
            verdict,
            tuples_checked: outcomes.iter().map(|o| o.extremum.tuples).sum(),
            marginal_tuples: outcomes.iter().map(|o| o.marginal).sum(),
            pairs: outcomes.into_iter().map(|o| o.extremum).collect(),
        })
    }

    fn tail_verdict(&self, outcomes: &[PairOutcome]) -> Verdict {
        for o in outcomes {
            let e = &o.extremum;
            let Some(tail) = e.tail_log_bound else {
                return Verdict::InconclusiveTail {
                    reason: format!("weight rule `{}` gives no tail certificate (pair p={}, q={})", self.w, e.p, e.q),
                };
            };
            let combined = match self.form {
                Form::Norm { exponent: Some(r) } => {
                    let mut s = Lse::new();
                    s.add(r * e.max_log_value.unwrap_or(f64::NEG_INFINITY));
                    s.add(r * tail);
                    s.value() / r
                }
                _ => tail.max(e.max_log_value.unwrap_or(f64::NEG_INFINITY)),
            };
            if combined >= e.log_threshold {
                return Verdict::InconclusiveTail {
                    reason: format!(
                        "omitted terms beyond the inner horizon may reach {:e} >= {:e} (pair p={}, q={})",
                        combined.exp(),
                        e.log_threshold.exp(),
                        e.p,
                        e.q
                    ),
                };
            }
        }
        Verdict::SatisfiedToHorizon
    }

    fn evaluate_pair(&self, v: &VSequence, lv: &LogV, p: usize, q: usize) -> PairOutcome {
        let ap = self.family.set(p).range(0, self.horizons.inner);
        let aq = self.family.set(q).range(0, self.horizons.outer);
        let threshold = self.schedule.ln_min(p, q);
        let mut extremum = PairExtremum {
            p,
            q,
            tuples: 0,
            log_threshold: threshold,
            max_log_value: None,
            argmax: None,
            tail_log_bound: None,
            violations: 0,
        };
        let mut first_violation = None;
        let mut marginal = 0;
        for &m in aq {
            for j in self.j_mode.range(p) {
                extremum.tuples += 1;
                let Some(t) = self.tuple_value(v, lv, ap, m, j) else { continue };
                if (threshold - t.badness).abs() < MARGINAL_LOG_MARGIN {
                    marginal += 1;
                }
                if t.badness >= threshold {
                    extremum.violations += 1;
                    if first_violation.is_none() {
                        let log_bound = if t.term == TermKind::ForwardProduct { -threshold } else { threshold };
                        first_violation =
                            Some(Witness { p, q, m, n: t.n, j, term: t.term, log_value: t.log_value, log_bound });
                    }
                }
                if extremum.max_log_value.is_none_or(|b| t.badness > b) {
                    extremum.max_log_value = Some(t.badness);
                    extremum.argmax = Some((m, j, t.n));
                }
            }
        }
        PairOutcome { extremum, first_violation, marginal }
    }

    fn tuple_value(&self, v: &VSequence, lv: &LogV, ap: &[u64], m: u64, j: i64) -> Option<TupleValue> {
        let forward_only = self.sides == Sides::ForwardOnly;
        let terms = ap.iter().filter(|&&n| n != m && (!forward_only || n > m)).map(|&n| (n, n as i64 - m as i64 + j));
        match self.form {
            Form::Norm { exponent: None } => {
                let mut best: Option<(f64, u64)> = None;
                for (n, k) in terms {
                    let l = lv.at(k);
                    if best.is_none_or(|(b, _)| l > b) {
                        best = Some((l, n));
                    }
                }
                best.map(|(l, n)| TupleValue { badness: l, n, term: TermKind::Norm, log_value: l })
            }
            Form::Norm { exponent: Some(r) } => {
                let mut sum = Lse::new();
                let mut best: Option<(f64, u64)> = None;
                for (n, k) in terms {
                    let l = lv.at(k);
                    sum.add(r * l);
                    if best.is_none_or(|(b, _)| l > b) {
                        best = Some((l, n));
                    }
                }
                let value = sum.value() / r;
                best.map(|(_, n)| TupleValue { badness: value, n, term: TermKind::Norm, log_value: value })
            }
            Form::Products => {
                let mut best: Option<TupleValue> = None;
                for (n, k) in terms {
                    let (term, log_value, badness) = if n < m {
                        let l = v.product(k + 1, 0).expect("index inside window").ln_abs;
                        (TermKind::BackwardProduct, l, l)
                    } else {
                        let l = v.product(1, k).expect("index inside window").ln_abs;
                        (TermKind::ForwardProduct, l, -l)
                    };
                    if best.as_ref().is_none_or(|b| badness > b.badness) {
                        best = Some(TupleValue { badness, n, term, log_value });
                    }
                }
                best
            }
        }
    }

    /// Bound (log norm units) on the terms with `n > inner`.
    ///
    /// Those satisfy `n - m >= D = max(inner + 1 - outer, sep(p, q))` by
    /// separation, so their indices are `>= D - p` (full), `>= D` (zero,
    /// unilateral). For invertible weights the full mode also admits
    /// `p ln M + S(D)` with `M = max(||B_w||, ||B_w^{-1}||)`. Bilateral
    /// bounds take both directions, which makes them invariant under
    /// reflection of the weight.
    fn tail_bound(&self, v: &VSequence, p: usize, q: usize, ln_m: Option<f64>) -> Option<f64> {
        let d = (self.horizons.inner as i64 + 1 - self.horizons.outer as i64)
            .max(self.family.sep().required(p, q) as i64);
        let s = |k: i64| self.side_tail(v, k.max(1));
        match self.j_mode {
            JMode::Zero | JMode::Unilateral => s(d),
            JMode::Full => {
                let shifted = s(d - p as i64);
                let inflated = ln_m.and_then(|lm| s(d).map(|t| t + p as f64 * lm));
                match (shifted, inflated) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    fn side_tail(&self, v: &VSequence, from: i64) -> Option<f64> {
        let both = self.sides == Sides::Both;
        match self.form {
            Form::Norm { exponent: Some(r) } => {
                let mut s = Lse::new();
                s.add(v.tail_log_power_sum(Direction::Forward, from, r)?);
                if both {
                    s.add(v.tail_log_power_sum(Direction::Backward, from, r)?);
                }
                Some(s.value() / r)
            }
            _ => {
                let f = v.tail_log_sup(Direction::Forward, from)?;
                if both {
                    Some(f.max(v.tail_log_sup(Direction::Backward, from)?))
                } else {
                    Some(f)
                }
            }
        }
    }
}
