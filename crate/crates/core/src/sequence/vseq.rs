//! The conjugating sequence `v` and log-domain weight products.
//!
//! `v_0 = 1`, `v_n = 1/(w_1 ... w_n)` for `n > 0` and `v_n = w_{n+1} ... w_0`
//! for `n < 0`, so that `v_n = w_{n+1} v_{n+1}` everywhere. Products of
//! weights over any interval are quotients of two `v` values.

use num::{BigRational, One};

use super::scalar::{log_sum_exp, CompensatedSum, LogScalar, Scalar};
use super::weights::{Direction, WeightRule};
use crate::{Error, Result};

/// Cached `v` on an explicit window `[-radius, radius]`, log domain.
///
/// Reads outside the window are errors; [`VSequence::extend`] grows the
/// cache. Prefix sums of `ln |w_n|` use compensated summation in ascending
/// `|n|` order, which keeps the recurrence exact to a few ulps of the
/// log-modulus even at radius `10^6`.
#[derive(Clone, Debug)]
pub struct VSequence {
    rule: WeightRule,
    /// `v_k` for `k = 0..=radius`.
    pos: Vec<LogScalar>,
    /// `v_{-k}` for `k = 0..=radius`.
    neg: Vec<LogScalar>,
    pos_acc: Accumulator,
    neg_acc: Accumulator,
}

#[derive(Clone, Copy, Debug, Default)]
struct Accumulator {
    sum: CompensatedSum,
    negative: bool,
}

impl Accumulator {
    fn push(&mut self, w: LogScalar) {
        self.sum.add(w.ln_abs);
        self.negative ^= w.negative;
    }
}

const MAX_TAIL_SCAN: i64 = 10_000_000;

impl VSequence {
    pub fn new(rule: &WeightRule, radius: u64) -> Self {
        let mut v = VSequence {
            rule: rule.clone(),
            pos: vec![LogScalar::ONE],
            neg: vec![LogScalar::ONE],
            pos_acc: Accumulator::default(),
            neg_acc: Accumulator::default(),
        };
        v.extend(radius);
        v
    }

    /// Grows the window to `[-radius, radius]` (never shrinks).
    pub fn extend(&mut self, radius: u64) {
        let radius = radius as usize;
        self.pos.reserve(radius.saturating_sub(self.radius() as usize));
        self.neg.reserve(radius.saturating_sub(self.radius() as usize));
        while self.pos.len() <= radius {
            let k = self.pos.len() as i64;
            self.pos_acc.push(self.rule.eval_log(k));
            self.pos.push(LogScalar::new(self.pos_acc.negative, -self.pos_acc.sum.value()));
            self.neg_acc.push(self.rule.eval_log(1 - k));
            self.neg.push(LogScalar::new(self.neg_acc.negative, self.neg_acc.sum.value()));
        }
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    pub fn radius(&self) -> i64 {
        (self.pos.len() - 1) as i64
    }

    pub fn contains(&self, n: i64) -> bool {
        n.abs() <= self.radius()
    }

    fn window_error(&self, n: i64) -> Error {
        Error::OutOfWindow { index: n, lo: -self.radius(), hi: self.radius() }
    }

    /// `v_n`, or an error outside the cached window.
    pub fn v_at(&self, n: i64) -> Result<LogScalar> {
        if self.contains(n) {
            Ok(self.get(n))
        } else {
            Err(self.window_error(n))
        }
    }

    /// `v_n` without the window check; panics outside the window.
    #[inline]
    pub fn get(&self, n: i64) -> LogScalar {
        if n >= 0 {
            self.pos[n as usize]
        } else {
            self.neg[(-n) as usize]
        }
    }

    /// `ln |v_n|`; panics outside the window.
    #[inline]
    pub fn ln_abs(&self, n: i64) -> f64 {
        self.get(n).ln_abs
    }

    /// `prod_{nu=a}^{b} w_nu` (empty product is one) from cached values.
    pub fn product(&self, a: i64, b: i64) -> Result<LogScalar> {
        if a > b {
            return Ok(LogScalar::ONE);
        }
        Ok(self.v_at(a - 1)?.over(&self.v_at(b)?))
    }

    /// `v_n` for any `n`, continuing the prefix sums past the window
    /// without caching.
    pub fn walk(&self, n: i64) -> LogScalar {
        if self.contains(n) {
            return self.get(n);
        }
        let r = self.radius();
        if n > 0 {
            let mut acc = self.pos_acc;
            for k in r + 1..=n {
                acc.push(self.rule.eval_log(k));
            }
            LogScalar::new(acc.negative, -acc.sum.value())
        } else {
            let mut acc = self.neg_acc;
            for k in r + 1..=-n {
                acc.push(self.rule.eval_log(1 - k));
            }
            LogScalar::new(acc.negative, acc.sum.value())
        }
    }

    fn tail_profile(&self, direction: Direction, from: i64) -> Option<TailProfile> {
        let (start, period) = self.rule.periodic_tail(direction)?;
        let at = |k: i64| match direction {
            Direction::Forward => self.walk(k).ln_abs,
            Direction::Backward => self.walk(-k).ln_abs,
        };
        // distance from the origin at which periodic stepping becomes valid
        let first_periodic = match direction {
            Direction::Forward => from.max(start),
            Direction::Backward => from.max(start.saturating_neg()),
        };
        if first_periodic - from > MAX_TAIL_SCAN {
            return None;
        }
        let explicit: Vec<f64> = (from..first_periodic).map(at).collect();
        let cycle: Vec<f64> = (first_periodic..first_periodic + period as i64).map(at).collect();
        let decay = at(first_periodic) - at(first_periodic + period as i64);
        Some(TailProfile { explicit, cycle, decay })
    }

    /// `ln sup |v_k|` over `k >= from` (forward) or `k <= -from`
    /// (backward). `None` when the rule gives no periodic tail;
    /// `+inf` when the tail grows.
    pub fn tail_log_sup(&self, direction: Direction, from: i64) -> Option<f64> {
        let t = self.tail_profile(direction, from)?;
        if t.decay < 0.0 {
            return Some(f64::INFINITY);
        }
        Some(t.explicit.iter().chain(&t.cycle).copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// `ln sum |v_k|^r` over the same tail as [`VSequence::tail_log_sup`];
    /// `+inf` unless the tail decays geometrically.
    pub fn tail_log_power_sum(&self, direction: Direction, from: i64, r: f64) -> Option<f64> {
        let t = self.tail_profile(direction, from)?;
        if t.decay <= 0.0 {
            return Some(f64::INFINITY);
        }
        let explicit = log_sum_exp(t.explicit.iter().map(|l| r * l));
        // geometric series over whole periods: 1 / (1 - e^{-r D})
        let periodic = log_sum_exp(t.cycle.iter().map(|l| r * l)) - (-(-r * t.decay).exp_m1()).ln();
        Some(log_sum_exp([explicit, periodic]))
    }
}

struct TailProfile {
    explicit: Vec<f64>,
    cycle: Vec<f64>,
    /// `ln|v|` lost over one period; positive when the tail decays.
    decay: f64,
}

/// `prod_{nu=a}^{b} w_nu` by direct compensated summation (empty product is one).
pub fn weight_product(rule: &WeightRule, a: i64, b: i64) -> LogScalar {
    let mut acc = Accumulator::default();
    for nu in a..=b {
        acc.push(rule.eval_log(nu));
    }
    LogScalar::new(acc.negative, acc.sum.value())
}

/// Exact `prod_{nu=a}^{b} w_nu`.
pub fn weight_product_exact(rule: &WeightRule, a: i64, b: i64) -> BigRational {
    (a..=b).map(|nu| rule.eval_exact(nu)).fold(<BigRational as One>::one(), |acc, w| acc * w)
}

/// Exact `v_n`.
pub fn v_at_exact(rule: &WeightRule, n: i64) -> BigRational {
    match n {
        0 => <BigRational as One>::one(),
        n if n > 0 => weight_product_exact(rule, 1, n).recip(),
        n => weight_product_exact(rule, n + 1, 0),
    }
}

/// `v_n` in any scalar field (direct product, small `|n|`).
pub fn v_at_scalar<S: Scalar>(rule: &WeightRule, n: i64) -> S {
    if n >= 0 {
        let p = (1..=n).fold(S::one(), |acc, nu| acc.times(&S::weight(rule, nu)));
        S::one().over(&p)
    } else {
        (n + 1..=0).fold(S::one(), |acc, nu| acc.times(&S::weight(rule, nu)))
    }
}
