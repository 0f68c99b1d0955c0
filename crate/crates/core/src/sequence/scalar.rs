use std::cmp::Ordering;
use std::fmt;

use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::weights::WeightRule;

/// Coefficient field used by the shift and conjugacy operations.
///
/// Three implementations are provided: `f64` for everyday work,
/// [`BigRational`] for exact small-window oracles, and [`LogScalar`] for
/// quantities whose modulus leaves the range of a double.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    /// Division; `rhs` must be non-zero.
    fn over(&self, rhs: &Self) -> Self;
    /// `ln |self|`, `-inf` for zero.
    fn ln_abs(&self) -> f64;
    fn to_f64(&self) -> f64;
    /// The weight `w_n` of `rule` in this field.
    fn weight(rule: &WeightRule, n: i64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn ln_abs(&self) -> f64 {
        self.abs().ln()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn weight(rule: &WeightRule, n: i64) -> Self {
        rule.eval(n)
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn ln_abs(&self) -> f64 {
        ratio_ln_abs(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn weight(rule: &WeightRule, n: i64) -> Self {
        rule.eval_exact(n)
    }
}

/// `ln |r|` computed so that `ratio_ln_abs(1/r) == -ratio_ln_abs(r)` bit for bit.
pub(crate) fn ratio_ln_abs(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        return f64::NEG_INFINITY;
    }
    let a = r.abs();
    if a >= <BigRational as One>::one() {
        big_ratio_ln(&a)
    } else {
        -big_ratio_ln(&a.recip())
    }
}

// ln of a positive rational >= 1 without overflowing through f64.
fn big_ratio_ln(a: &BigRational) -> f64 {
    if let Some(f) = ToPrimitive::to_f64(a).filter(|f| f.is_finite() && *f > 0.0) {
        return f.ln();
    }
    ln_bigint(a.numer()) - ln_bigint(a.denom())
}

fn ln_bigint(n: &num::BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return ToPrimitive::to_f64(n).unwrap().abs().ln();
    }
    let shift = bits - 64;
    let top = ToPrimitive::to_f64(&(n.abs() >> shift)).unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// A real number stored as a sign and the natural log of its modulus.
///
/// Zero is represented by `ln_abs == -inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScalar {
    pub negative: bool,
    pub ln_abs: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar { negative: false, ln_abs: f64::NEG_INFINITY };
    pub const ONE: LogScalar = LogScalar { negative: false, ln_abs: 0.0 };

    pub fn new(negative: bool, ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar { negative, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x < 0.0, x.abs().ln())
    }

    pub fn value(&self) -> f64 {
        let m = self.ln_abs.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn modulus(&self) -> f64 {
        self.ln_abs.exp()
    }

    pub fn recip(&self) -> Self {
        LogScalar { negative: self.negative, ln_abs: -self.ln_abs }
    }

    pub fn neg(&self) -> Self {
        if Scalar::is_zero(self) {
            *self
        } else {
            LogScalar { negative: !self.negative, ln_abs: self.ln_abs }
        }
    }

    /// Compares moduli.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        self.ln_abs.total_cmp(&other.ln_abs)
    }
}

impl fmt::Display for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}exp({})", if self.negative { "-" } else { "" }, self.ln_abs)
    }
}

impl Scalar for LogScalar {
    fn zero() -> Self {
        Self::ZERO
    }
    fn one() -> Self {
        Self::ONE
    }
    fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }
    fn plus(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return *rhs;
        }
        if rhs.is_zero() {
            return *self;
        }
        let (big, small) = if self.ln_abs >= rhs.ln_abs { (self, rhs) } else { (rhs, self) };
        let d = (small.ln_abs - big.ln_abs).exp();
        if big.negative == small.negative {
            LogScalar::new(big.negative, big.ln_abs + d.ln_1p())
        } else if d == 1.0 {
            Self::ZERO
        } else {
            LogScalar::new(big.negative, big.ln_abs + (-d).ln_1p())
        }
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.plus(&rhs.neg())
    }
    fn times(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        LogScalar::new(self.negative != rhs.negative, self.ln_abs + rhs.ln_abs)
    }
    fn over(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        LogScalar::new(self.negative != rhs.negative, self.ln_abs - rhs.ln_abs)
    }
    fn ln_abs(&self) -> f64 {
        self.ln_abs
    }
    fn to_f64(&self) -> f64 {
        self.value()
    }
    fn weight(rule: &WeightRule, n: i64) -> Self {
        rule.eval_log(n)
    }
}

/// Neumaier-compensated running sum; used for every log-domain prefix.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln(sum exp(x_i))`, ascending input order, `-inf` when empty.
pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}
