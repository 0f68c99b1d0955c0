//! Weight sequences `w : Z -> nonzero scalars` with analytically declared bounds.
//!
//! Rules are built from a small set of descriptors (constant, two-sided,
//! periodic, table with default, pointwise product) or from a user supplied
//! [`WeightFn`]. Every descriptor carries exact rational parameters so the
//! same rule can be evaluated in floating point, in the log domain and in
//! exact arithmetic. The bounds `inf |w_n|` and `sup |w_n|` are derived from
//! the descriptor, never sampled.
//!
//! # Text format
//!
//! A rule serializes to a TOML table tagged by `kind`:
//!
//! ```toml
//! kind = "two_sided"
//! positive = "2"      # w_n for n >= 1
//! negative = "1/2"    # w_n for n <= 0
//! ```
//!
//! | kind        | fields                                                       |
//! |-------------|--------------------------------------------------------------|
//! | `constant`  | `value`                                                      |
//! | `two_sided` | `positive` (n >= 1), `negative` (n <= 0)                     |
//! | `periodic`  | `values` (w_n = values[n mod L])                             |
//! | `table`     | `entries = [{index, value}]`, `default` (nested rule), optional `inf_abs`, `sup_abs` |
//! | `product`   | `factors` (list of nested rules, pointwise product)          |
//!
//! Parameters are strings holding an integer (`"-3"`), a fraction (`"1/3"`)
//! or a decimal (`"0.25"`, `"1.5e-3"`); plain TOML numbers are accepted too.
//! Table bounds may only loosen the analytic ones; `inf_abs = 0` declares a
//! non-invertible rule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::scalar::{ratio_ln_abs, LogScalar, Scalar};
use crate::{Error, Result};

/// Exact rational parameter with a cached double and log-modulus.
#[derive(Clone)]
pub struct Param {
    exact: BigRational,
    approx: f64,
    log: LogScalar,
}

impl Param {
    pub fn new(exact: BigRational) -> Self {
        let approx = ToPrimitive::to_f64(&exact).unwrap_or(f64::NAN);
        let log = LogScalar::new(exact.is_negative(), ratio_ln_abs(&exact));
        Param { exact, approx, log }
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Param::new(BigRational::new(numer.into(), denom.into()))
    }

    /// Exact value of a double (its binary expansion).
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Param::new)
            .ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.approx
    }

    pub fn log(&self) -> LogScalar {
        self.log
    }

    pub fn is_zero(&self) -> bool {
        Zero::is_zero(&self.exact)
    }

    pub fn recip(&self) -> Self {
        Param::new(self.exact.recip())
    }
}

impl PartialEq for Param {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl fmt::Debug for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact.denom().is_one() {
            write!(f, "{}", self.exact.numer())
        } else {
            write!(f, "{}/{}", self.exact.numer(), self.exact.denom())
        }
    }
}

impl From<i64> for Param {
    fn from(n: i64) -> Self {
        Param::new(BigRational::from_integer(n.into()))
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s.trim()).map(Param::new)
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("cannot parse {s:?} as a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidParameter(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let all = all / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -r } else { r })
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Float(f64),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse(),
            Raw::Int(n) => Ok(Param::from(n)),
            Raw::Float(x) => format!("{x}").parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub index: i64,
    pub value: Param,
}

/// Serializable descriptor of a weight rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        value: Param,
    },
    TwoSided {
        positive: Param,
        negative: Param,
    },
    Periodic {
        values: Vec<Param>,
    },
    Table {
        entries: Vec<TableEntry>,
        default: Box<WeightSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inf_abs: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup_abs: Option<f64>,
    },
    Product {
        factors: Vec<WeightSpec>,
    },
}

impl WeightSpec {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("weight specs always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// User supplied weight sequence. Bounds must be declared analytically.
pub trait WeightFn: Send + Sync {
    fn weight(&self, n: i64) -> BigRational;
    fn inf_abs(&self) -> f64;
    fn sup_abs(&self) -> f64;
    fn describe(&self) -> String;
    /// See [`WeightRule::periodic_tail`]; `None` disables tail certificates.
    fn periodic_tail(&self, _direction: Direction) -> Option<(i64, u64)> {
        None
    }
}

struct Reflected(Arc<dyn WeightFn>);

impl WeightFn for Reflected {
    fn weight(&self, n: i64) -> BigRational {
        self.0.weight(1 - n).recip()
    }
    fn inf_abs(&self) -> f64 {
        1.0 / self.0.sup_abs()
    }
    fn sup_abs(&self) -> f64 {
        1.0 / self.0.inf_abs()
    }
    fn describe(&self) -> String {
        format!("reflect({})", self.0.describe())
    }
    fn periodic_tail(&self, direction: Direction) -> Option<(i64, u64)> {
        self.0.periodic_tail(direction.opposite()).map(|(s, l)| (1 - s, l))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

enum Kind {
    Constant(Param),
    TwoSided { positive: Param, negative: Param },
    Periodic(Vec<Param>),
    Table {
        entries: BTreeMap<i64, Param>,
        default: WeightRule,
        declared_inf: Option<f64>,
        declared_sup: Option<f64>,
    },
    Product(Vec<WeightRule>),
    Custom { f: Arc<dyn WeightFn>, reflected_from: Option<Arc<dyn WeightFn>> },
}

struct Node {
    kind: Kind,
    inf_abs: f64,
    sup_abs: f64,
}

/// An evaluable weight sequence with declared bounds. Cheap to clone.
#[derive(Clone)]
pub struct WeightRule(Arc<Node>);

const MAX_TAIL_PERIOD: u64 = 1 << 20;

impl WeightRule {
    fn build(kind: Kind, inf_abs: f64, sup_abs: f64) -> Self {
        WeightRule(Arc::new(Node { kind, inf_abs, sup_abs }))
    }

    fn check_nonzero(p: &Param) -> Result<()> {
        if p.is_zero() {
            Err(Error::InvalidWeight("weights must be non-zero".into()))
        } else {
            Ok(())
        }
    }

    pub fn constant(value: Param) -> Result<Self> {
        Self::check_nonzero(&value)?;
        let a = value.value().abs();
        Ok(Self::build(Kind::Constant(value), a, a))
    }

    /// `w_n = positive` for `n >= 1` and `w_n = negative` for `n <= 0`.
    pub fn two_sided(positive: Param, negative: Param) -> Result<Self> {
        Self::check_nonzero(&positive)?;
        Self::check_nonzero(&negative)?;
        let (a, b) = (positive.value().abs(), negative.value().abs());
        Ok(Self::build(Kind::TwoSided { positive, negative }, a.min(b), a.max(b)))
    }

    /// `w_n = values[n mod L]` (Euclidean remainder).
    pub fn periodic(values: Vec<Param>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeight("periodic rule needs at least one value".into()));
        }
        values.iter().try_for_each(Self::check_nonzero)?;
        let (inf, sup) = abs_range(values.iter());
        Ok(Self::build(Kind::Periodic(values), inf, sup))
    }

    pub fn table(entries: Vec<(i64, Param)>, default: WeightRule) -> Result<Self> {
        Self::table_with_bounds(entries, default, None, None)
    }

    /// Table rule with optional declared bounds; declarations may only
    /// loosen the analytic bounds.
    pub fn table_with_bounds(
        entries: Vec<(i64, Param)>,
        default: WeightRule,
        declared_inf: Option<f64>,
        declared_sup: Option<f64>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, v) in entries {
            Self::check_nonzero(&v)?;
            if map.insert(i, v).is_some() {
                return Err(Error::InvalidWeight(format!("duplicate table index {i}")));
            }
        }
        let (mut inf, mut sup) = abs_range(map.values());
        inf = inf.min(default.inf_abs());
        sup = sup.max(default.sup_abs());
        if let Some(d) = declared_inf {
            if !(d >= 0.0 && d <= inf) {
                return Err(Error::InvalidWeight(format!(
                    "declared inf_abs {d} is not a valid lower bound (analytic bound {inf})"
                )));
            }
            inf = d;
        }
        if let Some(d) = declared_sup {
            if d.is_nan() || d < sup {
                return Err(Error::InvalidWeight(format!(
                    "declared sup_abs {d} is not a valid upper bound (analytic bound {sup})"
                )));
            }
            sup = d;
        }
        Ok(Self::build(Kind::Table { entries: map, default, declared_inf, declared_sup }, inf, sup))
    }

    /// Pointwise product of rules.
    pub fn product(factors: Vec<WeightRule>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidWeight("product needs at least one factor".into()));
        }
        let inf = factors.iter().map(|f| f.inf_abs()).product();
        let sup = factors.iter().map(|f| f.sup_abs()).product();
        Ok(Self::build(Kind::Product(factors), inf, sup))
    }

    pub fn custom(f: Arc<dyn WeightFn>) -> Result<Self> {
        let (inf, sup) = (f.inf_abs(), f.sup_abs());
        if !(inf >= 0.0 && sup >= inf && sup > 0.0) {
            return Err(Error::InvalidWeight(format!("custom rule declares invalid bounds [{inf}, {sup}]")));
        }
        Ok(Self::build(Kind::Custom { f, reflected_from: None }, inf, sup))
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        match spec {
            WeightSpec::Constant { value } => Self::constant(value.clone()),
            WeightSpec::TwoSided { positive, negative } => Self::two_sided(positive.clone(), negative.clone()),
            WeightSpec::Periodic { values } => Self::periodic(values.clone()),
            WeightSpec::Table { entries, default, inf_abs, sup_abs } => Self::table_with_bounds(
                entries.iter().map(|e| (e.index, e.value.clone())).collect(),
                Self::from_spec(default)?,
                *inf_abs,
                *sup_abs,
            ),
            WeightSpec::Product { factors } => {
                Self::product(factors.iter().map(Self::from_spec).collect::<Result<_>>()?)
            }
        }
    }

    /// The serializable descriptor; `None` for custom rules.
    pub fn to_spec(&self) -> Option<WeightSpec> {
        Some(match &self.0.kind {
            Kind::Constant(value) => WeightSpec::Constant { value: value.clone() },
            Kind::TwoSided { positive, negative } => {
                WeightSpec::TwoSided { positive: positive.clone(), negative: negative.clone() }
            }
            Kind::Periodic(values) => WeightSpec::Periodic { values: values.clone() },
            Kind::Table { entries, default, declared_inf, declared_sup } => WeightSpec::Table {
                entries: entries.iter().map(|(&index, value)| TableEntry { index, value: value.clone() }).collect(),
                default: Box::new(default.to_spec()?),
                inf_abs: *declared_inf,
                sup_abs: *declared_sup,
            },
            Kind::Product(factors) => {
                WeightSpec::Product { factors: factors.iter().map(|f| f.to_spec()).collect::<Option<_>>()? }
            }
            Kind::Custom { .. } => return None,
        })
    }

    pub fn inf_abs(&self) -> f64 {
        self.0.inf_abs
    }

    pub fn sup_abs(&self) -> f64 {
        self.0.sup_abs
    }

    pub fn is_invertible(&self) -> bool {
        self.0.inf_abs > 0.0 && self.0.sup_abs.is_finite()
    }

    /// `max(sup |w|, 1 / inf |w|)`: bounds both `B_w` and its inverse.
    pub fn two_sided_operator_bound(&self) -> f64 {
        self.sup_abs().max(1.0 / self.inf_abs())
    }

    pub fn require_invertible(&self) -> Result<()> {
        if self.is_invertible() {
            Ok(())
        } else {
            Err(Error::NotInvertible { inf_abs: self.inf_abs(), sup_abs: self.sup_abs() })
        }
    }

    fn param_at(&self, n: i64) -> Option<&Param> {
        match &self.0.kind {
            Kind::Constant(c) => Some(c),
            Kind::TwoSided { positive, negative } => Some(if n >= 1 { positive } else { negative }),
            Kind::Periodic(values) => Some(&values[n.rem_euclid(values.len() as i64) as usize]),
            Kind::Table { entries, default, .. } => entries.get(&n).or_else(|| default.param_at(n)),
            Kind::Product(_) | Kind::Custom { .. } => None,
        }
    }

    fn check_bounds(&self, modulus: f64, n: i64) {
        assert!(
            modulus != 0.0 && modulus >= self.0.inf_abs * (1.0 - 1e-12) && modulus <= self.0.sup_abs * (1.0 + 1e-12),
            "weight rule {self} violates its declared bounds at n = {n}: |w_n| = {modulus}"
        );
    }

    /// `w_n` as a double.
    pub fn eval(&self, n: i64) -> f64 {
        if let Some(p) = self.param_at(n) {
            return p.value();
        }
        match &self.0.kind {
            Kind::Product(factors) => factors.iter().map(|f| f.eval(n)).product(),
            Kind::Custom { f, .. } => {
                let v = ToPrimitive::to_f64(&f.weight(n)).unwrap_or(f64::NAN);
                self.check_bounds(v.abs(), n);
                v
            }
            _ => unreachable!(),
        }
    }

    /// `w_n` as sign and log-modulus.
    pub fn eval_log(&self, n: i64) -> LogScalar {
        if let Some(p) = self.param_at(n) {
            return p.log();
        }
        match &self.0.kind {
            Kind::Product(factors) => factors.iter().fold(LogScalar::ONE, |acc, f| acc.times(&f.eval_log(n))),
            Kind::Custom { f, .. } => {
                let v = f.weight(n);
                let l = LogScalar::new(v.is_negative(), ratio_ln_abs(&v));
                self.check_bounds(l.ln_abs.exp(), n);
                l
            }
            _ => unreachable!(),
        }
    }

    /// `w_n` exactly.
    pub fn eval_exact(&self, n: i64) -> BigRational {
        if let Some(p) = self.param_at(n) {
            return p.exact().clone();
        }
        match &self.0.kind {
            Kind::Product(factors) => factors.iter().map(|f| f.eval_exact(n)).product(),
            Kind::Custom { f, .. } => {
                let v = f.weight(n);
                self.check_bounds(ToPrimitive::to_f64(&v).unwrap_or(f64::NAN).abs(), n);
                v
            }
            _ => unreachable!(),
        }
    }

    /// Eventual periodicity of `|w_n|`: `Some((start, period))` promises
    /// `|w_{n+period}| = |w_n|` for all `n >= start` (forward) or
    /// `|w_{n-period}| = |w_n|` for all `n <= start` (backward).
    pub fn periodic_tail(&self, direction: Direction) -> Option<(i64, u64)> {
        let fwd = direction == Direction::Forward;
        match &self.0.kind {
            Kind::Constant(_) | Kind::TwoSided { .. } => Some((if fwd { 1 } else { 0 }, 1)),
            Kind::Periodic(values) => Some((if fwd { 1 } else { 0 }, values.len() as u64)),
            Kind::Table { entries, default, .. } => {
                let (s, l) = default.periodic_tail(direction)?;
                let start = match (fwd, entries.keys().next(), entries.keys().next_back()) {
                    (true, _, Some(&max)) => s.max(max + 1),
                    (false, Some(&min), _) => s.min(min - 1),
                    _ => s,
                };
                Some((start, l))
            }
            Kind::Product(factors) => {
                let mut start = if fwd { i64::MIN } else { i64::MAX };
                let mut period = 1u64;
                for f in factors {
                    let (s, l) = f.periodic_tail(direction)?;
                    start = if fwd { start.max(s) } else { start.min(s) };
                    period = period.lcm(&l);
                    if period > MAX_TAIL_PERIOD {
                        return None;
                    }
                }
                Some((start, period))
            }
            Kind::Custom { f, .. } => f.periodic_tail(direction),
        }
    }

    /// The reflected inverse rule `w'_n = 1 / w_{1-n}`.
    pub fn invert_reflect(&self) -> Result<WeightRule> {
        self.require_invertible()?;
        let (inf, sup) = (1.0 / self.sup_abs(), 1.0 / self.inf_abs());
        let kind = match &self.0.kind {
            Kind::Constant(c) => Kind::Constant(c.recip()),
            Kind::TwoSided { positive, negative } => {
                Kind::TwoSided { positive: negative.recip(), negative: positive.recip() }
            }
            Kind::Periodic(values) => {
                let len = values.len() as i64;
                Kind::Periodic((0..len).map(|k| values[(1 - k).rem_euclid(len) as usize].recip()).collect())
            }
            Kind::Table { entries, default, declared_inf, declared_sup } => Kind::Table {
                entries: entries.iter().map(|(&i, v)| (1 - i, v.recip())).collect(),
                default: default.invert_reflect()?,
                declared_inf: declared_sup.map(|s| 1.0 / s),
                declared_sup: declared_inf.map(|s| 1.0 / s),
            },
            Kind::Product(factors) => {
                Kind::Product(factors.iter().map(|f| f.invert_reflect()).collect::<Result<_>>()?)
            }
            Kind::Custom { f, reflected_from } => match reflected_from {
                Some(original) => Kind::Custom { f: original.clone(), reflected_from: None },
                None => Kind::Custom { f: Arc::new(Reflected(f.clone())), reflected_from: Some(f.clone()) },
            },
        };
        Ok(Self::build(kind, inf, sup))
    }
}

fn abs_range<'a>(values: impl Iterator<Item = &'a Param>) -> (f64, f64) {
    values.fold((f64::INFINITY, 0.0_f64), |(lo, hi), p| {
        let a = p.value().abs();
        (lo.min(a), hi.max(a))
    })
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Constant(c) => write!(f, "constant({c})"),
            Kind::TwoSided { positive, negative } => write!(f, "two_sided({positive}, {negative})"),
            Kind::Periodic(values) => {
                let v: Vec<String> = values.iter().map(|p| p.to_string()).collect();
                write!(f, "periodic([{}])", v.join(", "))
            }
            Kind::Table { entries, default, .. } => {
                let v: Vec<String> = entries.iter().map(|(i, p)| format!("{i}: {p}")).collect();
                write!(f, "table({{{}}}, default = {default})", v.join(", "))
            }
            Kind::Product(factors) => {
                let v: Vec<String> = factors.iter().map(|r| r.to_string()).collect();
                write!(f, "product({})", v.join(", "))
            }
            Kind::Custom { f: func, .. } => write!(f, "custom({})", func.describe()),
        }
    }
}

impl fmt::Debug for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightRule({self}, inf={}, sup={})", self.inf_abs(), self.sup_abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Param {
        s.parse().unwrap()
    }

    #[test]
    fn parses_integers_fractions_and_decimals() {
        assert_eq!(p("2"), Param::from(2));
        assert_eq!(p("-3"), Param::from(-3));
        assert_eq!(p("1/2"), Param::ratio(1, 2));
        assert_eq!(p("2/4"), Param::ratio(1, 2));
        assert_eq!(p("0.25"), Param::ratio(1, 4));
        assert_eq!(p("-1.5e-3"), Param::ratio(-3, 2000));
        assert_eq!(p(".5"), Param::ratio(1, 2));
        assert_eq!(p("3e2"), Param::from(300));
        assert!("1/0".parse::<Param>().is_err());
        assert!("abc".parse::<Param>().is_err());
        assert!("".parse::<Param>().is_err());
    }

    #[test]
    fn bounds_follow_descriptors() {
        let w = WeightRule::two_sided(p("2"), p("1/2")).unwrap();
        assert_eq!((w.inf_abs(), w.sup_abs()), (0.5, 2.0));
        assert!(w.is_invertible());
        let per = WeightRule::periodic(vec![p("3"), p("-1/4"), p("1")]).unwrap();
        assert_eq!((per.inf_abs(), per.sup_abs()), (0.25, 3.0));
        let t = WeightRule::table(vec![(0, p("5"))], per.clone()).unwrap();
        assert_eq!((t.inf_abs(), t.sup_abs()), (0.25, 5.0));
        let prod = WeightRule::product(vec![w, per]).unwrap();
        assert_eq!((prod.inf_abs(), prod.sup_abs()), (0.125, 6.0));
    }

    #[test]
    fn declared_bounds_may_only_loosen() {
        let c = WeightRule::constant(p("2")).unwrap();
        let loose = WeightRule::table_with_bounds(vec![], c.clone(), Some(0.0), None).unwrap();
        assert!(!loose.is_invertible());
        assert!(loose.require_invertible().is_err());
        assert!(WeightRule::table_with_bounds(vec![], c.clone(), Some(3.0), None).is_err());
        assert!(WeightRule::table_with_bounds(vec![], c, None, Some(1.0)).is_err());
    }

    #[test]
    fn zero_weights_are_rejected() {
        assert!(WeightRule::constant(p("0")).is_err());
        assert!(WeightRule::periodic(vec![p("1"), p("0")]).is_err());
        assert!(WeightRule::periodic(vec![]).is_err());
    }

    #[test]
    fn evaluation_is_consistent_across_fields() {
        let w = WeightRule::table(vec![(-2, p("-7/3"))], WeightRule::periodic(vec![p("2"), p("1/3")]).unwrap())
            .unwrap();
        for n in -5..5 {
            let exact = w.eval_exact(n);
            assert_eq!(w.eval(n), Scalar::to_f64(&exact));
            let l = w.eval_log(n);
            assert!((l.value() - w.eval(n)).abs() < 1e-14);
        }
        assert_eq!(w.eval(-2), -7.0 / 3.0);
        assert_eq!(w.eval(-1), 1.0 / 3.0);
    }

    #[test]
    fn reflection_examples() {
        let w = WeightRule::two_sided(p("2"), p("1/2")).unwrap();
        let r = w.invert_reflect().unwrap();
        assert_eq!(r.eval(1), 2.0);
        assert_eq!(r.eval(0), 0.5);
        let c = WeightRule::constant(p("3")).unwrap().invert_reflect().unwrap();
        assert_eq!(c.to_spec(), Some(WeightSpec::Constant { value: p("1/3") }));
        let per = WeightRule::periodic(vec![p("2"), p("3"), p("5")]).unwrap();
        let pr = per.invert_reflect().unwrap();
        for n in -10..10 {
            assert_eq!(pr.eval_exact(n), per.eval_exact(1 - n).recip());
        }
        assert_eq!(pr.invert_reflect().unwrap().to_spec(), per.to_spec());
    }

    #[test]
    fn reflection_rejects_non_invertible() {
        let t = WeightRule::table_with_bounds(vec![], WeightRule::constant(p("1")).unwrap(), Some(0.0), None).unwrap();
        assert!(matches!(t.invert_reflect(), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn periodic_tails() {
        let per = WeightRule::periodic(vec![p("2"), p("3")]).unwrap();
        let t = WeightRule::table(vec![(5, p("7")), (-4, p("9"))], per.clone()).unwrap();
        assert_eq!(t.periodic_tail(Direction::Forward), Some((6, 2)));
        assert_eq!(t.periodic_tail(Direction::Backward), Some((-5, 2)));
        let prod = WeightRule::product(vec![per, WeightRule::periodic(vec![p("1"), p("2"), p("3")]).unwrap()]).unwrap();
        assert_eq!(prod.periodic_tail(Direction::Forward), Some((1, 6)));
    }

    struct Harmonic;
    impl WeightFn for Harmonic {
        fn weight(&self, n: i64) -> BigRational {
            BigRational::new(BigInt::from(n.unsigned_abs() + 2), BigInt::from(n.unsigned_abs() + 1))
        }
        fn inf_abs(&self) -> f64 {
            1.0
        }
        fn sup_abs(&self) -> f64 {
            2.0
        }
        fn describe(&self) -> String {
            "harmonic".into()
        }
    }

    #[test]
    fn custom_rules_reflect_and_unreflect() {
        let w = WeightRule::custom(Arc::new(Harmonic)).unwrap();
        assert!(w.to_spec().is_none());
        let r = w.invert_reflect().unwrap();
        assert_eq!(r.eval_exact(3), w.eval_exact(-2).recip());
        assert_eq!((r.inf_abs(), r.sup_abs()), (0.5, 1.0));
        let back = r.invert_reflect().unwrap();
        for n in -4..4 {
            assert_eq!(back.eval_exact(n), w.eval_exact(n));
        }
        assert_eq!(w.periodic_tail(Direction::Forward), None);
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = WeightSpec::Table {
            entries: vec![TableEntry { index: -3, value: p("5/2") }],
            default: Box::new(WeightSpec::Product {
                factors: vec![
                    WeightSpec::TwoSided { positive: p("2"), negative: p("1/2") },
                    WeightSpec::Periodic { values: vec![p("1"), p("-3")] },
                ],
            }),
            inf_abs: Some(0.0),
            sup_abs: None,
        };
        let text = spec.to_toml();
        assert_eq!(WeightSpec::from_toml(&text).unwrap(), spec);
    }

    #[test]
    fn spec_accepts_plain_numbers() {
        let spec = WeightSpec::from_toml("kind = \"two_sided\"\npositive = 2\nnegative = 0.5\n").unwrap();
        assert_eq!(spec, WeightSpec::TwoSided { positive: p("2"), negative: p("1/2") });
        assert!(WeightSpec::from_toml("kind = \"nope\"\n").is_err());
    }
}
