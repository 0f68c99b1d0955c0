use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closed-form description of an infinite subset of `N_0`, used to extend
/// a stored prefix past its horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetRule {
    /// Every `n >= 0`.
    Naturals,
    /// `start, start + step, start + 2 step, ...`
    Progression { start: u64, step: u64 },
    /// `1, base, base^2, ...`
    Powers { base: u64 },
}

impl SetRule {
    fn validate(&self) -> Result<()> {
        match *self {
            SetRule::Progression { step: 0, .. } => {
                Err(Error::InvalidParameter("progression step must be positive".into()))
            }
            SetRule::Powers { base } if base < 2 => Err(Error::InvalidParameter("powers base must be at least 2".into())),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match *self {
            SetRule::Naturals => true,
            SetRule::Progression { start, step } => n >= start && (n - start).is_multiple_of(step),
            SetRule::Powers { base } => {
                let mut b = 1u64;
                loop {
                    if b == n {
                        return true;
                    }
                    match b.checked_mul(base) {
                        Some(next) if next <= n => b = next,
                        _ => return false,
                    }
                }
            }
        }
    }

    /// All members `<= horizon`, ascending.
    pub fn generate(&self, horizon: u64) -> Vec<u64> {
        match *self {
            SetRule::Naturals => (0..=horizon).collect(),
            SetRule::Progression { start, step } => {
                if start > horizon {
                    Vec::new()
                } else {
                    (start..=horizon).step_by(step as usize).collect()
                }
            }
            SetRule::Powers { base } => {
                let mut out = Vec::new();
                let mut b = Some(1u64);
                while let Some(x) = b.filter(|&x| x <= horizon) {
                    out.push(x);
                    b = x.checked_mul(base);
                }
                out
            }
        }
    }
}

impl fmt::Display for SetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetRule::Naturals => write!(f, "naturals"),
            SetRule::Progression { start, step } => write!(f, "progression:{start}:{step}"),
            SetRule::Powers { base } => write!(f, "powers:{base}"),
        }
    }
}

impl FromStr for SetRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.parse::<u64>().map_err(|e| Error::Parse(format!("set rule `{s}`: {e}")));
        let rule = match parts.as_slice() {
            ["naturals"] => SetRule::Naturals,
            ["progression", start, step] => SetRule::Progression { start: num(start)?, step: num(step)? },
            ["powers", base] => SetRule::Powers { base: num(base)? },
            _ => return Err(Error::Parse(format!("unknown set rule `{s}`"))),
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// A finite, strictly increasing list of non-negative integers known up to
/// `horizon`, optionally backed by a [`SetRule`] for extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    elements: Vec<u64>,
    horizon: u64,
    rule: Option<SetRule>,
}

impl IndexSet {
    /// Elements must be strictly increasing and `<= horizon`.
    pub fn new(elements: Vec<u64>, horizon: u64) -> Result<Self> {
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!("set not strictly increasing at {} -> {}", w[0], w[1])));
        }
        if let Some(&last) = elements.last().filter(|&&l| l > horizon) {
            return Err(Error::InvalidParameter(format!("element {last} beyond horizon {horizon}")));
        }
        Ok(IndexSet { elements, horizon, rule: None })
    }

    pub fn empty(horizon: u64) -> Self {
        IndexSet { elements: Vec::new(), horizon, rule: None }
    }

    pub fn from_rule(rule: SetRule, horizon: u64) -> Result<Self> {
        rule.validate()?;
        Ok(IndexSet { elements: rule.generate(horizon), horizon, rule: Some(rule) })
    }

    /// Attaches `rule` after checking that it reproduces the stored prefix.
    pub fn with_rule(self, rule: SetRule) -> Result<Self> {
        rule.validate()?;
        if rule.generate(self.horizon) != self.elements {
            return Err(Error::InvalidParameter(format!("rule `{rule}` does not match the stored prefix")));
        }
        Ok(IndexSet { rule: Some(rule), ..self })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn rule(&self) -> Option<SetRule> {
        self.rule
    }

    pub fn max(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    /// Membership; `None` past the horizon when no rule is attached.
    pub fn contains(&self, n: u64) -> Option<bool> {
        if n <= self.horizon {
            Some(self.elements.binary_search(&n).is_ok())
        } else {
            self.rule.map(|r| r.contains(n))
        }
    }

    /// Elements in `[lo, hi]`.
    pub fn range(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.elements.partition_point(|&x| x < lo);
        let b = self.elements.partition_point(|&x| x <= hi);
        &self.elements[a..b.max(a)]
    }

    /// `card(A ∩ [0, n])`.
    pub fn count_upto(&self, n: u64) -> Result<u64> {
        if n <= self.horizon {
            return Ok(self.elements.partition_point(|&x| x <= n) as u64);
        }
        match self.rule {
            Some(SetRule::Naturals) => Ok(n + 1),
            Some(SetRule::Progression { start, step }) => Ok(if n < start { 0 } else { (n - start) / step + 1 }),
            Some(r @ SetRule::Powers { .. }) => Ok(r.generate(n).len() as u64),
            None => Err(Error::HorizonTooSmall {
                horizon: self.horizon,
                reason: format!("count up to {n} requested from a set without extension rule"),
            }),
        }
    }

    /// The same set known up to `horizon`: truncates, or regenerates from the
    /// rule when growing.
    pub fn with_horizon(&self, horizon: u64) -> Result<Self> {
        if horizon <= self.horizon {
            let keep = self.elements.partition_point(|&x| x <= horizon);
            return Ok(IndexSet { elements: self.elements[..keep].to_vec(), horizon, rule: self.rule });
        }
        match self.rule {
            Some(rule) => IndexSet::from_rule(rule, horizon),
            None => Err(Error::HorizonTooSmall {
                horizon: self.horizon,
                reason: format!("cannot extend to {horizon} without a rule"),
            }),
        }
    }

    /// `A ∪ B`, known up to the smaller horizon.
    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let horizon = self.horizon.min(other.horizon);
        let mut elements: Vec<u64> =
            self.iter().chain(other.iter()).filter(|&x| x <= horizon).collect();
        elements.sort_unstable();
        elements.dedup();
        IndexSet { elements, horizon, rule: None }
    }

    /// `A - n = {a - n : a in A, a >= n}`, known up to `horizon - n`.
    pub fn translate_down(&self, n: u64) -> IndexSet {
        let start = self.elements.partition_point(|&x| x < n);
        IndexSet {
            elements: self.elements[start..].iter().map(|x| x - n).collect(),
            horizon: self.horizon.saturating_sub(n),
            rule: None,
        }
    }

    /// Newline-delimited elements after a `# key: value` header block.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# kind: index_set\n");
        out.push_str(&format!("# horizon: {}\n", self.horizon));
        if let Some(rule) = self.rule {
            out.push_str(&format!("# rule: {rule}\n"));
        }
        for x in &self.elements {
            out.push_str(&format!("{x}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut horizon = None;
        let mut rule = None;
        let mut elements = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some((key, value)) = parse_header(line) {
                match key {
                    "kind" if value == "index_set" => {}
                    "horizon" => horizon = Some(parse_u64(value)?),
                    "rule" => rule = Some(value.parse()?),
                    _ => return Err(Error::Parse(format!("unexpected header `{line}`"))),
                }
            } else {
                elements.push(parse_u64(line)?);
            }
        }
        let horizon = match horizon {
            Some(h) => h,
            None => elements.last().copied().unwrap_or(0),
        };
        let set = IndexSet::new(elements, horizon)?;
        match rule {
            Some(rule) => set.with_rule(rule),
            None => Ok(set),
        }
    }
}

pub(crate) fn parse_header(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix('#')?;
    let (key, value) = rest.split_once(':')?;
    Some((key.trim(), value.trim()))
}

pub(crate) fn parse_u64(s: &str) -> Result<u64> {
    s.trim().parse().map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}
