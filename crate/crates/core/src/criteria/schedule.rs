use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Tolerances `eps_1 >= eps_2 >= ... > 0`. The natural logs are
/// authoritative so that deep schedules do not underflow; the plain values
/// are kept exactly as given when the schedule was built from them.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSchedule {
    ln_values: Vec<f64>,
    values: Vec<f64>,
}

impl EpsilonSchedule {
    /// `eps_p = 1 / (p (2p + 1) 4^p)` for `p = 1..=count`.
    pub fn default_for(count: usize) -> Self {
        let ln_values = (1..=count)
            .map(|p| {
                let p = p as f64;
                -(p * (2.0 * p + 1.0)).ln() - p * 4f64.ln()
            })
            .collect();
        Self::from_ln_values(ln_values).expect("default schedule is valid")
    }

    /// Explicit values; must be positive and non-increasing.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mut schedule =
            Self::from_ln_values(values.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NAN }).collect())?;
        schedule.values = values.to_vec();
        Ok(schedule)
    }

    pub fn from_ln_values(ln_values: Vec<f64>) -> Result<Self> {
        if ln_values.is_empty() {
            return Err(Error::InvalidParameter("empty epsilon schedule".into()));
        }
        if let Some(p) = ln_values.iter().position(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps_{} is not a positive finite number", p + 1)));
        }
        if let Some(p) = ln_values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(format!("epsilon schedule increases at p = {}", p + 2)));
        }
        let values = ln_values.iter().map(|l| l.exp()).collect();
        Ok(EpsilonSchedule { ln_values, values })
    }

    pub fn len(&self) -> usize {
        self.ln_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_values.is_empty()
    }

    /// `eps_p`, `p >= 1`; `0.0` once it underflows.
    pub fn value(&self, p: usize) -> f64 {
        self.values[p - 1]
    }

    pub fn ln_value(&self, p: usize) -> f64 {
        self.ln_values[p - 1]
    }

    /// `ln min(eps_p, eps_q)`.
    pub fn ln_min(&self, p: usize, q: usize) -> f64 {
        self.ln_value(p).min(self.ln_value(q))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ln_values(&self) -> &[f64] {
        &self.ln_values
    }

    /// `eps_p / M^p`; non-increasing again when `M >= 1`.
    pub fn deflated(&self, m: f64) -> Result<Self> {
        if !(m >= 1.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("deflation constant {m} must be finite and >= 1")));
        }
        let lm = m.ln();
        Self::from_ln_values(self.ln_values.iter().enumerate().map(|(i, l)| l - (i + 1) as f64 * lm).collect())
    }

    /// `c eps_p` for every `p`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale {c} must be positive")));
        }
        Self::from_ln_values(self.ln_values.iter().map(|l| l + c.ln()).collect())
    }

    /// The first `count` entries.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count > self.len() {
            return Err(Error::InvalidParameter(format!("schedule has {} entries, {count} requested", self.len())));
        }
        Self::from_ln_values(self.ln_values[..count].to_vec())
    }
}

/// Serialised as a plain list of values, or as `{ ln = [...] }` when some
/// value underflows.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Values(Vec<f64>),
    Logs { ln: Vec<f64> },
}

impl Serialize for EpsilonSchedule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.values.iter().all(|v| v.is_normal()) {
            Repr::Values(self.values.clone()).serialize(s)
        } else {
            Repr::Logs { ln: self.ln_values.clone() }.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for EpsilonSchedule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Values(values) => EpsilonSchedule::from_values(&values),
            Repr::Logs { ln } => EpsilonSchedule::from_ln_values(ln),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_values() {
        let e = EpsilonSchedule::default_for(4);
        assert!((e.value(1) - 1.0 / 12.0).abs() < 1e-15);
        assert!((e.value(2) - 1.0 / 160.0).abs() < 1e-16);
        assert!((e.value(4) - 1.0 / 9216.0).abs() < 1e-18);
        assert_eq!(e.ln_min(1, 3), e.ln_value(3));
        let deep = EpsilonSchedule::default_for(600);
        assert!(deep.ln_value(600).is_finite() && deep.value(600) == 0.0);
        let json = serde_json::to_string(&deep).unwrap();
        assert!(json.starts_with("{\"ln\":"));
        assert_eq!(serde_json::from_str::<EpsilonSchedule>(&json).unwrap(), deep);
    }

    #[test]
    fn validation_and_transforms() {
        assert!(EpsilonSchedule::from_values(&[0.1, 0.2]).is_err());
        assert!(EpsilonSchedule::from_values(&[0.1, 0.0]).is_err());
        assert!(EpsilonSchedule::from_values(&[]).is_err());
        let e = EpsilonSchedule::from_values(&[0.5, 0.5, 0.25]).unwrap();
        let d = e.deflated(2.0).unwrap();
        assert!((d.value(3) - 0.25 / 8.0).abs() < 1e-15);
        assert!(e.deflated(0.5).is_err());
        assert!((e.scaled(2.0).unwrap().value(3) - 0.5).abs() < 1e-15);
        assert_eq!(e.truncated(2).unwrap().len(), 2);
    }

    #[test]
    fn serde_round_trip() {
        let e = EpsilonSchedule::from_values(&[0.5, 0.125]).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, "[0.5,0.125]");
        assert_eq!(serde_json::from_str::<EpsilonSchedule>(&json).unwrap(), e);
        assert!(serde_json::from_str::<EpsilonSchedule>("[0.1,0.2]").is_err());
    }
}
