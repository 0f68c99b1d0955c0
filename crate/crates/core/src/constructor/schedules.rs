use serde::Serialize;

use crate::criteria::EpsilonSchedule;
use crate::sequence::{log_sum_exp, WeightRule};
use crate::{Error, Result};

/// The constants of the construction for `p = 1..=P`:
/// `alpha_p = 1 / (2^p p sum_{j=-p}^{p} M^{p-j})` and
/// `eps_p = 1 / (p (2p + 1) 4^p)`, with `M = sup |w_n|` the norm of the
/// shift. Both are kept as natural logs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedules {
    pub operator_bound: f64,
    ln_alpha: Vec<f64>,
    pub epsilon: EpsilonSchedule,
}

impl Schedules {
    pub fn len(&self) -> usize {
        self.ln_alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_alpha.is_empty()
    }

    /// `alpha_p`, `p >= 1`.
    pub fn alpha(&self, p: usize) -> f64 {
        self.ln_alpha[p - 1].exp()
    }

    pub fn ln_alpha(&self, p: usize) -> f64 {
        self.ln_alpha[p - 1]
    }

    pub fn epsilon(&self, p: usize) -> f64 {
        self.epsilon.value(p)
    }
}

/// `ln alpha_p` for shift norm `m`.
fn ln_alpha(p: usize, m: f64) -> f64 {
    let ln_m = m.ln();
    let ln_sum = log_sum_exp((0..=2 * p).map(|i| i as f64 * ln_m));
    -(p as f64) * std::f64::consts::LN_2 - (p as f64).ln() - ln_sum
}

/// The schedules for `p = 1..=count` with `M = sup |w_n|`.
pub fn default_schedules(w: &WeightRule, count: usize) -> Result<Schedules> {
    if count == 0 {
        return Err(Error::InvalidParameter("the construction needs at least one set".into()));
    }
    let m = w.sup_abs();
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!("sup |w_n| = {m} must be positive and finite")));
    }
    Ok(Schedules {
        operator_bound: m,
        ln_alpha: (1..=count).map(|p| ln_alpha(p, m)).collect(),
        epsilon: EpsilonSchedule::default_for(count),
    })
}
