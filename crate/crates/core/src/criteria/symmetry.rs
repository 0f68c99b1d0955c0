use serde::Serialize;

use super::{check_c0_products, EpsilonSchedule, Horizons, JMode, Verdict};
use crate::families::HittingFamily;
use crate::sequence::{CompensatedSum, WeightRule};
use crate::Result;

/// Zero-mode product-form verdicts for `w` and its reflection
/// `w'_n = 1 / w_{1-n}` on the same family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub horizon: u64,
    pub reflected_rule: String,
    pub original: Verdict,
    pub reflected: Verdict,
    /// Verdict classes agree.
    pub equal: bool,
    /// `max_k |prod_{1..k} |w'| * prod_{-k+1..0} |w| - 1|` for `k <= horizon`.
    pub identity_max_rel_error: f64,
}

impl SymmetryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// `max_{1 <= k <= horizon} |prod_{nu=1}^{k} |w'_nu| * prod_{mu=-k+1}^{0} |w_mu| - 1|`,
/// with both products accumulated incrementally in log domain.
pub fn reflection_product_identity(w: &WeightRule, reflected: &WeightRule, horizon: u64) -> f64 {
    let mut reflected_ln = CompensatedSum::default();
    let mut original_ln = CompensatedSum::default();
    let mut worst: f64 = 0.0;
    for k in 1..=horizon as i64 {
        reflected_ln.add(reflected.eval_log(k).ln_abs);
        original_ln.add(w.eval_log(1 - k).ln_abs);
        worst = worst.max((reflected_ln.value() + original_ln.value()).exp_m1().abs());
    }
    worst
}

/// Runs the zero-mode `c_0` product check for `w` and for its reflection,
/// with one horizon for `m` and `n`, and checks the product identity behind
/// the reflection. Requires an invertible weight.
pub fn symmetry_check(
    w: &WeightRule,
    family: &HittingFamily,
    schedule: &EpsilonSchedule,
    horizon: u64,
) -> Result<SymmetryReport> {
    let reflected = w.invert_reflect()?;
    let horizons = Horizons::uniform(horizon);
    let original = check_c0_products(w, family, schedule, horizons, JMode::Zero)?.verdict;
    let mirrored = check_c0_products(&reflected, family, schedule, horizons, JMode::Zero)?.verdict;
    Ok(SymmetryReport {
        horizon,
        reflected_rule: reflected.to_string(),
        equal: original.same_kind(&mirrored),
        original,
        reflected: mirrored,
        identity_max_rel_error: reflection_product_identity(w, &reflected, horizon),
    })
}
