//! Finite-horizon evaluation of the characterising conditions for
//! `A`-hypercyclic weighted shifts.
//!
//! For sets `A_1, ..., A_P`, a schedule `eps_p` and every tuple
//! `(p, q, m, j)` with `m in A_q`, the *norm form* requires
//!
//! ```text
//! || sum_{n in A_p, n != m} v_{n-m+j} e_{n-m+j} || < min(eps_p, eps_q).
//! ```
//!
//! On `c_0(Z)` this splits into the *product form*: for `n < m` the
//! backward product `prod_{nu=n-m+j+1}^{0} |w_nu|` must stay below
//! `min(eps_p, eps_q)`, and for `n > m` the forward product
//! `prod_{nu=1}^{n-m+j} |w_nu|` must exceed its reciprocal. Shifts on `N_0`
//! only see the terms `n > m` with `j = 0..=p`.
//!
//! Sums run over `n <= inner` and `m <= outer`. A passing run is reported as
//! [`Verdict::SatisfiedToHorizon`] only when the terms beyond the inner
//! horizon are bounded by a periodic-tail certificate of the weight;
//! otherwise it is [`Verdict::InconclusiveTail`]. Tuples are visited in the
//! order `p, q, m, j` (all ascending) and the first failing one is the
//! witness, independent of thread scheduling.

mod engine;
mod growth;
mod report;
mod schedule;
mod symmetry;

pub use engine::MARGINAL_LOG_MARGIN;
pub use growth::{check_frequent_growth, GrowthEntry, GrowthPoint, GrowthReport, GrowthVerdict};
pub use report::{Criterion, CriterionReport, Horizons, JMode, PairExtremum, TermKind, Verdict, Witness};
pub use schedule::EpsilonSchedule;
pub use symmetry::{reflection_product_identity, symmetry_check, SymmetryReport};

pub(crate) use engine::Lse;
use engine::{Form, Run, Sides};

use std::cmp::Ordering;

use num::{BigRational, Signed};
use serde::Serialize;

use crate::families::HittingFamily;
use crate::sequence::{v_at_exact, weight_product, weight_product_exact, Scalar, SpaceModel, WeightRule};
use crate::{Error, Result};

/// Norm form on a bilateral space (`c0_z` or `lp_z`), `j_mode` full or zero.
pub fn check_norm_form(
    space: &SpaceModel,
    w: &WeightRule,
    family: &HittingFamily,
    schedule: &EpsilonSchedule,
    horizons: Horizons,
    j_mode: JMode,
) -> Result<CriterionReport> {
    if !space.is_bilateral() {
        return Err(Error::UnsupportedSpace {
            space: space.to_string(),
            reason: "the norm form is for spaces over Z; use the unilateral check".into(),
        });
    }
    bilateral_mode(j_mode)?;
    Run {
        criterion: Criterion::NormForm,
        space_label: space.to_string(),
        form: Form::Norm { exponent: space.exponent() },
        sides: Sides::Both,
        w,
        family,
        schedule,
        horizons,
        j_mode,
    }
    .execute()
}

/// Product form on `c_0(Z)`; agrees with [`check_norm_form`] on `c0_z` in
/// verdict and witness tuple.
pub fn check_c0_products(
    w: &WeightRule,
    family: &HittingFamily,
    schedule: &EpsilonSchedule,
    horizons: Horizons,
    j_mode: JMode,
) -> Result<CriterionReport> {
    bilateral_mode(j_mode)?;
    Run {
        criterion: Criterion::C0Products,
        space_label: SpaceModel::C0Z.to_string(),
        form: Form::Products,
        sides: Sides::Both,
        w,
        family,
        schedule,
        horizons,
        j_mode,
    }
    .execute()
}

/// Condition for unilateral shifts on `c0_n` / `lp_n`: only `n > m`,
/// `j = 0..=p`, terms `1 / prod_{nu=1}^{n-m+j} w_nu`.
pub fn check_unilateral(
    space: &SpaceModel,
    w: &WeightRule,
    family: &HittingFamily,
    schedule: &EpsilonSchedule,
    horizons: Horizons,
) -> Result<CriterionReport> {
    if space.is_bilateral() {
        return Err(Error::UnsupportedSpace {
            space: space.to_string(),
            reason: "the unilateral check needs a space over N_0".into(),
        });
    }
    Run {
        criterion: Criterion::Unilateral,
        space_label: space.to_string(),
        form: Form::Norm { exponent: space.exponent() },
        sides: Sides::ForwardOnly,
        w,
        family,
        schedule,
        horizons,
        j_mode: JMode::Unilateral,
    }
    .execute()
}

fn bilateral_mode(j_mode: JMode) -> Result<()> {
    if j_mode == JMode::Unilateral {
        return Err(Error::InvalidParameter("j mode `unilateral` only applies to the unilateral check".into()));
    }
    Ok(())
}

/// `ln |v_k|` from a fresh product of weights (no cached prefix sums).
fn ln_v_direct(w: &WeightRule, k: i64) -> f64 {
    if k > 0 {
        -weight_product(w, 1, k).ln_abs
    } else {
        weight_product(w, k + 1, 0).ln_abs
    }
}

/// Recomputes the offending value of a report's witness from scratch by
/// direct weight products; `None` when the report has no witness.
pub fn reevaluate_witness(report: &CriterionReport, w: &WeightRule, family: &HittingFamily) -> Result<Option<f64>> {
    let Some(wit) = report.verdict.witness() else { return Ok(None) };
    let k_of = |n: u64| n as i64 - wit.m as i64 + wit.j;
    let value = match wit.term {
        TermKind::BackwardProduct => weight_product(w, k_of(wit.n) + 1, 0).ln_abs,
        TermKind::ForwardProduct => weight_product(w, 1, k_of(wit.n)).ln_abs,
        TermKind::Norm => {
            let space: SpaceModel = report.space.parse()?;
            let forward_only = report.criterion == Criterion::Unilateral;
            let terms = family
                .set(wit.p)
                .range(0, report.horizons.inner)
                .iter()
                .filter(|&&n| n != wit.m && (!forward_only || n > wit.m))
                .map(|&n| ln_v_direct(w, k_of(n)));
            match space.exponent() {
                None => terms.fold(f64::NEG_INFINITY, f64::max),
                Some(r) => {
                    let mut s = Lse::new();
                    terms.for_each(|l| s.add(r * l));
                    s.value() / r
                }
            }
        }
    };
    Ok(Some(value))
}

/// A witness re-checked in exact rational arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactWitnessCheck {
    /// `ln` of the exact offending term: the product for product witnesses,
    /// `|v_k|` at the witness `n` for norm witnesses.
    pub log_term: f64,
    /// The exact term violates the bound on its own. For norm witnesses this
    /// suffices, since the norm dominates every coordinate.
    pub confirms: bool,
}

/// Recomputes the offending term of a report's witness with exact rational
/// products; `None` when the report has no witness.
pub fn confirm_witness_exact(report: &CriterionReport, w: &WeightRule) -> Result<Option<ExactWitnessCheck>> {
    let Some(wit) = report.verdict.witness() else { return Ok(None) };
    let k = wit.n as i64 - wit.m as i64 + wit.j;
    let term = match wit.term {
        TermKind::BackwardProduct => weight_product_exact(w, k + 1, 0),
        TermKind::ForwardProduct => weight_product_exact(w, 1, k),
        TermKind::Norm => v_at_exact(w, k),
    }
    .abs();
    let ordering = match BigRational::from_float(wit.log_bound.exp()) {
        Some(bound) if wit.log_bound.exp().is_normal() => term.cmp(&bound),
        _ => term.ln_abs().total_cmp(&wit.log_bound),
    };
    let confirms = match wit.term {
        TermKind::ForwardProduct => ordering != Ordering::Greater,
        TermKind::BackwardProduct | TermKind::Norm => ordering != Ordering::Less,
    };
    Ok(Some(ExactWitnessCheck { log_term: term.ln_abs(), confirms }))
}
