use std::io;

use serde::Serialize;

use super::Horizons;
use crate::families::HittingFamily;
use crate::sequence::{VSequence, WeightRule};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    /// Over the tail half of the samples the products stay above every threshold.
    GrowthObservedToHorizon,
    /// Some product in the tail half is at or below the largest threshold.
    ViolatedToHorizon,
    /// `A_p` has no element up to the horizon.
    NoSamples,
}

/// `ln |w_1 ... w_{n+p}|` at one `n in A_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub p: usize,
    pub n: u64,
    pub log_product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEntry {
    pub p: usize,
    /// First `n` of the tail half of the samples.
    pub tail_start: Option<u64>,
    pub tail_samples: usize,
    /// Minimum of the log products over the tail half.
    pub tail_min_log: Option<f64>,
    /// First `n` attaining that minimum.
    pub lagging_n: Option<u64>,
    pub verdict: GrowthVerdict,
}

/// Divergence of `w_1 ... w_{n+p}` along `A_p`, observed up to the inner
/// horizon. Divergence is a limit statement; these verdicts only describe
/// the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub horizon: u64,
    pub thresholds: Vec<f64>,
    pub entries: Vec<GrowthEntry>,
    #[serde(skip)]
    pub series: Vec<GrowthPoint>,
}

impl GrowthReport {
    /// Observed for every `p`.
    pub fn all_observed(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == GrowthVerdict::GrowthObservedToHorizon)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Columns `p,n,log_product`.
    pub fn write_series_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for point in &self.series {
            w.serialize(point)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates `ln |w_1 ... w_{n+p}|` along `n in A_p ∩ [0, inner]`; the
/// verdict for `p` compares the minimum over the second half of these
/// samples (by count) with the largest threshold.
pub fn check_frequent_growth(
    w: &WeightRule,
    family: &HittingFamily,
    horizons: Horizons,
    thresholds: &[f64],
) -> Result<GrowthReport> {
    if thresholds.is_empty() || thresholds.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("growth thresholds must be positive and finite".into()));
    }
    if horizons.inner > family.horizon() {
        return Err(Error::HorizonTooSmall {
            horizon: family.horizon(),
            reason: format!("growth check up to {}", horizons.inner),
        });
    }
    let ln_threshold = thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max).ln();
    let v = VSequence::new(w, horizons.inner + family.len() as u64);
    let mut series = Vec::new();
    let mut entries = Vec::new();
    for p in 1..=family.len() {
        let first = series.len();
        for &n in family.set(p).range(0, horizons.inner) {
            series.push(GrowthPoint { p, n, log_product: -v.ln_abs(n as i64 + p as i64) });
        }
        let points = &series[first..];
        let tail = &points[points.len() / 2..];
        let mut min: Option<(f64, u64)> = None;
        for point in tail {
            if min.is_none_or(|(m, _)| point.log_product < m) {
                min = Some((point.log_product, point.n));
            }
        }
        let verdict = match min {
            None => GrowthVerdict::NoSamples,
            Some((m, _)) if m > ln_threshold => GrowthVerdict::GrowthObservedToHorizon,
            Some(_) => GrowthVerdict::ViolatedToHorizon,
        };
        entries.push(GrowthEntry {
            p,
            tail_start: tail.first().map(|t| t.n),
            tail_samples: tail.len(),
            tail_min_log: min.map(|m| m.0),
            lagging_n: min.map(|m| m.1),
            verdict,
        });
    }
    Ok(GrowthReport { horizon: horizons.inner, thresholds: thresholds.to_vec(), entries, series })
}
