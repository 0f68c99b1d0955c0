use std::io;

use serde::Serialize;

use super::index_set::IndexSet;
use crate::{Error, Result};

/// Consecutive grid points grow by at least this factor.
const GRID_RATIO: f64 = 1.0 + 1.0 / 256.0;

/// One point of the counting function `card(A ∩ [0, n]) / (n + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensitySample {
    pub n: u64,
    pub count: u64,
    pub ratio: f64,
}

/// Empirical upper and lower density of a set: the extrema of the counting
/// ratio over a geometric grid in `[tail_start, horizon]`.
///
/// Natural densities are limits; these values only describe the set up to
/// `horizon`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub horizon: u64,
    pub tail_start: u64,
    pub upper: f64,
    pub lower: f64,
    pub samples: Vec<DensitySample>,
}

impl DensityReport {
    /// Writes the sample grid as CSV with columns `n,count,ratio`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// `card(A ∩ [0, n]) / (n + 1)`.
pub fn counting_ratio(a: &IndexSet, n: u64) -> Result<f64> {
    Ok(a.count_upto(n)? as f64 / (n as f64 + 1.0))
}

/// Integer grid from `from` to `to` (both included) whose steps grow
/// geometrically; every integer is taken while the ratio step is below one.
pub fn geometric_grid(from: u64, to: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = from;
    while n < to {
        out.push(n);
        n = ((n as f64 * GRID_RATIO).floor() as u64).max(n + 1);
    }
    if from <= to {
        out.push(to);
    }
    out
}

/// Counting ratios of `a` over `[ceil(tail_fraction * horizon), horizon]`.
pub fn density_report(a: &IndexSet, horizon: u64, tail_fraction: f64) -> Result<DensityReport> {
    if horizon < 10 {
        return Err(Error::InvalidParameter(format!("density horizon {horizon} below 10")));
    }
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("tail fraction {tail_fraction} outside (0, 1)")));
    }
    let a = if horizon > a.horizon() { a.with_horizon(horizon)? } else { a.clone() };
    let tail_start = (tail_fraction * horizon as f64).ceil() as u64;
    let samples: Vec<DensitySample> = geometric_grid(tail_start, horizon)
        .into_iter()
        .map(|n| {
            let count = a.count_upto(n).expect("within horizon");
            DensitySample { n, count, ratio: count as f64 / (n as f64 + 1.0) }
        })
        .collect();
    let upper = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let lower = samples.iter().map(|s| s.ratio).fold(1.0, f64::min);
    Ok(DensityReport { horizon, tail_start, upper, lower, samples })
}

/// Largest counting ratio over the given sample points.
pub fn upper_density_at(a: &IndexSet, points: &[u64]) -> Result<f64> {
    points.iter().try_fold(0.0, |acc: f64, &n| Ok(acc.max(counting_ratio(a, n)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::SetRule;

    #[test]
    fn naturals_have_density_one() {
        let a = IndexSet::from_rule(SetRule::Naturals, 10).unwrap();
        let r = density_report(&a, 12345, 0.5).unwrap();
        assert_eq!((r.upper, r.lower), (1.0, 1.0));
    }

    #[test]
    fn evens_have_density_one_half() {
        let a = IndexSet::from_rule(SetRule::Progression { start: 0, step: 2 }, 10_000).unwrap();
        let r = density_report(&a, 10_000, 0.5).unwrap();
        assert!((r.upper - 0.5).abs() <= 1e-3 && (r.lower - 0.5).abs() <= 1e-3, "{} {}", r.upper, r.lower);
    }

    #[test]
    fn multiples_of_one_hundred_have_density_one_percent() {
        let a = IndexSet::from_rule(SetRule::Progression { start: 100, step: 100 }, 100_000).unwrap();
        let r = density_report(&a, 100_000, 0.5).unwrap();
        assert!((r.upper - 0.01).abs() <= 1e-3 && (r.lower - 0.01).abs() <= 1e-3);
        assert!(r.lower <= r.upper);
    }

    #[test]
    fn empty_set_reports_zeros_and_bad_parameters_are_rejected() {
        let r = density_report(&IndexSet::empty(100), 100, 0.5).unwrap();
        assert_eq!((r.upper, r.lower), (0.0, 0.0));
        assert!(density_report(&IndexSet::empty(100), 9, 0.5).is_err());
        assert!(density_report(&IndexSet::empty(100), 100, 1.0).is_err());
        assert!(density_report(&IndexSet::empty(100), 200, 0.5).is_err());
    }

    #[test]
    fn grid_is_increasing_and_covers_both_ends() {
        let g = geometric_grid(500, 1_000_000);
        assert_eq!((g[0], *g.last().unwrap()), (500, 1_000_000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.len() < 3000);
        assert_eq!(geometric_grid(5, 8), vec![5, 6, 7, 8]);
    }

    #[test]
    fn csv_has_header_and_one_row_per_sample() {
        let a = IndexSet::from_rule(SetRule::Naturals, 20).unwrap();
        let r = density_report(&a, 20, 0.5).unwrap();
        let csv = r.to_csv_string().unwrap();
        assert!(csv.starts_with("n,count,ratio\n10,11,1.0\n"));
        assert_eq!(csv.lines().count(), r.samples.len() + 1);
    }
}
