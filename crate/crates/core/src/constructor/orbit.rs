use std::io;

use rayon::prelude::*;
use serde::Serialize;

use super::build::AHCVector;
use crate::criteria::Lse;
use crate::families::{density_report, IndexSet};
use crate::sequence::{Direction, LogScalar, Scalar, SpaceModel, VSequence, WeightRule};
use crate::{Error, Result};

/// Absolute slack added to the `2^-q` bound for floating-point rounding.
pub const ORBIT_TOLERANCE: f64 = 1e-9;

/// How far to follow the orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    /// Errors are checked at `m in A_q ∩ [0, outer_horizon]`.
    pub outer_horizon: u64,
    /// Hit sets are scanned over every `m in [0, hit_horizon]`.
    pub hit_horizon: u64,
    /// Slack added to `2^-q`.
    pub tolerance: f64,
}

impl OrbitOptions {
    pub fn new(outer_horizon: u64) -> Self {
        OrbitOptions { outer_horizon, hit_horizon: outer_horizon, tolerance: ORBIT_TOLERANCE }
    }
}

/// `||B_w^m x - z^(q)||` at one `m in A_q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitPoint {
    pub m: u64,
    pub q: usize,
    /// Error over the window.
    pub error: f64,
    /// `2^-q`
    pub bound: f64,
    /// Bound on the norm of the coordinates the window leaves out.
    pub truncation: f64,
    /// Upper bound on the full error: `error` and `truncation` combined as
    /// norms of vectors with disjoint supports.
    pub error_bound: f64,
    /// `error <= bound + tolerance`. The windowed error never exceeds the
    /// full one, so a miss here falsifies the bound outright.
    pub within_bound: bool,
}

/// `H(z^(q), radius) = {m <= hit_horizon : error < radius}` next to
/// `A_q` on the same range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitSetReport {
    pub q: usize,
    pub radius: f64,
    pub hits: usize,
    pub family_members: usize,
    /// Every member of `A_q` up to the hit horizon is a hit.
    pub contains_family: bool,
    /// Empirical upper density of the hit set and of `A_q` on the same grid.
    pub upper_density: Option<f64>,
    pub family_upper_density: Option<f64>,
    #[serde(skip)]
    pub set: IndexSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitReport {
    pub space: String,
    pub window: u64,
    pub outer_horizon: u64,
    pub hit_horizon: u64,
    /// The truncation terms come from a tail certificate of the weight;
    /// otherwise they are estimates from the last computed `v`.
    pub truncation_certified: bool,
    pub points: Vec<OrbitPoint>,
    pub hit_sets: Vec<HitSetReport>,
}

impl OrbitReport {
    pub fn all_within_bound(&self) -> bool {
        self.points.iter().all(|p| p.within_bound)
    }

    /// Largest `error / 2^-q`.
    pub fn max_bound_ratio(&self) -> f64 {
        self.points.iter().map(|p| p.error / p.bound).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Columns `m,q,error,bound,truncation,error_bound,within_bound`,
    /// ordered by `q` then `m`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Which picture the error is computed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Picture {
    /// `B_w^m phi_v(x) - z^(q)` in `X`.
    Weighted,
    /// `B^m x - y^(q)` in `X(v)`, i.e. weighted by `v` coordinatewise.
    Unweighted,
}

struct Orbit<'a> {
    space: SpaceModel,
    x: &'a AHCVector,
    v: VSequence,
    picture: Picture,
    /// Coordinates `[-radius, radius]` are compared with the targets.
    radius: i64,
    /// Target `q` on `[-radius, radius]` in the chosen picture.
    targets: Vec<Vec<LogScalar>>,
}

/// Shifted vector split into the target window and the rest.
struct Shifted {
    /// Aggregate of the coordinates outside the target window: `ln max`
    /// for `c_0`, `ln sum |.|^r` for `l^r`.
    outside: f64,
    near: Vec<LogScalar>,
}

impl<'a> Orbit<'a> {
    fn new(space: &SpaceModel, w: &WeightRule, x: &'a AHCVector, picture: Picture) -> Result<Self> {
        if !space.is_bilateral() {
            return Err(Error::UnsupportedSpace {
                space: space.to_string(),
                reason: "the construction lives on a space over Z".into(),
            });
        }
        let v = VSequence::new(w, x.window);
        let radius = (x.targets.len() as i64).max(x.targets.max_support());
        let targets = x
            .targets
            .iter()
            .map(|t| {
                (-radius..=radius)
                    .map(|k| match picture {
                        Picture::Weighted => LogScalar::from_f64(t.z.get(k)),
                        Picture::Unweighted => LogScalar::from_f64(t.y.get(k)).times(&v.get(k)),
                    })
                    .collect()
            })
            .collect();
        Ok(Orbit { space: *space, x, v, picture, radius, targets })
    }

    fn shifted(&self, m: u64) -> Shifted {
        let m = m as i64;
        let mut near = vec![LogScalar::ZERO; 2 * self.radius as usize + 1];
        let mut max = f64::NEG_INFINITY;
        let mut lse = Lse::new();
        let r = self.space.exponent();
        for c in &self.x.coefficients {
            let k = c.index - m;
            let value = match self.picture {
                Picture::Weighted => c.value.times(&self.v.get(k)).over(&self.v.get(c.index)),
                Picture::Unweighted => LogScalar::from_f64(c.y).times(&self.v.get(k)),
            };
            if k.abs() <= self.radius {
                near[(k + self.radius) as usize] = value;
            } else {
                match r {
                    None => max = max.max(value.ln_abs),
                    Some(r) => lse.add(r * value.ln_abs),
                }
            }
        }
        Shifted { outside: if r.is_none() { max } else { lse.value() }, near }
    }

    /// `ln ||shifted - target_q||` over the window.
    fn log_error(&self, s: &Shifted, q: usize) -> f64 {
        let diffs = s.near.iter().zip(&self.targets[q - 1]).map(|(a, t)| a.minus(t).ln_abs);
        match self.space.exponent() {
            None => diffs.fold(s.outside, f64::max),
            Some(r) => {
                let mut lse = Lse::new();
                lse.add(s.outside);
                diffs.for_each(|d| lse.add(r * d));
                lse.value() / r
            }
        }
    }

    /// Bound on the coordinates `k >= window + 1 - m` the window omits.
    fn truncation(&self, m: u64) -> (f64, bool) {
        let y_max = self.x.targets.max_abs_y();
        if y_max == 0.0 {
            return (0.0, true);
        }
        let from = self.x.window as i64 + 1 - m as i64;
        let certified = match self.space.exponent() {
            None => self.v.tail_log_sup(Direction::Forward, from),
            Some(r) => self.v.tail_log_power_sum(Direction::Forward, from, r).map(|l| l / r),
        };
        match certified {
            Some(l) => ((y_max.ln() + l).exp(), true),
            None => ((y_max.ln() + self.v.walk(from).ln_abs).exp(), false),
        }
    }

    /// Largest contributions to the error at `(q, m)` as `(index, modulus)`.
    fn dump(&self, q: usize, m: u64) -> Vec<(i64, f64)> {
        let s = self.shifted(m);
        let mut terms: Vec<(i64, f64)> = s
            .near
            .iter()
            .zip(&self.targets[q - 1])
            .enumerate()
            .map(|(i, (a, t))| (i as i64 - self.radius, a.minus(t).modulus()))
            .collect();
        for c in &self.x.coefficients {
            let k = c.index - m as i64;
            if k.abs() > self.radius {
                let value = c.value.times(&self.v.get(k)).over(&self.v.get(c.index));
                terms.push((k, value.modulus()));
            }
        }
        terms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        terms.truncate(8);
        terms
    }
}

fn orbit_points(orbit: &Orbit, options: &OrbitOptions) -> (Vec<OrbitPoint>, bool) {
    let family = &orbit.x.family;
    let tasks: Vec<(usize, u64)> =
        (1..=family.len()).flat_map(|q| family.set(q).range(0, options.outer_horizon).iter().map(move |&m| (q, m))).collect();
    let results: Vec<(OrbitPoint, bool)> = tasks
        .par_iter()
        .map(|&(q, m)| {
            let log_error = orbit.log_error(&orbit.shifted(m), q);
            let error = log_error.exp();
            let bound = 0.5f64.powi(q as i32);
            let (truncation, certified) = orbit.truncation(m);
            let error_bound = orbit.space.combine_disjoint(log_error, truncation.ln()).exp();
            let within_bound = error <= bound + options.tolerance;
            (OrbitPoint { m, q, error, bound, truncation, error_bound, within_bound }, certified)
        })
        .collect();
    let certified = results.iter().all(|r| r.1);
    (results.into_iter().map(|r| r.0).collect(), certified)
}

fn check_window(x: &AHCVector, options: &OrbitOptions) -> Result<()> {
    let support = (x.targets.len() as i64).max(x.targets.max_support());
    let required = options.outer_horizon.max(options.hit_horizon) as i64 + support;
    if (x.window as i64) < required {
        return Err(Error::WindowTooSmall { window: x.window as i64, required });
    }
    Ok(())
}

/// Errors along `A_q` and hit sets, without asserting the bound.
pub fn orbit_report(space: &SpaceModel, w: &WeightRule, x: &AHCVector, options: &OrbitOptions) -> Result<OrbitReport> {
    check_window(x, options)?;
    let orbit = Orbit::new(space, w, x, Picture::Weighted)?;
    let (points, truncation_certified) = orbit_points(&orbit, options);

    let count = x.targets.len();
    let radii: Vec<f64> = (1..=count).map(|q| 0.5f64.powi(q as i32) + options.tolerance).collect();
    let ln_radii: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    // per m, one flag per q
    let hits: Vec<Vec<bool>> = (0..=options.hit_horizon)
        .into_par_iter()
        .map(|m| {
            let s = orbit.shifted(m);
            (1..=count).map(|q| orbit.log_error(&s, q) < ln_radii[q - 1]).collect()
        })
        .collect();
    let mut hit_sets = Vec::with_capacity(count);
    for q in 1..=count {
        let members: Vec<u64> = (0..=options.hit_horizon).filter(|&m| hits[m as usize][q - 1]).collect();
        let set = IndexSet::new(members, options.hit_horizon)?;
        let family_set = x.family.set(q).range(0, options.hit_horizon);
        let contains_family = family_set.iter().all(|&m| hits[m as usize][q - 1]);
        let (upper_density, family_upper_density) = if options.hit_horizon >= 10 {
            let family_set = IndexSet::new(family_set.to_vec(), options.hit_horizon)?;
            (
                Some(density_report(&set, options.hit_horizon, 0.5)?.upper),
                Some(density_report(&family_set, options.hit_horizon, 0.5)?.upper),
            )
        } else {
            (None, None)
        };
        hit_sets.push(HitSetReport {
            q,
            radius: radii[q - 1],
            hits: set.len(),
            family_members: family_set.len(),
            contains_family,
            upper_density,
            family_upper_density,
            set,
        });
    }
    Ok(OrbitReport {
        space: space.to_string(),
        window: x.window,
        outer_horizon: options.outer_horizon,
        hit_horizon: options.hit_horizon,
        truncation_certified,
        points,
        hit_sets,
    })
}

/// [`orbit_report`] followed by the bound check `error <= 2^-q + tolerance`
/// at every computed `(q, m)`; the full error is then at most
/// `2^-q + tolerance + truncation`.
pub fn verify_orbit_with(space: &SpaceModel, w: &WeightRule, x: &AHCVector, options: &OrbitOptions) -> Result<OrbitReport> {
    let report = orbit_report(space, w, x, options)?;
    if let Some(p) = report.points.iter().find(|p| !p.within_bound) {
        let orbit = Orbit::new(space, w, x, Picture::Weighted)?;
        return Err(Error::BoundExceeded {
            q: p.q,
            m: p.m,
            error: p.error,
            bound: p.bound,
            terms: orbit.dump(p.q, p.m),
        });
    }
    Ok(report)
}

/// Checks `||B_w^m x - z^(q)|| <= 2^-q` for `q <= P`, `m in A_q ∩ [0, outer_horizon]`;
/// hit sets are scanned over the same range.
pub fn verify_orbit(space: &SpaceModel, w: &WeightRule, x: &AHCVector, outer_horizon: u64) -> Result<OrbitReport> {
    verify_orbit_with(space, w, x, &OrbitOptions::new(outer_horizon))
}

/// The errors of [`orbit_report`] computed in the unweighted picture:
/// `||B^m x - y^(q)||_{X(v)}` with the unconjugated coefficients. Agrees with
/// the weighted computation through the conjugacy `B_w = phi_v B phi_v^{-1}`.
pub fn verify_orbit_unweighted(
    space: &SpaceModel,
    w: &WeightRule,
    x: &AHCVector,
    outer_horizon: u64,
) -> Result<Vec<OrbitPoint>> {
    let options = OrbitOptions::new(outer_horizon);
    check_window(x, &options)?;
    let orbit = Orbit::new(space, w, x, Picture::Unweighted)?;
    Ok(orbit_points(&orbit, &options).0)
}
