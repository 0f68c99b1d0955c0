use std::io;

use serde::Serialize;

use super::schedules::Schedules;
use super::targets::{Sparse, TargetList};
use crate::criteria::Lse;
use crate::families::{check_separation, HittingFamily, IndexSet, SepFn};
use crate::sequence::{FiniteVector, LogScalar, Scalar, SpaceModel, VSequence, WeightRule};
use crate::{Error, Result};

/// One written coefficient: `x_{n+j} = y_j^(p)` in the unweighted picture
/// and `value = y_j^(p) v_{n+j}` in the delivered vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coefficient {
    pub index: i64,
    pub p: usize,
    pub n: u64,
    pub j: i64,
    pub y: f64,
    pub value: LogScalar,
}

/// The vector `phi_v(x)` with
/// `x = sum_p sum_{|j| <= p} y_j^(p) sum_{n in A_p} e_{n+j}`, stored on the
/// window `[-N, N]`. Only nonzero coefficients are kept, in index order.
#[derive(Clone, Debug)]
pub struct AHCVector {
    pub window: u64,
    pub weight: WeightRule,
    pub family: HittingFamily,
    pub schedules: Schedules,
    pub targets: TargetList,
    pub coefficients: Vec<Coefficient>,
    /// Non-fatal remarks about the inputs (for example a separation below
    /// the one the schedule calls for).
    pub advisories: Vec<String>,
}

impl AHCVector {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficient of the delivered vector at `index` (zero when unwritten).
    pub fn get(&self, index: i64) -> LogScalar {
        match self.coefficients.binary_search_by_key(&index, |c| c.index) {
            Ok(i) => self.coefficients[i].value,
            Err(_) => LogScalar::ZERO,
        }
    }

    /// The delivered vector `phi_v(x)`.
    pub fn delivered(&self) -> FiniteVector<LogScalar> {
        FiniteVector::from_entries(self.coefficients.iter().map(|c| (c.index, c.value)))
    }

    /// The unweighted-picture vector `x`.
    pub fn unweighted(&self) -> FiniteVector<f64> {
        FiniteVector::from_entries(self.coefficients.iter().map(|c| (c.index, c.y)))
    }

    /// Header lines (`# key: value`) followed by the coefficients as CSV
    /// with columns `index,p,n,j,y,value,ln_abs`.
    pub fn write_text<W: io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# kind: ahc_vector")?;
        writeln!(out, "# window: {}", self.window)?;
        writeln!(out, "# weight: {}", self.weight)?;
        writeln!(
            out,
            "# family: {} sets={} sep={} horizon={}",
            self.family.construction(),
            self.family.len(),
            self.family.sep(),
            self.family.horizon()
        )?;
        writeln!(out, "# operator_bound: {}", self.schedules.operator_bound)?;
        let list = |f: &dyn Fn(usize) -> f64| {
            (1..=self.schedules.len()).map(|p| format!("{:e}", f(p))).collect::<Vec<_>>().join(", ")
        };
        writeln!(out, "# epsilon: {}", list(&|p| self.schedules.epsilon(p)))?;
        writeln!(out, "# alpha: {}", list(&|p| self.schedules.alpha(p)))?;
        for t in self.targets.iter() {
            writeln!(out, "# target: {} | z = {} | y = {}", t.p, Sparse(&t.z), Sparse(&t.y))?;
        }
        for a in &self.advisories {
            writeln!(out, "# advisory: {a}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "p", "n", "j", "y", "value", "ln_abs"])?;
        for c in &self.coefficients {
            w.write_record([
                c.index.to_string(),
                c.p.to_string(),
                c.n.to_string(),
                c.j.to_string(),
                c.y.to_string(),
                c.value.value().to_string(),
                c.value.ln_abs.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("text is utf-8")
    }
}

/// Builds `phi_v(x)` on `[-window, window]`.
///
/// Every index `n + j` with `n in A_p`, `|j| <= p` is claimed by exactly one
/// `(p, n)`; a second claim is a [`Error::Collision`]. The window must hold
/// `max A_p + p` for every `p`.
pub fn build_vector(
    w: &WeightRule,
    family: &HittingFamily,
    targets: &TargetList,
    schedules: &Schedules,
    window: u64,
) -> Result<AHCVector> {
    check_separation(family).map_err(Error::Separation)?;
    let count = family.len();
    if targets.len() != count || schedules.len() < count {
        return Err(Error::InvalidParameter(format!(
            "{count} sets need {count} targets and schedules (got {} and {})",
            targets.len(),
            schedules.len()
        )));
    }
    let required = (1..=count).filter_map(|p| family.set(p).max().map(|m| m as i64 + p as i64)).max().unwrap_or(0);
    if (window as i64) < required {
        return Err(Error::WindowTooSmall { window: window as i64, required });
    }

    // every claimed index, including those whose coefficient is zero
    let mut claims: Vec<(i64, usize, u64)> = Vec::new();
    for p in 1..=count {
        for n in family.set(p).iter() {
            for j in -(p as i64)..=p as i64 {
                claims.push((n as i64 + j, p, n));
            }
        }
    }
    claims.sort_unstable();
    if let Some(pair) = claims.windows(2).find(|c| c[0].0 == c[1].0) {
        return Err(Error::Collision {
            index: pair[0].0,
            first_p: pair[0].1,
            first_n: pair[0].2,
            second_p: pair[1].1,
            second_n: pair[1].2,
        });
    }

    let v = VSequence::new(w, window);
    let mut coefficients = Vec::new();
    for (index, p, n) in claims {
        let j = index - n as i64;
        let y = targets.get(p).y.get(j);
        if y == 0.0 {
            continue;
        }
        let value = LogScalar::from_f64(y).times(&v.get(index));
        if !value.ln_abs.is_finite() {
            return Err(Error::InvalidParameter(format!("coefficient at {index} is not finite")));
        }
        coefficients.push(Coefficient { index, p, n, j, y, value });
    }

    let mut advisories = Vec::new();
    let recommended = SepFn::for_schedule(schedules.epsilon(count));
    if let Some((p, q)) =
        (1..=count).flat_map(|p| (1..=count).map(move |q| (p, q))).find(|&(p, q)| family.sep().required(p, q) < recommended.required(p, q))
    {
        advisories.push(format!(
            "separation {} is below {} at (p, q) = ({p}, {q}); the 2^-q bound holds only if check_norm_form passes",
            family.sep(),
            recommended
        ));
    }

    Ok(AHCVector {
        window,
        weight: w.clone(),
        family: family.clone(),
        schedules: schedules.clone(),
        targets: targets.clone(),
        coefficients,
        advisories,
    })
}

/// Drops leading elements of each `A_p` until
/// `||sum_{n in A_p} e_{n+p}||_{X(v)} < alpha_p`, evaluated over the
/// elements up to the family horizon. Returns the filtered family and the
/// number of elements dropped from each set.
pub fn alpha_filter(
    space: &SpaceModel,
    w: &WeightRule,
    family: &HittingFamily,
    schedules: &Schedules,
) -> Result<(HittingFamily, Vec<usize>)> {
    let count = family.len();
    if schedules.len() < count {
        return Err(Error::InvalidParameter(format!("{count} sets need {count} schedule entries")));
    }
    let v = VSequence::new(w, family.horizon() + count as u64);
    let mut filtered = family.clone();
    let mut dropped = Vec::with_capacity(count);
    for p in 1..=count {
        let set = family.set(p);
        let logs: Vec<f64> = set.iter().map(|n| v.ln_abs(n as i64 + p as i64)).collect();
        // ln of the norm of each suffix, computed from the back
        let mut suffix = vec![f64::NEG_INFINITY; logs.len() + 1];
        match space.exponent() {
            None => {
                for i in (0..logs.len()).rev() {
                    suffix[i] = suffix[i + 1].max(logs[i]);
                }
            }
            Some(r) => {
                let mut acc = Lse::new();
                for i in (0..logs.len()).rev() {
                    acc.add(r * logs[i]);
                    suffix[i] = acc.value() / r;
                }
            }
        }
        let keep_from = suffix.iter().position(|&s| s < schedules.ln_alpha(p)).expect("empty suffix has norm zero");
        if keep_from == logs.len() && !logs.is_empty() {
            return Err(Error::EmptyAfterPruning { p, horizon: family.horizon() });
        }
        if keep_from > 0 {
            let kept = IndexSet::new(set.elements()[keep_from..].to_vec(), set.horizon())?;
            filtered = filtered.with_set(p, kept)?;
        }
        dropped.push(keep_from);
    }
    Ok((filtered, dropped))
}
