//! Run configuration: one TOML document describing the space, the weight,
//! the family, the schedule, the horizons and where outputs go.

use std::fmt;
use std::path::{Path, PathBuf};

use hypershift::constructor::{parse_sparse, TargetRule};
use hypershift::criteria::{EpsilonSchedule, JMode};
use hypershift::families::{
    generate_block_family, generate_lower_family, HittingFamily, IndexSet, SepFn, SetRule,
};
use hypershift::sequence::{SpaceModel, WeightRule, WeightSpec};
use serde::{Deserialize, Serialize};

/// A configuration problem, reported before any computation starts.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

fn default_j_mode() -> JMode {
    JMode::Full
}

fn is_full(mode: &JMode) -> bool {
    *mode == JMode::Full
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceModel,
    /// Shifts `j` checked on bilateral spaces: `full` or `zero`.
    #[serde(default = "default_j_mode", skip_serializing_if = "is_full")]
    pub j_mode: JMode,
    /// Re-check violation witnesses in exact rational arithmetic.
    #[serde(default, skip_serializing_if = "is_false")]
    pub rational: bool,
    pub horizons: HorizonSpec,
    pub weight: WeightSpec,
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "ScheduleSpec::is_default")]
    pub schedule: ScheduleSpec,
    #[serde(default, skip_serializing_if = "CheckSpec::is_default")]
    pub check: CheckSpec,
    #[serde(default, skip_serializing_if = "ConstructionSpec::is_default")]
    pub construction: ConstructionSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    /// Number of sets `P`.
    pub sets: usize,
    /// Horizon for `m` (and for the orbit).
    pub outer: u64,
    /// Horizon for `n`; defaults to `outer`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<u64>,
    /// Window of the constructed vector; defaults to the smallest that
    /// covers the orbit checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    /// Last `m` scanned for orbit hit sets; defaults to `outer`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hit: Option<u64>,
}

impl HorizonSpec {
    pub fn inner(&self) -> u64 {
        self.inner.unwrap_or(self.outer)
    }

    pub fn hit(&self) -> u64 {
        self.hit.unwrap_or(self.outer)
    }
}

/// Where the sets `A_1, ..., A_P` come from. `sep` is a separation
/// function (`offset:<extra>` or `scaled:<factor>:<extra>`) or `schedule`,
/// the separation tuned to the smallest tolerance of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Block {
        #[serde(default = "default_growth")]
        growth: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sep: Option<String>,
    },
    Lower {
        base: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sep: Option<String>,
    },
    /// One closed-form rule per set, e.g. `progression:0:100`.
    Rules {
        rules: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sep: Option<String>,
    },
    /// A family text file, relative to the configuration file.
    File { path: PathBuf },
}

fn default_growth() -> u64 {
    4
}

/// Tolerances `eps_p`: the default `1 / (p (2p+1) 4^p)`, or explicit
/// values, optionally multiplied by `scale`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl ScheduleSpec {
    fn is_default(&self) -> bool {
        *self == ScheduleSpec::default()
    }
}

/// Extra checks run by `check`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Also run the product form (`c0_z` only) and compare.
    #[serde(default, skip_serializing_if = "is_false")]
    pub product_form: bool,
    /// Thresholds for the frequent-growth check; empty skips it.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub growth_thresholds: Vec<f64>,
}

impl CheckSpec {
    fn is_default(&self) -> bool {
        *self == CheckSpec::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    /// Explicit targets in `index:value, ...` form (`zero` for the zero
    /// vector); absent means the dyadic enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
    /// Drop leading set elements until the unit-vector sums are below `alpha_p`.
    #[serde(default = "default_true")]
    pub alpha_filter: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ConstructionSpec {
    fn default() -> Self {
        ConstructionSpec { targets: None, alpha_filter: true }
    }
}

impl ConstructionSpec {
    fn is_default(&self) -> bool {
        *self == ConstructionSpec::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out") }
    }
}

/// A validated configuration with its derived objects.
pub struct Resolved {
    pub config: RunConfig,
    /// Directory of the configuration file; relative paths start here.
    pub base: PathBuf,
    pub weight: WeightRule,
    pub schedule: EpsilonSchedule,
    pub targets: TargetRule,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| invalid(format!("cannot parse configuration: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configurations always serialize")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks every invariant and builds the weight, schedule and targets.
    pub fn resolve(self, base: PathBuf) -> Result<Resolved, ConfigError> {
        let h = &self.horizons;
        if h.sets == 0 {
            return Err(invalid("horizons.sets must be positive"));
        }
        for (name, value) in [("outer", Some(h.outer)), ("inner", h.inner), ("window", h.window), ("hit", h.hit)] {
            if value == Some(0) {
                return Err(invalid(format!("horizons.{name} must be positive")));
            }
        }
        let weight = WeightRule::from_spec(&self.weight).map_err(|e| invalid(format!("weight: {e}")))?;
        match (self.space.is_bilateral(), self.j_mode) {
            (true, JMode::Unilateral) => {
                return Err(invalid(format!("j_mode `unilateral` needs a space over N_0, not {}", self.space)))
            }
            (false, JMode::Zero) => return Err(invalid(format!("j_mode `zero` needs a space over Z, not {}", self.space))),
            (true, JMode::Zero) if !weight.is_invertible() => {
                return Err(invalid(format!(
                    "j_mode `zero` needs an invertible weight; {weight} has inf |w_n| = {} and sup |w_n| = {}",
                    weight.inf_abs(),
                    weight.sup_abs()
                )))
            }
            _ => {}
        }
        let schedule = self.schedule.resolve(h.sets)?;
        self.family.validate(h.sets)?;
        let targets = match &self.construction.targets {
            None => TargetRule::Dyadic,
            Some(list) => TargetRule::Explicit(
                list.iter()
                    .map(|z| parse_sparse(z).map_err(|e| invalid(format!("target `{z}`: {e}"))))
                    .collect::<Result<_, _>>()?,
            ),
        };
        for t in &self.check.growth_thresholds {
            if !(*t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("growth threshold {t} must be positive and finite")));
            }
        }
        Ok(Resolved { config: self, base, weight, schedule, targets })
    }
}

impl ScheduleSpec {
    fn resolve(&self, sets: usize) -> Result<EpsilonSchedule, ConfigError> {
        let base = match &self.values {
            None => EpsilonSchedule::default_for(sets),
            Some(values) if values.len() == sets => {
                EpsilonSchedule::from_values(values).map_err(|e| invalid(format!("schedule: {e}")))?
            }
            Some(values) => {
                return Err(invalid(format!("schedule has {} values for {sets} sets", values.len())));
            }
        };
        match self.scale {
            None => Ok(base),
            Some(c) => base.scaled(c).map_err(|e| invalid(format!("schedule scale: {e}"))),
        }
    }
}

fn parse_sep(sep: &Option<String>, schedule: &EpsilonSchedule) -> Result<SepFn, ConfigError> {
    match sep.as_deref().map(str::trim) {
        None | Some("schedule") => {
            let eps_min = schedule.values().iter().copied().fold(f64::INFINITY, f64::min);
            Ok(SepFn::for_schedule(eps_min))
        }
        Some(s) => s.parse().map_err(|e| invalid(format!("family.sep: {e}"))),
    }
}

impl FamilySpec {
    fn validate(&self, sets: usize) -> Result<(), ConfigError> {
        let sep = match self {
            FamilySpec::Block { growth, sep } => {
                if *growth < 2 {
                    return Err(invalid("family.growth must be at least 2"));
                }
                sep
            }
            FamilySpec::Lower { base, sep } => {
                if *base == 0 {
                    return Err(invalid("family.base must be positive"));
                }
                sep
            }
            FamilySpec::Rules { rules, sep } => {
                if rules.len() != sets {
                    return Err(invalid(format!("family has {} rules for {sets} sets", rules.len())));
                }
                for r in rules {
                    r.parse::<SetRule>().map_err(|e| invalid(format!("family rule `{r}`: {e}")))?;
                }
                sep
            }
            FamilySpec::File { .. } => return Ok(()),
        };
        parse_sep(sep, &EpsilonSchedule::default_for(1)).map(|_| ())
    }

    /// The family known up to `horizon`.
    pub fn build(
        &self,
        sets: usize,
        schedule: &EpsilonSchedule,
        horizon: u64,
        base: &Path,
    ) -> hypershift::Result<HittingFamily> {
        let sep = |s: &Option<String>| {
            parse_sep(s, schedule).map_err(|e| hypershift::Error::InvalidParameter(e.0))
        };
        match self {
            FamilySpec::Block { growth, sep: s } => generate_block_family(sets, sep(s)?, *growth, horizon),
            FamilySpec::Lower { base: k, sep: s } => generate_lower_family(sets, sep(s)?, *k, horizon),
            FamilySpec::Rules { rules, sep: s } => {
                let sets = rules
                    .iter()
                    .map(|r| IndexSet::from_rule(r.parse()?, horizon))
                    .collect::<hypershift::Result<Vec<_>>>()?;
                HittingFamily::explicit(sets, sep(s)?, horizon)
            }
            FamilySpec::File { path } => {
                let family = HittingFamily::from_text(&std::fs::read_to_string(base.join(path))?)?;
                if family.len() != sets {
                    return Err(hypershift::Error::InvalidParameter(format!(
                        "{} holds {} sets, the configuration asks for {sets}",
                        path.display(),
                        family.len()
                    )));
                }
                if family.horizon() > horizon {
                    family.truncated(horizon)
                } else {
                    Ok(family)
                }
            }
        }
    }
}
