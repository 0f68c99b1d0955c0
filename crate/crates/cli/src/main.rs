//! `hypershift`: batch front end for checking weighted-shift conditions,
//! generating hitting-set families and constructing hypercyclic vectors.
//!
//! Every run is described by one TOML configuration file; command-line
//! flags only override horizons, threads, the exact-arithmetic switch and
//! the output directory. Outputs are written to the output directory and
//! are byte-identical for identical configurations.
//!
//! Exit codes: `check` returns 0 (satisfied), 1 (violated) or 2
//! (inconclusive); `orbit` and `invert` return 0 on success and 1 when the
//! bound or the symmetry fails; configuration errors return 64 and errors
//! raised by a computation return 65.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypershift::constructor::{
    alpha_filter, build_vector, default_schedules, enumerate_targets, orbit_report, AHCVector, OrbitOptions,
};
use hypershift::criteria::{
    check_c0_products, check_frequent_growth, check_norm_form, check_unilateral, confirm_witness_exact,
    symmetry_check, CriterionReport, ExactWitnessCheck, Horizons,
};
use hypershift::families::{check_separation, density_report, HittingFamily};
use hypershift::sequence::SpaceModel;
use serde::Serialize;

use config::{ConfigError, Resolved, RunConfig};

const EXIT_CONFIG: u8 = 64;
const EXIT_MODULE: u8 = 65;

#[derive(Parser)]
#[command(name = "hypershift", version, about = "Workbench for frequently hypercyclic weighted shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Sets both the outer and the inner horizon.
    #[arg(long, global = true, value_name = "N")]
    horizon: Option<u64>,
    /// Horizon for `m` and for the orbit.
    #[arg(long, global = true, value_name = "N")]
    outer: Option<u64>,
    /// Horizon for `n`.
    #[arg(long, global = true, value_name = "N")]
    inner: Option<u64>,
    /// Window of the constructed vector.
    #[arg(long, global = true, value_name = "N")]
    window: Option<u64>,
    /// Re-check witnesses in exact rational arithmetic.
    #[arg(long, global = true)]
    rational: bool,
    /// Worker threads (default: all available cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the weight condition on the configured family.
    Check,
    /// Generate the family and summarise its densities.
    Family,
    /// Construct the hypercyclic vector.
    Build,
    /// Construct the vector and verify its orbit against the 2^-q bound.
    Orbit,
    /// Print the reflected inverse weight and compare verdicts.
    Invert,
    /// Counting-function densities of every set of the family.
    Density,
}

enum Failure {
    Config(ConfigError),
    Module(hypershift::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<hypershift::Error> for Failure {
    fn from(e: hypershift::Error) -> Self {
        Failure::Module(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Module(e.into())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = setup(&cli).and_then(|run| {
        match cli.command {
            Command::Check => cmd_check(&run),
            Command::Family => cmd_family(&run),
            Command::Build => cmd_build(&run),
            Command::Orbit => cmd_orbit(&run),
            Command::Invert => cmd_invert(&run),
            Command::Density => cmd_density(&run),
        }
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Module(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_MODULE)
        }
    }
}

/// A resolved configuration plus the output directory.
struct Run {
    resolved: Resolved,
    out: PathBuf,
}

impl Run {
    fn config(&self) -> &RunConfig {
        &self.resolved.config
    }

    fn horizons(&self) -> Horizons {
        let h = &self.config().horizons;
        Horizons::new(h.outer, h.inner())
    }

    fn family(&self, horizon: u64) -> hypershift::Result<HittingFamily> {
        let c = self.config();
        c.family.build(c.horizons.sets, &self.resolved.schedule, horizon, &self.resolved.base)
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
        let path = self.out.join(name);
        fs::write(&path, contents)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn setup(cli: &Cli) -> Result<Run, Failure> {
    let path = cli.config.as_deref().ok_or_else(|| ConfigError("--config <PATH> is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(h) = cli.horizon {
        config.horizons.outer = h;
        config.horizons.inner = Some(h);
    }
    if let Some(h) = cli.outer {
        config.horizons.outer = h;
    }
    if let Some(h) = cli.inner {
        config.horizons.inner = Some(h);
    }
    if let Some(h) = cli.window {
        config.horizons.window = Some(h);
    }
    if cli.rational {
        config.rational = true;
    }
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError(format!("cannot start {n} threads: {e}")))?;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolved = config.resolve(base)?;
    let out = resolved.config.output.dir.clone();
    fs::create_dir_all(&out)?;
    let run = Run { resolved, out };
    run.write("config.toml", run.config().to_toml())?;
    Ok(run)
}

#[derive(Serialize)]
struct ProductComparison {
    verdict: &'static str,
    same_verdict: bool,
    same_witness: bool,
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    verdict: &'static str,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    product_form: Option<ProductComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_witness: Option<ExactWitnessCheck>,
    report: &'a CriterionReport,
}

fn cmd_check(run: &Run) -> Outcome {
    let c = run.config();
    let (w, eps) = (&run.resolved.weight, &run.resolved.schedule);
    let horizons = run.horizons();
    let family = run.family(horizons.outer.max(horizons.inner))?;
    let report = if c.space.is_bilateral() {
        check_norm_form(&c.space, w, &family, eps, horizons, c.j_mode)?
    } else {
        check_unilateral(&c.space, w, &family, eps, horizons)?
    };
    let product_form = if c.check.product_form && c.space == SpaceModel::C0Z {
        let products = check_c0_products(w, &family, eps, horizons, c.j_mode)?;
        Some(ProductComparison {
            verdict: products.verdict.label(),
            same_verdict: products.verdict.same_kind(&report.verdict),
            same_witness: products.verdict.witness().map(|x| x.tuple()) == report.verdict.witness().map(|x| x.tuple()),
        })
    } else {
        None
    };
    let exact_witness = if c.rational { confirm_witness_exact(&report, w)? } else { None };
    let exit_code = report.verdict.exit_code() as u8;
    let output = CheckOutput { verdict: report.verdict.label(), exit_code, product_form, exact_witness, report: &report };
    run.write("report.json", serde_json::to_string_pretty(&output).expect("report serialises") + "\n")?;
    run.write("pairs.csv", report.pairs_csv_string()?)?;
    if !c.check.growth_thresholds.is_empty() {
        let growth = check_frequent_growth(w, &family, horizons, &c.check.growth_thresholds)?;
        run.write("growth.json", growth.to_json() + "\n")?;
        let mut csv = Vec::new();
        growth.write_series_csv(&mut csv)?;
        run.write("growth.csv", csv)?;
    }
    println!("verdict: {}", report.verdict.label());
    if let Some(wit) = report.verdict.witness() {
        println!(
            "witness: p={} q={} m={} j={} n={} ({:?}): ln value {:.6} vs ln bound {:.6}",
            wit.p, wit.q, wit.m, wit.j, wit.n, wit.term, wit.log_value, wit.log_bound
        );
    }
    Ok(exit_code)
}

#[derive(Serialize)]
struct SetSummary {
    p: usize,
    elements: usize,
    first: Option<u64>,
    last: Option<u64>,
    upper_density: f64,
    lower_density: f64,
}

#[derive(Serialize)]
struct FamilySummary {
    construction: String,
    sep: String,
    horizon: u64,
    separated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
    sets: Vec<SetSummary>,
}

fn cmd_family(run: &Run) -> Outcome {
    let horizon = run.config().horizons.outer.max(run.config().horizons.inner());
    let family = run.family(horizon)?;
    let violation = check_separation(&family).err().map(|v| v.to_string());
    let mut sets = Vec::new();
    for (i, set) in family.sets().iter().enumerate() {
        let d = density_report(set, horizon, 0.5)?;
        sets.push(SetSummary {
            p: i + 1,
            elements: set.len(),
            first: set.elements().first().copied(),
            last: set.max(),
            upper_density: d.upper,
            lower_density: d.lower,
        });
    }
    let summary = FamilySummary {
        construction: family.construction().to_string(),
        sep: family.sep().to_string(),
        horizon,
        separated: violation.is_none(),
        violation,
        sets,
    };
    run.write("family.txt", family.to_text())?;
    run.write("family.json", serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n")?;
    for s in &summary.sets {
        println!("A_{}: {} elements, upper {:.6}, lower {:.6}", s.p, s.elements, s.upper_density, s.lower_density);
    }
    Ok(if summary.separated { 0 } else { 1 })
}

#[derive(Serialize)]
struct BuildSummary {
    window: u64,
    family_horizon: u64,
    coefficients: usize,
    dropped: Vec<usize>,
    advisories: Vec<String>,
}

/// Family, filter and vector for `build` and `orbit`.
fn construct(run: &Run) -> Result<(AHCVector, BuildSummary), Failure> {
    let c = run.config();
    let (w, count) = (&run.resolved.weight, c.horizons.sets);
    let schedules = default_schedules(w, count)?;
    let targets = enumerate_targets(w, count, &run.resolved.targets)?;
    let radius = (count as i64).max(targets.max_support()) as u64;
    let window = c.horizons.window.unwrap_or(c.horizons.outer.max(c.horizons.hit()) + radius);
    if window <= count as u64 {
        return Err(ConfigError(format!("window {window} must exceed the number of sets {count}")).into());
    }
    let family_horizon = window - count as u64;
    let family = run.family(family_horizon)?;
    let (family, dropped) = if c.construction.alpha_filter {
        alpha_filter(&c.space, w, &family, &schedules)?
    } else {
        (family, vec![0; count])
    };
    let x = build_vector(w, &family, &targets, &schedules, window)?;
    let summary = BuildSummary { window, family_horizon, coefficients: x.len(), dropped, advisories: x.advisories.clone() };
    run.write("family.txt", family.to_text())?;
    run.write("vector.txt", x.to_text())?;
    Ok((x, summary))
}

fn cmd_build(run: &Run) -> Outcome {
    let (_, summary) = construct(run)?;
    run.write("build.json", serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n")?;
    println!("{} coefficients on window {}", summary.coefficients, summary.window);
    for a in &summary.advisories {
        println!("advisory: {a}");
    }
    Ok(0)
}

fn cmd_orbit(run: &Run) -> Outcome {
    let c = run.config();
    let (x, _) = construct(run)?;
    let options = OrbitOptions { hit_horizon: c.horizons.hit(), ..OrbitOptions::new(c.horizons.outer) };
    let report = orbit_report(&c.space, &run.resolved.weight, &x, &options)?;
    run.write("orbit.csv", report.csv_string()?)?;
    run.write("orbit.json", report.to_json() + "\n")?;
    println!("{} orbit points, max error / 2^-q = {:.3e}", report.points.len(), report.max_bound_ratio());
    if let Some(p) = report.points.iter().find(|p| !p.within_bound) {
        println!("bound exceeded at q={} m={}: error {:e} > {:e}", p.q, p.m, p.error, p.bound);
        return Ok(1);
    }
    Ok(0)
}

fn cmd_invert(run: &Run) -> Outcome {
    let w = &run.resolved.weight;
    let reflected = w.invert_reflect()?;
    println!("weight:    {w}");
    println!("reflected: {reflected}");
    if let Some(spec) = reflected.to_spec() {
        run.write("reflected_weight.toml", spec.to_toml())?;
    }
    let horizon = run.config().horizons.outer;
    let family = run.family(horizon)?;
    let s = symmetry_check(w, &family, &run.resolved.schedule, horizon)?;
    run.write("symmetry.json", s.to_json() + "\n")?;
    println!(
        "zero-mode verdicts: {} / {} ({}), product identity error {:.2e}",
        s.original.label(),
        s.reflected.label(),
        if s.equal { "equal" } else { "different" },
        s.identity_max_rel_error
    );
    Ok(if s.equal { 0 } else { 1 })
}

#[derive(Serialize)]
struct DensitySummary {
    p: usize,
    horizon: u64,
    tail_start: u64,
    upper: f64,
    lower: f64,
}

fn cmd_density(run: &Run) -> Outcome {
    let horizon = run.config().horizons.outer;
    let family = run.family(horizon)?;
    let mut summary = Vec::new();
    for (i, set) in family.sets().iter().enumerate() {
        let d = density_report(set, horizon, 0.5)?;
        run.write(&format!("density_{}.csv", i + 1), d.to_csv_string()?)?;
        println!("A_{}: density in [{:.6}, {:.6}] over [{}, {horizon}]", i + 1, d.lower, d.upper, d.tail_start);
        summary.push(DensitySummary { p: i + 1, horizon, tail_start: d.tail_start, upper: d.upper, lower: d.lower });
    }
    run.write("density.json", serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n")?;
    Ok(0)
}
