//! Acceptance suite: one `PASS` / `FAIL` line per criterion, non-zero exit
//! status when any criterion fails.

mod common;

use std::time::Instant;

use common::{param, random_family, random_schedule, random_weight, rng};
use hypershift::constructor::{
    alpha_filter, build_vector, default_schedules, enumerate_targets, orbit_report, parse_sparse, OrbitOptions,
    TargetRule, ORBIT_TOLERANCE,
};
use hypershift::criteria::{
    check_c0_products, check_norm_form, check_unilateral, symmetry_check, EpsilonSchedule, Horizons, JMode, Verdict,
};
use hypershift::families::{
    check_separation, counting_ratio, density_report, generate_block_family, generate_lower_family, upper_density_at,
    HittingFamily, IndexSet, SepFn, SetRule,
};
use hypershift::sequence::{
    apply_forward_power, apply_shift_power, conjugate_phi_v, reflect_vector, unconjugate_phi_v, v_at_exact,
    FiniteVector, SpaceModel, WeightRule,
};
use num::BigRational;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn two_sided(a: &str, b: &str) -> WeightRule {
    WeightRule::two_sided(param(a), param(b)).unwrap()
}

fn constant(c: &str) -> WeightRule {
    WeightRule::constant(param(c)).unwrap()
}

/// 1. Orbit error along `A_q` within `2^-q`.
fn proof_bound() -> Outcome {
    let count = 4;
    let window = 200_000;
    let outer = 100_000;
    let w = two_sided("2", "1/2");
    let schedules = default_schedules(&w, count).unwrap();
    let sep = SepFn::for_schedule(schedules.epsilon(count));
    let family = generate_block_family(count, sep, 4, window - count as u64).unwrap();
    let (family, dropped) = alpha_filter(&SpaceModel::C0Z, &w, &family, &schedules).unwrap();
    let target_sets = [
        TargetRule::Dyadic,
        TargetRule::Explicit(
            ["0:1", "-1:1/2, 1:-1/2", "-2:1/4, 0:-3/2, 2:1/8", "3:1/16, -3:-1/8"]
                .iter()
                .map(|z| parse_sparse(z).unwrap())
                .collect(),
        ),
    ];
    let mut checked = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_truncation: f64 = 0.0;
    let mut failures = Vec::new();
    for rule in &target_sets {
        let targets = enumerate_targets(&w, count, rule).unwrap();
        let x = build_vector(&w, &family, &targets, &schedules, window).unwrap();
        let report = orbit_report(&SpaceModel::C0Z, &w, &x, &OrbitOptions::new(outer)).unwrap();
        if !report.truncation_certified {
            failures.push("truncation not certified".to_string());
        }
        for p in &report.points {
            checked += 1;
            worst_ratio = worst_ratio.max(p.error_bound / p.bound);
            worst_truncation = worst_truncation.max(p.truncation);
            if !(p.within_bound && p.error_bound <= p.bound + ORBIT_TOLERANCE + p.truncation) {
                failures.push(format!("q={} m={} error={:e}", p.q, p.m, p.error));
            }
        }
        if !report.hit_sets.iter().all(|h| h.contains_family) {
            failures.push("hit set misses a family element".into());
        }
    }
    outcome(
        failures.is_empty() && checked > 0,
        format!(
            "{checked} (q, m) points, max error/2^-q = {worst_ratio:.3e}, max truncation = {worst_truncation:.1e}, \
             alpha filter dropped {dropped:?}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {:?}", &failures[..failures.len().min(3)]) }
        ),
    )
}

/// 2. Norm form on `c0_z` and product form agree in verdict and witness.
fn oracle_equivalence() -> Outcome {
    let mut r = rng(2);
    let mut mismatches = Vec::new();
    let mut kinds = [0usize; 3];
    for i in 0..100 {
        let count = r.gen_range(1..=4);
        let w = random_weight(&mut r);
        let family = random_family(&mut r, count, 10_000);
        let eps = random_schedule(&mut r, count);
        let mode = if r.gen_bool(0.5) { JMode::Full } else { JMode::Zero };
        let h = Horizons::uniform(10_000);
        let a = check_norm_form(&SpaceModel::C0Z, &w, &family, &eps, h, mode).unwrap();
        let b = check_c0_products(&w, &family, &eps, h, mode).unwrap();
        kinds[a.verdict.exit_code() as usize] += 1;
        let same_witness = match (a.verdict.witness(), b.verdict.witness()) {
            (Some(x), Some(y)) => x.tuple() == y.tuple(),
            (None, None) => true,
            _ => false,
        };
        if !(a.verdict.same_kind(&b.verdict) && same_witness) {
            mismatches.push(format!("instance {i}: {} / {}", a.verdict.label(), b.verdict.label()));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "100 instances, {} mismatches (satisfied {}, violated {}, inconclusive {}){}",
            mismatches.len(),
            kinds[0],
            kinds[1],
            kinds[2],
            if mismatches.is_empty() { String::new() } else { format!(": {mismatches:?}") }
        ),
    )
}

/// 3. Zero-mode verdicts invariant under reflection; product identity.
fn reflection_symmetry() -> Outcome {
    let mut r = rng(3);
    let mut unequal = 0;
    let mut worst_identity: f64 = 0.0;
    let mut kinds = [0usize; 3];
    for _ in 0..100 {
        let count = r.gen_range(1..=4);
        let w = random_weight(&mut r);
        let family = random_family(&mut r, count, 10_000);
        let eps = random_schedule(&mut r, count);
        let s = symmetry_check(&w, &family, &eps, 10_000).unwrap();
        kinds[s.original.exit_code() as usize] += 1;
        if !s.equal {
            unequal += 1;
        }
        worst_identity = worst_identity.max(s.identity_max_rel_error);
    }
    outcome(
        unequal == 0 && worst_identity <= 1e-10,
        format!(
            "100 instances, {unequal} unequal verdicts (satisfied {}, violated {}, inconclusive {}), \
             max identity error {worst_identity:.2e} for k <= 10^4",
            kinds[0], kinds[1], kinds[2]
        ),
    )
}

fn disjoint(family: &HittingFamily) -> bool {
    let mut all: Vec<u64> = family.sets().iter().flat_map(|s| s.iter()).collect();
    let len = all.len();
    all.sort_unstable();
    all.dedup();
    all.len() == len
}

/// 4. Generated families: separation and densities.
fn family_invariants() -> Outcome {
    let horizon = 1_000_000;
    let mut problems = Vec::new();
    let mut min_block_margin = f64::INFINITY;
    let mut min_lower_margin = f64::INFINITY;
    for count in 1..=5 {
        for sep in [SepFn::default(), SepFn::for_schedule(EpsilonSchedule::default_for(count).value(count))] {
            let block = generate_block_family(count, sep, 4, horizon).unwrap();
            if check_separation(&block).is_err() || !disjoint(&block) {
                problems.push(format!("block P={count} sep={sep} not separated"));
            }
            for p in 1..=count {
                let s = sep.required(p, p) + 1;
                let upper = upper_density_at(block.set(p), &block.block_ends(p)).unwrap();
                let margin = upper - (1.0 / (2.0 * s as f64) - 0.01);
                min_block_margin = min_block_margin.min(margin);
                if margin < 0.0 {
                    problems.push(format!("block P={count} p={p}: upper density {upper}"));
                }
            }
            for base in [16u64, 64] {
                let lower = generate_lower_family(count, sep, base, horizon).unwrap();
                if check_separation(&lower).is_err() || !disjoint(&lower) {
                    problems.push(format!("lower P={count} K={base} sep={sep} not separated"));
                }
                for p in 1..=count {
                    let target = 0.5 / (base as f64 * 2f64.powi(p as i32 + 1));
                    let d = density_report(lower.set(p), horizon, 0.5).unwrap().lower;
                    min_lower_margin = min_lower_margin.min(d / target);
                    if d < target {
                        problems.push(format!("lower P={count} K={base} p={p}: lower density {d}"));
                    }
                }
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "P = 1..5, two separations, horizon 10^6: min block density margin {min_block_margin:.4}, \
             min lower density / bound {min_lower_margin:.3}{}",
            if problems.is_empty() { String::new() } else { format!("; {problems:?}") }
        ),
    )
}

/// 5. Controls with known outcomes.
fn controls() -> Outcome {
    let mut problems = Vec::new();
    let count = 2;
    let eps = EpsilonSchedule::default_for(count);
    let family = generate_block_family(count, SepFn::for_schedule(eps.value(count)), 4, 20_000).unwrap();
    let h = Horizons::uniform(20_000);
    for (name, w) in [("w = 1", constant("1")), ("w = 2", constant("2"))] {
        let first = check_norm_form(&SpaceModel::C0Z, &w, &family, &eps, h, JMode::Full).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let again = single.install(|| check_norm_form(&SpaceModel::C0Z, &w, &family, &eps, h, JMode::Full).unwrap());
        let products = check_c0_products(&w, &family, &eps, h, JMode::Full).unwrap();
        match (first.verdict.witness(), again.verdict.witness(), products.verdict.witness()) {
            (Some(a), Some(b), Some(c)) if a == b && a.tuple() == c.tuple() => {}
            _ => problems.push(format!("{name}: expected a reproducible violation")),
        }
    }
    let unilateral = check_unilateral(&SpaceModel::C0N, &constant("2"), &family, &eps, h).unwrap();
    if unilateral.verdict != Verdict::SatisfiedToHorizon {
        problems.push(format!("unilateral w = 2: {}", unilateral.verdict.label()));
    }
    let hundreds = IndexSet::from_rule(SetRule::Progression { start: 100, step: 100 }, 100_000).unwrap();
    let d = density_report(&hundreds, 100_000, 0.5).unwrap();
    let at_horizon = counting_ratio(&hundreds, 100_000).unwrap();
    for value in [d.upper, d.lower, at_horizon] {
        if (value - 0.01).abs() > 1e-3 {
            problems.push(format!("density of multiples of 100: {value}"));
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "w = 1 and w = 2 violated with matching witnesses, unilateral w = 2 {}, density {{100 l}} = {at_horizon:.5}{}",
            unilateral.verdict.label(),
            if problems.is_empty() { String::new() } else { format!("; {problems:?}") }
        ),
    )
}

fn random_rational_vector(r: &mut rand_chacha::ChaCha8Rng, lo: i64, hi: i64) -> FiniteVector<BigRational> {
    let size = r.gen_range(1..=6);
    FiniteVector::from_entries((0..size).map(|_| {
        (r.gen_range(lo..=hi), BigRational::new(r.gen_range(-9i64..=9).into(), r.gen_range(1i64..=9).into()))
    }))
}

/// 6. Exact identities in rational arithmetic on `|n| <= 200`.
fn algebraic_exactness() -> Outcome {
    let mut r = rng(6);
    let mut failures = Vec::new();
    let one = constant("1");
    for i in 0..20 {
        let w = random_weight(&mut r);
        for n in -200..200 {
            if v_at_exact(&w, n) != w.eval_exact(n + 1) * v_at_exact(&w, n + 1) {
                failures.push(format!("instance {i}: v recurrence at {n}"));
                break;
            }
        }
        let reflected = w.invert_reflect().unwrap();
        for _ in 0..5 {
            let x = random_rational_vector(&mut r, -100, 100);
            let m = r.gen_range(0..=100);
            let forward = apply_forward_power(&w, m, &x).unwrap();
            if apply_shift_power(&w, m, &forward) != x {
                failures.push(format!("instance {i}: B^m F^m x != x"));
            }
            if apply_forward_power(&w, m, &apply_shift_power(&w, m, &x)).unwrap() != x {
                failures.push(format!("instance {i}: F^m B^m x != x"));
            }
            let conjugated = conjugate_phi_v(&w, &apply_shift_power(&one, m, &unconjugate_phi_v(&w, &x)));
            if conjugated != apply_shift_power(&w, m, &x) {
                failures.push(format!("instance {i}: phi_v B phi_v^-1 != B_w"));
            }
            let mirrored = reflect_vector(&apply_shift_power(&reflected, m, &reflect_vector(&x)));
            if mirrored != forward {
                failures.push(format!("instance {i}: R B_w' R != F_1/w"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "20 weights x 5 vectors, window [-200, 200]: {} inexact identities{}",
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(": {:?}", &failures[..failures.len().min(3)]) }
        ),
    )
}

/// 7. Full mode implies zero mode; zero mode with `eps_p / M^p` implies full mode.
fn restriction_inflation() -> Outcome {
    let mut r = rng(7);
    let mut restriction = (0, 0);
    let mut inflation = (0, 0);
    for _ in 0..30 {
        let count = r.gen_range(1..=3);
        let w = random_weight(&mut r);
        let family = random_family(&mut r, count, 10_000);
        let eps = random_schedule(&mut r, count);
        let h = Horizons::uniform(10_000);
        let run = |eps: &EpsilonSchedule, mode| check_norm_form(&SpaceModel::C0Z, &w, &family, eps, h, mode).unwrap();
        let full = run(&eps, JMode::Full);
        if full.verdict.is_satisfied() {
            restriction.0 += 1;
            if run(&eps, JMode::Zero).verdict.is_satisfied() {
                restriction.1 += 1;
            }
        }
        let deflated = eps.deflated(w.two_sided_operator_bound()).unwrap();
        if run(&deflated, JMode::Zero).verdict.is_satisfied() {
            inflation.0 += 1;
            if full.verdict.is_satisfied() {
                inflation.1 += 1;
            }
        }
    }
    outcome(
        restriction.0 == restriction.1 && inflation.0 == inflation.1 && restriction.0 > 0 && inflation.0 > 0,
        format!(
            "30 instances: full => zero {}/{}, deflated zero => full {}/{}",
            restriction.1, restriction.0, inflation.1, inflation.0
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 proof bound 2^-q along A_q", proof_bound),
        ("2 norm form / product form equivalence", oracle_equivalence),
        ("3 reflection symmetry", reflection_symmetry),
        ("4 family invariants", family_invariants),
        ("5 negative and positive controls", controls),
        ("6 algebraic exactness", algebraic_exactness),
        ("7 restriction / inflation consistency", restriction_inflation),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
