//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use hypershift::criteria::EpsilonSchedule;
use hypershift::families::{generate_block_family, generate_lower_family, HittingFamily, SepFn};
use hypershift::sequence::{Param, WeightRule};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn param(s: &str) -> Param {
    s.parse().unwrap()
}

/// A rational with modulus in `[1/limit, limit]`, optionally signed.
pub fn random_param(rng: &mut ChaCha8Rng, limit: i64, signed: bool) -> Param {
    let num = rng.gen_range(1..=limit);
    let den = rng.gen_range(1..=limit);
    let sign = if signed && rng.gen_bool(0.2) { -1 } else { 1 };
    Param::ratio(sign * num, den)
}

/// A rational strictly above one.
fn random_expanding(rng: &mut ChaCha8Rng) -> Param {
    let den = rng.gen_range(1..=4);
    Param::ratio(den + rng.gen_range(1..=3 * den), den)
}

/// Random two-sided, periodic, table or product weight; every one is
/// invertible with analytic bounds.
pub fn random_weight(rng: &mut ChaCha8Rng) -> WeightRule {
    match rng.gen_range(0..5) {
        0 => WeightRule::two_sided(random_param(rng, 4, true), random_param(rng, 4, true)).unwrap(),
        1 => {
            // expanding forward, contracting backward: the typical positive case
            let a = random_expanding(rng);
            let b = random_expanding(rng).recip();
            WeightRule::two_sided(a, b).unwrap()
        }
        2 => {
            let len = rng.gen_range(1..=4);
            WeightRule::periodic((0..len).map(|_| random_param(rng, 4, true)).collect()).unwrap()
        }
        3 => {
            let base = WeightRule::two_sided(random_expanding(rng), random_expanding(rng).recip()).unwrap();
            let count = rng.gen_range(1..=6);
            let entries: std::collections::BTreeMap<i64, Param> =
                (0..count).map(|_| (rng.gen_range(-20..=20), random_param(rng, 5, true))).collect();
            WeightRule::table(entries.into_iter().collect(), base).unwrap()
        }
        _ => {
            let base = WeightRule::two_sided(random_expanding(rng), random_expanding(rng).recip()).unwrap();
            let len = rng.gen_range(1..=3);
            let wiggle = WeightRule::periodic((0..len).map(|_| random_param(rng, 3, false)).collect()).unwrap();
            WeightRule::product(vec![base, wiggle]).unwrap()
        }
    }
}

/// Random block or pruned-dyadic family with `count` sets up to `horizon`.
pub fn random_family(rng: &mut ChaCha8Rng, count: usize, horizon: u64) -> HittingFamily {
    let sep = match rng.gen_range(0..3) {
        0 => SepFn::default(),
        1 => SepFn::Offset { extra: rng.gen_range(0..=16) },
        _ => SepFn::Scaled { factor: rng.gen_range(1..=3), extra: rng.gen_range(0..=8) },
    };
    if rng.gen_bool(0.7) {
        let growth = *[4u64, 5, 8].choose(rng).unwrap();
        if let Ok(f) = generate_block_family(count, sep, growth, horizon) {
            return f;
        }
        generate_block_family(count, SepFn::default(), 4, horizon).unwrap()
    } else {
        let base = *[16u64, 32].choose(rng).unwrap();
        match generate_lower_family(count, sep, base, horizon) {
            Ok(f) => f,
            Err(_) => generate_lower_family(count, SepFn::default(), 16, horizon).unwrap(),
        }
    }
}

/// Default schedule, sometimes scaled by a random factor in `[1/4, 4]`.
pub fn random_schedule(rng: &mut ChaCha8Rng, count: usize) -> EpsilonSchedule {
    let base = EpsilonSchedule::default_for(count);
    if rng.gen_bool(0.5) {
        base
    } else {
        base.scaled(2f64.powf(rng.gen_range(-2.0..2.0))).unwrap()
    }
}

/// Random weight expanding forward and contracting backward, optionally
/// modulated by a positive periodic factor.
pub fn random_expanding_weight(rng: &mut ChaCha8Rng) -> WeightRule {
    let base = WeightRule::two_sided(random_expanding(rng), random_expanding(rng).recip()).unwrap();
    if rng.gen_bool(0.5) {
        return base;
    }
    let len = rng.gen_range(1..=3);
    let wiggle = WeightRule::periodic((0..len).map(|_| random_param(rng, 2, false)).collect()).unwrap();
    WeightRule::product(vec![base, wiggle]).unwrap()
}
