use super::*;
use crate::criteria::{check_norm_form, Horizons, JMode};
use crate::families::{generate_block_family, HittingFamily, IndexSet, SepFn};
use crate::sequence::{FiniteVector, Param, SpaceModel, WeightRule};
use crate::Error;

fn p(s: &str) -> Param {
    s.parse().unwrap()
}

fn two_sided() -> WeightRule {
    WeightRule::two_sided(p("2"), p("1/2")).unwrap()
}

fn tuned_family(count: usize, horizon: u64) -> HittingFamily {
    let eps = crate::criteria::EpsilonSchedule::default_for(count);
    generate_block_family(count, SepFn::for_schedule(eps.value(count)), 4, horizon).unwrap()
}

fn targets(w: &WeightRule, count: usize, zs: &[&str]) -> TargetList {
    let zs = zs.iter().map(|z| parse_sparse(z).unwrap()).collect();
    enumerate_targets(w, count, &TargetRule::Explicit(zs)).unwrap()
}

#[test]
fn zero_targets_give_zero_vector() {
    let w = two_sided();
    let family = tuned_family(2, 3000);
    let t = targets(&w, 2, &[]);
    let s = default_schedules(&w, 2).unwrap();
    let x = build_vector(&w, &family, &t, &s, 3002).unwrap();
    assert!(x.is_empty());
    let report = verify_orbit(&SpaceModel::C0Z, &w, &x, 3000).unwrap();
    assert!(report.points.iter().all(|p| p.error == 0.0 && p.truncation == 0.0));
    assert!(report.hit_sets.iter().all(|h| h.hits == 3001));
}

#[test]
fn single_target_places_v_at_each_element() {
    let w = two_sided();
    let family = tuned_family(1, 4000);
    let t = targets(&w, 1, &["0:1"]);
    let s = default_schedules(&w, 1).unwrap();
    let x = build_vector(&w, &family, &t, &s, 4001).unwrap();
    assert_eq!(x.len(), family.set(1).len());
    for c in &x.coefficients {
        assert_eq!(c.index as u64, c.n);
        assert!((c.value.ln_abs + c.n as f64 * 2f64.ln()).abs() < 1e-9);
    }
    assert_eq!(x.get(family.set(1).elements()[0] as i64 + 1), crate::sequence::LogScalar::ZERO);
    let report = verify_orbit(&SpaceModel::C0Z, &w, &x, 4000).unwrap();
    assert!(report.truncation_certified);
    for point in &report.points {
        assert!(point.error < 0.5, "{point:?}");
        assert!(point.error_bound <= point.bound + ORBIT_TOLERANCE + point.truncation);
    }
    // coordinate 0 of B_w^m x is exactly (w_1...w_m) v_m = 1
    let m = family.set(1).elements()[3];
    let shifted = crate::sequence::apply_shift_power_cached(
        &crate::sequence::VSequence::new(&w, 4001),
        m,
        &x.delivered(),
    )
    .unwrap();
    assert!((shifted.get(0).value() - 1.0).abs() < 1e-12);
}

#[test]
fn supports_are_disjoint_across_sets() {
    let w = two_sided();
    let family = tuned_family(3, 20_000);
    let t = enumerate_targets(&w, 3, &TargetRule::Dyadic).unwrap();
    let s = default_schedules(&w, 3).unwrap();
    let x = build_vector(&w, &family, &t, &s, 20_003).unwrap();
    let mut indices: Vec<i64> = x.coefficients.iter().map(|c| c.index).collect();
    let len = indices.len();
    indices.dedup();
    assert_eq!(indices.len(), len);
    assert!(x.advisories.is_empty());
}

#[test]
fn build_preconditions() {
    let w = two_sided();
    let family = tuned_family(1, 1000);
    let t = targets(&w, 1, &["0:1"]);
    let s = default_schedules(&w, 1).unwrap();
    let max = family.max_element().unwrap() as i64;
    match build_vector(&w, &family, &t, &s, max as u64) {
        Err(Error::WindowTooSmall { required, .. }) => assert_eq!(required, max + 1),
        other => panic!("{other:?}"),
    }
    let crowded = HittingFamily::explicit(vec![IndexSet::new(vec![10, 12], 20).unwrap()], SepFn::default(), 20).unwrap();
    assert!(matches!(build_vector(&w, &crowded, &t, &s, 30), Err(Error::Separation(_))));
    let t2 = targets(&w, 2, &[]);
    assert!(build_vector(&w, &family, &t2, &s, 2000).is_err());
    let loose = generate_block_family(1, SepFn::default(), 4, 1000).unwrap();
    let x = build_vector(&w, &loose, &t, &s, 1001).unwrap();
    assert_eq!(x.advisories.len(), 1);
}

#[test]
fn two_sided_orbit_meets_the_bound() {
    let w = two_sided();
    let family = tuned_family(3, 30_000);
    let eps = crate::criteria::EpsilonSchedule::default_for(3);
    let check = check_norm_form(&SpaceModel::C0Z, &w, &family, &eps, Horizons::uniform(30_000), JMode::Full).unwrap();
    assert!(check.verdict.is_satisfied());
    let t = targets(&w, 3, &["0:1", "-1:1/4, 1:-1/8", "2:1/4"]);
    let s = default_schedules(&w, 3).unwrap();
    let x = build_vector(&w, &family, &t, &s, 30_003).unwrap();
    let mut options = OrbitOptions::new(30_000);
    options.hit_horizon = 5_000;
    let report = verify_orbit_with(&SpaceModel::C0Z, &w, &x, &options).unwrap();
    assert!(report.all_within_bound());
    assert!(report.max_bound_ratio() < 1.0);
    assert!(report.hit_sets.iter().all(|h| h.contains_family));
    for h in &report.hit_sets {
        assert!(h.upper_density.unwrap() >= h.family_upper_density.unwrap());
    }
    for space in [SpaceModel::LpZ(1.0), SpaceModel::LpZ(2.0)] {
        let r = verify_orbit_with(&space, &w, &x, &OrbitOptions { hit_horizon: 100, ..options }).unwrap();
        assert!(r.all_within_bound(), "{space}");
    }
}

#[test]
fn weighted_and_unweighted_pictures_agree() {
    let wiggle = WeightRule::periodic(vec![p("1"), p("3/2"), p("2/3")]).unwrap();
    let w = WeightRule::product(vec![two_sided(), wiggle]).unwrap();
    let family = tuned_family(2, 6000);
    let t = targets(&w, 2, &["0:1", "1:1/3, -1:1/2"]);
    let s = default_schedules(&w, 2).unwrap();
    let x = build_vector(&w, &family, &t, &s, 6002).unwrap();
    for space in [SpaceModel::C0Z, SpaceModel::LpZ(1.5)] {
        let weighted = orbit_report(&space, &w, &x, &OrbitOptions { hit_horizon: 10, ..OrbitOptions::new(6000) })
            .unwrap()
            .points;
        let unweighted = verify_orbit_unweighted(&space, &w, &x, 6000).unwrap();
        assert_eq!(weighted.len(), unweighted.len());
        for (a, b) in weighted.iter().zip(&unweighted) {
            assert_eq!((a.q, a.m), (b.q, b.m));
            assert!(a.error < 1.0);
            assert!((a.error - b.error).abs() <= 1e-10, "{a:?} {b:?}");
        }
    }
}

#[test]
fn unweighted_shift_exceeds_the_bound() {
    let w = WeightRule::constant(p("1")).unwrap();
    let family = tuned_family(1, 2000);
    let t = targets(&w, 1, &["0:1"]);
    let s = default_schedules(&w, 1).unwrap();
    let x = build_vector(&w, &family, &t, &s, 2001).unwrap();
    match verify_orbit(&SpaceModel::C0Z, &w, &x, 2000) {
        Err(Error::BoundExceeded { q: 1, error, terms, .. }) => {
            assert!((error - 1.0).abs() < 1e-12);
            assert!(!terms.is_empty() && (terms[0].1 - 1.0).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    let report = orbit_report(&SpaceModel::C0Z, &w, &x, &OrbitOptions::new(2000)).unwrap();
    assert!(!report.all_within_bound());
    assert!(matches!(
        orbit_report(&SpaceModel::C0N, &w, &x, &OrbitOptions::new(2000)),
        Err(Error::UnsupportedSpace { .. })
    ));
    assert!(matches!(
        orbit_report(&SpaceModel::C0Z, &w, &x, &OrbitOptions::new(2001)),
        Err(Error::WindowTooSmall { .. })
    ));
}

#[test]
fn hit_sets_grow_with_the_radius() {
    let w = two_sided();
    let family = tuned_family(1, 3000);
    let t = targets(&w, 1, &["0:1"]);
    let s = default_schedules(&w, 1).unwrap();
    let x = build_vector(&w, &family, &t, &s, 3001).unwrap();
    let small = orbit_report(&SpaceModel::C0Z, &w, &x, &OrbitOptions { tolerance: -0.25, ..OrbitOptions::new(3000) })
        .unwrap();
    let large = orbit_report(&SpaceModel::C0Z, &w, &x, &OrbitOptions::new(3000)).unwrap();
    let (a, b) = (&small.hit_sets[0].set, &large.hit_sets[0].set);
    assert!(a.iter().all(|m| b.contains(m) == Some(true)));
    assert!(a.len() <= b.len());
}

#[test]
fn alpha_filter_drops_leading_elements() {
    let w = WeightRule::constant(p("2")).unwrap();
    let set = IndexSet::new((0..=10).map(|k| 4 * k).collect(), 41).unwrap();
    let family = HittingFamily::explicit(vec![set], SepFn::default(), 41).unwrap();
    let s = default_schedules(&w, 1).unwrap();
    for space in [SpaceModel::C0Z, SpaceModel::LpZ(1.0)] {
        let (filtered, dropped) = alpha_filter(&space, &w, &family, &s).unwrap();
        assert_eq!(dropped, vec![1]);
        assert_eq!(filtered.set(1).elements()[0], 4);
    }
    let one = WeightRule::constant(p("1")).unwrap();
    assert!(matches!(
        alpha_filter(&SpaceModel::C0Z, &one, &family, &default_schedules(&one, 1).unwrap()),
        Err(Error::EmptyAfterPruning { p: 1, .. })
    ));
}

#[test]
fn text_output_lists_header_and_coefficients() {
    let w = two_sided();
    let family = tuned_family(1, 100);
    let t = targets(&w, 1, &["0:1"]);
    let s = default_schedules(&w, 1).unwrap();
    let x = build_vector(&w, &family, &t, &s, 101).unwrap();
    let text = x.to_text();
    assert!(text.starts_with("# kind: ahc_vector\n# window: 101\n# weight: "));
    assert!(text.contains("# target: 1 | z = 0:1 | y = 0:1\n"));
    assert!(text.contains("\nindex,p,n,j,y,value,ln_abs\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), x.len() + 1);
    let report = verify_orbit(&SpaceModel::C0Z, &w, &x, 100).unwrap();
    assert!(report.csv_string().unwrap().starts_with("m,q,error,bound,truncation,error_bound,within_bound\n"));
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["hit_sets"][0]["q"], 1);
    let _ = FiniteVector::<f64>::zero();
}
