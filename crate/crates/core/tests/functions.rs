//! Ramsey, Følner and realization computations against brute-force oracles.

use amenlab_core::balance;
use amenlab_core::folner::{self, FolnerSearchStatus};
use amenlab_core::group::{ElementSet, Group, GroupDescriptor, GroupElement};
use amenlab_core::pictures;
use amenlab_core::ramsey::{self, LpHalfStep, Method, RamseyInstance, RamseyOptions};
use amenlab_core::rational::{frac, pow_q, Q};
use amenlab_core::sets::SetExpr;

fn z() -> Group {
    Group::new(GroupDescriptor::integers()).unwrap()
}

fn ints(xs: impl IntoIterator<Item = i64>) -> ElementSet {
    xs.into_iter().map(GroupElement::int).collect()
}

/// Least `|B|` over nonempty `B ⊆ {−6..6}` with `2·|(B+1) ∖ B| · k ≤ |B|`.
fn brute_force_folner(k: i64) -> usize {
    (1u32..1 << 13)
        .filter(|mask| {
            let inside = |x: i64| (-6..=6).contains(&x) && mask >> (x + 6) & 1 == 1;
            let size = mask.count_ones() as i64;
            let escaping = (-6..=6).filter(|&x| inside(x) && !inside(x + 1)).count() as i64;
            2 * escaping * k <= size
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

#[test]
fn integer_folner_function_matches_brute_force() {
    let group = z();
    let window = ints(-6..=6);
    for k in 1..=3 {
        let search = folner::folner_function(&group, k, &window).unwrap();
        assert_eq!(search.value(), Some(brute_force_folner(k as i64)));
        assert!(search.is_exact());
        let FolnerSearchStatus::Exact { set, .. } = &search.status else { unreachable!() };
        let check = folner::is_epsilon_folner(&group, &group.generator_set(), set, &frac(1, k as i64)).unwrap();
        assert!(check.folner);
        // uniform measure on a Følner set has defect at most twice the ratio
        let defect = folner::uniform_defect(&group, &group.generator_set(), set).unwrap();
        assert!(defect <= frac(2, k as i64));
    }
}

#[test]
fn methods_agree_on_every_subset() {
    let group = z();
    for n in 1..=4 {
        for eps in [frac(0, 1), frac(1, 3), frac(1, 2)] {
            let inst = RamseyInstance::new(&group, ints(-1..=1), ints(-n..=n), eps.clone()).unwrap();
            for mask in 0..1u64 << inst.relevant.len() {
                let pics = inst.pictures_of_mask(mask);
                let direct = inst.solve_subset(&pics).unwrap().is_ok();
                let family = balance::SetFamily::indexed(3, pics.iter().copied()).unwrap();
                let balanced = balance::is_epsilon_balanced(&family, &eps).unwrap().is_some();
                assert_eq!(direct, balanced, "n = {n}, mask = {mask:b}");
            }
            let verdicts: Vec<_> = [Method::Direct, Method::Pictures]
                .into_iter()
                .map(|method| {
                    let options = RamseyOptions { method, ..Default::default() };
                    let report = inst.decide(&options).unwrap();
                    assert!(ramsey::verify_report(&group, &report).unwrap());
                    (report.verdict.is_ramsey(), report.verdict.counterexample_mask())
                })
                .collect();
            assert_eq!(verdicts[0], verdicts[1]);
        }
    }
}

#[test]
fn boost_reaches_each_power() {
    let group = z();
    let window = group.ball(1, 10).unwrap();
    let f = |x: &GroupElement| match x {
        GroupElement::Vector(v) => Some(Q::new(v[0].rem_euclid(7).into(), 6.into())),
        _ => None,
    };
    for k in 1..=2u32 {
        let target = pow_q(&frac(3, 4), k);
        let report = ramsey::boost(&group, &window, &target, &f, &LpHalfStep, 4, 3, 100_000).unwrap();
        assert_eq!(report.steps, k as usize);
        assert!(report.gap <= target);
        assert!(ramsey::verify_boost(&group, &window, &f, &report).unwrap());
    }
}

#[test]
fn free_group_small_ball_has_a_realized_unbalanced_family() {
    let group = Group::new(GroupDescriptor::free(&["a", "b"])).unwrap();
    let window = group.ball(1, 100).unwrap();
    let cert = pictures::realization_search(&group, &window, None, 2, 10_000).unwrap().expect("certificate");
    assert!(cert.verify(&group, 10_000).unwrap());
    let positive = balance::family_of_positive_sets(cert.family.ground().to_vec(), &cert.witness.weights).unwrap();
    assert!(cert.family.is_subfamily_of(&positive));
}

#[test]
fn oversized_instances_fall_back_to_the_pool() {
    let group = Group::new(GroupDescriptor::free(&["a", "b"])).unwrap();
    let window = group.ball(1, 100).unwrap();
    let ball = group.ball(3, 1000).unwrap();
    let report = ramsey::is_epsilon_ramsey(&group, &window, &ball, &frac(1, 3), &RamseyOptions::default()).unwrap();
    assert_eq!(report.search, ramsey::SearchScope::CandidatePool);
    assert!(!report.verdict.is_ramsey());
    assert!(ramsey::verify_report(&group, &report).unwrap());
    let Some(verdict_set) = (match &report.verdict {
        ramsey::Verdict::NotRamsey(ramsey::NotRamseyReason::Counterexample { subset, .. }) => Some(subset),
        _ => None,
    }) else {
        unreachable!()
    };
    let pool: Vec<SetExpr> = pictures::candidate_pool(&group, 3);
    assert!(pool.iter().any(|e| e.compile(&group).unwrap().restrict(&report.relevant) == *verdict_set));
}
