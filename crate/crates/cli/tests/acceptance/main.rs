//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always show.

mod vertex_oracle;

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use amenlab::Envelope;
use amenlab_core::balance::{self, SetFamily};
use amenlab_core::f2::{self, InvarianceInstance};
use amenlab_core::folner::{self, HarnessConfig, InequalityOutcome};
use amenlab_core::group::{ElementSet, Group, GroupDescriptor, GroupElement};
use amenlab_core::lp::FeasibilityOutcome;
use amenlab_core::pictures;
use amenlab_core::ramsey::{self, LpHalfStep, Method, RamseyInstance, RamseyOptions};
use amenlab_core::rational::{frac, pow_q, Q};
use num_traits::Zero;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn z() -> Group {
    Group::new(GroupDescriptor::integers()).unwrap()
}

fn ints(xs: impl IntoIterator<Item = i64>) -> ElementSet {
    xs.into_iter().map(GroupElement::int).collect()
}

fn balance_duality() -> Outcome {
    let (mut balanced, mut unbalanced) = (0, 0);
    for bits in 1u64..256 {
        let members = (0..8u64).filter(|s| bits >> s & 1 == 1);
        let family = SetFamily::indexed(3, members).map_err(|e| e.to_string())?;
        let deficiency = balance::balance_deficiency(&family).map_err(|e| e.to_string())?;
        ensure!(balance::verify_deficiency(&family, &deficiency).unwrap(), "deficiency certificate of {bits:08b}");
        let witness = balance::unbalance_witness(&family).map_err(|e| e.to_string())?;
        ensure!(
            deficiency.value.is_zero() != witness.is_some(),
            "family {bits:08b}: deficiency {} with witness {}",
            deficiency.value,
            witness.is_some()
        );
        match witness {
            Some(w) => {
                ensure!(w.verify(&family), "unbalance witness of {bits:08b}");
                unbalanced += 1;
            }
            None => {
                let combo = balance::is_epsilon_balanced(&family, &Q::zero()).unwrap();
                ensure!(combo.is_some_and(|c| c.verify(&family, &Q::zero())), "0-balanced combination of {bits:08b}");
                balanced += 1;
            }
        }
    }
    Ok(format!("255 families: {balanced} balanced, {unbalanced} with unbalance witness"))
}

fn ramsey_method_agreement() -> Outcome {
    let group = z();
    let window = ints(-1..=1);
    let mut subsets = 0u64;
    let mut largest = 0;
    for n in 1..=7i64 {
        for eps in [frac(0, 1), frac(1, 3), frac(1, 2)] {
            let inst = RamseyInstance::new(&group, window.clone(), ints(-n..=n), eps.clone()).map_err(|e| e.to_string())?;
            largest = largest.max(inst.relevant.len());
            for mask in 0..1u64 << inst.relevant.len() {
                let pics = inst.pictures_of_mask(mask);
                let direct = inst.solve_subset(&pics).map_err(|e| e.to_string())?.is_ok();
                let family = SetFamily::indexed(window.len(), pics.iter().copied()).map_err(|e| e.to_string())?;
                let by_pictures = balance::is_epsilon_balanced(&family, &eps).map_err(|e| e.to_string())?.is_some();
                ensure!(direct == by_pictures, "n = {n}, eps = {eps}, subset {mask:b}");
                subsets += 1;
            }
            let mut verdicts = Vec::new();
            for method in [Method::Direct, Method::Pictures] {
                let options = RamseyOptions {
                    method,
                    keep_witnesses: false,
                    ..Default::default()
                };
                let report = inst.decide(&options).map_err(|e| e.to_string())?;
                ensure!(ramsey::verify_report(&group, &report).unwrap(), "report for n = {n}, {method:?}");
                verdicts.push((report.verdict.is_ramsey(), report.verdict.counterexample_mask()));
            }
            ensure!(verdicts[0] == verdicts[1], "verdicts differ at n = {n}, eps = {eps}");
        }
    }
    Ok(format!("{subsets} subset LPs agree, |A·C| up to {largest}"))
}

/// Least `|B|` over nonempty `B ⊆ {−6..6}` with `|(B+1) △ B| ≤ |B|/k`.
fn brute_force_folner(k: i64) -> usize {
    (1u32..1 << 13)
        .filter(|mask| {
            let inside = |x: i64| (-6..=6).contains(&x) && mask >> (x + 6) & 1 == 1;
            let shifted_diff = (-7..=7).filter(|&x| inside(x) != inside(x - 1)).count() as i64;
            shifted_diff * k <= mask.count_ones() as i64
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

fn integer_folner_function() -> Outcome {
    let group = z();
    let window = ints(-6..=6);
    let mut values = Vec::new();
    for (k, expected) in [(1u64, 2usize), (2, 4)] {
        let oracle = brute_force_folner(k as i64);
        ensure!(oracle == expected, "oracle gives Fol({k}) = {oracle}");
        let search = folner::folner_function(&group, k, &window).map_err(|e| e.to_string())?;
        ensure!(search.is_exact(), "Fol({k}) not certified exact");
        ensure!(search.value() == Some(oracle), "Fol({k}) = {:?}, oracle {oracle}", search.value());
        values.push(format!("Fol({k}) = {oracle}"));
    }
    Ok(values.join(", "))
}

fn ball_growth() -> Outcome {
    let free = Group::new(GroupDescriptor::free(&["a", "b"])).unwrap();
    for n in 0..=8u32 {
        let size = free.ball(n as usize, 1 << 20).map_err(|e| e.to_string())?.len() as u64;
        ensure!(size == 2 * 3u64.pow(n) - 1, "|B_{n}| = {size} in F2");
    }
    let groups = [
        (GroupDescriptor::integers(), 1u32),
        (GroupDescriptor::free_abelian(2), 2),
        (GroupDescriptor::free_abelian(3), 3),
        (GroupDescriptor::free(&["a", "b"]), 2),
        (GroupDescriptor::free(&["a", "b", "c"]), 3),
        (GroupDescriptor::cyclic(5), 1),
        (GroupDescriptor::cyclic(12), 1),
    ];
    for (descriptor, rank) in groups {
        let group = Group::new(descriptor.clone()).unwrap();
        for n in 0..=8u32 {
            let size = group.ball(n as usize, 1 << 20).map_err(|e| e.to_string())?.len() as u64;
            ensure!(size <= (2 * rank as u64 + 1).pow(n), "{descriptor:?}: |B_{n}| = {size}");
        }
    }
    Ok("F2 closed form and (2|S|+1)^n bound for 7 groups, n ≤ 8".into())
}

fn free_group_identities() -> Outcome {
    let identities = f2::verify_identities(10).map_err(|e| e.to_string())?;
    let disjoint = f2::verify_disjoint_translates(4, 10).map_err(|e| e.to_string())?;
    let mut checks = 0;
    let mut words = 0;
    for check in identities.checks.iter().chain(&disjoint.checks) {
        ensure!(check.passed(), "{} fails at {:?}", check.name, check.first_failure);
        ensure!(check.words_checked > 0, "{} checked nothing", check.name);
        checks += 1;
        words += check.words_checked;
    }
    let translations = identities.checks.iter().filter(|c| c.name.contains("·Z = Z_")).count();
    ensure!(translations == 53, "expected 53 translation checks (|B_3| in F2), saw {translations}");
    ensure!(disjoint.checks.len() == 4, "expected 4 translate families");
    Ok(format!("{checks} checks, {words} word evaluations, zero failures"))
}

fn invariance_threshold() -> Outcome {
    let instance = InvarianceInstance::new(8, 6, 1 << 20).map_err(|e| e.to_string())?;
    let steps = 10;
    let bracket = f2::bisect_threshold(&instance, steps)
        .map_err(|e| e.to_string())?
        .ok_or("zero tolerance is already feasible")?;
    ensure!(!bracket.lower_outcome.is_feasible(), "lower end feasible");
    ensure!(
        matches!(bracket.lower_outcome, FeasibilityOutcome::Infeasible { .. }),
        "no Farkas certificate"
    );
    ensure!(instance.verify(&bracket.lower, &bracket.lower_outcome).unwrap(), "Farkas certificate rejected");
    ensure!(bracket.upper > bracket.lower, "upper end not above threshold");
    ensure!(bracket.upper_outcome.is_feasible(), "upper end infeasible");
    ensure!(instance.verify(&bracket.upper, &bracket.upper_outcome).unwrap(), "measure rejected");
    let measure = instance.measure_of(&bracket.upper_outcome).ok_or("no explicit measure")?;
    let mass: Q = measure.iter().map(|(_, w)| w.clone()).sum();
    ensure!(mass == Q::from_integer(1.into()), "measure has mass {mass}");
    ensure!(bracket.upper.clone() - bracket.lower.clone() == pow_q(&frac(1, 2), steps), "bracket width");
    Ok(format!(
        "δ* = {} infeasible (Farkas verified), {} feasible with a {}-point measure",
        bracket.lower,
        bracket.upper,
        measure.len()
    ))
}

fn boost_contraction() -> Outcome {
    let group = z();
    let window = group.ball(1, 10).unwrap();
    let f = |x: &GroupElement| match x {
        GroupElement::Vector(v) => Some(Q::new(v[0].rem_euclid(7).into(), 6.into())),
        _ => None,
    };
    let mut gaps = Vec::new();
    for k in 1..=3u32 {
        let target = pow_q(&frac(3, 4), k);
        let report = ramsey::boost(&group, &window, &target, &f, &LpHalfStep, 6, 3, 1 << 20).map_err(|e| e.to_string())?;
        ensure!(report.steps == k as usize, "k = {k}: {} steps", report.steps);
        ensure!(report.gap <= target, "k = {k}: gap {}", report.gap);
        ensure!(ramsey::verify_boost(&group, &window, &f, &report).unwrap(), "k = {k}: chain rejected");
        gaps.push(format!("k={k}: gap {} ≤ {target}", report.gap));
    }
    Ok(gaps.join("; "))
}

fn inequality_harness() -> Outcome {
    let mut held = 0;
    for descriptor in [GroupDescriptor::integers(), GroupDescriptor::cyclic(5)] {
        let group = Group::new(descriptor.clone()).unwrap();
        let config = HarnessConfig {
            m_max: 1,
            k_max: 2,
            ..HarnessConfig::default()
        };
        let report = folner::inequality_harness(&group, &config).map_err(|e| e.to_string())?;
        if let Some(bad) = report.violations().next() {
            return Err(format!("{descriptor:?}: {} violated", bad.name));
        }
        for check in &report.checks {
            let required = check.name.starts_with("R(") || check.name.contains("^F(");
            if required {
                ensure!(
                    check.outcome == InequalityOutcome::Holds,
                    "{descriptor:?}: {} is {:?}",
                    check.name,
                    check.outcome
                );
            }
            held += usize::from(check.outcome == InequalityOutcome::Holds);
        }
    }
    Ok(format!("{held} inequality instances hold on Z and Z/5, none violated"))
}

fn non_amenability_certificate() -> Outcome {
    let free = Group::new(GroupDescriptor::free(&["a", "b"])).unwrap();
    let window = free.ball(1, 100).unwrap();
    let mut found = None;
    for radius in 1..=4 {
        if let Some(cert) = pictures::realization_search(&free, &window, None, radius, 1 << 20).map_err(|e| e.to_string())? {
            found = Some((radius, cert));
            break;
        }
    }
    let (radius, cert) = found.ok_or("no certificate in F2 up to radius 4")?;
    ensure!(cert.verify(&free, 1 << 20).unwrap(), "certificate rejected");
    ensure!(cert.witness.verify(&cert.family), "unbalance witness rejected");
    let positive = balance::family_of_positive_sets(cert.family.ground().to_vec(), &cert.witness.weights).map_err(|e| e.to_string())?;
    ensure!(cert.family.is_subfamily_of(&positive), "realized family not inside the positive sets");

    let integers = z();
    let line_window = integers.ball(1, 100).unwrap();
    let none = pictures::realization_search(&integers, &line_window, None, 4, 1 << 20).map_err(|e| e.to_string())?;
    ensure!(none.is_none(), "Z produced a certificate");
    Ok(format!(
        "F2 certificate at radius {radius} ({} realized sets); Z returns none",
        cert.family.members().count()
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_amenlab"))
        .args(args)
        .env_remove("AMENLAB_CAP")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn lp_certification() -> Outcome {
    let stats = vertex_oracle::run(0x5eed, 500)?;
    let jobs: [&[&str]; 4] = [
        &["--group", "Z", "--eps", "1/2", "ramsey-check", "--n", "3"],
        &["balance", r#"{"ground":["x","y"],"members":[["x"]]}"#],
        &["f2-infeasible", "3", "auto", "3", "--bisect-steps", "8", "--emit-certificate"],
        &["--group", "Z", "weighted-folner", "--n", "3"],
    ];
    for args in jobs {
        let first = run_cli(args)?;
        let second = run_cli(args)?;
        ensure!(first == second, "{args:?}: envelopes differ between runs");
        let envelope: Envelope = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
        let report = amenlab::verify_envelope(&envelope).map_err(|e| e.to_string())?;
        ensure!(report.valid, "{args:?}: {:?}", report.failure);
    }
    Ok(format!("{stats}; 4 envelopes byte-identical across runs and verified"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("balance duality", balance_duality),
        ("Ramsey method agreement", ramsey_method_agreement),
        ("integer Følner function", integer_folner_function),
        ("ball growth", ball_growth),
        ("free-group identities", free_group_identities),
        ("invariance threshold", invariance_threshold),
        ("boost contraction", boost_contraction),
        ("inequality harness", inequality_harness),
        ("non-amenability certificate", non_amenability_certificate),
        ("LP certification", lp_certification),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (tag, detail) = match &outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed += 1;
                ("FAIL", detail)
            }
        };
        println!("criterion {:>2} [{tag}] {name} ({}): {detail}", i + 1, seconds(elapsed));
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn seconds(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}
