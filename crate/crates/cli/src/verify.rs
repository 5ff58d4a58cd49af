//! Rechecks an envelope: the digest, then every embedded certificate, by
//! recomputation from the job spec without calling a solver.

use amenlab_core::balance;
use amenlab_core::f2::{self, InvarianceInstance};
use amenlab_core::folner::{self, FolnerReport, FolnerSearch, FolnerSearchStatus, InequalityOutcome, WeightedFolnerValue};
use amenlab_core::group::Group;
use amenlab_core::ramsey::{self, FunctionStatus, RamseyFunctionReport, RamseyReport};
use amenlab_core::rational::{frac, pow_q, Q};
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::envelope::{Envelope, TOOL};
use crate::exec::{
    self, BalanceResult, BoostResult, F2InfeasibleResult, F2VerifyResult, InvarianceProbe, PicturesResult, RealizeResult,
    TableResult, UnbalanceResult,
};
use crate::job::{JobSpec, DEFAULT_BALL_CAP};
use crate::table;
use crate::JobError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub job: String,
    pub valid: bool,
    /// The first failed check, if any.
    pub failure: Option<String>,
}

struct Checker {
    failure: Option<String>,
}

impl Checker {
    fn check(&mut self, ok: bool, what: &str) {
        if !ok && self.failure.is_none() {
            self.failure = Some(what.to_string());
        }
    }
}

fn parse<T: DeserializeOwned>(result: &Value) -> Result<T, JobError> {
    Ok(serde_json::from_value(result.clone())?)
}

pub fn verify_envelope(envelope: &Envelope) -> Result<VerifyReport, JobError> {
    let mut c = Checker { failure: None };
    c.check(envelope.tool == TOOL, "tool name");
    c.check(envelope.digest_matches()?, "digest mismatch");
    verify_result(&envelope.job, &envelope.result, &mut c)?;
    Ok(VerifyReport {
        job: envelope.job.name().to_string(),
        valid: c.failure.is_none(),
        failure: c.failure,
    })
}

fn verify_probe(instance: &InvarianceInstance, probe: &InvarianceProbe, c: &mut Checker) -> Result<(), JobError> {
    let cert = &probe.certificate;
    c.check(cert.is_feasible() == probe.feasible, "feasibility flag");
    c.check(instance.verify(&probe.delta, cert)?, "invariance certificate");
    if let Some(measure) = &probe.measure {
        let listed: Vec<_> = measure.iter().map(|p| (p.word.clone(), p.weight.clone())).collect();
        c.check(instance.measure_of(cert).as_ref() == Some(&listed), "measure matches point");
    }
    Ok(())
}

fn verify_result(job: &JobSpec, result: &Value, c: &mut Checker) -> Result<(), JobError> {
    match job {
        JobSpec::RamseyCheck {
            group, m, n, eps, method, ..
        } => {
            let group = Group::new(group.clone())?;
            let report: RamseyReport = parse(result)?;
            c.check(report.window == group.ball(*m, DEFAULT_BALL_CAP)?, "window is B_m");
            c.check(report.ball == group.ball(*n, DEFAULT_BALL_CAP)?, "ball is B_n");
            c.check(report.eps == *eps && report.method == *method, "parameters echo");
            c.check(ramsey::verify_report(&group, &report)?, "ramsey certificate");
        }
        JobSpec::RamseyFunction { m, eps, n_max, .. } => {
            let report: RamseyFunctionReport = parse(result)?;
            c.check(report.m == *m && report.eps == *eps && report.n_max == *n_max, "parameters echo");
            let consecutive = report.radii.iter().enumerate().all(|(i, r)| r.n == m + i);
            c.check(consecutive, "radii are consecutive from m");
            let negatives_before_last = report
                .radii
                .iter()
                .rev()
                .skip(usize::from(matches!(report.status, FunctionStatus::Found { .. })))
                .all(|r| !r.ramsey);
            c.check(negatives_before_last, "only the last radius may be Ramsey");
            let status_ok = match report.status {
                FunctionStatus::Found { n } => report.radii.last().is_some_and(|r| r.n == n && r.ramsey),
                FunctionStatus::Exhausted => report.radii.last().is_none_or(|r| r.n == *n_max),
                FunctionStatus::CapExceeded { n, .. } => report.radii.last().map_or(n == *m, |r| r.n + 1 == n),
            };
            c.check(status_ok, "status consistent with radii");
        }
        JobSpec::FolnerCheck { group, eps, .. } => {
            let group = Group::new(group.clone())?;
            let report: FolnerReport = parse(result)?;
            c.check(report.eps == *eps, "eps echo");
            c.check(report.verify(&group)?, "Følner counts");
        }
        JobSpec::FolnerFunction { group, k, radius } => {
            let group = Group::new(group.clone())?;
            let search: FolnerSearch = parse(result)?;
            c.check(search.k == *k && search.window == group.ball(*radius, DEFAULT_BALL_CAP)?, "parameters echo");
            match &search.status {
                FolnerSearchStatus::Exact { size, set } | FolnerSearchStatus::UpperBound { size, set } => {
                    c.check(set.len() == *size && set.is_subset(&search.window), "set inside window");
                    let check = folner::is_epsilon_folner(&group, &group.generator_set(), set, &frac(1, *k as i64))?;
                    c.check(check.folner, "set is Følner");
                    c.check(*size >= search.lower_bound, "lower bound respected");
                }
                FolnerSearchStatus::NotFound => {}
            }
        }
        JobSpec::WeightedFolner { group, m, n } => {
            let group = Group::new(group.clone())?;
            let value: WeightedFolnerValue = parse(result)?;
            c.check(value.m == *m && value.n == *n, "parameters echo");
            c.check(folner::verify_weighted(&group, &value, DEFAULT_BALL_CAP)?, "weighted optimum certificate");
        }
        JobSpec::Balance { family, eps } => {
            let r: BalanceResult = parse(result)?;
            c.check(balance::verify_deficiency(family, &r.deficiency)?, "deficiency certificate");
            if let Some(eps) = eps {
                match &r.at_eps {
                    Some(at) => {
                        c.check(at.eps == *eps, "eps echo");
                        match &at.witness {
                            Some(w) => c.check(w.verify(family, eps), "balanced witness"),
                            None => c.check(r.deficiency.value > *eps, "unbalanced at eps"),
                        }
                    }
                    None => c.check(false, "missing result at eps"),
                }
            }
            match &r.unbalance {
                Some(w) => c.check(w.verify(family), "unbalance witness"),
                None => c.check(r.deficiency.value.is_zero(), "unbalance witness present iff deficiency positive"),
            }
        }
        JobSpec::UnbalanceWitness { family } => {
            let r: UnbalanceResult = parse(result)?;
            match (&r.witness, &r.balanced) {
                (Some(w), None) => c.check(w.verify(family), "unbalance witness"),
                (None, Some(b)) => c.check(b.verify(family, &Q::zero()), "0-balanced witness"),
                _ => c.check(false, "exactly one witness expected"),
            }
        }
        JobSpec::Pictures {
            group,
            m,
            target,
            radius,
        } => {
            let group = Group::new(group.clone())?;
            let r: PicturesResult = parse(result)?;
            let window = group.ball(*m, DEFAULT_BALL_CAP)?;
            let domain = group.ball(*radius, DEFAULT_BALL_CAP)?;
            let ctx = amenlab_core::pictures::PictureContext::new(&group, window.clone(), target.compile(&group)?)?;
            c.check(r.window == window && r.domain_size == domain.len(), "window and domain");
            c.check(ctx.realized_family(&domain) == r.family, "realized family");
            c.check(balance::verify_deficiency(&r.family, &r.deficiency)?, "deficiency certificate");
            match &r.unbalance {
                Some(w) => c.check(w.verify(&r.family), "unbalance witness"),
                None => c.check(r.deficiency.value.is_zero(), "unbalance witness present iff deficiency positive"),
            }
        }
        JobSpec::RealizeSearch { group, m, radius, weights } => {
            let group = Group::new(group.clone())?;
            let r: RealizeResult = parse(result)?;
            if let Some(cert) = &r.certificate {
                c.check(cert.window == group.ball(*m, DEFAULT_BALL_CAP)?, "window is B_m");
                c.check(cert.radius == *radius && cert.requested_weights == *weights, "parameters echo");
                c.check(cert.verify(&group, DEFAULT_BALL_CAP)?, "non-amenability certificate");
            }
        }
        JobSpec::Boost {
            group, m, eps, function, ..
        } => {
            let group = Group::new(group.clone())?;
            let r: BoostResult = parse(result)?;
            let window = group.ball(*m, DEFAULT_BALL_CAP)?;
            c.check(r.window == window, "window is B_m");
            let f = exec::test_function(&group, function)?;
            c.check(ramsey::verify_boost(&group, &window, &f, &r.report)?, "boosted chain");
            c.check(r.report.bound <= *eps, "bound below eps");
            c.check(r.report.bound == pow_q(&ramsey::step_factor(), r.report.steps as u32), "bound is a power of 3/4");
        }
        JobSpec::F2Verify { identities, disjoint } => {
            let r: F2VerifyResult = parse(result)?;
            let again = identities.map(f2::verify_identities).transpose()?;
            let again_disjoint = disjoint
                .map(|d| f2::verify_disjoint_translates(d.count, d.max_length))
                .transpose()?;
            c.check(again == r.identities && again_disjoint == r.disjoint, "scan reproduces");
            let all = r.identities.iter().chain(r.disjoint.iter()).all(|s| s.all_passed());
            c.check(all == r.all_passed, "summary flag");
        }
        JobSpec::F2Infeasible {
            translates,
            radius,
            delta,
            bisect_steps,
            ..
        } => {
            let r: F2InfeasibleResult = parse(result)?;
            let instance = InvarianceInstance::new(*translates, *radius, DEFAULT_BALL_CAP)?;
            c.check(r.support_size == instance.support.len(), "support size");
            verify_probe(&instance, &r.probe, c)?;
            match (delta, &r.upper) {
                (Some(d), None) => c.check(r.probe.delta == *d, "delta echo"),
                (None, Some(upper)) => {
                    verify_probe(&instance, upper, c)?;
                    c.check(!r.probe.feasible && upper.feasible, "bracket orientation");
                    let width = pow_q(&frac(1, 2), *bisect_steps);
                    c.check(&upper.delta - &r.probe.delta == width, "bracket width");
                    if let Some(min) = &r.minimal_delta {
                        c.check(r.probe.delta < *min && *min <= upper.delta, "minimum inside bracket");
                    }
                }
                (None, None) => c.check(r.probe.delta.is_zero() && r.probe.feasible, "feasible at zero"),
                (Some(_), Some(_)) => c.check(false, "unexpected bracket"),
            }
        }
        JobSpec::FunctionTable { .. } => {
            let r: TableResult = parse(result)?;
            c.check(table::render_csv(&r.report)? == r.csv, "csv matches report");
            for check in &r.report.checks {
                let holds = check.lhs.upper.as_ref().is_some_and(|u| *u <= check.rhs.lower);
                let violated = check.rhs.upper.as_ref().is_some_and(|u| check.lhs.lower > *u);
                let expected = match check.outcome {
                    InequalityOutcome::Holds => holds,
                    InequalityOutcome::Violated => violated,
                    InequalityOutcome::Untested { .. } => !holds && !violated,
                };
                c.check(expected, &format!("outcome of {}", check.name));
            }
            c.check(r.report.all_hold(), "no inequality violated");
        }
    }
    Ok(())
}
