//! Runs a [`JobSpec`] and produces its JSON result.

use amenlab_core::balance::{self, BalanceWitness, Deficiency, SetFamily, UnbalanceWitness};
use amenlab_core::f2::{self, InvarianceInstance, ScanReport};
use amenlab_core::folner::{self, HarnessConfig};
use amenlab_core::group::{ElementSet, Group, GroupElement, Word};
use amenlab_core::lp::FeasibilityOutcome;
use amenlab_core::pictures::{self, NonAmenabilityCertificate, PictureContext};
use amenlab_core::ramsey::{self, FunctionStatus, LpHalfStep, RamseyOptions};
use amenlab_core::rational::{serde_q, serde_q_opt, Q};
use amenlab_core::sets::SetExpr;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::job::{JobSpec, TestFunction, DEFAULT_BALL_CAP};
use crate::table;
use crate::JobError;

/// A job's result; `capped` marks partial results cut short by a cap.
#[derive(Debug, Clone, PartialEq)]
pub struct Executed {
    pub result: Value,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceAtEps {
    #[serde(with = "serde_q")]
    pub eps: Q,
    pub witness: Option<BalanceWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceResult {
    pub deficiency: Deficiency,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_eps: Option<BalanceAtEps>,
    /// Present exactly when the deficiency is positive.
    pub unbalance: Option<UnbalanceWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnbalanceResult {
    pub witness: Option<UnbalanceWitness>,
    /// A 0-balanced combination when no unbalance witness exists.
    pub balanced: Option<BalanceWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicturesResult {
    pub window: ElementSet,
    pub domain_size: usize,
    pub family: SetFamily,
    pub deficiency: Deficiency,
    pub unbalance: Option<UnbalanceWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizeResult {
    pub pool_size: usize,
    pub certificate: Option<NonAmenabilityCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoostResult {
    pub window: ElementSet,
    pub report: ramsey::BoostReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2VerifyResult {
    pub identities: Option<ScanReport>,
    pub disjoint: Option<ScanReport>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub word: Word,
    #[serde(with = "serde_q")]
    pub weight: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceProbe {
    #[serde(with = "serde_q")]
    pub delta: Q,
    pub feasible: bool,
    pub certificate: FeasibilityOutcome,
    /// The explicit measure, listed only on request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<WeightedPoint>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2InfeasibleResult {
    pub support_size: usize,
    pub classes: usize,
    /// With bisection: the infeasible lower end, else the requested `δ`.
    pub probe: InvarianceProbe,
    /// With bisection: the feasible upper end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<InvarianceProbe>,
    /// With bisection: the least feasible `δ`, from a direct minimization.
    #[serde(default, with = "serde_q_opt", skip_serializing_if = "Option::is_none")]
    pub minimal_delta: Option<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableResult {
    pub report: folner::HarnessReport,
    pub csv: String,
}

fn elements(group: &Group, labels: &[String]) -> Result<ElementSet, JobError> {
    Ok(group.parse_elements(labels.iter().map(String::as_str))?)
}

/// A function on the group, `None` where undefined.
pub type GroupFunction = Box<dyn Fn(&GroupElement) -> Option<Q> + Sync>;

/// `[0,1]`-valued function described by a [`TestFunction`].
pub fn test_function(group: &Group, spec: &TestFunction) -> Result<GroupFunction, JobError> {
    match spec {
        TestFunction::ModRamp { modulus } => {
            if *modulus < 2 {
                return Err(JobError::Input("modulus must be at least 2".into()));
            }
            if group.is_free() {
                return Err(JobError::Input("mod_ramp needs an abelian group".into()));
            }
            let p = *modulus;
            Ok(Box::new(move |g: &GroupElement| {
                let x = match g {
                    GroupElement::Vector(v) => *v.first()?,
                    GroupElement::Index(i) => i64::from(*i),
                    GroupElement::Word(_) => return None,
                };
                Some(Q::new(x.rem_euclid(p).into(), (p - 1).into()))
            }))
        }
        TestFunction::Indicator { set } => {
            let compiled = set.compile(group)?;
            Ok(Box::new(move |g: &GroupElement| {
                Some(if compiled.contains(g) { Q::from_integer(1.into()) } else { Q::zero() })
            }))
        }
    }
}

fn probe(instance: &InvarianceInstance, delta: Q, outcome: FeasibilityOutcome, emit: bool) -> InvarianceProbe {
    let measure = emit.then(|| instance.measure_of(&outcome)).flatten().map(|points| {
        points.into_iter().map(|(word, weight)| WeightedPoint { word, weight }).collect()
    });
    InvarianceProbe {
        delta,
        feasible: outcome.is_feasible(),
        certificate: outcome,
        measure,
    }
}

fn value<T: Serialize>(result: &T, capped: bool) -> Result<Executed, JobError> {
    Ok(Executed {
        result: serde_json::to_value(result)?,
        capped,
    })
}

pub fn run(job: &JobSpec) -> Result<Executed, JobError> {
    match job {
        JobSpec::RamseyCheck {
            group,
            m,
            n,
            eps,
            method,
            cap,
            witnesses,
        } => {
            let group = Group::new(group.clone())?;
            let window = group.ball(*m, DEFAULT_BALL_CAP)?;
            let ball = group.ball(*n, DEFAULT_BALL_CAP)?;
            let options = RamseyOptions {
                method: *method,
                keep_witnesses: *witnesses,
                enumeration_cap: *cap,
                pool_fallback: true,
            };
            value(&ramsey::is_epsilon_ramsey(&group, &window, &ball, eps, &options)?, false)
        }
        JobSpec::RamseyFunction {
            group,
            m,
            eps,
            n_max,
            method,
            cap,
        } => {
            let group = Group::new(group.clone())?;
            let options = RamseyOptions {
                method: *method,
                keep_witnesses: false,
                enumeration_cap: *cap,
                pool_fallback: true,
            };
            let report = ramsey::ramsey_function(&group, *m, eps, *n_max, &options, DEFAULT_BALL_CAP)?;
            let capped = matches!(report.status, FunctionStatus::CapExceeded { .. });
            value(&report, capped)
        }
        JobSpec::FolnerCheck { group, set, window, eps } => {
            let group = Group::new(group.clone())?;
            let set = elements(&group, set)?;
            let window = match window {
                Some(labels) => elements(&group, labels)?,
                None => group.generator_set(),
            };
            value(&folner::is_epsilon_folner(&group, &window, &set, eps)?, false)
        }
        JobSpec::FolnerFunction { group, k, radius } => {
            let group = Group::new(group.clone())?;
            let window = group.ball(*radius, DEFAULT_BALL_CAP)?;
            value(&folner::folner_function(&group, *k, &window)?, false)
        }
        JobSpec::WeightedFolner { group, m, n } => {
            let group = Group::new(group.clone())?;
            value(&folner::weighted_folner(&group, *m, *n, DEFAULT_BALL_CAP)?, false)
        }
        JobSpec::Balance { family, eps } => {
            let deficiency = balance::balance_deficiency(family)?;
            let at_eps = match eps {
                Some(eps) => Some(BalanceAtEps {
                    eps: eps.clone(),
                    witness: balance::is_epsilon_balanced(family, eps)?,
                }),
                None => None,
            };
            let unbalance = if deficiency.value.is_zero() {
                None
            } else {
                balance::unbalance_witness(family)?
            };
            value(
                &BalanceResult {
                    deficiency,
                    at_eps,
                    unbalance,
                },
                false,
            )
        }
        JobSpec::UnbalanceWitness { family } => {
            let witness = balance::unbalance_witness(family)?;
            let balanced = match witness {
                Some(_) => None,
                None => balance::is_epsilon_balanced(family, &Q::zero())?,
            };
            value(&UnbalanceResult { witness, balanced }, false)
        }
        JobSpec::Pictures {
            group,
            m,
            target,
            radius,
        } => {
            let group = Group::new(group.clone())?;
            value(&pictures_result(&group, *m, target, *radius)?, false)
        }
        JobSpec::RealizeSearch {
            group,
            m,
            radius,
            weights,
        } => {
            let group = Group::new(group.clone())?;
            let window = group.ball(*m, DEFAULT_BALL_CAP)?;
            let certificate = pictures::realization_search(&group, &window, weights.as_deref(), *radius, DEFAULT_BALL_CAP)?;
            let pool_size = pictures::candidate_pool(&group, *radius).len();
            value(&RealizeResult { pool_size, certificate }, false)
        }
        JobSpec::Boost {
            group,
            m,
            eps,
            function,
            max_steps,
            growth,
        } => {
            let group = Group::new(group.clone())?;
            let window = group.ball(*m, DEFAULT_BALL_CAP)?;
            let f = test_function(&group, function)?;
            let report = ramsey::boost(&group, &window, eps, &f, &LpHalfStep, *max_steps, *growth, DEFAULT_BALL_CAP)?;
            value(&BoostResult { window, report }, false)
        }
        JobSpec::F2Verify { identities, disjoint } => {
            if identities.is_none() && disjoint.is_none() {
                return Err(JobError::Input("nothing to verify: give identities and/or disjoint".into()));
            }
            let identities = identities.map(f2::verify_identities).transpose()?;
            let disjoint = disjoint
                .map(|d| f2::verify_disjoint_translates(d.count, d.max_length))
                .transpose()?;
            let all_passed = identities.iter().chain(disjoint.iter()).all(ScanReport::all_passed);
            value(
                &F2VerifyResult {
                    identities,
                    disjoint,
                    all_passed,
                },
                false,
            )
        }
        JobSpec::F2Infeasible {
            translates,
            radius,
            delta,
            bisect_steps,
            emit_certificate,
        } => {
            if *translates > f2::MAX_TRANSLATES {
                return Err(JobError::Cap(format!("at most {} translates", f2::MAX_TRANSLATES)));
            }
            let instance = InvarianceInstance::new(*translates, *radius, DEFAULT_BALL_CAP)?;
            let (support_size, classes) = (instance.support.len(), instance.class_count());
            let result = match delta {
                Some(delta) => {
                    let outcome = instance.solve(delta)?;
                    F2InfeasibleResult {
                        support_size,
                        classes,
                        probe: probe(&instance, delta.clone(), outcome, *emit_certificate),
                        upper: None,
                        minimal_delta: None,
                    }
                }
                None => {
                    let minimal = instance.minimal_delta()?;
                    match f2::bisect_threshold(&instance, *bisect_steps)? {
                        Some(t) => F2InfeasibleResult {
                            support_size,
                            classes,
                            probe: probe(&instance, t.lower, t.lower_outcome, *emit_certificate),
                            upper: Some(probe(&instance, t.upper, t.upper_outcome, *emit_certificate)),
                            minimal_delta: Some(minimal),
                        },
                        None => {
                            let outcome = instance.solve(&Q::zero())?;
                            F2InfeasibleResult {
                                support_size,
                                classes,
                                probe: probe(&instance, Q::zero(), outcome, *emit_certificate),
                                upper: None,
                                minimal_delta: Some(minimal),
                            }
                        }
                    }
                }
            };
            value(&result, false)
        }
        JobSpec::FunctionTable {
            group,
            m_max,
            k_max,
            n_max,
            folner_radius,
            cap,
        } => {
            let group = Group::new(group.clone())?;
            let config = harness_config(*m_max, *k_max, *n_max, *folner_radius, *cap);
            let report = folner::inequality_harness(&group, &config)?;
            let csv = table::render_csv(&report)?;
            let capped = table::has_open_cells(&report);
            value(&TableResult { report, csv }, capped)
        }
    }
}

pub fn harness_config(m_max: usize, k_max: u64, n_max: usize, folner_radius: usize, cap: usize) -> HarnessConfig {
    let mut config = HarnessConfig {
        m_max,
        k_max,
        n_max,
        folner_radius,
        ball_cap: DEFAULT_BALL_CAP,
        ..HarnessConfig::default()
    };
    config.ramsey.enumeration_cap = cap;
    config
}

pub fn pictures_result(group: &Group, m: usize, target: &SetExpr, radius: usize) -> Result<PicturesResult, JobError> {
    let window = group.ball(m, DEFAULT_BALL_CAP)?;
    let domain = group.ball(radius, DEFAULT_BALL_CAP)?;
    let ctx = PictureContext::new(group, window.clone(), target.compile(group)?)?;
    let family = ctx.realized_family(&domain);
    let deficiency = balance::balance_deficiency(&family)?;
    let unbalance = if deficiency.value.is_zero() {
        None
    } else {
        balance::unbalance_witness(&family)?
    };
    Ok(PicturesResult {
        window,
        domain_size: domain.len(),
        family,
        deficiency,
        unbalance,
    })
}
