//! ε-Ramsey checks, the Ramsey function, and the two constructive
//! reductions: binary targets to `[0,1]`-valued functions (gap 3/4), and the
//! boosting recursion driving the gap below any ε.
//!
//! `B` is ε-Ramsey with respect to `A` when every `E ⊆ B` admits `ν`
//! supported on the interior `C = {b ∈ B : A·b ⊆ B}` with
//! `max_a aν(E) − min_a aν(E) ≤ ε`. Only `E ∩ A·C` matters, so subsets of
//! `A·C` are enumerated as bitmasks (bit `i` = `i`-th element of `A·C`), in
//! increasing numeric order; the first failure is the reported
//! counterexample.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{self, BalanceError, SetFamily, UnbalanceWitness};
use crate::group::{ElementSet, Group, GroupElement, GroupError};
use crate::lp::{self, FeasibilityOutcome, LinearSystem, LpError, Relation};
use crate::measure::{MeasureError, RationalMeasure};
use crate::pictures::{self, PictureError};
use crate::rational::{format_q, frac, pow_q, serde_q, serde_q_vec, Q};
use crate::sets::SetError;

/// Default bound on `|A·C|` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;
/// Hard ceiling: subsets are `u64` masks and enumeration must stay finite.
pub const MAX_ENUMERATION_CAP: usize = 40;
const CHUNK: u64 = 1 << 12;

/// The contraction factor of a single binary-to-unit step.
pub fn step_factor() -> Q {
    frac(3, 4)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RamseyError {
    #[error("|A·C| = {size} exceeds the enumeration cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<RamseyError>,
    },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Picture(#[from] PictureError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// One LP per subset over measures on the interior.
    Direct,
    /// One balance LP per distinct picture family.
    Pictures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchScope {
    /// Every subset of `A·C`.
    Exhaustive,
    /// Only subsets cut out by the candidate pool; used above the cap and
    /// able to refute but not to confirm.
    CandidatePool,
}

#[derive(Debug, Clone, Copy)]
pub struct RamseyOptions {
    pub method: Method,
    pub keep_witnesses: bool,
    pub enumeration_cap: usize,
    /// Above the cap, look for counterexamples in the candidate pool.
    pub pool_fallback: bool,
}

impl Default for RamseyOptions {
    fn default() -> Self {
        RamseyOptions {
            method: Method::Pictures,
            keep_witnesses: true,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            pool_fallback: true,
        }
    }
}

/// A measure on the interior (weights in interior order) for one subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetWitness {
    pub mask: u64,
    #[serde(with = "serde_q_vec")]
    pub measure: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum NotRamseyReason {
    EmptyInterior,
    Counterexample {
        /// Bitmask over `A·C`, present for exhaustive searches.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mask: Option<u64>,
        subset: ElementSet,
        /// Pictures of the interior points.
        family: SetFamily,
        /// Farkas vector for the subset's LP (see [`RamseyInstance::subset_system`]).
        #[serde(with = "serde_q_vec")]
        farkas: Vec<Q>,
        /// At `ε = 0`, a witness that the picture family is unbalanced.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unbalance: Option<UnbalanceWitness>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Verdict {
    Ramsey {
        /// One per subset in mask order; `None` when elided.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witnesses: Option<Vec<SubsetWitness>>,
    },
    NotRamsey(NotRamseyReason),
}

impl Verdict {
    pub fn is_ramsey(&self) -> bool {
        matches!(self, Verdict::Ramsey { .. })
    }

    /// Mask of the counterexample, if it came from exhaustive enumeration.
    pub fn counterexample_mask(&self) -> Option<u64> {
        match self {
            Verdict::NotRamsey(NotRamseyReason::Counterexample { mask, .. }) => *mask,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyReport {
    pub window: ElementSet,
    pub ball: ElementSet,
    pub interior: ElementSet,
    pub relevant: ElementSet,
    #[serde(with = "serde_q")]
    pub eps: Q,
    pub method: Method,
    pub search: SearchScope,
    pub verdict: Verdict,
}

/// `{b ∈ B : a·b ∈ B for all a ∈ A}`.
pub fn interior(group: &Group, window: &ElementSet, ball: &ElementSet) -> ElementSet {
    ball.iter()
        .filter(|b| window.iter().all(|a| ball.contains(&group.mul(a, b))))
        .cloned()
        .collect()
}

/// Precomputed data for one `(A, B, ε)` question.
pub struct RamseyInstance<'g> {
    group: &'g Group,
    pub window: ElementSet,
    pub ball: ElementSet,
    pub interior: ElementSet,
    /// `A·C`, the only part of a subset that matters.
    pub relevant: ElementSet,
    pub eps: Q,
    /// `product[a][c]` = position of `a·c` in `relevant`.
    product: Vec<Vec<usize>>,
}

impl<'g> RamseyInstance<'g> {
    pub fn new(group: &'g Group, window: ElementSet, ball: ElementSet, eps: Q) -> Result<Self, RamseyError> {
        if window.is_empty() || window.len() > balance::MAX_GROUND {
            return Err(RamseyError::Precondition(format!(
                "window must have between 1 and {} elements",
                balance::MAX_GROUND
            )));
        }
        if eps.is_negative() {
            return Err(RamseyError::Precondition("eps must be nonnegative".into()));
        }
        for g in window.iter().chain(ball.iter()) {
            if !group.contains(g) {
                return Err(GroupError::ForeignElement(format!("{g:?}")).into());
            }
        }
        let interior = interior(group, &window, &ball);
        let relevant = group.product_set(&window, &interior);
        let product = window
            .iter()
            .map(|a| {
                interior
                    .iter()
                    .map(|c| relevant.position(&group.mul(a, c)).expect("a·c lies in A·C"))
                    .collect()
            })
            .collect();
        Ok(RamseyInstance {
            group,
            window,
            ball,
            interior,
            relevant,
            eps,
            product,
        })
    }

    pub fn group(&self) -> &Group {
        self.group
    }

    /// Pictures of interior points for the subset whose membership over
    /// `relevant` is given by `member`.
    pub fn pictures_by<F: Fn(usize) -> bool>(&self, member: F) -> Vec<u64> {
        (0..self.interior.len())
            .map(|c| {
                self.product
                    .iter()
                    .enumerate()
                    .filter(|(_, row)| member(row[c]))
                    .fold(0u64, |acc, (a, _)| acc | 1 << a)
            })
            .collect()
    }

    pub fn pictures_of_mask(&self, mask: u64) -> Vec<u64> {
        self.pictures_by(|i| mask >> i & 1 == 1)
    }

    /// Pictures for an arbitrary subset of the group (only `E ∩ A·C` is read).
    pub fn pictures_of_set(&self, subset: &ElementSet) -> Vec<u64> {
        let inside: Vec<bool> = self.relevant.iter().map(|g| subset.contains(g)).collect();
        self.pictures_by(|i| inside[i])
    }

    pub fn subset_of_mask(&self, mask: u64) -> ElementSet {
        self.relevant.subset_from_mask(mask)
    }

    /// Variables `ν_c` (interior order, `≥ 0`), then free `t_hi`, `t_lo`:
    /// `Σ ν = 1`, `t_lo ≤ aν(E) ≤ t_hi` for each `a` (window order), and
    /// `t_hi − t_lo ≤ ε`.
    pub fn subset_system(&self, pictures: &[u64]) -> LinearSystem {
        let k = self.interior.len();
        let (hi, lo) = (k, k + 1);
        let mut sys = LinearSystem::new(k + 2);
        for c in 0..k {
            sys.set_nonnegative(c, true);
        }
        let all: Vec<(usize, Q)> = (0..k).map(|c| (c, Q::one())).collect();
        sys.add_sparse(&all, Relation::Eq, Q::one());
        for a in 0..self.window.len() {
            let hits: Vec<(usize, Q)> = pictures
                .iter()
                .enumerate()
                .filter(|(_, p)| *p >> a & 1 == 1)
                .map(|(c, _)| (c, Q::one()))
                .collect();
            let mut upper = hits.clone();
            upper.push((hi, -Q::one()));
            sys.add_sparse(&upper, Relation::Le, Q::zero());
            let mut lower = hits;
            lower.push((lo, -Q::one()));
            sys.add_sparse(&lower, Relation::Ge, Q::zero());
        }
        sys.add_sparse(&[(hi, Q::one()), (lo, -Q::one())], Relation::Le, self.eps.clone());
        sys
    }

    /// Solves the subset LP; `Ok(measure)` or `Err(farkas)`.
    pub fn solve_subset(&self, pictures: &[u64]) -> Result<Result<Vec<Q>, Vec<Q>>, LpError> {
        Ok(match lp::solve_feasibility(&self.subset_system(pictures))? {
            FeasibilityOutcome::Feasible { point } => Ok(point[..self.interior.len()].to_vec()),
            FeasibilityOutcome::Infeasible { farkas } => Err(farkas),
        })
    }

    /// `aν(E)` for each window element, from interior weights and pictures.
    pub fn translated_values(&self, measure: &[Q], pictures: &[u64]) -> Vec<Q> {
        (0..self.window.len())
            .map(|a| {
                measure
                    .iter()
                    .zip(pictures)
                    .filter(|(_, p)| *p >> a & 1 == 1)
                    .map(|(w, _)| w.clone())
                    .sum()
            })
            .collect()
    }

    /// Checks a measure on the interior against a subset's pictures at `eps`.
    pub fn measure_works(&self, measure: &[Q], pictures: &[u64], eps: &Q) -> bool {
        if measure.len() != self.interior.len()
            || measure.iter().any(Signed::is_negative)
            || !measure.iter().sum::<Q>().is_one()
        {
            return false;
        }
        let values = self.translated_values(measure, pictures);
        let gap = values.iter().max().expect("window nonempty") - values.iter().min().expect("window nonempty");
        gap <= *eps
    }

    /// Spreads a balancing witness over the interior: each member's weight
    /// goes to the least interior point with that picture.
    fn measure_from_balance(&self, pictures: &[u64], witness: &balance::BalanceWitness) -> Vec<Q> {
        let mut measure = vec![Q::zero(); self.interior.len()];
        for (member, weight) in witness.members.iter().zip(&witness.weights) {
            if weight.is_zero() {
                continue;
            }
            let c = pictures.iter().position(|p| p == member).expect("member is a picture");
            measure[c] += weight;
        }
        measure
    }

    fn family(&self, pictures: &[u64]) -> SetFamily {
        let labels = self.window.iter().map(|a| self.group.format_element(a)).collect();
        SetFamily::new(labels, pictures.iter().copied()).expect("window size checked")
    }

    fn counterexample(&self, mask: Option<u64>, subset: ElementSet, pictures: Vec<u64>) -> Result<Verdict, RamseyError> {
        let farkas = match self.solve_subset(&pictures)? {
            Err(farkas) => farkas,
            Ok(_) => {
                return Err(RamseyError::Inconsistent(
                    "picture family unbalanced but subset LP feasible".into(),
                ))
            }
        };
        let family = self.family(&pictures);
        let unbalance = if self.eps.is_zero() {
            balance::unbalance_witness(&family)?
        } else {
            None
        };
        Ok(Verdict::NotRamsey(NotRamseyReason::Counterexample {
            mask,
            subset,
            family,
            farkas,
            unbalance,
        }))
    }

    fn exhaustive(&self, options: &RamseyOptions) -> Result<Verdict, RamseyError> {
        let total = 1u64 << self.relevant.len();
        let mut witnesses = Vec::new();
        let mut memo: HashMap<Vec<u64>, Option<balance::BalanceWitness>> = HashMap::new();
        let mut start = 0u64;
        while start < total {
            let end = (start + CHUNK).min(total);
            let pictures: Vec<Vec<u64>> = (start..end).into_par_iter().map(|m| self.pictures_of_mask(m)).collect();
            let measures: Vec<Option<Vec<Q>>> = match options.method {
                Method::Direct => pictures
                    .par_iter()
                    .map(|p| self.solve_subset(p).map(Result::ok))
                    .collect::<Result<_, _>>()?,
                Method::Pictures => {
                    let keys: Vec<Vec<u64>> = pictures.iter().map(|p| family_key(p)).collect();
                    let mut fresh: Vec<Vec<u64>> = keys.iter().filter(|k| !memo.contains_key(*k)).cloned().collect();
                    fresh.sort();
                    fresh.dedup();
                    let solved: Vec<(Vec<u64>, Option<balance::BalanceWitness>)> = fresh
                        .into_par_iter()
                        .map(|key| {
                            let fam = SetFamily::indexed(self.window.len(), key.iter().copied())?;
                            Ok((key, balance::is_epsilon_balanced(&fam, &self.eps)?))
                        })
                        .collect::<Result<_, BalanceError>>()?;
                    memo.extend(solved);
                    pictures
                        .iter()
                        .zip(&keys)
                        .map(|(p, key)| memo[key].as_ref().map(|w| self.measure_from_balance(p, w)))
                        .collect()
                }
            };
            if let Some(offset) = measures.iter().position(Option::is_none) {
                let mask = start + offset as u64;
                let subset = self.subset_of_mask(mask);
                return self.counterexample(Some(mask), subset, pictures[offset].clone());
            }
            if options.keep_witnesses {
                witnesses.extend((start..end).zip(measures).map(|(mask, measure)| SubsetWitness {
                    mask,
                    measure: measure.expect("all feasible"),
                }));
            }
            start = end;
        }
        Ok(Verdict::Ramsey {
            witnesses: options.keep_witnesses.then_some(witnesses),
        })
    }

    /// First pool candidate (in pool order) whose subset LP is infeasible.
    fn pool_counterexample(&self) -> Result<Option<Verdict>, RamseyError> {
        let radius = self.ball.iter().map(|b| self.group.word_length(b)).max().unwrap_or(0) as usize;
        for expr in pictures::candidate_pool(self.group, radius) {
            let subset = expr.compile(self.group)?.restrict(&self.relevant);
            let pics = self.pictures_of_set(&subset);
            if self.solve_subset(&pics)?.is_err() {
                return self.counterexample(None, subset, pics).map(Some);
            }
        }
        Ok(None)
    }

    pub fn decide(&self, options: &RamseyOptions) -> Result<RamseyReport, RamseyError> {
        let report = |search, verdict| RamseyReport {
            window: self.window.clone(),
            ball: self.ball.clone(),
            interior: self.interior.clone(),
            relevant: self.relevant.clone(),
            eps: self.eps.clone(),
            method: options.method,
            search,
            verdict,
        };
        if self.interior.is_empty() {
            return Ok(report(SearchScope::Exhaustive, Verdict::NotRamsey(NotRamseyReason::EmptyInterior)));
        }
        let cap = options.enumeration_cap.min(MAX_ENUMERATION_CAP);
        if self.relevant.len() <= cap {
            return Ok(report(SearchScope::Exhaustive, self.exhaustive(options)?));
        }
        if options.pool_fallback {
            if let Some(verdict) = self.pool_counterexample()? {
                return Ok(report(SearchScope::CandidatePool, verdict));
            }
        }
        Err(RamseyError::CapExceeded {
            size: self.relevant.len(),
            cap,
        })
    }
}

fn family_key(pictures: &[u64]) -> Vec<u64> {
    let mut key = pictures.to_vec();
    key.sort_unstable();
    key.dedup();
    key
}

/// Decides whether `ball` is `eps`-Ramsey with respect to `window`.
pub fn is_epsilon_ramsey(
    group: &Group,
    window: &ElementSet,
    ball: &ElementSet,
    eps: &Q,
    options: &RamseyOptions,
) -> Result<RamseyReport, RamseyError> {
    RamseyInstance::new(group, window.clone(), ball.clone(), eps.clone())?.decide(options)
}

/// Rechecks a report without re-solving: interior and `A·C` are recomputed,
/// every carried measure is checked, and a counterexample's Farkas vector
/// (and unbalance witness) is verified. With elided witnesses a positive
/// verdict is only checked structurally.
pub fn verify_report(group: &Group, report: &RamseyReport) -> Result<bool, RamseyError> {
    verify_report_at(group, report, &report.eps)
}

/// Like [`verify_report`], checking positive witnesses against `eps`
/// instead of the report's own value.
pub fn verify_report_at(group: &Group, report: &RamseyReport, eps: &Q) -> Result<bool, RamseyError> {
    let inst = RamseyInstance::new(group, report.window.clone(), report.ball.clone(), report.eps.clone())?;
    if inst.interior != report.interior || inst.relevant != report.relevant {
        return Ok(false);
    }
    match &report.verdict {
        Verdict::Ramsey { witnesses } => {
            if report.search != SearchScope::Exhaustive || inst.interior.is_empty() {
                return Ok(false);
            }
            let Some(witnesses) = witnesses else {
                return Ok(true);
            };
            let total = 1u64 << inst.relevant.len();
            let masks_ok = witnesses.len() as u64 == total
                && witnesses.iter().enumerate().all(|(i, w)| w.mask == i as u64);
            Ok(masks_ok
                && witnesses
                    .par_iter()
                    .all(|w| inst.measure_works(&w.measure, &inst.pictures_of_mask(w.mask), eps)))
        }
        Verdict::NotRamsey(NotRamseyReason::EmptyInterior) => Ok(inst.interior.is_empty()),
        Verdict::NotRamsey(NotRamseyReason::Counterexample {
            mask,
            subset,
            family,
            farkas,
            unbalance,
        }) => {
            if let Some(mask) = mask {
                if inst.subset_of_mask(*mask) != *subset {
                    return Ok(false);
                }
            }
            let pictures = inst.pictures_of_set(subset);
            if inst.family(&pictures) != *family {
                return Ok(false);
            }
            let cert = FeasibilityOutcome::Infeasible { farkas: farkas.clone() };
            let farkas_ok = lp::verify_certificate(&inst.subset_system(&pictures), &cert)?;
            let unbalance_ok = unbalance.as_ref().is_none_or(|w| w.verify(family));
            Ok(farkas_ok && unbalance_ok)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FunctionStatus {
    Found { n: usize },
    /// Every radius up to the limit was decided negatively.
    Exhausted,
    /// The radius `n` could not be decided within caps.
    CapExceeded { n: usize, size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusOutcome {
    pub n: usize,
    pub ramsey: bool,
    pub search: SearchScope,
    pub interior_size: usize,
    pub relevant_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyFunctionReport {
    pub m: usize,
    #[serde(with = "serde_q")]
    pub eps: Q,
    pub n_max: usize,
    pub status: FunctionStatus,
    pub radii: Vec<RadiusOutcome>,
}

impl RamseyFunctionReport {
    pub fn value(&self) -> Option<usize> {
        match self.status {
            FunctionStatus::Found { n } => Some(n),
            _ => None,
        }
    }
}

/// Least `n ≤ n_max` with `B_n` `eps`-Ramsey with respect to `B_m`.
/// Radii below `m` are skipped (their interior is empty).
pub fn ramsey_function(
    group: &Group,
    m: usize,
    eps: &Q,
    n_max: usize,
    options: &RamseyOptions,
    ball_cap: usize,
) -> Result<RamseyFunctionReport, RamseyError> {
    let window = group.ball(m, ball_cap)?;
    let mut radii = Vec::new();
    let mut status = FunctionStatus::Exhausted;
    for n in m..=n_max {
        let ball = group.ball(n, ball_cap)?;
        let inst = RamseyInstance::new(group, window.clone(), ball, eps.clone())?;
        let quiet = RamseyOptions {
            keep_witnesses: false,
            ..*options
        };
        match inst.decide(&quiet) {
            Ok(report) => {
                let ramsey = report.verdict.is_ramsey();
                radii.push(RadiusOutcome {
                    n,
                    ramsey,
                    search: report.search,
                    interior_size: inst.interior.len(),
                    relevant_size: inst.relevant.len(),
                });
                if ramsey {
                    status = FunctionStatus::Found { n };
                    break;
                }
            }
            Err(RamseyError::CapExceeded { size, .. }) => {
                status = FunctionStatus::CapExceeded { n, size };
                break;
            }
            Err(other) => return Err(other),
        }
    }
    Ok(RamseyFunctionReport {
        m,
        eps: eps.clone(),
        n_max,
        status,
        radii,
    })
}

/// Supplies, for a subset `E` of `ball`, a measure on the interior of
/// `ball` relative to `window` whose translates measure `E` within 1/2.
pub trait HalfRamseyStep: Sync {
    fn half_witness(
        &self,
        group: &Group,
        window: &ElementSet,
        ball: &ElementSet,
        target: &ElementSet,
    ) -> Result<RationalMeasure, RamseyError>;
}

/// Solves the subset LP at `ε = 1/2` for the one subset asked about.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpHalfStep;

impl HalfRamseyStep for LpHalfStep {
    fn half_witness(
        &self,
        group: &Group,
        window: &ElementSet,
        ball: &ElementSet,
        target: &ElementSet,
    ) -> Result<RationalMeasure, RamseyError> {
        let inst = RamseyInstance::new(group, window.clone(), ball.clone(), frac(1, 2))?;
        if inst.interior.is_empty() {
            return Err(RamseyError::Precondition("interior is empty".into()));
        }
        match inst.solve_subset(&inst.pictures_of_set(target))? {
            Ok(weights) => Ok(RationalMeasure::new(inst.interior.iter().cloned().zip(weights))?),
            Err(_) => Err(RamseyError::Precondition(
                "ball is not 1/2-Ramsey for the level set".into(),
            )),
        }
    }
}

/// `max_a aν(f) − min_a aν(f)` over `window`.
pub fn translated_gap<F>(group: &Group, window: &ElementSet, nu: &RationalMeasure, f: &F) -> Result<Q, RamseyError>
where
    F: Fn(&GroupElement) -> Option<Q>,
{
    let mut values = Vec::with_capacity(window.len());
    for a in window {
        values.push(nu.evaluate_function(|x| f(&group.mul(a, x)))?);
    }
    let hi = values.iter().max().expect("window nonempty");
    let lo = values.iter().min().expect("window nonempty");
    Ok(hi - lo)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitStep {
    pub level_set: ElementSet,
    pub measure: RationalMeasure,
    #[serde(with = "serde_q")]
    pub gap: Q,
}

/// For `f : B → [0,1]`, takes a 1/2-witness for `E = {f ≥ 1/2}` and checks
/// that it keeps every pair of translates of `f` within 3/4.
pub fn binary_to_unit<F>(
    group: &Group,
    window: &ElementSet,
    ball: &ElementSet,
    f: &F,
    oracle: &dyn HalfRamseyStep,
) -> Result<UnitStep, RamseyError>
where
    F: Fn(&GroupElement) -> Option<Q>,
{
    let half = frac(1, 2);
    let mut level_set = Vec::new();
    for b in ball {
        let value = f(b).ok_or_else(|| RamseyError::Precondition(format!("function undefined at {b:?}")))?;
        if value.is_negative() || value > Q::one() {
            return Err(RamseyError::Precondition(format!(
                "function value {} outside [0,1]",
                format_q(&value)
            )));
        }
        if value >= half {
            level_set.push(b.clone());
        }
    }
    let level_set: ElementSet = level_set.into_iter().collect();
    let measure = oracle.half_witness(group, window, ball, &level_set)?;
    let inner = interior(group, window, ball);
    if !measure.is_supported_in(&inner) {
        return Err(RamseyError::Precondition("oracle measure leaves the interior".into()));
    }
    let gap = translated_gap(group, window, &measure, f)?;
    if gap > step_factor() {
        return Err(RamseyError::Inconsistent(format!(
            "binary-to-unit gap {} exceeds 3/4",
            format_q(&gap)
        )));
    }
    Ok(UnitStep {
        level_set,
        measure,
        gap,
    })
}

/// Least `n` with `(3/4)^n ≤ eps` (so `eps ≥ 1` needs no step).
pub fn steps_for(eps: &Q) -> Result<usize, RamseyError> {
    if !eps.is_positive() {
        return Err(RamseyError::Precondition("eps must be positive".into()));
    }
    let mut n = 0;
    let mut power = Q::one();
    while power > *eps {
        power *= step_factor();
        n += 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoostReport {
    pub steps: usize,
    /// Radii of the windows after the first (which is the given window).
    pub radii: Vec<usize>,
    /// `ν_0, …, ν_{n−1}`.
    pub factors: Vec<RationalMeasure>,
    pub measure: RationalMeasure,
    #[serde(with = "serde_q")]
    pub gap: Q,
    #[serde(with = "serde_q")]
    pub bound: Q,
}

/// Drives the gap of `f` (values in `[0,1]`) over `window` down to
/// `(3/4)^n ≤ eps` with a convolution chain `ν_0 ∗ ⋯ ∗ ν_{n−1}`.
///
/// Windows: `W_0 = window`, `W_{i+1}` the ball of radius `growth · r_i`
/// (`r_0` the largest word length in `window`, at least 1), so that
/// `W_i ∪ W_i·W_i ⊆ W_{i+1}` once `growth ≥ 2`. Steps run from the
/// outermost window inwards: with `ρ` the chain already built, step `i`
/// rescales `z ↦ zρ(f)` on `W_{i+1}` by subtracting its minimum and
/// multiplying by `(4/3)^{n−i−1}`, then applies [`binary_to_unit`].
#[allow(clippy::too_many_arguments)]
pub fn boost<F>(
    group: &Group,
    window: &ElementSet,
    eps: &Q,
    f: &F,
    oracle: &dyn HalfRamseyStep,
    max_steps: usize,
    growth: usize,
    ball_cap: usize,
) -> Result<BoostReport, RamseyError>
where
    F: Fn(&GroupElement) -> Option<Q> + Sync,
{
    let steps = steps_for(eps)?;
    if steps > max_steps {
        return Err(RamseyError::Precondition(format!(
            "{steps} steps needed but at most {max_steps} allowed"
        )));
    }
    if growth < 2 {
        return Err(RamseyError::Precondition("window growth factor must be at least 2".into()));
    }
    let mut radius = window.iter().map(|g| group.word_length(g)).max().unwrap_or(0).max(1) as usize;
    let mut windows = vec![window.clone()];
    let mut radii = Vec::new();
    for _ in 0..steps {
        radius *= growth;
        let next = group.ball(radius, ball_cap)?;
        let last = windows.last().expect("nonempty");
        if !last.is_subset(&next) || !group.product_set(last, last).is_subset(&next) {
            return Err(RamseyError::Inconsistent("window growth condition fails".into()));
        }
        radii.push(radius);
        windows.push(next);
    }

    let q_inv = step_factor().recip();
    let mut chain = RationalMeasure::point_mass(group.identity());
    let mut factors = Vec::with_capacity(steps);
    for i in (0..steps).rev() {
        let outer = &windows[i + 1];
        let mut shifted: HashMap<GroupElement, Q> = HashMap::with_capacity(outer.len());
        let values: Vec<Q> = outer
            .elements()
            .par_iter()
            .map(|z| chain.evaluate_function(|y| f(&group.mul(z, y))))
            .collect::<Result<_, _>>()?;
        let floor = values.iter().min().expect("ball nonempty").clone();
        let scale = pow_q(&q_inv, (steps - i - 1) as u32);
        for (z, v) in outer.iter().zip(values) {
            shifted.insert(z.clone(), (v - &floor) * &scale);
        }
        let step = binary_to_unit(group, &windows[i], outer, &|g: &GroupElement| shifted.get(g).cloned(), oracle)
            .map_err(|e| RamseyError::Step {
                step: i,
                source: Box::new(e),
            })?;
        chain = step.measure.convolve(group, &chain);
        factors.push(step.measure);
    }
    factors.reverse();

    let gap = translated_gap(group, window, &chain, f)?;
    let bound = pow_q(&step_factor(), steps as u32);
    if gap > bound {
        return Err(RamseyError::Inconsistent(format!(
            "boosted gap {} exceeds {}",
            format_q(&gap),
            format_q(&bound)
        )));
    }
    Ok(BoostReport {
        steps,
        radii,
        factors,
        measure: chain,
        gap,
        bound,
    })
}

/// Rechecks a boost report: the chain composes to the stated measure and
/// the gap of `f` over `window` is at most the bound.
pub fn verify_boost<F>(group: &Group, window: &ElementSet, f: &F, report: &BoostReport) -> Result<bool, RamseyError>
where
    F: Fn(&GroupElement) -> Option<Q>,
{
    let composed = report
        .factors
        .iter()
        .rev()
        .fold(RationalMeasure::point_mass(group.identity()), |acc, nu| nu.convolve(group, &acc));
    let gap = translated_gap(group, window, &report.measure, f)?;
    Ok(composed == report.measure
        && gap == report.gap
        && report.bound == pow_q(&step_factor(), report.steps as u32)
        && gap <= report.bound)
}
