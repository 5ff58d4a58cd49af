//! Følner sets: the unweighted check, a windowed search for `Fol(k)`, the
//! weighted quantity `F*(m, n)` by LP, level-set extraction from a weighted
//! witness, and a harness tabulating the function inequalities.
//!
//! Conventions: `B` is ε-Følner w.r.t. `A` when `Σ_{a∈A} |aB △ B| ≤ ε|B|`,
//! and `F(m, ε)` is the least `n` with `F*(m, n) ≤ ε` (non-strict, like the
//! Følner condition).

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{ElementSet, Group, GroupElement, GroupError};
use crate::lp::{self, Direction, LinearSystem, LpError, Optimum, Relation};
use crate::measure::{MeasureError, RationalMeasure};
use crate::ramsey::{self, FunctionStatus, RamseyError, RamseyOptions};
use crate::rational::{format_q, frac, q, serde_q, Q};

/// Upper bound on candidate subsets examined by [`folner_function`].
pub const MAX_FOLNER_CANDIDATES: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FolnerError {
    #[error("the set must be nonempty")]
    EmptySet,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{what}: {size} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, size: u64, cap: u64 },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Ramsey(#[from] RamseyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerReport {
    pub window: ElementSet,
    pub set: ElementSet,
    /// `|aB △ B|` for each `a` in window order.
    pub counts: Vec<u64>,
    pub total: u64,
    #[serde(with = "serde_q")]
    pub eps: Q,
    /// `ε|B|`.
    #[serde(with = "serde_q")]
    pub threshold: Q,
    pub folner: bool,
}

impl FolnerReport {
    /// Recomputes the counts and the verdict.
    pub fn verify(&self, group: &Group) -> Result<bool, FolnerError> {
        Ok(*self == is_epsilon_folner(group, &self.window, &self.set, &self.eps)?)
    }
}

/// `|aB △ B|` by direct set arithmetic.
pub fn symmetric_difference_size(group: &Group, a: &GroupElement, set: &ElementSet) -> u64 {
    let shifted = group.translate_set(a, set);
    let outside = shifted.iter().filter(|x| !set.contains(x)).count();
    2 * outside as u64
}

pub fn is_epsilon_folner(group: &Group, window: &ElementSet, set: &ElementSet, eps: &Q) -> Result<FolnerReport, FolnerError> {
    if set.is_empty() {
        return Err(FolnerError::EmptySet);
    }
    if eps.is_negative() {
        return Err(FolnerError::Precondition("eps must be nonnegative".into()));
    }
    for g in window.iter().chain(set.iter()) {
        if !group.contains(g) {
            return Err(GroupError::ForeignElement(format!("{g:?}")).into());
        }
    }
    let counts: Vec<u64> = window.iter().map(|a| symmetric_difference_size(group, a, set)).collect();
    let total = counts.iter().sum();
    let threshold = eps * q(set.len() as i64);
    Ok(FolnerReport {
        window: window.clone(),
        set: set.clone(),
        counts,
        total,
        eps: eps.clone(),
        threshold: threshold.clone(),
        folner: q(total as i64) <= threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Candidates have the identity as least element; used for `ℤ^d`, whose
    /// element order is translation-invariant.
    LeastIsIdentity,
    /// Candidates contain the identity.
    ContainsIdentity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FolnerSearchStatus {
    /// The minimum over all finite subsets of the group.
    Exact { size: usize, set: ElementSet },
    /// The minimum over the window only.
    UpperBound { size: usize, set: ElementSet },
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerSearch {
    pub k: u64,
    pub window: ElementSet,
    pub normalization: Normalization,
    /// `2k` times the number of generators of infinite order.
    pub lower_bound: usize,
    pub candidates: u64,
    pub status: FolnerSearchStatus,
}

impl FolnerSearch {
    /// Smallest size found, exact or not.
    pub fn value(&self) -> Option<usize> {
        match &self.status {
            FolnerSearchStatus::Exact { size, .. } | FolnerSearchStatus::UpperBound { size, .. } => Some(*size),
            FolnerSearchStatus::NotFound => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.status, FolnerSearchStatus::Exact { .. })
    }
}

fn infinite_order_generators(group: &Group) -> usize {
    if group.is_finite() {
        0
    } else {
        group.generators().iter().filter(|g| **g != group.identity()).count()
    }
}

/// Least-cardinality `1/k`-Følner set (w.r.t. the generators) among
/// normalized subsets of `window`; ties go to the least bitmask over window
/// order.
pub fn folner_function(group: &Group, k: u64, window: &ElementSet) -> Result<FolnerSearch, FolnerError> {
    if k == 0 {
        return Err(FolnerError::Precondition("k must be positive".into()));
    }
    let size = window.len();
    if size > 64 {
        return Err(FolnerError::CapExceeded {
            what: "window size",
            size: size as u64,
            cap: 64,
        });
    }
    let identity = group.identity();
    let id = window
        .position(&identity)
        .ok_or_else(|| FolnerError::Precondition("window must contain the identity".into()))?;
    let normalization = if group.is_abelian_free() {
        Normalization::LeastIsIdentity
    } else {
        Normalization::ContainsIdentity
    };
    let free: Vec<usize> = match normalization {
        Normalization::LeastIsIdentity => (id + 1..size).collect(),
        Normalization::ContainsIdentity => (0..size).filter(|&i| i != id).collect(),
    };
    if free.len() >= 64 || 1u64 << free.len() > MAX_FOLNER_CANDIDATES {
        return Err(FolnerError::CapExceeded {
            what: "candidate subsets",
            size: 1u64.checked_shl(free.len() as u32).unwrap_or(u64::MAX),
            cap: MAX_FOLNER_CANDIDATES,
        });
    }

    let generators = group.generator_set();
    // images[a][i] = window index of a·w_i, if inside the window.
    let images: Vec<Vec<Option<usize>>> = generators
        .iter()
        .map(|a| window.iter().map(|w| window.position(&group.mul(a, w))).collect())
        .collect();
    let boundary = |mask: u64| -> u64 {
        images
            .iter()
            .map(|img| {
                (0..size)
                    .filter(|&i| mask >> i & 1 == 1)
                    .filter(|&i| img[i].is_none_or(|j| mask >> j & 1 == 0))
                    .count() as u64
                    * 2
            })
            .sum()
    };

    let lower_bound = 2 * k as usize * infinite_order_generators(group);
    let mut candidates = 0u64;
    let mut found = None;
    for picked in 0..=free.len() {
        let combos = combinations(free.len(), picked);
        candidates += combos.len() as u64;
        let hit = combos
            .par_iter()
            .map(|&combo| {
                (0..free.len())
                    .filter(|&j| combo >> j & 1 == 1)
                    .fold(1u64 << id, |acc, j| acc | 1 << free[j])
            })
            .collect::<Vec<u64>>()
            .into_par_iter()
            .filter(|&mask| boundary(mask) * k <= mask.count_ones() as u64)
            .min();
        if let Some(mask) = hit {
            found = Some(mask);
            break;
        }
    }

    let status = match found {
        None => FolnerSearchStatus::NotFound,
        Some(mask) => {
            let set = window.subset_from_mask(mask);
            let size = set.len();
            if size < lower_bound {
                return Err(FolnerError::Inconsistent(format!(
                    "found a set of size {size} below the lower bound {lower_bound}"
                )));
            }
            let whole_group = group.order() == Some(window.len());
            if size == lower_bound || whole_group {
                FolnerSearchStatus::Exact { size, set }
            } else {
                FolnerSearchStatus::UpperBound { size, set }
            }
        }
    };
    Ok(FolnerSearch {
        k,
        window: window.clone(),
        normalization,
        lower_bound,
        candidates,
        status,
    })
}

/// All `n`-bit masks with `r` bits set, increasing (Gosper's hack).
fn combinations(n: usize, r: usize) -> Vec<u64> {
    if r > n {
        return Vec::new();
    }
    if r == 0 {
        return vec![0];
    }
    let limit = 1u64 << n;
    let mut out = Vec::new();
    let mut x = (1u64 << r) - 1;
    while x < limit {
        out.push(x);
        let low = x & x.wrapping_neg();
        let ripple = x + low;
        x = (((ripple ^ x) >> 2) / low) | ripple;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedFolnerValue {
    pub m: usize,
    pub n: usize,
    #[serde(with = "serde_q")]
    pub value: Q,
    pub measure: RationalMeasure,
    /// Optimal LP point and duals for [`weighted_system`].
    pub optimum: Optimum,
}

/// The L1-linearized LP for `F*(m, n)`, with its interior (variable order of
/// the measure part).
///
/// Variables: `ν_c` for `c` in the interior of `B_n` w.r.t. `B_m`, then one
/// `t_{g,x} ≥ |gν(x) − ν(x)|` for each `g ∈ B_m ∖ {e}` and `x ∈ C ∪ gC`.
pub fn weighted_system(group: &Group, m: usize, n: usize, ball_cap: usize) -> Result<(LinearSystem, ElementSet), FolnerError> {
    let window = group.ball(m, ball_cap)?;
    let ball = group.ball(n, ball_cap)?;
    let inner = ramsey::interior(group, &window, &ball);
    if inner.is_empty() {
        return Err(FolnerError::Precondition(format!("no admissible measure on B_{n} for m = {m}")));
    }
    let identity = group.identity();
    let shifts: Vec<(GroupElement, ElementSet)> = window
        .iter()
        .filter(|g| **g != identity)
        .map(|g| (g.clone(), inner.union(&group.translate_set(g, &inner))))
        .collect();
    let size = inner.len();
    let total = size + shifts.iter().map(|(_, s)| s.len()).sum::<usize>();
    let mut sys = LinearSystem::with_nonnegative(total);
    let all: Vec<(usize, Q)> = (0..size).map(|c| (c, Q::one())).collect();
    sys.add_sparse(&all, Relation::Eq, Q::one());
    let mut slot = size;
    for (g, support) in &shifts {
        let g_inv = group.inverse(g);
        for x in support {
            let mut diff: Vec<(usize, Q)> = Vec::with_capacity(3);
            if let Some(c) = inner.position(&group.mul(&g_inv, x)) {
                diff.push((c, Q::one()));
            }
            if let Some(c) = inner.position(x) {
                match diff.iter_mut().find(|(v, _)| *v == c) {
                    Some(entry) => entry.1 -= Q::one(),
                    None => diff.push((c, -Q::one())),
                }
            }
            let mut upper = diff.clone();
            upper.push((slot, -Q::one()));
            sys.add_sparse(&upper, Relation::Le, Q::zero());
            let mut lower: Vec<(usize, Q)> = diff.into_iter().map(|(v, c)| (v, -c)).collect();
            lower.push((slot, -Q::one()));
            sys.add_sparse(&lower, Relation::Le, Q::zero());
            slot += 1;
        }
    }
    let mut objective = vec![Q::zero(); total];
    objective[size..].iter_mut().for_each(|c| *c = Q::one());
    sys.set_objective(objective, Direction::Minimize);
    Ok((sys, inner))
}

/// `Σ_{g∈A} ‖gν − ν‖₁` computed directly.
pub fn translation_defect(group: &Group, window: &ElementSet, nu: &RationalMeasure) -> Q {
    window.iter().map(|g| nu.translate(group, g).l1_distance(nu)).sum()
}

/// `F*(m, n)`: least `Σ_{g∈B_m} ‖gν − ν‖₁` over probability measures on the
/// interior of `B_n` w.r.t. `B_m`.
pub fn weighted_folner(group: &Group, m: usize, n: usize, ball_cap: usize) -> Result<WeightedFolnerValue, FolnerError> {
    let (sys, inner) = weighted_system(group, m, n, ball_cap)?;
    let optimum = lp::minimize(&sys)?;
    let measure = RationalMeasure::new(inner.iter().cloned().zip(optimum.point[..inner.len()].iter().cloned()))?;
    let window = group.ball(m, ball_cap)?;
    let recomputed = translation_defect(group, &window, &measure);
    if recomputed != optimum.value {
        return Err(FolnerError::Inconsistent(format!(
            "LP value {} differs from recomputed defect {}",
            format_q(&optimum.value),
            format_q(&recomputed)
        )));
    }
    Ok(WeightedFolnerValue {
        m,
        n,
        value: optimum.value.clone(),
        measure,
        optimum,
    })
}

/// Rebuilds the LP, checks the optimality certificate, and recomputes the
/// defect of the carried measure.
pub fn verify_weighted(group: &Group, value: &WeightedFolnerValue, ball_cap: usize) -> Result<bool, FolnerError> {
    let (sys, inner) = weighted_system(group, value.m, value.n, ball_cap)?;
    let window = group.ball(value.m, ball_cap)?;
    let carried: Vec<Q> = inner.iter().map(|c| value.measure.weight(c)).collect();
    Ok(lp::verify_certificate(&sys, &value.optimum)?
        && value.optimum.value == value.value
        && value.measure.is_supported_in(&inner)
        && carried[..] == value.optimum.point[..inner.len()]
        && translation_defect(group, &window, &value.measure) == value.value)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedRadius {
    pub n: usize,
    /// `None` when no admissible measure exists at this radius.
    #[serde(with = "crate::rational::serde_q_opt")]
    pub value: Option<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedFunctionReport {
    pub m: usize,
    #[serde(with = "serde_q")]
    pub eps: Q,
    pub n_max: usize,
    pub status: FunctionStatus,
    pub radii: Vec<WeightedRadius>,
}

impl WeightedFunctionReport {
    pub fn value(&self) -> Option<usize> {
        match self.status {
            FunctionStatus::Found { n } => Some(n),
            _ => None,
        }
    }
}

/// `F(m, ε)`: least `n ≤ n_max` with `F*(m, n) ≤ ε`.
pub fn weighted_folner_function(
    group: &Group,
    m: usize,
    eps: &Q,
    n_max: usize,
    ball_cap: usize,
) -> Result<WeightedFunctionReport, FolnerError> {
    let mut radii = Vec::new();
    let mut status = FunctionStatus::Exhausted;
    for n in 0..=n_max {
        let value = match weighted_folner(group, m, n, ball_cap) {
            Ok(v) => Some(v.value),
            Err(FolnerError::Precondition(_)) => None,
            Err(FolnerError::Group(GroupError::ResourceLimit { .. })) => {
                status = FunctionStatus::CapExceeded { n, size: ball_cap };
                break;
            }
            Err(other) => return Err(other),
        };
        let done = value.as_ref().is_some_and(|v| v <= eps);
        radii.push(WeightedRadius { n, value });
        if done {
            status = FunctionStatus::Found { n };
            break;
        }
    }
    Ok(WeightedFunctionReport {
        m,
        eps: eps.clone(),
        n_max,
        status,
        radii,
    })
}

/// Extracts a level set `{x : ν(x) ≥ t}` that is `eps`-Følner w.r.t.
/// `window`, trying thresholds from the largest weight down.
pub fn folner_from_weighted(
    group: &Group,
    nu: &RationalMeasure,
    window: &ElementSet,
    eps: &Q,
) -> Result<FolnerReport, FolnerError> {
    let defect = translation_defect(group, window, nu);
    if defect > *eps {
        return Err(FolnerError::Precondition(format!(
            "translation defect {} exceeds {}",
            format_q(&defect),
            format_q(eps)
        )));
    }
    let mut thresholds: Vec<Q> = nu.iter().map(|(_, w)| w.clone()).collect();
    thresholds.sort_unstable_by(|a, b| b.cmp(a));
    thresholds.dedup();
    for t in thresholds {
        let level: ElementSet = nu.iter().filter(|(_, w)| **w >= t).map(|(x, _)| x.clone()).collect();
        let report = is_epsilon_folner(group, window, &level, eps)?;
        if report.folner {
            return Ok(report);
        }
    }
    Err(FolnerError::Inconsistent("no level set is Følner".into()))
}

/// A quantity known to lie in `[lower, upper]` (`upper = None`: unbounded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimate {
    #[serde(with = "big")]
    pub lower: BigUint,
    #[serde(with = "big_opt")]
    pub upper: Option<BigUint>,
}

impl Estimate {
    pub fn exact(v: usize) -> Self {
        Estimate {
            lower: BigUint::from(v),
            upper: Some(BigUint::from(v)),
        }
    }

    pub fn at_least(v: usize) -> Self {
        Estimate {
            lower: BigUint::from(v),
            upper: None,
        }
    }

    fn between(lower: usize, upper: usize) -> Self {
        Estimate {
            lower: BigUint::from(lower),
            upper: Some(BigUint::from(upper)),
        }
    }

    /// `base^self`, monotone in the exponent.
    fn power_of(&self, base: u32) -> Self {
        let pow = |e: &BigUint| -> BigUint {
            let exp = u32::try_from(e).unwrap_or(u32::MAX).min(4096);
            BigUint::from(base).pow(exp)
        };
        Estimate {
            lower: pow(&self.lower),
            upper: self.upper.as_ref().map(pow),
        }
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.upper {
            Some(u) if *u == self.lower => write!(f, "{u}"),
            Some(u) => write!(f, "[{}, {u}]", self.lower),
            None => write!(f, ">= {}", self.lower),
        }
    }
}

mod big {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod big_opt {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum InequalityOutcome {
    Holds,
    Violated,
    Untested { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    #[serde(flatten)]
    pub outcome: InequalityOutcome,
}

fn compare(name: String, lhs: Estimate, rhs: Estimate) -> InequalityCheck {
    let outcome = if lhs.upper.as_ref().is_some_and(|u| *u <= rhs.lower) {
        InequalityOutcome::Holds
    } else if rhs.upper.as_ref().is_some_and(|u| lhs.lower > *u) {
        InequalityOutcome::Violated
    } else {
        InequalityOutcome::Untested {
            reason: "bounds overlap; values beyond caps".into(),
        }
    };
    InequalityCheck { name, lhs, rhs, outcome }
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub m_max: usize,
    pub k_max: u64,
    /// Largest radius tried when computing `F` and `R`.
    pub n_max: usize,
    /// Følner search window is the ball of this radius.
    pub folner_radius: usize,
    pub ramsey: RamseyOptions,
    pub ball_cap: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            m_max: 1,
            k_max: 2,
            n_max: 12,
            folner_radius: 6,
            ramsey: RamseyOptions {
                keep_witnesses: false,
                enumeration_cap: 16,
                ..RamseyOptions::default()
            },
            ball_cap: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionCell {
    pub m: usize,
    pub k: u64,
    pub value: Estimate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub generators: usize,
    /// `Fol(k)` for `k = 1..=k_max`.
    pub folner: Vec<Estimate>,
    /// `F(m, 1/k)`.
    pub weighted: Vec<FunctionCell>,
    /// `R(m, 1/k)`.
    pub ramsey: Vec<FunctionCell>,
    pub checks: Vec<InequalityCheck>,
}

impl HarnessReport {
    pub fn violations(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| c.outcome == InequalityOutcome::Violated)
    }

    pub fn all_hold(&self) -> bool {
        self.violations().next().is_none()
    }
}

fn status_estimate(status: &FunctionStatus, n_max: usize) -> Estimate {
    match *status {
        FunctionStatus::Found { n } => Estimate::exact(n),
        FunctionStatus::Exhausted => Estimate::at_least(n_max + 1),
        FunctionStatus::CapExceeded { n, .. } => Estimate::at_least(n),
    }
}

/// Memoized `R(m) = R(m, 1/2)` and its iterates.
struct HalfRamsey<'a> {
    group: &'a Group,
    config: &'a HarnessConfig,
    memo: HashMap<usize, Estimate>,
}

impl HalfRamsey<'_> {
    fn at(&mut self, m: usize) -> Result<Estimate, FolnerError> {
        if let Some(e) = self.memo.get(&m) {
            return Ok(e.clone());
        }
        let report = ramsey::ramsey_function(self.group, m, &frac(1, 2), self.config.n_max, &self.config.ramsey, self.config.ball_cap)?;
        let mut estimate = status_estimate(&report.status, self.config.n_max);
        if self.group.is_finite() && estimate.upper.is_none() {
            estimate.lower = BigUint::zero();
        }
        self.memo.insert(m, estimate.clone());
        Ok(estimate)
    }

    /// `R^depth(m)`. Once an iterate is only bounded below, later iterates
    /// keep that lower bound in infinite groups, where `R(x) ≥ x` because
    /// `B_x·b ⊆ B_n` is impossible for `n < x`.
    fn iterate(&mut self, m: usize, depth: usize) -> Result<Estimate, FolnerError> {
        let mut current = m;
        for _ in 0..depth {
            let next = self.at(current)?;
            match &next.upper {
                Some(u) => current = usize::try_from(u).expect("radius fits"),
                None => {
                    let lower = if self.group.is_finite() { BigUint::zero() } else { next.lower };
                    return Ok(Estimate { lower, upper: None });
                }
            }
        }
        Ok(Estimate::exact(current))
    }
}

/// Least `p` with `(3/4)^p < bound`.
fn strict_steps(bound: &Q) -> usize {
    let mut p = 0;
    let mut power = q(1);
    while power >= *bound {
        power *= ramsey::step_factor();
        p += 1;
    }
    p
}

/// Computes `Fol(k)`, `F(m, 1/k)`, `R(m, 1/k)` on the requested grid and
/// checks, wherever the computed bounds decide it:
/// `R(m,1/k) ≤ F(m,1/k)`, `Fol(k) ≤ (2s+1)^{F(1,1/k)}`,
/// `F(m,1/k) ≤ R^{ps}(m)` and `Fol(k) ≤ (2s+1)^{R^{ps}(1)}` with `p` least
/// such that `(3/4)^p < 1/(2ks)`, `s` the number of generators.
pub fn inequality_harness(group: &Group, config: &HarnessConfig) -> Result<HarnessReport, FolnerError> {
    let s = group.generators().len();
    let base = 2 * s as u32 + 1;
    let window = group.ball(config.folner_radius, config.ball_cap)?;

    let mut folner = Vec::new();
    for k in 1..=config.k_max {
        let estimate = match folner_function(group, k, &window) {
            Ok(search) => match search.status {
                FolnerSearchStatus::Exact { size, .. } => Estimate::exact(size),
                FolnerSearchStatus::UpperBound { size, .. } => Estimate::between(search.lower_bound.max(1), size),
                FolnerSearchStatus::NotFound => Estimate::at_least(search.lower_bound.max(1)),
            },
            Err(FolnerError::CapExceeded { .. }) => Estimate::at_least(1),
            Err(other) => return Err(other),
        };
        folner.push(estimate);
    }

    let mut weighted = Vec::new();
    let mut ramsey_cells = Vec::new();
    for m in 1..=config.m_max {
        for k in 1..=config.k_max {
            let eps = frac(1, k as i64);
            let f = weighted_folner_function(group, m, &eps, config.n_max, config.ball_cap)?;
            weighted.push(FunctionCell {
                m,
                k,
                value: status_estimate(&f.status, config.n_max),
            });
            let r = ramsey::ramsey_function(group, m, &eps, config.n_max, &config.ramsey, config.ball_cap)?;
            let mut value = status_estimate(&r.status, config.n_max);
            if group.is_finite() && value.upper.is_none() {
                value.lower = BigUint::zero();
            }
            ramsey_cells.push(FunctionCell { m, k, value });
        }
    }

    let cell = |cells: &[FunctionCell], m: usize, k: u64| -> Estimate {
        cells.iter().find(|c| c.m == m && c.k == k).expect("cell computed").value.clone()
    };
    let mut half = HalfRamsey {
        group,
        config,
        memo: HashMap::new(),
    };
    let mut checks = Vec::new();
    for k in 1..=config.k_max {
        let p = strict_steps(&frac(1, 2 * k as i64 * s as i64));
        let fol = folner[k as usize - 1].clone();
        for m in 1..=config.m_max {
            checks.push(compare(
                format!("R({m},1/{k}) <= F({m},1/{k})"),
                cell(&ramsey_cells, m, k),
                cell(&weighted, m, k),
            ));
            checks.push(compare(
                format!("F({m},1/{k}) <= R^{}({m})", p * s),
                cell(&weighted, m, k),
                half.iterate(m, p * s)?,
            ));
        }
        if config.m_max >= 1 {
            checks.push(compare(
                format!("Fol({k}) <= {base}^F(1,1/{k})"),
                fol.clone(),
                cell(&weighted, 1, k).power_of(base),
            ));
        }
        checks.push(compare(
            format!("Fol({k}) <= {base}^R^{}(1)", p * s),
            fol,
            half.iterate(1, p * s)?.power_of(base),
        ));
    }
    Ok(HarnessReport {
        generators: s,
        folner,
        weighted,
        ramsey: ramsey_cells,
        checks,
    })
}

/// Uniform measure on `set` and its translation defect over `window`.
pub fn uniform_defect(group: &Group, window: &ElementSet, set: &ElementSet) -> Result<Q, FolnerError> {
    let nu = RationalMeasure::uniform(set)?;
    Ok(translation_defect(group, window, &nu))
}
