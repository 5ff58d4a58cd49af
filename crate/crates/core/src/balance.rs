//! Balanced and unbalanced set families.
//!
//! A family of subsets of a finite ground set is ε-balanced when some convex
//! combination `v` of member indicator vectors has `max v − min v ≤ ε`. The
//! dual object is an unbalance witness: `f` with `Σ f = 0` and every member
//! sum positive (scaled here so the least member sum is exactly 1).

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::lp::{self, Direction, LinearSystem, LpError, Optimum, Relation};
use crate::rational::{serde_q, serde_q_vec, Q};

/// Largest ground set for which all subsets are enumerated.
pub const POSITIVE_SETS_LIMIT: usize = 20;

/// Ground sets are indexed by `u64` bitmasks.
pub const MAX_GROUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BalanceError {
    #[error("family has no members")]
    EmptyFamily,
    #[error("malformed family: {0}")]
    Malformed(String),
    #[error("ground set of size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("weights must sum to zero")]
    NonzeroSum,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Members stored as bitmasks over an ordered ground set (bit `i` = `ground[i]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    ground: Vec<String>,
    members: BTreeSet<u64>,
}

impl SetFamily {
    pub fn new<I: IntoIterator<Item = u64>>(ground: Vec<String>, members: I) -> Result<Self, BalanceError> {
        if ground.len() > MAX_GROUND {
            return Err(BalanceError::TooLarge {
                size: ground.len(),
                limit: MAX_GROUND,
            });
        }
        let distinct: BTreeSet<&String> = ground.iter().collect();
        if distinct.len() != ground.len() {
            return Err(BalanceError::Malformed("ground labels must be distinct".into()));
        }
        let full = full_mask(ground.len());
        let members: BTreeSet<u64> = members.into_iter().collect();
        if members.iter().any(|m| m & !full != 0) {
            return Err(BalanceError::Malformed("member mask wider than the ground set".into()));
        }
        Ok(SetFamily { ground, members })
    }

    /// Ground labels `"0"`, `"1"`, ….
    pub fn indexed<I: IntoIterator<Item = u64>>(size: usize, members: I) -> Result<Self, BalanceError> {
        Self::new((0..size).map(|i| i.to_string()).collect(), members)
    }

    /// Builds a family from member label lists.
    pub fn from_labels(ground: Vec<String>, members: &[Vec<String>]) -> Result<Self, BalanceError> {
        let index: HashMap<&str, usize> = ground.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut masks = Vec::with_capacity(members.len());
        for member in members {
            let mut mask = 0u64;
            for label in member {
                let i = index
                    .get(label.as_str())
                    .ok_or_else(|| BalanceError::Malformed(format!("unknown ground label {label:?}")))?;
                mask |= 1 << i;
            }
            masks.push(mask);
        }
        Self::new(ground, masks)
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn ground_len(&self) -> usize {
        self.ground.len()
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.members.contains(&mask)
    }

    pub fn is_subfamily_of(&self, other: &SetFamily) -> bool {
        self.ground == other.ground && self.members.is_subset(&other.members)
    }

    pub fn with_member(&self, mask: u64) -> Result<Self, BalanceError> {
        Self::new(self.ground.clone(), self.members.iter().copied().chain([mask]))
    }

    pub fn member_labels(&self, mask: u64) -> Vec<String> {
        (0..self.ground.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.ground[i].clone())
            .collect()
    }
}

fn full_mask(len: usize) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyJson {
    ground: Vec<String>,
    members: Vec<Vec<String>>,
}

impl Serialize for SetFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FamilyJson {
            ground: self.ground.clone(),
            members: self.members.iter().map(|&m| self.member_labels(m)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = FamilyJson::deserialize(d)?;
        SetFamily::from_labels(raw.ground, &raw.members).map_err(serde::de::Error::custom)
    }
}

/// Convex weights on members (in member order), the combined vector, and its spread.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceWitness {
    pub members: Vec<u64>,
    #[serde(with = "serde_q_vec")]
    pub weights: Vec<Q>,
    #[serde(with = "serde_q_vec")]
    pub combined: Vec<Q>,
    #[serde(with = "serde_q")]
    pub gap: Q,
}

impl BalanceWitness {
    /// Weights are given in the family's member order.
    pub fn from_weights(fam: &SetFamily, weights: Vec<Q>) -> Self {
        let members: Vec<u64> = fam.members().collect();
        let combined = combine(fam.ground_len(), &members, &weights);
        let gap = spread(&combined);
        BalanceWitness {
            members,
            weights,
            combined,
            gap,
        }
    }

    /// Checks the witness against `fam` and `eps` by recomputation.
    pub fn verify(&self, fam: &SetFamily, eps: &Q) -> bool {
        self.weights.len() == self.members.len()
            && self.members.iter().all(|&m| fam.contains(m))
            && self.weights.iter().all(|w| !w.is_negative())
            && self.weights.iter().sum::<Q>().is_one()
            && combine(fam.ground_len(), &self.members, &self.weights) == self.combined
            && spread(&self.combined) == self.gap
            && self.gap <= *eps
    }
}

fn combine(len: usize, members: &[u64], weights: &[Q]) -> Vec<Q> {
    let mut v = vec![Q::zero(); len];
    for (&mask, w) in members.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        for (i, slot) in v.iter_mut().enumerate() {
            if mask >> i & 1 == 1 {
                *slot += w;
            }
        }
    }
    v
}

fn spread(v: &[Q]) -> Q {
    match (v.iter().max(), v.iter().min()) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => Q::zero(),
    }
}

/// `f` with `Σ f = 0` whose least member sum is `margin` (normalized to 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnbalanceWitness {
    #[serde(with = "serde_q_vec")]
    pub weights: Vec<Q>,
    #[serde(with = "serde_q")]
    pub margin: Q,
}

impl UnbalanceWitness {
    pub fn member_sum(&self, mask: u64) -> Q {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, w)| w.clone())
            .sum()
    }

    /// `Σ f = 0`, the stated margin is the true least member sum, and it is positive.
    pub fn verify(&self, fam: &SetFamily) -> bool {
        if self.weights.len() != fam.ground_len() || fam.is_empty() {
            return false;
        }
        let least = fam.members().map(|m| self.member_sum(m)).min().expect("nonempty");
        self.weights.iter().sum::<Q>().is_zero() && least == self.margin && self.margin.is_positive()
    }
}

/// The least achievable spread together with an attaining witness and the
/// LP optimum that proves no smaller spread exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deficiency {
    #[serde(with = "serde_q")]
    pub value: Q,
    pub witness: BalanceWitness,
    pub optimum: Optimum,
}

/// LP over `(λ_Y…, t_hi, t_lo)` minimizing `t_hi − t_lo` subject to
/// `Σ λ = 1` and `t_lo ≤ v(a) ≤ t_hi` for every ground point.
pub fn deficiency_system(fam: &SetFamily) -> LinearSystem {
    let members: Vec<u64> = fam.members().collect();
    let k = members.len();
    let (hi, lo) = (k, k + 1);
    let mut sys = LinearSystem::new(k + 2);
    for var in 0..k {
        sys.set_nonnegative(var, true);
    }
    let all: Vec<(usize, Q)> = (0..k).map(|j| (j, Q::one())).collect();
    sys.add_sparse(&all, Relation::Eq, Q::one());
    for point in 0..fam.ground_len() {
        let covering: Vec<(usize, Q)> = members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m >> point & 1 == 1)
            .map(|(j, _)| (j, Q::one()))
            .collect();
        let mut upper = covering.clone();
        upper.push((hi, -Q::one()));
        sys.add_sparse(&upper, Relation::Le, Q::zero());
        let mut lower = covering;
        lower.push((lo, -Q::one()));
        sys.add_sparse(&lower, Relation::Ge, Q::zero());
    }
    let mut objective = vec![Q::zero(); k + 2];
    objective[hi] = Q::one();
    objective[lo] = -Q::one();
    sys.set_objective(objective, Direction::Minimize);
    sys
}

pub fn balance_deficiency(fam: &SetFamily) -> Result<Deficiency, BalanceError> {
    if fam.is_empty() {
        return Err(BalanceError::EmptyFamily);
    }
    let sys = deficiency_system(fam);
    let optimum = lp::minimize(&sys)?;
    let weights = optimum.point[..fam.len()].to_vec();
    let witness = BalanceWitness::from_weights(fam, weights);
    debug_assert_eq!(witness.gap, optimum.value);
    Ok(Deficiency {
        value: optimum.value.clone(),
        witness,
        optimum,
    })
}

/// Rechecks a deficiency result: the witness attains the value and the LP
/// dual proves the value is optimal.
pub fn verify_deficiency(fam: &SetFamily, def: &Deficiency) -> Result<bool, BalanceError> {
    let sys = deficiency_system(fam);
    Ok(def.witness.verify(fam, &def.value)
        && def.witness.gap == def.value
        && def.optimum.value == def.value
        && lp::verify_certificate(&sys, &def.optimum)?)
}

/// A balancing witness with spread at most `eps`, or `None`. An empty family
/// is never balanced.
pub fn is_epsilon_balanced(fam: &SetFamily, eps: &Q) -> Result<Option<BalanceWitness>, BalanceError> {
    if fam.is_empty() {
        return Ok(None);
    }
    let def = balance_deficiency(fam)?;
    Ok((def.value <= *eps).then_some(def.witness))
}

/// LP `{Σ f = 0, Σ_{a∈Y} f(a) ≥ 1 for each member Y}` over free `f`.
pub fn unbalance_system(fam: &SetFamily) -> LinearSystem {
    let n = fam.ground_len().max(1);
    let mut sys = LinearSystem::new(n);
    sys.add(vec![Q::one(); n], Relation::Eq, Q::zero());
    for mask in fam.members() {
        let row: Vec<(usize, Q)> = (0..fam.ground_len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (i, Q::one()))
            .collect();
        sys.add_sparse(&row, Relation::Ge, Q::one());
    }
    sys
}

/// `Some` exactly when the family is not 0-balanced.
pub fn unbalance_witness(fam: &SetFamily) -> Result<Option<UnbalanceWitness>, BalanceError> {
    if fam.is_empty() {
        return Err(BalanceError::EmptyFamily);
    }
    if fam.ground_len() == 0 {
        return Ok(None);
    }
    let sys = unbalance_system(fam);
    let outcome = lp::solve_feasibility(&sys)?;
    let Some(point) = outcome.point() else {
        return Ok(None);
    };
    let probe = UnbalanceWitness {
        weights: point.to_vec(),
        margin: Q::zero(),
    };
    let least = fam.members().map(|m| probe.member_sum(m)).min().expect("nonempty");
    let weights: Vec<Q> = point.iter().map(|w| w / &least).collect();
    Ok(Some(UnbalanceWitness {
        weights,
        margin: Q::one(),
    }))
}

/// All subsets with positive `f`-sum.
pub fn family_of_positive_sets(ground: Vec<String>, f: &[Q]) -> Result<SetFamily, BalanceError> {
    if f.len() != ground.len() {
        return Err(BalanceError::Malformed("one weight per ground point required".into()));
    }
    if f.len() > POSITIVE_SETS_LIMIT {
        return Err(BalanceError::TooLarge {
            size: f.len(),
            limit: POSITIVE_SETS_LIMIT,
        });
    }
    if !f.iter().sum::<Q>().is_zero() {
        return Err(BalanceError::NonzeroSum);
    }
    let members = (0u64..1 << f.len()).filter(|&mask| {
        f.iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, w)| w.clone())
            .sum::<Q>()
            .is_positive()
    });
    SetFamily::new(ground, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};
    use proptest::prelude::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn whole_ground_is_balanced() {
        let fam = SetFamily::indexed(3, [0b111]).unwrap();
        let def = balance_deficiency(&fam).unwrap();
        assert_eq!(def.value, q(0));
        assert_eq!(def.witness.combined, vec![q(1); 3]);
        assert!(verify_deficiency(&fam, &def).unwrap());
    }

    #[test]
    fn two_singletons_balance_with_halves() {
        let fam = SetFamily::indexed(2, [0b01, 0b10]).unwrap();
        let def = balance_deficiency(&fam).unwrap();
        assert_eq!(def.value, q(0));
        assert_eq!(def.witness.weights, vec![frac(1, 2), frac(1, 2)]);
        assert!(is_epsilon_balanced(&fam, &q(0)).unwrap().is_some());
        assert_eq!(unbalance_witness(&fam).unwrap(), None);
    }

    #[test]
    fn single_singleton_has_full_deficiency() {
        let fam = SetFamily::indexed(2, [0b01]).unwrap();
        let def = balance_deficiency(&fam).unwrap();
        assert_eq!(def.value, q(1));
        assert!(verify_deficiency(&fam, &def).unwrap());
        assert!(is_epsilon_balanced(&fam, &frac(1, 2)).unwrap().is_none());
        assert!(is_epsilon_balanced(&fam, &q(1)).unwrap().is_some());
        let w = unbalance_witness(&fam).unwrap().unwrap();
        assert_eq!(w.weights, vec![q(1), q(-1)]);
        assert_eq!(w.margin, q(1));
        assert!(w.verify(&fam));
    }

    #[test]
    fn positive_sets_examples() {
        let fam = family_of_positive_sets(labels(&["0", "1"]), &[q(1), q(-1)]).unwrap();
        assert_eq!(fam.members().collect::<Vec<_>>(), vec![0b01]);
        let fam = family_of_positive_sets(labels(&["x"]), &[q(0)]).unwrap();
        assert!(fam.is_empty());
        let fam = family_of_positive_sets(labels(&["x", "y", "z"]), &[q(2), q(-1), q(-1)]).unwrap();
        assert_eq!(fam.members().collect::<Vec<_>>(), vec![0b001, 0b011, 0b101]);
        let w = unbalance_witness(&fam).unwrap().unwrap();
        assert!(w.verify(&fam));
        assert!(matches!(
            family_of_positive_sets(labels(&["x"]), &[q(1)]),
            Err(BalanceError::NonzeroSum)
        ));
    }

    #[test]
    fn empty_family_handling() {
        let fam = SetFamily::indexed(2, []).unwrap();
        assert_eq!(balance_deficiency(&fam), Err(BalanceError::EmptyFamily));
        assert_eq!(unbalance_witness(&fam), Err(BalanceError::EmptyFamily));
        assert_eq!(is_epsilon_balanced(&fam, &q(1)).unwrap(), None);
    }

    #[test]
    fn family_json() {
        let fam: SetFamily = serde_json::from_str(r#"{"ground":["x","y"],"members":[["x"],["y"]]}"#).unwrap();
        assert_eq!(fam, SetFamily::new(labels(&["x", "y"]), [0b01, 0b10]).unwrap());
        let text = serde_json::to_string(&fam).unwrap();
        assert_eq!(serde_json::from_str::<SetFamily>(&text).unwrap(), fam);
        assert!(serde_json::from_str::<SetFamily>(r#"{"ground":["x"],"members":[["q"]]}"#).is_err());
    }

    fn family_strategy() -> impl Strategy<Value = SetFamily> {
        (1usize..=4).prop_flat_map(|n| {
            proptest::collection::btree_set(0u64..(1 << n), 1..6)
                .prop_map(move |members| SetFamily::indexed(n, members).unwrap())
        })
    }

    proptest! {
        #[test]
        fn witnesses_are_sound(fam in family_strategy()) {
            let def = balance_deficiency(&fam).unwrap();
            prop_assert!(verify_deficiency(&fam, &def).unwrap());
            prop_assert!(def.value >= q(0) && def.value <= q(1));
            match unbalance_witness(&fam).unwrap() {
                Some(w) => {
                    prop_assert!(w.verify(&fam));
                    prop_assert!(def.value > q(0));
                }
                None => prop_assert_eq!(def.value, q(0)),
            }
        }

        #[test]
        fn balanced_is_monotone_in_eps(fam in family_strategy(), num in 0i64..=8, extra in 0i64..=8) {
            let eps = frac(num, 8);
            let wider = frac(num + extra, 8);
            if let Some(w) = is_epsilon_balanced(&fam, &eps).unwrap() {
                prop_assert!(w.verify(&fam, &wider));
                prop_assert!(is_epsilon_balanced(&fam, &wider).unwrap().is_some());
            }
        }

        #[test]
        fn superfamily_stays_balanced(fam in family_strategy(), extra in 0u64..16, num in 0i64..=4) {
            let eps = frac(num, 4);
            let extra = extra & full_mask(fam.ground_len());
            let bigger = fam.with_member(extra).unwrap();
            if is_epsilon_balanced(&fam, &eps).unwrap().is_some() {
                prop_assert!(is_epsilon_balanced(&bigger, &eps).unwrap().is_some());
            }
        }
    }
}
