//! Pictures `X_E(g) = {a ∈ A : a·g ∈ E}` of a target set through a finite
//! window, the families they realize, and searches for realized unbalanced
//! families.
//!
//! Families are always realized over an explicit finite probe domain, so a
//! realized family is a subfamily of the true one: fine for unbalancedness
//! certificates, never evidence of balancedness.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{self, BalanceError, BalanceWitness, SetFamily, UnbalanceWitness, MAX_GROUND};
use crate::group::{ElementSet, Group, GroupDescriptor, GroupError};
use crate::measure::{MeasureError, RationalMeasure};
use crate::rational::Q;
use crate::sets::{CompiledSet, SetError, SetExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PictureError {
    #[error("window must be nonempty and have at most {MAX_GROUND} elements, got {0}")]
    Window(usize),
    #[error("weights must have one entry per window element ({expected}), got {got}")]
    WeightShape { expected: usize, got: usize },
    #[error("weights must sum to zero")]
    NonzeroSum,
    #[error("all-zero weights have no positive sets; nothing to realize")]
    Vacuous,
    #[error("family member {0:#b} is not realized over the domain")]
    Unrealized(u64),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A window `A` and a target set `E`.
pub struct PictureContext<'g> {
    group: &'g Group,
    window: ElementSet,
    target: CompiledSet,
}

impl<'g> PictureContext<'g> {
    pub fn new(group: &'g Group, window: ElementSet, target: CompiledSet) -> Result<Self, PictureError> {
        if window.is_empty() || window.len() > MAX_GROUND {
            return Err(PictureError::Window(window.len()));
        }
        Ok(PictureContext { group, window, target })
    }

    pub fn window(&self) -> &ElementSet {
        &self.window
    }

    /// Bit `i` is set iff `window[i]·g ∈ E`.
    pub fn picture(&self, g: &crate::group::GroupElement) -> u64 {
        self.window
            .iter()
            .enumerate()
            .filter(|(_, a)| self.target.contains(&self.group.mul(a, g)))
            .fold(0u64, |mask, (i, _)| mask | 1 << i)
    }

    /// Pictures of each domain point, in domain order.
    pub fn pictures(&self, domain: &ElementSet) -> Vec<u64> {
        domain.elements().par_iter().map(|g| self.picture(g)).collect()
    }

    pub fn ground_labels(&self) -> Vec<String> {
        self.window.iter().map(|a| self.group.format_element(a)).collect()
    }

    /// `{X_E(g) : g ∈ domain}`.
    pub fn realized_family(&self, domain: &ElementSet) -> SetFamily {
        let members: BTreeSet<u64> = self.pictures(domain).into_iter().collect();
        SetFamily::new(self.ground_labels(), members).expect("window size checked")
    }

    /// Turns a balancing witness for a realized family into a measure on the
    /// domain: each member's weight goes to the least domain point realizing
    /// it. Then `aν(E)` equals the witness's combined value at `a`.
    pub fn balanced_to_measure(&self, domain: &ElementSet, witness: &BalanceWitness) -> Result<RationalMeasure, PictureError> {
        let pictures = self.pictures(domain);
        let mut first: BTreeMap<u64, usize> = BTreeMap::new();
        for (i, p) in pictures.iter().enumerate() {
            first.entry(*p).or_insert(i);
        }
        let mut pairs = Vec::new();
        for (mask, weight) in witness.members.iter().zip(&witness.weights) {
            if weight.is_zero() {
                continue;
            }
            let i = first.get(mask).ok_or(PictureError::Unrealized(*mask))?;
            pairs.push((domain.get(*i).clone(), weight.clone()));
        }
        Ok(RationalMeasure::new(pairs)?)
    }

    /// The family of pictures seen by `ν`, weighted by `ν`; its spread
    /// equals `max_a aν(E) − min_a aν(E)`.
    pub fn measure_to_balanced(&self, nu: &RationalMeasure) -> (SetFamily, BalanceWitness) {
        let mut mass: BTreeMap<u64, Q> = BTreeMap::new();
        for (g, w) in nu.iter() {
            *mass.entry(self.picture(g)).or_insert_with(Q::zero) += w;
        }
        let family = SetFamily::new(self.ground_labels(), mass.keys().copied()).expect("window size checked");
        let witness = BalanceWitness::from_weights(&family, mass.into_values().collect());
        (family, witness)
    }

    /// `aν(E)` for each window element `a`, in window order.
    pub fn translated_measures(&self, nu: &RationalMeasure) -> Vec<Q> {
        self.window
            .iter()
            .map(|a| nu.measure_where(|g| self.target.contains(&self.group.mul(a, g))))
            .collect()
    }
}

/// A target set whose realized family over a ball is unbalanced, with the
/// witness proving it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonAmenabilityCertificate {
    pub window: ElementSet,
    pub target: SetExpr,
    pub radius: usize,
    pub domain_size: usize,
    /// Caller-supplied weights, if the search was for a subfamily of their positive sets.
    #[serde(default, with = "crate::rational::serde_q_vec_opt", skip_serializing_if = "Option::is_none")]
    pub requested_weights: Option<Vec<Q>>,
    pub family: SetFamily,
    pub witness: UnbalanceWitness,
}

impl NonAmenabilityCertificate {
    /// Recomputes the family from the window, target, and radius and checks
    /// the witness (and the requested weights, if any) against it.
    pub fn verify(&self, group: &Group, ball_cap: usize) -> Result<bool, PictureError> {
        let domain = group.ball(self.radius, ball_cap)?;
        let ctx = PictureContext::new(group, self.window.clone(), self.target.compile(group)?)?;
        let family = ctx.realized_family(&domain);
        let requested_ok = match &self.requested_weights {
            None => true,
            Some(f) => {
                let probe = UnbalanceWitness {
                    weights: f.clone(),
                    margin: Q::zero(),
                };
                f.len() == family.ground_len()
                    && f.iter().sum::<Q>().is_zero()
                    && family.members().all(|m| probe.member_sum(m).is_positive())
            }
        };
        Ok(domain.len() == self.domain_size && family == self.family && self.witness.verify(&family) && requested_ok)
    }
}

/// Candidate targets: atoms and their complements, then pairwise unions and
/// intersections of those. Atoms are first-letter sets and `h` level sets
/// (`|k| ≤ radius + 1`) on free groups, residue classes mod 2 and 3 and
/// coordinate half-spaces on `Z^d`, residue classes mod proper divisors on
/// cyclic groups. Finite tables get an empty pool.
pub fn candidate_pool(group: &Group, radius: usize) -> Vec<SetExpr> {
    let reach = radius as i64 + 1;
    let mut atoms = Vec::new();
    match group.descriptor() {
        GroupDescriptor::Free { generators } => {
            for name in generators {
                let inverse = name.to_ascii_uppercase();
                atoms.push(SetExpr::first_letter(&[name]));
                atoms.push(SetExpr::first_letter(&[&inverse]));
                atoms.push(SetExpr::first_letter(&[name, &inverse]));
            }
            atoms.extend((-reach..=reach).map(SetExpr::h_above));
        }
        GroupDescriptor::FreeAbelian { rank, .. } => {
            for coord in 0..*rank {
                let prog = |modulus: i64, residues: &[i64]| SetExpr::Progression {
                    modulus,
                    residues: residues.to_vec(),
                    coord,
                };
                atoms.push(prog(2, &[0]));
                atoms.extend((0..3).map(|r| prog(3, &[r])));
                let weights: Vec<i64> = (0..*rank).map(|i| i64::from(i == coord)).collect();
                atoms.extend((-reach..=reach).map(|k| SetExpr::HAbove {
                    k,
                    weights: Some(weights.clone()),
                }));
            }
        }
        GroupDescriptor::Cyclic { order } => {
            let order = *order as i64;
            for modulus in (2..order).filter(|d| order % d == 0) {
                atoms.extend((0..modulus).map(|r| SetExpr::progression(modulus, &[r])));
            }
        }
        GroupDescriptor::FiniteTable { .. } => {}
    }
    let literals: Vec<SetExpr> = atoms
        .iter()
        .cloned()
        .chain(atoms.iter().cloned().map(SetExpr::complement))
        .collect();
    let mut pool = literals.clone();
    for i in 0..literals.len() {
        for j in i + 1..literals.len() {
            pool.push(SetExpr::union(vec![literals[i].clone(), literals[j].clone()]));
            pool.push(SetExpr::intersection(vec![literals[i].clone(), literals[j].clone()]));
        }
    }
    pool
}

/// Searches the candidate pool, in order, for a target whose family over
/// the ball of `radius` is unbalanced. With `weights`, the family must also
/// consist of sets with positive weight sum. `None` means the pool was
/// exhausted; it says nothing about amenability.
pub fn realization_search(
    group: &Group,
    window: &ElementSet,
    weights: Option<&[Q]>,
    radius: usize,
    ball_cap: usize,
) -> Result<Option<NonAmenabilityCertificate>, PictureError> {
    if window.is_empty() || window.len() > MAX_GROUND {
        return Err(PictureError::Window(window.len()));
    }
    if let Some(f) = weights {
        if f.len() != window.len() {
            return Err(PictureError::WeightShape {
                expected: window.len(),
                got: f.len(),
            });
        }
        if !f.iter().sum::<Q>().is_zero() {
            return Err(PictureError::NonzeroSum);
        }
        if f.iter().all(Zero::is_zero) {
            return Err(PictureError::Vacuous);
        }
    }
    let domain = group.ball(radius, ball_cap)?;
    for target in candidate_pool(group, radius) {
        let ctx = PictureContext::new(group, window.clone(), target.compile(group)?)?;
        let family = ctx.realized_family(&domain);
        let witness = match weights {
            Some(f) => {
                let probe = UnbalanceWitness {
                    weights: f.to_vec(),
                    margin: Q::zero(),
                };
                let least = family.members().map(|m| probe.member_sum(m)).min().expect("domain nonempty");
                if !least.is_positive() {
                    continue;
                }
                UnbalanceWitness {
                    weights: f.iter().map(|w| w / &least).collect(),
                    margin: num_traits::One::one(),
                }
            }
            None => match balance::unbalance_witness(&family)? {
                Some(w) => w,
                None => continue,
            },
        };
        return Ok(Some(NonAmenabilityCertificate {
            window: window.clone(),
            target,
            radius,
            domain_size: domain.len(),
            requested_weights: weights.map(<[Q]>::to_vec),
            family,
            witness,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;
    use crate::rational::q;
    use proptest::prelude::*;

    fn z() -> Group {
        Group::new(GroupDescriptor::integers()).unwrap()
    }

    fn ints(xs: &[i64]) -> ElementSet {
        xs.iter().map(|&x| GroupElement::int(x)).collect()
    }

    #[test]
    fn trivial_targets() {
        let g = z();
        let all = SetExpr::h_above(-1000).compile(&g).unwrap();
        let ctx = PictureContext::new(&g, ints(&[0, 1]), all).unwrap();
        assert_eq!(ctx.picture(&GroupElement::int(5)), 0b11);
        let none = CompiledSet::Explicit(ElementSet::default());
        let ctx = PictureContext::new(&g, ints(&[0, 1]), none).unwrap();
        assert_eq!(ctx.picture(&GroupElement::int(5)), 0);
        assert_eq!(ctx.realized_family(&g.ball(3, 100).unwrap()).members().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn parity_pictures() {
        let g = z();
        let evens = SetExpr::progression(2, &[0]).compile(&g).unwrap();
        let ctx = PictureContext::new(&g, ints(&[0, 1]), evens).unwrap();
        assert_eq!(ctx.picture(&GroupElement::int(4)), 0b01);
        assert_eq!(ctx.picture(&GroupElement::int(-3)), 0b10);
        let fam = ctx.realized_family(&g.ball(3, 100).unwrap());
        assert_eq!(fam.members().collect::<Vec<_>>(), vec![0b01, 0b10]);
    }

    #[test]
    fn weight_validation() {
        let g = z();
        let window = ints(&[0, 1]);
        assert!(matches!(
            realization_search(&g, &window, Some(&[q(0), q(0)]), 2, 100),
            Err(PictureError::Vacuous)
        ));
        assert!(matches!(
            realization_search(&g, &window, Some(&[q(1), q(0)]), 2, 100),
            Err(PictureError::NonzeroSum)
        ));
    }

    #[test]
    fn pool_is_deterministic() {
        let f2 = Group::new(GroupDescriptor::free(&["a", "b"])).unwrap();
        let pool = candidate_pool(&f2, 2);
        assert_eq!(pool, candidate_pool(&f2, 2));
        // 6 first-letter atoms + 7 h levels, their complements, then pairs.
        let literals = 2 * (6 + 7);
        assert_eq!(pool.len(), literals + literals * (literals - 1));
    }

    fn measure_strategy() -> impl Strategy<Value = RationalMeasure> {
        proptest::collection::vec(0i64..4, 5).prop_filter_map("nonzero", |raw| {
            let total: i64 = raw.iter().sum();
            (total > 0).then(|| {
                RationalMeasure::new(
                    raw.iter()
                        .enumerate()
                        .map(|(i, &w)| (GroupElement::int(i as i64 - 2), Q::new(w.into(), total.into()))),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn measure_gap_matches_family_spread(nu in measure_strategy(), target in proptest::collection::btree_set(-3i64..=3, 0..7)) {
            let g = z();
            let window = g.ball(1, 10).unwrap();
            let ctx = PictureContext::new(&g, window, CompiledSet::Explicit(ints(&target.into_iter().collect::<Vec<_>>()))).unwrap();
            let values = ctx.translated_measures(&nu);
            let gap = values.iter().max().unwrap() - values.iter().min().unwrap();
            let (family, witness) = ctx.measure_to_balanced(&nu);
            prop_assert!(witness.verify(&family, &gap));
            prop_assert_eq!(&witness.combined, &values);
        }

        #[test]
        fn balanced_family_yields_measure(target in proptest::collection::btree_set(-4i64..=4, 0..9)) {
            let g = z();
            let window = g.ball(1, 10).unwrap();
            let domain = g.ball(2, 10).unwrap();
            let ctx = PictureContext::new(&g, window, CompiledSet::Explicit(ints(&target.into_iter().collect::<Vec<_>>()))).unwrap();
            let family = ctx.realized_family(&domain);
            let def = balance::balance_deficiency(&family).unwrap();
            let nu = ctx.balanced_to_measure(&domain, &def.witness).unwrap();
            prop_assert!(nu.is_supported_in(&domain));
            let values = ctx.translated_measures(&nu);
            let gap = values.iter().max().unwrap() - values.iter().min().unwrap();
            prop_assert!(gap <= def.value);
        }

        #[test]
        fn picture_depends_only_on_translated_window(
            g in -5i64..=5,
            target in proptest::collection::btree_set(-8i64..=8, 0..10),
            noise in proptest::collection::btree_set(-8i64..=8, 0..10),
        ) {
            let group = z();
            let window = ints(&[-1, 0, 1]);
            let shifted: BTreeSet<i64> = [g - 1, g, g + 1].into_iter().collect();
            let mutated: Vec<i64> = target
                .iter()
                .copied()
                .filter(|x| shifted.contains(x))
                .chain(noise.into_iter().filter(|x| !shifted.contains(x)))
                .collect();
            let original: Vec<i64> = target.into_iter().collect();
            let before = PictureContext::new(&group, window.clone(), CompiledSet::Explicit(ints(&original))).unwrap();
            let after = PictureContext::new(&group, window, CompiledSet::Explicit(ints(&mutated))).unwrap();
            prop_assert_eq!(before.picture(&GroupElement::int(g)), after.picture(&GroupElement::int(g)));
        }
    }
}
