//! Finitely supported probability measures with exact rational weights.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::group::{ElementSet, Group, GroupElement};
use crate::rational::{abs_q, format_q, parse_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("measure weights sum to {0}, not 1")]
    NotNormalized(String),
    #[error("negative weight {weight} at {element}")]
    NegativeWeight { element: String, weight: String },
    #[error("function is undefined at support point {0}")]
    UndefinedValue(String),
    #[error("cannot build a measure on an empty set")]
    EmptySupport,
}

/// A probability measure with finite support. Only nonzero weights are
/// stored, keyed in canonical element order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMeasure {
    weights: BTreeMap<GroupElement, Q>,
}

impl RationalMeasure {
    /// Validates nonnegativity and normalization; zero weights are dropped.
    pub fn new<I: IntoIterator<Item = (GroupElement, Q)>>(pairs: I) -> Result<Self, MeasureError> {
        let mut weights: BTreeMap<GroupElement, Q> = BTreeMap::new();
        for (g, w) in pairs {
            *weights.entry(g).or_insert_with(Q::zero) += w;
        }
        if let Some((g, w)) = weights.iter().find(|(_, w)| w.is_negative()) {
            return Err(MeasureError::NegativeWeight {
                element: format!("{g:?}"),
                weight: format_q(w),
            });
        }
        weights.retain(|_, w| !w.is_zero());
        let total: Q = weights.values().sum();
        if !total.is_one() {
            return Err(MeasureError::NotNormalized(format_q(&total)));
        }
        Ok(RationalMeasure { weights })
    }

    pub fn point_mass(g: GroupElement) -> Self {
        RationalMeasure {
            weights: BTreeMap::from([(g, Q::one())]),
        }
    }

    pub fn uniform(set: &ElementSet) -> Result<Self, MeasureError> {
        if set.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        let w = Q::new(1.into(), (set.len() as i64).into());
        Ok(RationalMeasure {
            weights: set.iter().map(|g| (g.clone(), w.clone())).collect(),
        })
    }

    /// `alpha·first + (1 - alpha)·second` for `alpha ∈ [0, 1]`.
    pub fn mix(alpha: &Q, first: &Self, second: &Self) -> Result<Self, MeasureError> {
        let beta = Q::one() - alpha;
        let pairs = first
            .iter()
            .map(|(g, w)| (g.clone(), alpha * w))
            .chain(second.iter().map(|(g, w)| (g.clone(), &beta * w)));
        Self::new(pairs)
    }

    pub fn weight(&self, g: &GroupElement) -> Q {
        self.weights.get(g).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &Q)> {
        self.weights.iter()
    }

    pub fn support(&self) -> ElementSet {
        self.weights.keys().cloned().collect()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// `ν(E)`.
    pub fn measure_of_set(&self, set: &ElementSet) -> Q {
        self.measure_where(|g| set.contains(g))
    }

    /// `ν({g : pred(g)})`.
    pub fn measure_where<F: Fn(&GroupElement) -> bool>(&self, pred: F) -> Q {
        self.weights
            .iter()
            .filter(|(g, _)| pred(g))
            .map(|(_, w)| w.clone())
            .sum()
    }

    /// `ν(f) = Σ ν({g}) f(g)`; `f` must be defined on the whole support.
    pub fn evaluate_function<F: Fn(&GroupElement) -> Option<Q>>(&self, f: F) -> Result<Q, MeasureError> {
        let mut total = Q::zero();
        for (g, w) in &self.weights {
            let value = f(g).ok_or_else(|| MeasureError::UndefinedValue(format!("{g:?}")))?;
            total += w * value;
        }
        Ok(total)
    }

    /// `μ ∗ ν`, the weight at `z` being `Σ_{xy = z} μ(x) ν(y)`.
    pub fn convolve(&self, group: &Group, other: &Self) -> Self {
        let mut weights: BTreeMap<GroupElement, Q> = BTreeMap::new();
        for (x, wx) in &self.weights {
            for (y, wy) in &other.weights {
                *weights.entry(group.mul(x, y)).or_insert_with(Q::zero) += wx * wy;
            }
        }
        RationalMeasure { weights }
    }

    /// Left translate `gν = δ_g ∗ ν`, so that `gν(E) = ν(g⁻¹E)`.
    pub fn translate(&self, group: &Group, g: &GroupElement) -> Self {
        RationalMeasure {
            weights: self
                .weights
                .iter()
                .map(|(x, w)| (group.mul(g, x), w.clone()))
                .collect(),
        }
    }

    /// `‖μ − ν‖₁`.
    pub fn l1_distance(&self, other: &Self) -> Q {
        let mut total = Q::zero();
        for (g, w) in &self.weights {
            total += abs_q(&(w - other.weight(g)));
        }
        for (g, w) in &other.weights {
            if !self.weights.contains_key(g) {
                total += w;
            }
        }
        total
    }

    pub fn is_supported_in(&self, set: &ElementSet) -> bool {
        self.weights.keys().all(|g| set.contains(g))
    }
}

#[derive(Serialize, Deserialize)]
struct WeightEntry {
    element: GroupElement,
    weight: String,
}

impl Serialize for RationalMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<WeightEntry> = self
            .weights
            .iter()
            .map(|(g, w)| WeightEntry {
                element: g.clone(),
                weight: format_q(w),
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<WeightEntry>::deserialize(d)?;
        let mut pairs = Vec::with_capacity(entries.len());
        for entry in entries {
            let w = parse_q(&entry.weight).map_err(serde::de::Error::custom)?;
            pairs.push((entry.element, w));
        }
        RationalMeasure::new(pairs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupDescriptor;
    use crate::rational::{frac, q};

    fn f2() -> Group {
        Group::new(GroupDescriptor::free(&["a", "b"])).unwrap()
    }

    fn uniform_of(g: &Group, names: &[&str]) -> RationalMeasure {
        RationalMeasure::uniform(&g.parse_elements(names.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn point_masses_multiply() {
        let g = f2();
        let x = g.parse_element("ab").unwrap();
        let y = g.parse_element("Ba").unwrap();
        let conv = RationalMeasure::point_mass(x.clone()).convolve(&g, &RationalMeasure::point_mass(y.clone()));
        assert_eq!(conv, RationalMeasure::point_mass(g.mul(&x, &y)));
    }

    #[test]
    fn convolution_without_collisions() {
        let g = f2();
        let conv = uniform_of(&g, &["e", "a"]).convolve(&g, &uniform_of(&g, &["e", "b"]));
        assert_eq!(conv, uniform_of(&g, &["e", "b", "a", "ab"]));
        assert_eq!(conv.weight(&g.parse_element("ab").unwrap()), frac(1, 4));
    }

    #[test]
    fn convolution_merges_collisions() {
        let z2 = Group::new(GroupDescriptor::cyclic(2)).unwrap();
        let u = RationalMeasure::uniform(&z2.ball(1, 10).unwrap()).unwrap();
        // Four product terms 0+0, 0+1, 1+0, 1+1 land on 0, 1, 1, 0.
        assert_eq!(u.convolve(&z2, &u), u);
    }

    #[test]
    fn measure_of_sets() {
        let z = Group::new(GroupDescriptor::integers()).unwrap();
        let nu = RationalMeasure::uniform(&z.ball(1, 10).unwrap()).unwrap();
        assert_eq!(nu.measure_of_set(&ElementSet::default()), q(0));
        assert_eq!(nu.measure_where(|_| true), q(1));
        let even = |g: &GroupElement| matches!(g, GroupElement::Vector(v) if v[0] % 2 == 0);
        assert_eq!(nu.measure_where(even), frac(1, 3));
    }

    #[test]
    fn function_evaluation() {
        let g = f2();
        let nu = uniform_of(&g, &["e", "a"]);
        assert_eq!(nu.evaluate_function(|_| Some(q(1))).unwrap(), q(1));
        let a = g.parse_element("a").unwrap();
        let f = |x: &GroupElement| Some(if *x == a { q(1) } else { q(0) });
        assert_eq!(nu.evaluate_function(f).unwrap(), frac(1, 2));
        let e_set = g.parse_elements(["a"]).unwrap();
        let chi = |x: &GroupElement| Some(if e_set.contains(x) { q(1) } else { q(0) });
        assert_eq!(nu.evaluate_function(chi).unwrap(), nu.measure_of_set(&e_set));
        assert!(matches!(nu.evaluate_function(|_| None), Err(MeasureError::UndefinedValue(_))));
    }

    #[test]
    fn validation() {
        let z = Group::new(GroupDescriptor::integers()).unwrap();
        let one = GroupElement::int(1);
        assert!(matches!(
            RationalMeasure::new([(one.clone(), frac(1, 2))]),
            Err(MeasureError::NotNormalized(_))
        ));
        assert!(RationalMeasure::new([(one.clone(), q(2)), (z.identity(), q(-1))]).is_err());
        let m = RationalMeasure::new([(one, q(1)), (z.identity(), q(0))]).unwrap();
        assert_eq!(m.support_len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let g = f2();
        let nu = uniform_of(&g, &["e", "aB", "b"]);
        let text = serde_json::to_string(&nu).unwrap();
        assert!(text.contains("\"1/3\""));
        let back: RationalMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, nu);
    }
}
