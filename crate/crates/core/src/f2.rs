//! The five-set construction in the free group on `a`, `b`.
//!
//! `A` is the set of reduced words starting with `a` or `A`, `h` is the
//! homomorphism to `Z` with `h(a) = 1`, `h(b) = -1`, and `Z_k = {h > k}` with
//! `Z = Z_0`. From these: `X = A ∪ Zᶜ`, `X' = A ∩ Z`, `Y = Aᶜ ∪ Z`,
//! `Y' = Aᶜ ∩ Zᶜ`. Identities are checked pointwise on every reduced word up
//! to a length bound, which can refute but never prove the infinite claim.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{ElementSet, Group, GroupDescriptor, GroupElement, GroupError, Word};
use crate::lp::{self, Direction, FeasibilityOutcome, LinearSystem, LpError, Relation};
use crate::rational::{frac, serde_q, Q};

pub const MAX_SCAN_LENGTH: usize = 12;
pub const MAX_TRANSLATES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum F2Error {
    #[error("{what} = {value} exceeds the limit {limit}")]
    Cap { what: &'static str, value: usize, limit: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `h(w)`: `a ↦ 1`, `A ↦ -1`, `b ↦ -1`, `B ↦ 1`.
pub fn h(w: &Word) -> i64 {
    w.letters()
        .iter()
        .map(|c| match c {
            b'a' | b'B' => 1,
            b'A' | b'b' => -1,
            _ => 0,
        })
        .sum()
}

/// The free group on `a`, `b`.
pub fn free_group() -> Group {
    Group::new(GroupDescriptor::free(&["a", "b"])).expect("valid descriptor")
}

/// All reduced words over `a, A, b, B` of length at most `max_len`, in
/// shortlex order.
pub fn reduced_words(max_len: usize) -> Vec<Word> {
    let mut all = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * 3);
        for w in &layer {
            for c in *b"aAbB" {
                let step = Word::reduce([c]);
                let extended = w.mul(&step);
                if extended.len() == w.len() + 1 {
                    next.push(extended);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum F2Set {
    A,
    /// `Z_k = {h > k}`.
    ZLevel(i64),
    Z,
    X,
    XPrime,
    Y,
    YPrime,
    Complement(Box<F2Set>),
    Union(Vec<F2Set>),
    Intersection(Vec<F2Set>),
    /// Left translate `w·E`.
    Translate(Word, Box<F2Set>),
}

impl F2Set {
    pub fn complement(self) -> Self {
        F2Set::Complement(Box::new(self))
    }

    pub fn translate(self, w: Word) -> Self {
        F2Set::Translate(w, Box::new(self))
    }

    /// The five sets in the order `X, X', Y, Y', Z`.
    pub fn five() -> [F2Set; 5] {
        [F2Set::X, F2Set::XPrime, F2Set::Y, F2Set::YPrime, F2Set::Z]
    }

    pub fn contains(&self, w: &Word) -> bool {
        let in_a = || matches!(w.first(), Some(b'a' | b'A'));
        let in_z = || h(w) > 0;
        match self {
            F2Set::A => in_a(),
            F2Set::ZLevel(k) => h(w) > *k,
            F2Set::Z => in_z(),
            F2Set::X => in_a() || !in_z(),
            F2Set::XPrime => in_a() && in_z(),
            F2Set::Y => !in_a() || in_z(),
            F2Set::YPrime => !in_a() && !in_z(),
            F2Set::Complement(inner) => !inner.contains(w),
            F2Set::Union(parts) => parts.iter().any(|p| p.contains(w)),
            F2Set::Intersection(parts) => parts.iter().all(|p| p.contains(w)),
            F2Set::Translate(g, inner) => inner.contains(&g.inverse().mul(w)),
        }
    }
}

impl fmt::Display for F2Set {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F2Set::A => write!(f, "A"),
            F2Set::ZLevel(k) => write!(f, "Z_{k}"),
            F2Set::Z => write!(f, "Z"),
            F2Set::X => write!(f, "X"),
            F2Set::XPrime => write!(f, "X'"),
            F2Set::Y => write!(f, "Y"),
            F2Set::YPrime => write!(f, "Y'"),
            F2Set::Complement(inner) => write!(f, "({inner})^c"),
            F2Set::Union(parts) => write_joined(f, parts, " ∪ "),
            F2Set::Intersection(parts) => write_joined(f, parts, " ∩ "),
            F2Set::Translate(g, inner) => write!(f, "{g}·{inner}"),
        }
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, parts: &[F2Set], sep: &str) -> fmt::Result {
    write!(f, "(")?;
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            write!(f, "{sep}")?;
        }
        write!(f, "{p}")?;
    }
    write!(f, ")")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub words_checked: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Pointwise checks; every entry holds for all reduced words up to `max_length`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub max_length: usize,
    pub checks: Vec<IdentityCheck>,
}

impl ScanReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

fn scan<F>(name: String, words: &[Word], holds: F) -> IdentityCheck
where
    F: Fn(&Word) -> bool + Sync,
{
    let failing: Vec<&Word> = words.par_iter().filter(|u| !holds(u)).collect();
    IdentityCheck {
        name,
        words_checked: words.len() as u64,
        failures: failing.len() as u64,
        first_failure: failing.first().map(|w| w.to_string()),
    }
}

fn check_length(max_len: usize) -> Result<(), F2Error> {
    if max_len > MAX_SCAN_LENGTH {
        return Err(F2Error::Cap {
            what: "word length",
            value: max_len,
            limit: MAX_SCAN_LENGTH,
        });
    }
    Ok(())
}

/// Set identities, containments, and `w·Z = Z_{h(w)}` for every `w` of
/// length at most 3, all evaluated on each word of length at most `max_len`.
pub fn verify_identities(max_len: usize) -> Result<ScanReport, F2Error> {
    check_length(max_len)?;
    let words = reduced_words(max_len);
    let a = |w: &Word| F2Set::A.contains(w);
    let z = |w: &Word| F2Set::Z.contains(w);
    let x = |w: &Word| F2Set::X.contains(w);
    let xp = |w: &Word| F2Set::XPrime.contains(w);
    let y = |w: &Word| F2Set::Y.contains(w);
    let yp = |w: &Word| F2Set::YPrime.contains(w);

    let mut checks = vec![
        scan("X = A ∪ Zᶜ".into(), &words, |u| x(u) == (a(u) || !z(u))),
        scan("X' = A ∩ Z".into(), &words, |u| xp(u) == (a(u) && z(u))),
        scan("Y = Aᶜ ∪ Z".into(), &words, |u| y(u) == (!a(u) || z(u))),
        scan("Y' = Aᶜ ∩ Zᶜ".into(), &words, |u| yp(u) == (!a(u) && !z(u))),
        scan("A △ Zᶜ = X' ∪ Y'".into(), &words, |u| (a(u) != !z(u)) == (xp(u) || yp(u))),
        scan("Aᶜ △ Z = X' ∪ Y'".into(), &words, |u| (!a(u) != z(u)) == (xp(u) || yp(u))),
        scan("X' ⊆ Z".into(), &words, |u| !xp(u) || z(u)),
        scan("Z ⊆ Y".into(), &words, |u| !z(u) || y(u)),
        scan("Y' ⊆ Zᶜ".into(), &words, |u| !yp(u) || !z(u)),
        scan("Zᶜ ⊆ X".into(), &words, |u| z(u) || x(u)),
    ];
    for w in reduced_words(3) {
        let translated = F2Set::Z.translate(w.clone());
        let level = F2Set::ZLevel(h(&w));
        checks.push(scan(
            format!("{w}·Z = Z_{}", h(&w)),
            &words,
            |u| translated.contains(u) == level.contains(u),
        ));
    }
    Ok(ScanReport {
        max_length: max_len,
        checks,
    })
}

/// The four sequences of translates claimed pairwise disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TranslateFamily {
    /// `a^k Y'`
    APowersOfYPrime,
    /// `b^k X'`
    BPowersOfXPrime,
    /// `b^k A`
    BPowersOfA,
    /// `a^k Aᶜ`
    APowersOfAComplement,
}

impl TranslateFamily {
    pub const ALL: [TranslateFamily; 4] = [
        TranslateFamily::APowersOfYPrime,
        TranslateFamily::BPowersOfXPrime,
        TranslateFamily::BPowersOfA,
        TranslateFamily::APowersOfAComplement,
    ];

    fn parts(self) -> (u8, F2Set) {
        match self {
            TranslateFamily::APowersOfYPrime => (b'a', F2Set::YPrime),
            TranslateFamily::BPowersOfXPrime => (b'b', F2Set::XPrime),
            TranslateFamily::BPowersOfA => (b'b', F2Set::A),
            TranslateFamily::APowersOfAComplement => (b'a', F2Set::A.complement()),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TranslateFamily::APowersOfYPrime => "a^k Y'",
            TranslateFamily::BPowersOfXPrime => "b^k X'",
            TranslateFamily::BPowersOfA => "b^k A",
            TranslateFamily::APowersOfAComplement => "a^k Aᶜ",
        }
    }

    /// The `k`-th translate as a set.
    pub fn member(self, k: usize) -> F2Set {
        let (letter, base) = self.parts();
        base.translate(Word::reduce(std::iter::repeat_n(letter, k)))
    }
}

/// Checks that translates `i` and `j` of `family` share no word of length
/// at most `max_len`. Equal indices are rejected.
pub fn translates_disjoint(family: TranslateFamily, i: usize, j: usize, max_len: usize) -> Result<IdentityCheck, F2Error> {
    if i == j {
        return Err(F2Error::Invalid("translate indices must be distinct".into()));
    }
    check_length(max_len)?;
    let (first, second) = (family.member(i), family.member(j));
    Ok(scan(
        format!("{} for k = {i}, {j}", family.label()),
        &reduced_words(max_len),
        |u| !(first.contains(u) && second.contains(u)),
    ))
}

/// All pairs `0 ≤ i < j < count` for each of the four families.
pub fn verify_disjoint_translates(count: usize, max_len: usize) -> Result<ScanReport, F2Error> {
    if count > MAX_TRANSLATES {
        return Err(F2Error::Cap {
            what: "translate count",
            value: count,
            limit: MAX_TRANSLATES,
        });
    }
    check_length(max_len)?;
    let words = reduced_words(max_len);
    let checks = TranslateFamily::ALL
        .iter()
        .map(|&family| {
            let members: Vec<F2Set> = (0..count).map(|k| family.member(k)).collect();
            scan(format!("{} pairwise disjoint, k < {count}", family.label()), &words, |u| {
                members.iter().filter(|m| m.contains(u)).count() <= 1
            })
        })
        .collect();
    Ok(ScanReport {
        max_length: max_len,
        checks,
    })
}

/// Translates used by the invariance system: `a^k`, `b^k` for `1 ≤ k < count`.
pub fn invariance_translates(count: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for letter in *b"ab" {
        for k in 1..count {
            out.push(Word::reduce(std::iter::repeat_n(letter, k)));
        }
    }
    out
}

/// Exact membership data of one support point: for each of the five sets
/// `E`, whether `u ∈ E`, followed by whether `w·u ∈ E` for each translate.
fn signature(u: &Word, translates: &[Word]) -> Vec<bool> {
    let mut sig = Vec::with_capacity(5 * (translates.len() + 1));
    for set in F2Set::five() {
        sig.push(set.contains(u));
        for w in translates {
            sig.push(set.contains(&w.mul(u)));
        }
    }
    sig
}

/// Builds `Σ ν = 1, ν ≥ 0` and `|ν(w⁻¹E) − ν(E)| ≤ delta` over columns
/// given by membership signatures (one column per signature). With
/// `delta = None`, `delta` becomes an extra nonnegative last variable.
fn invariance_rows(columns: &[Vec<bool>], translate_count: usize, delta: Option<&Q>) -> LinearSystem {
    let n = columns.len() + usize::from(delta.is_none());
    let mut sys = LinearSystem::with_nonnegative(n);
    let mut total = vec![Q::one(); n];
    if delta.is_none() {
        total[n - 1] = Q::zero();
    }
    sys.add(total, Relation::Eq, Q::one());
    let stride = translate_count + 1;
    for set_index in 0..5 {
        for t in 0..translate_count {
            let diff: Vec<Q> = columns
                .iter()
                .map(|sig| {
                    let moved = sig[set_index * stride + 1 + t] as i64;
                    let here = sig[set_index * stride] as i64;
                    Q::from_integer((moved - here).into())
                })
                .collect();
            match delta {
                Some(d) => {
                    sys.add(diff.clone(), Relation::Le, d.clone());
                    sys.add(diff, Relation::Ge, -d.clone());
                }
                None => {
                    let mut upper = diff.clone();
                    upper.push(-Q::one());
                    sys.add(upper, Relation::Le, Q::zero());
                    let mut lower = diff;
                    lower.push(Q::one());
                    sys.add(lower, Relation::Ge, Q::zero());
                }
            }
        }
    }
    sys
}

/// The support ball and the signature classes of its points.
pub struct InvarianceInstance {
    pub translate_count: usize,
    pub radius: usize,
    pub support: Vec<Word>,
    translates: Vec<Word>,
    signatures: Vec<Vec<bool>>,
    /// Distinct signatures in first-occurrence order, with their least representative.
    classes: Vec<(Vec<bool>, usize)>,
}

impl InvarianceInstance {
    pub fn new(translate_count: usize, radius: usize, ball_cap: usize) -> Result<Self, F2Error> {
        if translate_count < 2 {
            return Err(F2Error::Invalid("translate count must be at least 2".into()));
        }
        let group = free_group();
        let ball = group.ball(radius, ball_cap)?;
        let support: Vec<Word> = ball
            .iter()
            .map(|g| g.as_word().expect("free group element").clone())
            .collect();
        let translates = invariance_translates(translate_count);
        let signatures: Vec<Vec<bool>> = support.par_iter().map(|u| signature(u, &translates)).collect();
        let mut seen: BTreeMap<&Vec<bool>, usize> = BTreeMap::new();
        let mut classes = Vec::new();
        for (i, sig) in signatures.iter().enumerate() {
            seen.entry(sig).or_insert_with(|| {
                classes.push((sig.clone(), i));
                i
            });
        }
        Ok(InvarianceInstance {
            translate_count,
            radius,
            support,
            translates,
            signatures,
            classes,
        })
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// The full system with one variable per support point.
    pub fn full_system(&self, delta: &Q) -> LinearSystem {
        invariance_rows(&self.signatures, self.translates.len(), Some(delta))
    }

    fn reduced_system(&self, delta: Option<&Q>) -> LinearSystem {
        let columns: Vec<Vec<bool>> = self.classes.iter().map(|(sig, _)| sig.clone()).collect();
        invariance_rows(&columns, self.translates.len(), delta)
    }

    /// Solves on signature classes and lifts the answer to the full system:
    /// a Farkas vector carries over unchanged (points sharing a signature
    /// have identical columns), and a feasible class weight is placed on
    /// the class's least point.
    pub fn solve(&self, delta: &Q) -> Result<FeasibilityOutcome, F2Error> {
        let reduced = lp::solve_feasibility(&self.reduced_system(Some(delta)))?;
        Ok(match reduced {
            FeasibilityOutcome::Infeasible { farkas } => FeasibilityOutcome::Infeasible { farkas },
            FeasibilityOutcome::Feasible { point } => {
                let mut full = vec![Q::zero(); self.support.len()];
                for ((_, rep), weight) in self.classes.iter().zip(point) {
                    full[*rep] = weight;
                }
                FeasibilityOutcome::Feasible { point: full }
            }
        })
    }

    /// The least `delta` admitting a measure, by direct minimization.
    pub fn minimal_delta(&self) -> Result<Q, F2Error> {
        let mut sys = self.reduced_system(None);
        let mut objective = vec![Q::zero(); sys.num_vars];
        objective[sys.num_vars - 1] = Q::one();
        sys.set_objective(objective, Direction::Minimize);
        Ok(lp::minimize(&sys)?.value)
    }

    /// A feasible outcome as a measure on words.
    pub fn measure_of(&self, outcome: &FeasibilityOutcome) -> Option<Vec<(Word, Q)>> {
        outcome.point().map(|p| {
            self.support
                .iter()
                .zip(p)
                .filter(|(_, w)| !w.is_zero())
                .map(|(u, w)| (u.clone(), w.clone()))
                .collect()
        })
    }

    pub fn verify(&self, delta: &Q, outcome: &FeasibilityOutcome) -> Result<bool, F2Error> {
        Ok(lp::verify_certificate(&self.full_system(delta), outcome)?)
    }
}

/// Dyadic bracket around the feasibility threshold: infeasible at `lower`,
/// feasible at `upper`, with `upper − lower = 2^-steps`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    #[serde(with = "serde_q")]
    pub lower: Q,
    #[serde(with = "serde_q")]
    pub upper: Q,
    pub lower_outcome: FeasibilityOutcome,
    pub upper_outcome: FeasibilityOutcome,
}

/// Bisects `[0, 1]`; `None` when already feasible at `delta = 0`.
pub fn bisect_threshold(instance: &InvarianceInstance, steps: u32) -> Result<Option<Threshold>, F2Error> {
    let at_zero = instance.solve(&Q::zero())?;
    if at_zero.is_feasible() {
        return Ok(None);
    }
    let mut lower = (Q::zero(), at_zero);
    let mut upper = (Q::one(), instance.solve(&Q::one())?);
    debug_assert!(upper.1.is_feasible());
    for _ in 0..steps {
        let mid = (&lower.0 + &upper.0) * frac(1, 2);
        let outcome = instance.solve(&mid)?;
        if outcome.is_feasible() {
            upper = (mid, outcome);
        } else {
            lower = (mid, outcome);
        }
    }
    Ok(Some(Threshold {
        lower: lower.0,
        upper: upper.0,
        lower_outcome: lower.1,
        upper_outcome: upper.1,
    }))
}

/// Simultaneous near-invariance of the five sets under `a^k`, `b^k`
/// (`k < count`) for measures on the ball of `radius`.
pub fn simultaneous_invariance(count: usize, delta: &Q, radius: usize, ball_cap: usize) -> Result<FeasibilityOutcome, F2Error> {
    InvarianceInstance::new(count, radius, ball_cap)?.solve(delta)
}

/// Elements of a ball as words, for callers holding an [`ElementSet`].
pub fn words_of(set: &ElementSet) -> Vec<Word> {
    set.iter().filter_map(GroupElement::as_word).cloned().collect()
}
