//! Group descriptors, canonical element arithmetic, and Cayley balls.
//!
//! Supported groups are free groups over named generators, free abelian
//! groups `Z^d`, cyclic groups, and finite groups given by a multiplication
//! table. Every element has a unique canonical form, so structural equality
//! is group equality.
//!
//! Word syntax: a lowercase letter is a generator, the matching uppercase
//! letter its inverse, and `"e"` is the identity (`"aBa"` is `a b^-1 a`).

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Order up to which finite tables are checked for associativity.
pub const ASSOCIATIVITY_CHECK_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("invalid group descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("element {0} does not belong to this group")]
    ForeignElement(String),
    #[error("cannot parse element {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("resource limit exceeded: {what} would exceed the cap of {cap}")]
    ResourceLimit { what: String, cap: usize },
}

/// How a group is specified. JSON forms:
/// `{"kind":"free","generators":["a","b"]}`, `{"kind":"free_abelian","rank":2}`,
/// `{"kind":"cyclic","order":5}`, `{"kind":"finite_table","table":[[0,1],[1,0]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupDescriptor {
    Free {
        generators: Vec<String>,
    },
    FreeAbelian {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
    Cyclic {
        order: u32,
    },
    FiniteTable {
        table: Vec<Vec<u32>>,
        /// Generating set as element indices; defaults to every non-identity element.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<u32>>,
    },
}

impl GroupDescriptor {
    pub fn free(names: &[&str]) -> Self {
        GroupDescriptor::Free {
            generators: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn free_abelian(rank: usize) -> Self {
        GroupDescriptor::FreeAbelian {
            rank,
            generators: None,
        }
    }

    pub fn integers() -> Self {
        Self::free_abelian(1)
    }

    pub fn cyclic(order: u32) -> Self {
        GroupDescriptor::Cyclic { order }
    }
}

/// A freely reduced word, stored as ASCII letters (uppercase = inverse).
///
/// Ordering is shortlex with `x < X < y < Y` for generators `x < y`, which is
/// the canonical element order because free-group generator names are
/// required to be increasing.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

fn letter_key(c: u8) -> (u8, bool) {
    (c.to_ascii_lowercase(), c.is_ascii_uppercase())
}

fn invert_letter(c: u8) -> u8 {
    if c.is_ascii_uppercase() {
        c.to_ascii_lowercase()
    } else {
        c.to_ascii_uppercase()
    }
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Freely reduces the letters.
    pub fn reduce<I: IntoIterator<Item = u8>>(letters: I) -> Self {
        let mut out: Vec<u8> = Vec::new();
        for c in letters {
            if out.last().is_some_and(|&l| l == invert_letter(c)) {
                out.pop();
            } else {
                out.push(c);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != invert_letter(w[1]))
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut k = 0;
        while k < self.0.len()
            && k < other.0.len()
            && self.0[self.0.len() - 1 - k] == invert_letter(other.0[k])
        {
            k += 1;
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len() - 2 * k);
        out.extend_from_slice(&self.0[..self.0.len() - k]);
        out.extend_from_slice(&other.0[k..]);
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&c| invert_letter(c)).collect())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            self.0
                .iter()
                .map(|&c| letter_key(c))
                .cmp(other.0.iter().map(|&c| letter_key(c)))
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("e")
        } else {
            f.write_str(std::str::from_utf8(&self.0).expect("ascii letters"))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "e" {
            return Ok(Word::identity());
        }
        if !s.bytes().all(|c| c.is_ascii_alphabetic()) {
            return Err(serde::de::Error::custom(format!("not a word: {s:?}")));
        }
        let w = Word(s.into_bytes());
        if !w.is_reduced() {
            return Err(serde::de::Error::custom(format!("word {w} is not reduced")));
        }
        Ok(w)
    }
}

/// Canonical form of a group element. Serialized untagged: words as strings,
/// exponent vectors as integer arrays, table indices as integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupElement {
    Word(Word),
    Vector(Vec<i64>),
    Index(u32),
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Word(w) => write!(f, "{w}"),
            GroupElement::Vector(v) if v.len() == 1 => write!(f, "{}", v[0]),
            GroupElement::Vector(v) => write!(f, "{v:?}"),
            GroupElement::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl GroupElement {
    pub fn as_word(&self) -> Option<&Word> {
        match self {
            GroupElement::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn int(k: i64) -> Self {
        GroupElement::Vector(vec![k])
    }
}

/// A deduplicated set of elements in canonical order, with O(1) lookup of
/// each element's position (the bit index used by subset masks).
#[derive(Clone, Default, PartialEq, Eq)]
pub struct ElementSet {
    elems: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.elems).finish()
    }
}

impl FromIterator<GroupElement> for ElementSet {
    fn from_iter<I: IntoIterator<Item = GroupElement>>(iter: I) -> Self {
        let mut elems: Vec<GroupElement> = iter.into_iter().collect();
        elems.sort();
        elems.dedup();
        let index = elems.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        ElementSet { elems, index }
    }
}

impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.elems.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ElementSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Vec::<GroupElement>::deserialize(d)?.into_iter().collect())
    }
}

impl ElementSet {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elems.iter()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> &GroupElement {
        &self.elems[i]
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.elems.iter().all(|g| other.contains(g))
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        self.iter().chain(other.iter()).cloned().collect()
    }

    /// Elements whose bit is set in `mask` (bit `i` = `i`-th element).
    pub fn subset_from_mask(&self, mask: u64) -> ElementSet {
        self.iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, g)| g.clone())
            .collect()
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = &'a GroupElement;
    type IntoIter = std::slice::Iter<'a, GroupElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Free {
        letters: Vec<u8>,
    },
    FreeAbelian {
        rank: usize,
        letters: Vec<u8>,
    },
    Cyclic {
        order: u32,
    },
    Table {
        table: Vec<Vec<u32>>,
        identity: u32,
        inverse: Vec<u32>,
        gens: Vec<u32>,
        letters: Vec<u8>,
        distance: Vec<u32>,
        associativity_verified: bool,
    },
}

/// A validated group together with its generating set `S`.
#[derive(Debug, Clone)]
pub struct Group {
    descriptor: GroupDescriptor,
    repr: Repr,
}

fn default_letters(count: usize) -> Vec<u8> {
    (b'a'..=b'z').filter(|&c| c != b'e').take(count).collect()
}

fn parse_names(names: &[String], require_increasing: bool) -> Result<Vec<u8>, GroupError> {
    let bad = |m: String| GroupError::InvalidDescriptor(m);
    let mut letters = Vec::with_capacity(names.len());
    for name in names {
        let b = name.as_bytes();
        if b.len() != 1 || !b[0].is_ascii_lowercase() || b[0] == b'e' {
            return Err(bad(format!(
                "generator name {name:?} must be a single lowercase letter other than 'e'"
            )));
        }
        letters.push(b[0]);
    }
    let mut seen = HashSet::new();
    if !letters.iter().all(|c| seen.insert(*c)) {
        return Err(bad("generator names must be distinct".into()));
    }
    if require_increasing && letters.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(
            "free generator names must be listed in increasing alphabetical order".into(),
        ));
    }
    Ok(letters)
}

fn validate_table(
    table: &[Vec<u32>],
) -> Result<(u32, Vec<u32>, bool), GroupError> {
    let bad = |m: String| GroupError::InvalidDescriptor(m);
    let n = table.len();
    if n == 0 {
        return Err(bad("multiplication table is empty".into()));
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(bad(format!("row {i} has length {}, expected {n}", row.len())));
        }
        let mut seen = vec![false; n];
        for &x in row {
            if x as usize >= n || std::mem::replace(&mut seen[x as usize], true) {
                return Err(bad(format!("row {i} is not a permutation")));
            }
        }
    }
    for j in 0..n {
        let mut seen = vec![false; n];
        for row in table {
            if std::mem::replace(&mut seen[row[j] as usize], true) {
                return Err(bad(format!("column {j} is not a permutation")));
            }
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|x| table[e][x] as usize == x && table[x][e] as usize == x))
        .ok_or_else(|| bad("table has no identity element".into()))? as u32;
    let verify = n <= ASSOCIATIVITY_CHECK_LIMIT;
    if verify {
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b] as usize;
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c] as usize] {
                        return Err(bad(format!("table is not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
    }
    let inverse = (0..n)
        .map(|a| {
            (0..n)
                .find(|&b| table[a][b] == identity)
                .expect("rows are permutations") as u32
        })
        .collect();
    Ok((identity, inverse, verify))
}

impl Group {
    pub fn new(descriptor: GroupDescriptor) -> Result<Self, GroupError> {
        let repr = match &descriptor {
            GroupDescriptor::Free { generators } => {
                if generators.is_empty() {
                    return Err(GroupError::InvalidDescriptor(
                        "free group needs rank >= 1".into(),
                    ));
                }
                Repr::Free {
                    letters: parse_names(generators, true)?,
                }
            }
            GroupDescriptor::FreeAbelian { rank, generators } => {
                if *rank == 0 {
                    return Err(GroupError::InvalidDescriptor(
                        "free abelian group needs rank >= 1".into(),
                    ));
                }
                let letters = match generators {
                    Some(names) => {
                        if names.len() != *rank {
                            return Err(GroupError::InvalidDescriptor(format!(
                                "{} generator names given for rank {rank}",
                                names.len()
                            )));
                        }
                        parse_names(names, false)?
                    }
                    None => default_letters(*rank),
                };
                Repr::FreeAbelian {
                    rank: *rank,
                    letters,
                }
            }
            GroupDescriptor::Cyclic { order } => {
                if *order == 0 {
                    return Err(GroupError::InvalidDescriptor(
                        "cyclic group needs order >= 1".into(),
                    ));
                }
                Repr::Cyclic { order: *order }
            }
            GroupDescriptor::FiniteTable { table, generators } => {
                let (identity, inverse, associativity_verified) = validate_table(table)?;
                let n = table.len() as u32;
                let gens: Vec<u32> = match generators {
                    Some(g) => {
                        if let Some(bad) = g.iter().find(|&&x| x >= n) {
                            return Err(GroupError::InvalidDescriptor(format!(
                                "generator index {bad} out of range"
                            )));
                        }
                        let mut seen = HashSet::new();
                        if !g.iter().all(|x| seen.insert(*x)) {
                            return Err(GroupError::InvalidDescriptor(
                                "generators must be distinct".into(),
                            ));
                        }
                        g.clone()
                    }
                    None => (0..n).filter(|&x| x != identity).collect(),
                };
                let distance = table_distances(table, identity, &inverse, &gens);
                if distance.contains(&u32::MAX) {
                    return Err(GroupError::InvalidDescriptor(
                        "generators do not generate the table group".into(),
                    ));
                }
                Repr::Table {
                    letters: default_letters(gens.len()),
                    table: table.clone(),
                    identity,
                    inverse,
                    gens,
                    distance,
                    associativity_verified,
                }
            }
        };
        Ok(Group { descriptor, repr })
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    /// False only for finite tables too large to have been checked.
    pub fn associativity_verified(&self) -> bool {
        match &self.repr {
            Repr::Table {
                associativity_verified,
                ..
            } => *associativity_verified,
            _ => true,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.repr, Repr::Cyclic { .. } | Repr::Table { .. })
    }

    pub fn is_free(&self) -> bool {
        matches!(self.repr, Repr::Free { .. })
    }

    pub fn is_abelian_free(&self) -> bool {
        matches!(self.repr, Repr::FreeAbelian { .. })
    }

    /// Order of a finite group.
    pub fn order(&self) -> Option<usize> {
        match &self.repr {
            Repr::Cyclic { order } => Some(*order as usize),
            Repr::Table { table, .. } => Some(table.len()),
            _ => None,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match &self.repr {
            Repr::Free { .. } => GroupElement::Word(Word::identity()),
            Repr::FreeAbelian { rank, .. } => GroupElement::Vector(vec![0; *rank]),
            Repr::Cyclic { .. } => GroupElement::Index(0),
            Repr::Table { identity, .. } => GroupElement::Index(*identity),
        }
    }

    /// The generating set `S` (not closed under inversion).
    pub fn generators(&self) -> Vec<GroupElement> {
        match &self.repr {
            Repr::Free { letters } => letters
                .iter()
                .map(|&c| GroupElement::Word(Word(vec![c])))
                .collect(),
            Repr::FreeAbelian { rank, .. } => (0..*rank)
                .map(|i| {
                    let mut v = vec![0; *rank];
                    v[i] = 1;
                    GroupElement::Vector(v)
                })
                .collect(),
            Repr::Cyclic { order } => {
                if *order == 1 {
                    Vec::new()
                } else {
                    vec![GroupElement::Index(1)]
                }
            }
            Repr::Table { gens, .. } => gens.iter().map(|&g| GroupElement::Index(g)).collect(),
        }
    }

    pub fn generator_set(&self) -> ElementSet {
        self.generators().into_iter().collect()
    }

    /// `S ∪ S⁻¹`, the step set of the word metric.
    pub fn symmetric_generators(&self) -> Vec<GroupElement> {
        let gens = self.generators();
        let mut all: Vec<GroupElement> = gens
            .iter()
            .cloned()
            .chain(gens.iter().map(|g| self.inverse(g)))
            .collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (&self.repr, g) {
            (Repr::Free { letters }, GroupElement::Word(w)) => {
                w.is_reduced()
                    && w.letters()
                        .iter()
                        .all(|c| letters.contains(&c.to_ascii_lowercase()))
            }
            (Repr::FreeAbelian { rank, .. }, GroupElement::Vector(v)) => v.len() == *rank,
            (Repr::Cyclic { order }, GroupElement::Index(i)) => i < order,
            (Repr::Table { table, .. }, GroupElement::Index(i)) => (*i as usize) < table.len(),
            _ => false,
        }
    }

    fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(GroupError::ForeignElement(format!("{g:?}")))
        }
    }

    /// Checked product `g·h`.
    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul(g, h))
    }

    /// Product of two elements already known to belong to the group.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (&self.repr, g, h) {
            (Repr::Free { .. }, GroupElement::Word(a), GroupElement::Word(b)) => {
                GroupElement::Word(a.mul(b))
            }
            (Repr::FreeAbelian { .. }, GroupElement::Vector(a), GroupElement::Vector(b)) => {
                GroupElement::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Repr::Cyclic { order }, GroupElement::Index(a), GroupElement::Index(b)) => {
                GroupElement::Index(((*a as u64 + *b as u64) % *order as u64) as u32)
            }
            (Repr::Table { table, .. }, GroupElement::Index(a), GroupElement::Index(b)) => {
                GroupElement::Index(table[*a as usize][*b as usize])
            }
            _ => panic!("element kind does not match group: {g:?} * {h:?}"),
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        match (&self.repr, g) {
            (Repr::Free { .. }, GroupElement::Word(w)) => GroupElement::Word(w.inverse()),
            (Repr::FreeAbelian { .. }, GroupElement::Vector(v)) => {
                GroupElement::Vector(v.iter().map(|x| -x).collect())
            }
            (Repr::Cyclic { order }, GroupElement::Index(a)) => {
                GroupElement::Index((order - a) % order)
            }
            (Repr::Table { inverse, .. }, GroupElement::Index(a)) => {
                GroupElement::Index(inverse[*a as usize])
            }
            _ => panic!("element kind does not match group: {g:?}"),
        }
    }

    /// `g^k` for any integer `k`.
    pub fn pow(&self, g: &GroupElement, k: i64) -> GroupElement {
        let base = if k < 0 { self.inverse(g) } else { g.clone() };
        (0..k.unsigned_abs()).fold(self.identity(), |acc, _| self.mul(&acc, &base))
    }

    /// Distance from the identity in the word metric of `S ∪ S⁻¹`.
    pub fn word_length(&self, g: &GroupElement) -> u64 {
        match (&self.repr, g) {
            (Repr::Free { .. }, GroupElement::Word(w)) => w.len() as u64,
            (Repr::FreeAbelian { .. }, GroupElement::Vector(v)) => {
                v.iter().map(|x| x.unsigned_abs()).sum()
            }
            (Repr::Cyclic { order }, GroupElement::Index(a)) => {
                if *order == 1 {
                    0
                } else {
                    (*a).min(order - a) as u64
                }
            }
            (Repr::Table { distance, .. }, GroupElement::Index(a)) => distance[*a as usize] as u64,
            _ => panic!("element kind does not match group: {g:?}"),
        }
    }

    /// Left translate `g·E`.
    pub fn translate_set(&self, g: &GroupElement, set: &ElementSet) -> ElementSet {
        set.iter().map(|x| self.mul(g, x)).collect()
    }

    /// Right translate `E·g`.
    pub fn right_translate_set(&self, set: &ElementSet, g: &GroupElement) -> ElementSet {
        set.iter().map(|x| self.mul(x, g)).collect()
    }

    /// `A·B = {ab : a ∈ A, b ∈ B}`.
    pub fn product_set(&self, a: &ElementSet, b: &ElementSet) -> ElementSet {
        a.iter()
            .flat_map(|x| b.iter().map(move |y| (x, y)))
            .map(|(x, y)| self.mul(x, y))
            .collect()
    }

    /// The ball `B_n` of the word metric on `S ∪ S⁻¹`, by breadth-first
    /// closure under left multiplication. Errors once more than `cap`
    /// elements would be produced.
    pub fn ball(&self, n: usize, cap: usize) -> Result<ElementSet, GroupError> {
        let steps = self.symmetric_generators();
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let e = self.identity();
        seen.insert(e.clone());
        let mut frontier = vec![e];
        for _ in 0..n {
            let mut next = Vec::new();
            for x in &frontier {
                for s in &steps {
                    let y = self.mul(s, x);
                    if seen.insert(y.clone()) {
                        next.push(y);
                        if seen.len() > cap {
                            return Err(GroupError::ResourceLimit {
                                what: format!("ball of radius {n}"),
                                cap,
                            });
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(seen.into_iter().collect())
    }

    /// Parses an element in word syntax, or as integers where the kind
    /// allows it (`"3"`, `"-1,2"`, `"(1,2)"`).
    pub fn parse_element(&self, input: &str) -> Result<GroupElement, GroupError> {
        let s = input.trim();
        let err = |reason: &str| GroupError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        if s == "e" {
            return Ok(self.identity());
        }
        let looks_numeric = !s.is_empty()
            && s.chars().all(|c| c.is_ascii_digit() || "-+,() ".contains(c));
        if looks_numeric {
            let ints: Result<Vec<i64>, _> = s
                .trim_matches(|c| c == '(' || c == ')')
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect();
            let ints = ints.map_err(|_| err("malformed integer list"))?;
            return match &self.repr {
                Repr::FreeAbelian { rank, .. } if ints.len() == *rank => {
                    Ok(GroupElement::Vector(ints))
                }
                Repr::FreeAbelian { rank, .. } => {
                    Err(err(&format!("expected {rank} coordinates")))
                }
                Repr::Cyclic { order } if ints.len() == 1 => Ok(GroupElement::Index(
                    ints[0].rem_euclid(*order as i64) as u32,
                )),
                Repr::Table { table, .. } if ints.len() == 1 => {
                    let i = ints[0];
                    if i < 0 || i as usize >= table.len() {
                        Err(err("table index out of range"))
                    } else {
                        Ok(GroupElement::Index(i as u32))
                    }
                }
                _ => Err(err("integer syntax not available for this group")),
            };
        }
        if s.is_empty() || !s.bytes().all(|c| c.is_ascii_alphabetic()) {
            return Err(err("expected letters, integers, or \"e\""));
        }
        let letters = match &self.repr {
            Repr::Free { letters }
            | Repr::FreeAbelian { letters, .. }
            | Repr::Table { letters, .. } => letters.clone(),
            Repr::Cyclic { .. } => vec![b'a'],
        };
        let gens = self.generators();
        let mut acc = self.identity();
        for c in s.bytes() {
            let pos = letters
                .iter()
                .position(|&l| l == c.to_ascii_lowercase())
                .ok_or_else(|| err(&format!("unknown generator {:?}", c as char)))?;
            let g = &gens[pos];
            let step = if c.is_ascii_uppercase() { self.inverse(g) } else { g.clone() };
            acc = self.mul(&acc, &step);
        }
        Ok(acc)
    }

    /// Parses a comma-free list such as `"e a A b B"` or a JSON-like list of
    /// element strings separated by whitespace or `;`.
    pub fn parse_elements<'a, I: IntoIterator<Item = &'a str>>(
        &self,
        items: I,
    ) -> Result<ElementSet, GroupError> {
        items.into_iter().map(|s| self.parse_element(s)).collect()
    }

    /// Human-readable form accepted back by [`Group::parse_element`].
    pub fn format_element(&self, g: &GroupElement) -> String {
        match g {
            GroupElement::Word(w) => w.to_string(),
            GroupElement::Vector(v) if v.len() == 1 => v[0].to_string(),
            GroupElement::Vector(v) => format!(
                "({})",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            GroupElement::Index(i) => i.to_string(),
        }
    }

    /// Upper bound `(2|S|+1)^n` on the size of `B_n`, saturating.
    pub fn ball_size_bound(&self, n: u32) -> u128 {
        let base = 2 * self.generators().len() as u128 + 1;
        (0..n).fold(1u128, |acc, _| acc.saturating_mul(base))
    }
}

fn table_distances(table: &[Vec<u32>], identity: u32, inverse: &[u32], gens: &[u32]) -> Vec<u32> {
    let n = table.len();
    let mut dist = vec![u32::MAX; n];
    dist[identity as usize] = 0;
    let steps: Vec<u32> = gens.iter().flat_map(|&g| [g, inverse[g as usize]]).collect();
    let mut queue = std::collections::VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for &s in &steps {
            let y = table[s as usize][x as usize];
            if dist[y as usize] == u32::MAX {
                dist[y as usize] = dist[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}
