//! Named subset constructions, evaluated exactly on group elements.
//!
//! JSON forms (tag `kind`):
//! `{"kind":"first_letter","letters":["a","A"]}`,
//! `{"kind":"h_above","k":0}` (optionally `"weights":[1,-1]`),
//! `{"kind":"progression","modulus":2,"residues":[0]}` (optionally `"coord":1`),
//! `{"kind":"union","of":[…]}`, `{"kind":"intersection","of":[…]}`,
//! `{"kind":"complement","of":{…}}`, `{"kind":"explicit","elements":["e","ab"]}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::group::{ElementSet, Group, GroupDescriptor, GroupElement, GroupError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetError {
    #[error("{kind} sets are not defined for this group: {reason}")]
    Unsupported { kind: &'static str, reason: String },
    #[error("invalid set expression: {0}")]
    Invalid(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetExpr {
    /// Free groups: reduced words whose first letter is listed.
    FirstLetter { letters: Vec<String> },
    /// `{g : h(g) > k}` for the homomorphism `h` to `Z` given by one weight
    /// per generator. Defaults: `(1, -1, 0, …)` on free groups, the first
    /// coordinate on `Z^d`.
    HAbove {
        k: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<i64>>,
    },
    /// `Z^d` or cyclic groups: elements whose `coord`-th coordinate is
    /// congruent to a listed residue.
    Progression {
        modulus: i64,
        residues: Vec<i64>,
        #[serde(default)]
        coord: usize,
    },
    Union { of: Vec<SetExpr> },
    Intersection { of: Vec<SetExpr> },
    Complement { of: Box<SetExpr> },
    Explicit { elements: Vec<String> },
}

impl SetExpr {
    pub fn complement(self) -> Self {
        SetExpr::Complement { of: Box::new(self) }
    }

    pub fn union(parts: Vec<SetExpr>) -> Self {
        SetExpr::Union { of: parts }
    }

    pub fn intersection(parts: Vec<SetExpr>) -> Self {
        SetExpr::Intersection { of: parts }
    }

    pub fn first_letter(letters: &[&str]) -> Self {
        SetExpr::FirstLetter {
            letters: letters.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn h_above(k: i64) -> Self {
        SetExpr::HAbove { k, weights: None }
    }

    pub fn progression(modulus: i64, residues: &[i64]) -> Self {
        SetExpr::Progression {
            modulus,
            residues: residues.to_vec(),
            coord: 0,
        }
    }

    /// Resolves names and defaults against `group`.
    pub fn compile(&self, group: &Group) -> Result<CompiledSet, SetError> {
        Ok(match self {
            SetExpr::FirstLetter { letters } => {
                if !group.is_free() {
                    return Err(SetError::Unsupported {
                        kind: "first_letter",
                        reason: "only free groups have first letters".into(),
                    });
                }
                let mut out = Vec::new();
                for name in letters {
                    let element = group.parse_element(name)?;
                    match element.as_word().map(|w| w.letters()) {
                        Some([c]) => out.push(*c),
                        _ => return Err(SetError::Invalid(format!("{name:?} is not a single letter"))),
                    }
                }
                out.sort_unstable();
                out.dedup();
                CompiledSet::FirstLetter(out)
            }
            SetExpr::HAbove { k, weights } => {
                let rank = group.generators().len();
                let weights = match weights {
                    Some(w) if w.len() == rank => w.clone(),
                    Some(w) => {
                        return Err(SetError::Invalid(format!(
                            "{} weights given for {rank} generators",
                            w.len()
                        )))
                    }
                    None if group.is_free() => {
                        (0..rank).map(|i| [1, -1].get(i).copied().unwrap_or(0)).collect()
                    }
                    None if group.is_abelian_free() => {
                        (0..rank).map(|i| i64::from(i == 0)).collect()
                    }
                    None => Vec::new(),
                };
                if !(group.is_free() || group.is_abelian_free()) {
                    return Err(SetError::Unsupported {
                        kind: "h_above",
                        reason: "finite groups have no nonzero homomorphism to Z".into(),
                    });
                }
                let mut letter_weight = [0i64; 128];
                for (g, w) in group.generators().iter().zip(&weights) {
                    if let Some(word) = g.as_word() {
                        let c = word.letters()[0];
                        letter_weight[c as usize] = *w;
                        letter_weight[c.to_ascii_uppercase() as usize] = -*w;
                    }
                }
                CompiledSet::HAbove {
                    k: *k,
                    weights,
                    letter_weight: Box::new(letter_weight),
                }
            }
            SetExpr::Progression {
                modulus,
                residues,
                coord,
            } => {
                if *modulus < 1 {
                    return Err(SetError::Invalid("modulus must be positive".into()));
                }
                let dims = match group.descriptor() {
                    GroupDescriptor::FreeAbelian { rank, .. } => *rank,
                    GroupDescriptor::Cyclic { .. } => 1,
                    _ => {
                        return Err(SetError::Unsupported {
                            kind: "progression",
                            reason: "needs integer coordinates".into(),
                        })
                    }
                };
                if *coord >= dims {
                    return Err(SetError::Invalid(format!("coordinate {coord} out of range")));
                }
                let mut res: Vec<i64> = residues.iter().map(|r| r.rem_euclid(*modulus)).collect();
                res.sort_unstable();
                res.dedup();
                CompiledSet::Progression {
                    modulus: *modulus,
                    residues: res,
                    coord: *coord,
                }
            }
            SetExpr::Union { of } => {
                CompiledSet::Union(of.iter().map(|e| e.compile(group)).collect::<Result<_, _>>()?)
            }
            SetExpr::Intersection { of } => CompiledSet::Intersection(
                of.iter().map(|e| e.compile(group)).collect::<Result<_, _>>()?,
            ),
            SetExpr::Complement { of } => CompiledSet::Complement(Box::new(of.compile(group)?)),
            SetExpr::Explicit { elements } => {
                CompiledSet::Explicit(group.parse_elements(elements.iter().map(String::as_str))?)
            }
        })
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, parts: &[SetExpr], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        };
        match self {
            SetExpr::FirstLetter { letters } => write!(f, "first[{}]", letters.join(",")),
            SetExpr::HAbove { k, weights: None } => write!(f, "h>{k}"),
            SetExpr::HAbove { k, weights: Some(w) } => write!(f, "h{w:?}>{k}"),
            SetExpr::Progression {
                modulus,
                residues,
                coord,
            } => write!(f, "x{coord}≡{residues:?} mod {modulus}"),
            SetExpr::Union { of } => join(f, of, " ∪ "),
            SetExpr::Intersection { of } => join(f, of, " ∩ "),
            SetExpr::Complement { of } => write!(f, "¬{of}"),
            SetExpr::Explicit { elements } => write!(f, "{{{}}}", elements.join(",")),
        }
    }
}

/// A set expression bound to a particular group; membership is total.
#[derive(Debug, Clone)]
pub enum CompiledSet {
    FirstLetter(Vec<u8>),
    HAbove {
        k: i64,
        weights: Vec<i64>,
        letter_weight: Box<[i64; 128]>,
    },
    Progression {
        modulus: i64,
        residues: Vec<i64>,
        coord: usize,
    },
    Union(Vec<CompiledSet>),
    Intersection(Vec<CompiledSet>),
    Complement(Box<CompiledSet>),
    Explicit(ElementSet),
}

impl CompiledSet {
    pub fn contains(&self, g: &GroupElement) -> bool {
        match self {
            CompiledSet::FirstLetter(letters) => g
                .as_word()
                .and_then(|w| w.first())
                .is_some_and(|c| letters.contains(&c)),
            CompiledSet::HAbove {
                k,
                weights,
                letter_weight,
            } => {
                let value: i64 = match g {
                    GroupElement::Word(w) => w.letters().iter().map(|&c| letter_weight[c as usize]).sum(),
                    GroupElement::Vector(v) => v.iter().zip(weights).map(|(x, w)| x * w).sum(),
                    GroupElement::Index(_) => return false,
                };
                value > *k
            }
            CompiledSet::Progression {
                modulus,
                residues,
                coord,
            } => {
                let x = match g {
                    GroupElement::Vector(v) => v[*coord],
                    GroupElement::Index(i) => *i as i64,
                    GroupElement::Word(_) => return false,
                };
                residues.binary_search(&x.rem_euclid(*modulus)).is_ok()
            }
            CompiledSet::Union(parts) => parts.iter().any(|p| p.contains(g)),
            CompiledSet::Intersection(parts) => parts.iter().all(|p| p.contains(g)),
            CompiledSet::Complement(inner) => !inner.contains(g),
            CompiledSet::Explicit(set) => set.contains(g),
        }
    }

    /// `E ∩ domain`.
    pub fn restrict(&self, domain: &ElementSet) -> ElementSet {
        domain.iter().filter(|g| self.contains(g)).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Group {
        Group::new(GroupDescriptor::free(&["a", "b"])).unwrap()
    }

    #[test]
    fn first_letter_sets() {
        let g = f2();
        let set = SetExpr::first_letter(&["a", "A"]).compile(&g).unwrap();
        assert!(set.contains(&g.parse_element("Ab").unwrap()));
        assert!(!set.contains(&g.parse_element("ba").unwrap()));
        assert!(!set.contains(&g.identity()));
        let z = Group::new(GroupDescriptor::integers()).unwrap();
        assert!(SetExpr::first_letter(&["a"]).compile(&z).is_err());
    }

    #[test]
    fn h_levels() {
        let g = f2();
        let z0 = SetExpr::h_above(0).compile(&g).unwrap();
        assert!(z0.contains(&g.parse_element("aB").unwrap()));
        assert!(!z0.contains(&g.parse_element("ab").unwrap()));
        let z = Group::new(GroupDescriptor::integers()).unwrap();
        let half = SetExpr::h_above(2).compile(&z).unwrap();
        assert!(half.contains(&GroupElement::int(3)));
        assert!(!half.contains(&GroupElement::int(2)));
        let c5 = Group::new(GroupDescriptor::cyclic(5)).unwrap();
        assert!(SetExpr::h_above(0).compile(&c5).is_err());
    }

    #[test]
    fn progressions_and_combinators() {
        let z = Group::new(GroupDescriptor::integers()).unwrap();
        let evens = SetExpr::progression(2, &[0]);
        let odd_or_big = SetExpr::union(vec![evens.clone().complement(), SetExpr::h_above(10)]);
        let compiled = odd_or_big.compile(&z).unwrap();
        assert!(compiled.contains(&GroupElement::int(-3)));
        assert!(compiled.contains(&GroupElement::int(12)));
        assert!(!compiled.contains(&GroupElement::int(4)));
        let ball = z.ball(3, 100).unwrap();
        let restricted = evens.compile(&z).unwrap().restrict(&ball);
        assert_eq!(restricted.len(), 3);
        let c6 = Group::new(GroupDescriptor::cyclic(6)).unwrap();
        assert!(SetExpr::progression(3, &[1]).compile(&c6).unwrap().contains(&GroupElement::Index(4)));
    }

    #[test]
    fn json_forms() {
        let e: SetExpr = serde_json::from_str(
            r#"{"kind":"union","of":[{"kind":"first_letter","letters":["a","A"]},{"kind":"complement","of":{"kind":"h_above","k":0}}]}"#,
        )
        .unwrap();
        assert_eq!(
            e,
            SetExpr::union(vec![SetExpr::first_letter(&["a", "A"]), SetExpr::h_above(0).complement()])
        );
        let x: SetExpr = serde_json::from_str(r#"{"kind":"explicit","elements":["e","ab"]}"#).unwrap();
        assert_eq!(x.compile(&f2()).unwrap().restrict(&f2().ball(2, 100).unwrap()).len(), 2);
        assert!(serde_json::from_str::<SetExpr>(r#"{"kind":"h_above","k":0,"bogus":1}"#).is_err());
    }
}
