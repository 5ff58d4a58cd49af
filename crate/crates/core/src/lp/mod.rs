//! Exact rational linear programming.
//!
//! Systems are solved by a two-phase dense simplex over [`Q`] with Bland's
//! rule, so every run terminates and identical inputs give identical
//! certificates. Every answer carries a certificate that
//! [`verify_certificate`] checks with plain arithmetic, independent of the
//! pivoting code.
//!
//! Sign conventions shared by all certificates: each row is first put in
//! `<=` form (a `>=` row is negated, an `=` row is used as-is). A Farkas
//! vector `y` has `y_i >= 0` on inequality rows and any sign on equality
//! rows; `c = sum y_i a_i` must vanish on free variables and be `>= 0` on
//! nonnegative ones, while `d = sum y_i b_i < 0`. Together these give the
//! contradiction `0 <= c.x <= d < 0`.

mod certificate;
mod simplex;

pub use certificate::{verify_certificate, Certifies};
pub use simplex::{minimize, optimize, solve_feasibility};

use serde::{Deserialize, Serialize};

use crate::rational::{serde_q, serde_q_vec, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "serde_q_vec")]
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    #[serde(with = "serde_q")]
    pub rhs: Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    #[serde(with = "serde_q_vec")]
    pub coeffs: Vec<Q>,
    pub direction: Direction,
}

/// `num_vars` variables, linear rows, optional objective, and a per-variable
/// nonnegativity flag (unflagged variables are free).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    pub nonnegative: Vec<bool>,
}

impl LinearSystem {
    /// A system with `num_vars` free variables and no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            constraints: Vec::new(),
            objective: None,
            nonnegative: vec![false; num_vars],
        }
    }

    pub fn with_nonnegative(num_vars: usize) -> Self {
        Self {
            nonnegative: vec![true; num_vars],
            ..Self::new(num_vars)
        }
    }

    pub fn set_nonnegative(&mut self, var: usize, flag: bool) {
        self.nonnegative[var] = flag;
    }

    pub fn add(&mut self, coeffs: Vec<Q>, relation: Relation, rhs: Q) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds a row given as `(variable, coefficient)` pairs; repeated
    /// variables accumulate.
    pub fn add_sparse(&mut self, terms: &[(usize, Q)], relation: Relation, rhs: Q) {
        let mut coeffs = vec![Q::default(); self.num_vars];
        for (var, c) in terms {
            coeffs[*var] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn set_objective(&mut self, coeffs: Vec<Q>, direction: Direction) {
        self.objective = Some(Objective { coeffs, direction });
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.num_vars == 0 {
            return Err(LpError::Malformed("system has no variables".into()));
        }
        if self.nonnegative.len() != self.num_vars {
            return Err(LpError::Malformed(format!(
                "nonnegativity flags have length {}, expected {}",
                self.nonnegative.len(),
                self.num_vars
            )));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != self.num_vars {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {}",
                    row.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        if let Some(obj) = &self.objective {
            if obj.coeffs.len() != self.num_vars {
                return Err(LpError::Malformed(format!(
                    "objective has {} coefficients, expected {}",
                    obj.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }
}

/// Result of a pure feasibility solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum FeasibilityOutcome {
    Feasible {
        #[serde(with = "serde_q_vec")]
        point: Vec<Q>,
    },
    Infeasible {
        #[serde(with = "serde_q_vec")]
        farkas: Vec<Q>,
    },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }

    pub fn point(&self) -> Option<&[Q]> {
        match self {
            FeasibilityOutcome::Feasible { point } => Some(point),
            FeasibilityOutcome::Infeasible { .. } => None,
        }
    }

    pub fn farkas(&self) -> Option<&[Q]> {
        match self {
            FeasibilityOutcome::Feasible { .. } => None,
            FeasibilityOutcome::Infeasible { farkas } => Some(farkas),
        }
    }
}

/// Optimal value with attaining point and dual multipliers (same sign
/// convention as Farkas vectors) proving the bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Optimum {
    #[serde(with = "serde_q")]
    pub value: Q,
    #[serde(with = "serde_q_vec")]
    pub point: Vec<Q>,
    #[serde(with = "serde_q_vec")]
    pub dual: Vec<Q>,
}

/// A feasible point plus a recession direction improving the objective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnboundedRay {
    #[serde(with = "serde_q_vec")]
    pub point: Vec<Q>,
    #[serde(with = "serde_q_vec")]
    pub ray: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("malformed linear system: {0}")]
    Malformed(String),
    #[error("linear system has no objective")]
    NoObjective,
    #[error("linear system is infeasible")]
    Infeasible { farkas: Vec<Q> },
    #[error("objective is unbounded")]
    Unbounded(UnboundedRay),
    #[error("pivot limit of {0} exceeded")]
    PivotLimit(u128),
    #[error("certificate shape mismatch: {0}")]
    Shape(String),
}

#[cfg(test)]
mod tests;
