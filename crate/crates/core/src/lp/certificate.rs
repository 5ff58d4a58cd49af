//! Solver-independent certificate checks. Nothing here pivots.

use num_traits::{Signed, Zero};

use super::{Direction, FeasibilityOutcome, LinearSystem, LpError, Optimum, Relation, UnboundedRay};
use crate::rational::Q;

/// Anything whose correctness for a given system can be checked exactly.
pub trait Certifies {
    fn certifies(&self, sys: &LinearSystem) -> Result<bool, LpError>;
}

/// True iff `cert` is valid for `sys`; shape mismatches are errors.
pub fn verify_certificate<C: Certifies + ?Sized>(sys: &LinearSystem, cert: &C) -> Result<bool, LpError> {
    sys.validate()?;
    cert.certifies(sys)
}

fn dot(a: &[Q], x: &[Q]) -> Q {
    a.iter()
        .zip(x)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, v)| c * v)
        .sum()
}

fn expect_len(what: &str, got: usize, want: usize) -> Result<(), LpError> {
    if got == want {
        Ok(())
    } else {
        Err(LpError::Shape(format!("{what} has length {got}, expected {want}")))
    }
}

pub(crate) fn point_satisfies(sys: &LinearSystem, x: &[Q]) -> bool {
    let bounds_ok = sys
        .nonnegative
        .iter()
        .zip(x)
        .all(|(nn, v)| !nn || !v.is_negative());
    bounds_ok
        && sys.constraints.iter().all(|row| {
            let lhs = dot(&row.coeffs, x);
            match row.relation {
                Relation::Le => lhs <= row.rhs,
                Relation::Eq => lhs == row.rhs,
                Relation::Ge => lhs >= row.rhs,
            }
        })
}

/// Combines `<=`-normalized rows with multipliers `y`, checking multiplier
/// signs. Returns `(sum y_i a_i, sum y_i b_i)`, or `None` on a sign error.
fn combine(sys: &LinearSystem, y: &[Q]) -> Option<(Vec<Q>, Q)> {
    let mut coeffs = vec![Q::zero(); sys.num_vars];
    let mut rhs = Q::zero();
    for (row, yi) in sys.constraints.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        if row.relation != Relation::Eq && yi.is_negative() {
            return None;
        }
        let w = if row.relation == Relation::Ge { -yi.clone() } else { yi.clone() };
        for (acc, a) in coeffs.iter_mut().zip(&row.coeffs) {
            if !a.is_zero() {
                *acc += &w * a;
            }
        }
        rhs += &w * &row.rhs;
    }
    Some((coeffs, rhs))
}

/// `r` must vanish on free variables and be nonnegative on bounded ones.
fn reduced_ok(sys: &LinearSystem, r: &[Q]) -> bool {
    r.iter().zip(&sys.nonnegative).all(|(v, nn)| {
        if *nn {
            !v.is_negative()
        } else {
            v.is_zero()
        }
    })
}

pub(crate) fn farkas_valid(sys: &LinearSystem, y: &[Q]) -> bool {
    match combine(sys, y) {
        Some((c, d)) => reduced_ok(sys, &c) && d.is_negative(),
        None => false,
    }
}

impl Certifies for FeasibilityOutcome {
    fn certifies(&self, sys: &LinearSystem) -> Result<bool, LpError> {
        match self {
            FeasibilityOutcome::Feasible { point } => {
                expect_len("point", point.len(), sys.num_vars)?;
                Ok(point_satisfies(sys, point))
            }
            FeasibilityOutcome::Infeasible { farkas } => {
                expect_len("farkas vector", farkas.len(), sys.constraints.len())?;
                Ok(farkas_valid(sys, farkas))
            }
        }
    }
}

fn objective_sign(sys: &LinearSystem) -> Result<(Vec<Q>, bool), LpError> {
    let obj = sys.objective.as_ref().ok_or(LpError::NoObjective)?;
    Ok((obj.coeffs.clone(), obj.direction == Direction::Maximize))
}

impl Certifies for Optimum {
    fn certifies(&self, sys: &LinearSystem) -> Result<bool, LpError> {
        let (c, maximize) = objective_sign(sys)?;
        expect_len("point", self.point.len(), sys.num_vars)?;
        expect_len("dual", self.dual.len(), sys.constraints.len())?;
        if !point_satisfies(sys, &self.point) || dot(&c, &self.point) != self.value {
            return Ok(false);
        }
        // Minimizing s*c: s*c + sum y_i a_i = r with r admissible proves
        // s*c.x >= -sum y_i b_i for every feasible x.
        let Some((combo, rhs)) = combine(sys, &self.dual) else {
            return Ok(false);
        };
        let r: Vec<Q> = c
            .iter()
            .zip(&combo)
            .map(|(ci, ai)| if maximize { ai - ci } else { ci + ai })
            .collect();
        let signed_value = if maximize { -self.value.clone() } else { self.value.clone() };
        Ok(reduced_ok(sys, &r) && -rhs == signed_value)
    }
}

impl Certifies for UnboundedRay {
    fn certifies(&self, sys: &LinearSystem) -> Result<bool, LpError> {
        let (c, maximize) = objective_sign(sys)?;
        expect_len("point", self.point.len(), sys.num_vars)?;
        expect_len("ray", self.ray.len(), sys.num_vars)?;
        if !point_satisfies(sys, &self.point) {
            return Ok(false);
        }
        let bounds_ok = sys
            .nonnegative
            .iter()
            .zip(&self.ray)
            .all(|(nn, d)| !nn || !d.is_negative());
        let rows_ok = sys.constraints.iter().all(|row| {
            let ad = dot(&row.coeffs, &self.ray);
            match row.relation {
                Relation::Le => !ad.is_positive(),
                Relation::Eq => ad.is_zero(),
                Relation::Ge => !ad.is_negative(),
            }
        });
        let slope = dot(&c, &self.ray);
        let improves = if maximize { slope.is_positive() } else { slope.is_negative() };
        Ok(bounds_ok && rows_ok && improves)
    }
}
