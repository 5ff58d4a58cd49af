use num_traits::{One, Signed, Zero};

use super::{Direction, FeasibilityOutcome, LinearSystem, LpError, Optimum, Relation, UnboundedRay};
use crate::rational::Q;

#[derive(Debug, Clone, Copy)]
enum Column {
    /// Original variable, entering with sign +1 or -1 (free variables are split).
    Structural { var: usize, negated: bool },
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    reduced: Vec<Q>,
    columns: Vec<Column>,
    /// `-1` when the row was negated to make its right-hand side nonnegative.
    flip: Vec<bool>,
    artificial_col: Vec<usize>,
    pivots: u128,
    pivot_limit: u128,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

fn binomial_saturating(n: usize, k: usize) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

impl Tableau {
    fn build(sys: &LinearSystem) -> Self {
        let m = sys.constraints.len();
        let mut columns = Vec::new();
        let mut var_cols: Vec<Vec<(usize, bool)>> = vec![Vec::new(); sys.num_vars];
        for (var, cols) in var_cols.iter_mut().enumerate() {
            cols.push((columns.len(), false));
            columns.push(Column::Structural {
                var,
                negated: false,
            });
            if !sys.nonnegative[var] {
                cols.push((columns.len(), true));
                columns.push(Column::Structural { var, negated: true });
            }
        }
        let mut slack_col = vec![None; m];
        for (i, row) in sys.constraints.iter().enumerate() {
            if row.relation != Relation::Eq {
                slack_col[i] = Some(columns.len());
                columns.push(Column::Slack);
            }
        }
        let mut artificial_col = Vec::with_capacity(m);
        for _ in 0..m {
            artificial_col.push(columns.len());
            columns.push(Column::Artificial);
        }
        let n = columns.len();

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut flip = Vec::with_capacity(m);
        for (i, c) in sys.constraints.iter().enumerate() {
            let negate = c.rhs.is_negative();
            let sign = |x: Q| if negate { -x } else { x };
            let mut row = vec![Q::zero(); n];
            for (var, cols) in var_cols.iter().enumerate() {
                let a = &c.coeffs[var];
                if a.is_zero() {
                    continue;
                }
                for &(col, neg) in cols {
                    row[col] = sign(if neg { -a.clone() } else { a.clone() });
                }
            }
            if let Some(col) = slack_col[i] {
                let unit = if c.relation == Relation::Le { Q::one() } else { -Q::one() };
                row[col] = sign(unit);
            }
            row[artificial_col[i]] = Q::one();
            rows.push(row);
            rhs.push(sign(c.rhs.clone()));
            flip.push(negate);
        }

        Tableau {
            rows,
            rhs,
            basis: artificial_col.clone(),
            reduced: vec![Q::zero(); n],
            columns,
            flip,
            artificial_col,
            pivots: 0,
            pivot_limit: binomial_saturating(n, m).saturating_mul(2).max(64),
        }
    }

    fn is_artificial(&self, col: usize) -> bool {
        matches!(self.columns[col], Column::Artificial)
    }

    /// Sets the objective row to `costs - c_B B^{-1} A`.
    fn price(&mut self, costs: &[Q]) {
        let mut reduced = costs.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &costs[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    reduced[j] -= cb * a;
                }
            }
        }
        self.reduced = reduced;
    }

    fn pivot(&mut self, r: usize, e: usize) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > self.pivot_limit {
            return Err(LpError::PivotLimit(self.pivot_limit));
        }
        let inv = self.rows[r][e].recip();
        for a in self.rows[r].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let support: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][e].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for &j in &support {
                row[j] -= &f * &pivot_row[j];
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        let f = self.reduced[e].clone();
        if !f.is_zero() {
            for &j in &support {
                self.reduced[j] -= &f * &pivot_row[j];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = e;
        Ok(())
    }

    /// Bland's rule: least-index improving column, least-index leaving basic.
    fn run(&mut self, allow_artificial: bool) -> Result<PhaseEnd, LpError> {
        loop {
            let entering = (0..self.reduced.len()).find(|&j| {
                self.reduced[j].is_negative() && (allow_artificial || !self.is_artificial(j))
            });
            let Some(e) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Ok(PhaseEnd::Unbounded(e)),
                Some((r, _)) => self.pivot(r, e)?,
            }
        }
    }

    fn point(&self, num_vars: usize) -> Vec<Q> {
        let mut x = vec![Q::zero(); num_vars];
        for (i, &col) in self.basis.iter().enumerate() {
            if let Column::Structural { var, negated } = self.columns[col] {
                if negated {
                    x[var] -= &self.rhs[i];
                } else {
                    x[var] += &self.rhs[i];
                }
            }
        }
        x
    }

    /// Converts simplex multipliers `y` of the internal equality system into
    /// `<=`-normalized row multipliers of the original system.
    fn row_multipliers(&self, sys: &LinearSystem, y: Vec<Q>) -> Vec<Q> {
        y.into_iter()
            .enumerate()
            .map(|(i, yi)| {
                let mut z = if self.flip[i] { yi } else { -yi };
                if sys.constraints[i].relation == Relation::Ge {
                    z = -z;
                }
                z
            })
            .collect()
    }

    fn phase_one(&mut self) -> Result<Option<Vec<Q>>, LpError> {
        let costs: Vec<Q> = (0..self.columns.len())
            .map(|j| if self.is_artificial(j) { Q::one() } else { Q::zero() })
            .collect();
        self.price(&costs);
        match self.run(true)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded(_) => unreachable!("phase one objective is bounded below by zero"),
        }
        let infeasibility: Q = self
            .basis
            .iter()
            .zip(&self.rhs)
            .filter(|(col, _)| self.is_artificial(**col))
            .map(|(_, b)| b.clone())
            .sum();
        if infeasibility.is_positive() {
            let y = self
                .artificial_col
                .iter()
                .map(|&col| Q::one() - &self.reduced[col])
                .collect();
            return Ok(Some(y));
        }
        // Drive zero-level artificials out where the row still has a
        // structural or slack entry; otherwise the row is redundant and the
        // artificial stays basic at zero forever.
        for r in 0..self.rows.len() {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let col = (0..self.columns.len())
                .find(|&j| !self.is_artificial(j) && !self.rows[r][j].is_zero());
            if let Some(col) = col {
                self.pivot(r, col)?;
            }
        }
        Ok(None)
    }
}

fn structural_costs(sys: &LinearSystem, tab: &Tableau, sign: &Q) -> Vec<Q> {
    let obj = sys.objective.as_ref().expect("objective checked by caller");
    tab.columns
        .iter()
        .map(|c| match *c {
            Column::Structural { var, negated } => {
                let v = sign * &obj.coeffs[var];
                if negated {
                    -v
                } else {
                    v
                }
            }
            _ => Q::zero(),
        })
        .collect()
}

/// Decides whether the system has a solution; returns either an exact point
/// or a Farkas vector.
pub fn solve_feasibility(sys: &LinearSystem) -> Result<FeasibilityOutcome, LpError> {
    sys.validate()?;
    let mut tab = Tableau::build(sys);
    match tab.phase_one()? {
        Some(y) => Ok(FeasibilityOutcome::Infeasible {
            farkas: tab.row_multipliers(sys, y),
        }),
        None => Ok(FeasibilityOutcome::Feasible {
            point: tab.point(sys.num_vars),
        }),
    }
}

/// Optimizes the system's objective in its stated direction.
pub fn optimize(sys: &LinearSystem) -> Result<Optimum, LpError> {
    sys.validate()?;
    let direction = sys.objective.as_ref().ok_or(LpError::NoObjective)?.direction;
    let sign = match direction {
        Direction::Minimize => Q::one(),
        Direction::Maximize => -Q::one(),
    };
    let mut tab = Tableau::build(sys);
    if let Some(y) = tab.phase_one()? {
        return Err(LpError::Infeasible {
            farkas: tab.row_multipliers(sys, y),
        });
    }
    let costs = structural_costs(sys, &tab, &sign);
    tab.price(&costs);
    match tab.run(false)? {
        PhaseEnd::Unbounded(e) => {
            let point = tab.point(sys.num_vars);
            let mut ray = vec![Q::zero(); sys.num_vars];
            let mut add = |col: usize, amount: Q| {
                if let Column::Structural { var, negated } = tab.columns[col] {
                    if negated {
                        ray[var] -= amount;
                    } else {
                        ray[var] += amount;
                    }
                }
            };
            add(e, Q::one());
            for (i, &col) in tab.basis.iter().enumerate() {
                add(col, -tab.rows[i][e].clone());
            }
            Err(LpError::Unbounded(UnboundedRay { point, ray }))
        }
        PhaseEnd::Optimal => {
            let point = tab.point(sys.num_vars);
            let obj = sys.objective.as_ref().expect("checked above");
            let value = obj
                .coeffs
                .iter()
                .zip(&point)
                .map(|(c, x)| c * x)
                .sum();
            let y = tab
                .artificial_col
                .iter()
                .map(|&col| -tab.reduced[col].clone())
                .collect();
            Ok(Optimum {
                value,
                point,
                dual: tab.row_multipliers(sys, y),
            })
        }
    }
}

/// Like [`optimize`], but insists the objective direction is minimization.
pub fn minimize(sys: &LinearSystem) -> Result<Optimum, LpError> {
    match sys.objective.as_ref().map(|o| o.direction) {
        None => Err(LpError::NoObjective),
        Some(Direction::Maximize) => Err(LpError::Malformed(
            "minimize called on a maximization objective".into(),
        )),
        Some(Direction::Minimize) => optimize(sys),
    }
}
