//! Brute-force vertex enumeration over `Ratio<i128>`, used as an oracle for
//! the exact simplex on small random systems with nonnegative variables.

use amenlab_core::lp::{self, Direction, FeasibilityOutcome, LinearSystem, LpError, Relation};
use amenlab_core::rational::Q;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Small = Ratio<i128>;

#[derive(Clone)]
struct Row {
    coeffs: Vec<i64>,
    relation: Relation,
    rhs: i64,
}

fn random_rows(rng: &mut ChaCha8Rng) -> (usize, Vec<Row>, Vec<i64>) {
    let vars = rng.gen_range(1..=6);
    let rows = rng.gen_range(1..=10);
    let rows = (0..rows)
        .map(|_| Row {
            coeffs: (0..vars).map(|_| rng.gen_range(-3..=3)).collect(),
            relation: match rng.gen_range(0..5) {
                0 => Relation::Eq,
                1 | 2 => Relation::Ge,
                _ => Relation::Le,
            },
            rhs: rng.gen_range(-3..=3),
        })
        .collect();
    let objective = (0..vars).map(|_| rng.gen_range(-3..=3)).collect();
    (vars, rows, objective)
}

fn build(vars: usize, rows: &[Row], objective: Option<&[i64]>) -> LinearSystem {
    let mut sys = LinearSystem::with_nonnegative(vars);
    for row in rows {
        sys.add(row.coeffs.iter().map(|&c| Q::from_integer(c.into())).collect(), row.relation, Q::from_integer(row.rhs.into()));
    }
    if let Some(obj) = objective {
        sys.set_objective(obj.iter().map(|&c| Q::from_integer(c.into())).collect(), Direction::Minimize);
    }
    sys
}

/// Solves a square system by Gaussian elimination; `None` if singular.
#[allow(clippy::needless_range_loop)]
fn solve_square(mut matrix: Vec<Vec<Small>>, mut rhs: Vec<Small>) -> Option<Vec<Small>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !matrix[r][col].is_zero())?;
        matrix.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in 0..n {
            if r != col && !matrix[r][col].is_zero() {
                let factor = matrix[r][col] / matrix[col][col];
                for c in col..n {
                    let delta = factor * matrix[col][c];
                    matrix[r][c] -= delta;
                }
                let delta = factor * rhs[col];
                rhs[r] -= delta;
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / matrix[i][i]).collect())
}

fn satisfies(rows: &[Row], x: &[Small]) -> bool {
    x.iter().all(|v| *v >= Small::zero())
        && rows.iter().all(|row| {
            let lhs: Small = row.coeffs.iter().zip(x).map(|(&c, v)| Small::from_integer(c.into()) * v).sum();
            let rhs = Small::from_integer(row.rhs.into());
            match row.relation {
                Relation::Le => lhs <= rhs,
                Relation::Ge => lhs >= rhs,
                Relation::Eq => lhs == rhs,
            }
        })
}

/// All vertices of `{x ≥ 0} ∩ rows`: every choice of `vars` tight
/// constraints among rows and bounds with a unique solution that is feasible.
fn vertices(vars: usize, rows: &[Row]) -> Vec<Vec<Small>> {
    let mut hyperplanes: Vec<(Vec<Small>, Small)> = rows
        .iter()
        .map(|r| (r.coeffs.iter().map(|&c| Small::from_integer(c.into())).collect(), Small::from_integer(r.rhs.into())))
        .collect();
    for i in 0..vars {
        let mut e = vec![Small::zero(); vars];
        e[i] = Small::one();
        hyperplanes.push((e, Small::zero()));
    }
    let total = hyperplanes.len();
    let mut out = Vec::new();
    let mut choice: Vec<usize> = (0..vars).collect();
    if total < vars {
        return out;
    }
    loop {
        let matrix = choice.iter().map(|&i| hyperplanes[i].0.clone()).collect();
        let rhs = choice.iter().map(|&i| hyperplanes[i].1).collect();
        if let Some(x) = solve_square(matrix, rhs) {
            if satisfies(rows, &x) {
                out.push(x);
            }
        }
        if !advance(&mut choice, total) {
            return out;
        }
    }
}

/// Next `k`-subset of `0..total` in lexicographic order.
fn advance(choice: &mut [usize], total: usize) -> bool {
    let k = choice.len();
    for i in (0..k).rev() {
        if choice[i] < total - k + i {
            choice[i] += 1;
            for j in i + 1..k {
                choice[j] = choice[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn to_small(x: &Q) -> Small {
    Small::new(x.numer().try_into().unwrap(), x.denom().try_into().unwrap())
}

/// Solves `count` random systems (feasibility and minimization), comparing
/// each against the vertex oracle and re-verifying every certificate.
pub fn run(seed: u64, count: usize) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut feasible, mut infeasible, mut bounded, mut unbounded) = (0, 0, 0, 0);
    let fail = |i: usize, what: &str| Err(format!("system {i}: {what}"));
    for i in 0..count {
        let (vars, rows, objective) = random_rows(&mut rng);
        let verts = vertices(vars, &rows);

        let sys = build(vars, &rows, None);
        let outcome = lp::solve_feasibility(&sys).map_err(|e| e.to_string())?;
        if !lp::verify_certificate(&sys, &outcome).map_err(|e| e.to_string())? {
            return fail(i, "feasibility certificate rejected");
        }
        if outcome.is_feasible() == verts.is_empty() {
            return fail(i, "feasibility disagrees with the oracle");
        }
        match &outcome {
            FeasibilityOutcome::Feasible { point } => {
                if !satisfies(&rows, &point.iter().map(to_small).collect::<Vec<_>>()) {
                    return fail(i, "point violates a constraint");
                }
                feasible += 1;
            }
            FeasibilityOutcome::Infeasible { .. } => infeasible += 1,
        }

        let sys = build(vars, &rows, Some(&objective));
        match lp::minimize(&sys) {
            Ok(opt) => {
                if !lp::verify_certificate(&sys, &opt).map_err(|e| e.to_string())? {
                    return fail(i, "optimality certificate rejected");
                }
                let best = verts
                    .iter()
                    .map(|x| objective.iter().zip(x).map(|(&c, v)| Small::from_integer(c.into()) * v).sum::<Small>())
                    .min();
                if best != Some(to_small(&opt.value)) {
                    return fail(i, "optimum disagrees with the best vertex");
                }
                bounded += 1;
            }
            Err(LpError::Unbounded(ray)) => {
                if !lp::verify_certificate(&sys, &ray).map_err(|e| e.to_string())? {
                    return fail(i, "unbounded ray rejected");
                }
                unbounded += 1;
            }
            Err(LpError::Infeasible { farkas }) => {
                let cert = FeasibilityOutcome::Infeasible { farkas };
                if !verts.is_empty() || !lp::verify_certificate(&sys, &cert).map_err(|e| e.to_string())? {
                    return fail(i, "Farkas certificate wrong");
                }
            }
            Err(other) => return fail(i, &other.to_string()),
        }
    }
    Ok(format!(
        "{count} systems match the vertex oracle ({feasible} feasible, {infeasible} infeasible, {bounded} bounded, {unbounded} unbounded)"
    ))
}
