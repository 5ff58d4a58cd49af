use super::*;
use crate::rational::{frac, q};

fn one_var(rows: &[(i64, Relation, i64)]) -> LinearSystem {
    let mut sys = LinearSystem::new(1);
    for &(a, rel, b) in rows {
        sys.add(vec![q(a)], rel, q(b));
    }
    sys
}

#[test]
fn unit_interval_is_feasible() {
    let sys = one_var(&[(1, Relation::Ge, 0), (1, Relation::Le, 1)]);
    let out = solve_feasibility(&sys).unwrap();
    let x = &out.point().unwrap()[0];
    assert!(*x >= q(0) && *x <= q(1));
    assert!(verify_certificate(&sys, &out).unwrap());
}

#[test]
fn crossed_bounds_give_unit_farkas_vector() {
    let sys = one_var(&[(1, Relation::Ge, 1), (1, Relation::Le, 0)]);
    let out = solve_feasibility(&sys).unwrap();
    assert_eq!(out, FeasibilityOutcome::Infeasible { farkas: vec![q(1), q(1)] });
    assert!(verify_certificate(&sys, &out).unwrap());
}

#[test]
fn hand_built_farkas_vector_verifies() {
    let sys = one_var(&[(1, Relation::Ge, 1), (1, Relation::Le, 0)]);
    let cert = FeasibilityOutcome::Infeasible { farkas: vec![q(1), q(1)] };
    assert!(verify_certificate(&sys, &cert).unwrap());
    let wrong_sign = FeasibilityOutcome::Infeasible { farkas: vec![q(-1), q(1)] };
    assert!(!verify_certificate(&sys, &wrong_sign).unwrap());
    let no_contradiction = FeasibilityOutcome::Infeasible { farkas: vec![q(1), q(2)] };
    assert!(!verify_certificate(&sys, &no_contradiction).unwrap());
}

#[test]
fn two_point_simplex_with_offset() {
    // x1 + x2 = 1, x1 - x2 = 1/3, x >= 0. By hand: x1 = 2/3, x2 = 1/3.
    let mut sys = LinearSystem::with_nonnegative(2);
    sys.add(vec![q(1), q(1)], Relation::Eq, q(1));
    sys.add(vec![q(1), q(-1)], Relation::Eq, frac(1, 3));
    let out = solve_feasibility(&sys).unwrap();
    assert_eq!(out.point().unwrap(), &[frac(2, 3), frac(1, 3)]);
    assert!(verify_certificate(&sys, &out).unwrap());
}

#[test]
fn violated_point_is_rejected() {
    let mut sys = LinearSystem::new(1);
    sys.add(vec![q(1)], Relation::Le, q(1));
    let bad = FeasibilityOutcome::Feasible {
        point: vec![q(1) + frac(1, 1_000_000)],
    };
    assert!(!verify_certificate(&sys, &bad).unwrap());
}

#[test]
fn shape_mismatch_is_an_error() {
    let sys = one_var(&[(1, Relation::Le, 1)]);
    let bad = FeasibilityOutcome::Feasible { point: vec![q(0), q(0)] };
    assert!(matches!(verify_certificate(&sys, &bad), Err(LpError::Shape(_))));
}

#[test]
fn minimize_single_bound() {
    let mut sys = one_var(&[(1, Relation::Ge, 3)]);
    sys.set_objective(vec![q(1)], Direction::Minimize);
    let opt = minimize(&sys).unwrap();
    assert_eq!(opt.value, q(3));
    assert!(verify_certificate(&sys, &opt).unwrap());
}

#[test]
fn l1_linearization() {
    // vars: x1, x2, t1, t2; t_i >= x_i, t_i >= -x_i, x1 = 1/2; min t1 + t2.
    let mut sys = LinearSystem::new(4);
    sys.add_sparse(&[(2, q(1)), (0, q(-1))], Relation::Ge, q(0));
    sys.add_sparse(&[(2, q(1)), (0, q(1))], Relation::Ge, q(0));
    sys.add_sparse(&[(3, q(1)), (1, q(-1))], Relation::Ge, q(0));
    sys.add_sparse(&[(3, q(1)), (1, q(1))], Relation::Ge, q(0));
    sys.add_sparse(&[(0, q(1))], Relation::Eq, frac(1, 2));
    sys.set_objective(vec![q(0), q(0), q(1), q(1)], Direction::Minimize);
    let opt = minimize(&sys).unwrap();
    assert_eq!(opt.value, frac(1, 2));
    assert!(verify_certificate(&sys, &opt).unwrap());
}

#[test]
fn gap_of_single_member_family() {
    // family {{0}} over {0,1}: lambda = 1, v = (1, 0); min t_hi - t_lo.
    // vars: lambda, t_hi, t_lo
    let mut sys = LinearSystem::new(3);
    sys.set_nonnegative(0, true);
    sys.add_sparse(&[(0, q(1))], Relation::Eq, q(1));
    sys.add_sparse(&[(0, q(1)), (1, q(-1))], Relation::Le, q(0));
    sys.add_sparse(&[(0, q(1)), (2, q(-1))], Relation::Ge, q(0));
    sys.add_sparse(&[(1, q(-1))], Relation::Le, q(0));
    sys.add_sparse(&[(2, q(-1))], Relation::Ge, q(0));
    sys.set_objective(vec![q(0), q(1), q(-1)], Direction::Minimize);
    let opt = minimize(&sys).unwrap();
    assert_eq!(opt.value, q(1));
    assert!(verify_certificate(&sys, &opt).unwrap());
}

#[test]
fn maximize_reports_value_in_original_sign() {
    let mut sys = LinearSystem::with_nonnegative(2);
    sys.add(vec![q(1), q(2)], Relation::Le, q(4));
    sys.add(vec![q(3), q(1)], Relation::Le, q(6));
    sys.set_objective(vec![q(1), q(1)], Direction::Maximize);
    let opt = optimize(&sys).unwrap();
    // vertex (8/5, 6/5)
    assert_eq!(opt.value, frac(14, 5));
    assert!(verify_certificate(&sys, &opt).unwrap());
    assert!(matches!(minimize(&sys), Err(LpError::Malformed(_))));
}

#[test]
fn unbounded_yields_ray() {
    let mut sys = one_var(&[(1, Relation::Ge, 3)]);
    sys.set_objective(vec![q(-1)], Direction::Minimize);
    match optimize(&sys) {
        Err(LpError::Unbounded(ray)) => assert!(verify_certificate(&sys, &ray).unwrap()),
        other => panic!("expected unbounded, got {other:?}"),
    }
}

#[test]
fn infeasible_optimization_carries_farkas() {
    let mut sys = one_var(&[(1, Relation::Ge, 1), (1, Relation::Le, 0)]);
    sys.set_objective(vec![q(1)], Direction::Minimize);
    match optimize(&sys) {
        Err(LpError::Infeasible { farkas }) => {
            let out = FeasibilityOutcome::Infeasible { farkas };
            assert!(verify_certificate(&sys, &out).unwrap());
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn redundant_equalities_are_tolerated() {
    let mut sys = LinearSystem::with_nonnegative(2);
    sys.add(vec![q(1), q(1)], Relation::Eq, q(1));
    sys.add(vec![q(2), q(2)], Relation::Eq, q(2));
    sys.set_objective(vec![q(1), q(2)], Direction::Minimize);
    let opt = optimize(&sys).unwrap();
    assert_eq!(opt.value, q(1));
    assert!(verify_certificate(&sys, &opt).unwrap());
}

#[test]
fn no_rows_is_feasible_at_origin() {
    let sys = LinearSystem::with_nonnegative(3);
    let out = solve_feasibility(&sys).unwrap();
    assert_eq!(out.point().unwrap(), &[q(0), q(0), q(0)]);
}

#[test]
fn malformed_rows_rejected() {
    let mut sys = LinearSystem::new(2);
    sys.add(vec![q(1)], Relation::Le, q(1));
    assert!(matches!(solve_feasibility(&sys), Err(LpError::Malformed(_))));
    assert!(matches!(solve_feasibility(&LinearSystem::new(0)), Err(LpError::Malformed(_))));
}

#[test]
fn system_json_round_trip() {
    let mut sys = one_var(&[(1, Relation::Ge, 1), (2, Relation::Le, 0)]);
    sys.set_objective(vec![frac(-1, 3)], Direction::Maximize);
    let text = serde_json::to_string(&sys).unwrap();
    assert!(text.contains("\"-1/3\""));
    let back: LinearSystem = serde_json::from_str(&text).unwrap();
    assert_eq!(back, sys);
}
