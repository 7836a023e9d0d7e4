mod common;

use ccp_core::lp::{LpModel, LpRow, LpSolver, LpStatus};
use ccp_core::Sense;
use common::{q, rational_lp, to_f64, LpAnswer, Q};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct SmallLp {
    obj: Vec<i32>,
    upper: Vec<Option<i32>>,
    rows: Vec<(Vec<i32>, u8, i32)>,
}

fn sense(s: u8) -> Sense {
    match s % 3 {
        0 => Sense::Le,
        1 => Sense::Ge,
        _ => Sense::Eq,
    }
}

fn small_lp() -> impl Strategy<Value = SmallLp> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(nv, nr)| {
        (
            prop::collection::vec(-4i32..=6, nv),
            prop::collection::vec(prop::option::weighted(0.4, 1i32..=8), nv),
            prop::collection::vec((prop::collection::vec(-3i32..=3, nv), 0u8..3, -5i32..=10), nr),
        )
            .prop_map(|(obj, upper, rows)| SmallLp { obj, upper, rows })
    })
}

fn build(lp: &SmallLp) -> LpModel {
    let mut m = LpModel::new();
    for (j, &c) in lp.obj.iter().enumerate() {
        let hi = lp.upper[j].map(f64::from).unwrap_or(f64::INFINITY);
        m.add_var(0.0, hi, c as f64);
    }
    for (a, s, b) in &lp.rows {
        m.add_row(LpRow {
            coeffs: a.iter().enumerate().map(|(j, &v)| (j, v as f64)).collect(),
            sense: sense(*s),
            rhs: *b as f64,
        })
        .unwrap();
    }
    m
}

fn reference(lp: &SmallLp) -> LpAnswer {
    let c: Vec<Q> = lp.obj.iter().map(|&v| q(v as f64)).collect();
    let mut rows: Vec<(Vec<Q>, Sense, Q)> = lp
        .rows
        .iter()
        .map(|(a, s, b)| (a.iter().map(|&v| q(v as f64)).collect(), sense(*s), q(*b as f64)))
        .collect();
    for (j, u) in lp.upper.iter().enumerate() {
        if let Some(u) = u {
            let mut e = vec![q(0.0); lp.obj.len()];
            e[j] = q(1.0);
            rows.push((e, Sense::Le, q(*u as f64)));
        }
    }
    rational_lp(&c, &rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn status_and_objective_match_exact_simplex(lp in small_lp()) {
        let model = build(&lp);
        let res = ccp_core::lp::solve(&model, None).unwrap();
        match reference(&lp) {
            LpAnswer::Infeasible => prop_assert_eq!(res.status, LpStatus::Infeasible),
            LpAnswer::Unbounded => prop_assert_eq!(res.status, LpStatus::Unbounded),
            LpAnswer::Optimal(v) => {
                prop_assert_eq!(res.status, LpStatus::Optimal);
                prop_assert!((res.objective - to_f64(&v)).abs() < 1e-6, "{} vs {}", res.objective, to_f64(&v));
            }
        }
    }

    #[test]
    fn optimal_solutions_are_primal_and_dual_feasible(lp in small_lp()) {
        let model = build(&lp);
        let res = ccp_core::lp::solve(&model, None).unwrap();
        prop_assume!(res.status == LpStatus::Optimal);
        let tol = 1e-6;
        for (j, &x) in res.primal.iter().enumerate() {
            prop_assert!(x >= model.lower()[j] - tol && x <= model.upper()[j] + tol);
        }
        for (i, row) in model.rows().iter().enumerate() {
            let act: f64 = row.coeffs.iter().map(|&(j, a)| a * res.primal[j]).sum();
            prop_assert!(row.sense.holds(act, row.rhs, tol));
            let y = res.duals[i];
            match row.sense {
                Sense::Ge => prop_assert!(y >= -tol),
                Sense::Le => prop_assert!(y <= tol),
                Sense::Eq => {}
            }
            // complementary slackness
            if (act - row.rhs).abs() > tol {
                prop_assert!(y.abs() < tol);
            }
        }
        for j in 0..model.num_vars() {
            let rc = model.objective()[j]
                - model.rows().iter().zip(&res.duals).map(|(r, y)| {
                    r.coeffs.iter().filter(|c| c.0 == j).map(|c| c.1 * y).sum::<f64>()
                }).sum::<f64>();
            prop_assert!((rc - res.reduced_costs[j]).abs() < 1e-6);
            let x = res.primal[j];
            if x > model.lower()[j] + tol && x < model.upper()[j] - tol {
                prop_assert!(rc.abs() < 1e-6);
            } else if x <= model.lower()[j] + tol && x < model.upper()[j] - tol {
                prop_assert!(rc >= -1e-6);
            } else if x >= model.upper()[j] - tol && x > model.lower()[j] + tol {
                prop_assert!(rc <= 1e-6);
            }
        }
        let dual_obj: f64 = model.rows().iter().zip(&res.duals).map(|(r, y)| r.rhs * y).sum::<f64>()
            + (0..model.num_vars()).map(|j| {
                let rc = res.reduced_costs[j];
                if rc > 1e-9 { rc * model.lower()[j] } else if rc < -1e-9 { rc * model.upper()[j] } else { 0.0 }
            }).sum::<f64>();
        prop_assert!((dual_obj - res.objective).abs() < 1e-5, "{} vs {}", dual_obj, res.objective);
    }

    #[test]
    fn warm_start_after_bound_change_matches_cold_start(lp in small_lp(), var in 0usize..5, hi in 0i32..6) {
        let mut model = build(&lp);
        let var = var % model.num_vars();
        let mut solver = LpSolver::new();
        let first = solver.solve(&model, None).unwrap();
        model.change_bounds(var, 0.0, hi as f64).unwrap();
        let warm = solver.solve(&model, Some(&first.basis)).unwrap();
        let cold = ccp_core::lp::solve(&model, None).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() < 1e-6);
        }
    }

    #[test]
    fn warm_start_after_row_addition_matches_cold_start(lp in small_lp(), extra in (prop::collection::vec(-3i32..=3, 5), 0u8..3, -5i32..=10)) {
        let mut model = build(&lp);
        let mut solver = LpSolver::new();
        let first = solver.solve(&model, None).unwrap();
        let nv = model.num_vars();
        model.add_row(LpRow {
            coeffs: extra.0[..nv].iter().enumerate().map(|(j, &v)| (j, v as f64)).collect(),
            sense: sense(extra.1),
            rhs: extra.2 as f64,
        }).unwrap();
        let warm = solver.solve(&model, Some(&first.basis)).unwrap();
        let cold = ccp_core::lp::solve(&model, None).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() < 1e-6);
        }
    }

    #[test]
    fn revert_restores_the_model(lp in small_lp(), var in 0usize..5, hi in 0i32..6) {
        let mut model = build(&lp);
        let before = model.clone();
        let mark = model.checkpoint();
        let var = var % model.num_vars();
        model.change_bounds(var, 0.0, hi as f64).unwrap();
        model.add_row(LpRow { coeffs: vec![(var, 1.0)], sense: Sense::Ge, rhs: 1.0 }).unwrap();
        model.revert(mark).unwrap();
        prop_assert_eq!(model, before);
    }
}
