use proptest::prelude::*;
use tulp::bnb::{solve_bnb, BnbOptions, MilpStatus};
use tulp::harness::{gen_kmedoid_instance, gen_transport_instance};
use tulp::lp::{check_integrality, solve_simplex, Engine, PivotRule, SolverOptions, Status};
use tulp::models::{build_expendable, build_kmedoid, build_nonexpendable, Model, NonExpendableInstance};
use tulp::oracle::{oracle_kmedoid, oracle_nonexpendable, oracle_transport};
use tulp::tu::{is_tu_exhaustive, is_tu_ghouila_houri, negate_line, prepend_identity, transpose, Axis, GhMode, SignMatrix};

const TOL: f64 = 1e-6;

fn engines() -> impl Strategy<Value = SolverOptions> {
    (prop_oneof![Just(Engine::Tableau), Just(Engine::Revised), Just(Engine::Dual)], any::<bool>()).prop_map(
        |(engine, bland)| {
            let rule = if bland { PivotRule::Bland } else { PivotRule::Dantzig };
            SolverOptions::default().with_engine(engine).with_pivot_rule(rule)
        },
    )
}

fn sign_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = SignMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-1i64..=1, r * c).prop_map(move |e| SignMatrix::new(r, c, e).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expendable_lp_bnb_and_oracle_agree(m in 1usize..4, n in 1usize..4, seed: u64, opts in engines()) {
        let inst = gen_transport_instance(m, n, seed, 5);
        let lp = build_expendable(&inst).unwrap();
        let sol = solve_simplex(&lp, &opts).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal);
        let point = sol.point.as_deref().unwrap();
        prop_assert!(check_integrality(point, TOL).is_integral);
        prop_assert!(lp.is_feasible(point, 1e-7));
        let vars: Vec<usize> = (0..lp.num_vars()).collect();
        let bnb = solve_bnb(&lp, &vars, &BnbOptions { lp: opts, ..BnbOptions::default() }).unwrap();
        prop_assert_eq!(bnb.status, MilpStatus::Optimal);
        prop_assert_eq!(bnb.nodes_explored, 1);
        let oracle = oracle_transport(&inst, 10_000_000).unwrap();
        prop_assert!((sol.objective - oracle.objective).abs() <= TOL);
        prop_assert!((bnb.objective - oracle.objective).abs() <= TOL);
    }

    #[test]
    fn nonexpendable_matches_the_greedy_oracle(m in 1usize..7, n in 1usize..7, seed: u64, opts in engines()) {
        let inst: NonExpendableInstance = gen_transport_instance(m, n, seed, 12).into();
        let sol = solve_simplex(&build_nonexpendable(&inst).unwrap(), &opts).unwrap();
        prop_assert!(check_integrality(sol.point.as_deref().unwrap(), TOL).is_integral);
        let oracle = oracle_nonexpendable(&inst).unwrap();
        prop_assert!((sol.objective - oracle.objective).abs() <= TOL);
        let model = Model::NonExpendable(inst);
        let alloc = model.decode(sol.point.as_deref().unwrap()).unwrap();
        prop_assert!(model.check_allocation(&alloc).is_ok());
        prop_assert!((model.allocation_cost(&alloc) - oracle.objective).abs() <= TOL);
    }

    #[test]
    fn kmedoid_lp_is_a_lower_bound_and_bnb_is_exact(n in 2usize..10, k in 1usize..4, seed: u64) {
        let inst = gen_kmedoid_instance(n, k.min(n), seed);
        let lp = build_kmedoid(&inst).unwrap();
        let sol = solve_simplex(&lp, &SolverOptions::default()).unwrap();
        let oracle = oracle_kmedoid(&inst, 1_000_000).unwrap();
        prop_assert!(sol.objective <= oracle.objective + TOL);
        let vars: Vec<usize> = (0..lp.num_vars()).collect();
        let bnb = solve_bnb(&lp, &vars, &BnbOptions::default()).unwrap();
        prop_assert!((bnb.objective - oracle.objective).abs() <= TOL);
        if check_integrality(sol.point.as_deref().unwrap(), TOL).is_integral {
            prop_assert!((sol.objective - oracle.objective).abs() <= TOL);
        }
    }

    #[test]
    fn scaling_the_objective_scales_the_optimum(m in 1usize..6, n in 1usize..6, seed: u64, alpha in 0.01f64..100.0) {
        let lp = build_expendable(&gen_transport_instance(m, n, seed, 9)).unwrap();
        let vars: Vec<usize> = (0..lp.num_vars()).collect();
        let base = solve_bnb(&lp, &vars, &BnbOptions::default()).unwrap();
        let scaled = solve_bnb(&lp.with_scaled_objective(alpha), &vars, &BnbOptions::default()).unwrap();
        prop_assert!((scaled.objective - alpha * base.objective).abs() <= TOL * (1.0 + scaled.objective.abs()));
    }

    #[test]
    fn generators_are_deterministic(n in 2usize..40, m in 1usize..6, seed: u64) {
        prop_assert_eq!(gen_kmedoid_instance(n, 1, seed), gen_kmedoid_instance(n, 1, seed));
        prop_assert_eq!(gen_transport_instance(m, n, seed, 7), gen_transport_instance(m, n, seed, 7));
        let inst = gen_transport_instance(m, n, seed, 7);
        prop_assert!(inst.demands.iter().sum::<u64>() <= inst.supplies.iter().sum::<u64>());
    }

    #[test]
    fn tu_verdicts_are_invariant_under_closure_operations(m in sign_matrix(4, 4), r: prop::sample::Index, c: prop::sample::Index) {
        let verdict = is_tu_exhaustive(&m).unwrap().is_tu;
        prop_assert_eq!(is_tu_ghouila_houri(&m, GhMode::AllSubsets).unwrap().is_tu, verdict);
        prop_assert_eq!(is_tu_exhaustive(&transpose(&m)).unwrap().is_tu, verdict);
        prop_assert_eq!(is_tu_exhaustive(&negate_line(&m, Axis::Row, r.index(m.rows())).unwrap()).unwrap().is_tu, verdict);
        prop_assert_eq!(is_tu_exhaustive(&negate_line(&m, Axis::Col, c.index(m.cols())).unwrap()).unwrap().is_tu, verdict);
        prop_assert_eq!(is_tu_exhaustive(&prepend_identity(&m)).unwrap().is_tu, verdict);
    }
}
