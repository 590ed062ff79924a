mod common;

use common::*;
use cosmos_core::cost::workflow_cost;
use cosmos_core::pricing::CatalogSet;
use cosmos_core::tradeoff::{
    enumerate_placements, objective, optimize, OptimizationConfig, TradeoffProblem, WeightMode,
};
use cosmos_core::workflow::{workflow_latency, LatencyTable};
use cosmos_core::Decimal;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    // The optimizer's precomputed evaluation, including shared fixed charges,
    // agrees with the cost engine and latency model on every placement.
    #[test]
    fn precomputed_costs_match_cost_engine(
        a in catalog_strategy("a"),
        b in catalog_strategy("b"),
        profiles in (profile_strategy("f0".into()), profile_strategy("f1".into()), profile_strategy("f2".into())),
        lat in proptest::collection::vec(decimal(1_000, 1), 6),
    ) {
        let wf = cosmos_core::workflow::WorkflowSpec::chain("w", vec![profiles.0, profiles.1, profiles.2]).unwrap();
        let catalogs = CatalogSet::new([a, b]).unwrap();
        let platforms = vec!["a".to_string(), "b".to_string()];
        let mut table = LatencyTable::new();
        for (i, f) in ["f0", "f1", "f2"].iter().enumerate() {
            table.insert(f, "a", lat[2 * i]);
            table.insert(f, "b", lat[2 * i + 1]);
        }
        let problem = TradeoffProblem::from_catalogs(&wf, &platforms, &catalogs, &table).unwrap();
        let placements: Vec<_> = enumerate_placements(&wf, &platforms, 1000).unwrap().collect();
        let choices: Vec<_> = problem.assignments().unwrap().collect();
        prop_assert_eq!(placements.len(), 8);
        for (placement, choice) in placements.iter().zip(&choices) {
            prop_assert_eq!(&problem.placement(choice), placement);
            let engine = workflow_cost(&wf, placement, &catalogs, Some(&table)).unwrap().total;
            prop_assert_eq!(problem.cost(choice), engine);
            prop_assert_eq!(problem.latency(choice).unwrap(), workflow_latency(&wf, placement, &table).unwrap());
        }
    }

    // Without shared charges or constraints, a chain's weighted optimum is
    // the per-function argmin.
    #[test]
    fn unconstrained_chain_is_separable(
        problem in (1usize..=4, 1usize..=4).prop_flat_map(|(f, p)| table_problem(f, p)),
        alpha in 1u32..1000,
        beta in 1u32..1000,
    ) {
        let (alpha, beta) = (alpha as f64 / 100.0, beta as f64 / 100.0);
        let config = OptimizationConfig { weights: WeightMode::Manual { alpha, beta }, ..Default::default() };
        let result = optimize(&problem, &config).unwrap();
        let mut separable = 0.0;
        for f in 0..problem.functions().len() {
            separable += (0..problem.platforms().len())
                .map(|p| objective(alpha, beta, problem.cell_cost(f, p), problem.cell_latency(f, p).unwrap()))
                .fold(f64::INFINITY, f64::min);
        }
        prop_assert!((result.objective - separable).abs() <= 1e-9 * separable.max(1.0));
    }
}

#[test]
fn manual_cost_only_weights_reduce_to_min_cost() {
    use proptest::strategy::ValueTree;
    let problem = table_problem(3, 4)
        .new_tree(&mut proptest::test_runner::TestRunner::deterministic())
        .unwrap()
        .current();
    let config = OptimizationConfig {
        weights: WeightMode::Manual {
            alpha: 1.0,
            beta: 0.0,
        },
        ..Default::default()
    };
    let result = optimize(&problem, &config).unwrap();
    assert_eq!(result.cost, result.c_star);
    assert_eq!(
        result.cost,
        cosmos_core::tradeoff::min_cost(&problem).unwrap().value
    );
    assert!(result.latency >= Decimal::ZERO);
}
