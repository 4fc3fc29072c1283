//! Monotonicity of the recourse cost.

mod common;

use common::{cable, random_case};
use petal::backend::BackendConfig;
use petal::evaluate::recourse_cost;
use petal::pci::solve_deterministic;
use petal::scenario::{build_system_states, failure_probability, FailureParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// With equal reactances a bigger cable only relaxes capacity rows.
    #[test]
    fn upgrades_never_add_curtailment(seed in 0u64..500, n_w in 3usize..7, pick in any::<prop::sample::Index>()) {
        let mut case = random_case(seed, n_w, 1);
        case.cables = vec![cable(180.0, 300.0, 0.12), cable(360.0, 380.0, 0.12)];
        let ctx = case.context(100);
        let det = solve_deterministic(&ctx, &BackendConfig::enumeration()).unwrap();
        let input = ctx.input_for(&det).unwrap();
        let before = recourse_cost(&det, &input).unwrap().cost;

        let active = det.active_edges();
        let mut up = det.clone();
        up.cable[active[pick.index(active.len())]] = Some(1);
        let after = recourse_cost(&up, &input).unwrap().cost;
        prop_assert!(after <= before + 1e-6 * before.max(1.0), "{after} > {before}");
    }

    #[test]
    fn longer_mtbf_is_cheaper(seed in 0u64..500, n_w in 3usize..7, factor in 1.1f64..20.0) {
        let case = random_case(seed, n_w, 2);
        let ctx = case.context(100);
        let det = solve_deterministic(&ctx, &BackendConfig::enumeration()).unwrap();
        let short = recourse_cost(&det, &ctx.input_for(&det).unwrap()).unwrap().cost;
        let mut longer = ctx.clone();
        longer.failure.mtbf_years_km *= factor;
        let long = recourse_cost(&det, &longer.input_for(&det).unwrap()).unwrap().cost;
        prop_assert!(long <= short + 1e-6 * short.max(1.0));
    }

    #[test]
    fn failure_probability_shape(mtbf in 0.1f64..500.0, mttr in 1.0f64..5000.0, len in 10.0f64..10_000.0) {
        let p = FailureParams { mtbf_years_km: mtbf, mttr_h: mttr };
        let psi = failure_probability(&p, len);
        prop_assert!(psi > 0.0 && psi < 1.0);
        prop_assert!(failure_probability(&p, 2.0 * len) > psi);
        let sturdier = FailureParams { mtbf_years_km: 2.0 * mtbf, ..p };
        prop_assert!(failure_probability(&sturdier, len) < psi);
        let oracle = mttr / (mttr + mtbf * 8760.0 * 1000.0 / len);
        prop_assert!((psi - oracle).abs() < 1e-12);
    }

    #[test]
    fn state_probabilities_sum_to_one(lens in prop::collection::vec(100.0f64..3000.0, 1..40), mtbf in 1.0f64..200.0) {
        let edges: Vec<(usize, f64)> = lens.iter().cloned().enumerate().collect();
        let states = build_system_states(&edges, &FailureParams { mtbf_years_km: mtbf, mttr_h: 720.0 }).unwrap();
        prop_assert_eq!(states.len(), lens.len() + 1);
        let total: f64 = states.iter().map(|s| s.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(states.iter().all(|s| s.probability >= 0.0));
    }
}
