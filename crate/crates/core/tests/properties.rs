//! Invariants over random (n, lambda) points.

use gegenbauer_markov::bounds::{main_bounds, BoundKind, BoundSet, BoundTag};
use gegenbauer_markov::eigen::{default_max_iter, largest_eigenvalue, DEFAULT_TOL};
use gegenbauer_markov::gegenbauer::{build_operator, GegenbauerParam, ProblemSize};
use gegenbauer_markov::verifier::{verify_interlacing, verify_point, Outcome, VerifyConfig};
use proptest::prelude::*;

fn lambda() -> impl Strategy<Value = f64> {
    prop_oneof![-0.499f64..0.0, 0.0f64..3.0, 3.0f64..200.0]
}

fn solve(n: usize, l: f64) -> gegenbauer_markov::eigen::EigenResult {
    let op = build_operator(ProblemSize::new(n).unwrap(), GegenbauerParam::new(l).unwrap()).unwrap();
    largest_eigenvalue(&op, DEFAULT_TOL, default_max_iter(op.dim())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalue_lies_strictly_inside_main_bounds(n in 3usize..600, l in lambda()) {
        let mu = solve(n, l).mu_max;
        let (lo, hi) = main_bounds(n, GegenbauerParam::new(l).unwrap()).unwrap();
        prop_assert!(lo < mu && mu < hi, "{lo} < {mu} < {hi}");
    }

    #[test]
    fn perron_vector_is_positive(n in 1usize..400, l in lambda()) {
        let r = solve(n, l);
        prop_assert!(r.eigenvector.iter().all(|&v| v > 0.0));
        let norm: f64 = r.eigenvector.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(r.residual <= DEFAULT_TOL);
    }

    #[test]
    fn interlacing_chain(m in 1usize..150, l in lambda()) {
        prop_assert_eq!(verify_interlacing(m, l, DEFAULT_TOL).unwrap().outcome, Outcome::Pass);
    }

    #[test]
    fn every_applicable_bound_brackets(n in 3usize..300, l in lambda()) {
        let op = build_operator(ProblemSize::new(n).unwrap(), GegenbauerParam::new(l).unwrap()).unwrap();
        let mu = largest_eigenvalue(&op, DEFAULT_TOL, default_max_iter(op.dim())).unwrap().mu_max;
        for e in BoundSet::compute(&op).unwrap().entries {
            if matches!(e.tag, BoundTag::SchmidtLower | BoundTag::SchmidtUpper) {
                continue;
            }
            match e.kind {
                BoundKind::Lower => prop_assert!(e.value <= mu * (1.0 + 1e-12), "{:?}", e.tag),
                BoundKind::Upper => prop_assert!(mu <= e.value * (1.0 + 1e-12), "{:?}", e.tag),
                BoundKind::Exact => prop_assert!((e.value - mu).abs() <= 1e-10 * mu),
            }
        }
    }

    #[test]
    fn verification_never_fails_away_from_the_schmidt_window(n in 3usize..120, l in lambda()) {
        let r = verify_point(n, l, &VerifyConfig::default()).unwrap();
        prop_assert_eq!(r.outcome, Outcome::Pass, "{:?}", r);
    }
}
