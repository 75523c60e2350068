//! Property tests for the path model, the calculus layer and the
//! inequality margins.

use proptest::prelude::*;

use jumpmart_core::calculus::{quadratic_variation, sde_residual_check, stochastic_exponential};
use jumpmart_core::generators::{gen_path, RngStream};
use jumpmart_core::inequalities::{
    margin_alpha_lambda, margin_log1, margin_log2, margin_pred1, margin_pred2, DEFAULT_REL_TOL,
};
use jumpmart_core::mc;
use jumpmart_core::model::{JumpLaw, ModelSpec};

fn any_model() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (0.1f64..3.0, 0.5f64..2.0)
            .prop_map(|(sigma, h)| ModelSpec::brownian(sigma, h).unwrap()),
        (0.2f64..4.0, 0.1f64..2.0, 0.5f64..2.0).prop_map(|(lam, a, h)| {
            ModelSpec::compensated_poisson(lam, a, h).unwrap()
        }),
        (0.2f64..4.0, 0.1f64..1.5, 0.5f64..2.0).prop_map(|(lam, mean, h)| {
            ModelSpec::compound_poisson_martingale(lam, JumpLaw::Exponential { mean }, h).unwrap()
        }),
        (0.1f64..1.5, 0.05f64..2.0)
            .prop_map(|(a, b)| ModelSpec::stopped_scaled_cpp(a, b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generation_is_reproducible(model in any_model(), seed: u64, rep in 0u64..64) {
        let p1 = gen_path(&model, RngStream::new(seed, rep)).unwrap();
        let p2 = gen_path(&model, RngStream::new(seed, rep)).unwrap();
        prop_assert_eq!(p1, p2);
    }

    #[test]
    fn variations_are_monotone_in_time(model in any_model(), seed: u64, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0) {
        let path = gen_path(&model, RngStream::new(seed, 0)).unwrap();
        let terminal = path.terminal_time();
        let (mut t1, mut t2) = (u1 * terminal, u2 * terminal);
        if t1 > t2 {
            std::mem::swap(&mut t1, &mut t2);
        }
        let v1 = quadratic_variation(&path, t1).unwrap();
        let v2 = quadratic_variation(&path, t2).unwrap();
        prop_assert!(v1.qv <= v2.qv + 1e-12);
        prop_assert!(v1.pqv <= v2.pqv + 1e-12);
        prop_assert!(v1.qv_cont <= v2.qv_cont + 1e-12);
        // ordering inside one report
        prop_assert!(v2.qv >= v2.qv_cont && v2.qv_cont >= 0.0 && v2.pqv >= 0.0);
    }

    #[test]
    fn blend_interpolates_between_variations(model in any_model(), seed: u64, alpha in 0.0f64..1.0) {
        let path = gen_path(&model, RngStream::new(seed, 1)).unwrap();
        let v = quadratic_variation(&path, path.terminal_time()).unwrap();
        prop_assert_eq!(v.blend(1.0), v.qv);
        prop_assert_eq!(v.blend(0.0), v.pqv);
        let blend = v.blend(alpha);
        let (lo, hi) = if v.qv >= v.pqv { (v.pqv, v.qv) } else { (v.qv, v.pqv) };
        prop_assert!(blend >= lo - 1e-12 && blend <= hi + 1e-12);
    }

    #[test]
    fn jumps_are_upward_with_recorded_sizes(model in any_model(), seed: u64) {
        let path = gen_path(&model, RngStream::new(seed, 2)).unwrap();
        for j in &path.jumps {
            let after = path.evaluate(j.time).unwrap();
            let before = path.evaluate((j.time - 1e-9).max(0.0)).unwrap();
            // drift moves the level by at most rate * 1e-9 over the gap
            let drift_slack = path.model.drift_rate() * 1e-9 + 1e-9;
            prop_assert!((after - before - j.size).abs() <= drift_slack);
        }
    }

    #[test]
    fn stopped_hitting_identity(a in 0.1f64..1.5, b in 0.05f64..2.0, seed: u64) {
        let spec = ModelSpec::stopped_scaled_cpp(a, b).unwrap();
        let path = gen_path(&spec, RngStream::new(seed, 3)).unwrap();
        let n = path.jumps.len() as f64;
        let tb = path.stop_time.unwrap();
        prop_assert!((n - (1.0 + b) * tb + 1.0).abs() < 1e-12);
        // terminal value M = a (N - T_b) and the exponential is positive
        let m = path.evaluate(f64::INFINITY).unwrap();
        prop_assert!((m - a * (n - tb)).abs() < 1e-10);
        prop_assert!(stochastic_exponential(&path, f64::INFINITY).unwrap() > 0.0);
    }

    #[test]
    fn sde_residual_tiny_for_pure_jump(seed: u64, lam in 0.5f64..3.0, a in 0.1f64..1.5) {
        let spec = ModelSpec::compensated_poisson(lam, a, 1.0).unwrap();
        let path = gen_path(&spec, RngStream::new(seed, 4)).unwrap();
        prop_assert!(sde_residual_check(&path).unwrap() <= 1e-10);
    }

    #[test]
    fn margins_hold_at_random_points(
        x in 0.0f64..100.0,
        lambda in 0.0f64..1.0,
        a2 in 1.0f64..2.0,
        a_big in 1.0f64..100.0,
        alpha in 0.0f64..1.0,
    ) {
        for m in [
            margin_log1(x, lambda).unwrap(),
            margin_log2(x, a_big).unwrap(),
            margin_pred1(x, lambda).unwrap(),
            margin_pred2(x, a2).unwrap(),
            margin_alpha_lambda(x, lambda, alpha).unwrap(),
        ] {
            prop_assert!(m.holds(DEFAULT_REL_TOL), "violation at {:?}", m);
        }
    }

    #[test]
    fn alpha_one_matches_log1(x in 0.0f64..100.0, lambda in 0.0f64..1.0) {
        let a = margin_alpha_lambda(x, lambda, 1.0).unwrap();
        let l = margin_log1(x, lambda).unwrap();
        let tol = 1e-12 * l.middle.abs().max(1.0);
        prop_assert!((a.middle - l.middle).abs() <= tol);
    }

    #[test]
    fn alpha_bound_tightens_monotonically(x in 0.0f64..50.0, lambda in 0.0f64..1.0) {
        // the upper bound α λ(1-λ)x²/2 stays above the middle across α
        for i in 0..=10 {
            let alpha = i as f64 / 10.0;
            let m = margin_alpha_lambda(x, lambda, alpha).unwrap();
            prop_assert!(m.upper_margin >= -DEFAULT_REL_TOL * m.middle.abs().max(1.0));
        }
    }
}

#[test]
fn compensated_poisson_qv_minus_pqv_is_centered() {
    // E([M]_t - <M>_t) = 0; Monte Carlo mean within 3 SE at t = 1
    let spec = ModelSpec::compensated_poisson(1.0, 1.0, 1.0).unwrap();
    let n = 100_000u64;
    let values = mc::run_replications(n, 2024, |stream| {
        let path = gen_path(&spec, stream).unwrap();
        let v = quadratic_variation(&path, 1.0).unwrap();
        v.qv - v.pqv
    });
    let est = mc::estimate_mean(&values, 2024, 0.99).unwrap();
    assert!(
        est.mean.abs() <= 3.0 * est.std_error,
        "mean {} se {}",
        est.mean,
        est.std_error
    );
}

#[test]
fn paths_are_identical_across_thread_counts() {
    let spec = ModelSpec::stopped_scaled_cpp(0.5, 0.4).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                mc::run_replications(20_000, 99, |stream| {
                    gen_path(&spec, stream).unwrap().terminal_value()
                })
            })
    };
    let a = run(1);
    let b = run(4);
    let c = run(8);
    assert_eq!(a, b);
    assert_eq!(b, c);
}
