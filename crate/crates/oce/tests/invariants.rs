//! Property tests for the structural invariants of the special functions,
//! the graph layer and the model algebra.

use nalgebra::DMatrix;
use oce::effects::{oce_closed_form, Policy};
use oce::intervene::{post_intervention_adjustment, post_intervention_mutilated};
use oce::oracle::oracle_oce;
use oce::rng::RngHandle;
use oce::simulate::{discretise, random_dag, random_model, sample_latent, SynthConfig};
use oce::special::{bvn_cdf, owen_t, std_normal_cdf, TruncatedNormal};
use proptest::prelude::*;

fn small_model(seed: u64, nodes: usize) -> oce::LatentDagModel {
    let cfg = SynthConfig {
        nodes,
        expected_neighbors: (nodes as f64 / 2.0).min(3.0),
        ..SynthConfig::default()
    };
    random_model(&cfg, &mut RngHandle::new(seed).rng()).unwrap()
}

proptest! {
    #[test]
    fn owen_t_sign_symmetries(h in -8.0f64..8.0, a in -40.0f64..40.0) {
        let t = owen_t(h, a).unwrap();
        prop_assert!((owen_t(-h, a).unwrap() - t).abs() <= 1e-14);
        prop_assert!((owen_t(h, -a).unwrap() + t).abs() <= 1e-14);
    }

    #[test]
    fn bvn_rectangle_nonnegative(
        h1 in -4.0f64..3.9,
        dh in 0.01f64..2.0,
        k1 in -4.0f64..3.9,
        dk in 0.01f64..2.0,
        rho in -0.999f64..0.999,
    ) {
        let (h2, k2) = (h1 + dh, k1 + dk);
        let rect = bvn_cdf(h2, k2, rho).unwrap() - bvn_cdf(h1, k2, rho).unwrap()
            - bvn_cdf(h2, k1, rho).unwrap()
            + bvn_cdf(h1, k1, rho).unwrap();
        prop_assert!(rect >= -1e-12, "rect = {rect}");
    }

    #[test]
    fn bvn_monotone_and_bounded(
        h in -5.0f64..5.0,
        k in -5.0f64..5.0,
        rho in -1.0f64..1.0,
        step in 0.01f64..1.0,
    ) {
        let v = bvn_cdf(h, k, rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(bvn_cdf(h + step, k, rho).unwrap() >= v - 1e-13);
        prop_assert!(bvn_cdf(h, k + step, rho).unwrap() >= v - 1e-13);
        // marginal limit
        let marginal = bvn_cdf(h, f64::INFINITY, rho).unwrap();
        prop_assert!((marginal - std_normal_cdf(h)).abs() <= 1e-15);
    }

    #[test]
    fn truncated_quantile_roundtrip(
        mu in -2.0f64..2.0,
        sigma in 0.1f64..3.0,
        lo in -6.0f64..5.0,
        width in 0.05f64..6.0,
        p in 0.001f64..0.999,
    ) {
        // bands far in a tail are rejected as degenerate; skip those draws
        let Ok(tn) = TruncatedNormal::new(mu, sigma, lo, lo + width) else {
            return Ok(());
        };
        let x = tn.quantile(p).unwrap();
        prop_assert!((tn.cdf(x) - p).abs() <= 1e-9, "x = {x}, cdf = {}", tn.cdf(x));
        prop_assert!(x >= tn.lower() && x <= tn.upper());
    }

    #[test]
    fn random_dag_is_valid_and_ordered(seed in any::<u64>(), n in 2usize..16) {
        let dag = random_dag(n, ((n - 1) as f64 / 2.0).max(0.5), &mut RngHandle::new(seed).rng()).unwrap();
        let order = dag.topological_order();
        let mut pos = vec![0usize; n + 1];
        for (idx, &node) in order.iter().enumerate() {
            pos[node] = idx;
        }
        for (h, j) in dag.edges() {
            prop_assert!(pos[h] < pos[j]);
        }
    }

    #[test]
    fn reconstruction_and_standardization(seed in any::<u64>()) {
        let model = small_model(seed, 6);
        let bundle = model.covariance().unwrap();
        let n = model.node_count();
        let residual = (DMatrix::identity(n, n) - model.coefficient_matrix()) * &bundle.w
            - DMatrix::identity(n, n);
        prop_assert!(residual.abs().max() < 1e-12);
        let std = model.standardize().unwrap();
        let std_bundle = std.covariance().unwrap();
        for m in 0..n {
            prop_assert!((std_bundle.sigma[(m, m)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn post_intervention_affinity(seed in any::<u64>(), y1 in -3.0f64..3.0, y2 in -3.0f64..3.0) {
        let model = small_model(seed, 7);
        let bundle = model.covariance().unwrap();
        let (i, o) = (1, model.node_count());
        if i == o { return Ok(()); }
        let d1 = post_intervention_mutilated(&model, i, o, y1).unwrap();
        let d2 = post_intervention_mutilated(&model, i, o, y2).unwrap();
        let w = bundle.total_effect(i, o);
        prop_assert!((d2.mu_do - d1.mu_do - w * (y2 - y1)).abs() < 1e-12);
        prop_assert_eq!(d1.var_do, d2.var_do);
    }

    #[test]
    fn adjustment_equals_mutilated_property(seed in any::<u64>(), y in -2.5f64..2.5) {
        let model = small_model(seed, 8);
        let n = model.node_count();
        let i = 1 + (seed % n as u64) as usize;
        let o = 1 + ((seed >> 8) % n as u64) as usize;
        if i == o { return Ok(()); }
        let a = post_intervention_adjustment(&model, i, o, y).unwrap();
        let b = post_intervention_mutilated(&model, i, o, y).unwrap();
        prop_assert!((a.mu_do - b.mu_do).abs() < 1e-10);
        prop_assert!((a.var_do - b.var_do).abs() < 1e-10);
    }

    #[test]
    fn discretise_is_monotone(seed in any::<u64>()) {
        let model = small_model(seed, 4);
        let latent = sample_latent(&model, 64, &mut RngHandle::new(seed ^ 0xabcd).rng());
        let data = discretise(&latent, &model).unwrap();
        for m in 1..=model.node_count() {
            let mut pairs: Vec<(f64, u32)> =
                (0..64).map(|r| (latent[(r, m - 1)], data.level(r, m))).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in pairs.windows(2) {
                prop_assert!(w[0].1 <= w[1].1);
            }
        }
    }
}

#[test]
fn bvn_approaches_degenerate_bounds() {
    // near |rho| = 1 the distribution function must stay inside the
    // comonotone/antimonotone bounds and converge to them
    for &(h, k) in &[(0.3f64, -0.2), (1.5, 1.4), (-2.0, 0.5)] {
        let upper = std_normal_cdf(h.min(k));
        let mut last = 0.0;
        for &rho in &[0.9, 0.99, 0.999, 0.9999, 0.999999, 1.0 - 1e-9, 1.0] {
            let v = bvn_cdf(h, k, rho).unwrap();
            assert!(v <= upper + 1e-12, "h={h} k={k} rho={rho}: {v} > {upper}");
            assert!(v >= last - 1e-9, "rho-monotonicity broke at {rho}");
            last = v;
        }
        assert!((last - upper).abs() < 1e-12);
        let lower = (std_normal_cdf(h) + std_normal_cdf(k) - 1.0).max(0.0);
        let v = bvn_cdf(h, k, -(1.0 - 1e-9)).unwrap();
        assert!(
            (v - lower).abs() < 1e-4,
            "h={h} k={k}: {v} vs lower {lower}"
        );
    }
}

#[test]
fn oracle_values_sum_to_zero_and_stay_bounded() {
    for seed in 0..8u64 {
        let model = small_model(seed.wrapping_add(900), 5);
        let (i, o) = (1usize, 5usize);
        let est = oracle_oce(
            &model,
            i,
            o,
            1,
            model.levels(i),
            Policy::TruncatedNormal,
            20_000,
            &RngHandle::new(seed),
        )
        .unwrap();
        let int_sum: i64 = est
            .to_counts
            .iter()
            .zip(&est.from_counts)
            .map(|(&t, &f)| t as i64 - f as i64)
            .sum();
        assert_eq!(int_sum, 0);
        assert!(est.value.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}

#[test]
fn estimated_oce_tables_converge_to_truth() {
    // generate-then-fit at N = 1e5: every estimated effect entry lands
    // within 0.05 of the closed form under the true parameters
    let truth = small_model(777, 6);
    let latent = sample_latent(&truth, 100_000, &mut RngHandle::new(778).rng());
    let data = discretise(&latent, &truth).unwrap();
    let (fitted, _) = oce::estimate::fit_model(&data, truth.dag()).unwrap();
    for i in 1..=6usize {
        for o in 1..=6usize {
            if i == o {
                continue;
            }
            let a = oce_closed_form(&truth, i, o, 1, truth.levels(i)).unwrap();
            let b = oce_closed_form(&fitted, i, o, 1, truth.levels(i)).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 0.05, "({i},{o}): {x} vs {y}");
            }
        }
    }
}

#[test]
fn closed_form_tables_bounded_on_random_models() {
    for seed in 0..20u64 {
        let model = small_model(seed.wrapping_add(300), 6);
        for o in 2..=6usize {
            let table = oce_closed_form(&model, 1, o, 1, model.levels(1)).unwrap();
            for v in &table.values {
                assert!((-1.0..=1.0).contains(v), "seed {seed}, o {o}: {v}");
            }
        }
    }
}
