//! Property tests for the numerical substrate and the algebraic estimator
//! identities.

use proptest::prelude::*;
use slt_thermo::matrix::Matrix;
use slt_thermo::model::transform::simplex2;
use slt_thermo::model::{ModelId, ProbeId};
use slt_thermo::sampler::PosteriorSamples;
use slt_thermo::stats::{
    discrete_entropy, log_grid_derivative, sample_covariance, sample_variance, Series,
};
use slt_thermo::thermo::{nu_loglik, p_waic, NuMode};
use std::collections::BTreeMap;

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, len)
}

proptest! {
    #[test]
    fn variance_nonnegative_and_zero_iff_constant(v in finite_vec(2..40)) {
        let s = Series::new("x", v.clone()).unwrap();
        let var = sample_variance(&s).unwrap();
        prop_assert!(var >= 0.0);
        let constant = v.iter().all(|&x| x == v[0]);
        if constant {
            prop_assert_eq!(var, 0.0);
        }
        if var == 0.0 {
            prop_assert!(constant);
        }
    }

    #[test]
    fn covariance_with_self_equals_variance(v in finite_vec(2..40)) {
        let s = Series::new("x", v).unwrap();
        prop_assert_eq!(
            sample_covariance(&s, &s).unwrap(),
            sample_variance(&s).unwrap()
        );
    }

    #[test]
    fn entropy_permutation_invariant_and_bounded(
        counts in prop::collection::vec(0u64..1000, 1..12),
        seed in 0u64..1000,
    ) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let h = discrete_entropy(&counts).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (counts.len() as f64).ln() + 1e-12);
        let mut shuffled = counts.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        // invariant up to float summation order
        prop_assert!((h - discrete_entropy(&shuffled).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn uniform_counts_attain_log_k(k in 1usize..24, c in 1u64..500) {
        let h = discrete_entropy(&vec![c; k]).unwrap();
        prop_assert!((h - (k as f64).ln()).abs() < 1e-10);
    }

    #[test]
    fn log_grid_derivative_of_constant_is_zero(
        start in 0.01f64..10.0,
        ratio in 1.1f64..3.0,
        len in 2usize..12,
        level in -5.0f64..5.0,
    ) {
        let grid: Vec<f64> = (0..len).map(|i| start * ratio.powi(i as i32)).collect();
        let g = Series::new("g", grid).unwrap();
        let f = Series::new("f", vec![level; len]).unwrap();
        let d = log_grid_derivative(&g, &f).unwrap();
        prop_assert_eq!(d.len(), len);
        prop_assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn waic_is_exactly_twice_nu(rows in prop::collection::vec(finite_vec(3..8), 100..140)) {
        let cols = rows.iter().map(|r| r.len()).min().unwrap();
        let trimmed: Vec<Vec<f64>> = rows.iter().map(|r| r[..cols].to_vec()).collect();
        let s = trimmed.len();
        let samples = PosteriorSamples {
            model_id: ModelId::GaussianControl,
            draws_unconstrained: Matrix::zeros(s, 1),
            pointwise_loglik: Matrix::from_rows(trimmed, cols),
            log_prior_series: vec![0.0; s],
            probe_series: BTreeMap::from([(ProbeId::Location, vec![0.0; s])]),
            beta: 1.0,
            h: 0.0,
            temper_prior: true,
            chain_index: (0..s).map(|i| (i % 4) as u32).collect(),
            accept_rate: 0.5,
            divergences: 0,
            flags: vec![],
        };
        let p = p_waic(&samples).unwrap();
        let nu = nu_loglik(&samples, NuMode::SumPointwise).unwrap();
        prop_assert_eq!(p, 2.0 * nu);
        let vs = nu_loglik(&samples, NuMode::VarianceOfSum).unwrap();
        let mn = nu_loglik(&samples, NuMode::MeanNormalized).unwrap();
        prop_assert_eq!(mn, vs / (cols * cols) as f64);
        prop_assert!(vs >= 0.0);
    }

    #[test]
    fn stick_breaking_stays_on_simplex(t in -40.0f64..40.0) {
        let (w1, w2, lj) = simplex2(t);
        prop_assert!(w1 > 0.0 && w2 > 0.0);
        prop_assert!((w1 + w2 - 1.0).abs() < 1e-14);
        prop_assert!(lj.is_finite());
    }

    #[test]
    fn series_rejects_non_finite(v in finite_vec(1..10), idx in 0usize..10) {
        let mut bad = v.clone();
        let k = idx % bad.len();
        bad[k] = f64::NAN;
        prop_assert!(Series::new("bad", bad).is_err());
        let mut inf = v.clone();
        let k = idx % inf.len();
        inf[k] = f64::INFINITY;
        prop_assert!(Series::new("inf", inf).is_err());
    }
}
