//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Stochastic criteria run on the documented default
//! configurations and seeds, so the suite is deterministic on one platform.
//!
//! Run with `cargo test -p slt-thermo-cli --test acceptance -- --nocapture`.

use slt_thermo::math::mean;
use slt_thermo::model::{build_model, GaussianControl, Model, ModelId, ModelSpec, ProbeId};
use slt_thermo::rng::SeededRng;
use slt_thermo::sampler::{effective_sample_size, sample_posterior, SamplerConfig};
use slt_thermo::scan::{beta_scan, correlation_report, eos_scaling, field_response, n_scan};
use slt_thermo::stats::variance_slice as variance;
use slt_thermo::thermo::{self, NuMode};
use slt_thermo_cli::config::{parse_config, ExperimentConfig};

fn verdict(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!("ACCEPTANCE {id} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn exp_config(experiment: &str) -> ExperimentConfig {
    parse_config(&format!(r#"{{"experiment":"{experiment}"}}"#)).expect("default config parses")
}

fn sampler_with_seed(cfg: &ExperimentConfig) -> SamplerConfig {
    let mut s = cfg.sampler.clone();
    s.seed = cfg.seed;
    s
}

/// 1. WAIC identity: p_waic = 2·ν̂(sum_pointwise) on the same samples, for
///    every model in the zoo at β = 1, to 1e−12 relative error.
#[test]
fn criterion_1_waic_identity() {
    let mut worst: f64 = 0.0;
    for model_id in [
        ModelId::DiscreteSymmetry,
        ModelId::BoundaryMixture,
        ModelId::GaugeRank1,
        ModelId::ReluSingle,
        ModelId::ReluMulti,
        ModelId::GaussianControl,
    ] {
        let spec = ModelSpec::new(model_id);
        let model = build_model(&spec).unwrap();
        let data = model.generate_data(40, &mut SeededRng::derive(1, &[model_id as u64]));
        let cfg = SamplerConfig { seed: 11, warmup: 200, draws: 150, ..Default::default() };
        let samples = sample_posterior(model.as_ref(), &data, 1.0, 0.0, None, &cfg).unwrap();
        let p = thermo::p_waic(&samples).unwrap();
        let nu = thermo::nu_loglik(&samples, NuMode::SumPointwise).unwrap();
        let rel = (p - 2.0 * nu).abs() / p.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    let pass = verdict(1, "waic_identity", worst <= 1e-12, &format!("max rel err {worst:.2e}"));
    assert!(pass);
}

/// 2. Table reproduction: the default branch-symmetry sample-size scan at
///    β = 1 matches the reference ν̂ / branch-entropy values and the median
///    identifiable error decreases strictly, for at least 2 of 3 consecutive
///    seeds starting at the experiment's default seed.
#[test]
fn criterion_2_table_reproduction() {
    let nu_target = [0.56, 0.55, 0.48, 0.48];
    let h_target = [0.692, 0.693, 0.693, 0.562];
    let base = exp_config("exp1");
    let mut seed_passes = 0;
    for seed in slt_thermo_cli::config::EXP1_REPLICATION_SEEDS {
        let mut cfg = base.clone();
        cfg.seed = seed;
        let sampler = sampler_with_seed(&cfg);
        let scan =
            n_scan(&cfg.model, &cfg.n_grid, 1.0, &cfg.probes, &sampler, cfg.nu_mode, false)
                .unwrap();
        let mut ok = scan.complete();
        let mut med = Vec::new();
        for (i, report) in scan.reports.iter().enumerate() {
            let r = report.as_ref().unwrap();
            let nu = r.nu_loglik;
            let h = r.active_set_entropy["branch_sign"];
            med.push(r.extras["median_delta"]);
            if (nu - nu_target[i]).abs() > 0.15 || (h - h_target[i]).abs() > 0.10 {
                ok = false;
            }
        }
        if !med.windows(2).all(|w| w[1] < w[0]) {
            ok = false;
        }
        println!(
            "  seed {}: nu = {:?}, H = {:?}, median_delta = {:?} -> {}",
            cfg.seed,
            scan.reports.iter().map(|r| r.as_ref().unwrap().nu_loglik).collect::<Vec<_>>(),
            scan.reports
                .iter()
                .map(|r| r.as_ref().unwrap().active_set_entropy["branch_sign"])
                .collect::<Vec<_>>(),
            med,
            if ok { "pass" } else { "fail" }
        );
        if ok {
            seed_passes += 1;
        }
    }
    let pass =
        verdict(2, "table_exp1_reproduction", seed_passes >= 2, &format!("{seed_passes}/3 seeds"));
    assert!(pass);
}

/// 3. Regular-model oracle: the Gaussian control at n = 1000, β = 1 gives
///    ν̂ in [0.4, 0.6], p_WAIC in [0.8, 1.2], and posterior mean/variance
///    matching the conjugate closed form (3 MCSE / 10%).
#[test]
fn criterion_3_regular_model_oracle() {
    let spec = ModelSpec::new(ModelId::GaussianControl);
    let model = build_model(&spec).unwrap();
    let data = model.generate_data(1000, &mut SeededRng::derive(42, &[3]));
    let cfg = SamplerConfig { seed: 42, ..Default::default() };
    let samples = sample_posterior(model.as_ref(), &data, 1.0, 0.0, None, &cfg).unwrap();

    let nu = thermo::nu_loglik(&samples, NuMode::SumPointwise).unwrap();
    let p = thermo::p_waic(&samples).unwrap();

    let gaussian = GaussianControl::from_spec(&spec).unwrap();
    let (m_n, v_n) = gaussian.conjugate_posterior(&data, 1.0, true);
    let draws = samples.probe(ProbeId::Location).unwrap();
    let ess = effective_sample_size(draws, &samples.chain_index).unwrap().ess;
    let mean_err = (mean(draws) - m_n).abs();
    let mean_ok = mean_err <= 3.0 * (v_n / ess).sqrt();
    let var_hat = variance(draws).unwrap();
    let var_ok = (var_hat - v_n).abs() <= 0.1 * v_n;

    let pass = verdict(
        3,
        "regular_model_oracle",
        (0.4..=0.6).contains(&nu) && (0.8..=1.2).contains(&p) && mean_ok && var_ok,
        &format!("nu {nu:.3}, p_waic {p:.3}, |mean err| {mean_err:.2e}, var {var_hat:.2e} vs {v_n:.2e}"),
    );
    assert!(pass);
}

/// 4. Grid-quadrature oracle: on the bounded one-parameter model, every
///    estimator agrees with 10⁵-point quadrature truth within 3 Monte Carlo
///    standard errors (block means over chains).
#[test]
fn criterion_4_grid_quadrature_oracle() {
    const POINTS: usize = 100_000;
    let spec = ModelSpec::new(ModelId::DiscreteSymmetry);
    let model = build_model(&spec).unwrap();
    let n = 10;
    let data = model.generate_data(n, &mut SeededRng::derive(404, &[1]));

    // quadrature over [-10, 10]
    let step = 20.0 / (POINTS - 1) as f64;
    let mut mu = Vec::with_capacity(POINTS);
    let mut logp = Vec::with_capacity(POINTS);
    let mut terms = Vec::with_capacity(POINTS);
    let mut prior = Vec::with_capacity(POINTS);
    for i in 0..POINTS {
        let m = -10.0 + step * i as f64;
        let pv = model.constrain(&[m]);
        let t = model.loglik_terms(&pv, &data).unwrap();
        let lp = model.log_prior(&pv).unwrap();
        logp.push(lp + t.iter().sum::<f64>());
        mu.push(m);
        terms.push(t);
        prior.push(lp);
    }
    let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let expect = |f: &dyn Fn(usize) -> f64| -> f64 { (0..POINTS).map(|i| w[i] * f(i)).sum() };
    let var_q = |f: &dyn Fn(usize) -> f64| -> f64 {
        let m = expect(f);
        expect(&|i| (f(i) - m) * (f(i) - m))
    };
    let cov_q = |f: &dyn Fn(usize) -> f64, g: &dyn Fn(usize) -> f64| -> f64 {
        let mf = expect(f);
        let mg = expect(g);
        expect(&|i| (f(i) - mf) * (g(i) - mg))
    };

    let cfg = SamplerConfig { seed: 505, draws: 2500, ..Default::default() };
    let samples = sample_posterior(model.as_ref(), &data, 1.0, 0.0, None, &cfg).unwrap();

    // block standard errors: 5 contiguous blocks per chain
    let block_se = |est: &dyn Fn(std::ops::Range<usize>) -> f64| -> f64 {
        let chains = 4;
        let per = samples.size() / chains;
        let bl = per / 5;
        let mut vals = Vec::new();
        for c in 0..chains {
            for b in 0..5 {
                let start = c * per + b * bl;
                vals.push(est(start..start + bl));
            }
        }
        let m = mean(&vals);
        let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (vals.len() - 1) as f64;
        (v / vals.len() as f64).sqrt()
    };
    let col = |j: usize, r: std::ops::Range<usize>| -> Vec<f64> {
        r.map(|i| samples.pointwise_loglik.get(i, j)).collect()
    };
    let series = samples.probe(ProbeId::Location).unwrap();
    let sums = samples.loglik_sums();
    let priors = &samples.log_prior_series;

    let mut failures = Vec::new();
    let mut check = |name: &str, estimate: f64, truth: f64, se: f64| {
        let ok = (estimate - truth).abs() <= 3.0 * se + 1e-9;
        println!("  {name:20} est {estimate:+.5} truth {truth:+.5} 3se {:.2e} {}", 3.0 * se, if ok { "ok" } else { "FAIL" });
        if !ok {
            failures.push(name.to_string());
        }
    };

    let nu_sp = thermo::nu_loglik(&samples, NuMode::SumPointwise).unwrap();
    let nu_sp_t: f64 = 0.5 * (0..n).map(|j| var_q(&|i| terms[i][j])).sum::<f64>();
    let nu_sp_est = |r: std::ops::Range<usize>| -> f64 {
        0.5 * (0..n).map(|j| variance(&col(j, r.clone())).unwrap()).sum::<f64>()
    };
    check("nu_sum_pointwise", nu_sp, nu_sp_t, block_se(&nu_sp_est));

    let nu_vs = thermo::nu_loglik(&samples, NuMode::VarianceOfSum).unwrap();
    let sum_f = |i: usize| terms[i].iter().sum::<f64>();
    check(
        "nu_variance_of_sum",
        nu_vs,
        0.5 * var_q(&sum_f),
        block_se(&|r| 0.5 * variance(&sums[r]).unwrap()),
    );
    check(
        "nu_mean_normalized",
        thermo::nu_loglik(&samples, NuMode::MeanNormalized).unwrap(),
        0.5 * var_q(&sum_f) / (n * n) as f64,
        block_se(&|r| 0.5 * variance(&sums[r]).unwrap() / (n * n) as f64),
    );
    check("p_waic", thermo::p_waic(&samples).unwrap(), 2.0 * nu_sp_t, 2.0 * block_se(&nu_sp_est));
    check(
        "chi_pi_cov",
        thermo::chi_pi(&samples, ProbeId::Location, false).unwrap(),
        cov_q(&|i| mu[i], &|i| prior[i]),
        block_se(&|r| {
            slt_thermo::stats::covariance_slice(&series[r.clone()], &priors[r]).unwrap()
        }),
    );
    check(
        "chi_pi_normalized",
        thermo::chi_pi(&samples, ProbeId::Location, true).unwrap(),
        cov_q(&|i| mu[i], &|i| prior[i]) / var_q(&|i| mu[i]),
        block_se(&|r| {
            slt_thermo::stats::covariance_slice(&series[r.clone()], &priors[r.clone()]).unwrap()
                / variance(&series[r]).unwrap()
        }),
    );
    check(
        "chi_pi_var",
        thermo::chi_pi_var(&samples, ProbeId::Location).unwrap(),
        var_q(&|i| mu[i]),
        block_se(&|r| variance(&series[r]).unwrap()),
    );
    check(
        "chi_beta_h",
        thermo::chi_beta_h(&samples, ProbeId::Location).unwrap(),
        cov_q(&|i| mu[i], &sum_f) / n as f64,
        block_se(&|r| {
            slt_thermo::stats::covariance_slice(&series[r.clone()], &sums[r]).unwrap()
                / n as f64
        }),
    );
    let p_plus = expect(&|i| if mu[i] >= 0.0 { 1.0 } else { 0.0 });
    check(
        "active_set_entropy",
        thermo::active_set_entropy(&samples, ProbeId::BranchSign).unwrap(),
        -(p_plus * p_plus.ln() + (1.0 - p_plus) * (1.0 - p_plus).ln()),
        block_se(&|r| {
            let plus = series[r.clone()].iter().filter(|&&v| v >= 0.0).count() as u64;
            let minus = r.len() as u64 - plus;
            slt_thermo::stats::discrete_entropy(&[plus, minus]).unwrap_or(0.0)
        }),
    );
    check(
        "gibbs_train_loss",
        thermo::gibbs_losses(&samples, model.as_ref(), None).unwrap().0,
        -expect(&sum_f) / n as f64,
        block_se(&|r| -mean(&sums[r]) / n as f64),
    );

    let pass = verdict(
        4,
        "grid_quadrature_oracle",
        failures.is_empty(),
        &format!("{} estimator checks, failures: {failures:?}", 10),
    );
    assert!(pass);
}

/// 5. Linear response: Gaussian location probe R² ≥ 0.95; mixture
///    separation probe R² ≥ 0.7 and min-weight probe strictly lower.
#[test]
fn criterion_5_linear_response() {
    // diffuse tempered Gaussian: large Var₀ so the linear signal dominates
    let g_spec = ModelSpec::new(ModelId::GaussianControl);
    let g_model = build_model(&g_spec).unwrap();
    let g_data = g_model.generate_data(2, &mut SeededRng::derive(23, &[3]));
    let h_grid = [-0.1, -0.05, -0.02, 0.0, 0.02, 0.05, 0.1];
    let g_cfg = SamplerConfig { seed: 29, draws: 48_000, ..Default::default() };
    let g_fr = field_response(&g_spec, &g_data, 0.5, ProbeId::Location, &h_grid, &g_cfg).unwrap();

    let cfg = exp_config("exp5");
    let sampler = sampler_with_seed(&cfg);
    let model = build_model(&cfg.model).unwrap();
    let mut rng = SeededRng::derive(cfg.seed, &[0x6669_7864, cfg.data_n as u64]);
    let data = model.generate_data(cfg.data_n, &mut rng);
    let sep = field_response(&cfg.model, &data, 1.0, ProbeId::Separation, &cfg.h_grid, &sampler)
        .unwrap();
    let wmin = field_response(&cfg.model, &data, 1.0, ProbeId::MinWeight, &cfg.h_grid, &sampler)
        .unwrap();

    let pass = verdict(
        5,
        "linear_response",
        g_fr.r_squared >= 0.95 && sep.r_squared >= 0.7 && wmin.r_squared < sep.r_squared,
        &format!(
            "gaussian r2 {:.3}, separation r2 {:.3}, min_weight r2 {:.3}",
            g_fr.r_squared, sep.r_squared, wmin.r_squared
        ),
    );
    assert!(pass);
}

/// 6. EOS scaling: log-log slope of the replicate-mean gap over
///    n ∈ {50..800} in [−1.3, −0.7] and ratio-series CoV ≤ 0.5 for the four
///    canonical models plus the control.
///
/// The train-side realization noise of the Gibbs gap scales as
/// Var(ℓ)^½·n^{−1/2} while the gap itself is O(1/n), so at desk-scale
/// replicate counts the large-n points are noise-dominated; see the run
/// output for per-point gap ± se.
#[test]
fn criterion_6_eos_scaling() {
    let cfg = exp_config("exp6");
    let sampler = sampler_with_seed(&cfg);
    let mut all_ok = true;
    let mut detail = Vec::new();
    for spec in slt_thermo_cli::experiments::eos_model_set() {
        let s = eos_scaling(&spec, &cfg.n_grid, 1.0, &sampler, cfg.nu_mode, cfg.eos_replicates)
            .unwrap();
        for (i, &n) in s.n_grid.iter().enumerate() {
            println!(
                "  {} n={n}: gap {:+.5} +- {:.5} (nu {:.3}, ratio {:+.2})",
                s.model, s.mean_gap[i], s.gap_se[i], s.mean_nu[i], s.ratio[i]
            );
        }
        let slope_ok = s.slope.map(|v| (-1.3..=-0.7).contains(&v)).unwrap_or(false);
        let cv_ok = s.ratio_cv.map(|v| v <= 0.5).unwrap_or(false);
        detail.push(format!("{}: slope {:?} cv {:?}", s.model, s.slope, s.ratio_cv));
        if !(slope_ok && cv_ok) {
            all_ok = false;
        }
    }
    let pass = verdict(6, "eos_scaling", all_ok, &detail.join("; "));
    assert!(pass);
}

/// 7. Symmetry signatures: single-unit sign entropy collapses at the largest
///    n and β; gauge variance persists (decay ratio ≥ 0.25); multi-unit sign
///    entropy crosses 0.1 nats strictly before permutation entropy.
#[test]
fn criterion_7_symmetry_signatures() {
    // exp4: sign entropy at the largest n and the largest β
    let cfg4 = exp_config("exp4");
    let sampler4 = sampler_with_seed(&cfg4);
    let scan_n =
        n_scan(&cfg4.model, &cfg4.n_grid, 1.0, &cfg4.probes, &sampler4, cfg4.nu_mode, false)
            .unwrap();
    let h_last_n = scan_n.reports.last().unwrap().as_ref().unwrap().active_set_entropy
        ["slope_sign"];
    let model4 = build_model(&cfg4.model).unwrap();
    let mut rng4 = SeededRng::derive(cfg4.seed, &[0x6669_7864, cfg4.data_n as u64]);
    let data4 = model4.generate_data(cfg4.data_n, &mut rng4);
    let scan_b = beta_scan(&cfg4.model, &data4, &cfg4.beta_grid, &cfg4.probes, &sampler4, cfg4.nu_mode)
        .unwrap();
    let h_last_b = scan_b.reports.last().unwrap().as_ref().unwrap().active_set_entropy
        ["slope_sign"];

    // exp3: slow contraction of the gauge coordinate's variance
    let cfg3 = exp_config("exp3");
    let sampler3 = sampler_with_seed(&cfg3);
    let scan3 =
        n_scan(&cfg3.model, &cfg3.n_grid, 1.0, &cfg3.probes, &sampler3, cfg3.nu_mode, false)
            .unwrap();
    let var_s: Vec<f64> = scan3
        .reports
        .iter()
        .map(|r| r.as_ref().unwrap().chi_pi_var["gauge_coordinate"])
        .collect();
    let decay_ratio = var_s.last().unwrap() / var_s.first().unwrap();

    // exp10: sign configuration collapses strictly before the permutation code
    let cfg10 = exp_config("exp10");
    let sampler10 = sampler_with_seed(&cfg10);
    let scan10 =
        n_scan(&cfg10.model, &cfg10.n_grid, 1.0, &cfg10.probes, &sampler10, cfg10.nu_mode, false)
            .unwrap();
    let crossing = |probe: &str| -> Option<usize> {
        scan10
            .reports
            .iter()
            .position(|r| r.as_ref().unwrap().active_set_entropy[probe] < 0.1)
    };
    let sign_cross = crossing("sign_configuration");
    let perm_cross = crossing("permutation_index");
    let crossing_ok = match (sign_cross, perm_cross) {
        (Some(s), Some(p)) => s < p,
        (Some(_), None) => true,
        _ => false,
    };

    let pass = verdict(
        7,
        "symmetry_signatures",
        h_last_n < 0.1 && h_last_b < 0.1 && decay_ratio >= 0.25 && crossing_ok,
        &format!(
            "sign H(max n) {h_last_n:.3}, H(max beta) {h_last_b:.3}, gauge decay {decay_ratio:.3}, crossings sign {sign_cross:?} perm {perm_cross:?}"
        ),
    );
    assert!(pass);
}

/// 8. Property suite: the module invariants run as part of this workspace's
///    test targets; this criterion re-asserts the cross-cutting ones in one
///    place (identity, bounds, determinism, tempering).
#[test]
fn criterion_8_property_suite() {
    let mut ok = true;
    let mut notes = Vec::new();

    // WAIC identity + entropy bounds on a live multi-probe run
    let spec = ModelSpec::new(ModelId::ReluMulti);
    let model = build_model(&spec).unwrap();
    let data = model.generate_data(60, &mut SeededRng::derive(8, &[1]));
    let cfg = SamplerConfig { seed: 9, warmup: 400, draws: 400, ..Default::default() };
    let samples = sample_posterior(model.as_ref(), &data, 1.0, 0.0, None, &cfg).unwrap();
    let p = thermo::p_waic(&samples).unwrap();
    let nu = thermo::nu_loglik(&samples, NuMode::SumPointwise).unwrap();
    if (p - 2.0 * nu).abs() > 1e-12 * p {
        ok = false;
        notes.push("waic identity".to_string());
    }
    for &probe in model.probes() {
        let h = thermo::active_set_entropy(&samples, probe).unwrap();
        let bound = (model.probe_levels(probe).unwrap() as f64).ln();
        if !(0.0..=bound + 1e-12).contains(&h) {
            ok = false;
            notes.push(format!("entropy bound {probe:?}"));
        }
    }

    // scan determinism: identical config -> identical result
    let dspec = ModelSpec::new(ModelId::DiscreteSymmetry);
    let dcfg = SamplerConfig { seed: 10, warmup: 200, draws: 200, ..Default::default() };
    let probes = [ProbeId::BranchSign, ProbeId::Location];
    let a = n_scan(&dspec, &[20, 40], 1.0, &probes, &dcfg, NuMode::SumPointwise, false).unwrap();
    let b = n_scan(&dspec, &[20, 40], 1.0, &probes, &dcfg, NuMode::SumPointwise, false).unwrap();
    if a != b {
        ok = false;
        notes.push("scan determinism".to_string());
    }

    // tempering contract on the control
    let gspec = ModelSpec::new(ModelId::GaussianControl);
    let gmodel = build_model(&gspec).unwrap();
    let gdata = gmodel.generate_data(40, &mut SeededRng::derive(13, &[2]));
    let mut scaled = Vec::new();
    for (i, beta) in [0.25, 1.0, 4.0].into_iter().enumerate() {
        let cfg = SamplerConfig { seed: 31 + i as u64, ..Default::default() };
        let s = sample_posterior(gmodel.as_ref(), &gdata, beta, 0.0, None, &cfg).unwrap();
        scaled.push(variance(s.probe(ProbeId::Location).unwrap()).unwrap() * beta);
    }
    if scaled.iter().any(|v| (v - scaled[1]).abs() > 0.25 * scaled[1]) {
        ok = false;
        notes.push("tempering contract".to_string());
    }

    let pass = verdict(
        8,
        "property_suite",
        ok,
        &format!("gradient/invariant details in the library test targets; {notes:?}"),
    );
    assert!(pass);
}

/// 9. Correlation ordering: on the branch-symmetry and mixture temperature
///    scans, corr(ν̂_f, H) exceeds corr(ν̂_f, |dH/d log β|) for 2 of 3 seeds.
#[test]
fn criterion_9_correlation_ordering() {
    let mut seed_passes = 0;
    for seed in [42u64, 43, 44] {
        let mut both = true;
        for model_id in [ModelId::DiscreteSymmetry, ModelId::BoundaryMixture] {
            let spec = ModelSpec::new(model_id);
            let probe = ExperimentConfig::primary_probe(model_id);
            let model = build_model(&spec).unwrap();
            let mut rng = SeededRng::derive(seed, &[0x6669_7864, model_id as u64]);
            let data = model.generate_data(100, &mut rng);
            let mut sampler = exp_config("exp8").sampler.clone();
            sampler.seed = seed;
            let beta_grid = exp_config("exp8").beta_grid.clone();
            let scan =
                beta_scan(&spec, &data, &beta_grid, &[probe], &sampler, NuMode::SumPointwise)
                    .unwrap();
            let rows = correlation_report(&[&scan], probe).unwrap();
            let r = &rows[0];
            println!(
                "  seed {seed} {}: corr(nu,H) {:?} corr(nu,flow) {:?}",
                model_id.as_str(),
                r.corr_nu_entropy,
                r.corr_nu_flow
            );
            match (r.corr_nu_entropy, r.corr_nu_flow) {
                (Some(e), Some(f)) if e > f => {}
                _ => both = false,
            }
        }
        if both {
            seed_passes += 1;
        }
    }
    let pass = verdict(
        9,
        "correlation_ordering",
        seed_passes >= 2,
        &format!("{seed_passes}/3 seeds"),
    );
    assert!(pass);
}
