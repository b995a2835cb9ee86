//! Thermodynamic diagnostics computed from posterior samples: singular
//! fluctuation in its three conventions, WAIC complexity, prior and
//! cross-susceptibilities, branch/occupancy entropies, Gibbs losses and the
//! equation-of-state gap.
//!
//! Everything here is a pure function of a [`PosteriorSamples`] value, so
//! the estimators are independent of how the draws were produced.

use crate::error::{Error, Result};
use crate::model::{Dataset, Model, ProbeId};
use crate::sampler::{effective_sample_size, potential_scale_reduction, PosteriorSamples};
use crate::stats;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The three inequivalent conventions for the fluctuation of the
/// log-likelihood observable. `SumPointwise` is the default: it is the
/// convention under which p_WAIC = 2ν holds exactly on the same samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuMode {
    /// ½ Σ_i Var[ℓ_i]
    SumPointwise,
    /// ½ Var[(1/n) Σ_i ℓ_i]
    MeanNormalized,
    /// ½ Var[Σ_i ℓ_i]
    VarianceOfSum,
}

impl NuMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NuMode::SumPointwise => "sum_pointwise",
            NuMode::MeanNormalized => "mean_normalized",
            NuMode::VarianceOfSum => "variance_of_sum",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sum_pointwise" => Ok(NuMode::SumPointwise),
            "mean_normalized" => Ok(NuMode::MeanNormalized),
            "variance_of_sum" => Ok(NuMode::VarianceOfSum),
            other => Err(Error::invalid_value("nu_mode", format!("unknown mode `{other}`"))),
        }
    }
}

const MIN_DRAWS: usize = 100;

fn require_draws(samples: &PosteriorSamples) -> Result<()> {
    if samples.size() < MIN_DRAWS {
        return Err(Error::InsufficientSamples { need: MIN_DRAWS, got: samples.size() });
    }
    Ok(())
}

/// WAIC effective complexity, Σ_i Var[ℓ_i] over the retained draws.
pub fn p_waic(samples: &PosteriorSamples) -> Result<f64> {
    require_draws(samples)?;
    if samples.n_data() == 0 {
        return Err(Error::EmptyData);
    }
    let mut total = 0.0;
    for i in 0..samples.n_data() {
        total += stats::variance_slice(&samples.pointwise_loglik.column(i))?;
    }
    Ok(total)
}

/// Singular fluctuation of the log-likelihood observable in the requested
/// convention. `sum_pointwise` is derived from the same column variances as
/// [`p_waic`], so that identity is exact in floating point.
pub fn nu_loglik(samples: &PosteriorSamples, mode: NuMode) -> Result<f64> {
    require_draws(samples)?;
    if samples.n_data() == 0 {
        return Err(Error::EmptyData);
    }
    match mode {
        NuMode::SumPointwise => Ok(0.5 * p_waic(samples)?),
        NuMode::VarianceOfSum => {
            Ok(0.5 * stats::variance_slice(&samples.loglik_sums())?)
        }
        NuMode::MeanNormalized => {
            let n = samples.n_data() as f64;
            Ok(nu_loglik(samples, NuMode::VarianceOfSum)? / (n * n))
        }
    }
}

/// Functional (geometric) fluctuation ½ Var[φ(w)] for a probe observable.
pub fn nu_functional(samples: &PosteriorSamples, probe: ProbeId) -> Result<f64> {
    let series = samples.probe(probe)?;
    Ok(0.5 * stats::variance_slice(series)?)
}

/// Prior susceptibility. Unnormalized: Cov(φ, log π). Normalized divides by
/// Var(φ), which must be positive.
pub fn chi_pi(samples: &PosteriorSamples, probe: ProbeId, normalized: bool) -> Result<f64> {
    let series = samples.probe(probe)?;
    let cov = stats::covariance_slice(series, &samples.log_prior_series)?;
    if !normalized {
        return Ok(cov);
    }
    let var = stats::variance_slice(series)?;
    if var <= 0.0 {
        return Err(Error::DegenerateProbe);
    }
    Ok(cov / var)
}

/// The linear-response convention: plain posterior variance of the probe.
pub fn chi_pi_var(samples: &PosteriorSamples, probe: ProbeId) -> Result<f64> {
    let series = samples.probe(probe)?;
    stats::variance_slice(series)
}

/// Cross-susceptibility (1/n) Cov(φ, Σ_i ℓ_i): prior-likelihood coupling
/// along the probe direction.
pub fn chi_beta_h(samples: &PosteriorSamples, probe: ProbeId) -> Result<f64> {
    let series = samples.probe(probe)?;
    let sums = samples.loglik_sums();
    Ok(stats::covariance_slice(series, &sums)? / samples.n_data() as f64)
}

pub(crate) fn occupancy_counts(series: &[f64]) -> BTreeMap<i64, u64> {
    let mut counts = BTreeMap::new();
    for &v in series {
        *counts.entry(v.round() as i64).or_insert(0) += 1;
    }
    counts
}

/// Shannon entropy (nats) of the empirical occupancy over a discrete probe's
/// branches. Bounded by log K for a K-way probe.
pub fn active_set_entropy(samples: &PosteriorSamples, probe: ProbeId) -> Result<f64> {
    if !probe.is_discrete() {
        return Err(Error::InvalidProbe { probe, model: samples.model_id });
    }
    let series = samples.probe(probe)?;
    let counts: Vec<u64> = occupancy_counts(series).into_values().collect();
    stats::discrete_entropy(&counts)
}

/// Differential-entropy estimate for a continuous probe via the binned
/// empirical distribution. Bin count defaults to max(16, Freedman-Diaconis).
pub fn continuous_entropy(
    samples: &PosteriorSamples,
    probe: ProbeId,
    bins: Option<usize>,
) -> Result<f64> {
    if probe.is_discrete() {
        return Err(Error::InvalidProbe { probe, model: samples.model_id });
    }
    let series = samples.probe(probe)?;
    let bins = bins.unwrap_or_else(|| stats::default_bins(series));
    stats::histogram_entropy_slice(series, bins)
}

/// Gibbs train loss T̂ = E_S[−(1/n) Σ_i ℓ_i(w)] and, when a held-out set is
/// supplied, the Gibbs generalization loss Ĝ over it.
///
/// The held-out evaluation thins to at most 512 draws; its Monte Carlo error
/// stays far below the O(1/n) gap while keeping the cost of large test sets
/// bounded.
pub fn gibbs_losses(
    samples: &PosteriorSamples,
    model: &dyn Model,
    test: Option<&Dataset>,
) -> Result<(f64, Option<f64>)> {
    let n = samples.n_data() as f64;
    let sums = samples.loglik_sums();
    let t_hat = -crate::math::mean(&sums) / n;

    let g_hat = match test {
        None => None,
        Some(test) => {
            if test.n() == 0 {
                return Err(Error::EmptyData);
            }
            let ss = model.suff_stats(test);
            let m = test.n() as f64;
            let s = samples.size();
            // thin only when the draw × test-point work gets large
            let budget: usize = 4_000_000;
            let stride = (s * test.n()).div_ceil(budget).max(1);
            let mut acc = 0.0;
            let mut used = 0.0;
            let mut i = 0;
            while i < s {
                let pv = model.constrain(samples.draws_unconstrained.row(i));
                acc += -model.loglik_sum(&pv, test, &ss) / m;
                used += 1.0;
                i += stride;
            }
            Some(acc / used)
        }
    };
    Ok((t_hat, g_hat))
}

/// Equation-of-state diagnostics: gap = Ĝ − T̂ and ratio = gap / (2ν/n).
/// The ratio is absent when ν is not positive.
pub fn eos_diagnostics(t_hat: f64, g_hat: f64, nu: f64, n: usize) -> (f64, Option<f64>) {
    let gap = g_hat - t_hat;
    let ratio = if nu > 0.0 { Some(gap / (2.0 * nu / n as f64)) } else { None };
    (gap, ratio)
}

/// All scalar diagnostics for one (model, data, β, h) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub model: String,
    pub beta: f64,
    pub h: f64,
    pub n: usize,
    pub nu_mode: NuMode,
    pub nu_loglik: f64,
    pub p_waic: f64,
    pub nu_functional: BTreeMap<String, f64>,
    pub chi_pi_cov: BTreeMap<String, f64>,
    pub chi_pi_normalized: BTreeMap<String, f64>,
    pub chi_pi_var: BTreeMap<String, f64>,
    pub chi_beta_h: BTreeMap<String, f64>,
    pub active_set_entropy: BTreeMap<String, f64>,
    pub continuous_entropy: BTreeMap<String, f64>,
    pub gibbs_train_loss: f64,
    pub gibbs_gen_loss: Option<f64>,
    pub eos_gap: Option<f64>,
    pub eos_ratio: Option<f64>,
    pub ess_min: f64,
    pub rhat_max: f64,
    pub accept_rate: f64,
    pub divergences: usize,
    pub flags: Vec<String>,
    /// Experiment-specific extra columns (e.g. exp1's median identifiable
    /// error); empty for plain scans.
    pub extras: BTreeMap<String, f64>,
}

/// Populate a full report from one sampling run. Susceptibilities and
/// entropies are computed for every requested probe; convergence summaries
/// cover the total log-likelihood series and all probe series.
pub fn build_report(
    samples: &PosteriorSamples,
    model: &dyn Model,
    test: Option<&Dataset>,
    nu_mode: NuMode,
    probes: &[ProbeId],
) -> Result<ThermoReport> {
    let nu = nu_loglik(samples, nu_mode)?;
    let waic = p_waic(samples)?;

    let mut nu_f = BTreeMap::new();
    let mut chi_cov = BTreeMap::new();
    let mut chi_norm = BTreeMap::new();
    let mut chi_var = BTreeMap::new();
    let mut chi_bh = BTreeMap::new();
    let mut h_act = BTreeMap::new();
    let mut h_cont = BTreeMap::new();

    for &probe in probes {
        model.check_probe(probe)?;
        let name = probe.as_str().to_string();
        nu_f.insert(name.clone(), nu_functional(samples, probe)?);
        chi_cov.insert(name.clone(), chi_pi(samples, probe, false)?);
        if let Ok(v) = chi_pi(samples, probe, true) {
            chi_norm.insert(name.clone(), v);
        }
        chi_var.insert(name.clone(), chi_pi_var(samples, probe)?);
        chi_bh.insert(name.clone(), chi_beta_h(samples, probe)?);
        if probe.is_discrete() {
            h_act.insert(name.clone(), active_set_entropy(samples, probe)?);
        } else {
            h_cont.insert(name.clone(), continuous_entropy(samples, probe, None)?);
        }
    }

    let (t_hat, g_hat) = gibbs_losses(samples, model, test)?;
    let (eos_gap, eos_ratio) = match g_hat {
        Some(g) => {
            let (gap, ratio) = eos_diagnostics(t_hat, g, nu, samples.n_data());
            (Some(gap), ratio)
        }
        None => (None, None),
    };

    // Convergence summaries over the total log-likelihood and probe series.
    let mut ess_min = f64::INFINITY;
    let mut rhat_max = 0.0f64;
    let mut track = |series: &[f64]| {
        if let Ok(e) = effective_sample_size(series, &samples.chain_index) {
            if !e.constant {
                ess_min = ess_min.min(e.ess);
            }
        }
        if let Ok(r) = potential_scale_reduction(series, &samples.chain_index) {
            if !r.constant {
                rhat_max = rhat_max.max(r.rhat);
            }
        }
    };
    track(&samples.loglik_sums());
    for series in samples.probe_series.values() {
        track(series);
    }
    if !ess_min.is_finite() {
        ess_min = samples.size() as f64;
    }
    if rhat_max == 0.0 {
        rhat_max = 1.0;
    }

    Ok(ThermoReport {
        model: samples.model_id.as_str().to_string(),
        beta: samples.beta,
        h: samples.h,
        n: samples.n_data(),
        nu_mode,
        nu_loglik: nu,
        p_waic: waic,
        nu_functional: nu_f,
        chi_pi_cov: chi_cov,
        chi_pi_normalized: chi_norm,
        chi_pi_var: chi_var,
        chi_beta_h: chi_bh,
        active_set_entropy: h_act,
        continuous_entropy: h_cont,
        gibbs_train_loss: t_hat,
        gibbs_gen_loss: g_hat,
        eos_gap,
        eos_ratio,
        ess_min,
        rhat_max,
        accept_rate: samples.accept_rate,
        divergences: samples.divergences,
        flags: samples.flags.clone(),
        extras: BTreeMap::new(),
    })
}
