//! Samplers for the tempered, optionally tilted Gibbs posterior
//! p_{β,h}(w | D) ∝ π(w)^β exp(β Σ ℓ_i(w)) exp(h φ(w)).
//!
//! Chains are independent tasks with private RNG streams derived from
//! (seed, chain index); results merge at a single collection point in chain
//! order, so serial and parallel schedules produce identical output.

mod diag;
mod hmc;
mod rwm;

pub use diag::{effective_sample_size, potential_scale_reduction, EssResult, RhatResult};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Dataset, Model, ModelId, ProbeId, SuffStats};
use crate::rng::SeededRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const STREAM_CHAIN: u64 = 0x6368_6169_6e00_0001; // "chain"

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rwm,
    Hmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub hmc_leapfrog_steps: usize,
    pub target_accept: f64,
    pub initial_step_size: f64,
    pub seed: u64,
    /// Main-text convention tempers the prior as π^β; switching this off
    /// keeps the prior untempered while the likelihood still scales with β.
    pub temper_prior: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            algorithm: Algorithm::Hmc,
            chains: 4,
            warmup: 1000,
            draws: 2000,
            hmc_leapfrog_steps: 32,
            target_accept: 0.8,
            initial_step_size: 0.1,
            seed: 0,
            temper_prior: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::invalid_value("sampler.chains", "must be >= 1"));
        }
        if self.draws == 0 {
            return Err(Error::invalid_value("sampler.draws", "must be >= 1"));
        }
        if self.hmc_leapfrog_steps == 0 {
            return Err(Error::invalid_value("sampler.hmc_leapfrog_steps", "must be >= 1"));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::invalid_value("sampler.target_accept", "must lie in (0, 1)"));
        }
        if !(self.initial_step_size > 0.0) {
            return Err(Error::invalid_value("sampler.initial_step_size", "must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn total_draws(&self) -> usize {
        self.chains * self.draws
    }
}

/// Retained draws plus everything the estimators need: the S×n pointwise
/// log-likelihood table, prior and probe series, and chain bookkeeping.
#[derive(Debug, Clone)]
pub struct PosteriorSamples {
    pub model_id: ModelId,
    pub draws_unconstrained: Matrix,
    pub pointwise_loglik: Matrix,
    pub log_prior_series: Vec<f64>,
    pub probe_series: BTreeMap<ProbeId, Vec<f64>>,
    pub beta: f64,
    pub h: f64,
    pub temper_prior: bool,
    pub chain_index: Vec<u32>,
    pub accept_rate: f64,
    pub divergences: usize,
    pub flags: Vec<String>,
}

impl PosteriorSamples {
    pub fn size(&self) -> usize {
        self.draws_unconstrained.rows()
    }

    pub fn n_data(&self) -> usize {
        self.pointwise_loglik.cols()
    }

    pub fn probe(&self, probe: ProbeId) -> Result<&[f64]> {
        self.probe_series
            .get(&probe)
            .map(|v| v.as_slice())
            .ok_or(Error::InvalidProbe { probe, model: self.model_id })
    }

    /// Per-draw total log likelihood Σ_i ℓ_i(w).
    pub fn loglik_sums(&self) -> Vec<f64> {
        self.pointwise_loglik.row_sums()
    }

    /// Textual debugging dump: one CSV block per matrix plus the scalar
    /// series. Not a stability-guaranteed format.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# model={} beta={} h={} chains_draws={}\n",
            self.model_id.as_str(),
            self.beta,
            self.h,
            self.size()
        ));
        out.push_str("# draws_unconstrained\n");
        out.push_str(&self.draws_unconstrained.to_csv());
        out.push_str("# pointwise_loglik\n");
        out.push_str(&self.pointwise_loglik.to_csv());
        out.push_str("# log_prior\n");
        for v in &self.log_prior_series {
            out.push_str(&format!("{v}\n"));
        }
        for (probe, series) in &self.probe_series {
            out.push_str(&format!("# probe_{}\n", probe.as_str()));
            for v in series {
                out.push_str(&format!("{v}\n"));
            }
        }
        out
    }
}

/// Target density assembled from the model pieces: the log density of the
/// tempered, tilted posterior in unconstrained coordinates.
pub(crate) struct Target<'a> {
    pub model: &'a dyn Model,
    pub data: &'a Dataset,
    pub ss: &'a SuffStats,
    pub beta: f64,
    pub h: f64,
    pub probe: Option<ProbeId>,
    pub temper_prior: bool,
}

impl<'a> Target<'a> {
    fn prior_scale(&self) -> f64 {
        if self.temper_prior {
            self.beta
        } else {
            1.0
        }
    }

    pub fn log_density(&self, u: &[f64]) -> f64 {
        let pv = self.model.constrain(u);
        let ll = self.model.loglik_sum(&pv, self.data, self.ss);
        let lp = match self.model.log_prior(&pv) {
            Ok(v) => v,
            Err(_) => return f64::NEG_INFINITY,
        };
        let mut v = self.beta * ll + self.prior_scale() * lp + pv.log_jacobian;
        if self.h != 0.0 {
            match self.probe.and_then(|p| self.model.probe_value(&pv, p).ok()) {
                Some(phi) => v += self.h * phi,
                None => return f64::NEG_INFINITY,
            }
        }
        v
    }

    /// Log density and its gradient; only called when the tilt is
    /// differentiable (hmc falls back to rwm otherwise).
    pub fn log_density_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let parts = self.model.target_parts(u, self.data, self.ss);
        let ps = self.prior_scale();
        let mut value =
            self.beta * parts.loglik_sum + ps * parts.log_prior + parts.log_jacobian;
        let mut grad: Vec<f64> = (0..self.model.dim())
            .map(|i| {
                self.beta * parts.grad_loglik_sum[i]
                    + ps * parts.grad_log_prior[i]
                    + parts.grad_log_jacobian[i]
            })
            .collect();
        if self.h != 0.0 {
            let probe = self.probe.expect("tilted target requires a probe");
            let pv = self.model.constrain(u);
            value += self.h * self.model.probe_value(&pv, probe).unwrap_or(f64::NAN);
            if let Some(pg) = self.model.probe_grad(u, probe) {
                for (g, p) in grad.iter_mut().zip(pg) {
                    *g += self.h * p;
                }
            }
        }
        (value, grad)
    }
}

pub(crate) struct ChainOutput {
    pub draws: Vec<Vec<f64>>,
    pub accepted: usize,
    pub divergences: usize,
}

/// Draw from the tempered/tilted posterior with multiple independent chains.
///
/// A non-differentiable probe with h ≠ 0 silently selects random-walk
/// Metropolis even when hmc was requested.
pub fn sample_posterior(
    model: &dyn Model,
    data: &Dataset,
    beta: f64,
    h: f64,
    probe: Option<ProbeId>,
    cfg: &SamplerConfig,
) -> Result<PosteriorSamples> {
    cfg.validate()?;
    if !(beta > 0.0) {
        return Err(Error::invalid_value("beta", "inverse temperature must be positive"));
    }
    if h != 0.0 {
        let p = probe.ok_or(Error::DegenerateInput("tilt h != 0 requires a probe"))?;
        model.check_probe(p)?;
    }
    let ss = model.suff_stats(data);
    let needs_grad_fallback = h != 0.0
        && probe
            .map(|p| model.probe_grad(&vec![0.0; model.dim()], p).is_none())
            .unwrap_or(false);
    let algorithm = match cfg.algorithm {
        Algorithm::Hmc if needs_grad_fallback => Algorithm::Rwm,
        other => other,
    };

    let target = Target { model, data, ss: &ss, beta, h, probe, temper_prior: cfg.temper_prior };

    let chain_results: Vec<Result<ChainOutput>> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| {
            let rng = SeededRng::derive(cfg.seed, &[STREAM_CHAIN, chain as u64]);
            match algorithm {
                Algorithm::Hmc => hmc::run_chain(&target, cfg, rng),
                Algorithm::Rwm => rwm::run_chain(&target, cfg, rng),
            }
        })
        .collect();

    let mut all_draws: Vec<Vec<f64>> = Vec::with_capacity(cfg.total_draws());
    let mut chain_index = Vec::with_capacity(cfg.total_draws());
    let mut accepted = 0usize;
    let mut divergences = 0usize;
    for (chain, res) in chain_results.into_iter().enumerate() {
        let out = res?;
        accepted += out.accepted;
        divergences += out.divergences;
        for d in out.draws {
            all_draws.push(d);
            chain_index.push(chain as u32);
        }
    }

    let total = cfg.total_draws();
    let accept_rate = (accepted as f64 / total as f64).clamp(1e-12, 1.0 - 1e-12);

    // Post-pass over retained draws: per-datum log likelihood, prior and
    // probe series in the constrained parameterization.
    let n = data.n();
    let rows: Vec<(Vec<f64>, f64, Vec<f64>)> = all_draws
        .par_iter()
        .map(|u| {
            let pv = model.constrain(u);
            let terms = model.loglik_terms(&pv, data).expect("retained draw has finite density");
            let lp = model.log_prior(&pv).expect("retained draw is in the prior support");
            let probes: Vec<f64> = model
                .probes()
                .iter()
                .map(|&p| model.probe_value(&pv, p).expect("probe valid for model"))
                .collect();
            (terms, lp, probes)
        })
        .collect();

    let mut pointwise = Matrix::zeros(total, n);
    let mut log_prior_series = Vec::with_capacity(total);
    let mut probe_series: BTreeMap<ProbeId, Vec<f64>> = model
        .probes()
        .iter()
        .map(|&p| (p, Vec::with_capacity(total)))
        .collect();
    for (i, (terms, lp, probes)) in rows.into_iter().enumerate() {
        pointwise.set_row(i, &terms);
        log_prior_series.push(lp);
        for (&pid, value) in model.probes().iter().zip(probes) {
            probe_series.get_mut(&pid).unwrap().push(value);
        }
    }

    let mut flags = Vec::new();
    if divergences * 10 > total {
        flags.push("sampling_unstable".to_string());
    }

    Ok(PosteriorSamples {
        model_id: model.id(),
        draws_unconstrained: Matrix::from_rows(all_draws, model.dim()),
        pointwise_loglik: pointwise,
        log_prior_series,
        probe_series,
        beta,
        h,
        temper_prior: cfg.temper_prior,
        chain_index,
        accept_rate,
        divergences,
        flags,
    })
}

/// Draw an initial point from N(0, 0.5²) per coordinate, retrying until the
/// target is finite.
pub(crate) fn draw_init(target: &Target, rng: &mut SeededRng, dim: usize) -> Result<Vec<f64>> {
    for _ in 0..100 {
        let u: Vec<f64> = (0..dim).map(|_| 0.5 * rng.normal()).collect();
        if target.log_density(&u).is_finite() {
            return Ok(u);
        }
    }
    Err(Error::InitializationFailure { tries: 100 })
}
