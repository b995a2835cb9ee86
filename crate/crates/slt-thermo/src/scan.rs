//! Scan orchestration: temperature and sample-size sweeps, prior-field
//! response, (n, α) landscapes, WAIC comparison tables, correlation analyses
//! and equation-of-state scaling runs.
//!
//! Every grid point derives its RNG streams from (seed, purpose tag, grid
//! value), never from the grid position, so deleting a point changes no
//! other point's result and identical configs reproduce identical bytes.

use crate::error::{Error, Result};
use crate::model::{build_model, Dataset, Model, ModelSpec, ProbeId};
use crate::rng::SeededRng;
use crate::sampler::{sample_posterior, PosteriorSamples, SamplerConfig};
use crate::stats::{self, Series};
use crate::thermo::{self, NuMode, ThermoReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const TAG_DATA: u64 = 0x6461_7461;
const TAG_TEST: u64 = 0x7465_7374;
const TAG_SAMPLER: u64 = 0x7361_6d70;
const TAG_FIELD: u64 = 0x6669_656c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    Beta,
    N,
}

impl ScanAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanAxis::Beta => "beta",
            ScanAxis::N => "n",
        }
    }
}

/// Ordered sequence of reports along one scanned variable, plus the derived
/// entropy-flow series |dH/d log axis| per probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub label: String,
    pub axis: ScanAxis,
    pub grid: Vec<f64>,
    pub reports: Vec<Option<ThermoReport>>,
    pub point_errors: Vec<Option<String>>,
    pub entropy_flow: BTreeMap<String, Vec<f64>>,
    pub provenance: String,
}

impl ScanResult {
    /// The entropy series feeding the flow: active-set entropy for discrete
    /// probes, histogram entropy for continuous ones.
    pub fn entropy_series(&self, probe: ProbeId) -> Option<Vec<f64>> {
        let name = probe.as_str();
        self.reports
            .iter()
            .map(|r| {
                r.as_ref().and_then(|rep| {
                    rep.active_set_entropy
                        .get(name)
                        .or_else(|| rep.continuous_entropy.get(name))
                        .copied()
                })
            })
            .collect()
    }

    pub fn series_of(&self, f: impl Fn(&ThermoReport) -> Option<f64>) -> Option<Vec<f64>> {
        self.reports.iter().map(|r| r.as_ref().and_then(&f)).collect()
    }

    pub fn complete(&self) -> bool {
        self.reports.iter().all(|r| r.is_some())
    }
}

fn derive_seed(seed: u64, ids: &[u64]) -> u64 {
    SeededRng::derive(seed, ids).next_u64()
}

fn check_increasing(grid: &[f64], positive: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid);
    }
    if positive && grid[0] <= 0.0 {
        return Err(Error::InvalidGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

fn attach_flow(result: &mut ScanResult, probes: &[ProbeId]) {
    if !result.complete() || result.grid.len() < 2 {
        return;
    }
    let grid = Series::new(result.axis.as_str(), result.grid.clone());
    let grid = match grid {
        Ok(g) => g,
        Err(_) => return,
    };
    for &probe in probes {
        if let Some(h) = result.entropy_series(probe) {
            if let Ok(h_series) = Series::new(probe.as_str(), h) {
                if let Ok(d) = stats::log_grid_derivative(&grid, &h_series) {
                    result
                        .entropy_flow
                        .insert(probe.as_str().to_string(), d.values().iter().map(|v| v.abs()).collect());
                }
            }
        }
    }
}

fn run_point(
    model: &dyn Model,
    data: &Dataset,
    test: Option<&Dataset>,
    beta: f64,
    cfg: &SamplerConfig,
    nu_mode: NuMode,
    probes: &[ProbeId],
) -> Result<ThermoReport> {
    let samples = sample_posterior(model, data, beta, 0.0, None, cfg)?;
    let mut report = thermo::build_report(&samples, model, test, nu_mode, probes)?;
    report.extras = model.report_extras(&samples);
    Ok(report)
}

/// Temperature scan over a fixed dataset. Each β gets a freshly seeded
/// sampler; failures flag the point and the scan continues.
pub fn beta_scan(
    spec: &ModelSpec,
    data: &Dataset,
    beta_grid: &[f64],
    probes: &[ProbeId],
    cfg: &SamplerConfig,
    nu_mode: NuMode,
) -> Result<ScanResult> {
    check_increasing(beta_grid, true)?;
    let model = build_model(spec)?;
    for &p in probes {
        model.check_probe(p)?;
    }

    let outcomes: Vec<Result<ThermoReport>> = beta_grid
        .par_iter()
        .map(|&beta| {
            let cfg_pt = cfg
                .clone()
                .with_seed(derive_seed(cfg.seed, &[TAG_SAMPLER, ScanAxis::Beta as u64, beta.to_bits()]));
            run_point(model.as_ref(), data, None, beta, &cfg_pt, nu_mode, probes)
        })
        .collect();

    let mut result = ScanResult {
        label: format!("{}_beta_scan", spec.model_id.as_str()),
        axis: ScanAxis::Beta,
        grid: beta_grid.to_vec(),
        reports: Vec::new(),
        point_errors: Vec::new(),
        entropy_flow: BTreeMap::new(),
        provenance: format!("seed={}", cfg.seed),
    };
    for outcome in outcomes {
        match outcome {
            Ok(r) => {
                result.reports.push(Some(r));
                result.point_errors.push(None);
            }
            Err(e) => {
                result.reports.push(None);
                result.point_errors.push(Some(e.to_string()));
            }
        }
    }
    attach_flow(&mut result, probes);
    Ok(result)
}

/// Sample-size scan: a fresh dataset per point, seeded by (seed, n), plus an
/// optional held-out set of size max(10⁴, 10n) for the EOS fields.
#[allow(clippy::too_many_arguments)]
pub fn n_scan(
    spec: &ModelSpec,
    n_grid: &[usize],
    beta: f64,
    probes: &[ProbeId],
    cfg: &SamplerConfig,
    nu_mode: NuMode,
    with_test: bool,
) -> Result<ScanResult> {
    let grid_f: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    check_increasing(&grid_f, true)?;
    let model = build_model(spec)?;
    for &p in probes {
        model.check_probe(p)?;
    }

    let outcomes: Vec<Result<ThermoReport>> = n_grid
        .par_iter()
        .map(|&n| {
            let mut data_rng = SeededRng::derive(cfg.seed, &[TAG_DATA, n as u64]);
            let data = model.generate_data(n, &mut data_rng);
            let test = if with_test {
                let m = (10 * n).max(10_000);
                let mut test_rng = SeededRng::derive(cfg.seed, &[TAG_TEST, n as u64]);
                Some(model.generate_data(m, &mut test_rng))
            } else {
                None
            };
            let cfg_pt = cfg
                .clone()
                .with_seed(derive_seed(cfg.seed, &[TAG_SAMPLER, ScanAxis::N as u64, n as u64]));
            run_point(model.as_ref(), &data, test.as_ref(), beta, &cfg_pt, nu_mode, probes)
        })
        .collect();

    let mut result = ScanResult {
        label: format!("{}_n_scan", spec.model_id.as_str()),
        axis: ScanAxis::N,
        grid: grid_f,
        reports: Vec::new(),
        point_errors: Vec::new(),
        entropy_flow: BTreeMap::new(),
        provenance: format!("seed={}", cfg.seed),
    };
    for outcome in outcomes {
        match outcome {
            Ok(r) => {
                result.reports.push(Some(r));
                result.point_errors.push(None);
            }
            Err(e) => {
                result.reports.push(None);
                result.point_errors.push(Some(e.to_string()));
            }
        }
    }
    attach_flow(&mut result, probes);
    Ok(result)
}

/// Prior-field response: ΔE_h[φ] against the linear-response prediction
/// h·Var₀(φ), with an ordinary least-squares fit of observed on predicted
/// through the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldResponseResult {
    pub probe: ProbeId,
    pub h_grid: Vec<f64>,
    pub delta_e: Series,
    pub predicted: Series,
    pub baseline_mean: f64,
    pub baseline_var: f64,
    pub slope: f64,
    pub r_squared: f64,
}

pub fn field_response(
    spec: &ModelSpec,
    data: &Dataset,
    beta: f64,
    probe: ProbeId,
    h_grid: &[f64],
    cfg: &SamplerConfig,
) -> Result<FieldResponseResult> {
    if h_grid.windows(2).any(|w| w[1] <= w[0]) || h_grid.is_empty() {
        return Err(Error::InvalidGrid);
    }
    if !h_grid.contains(&0.0) {
        return Err(Error::invalid_value("h_grid", "must contain 0"));
    }
    let model = build_model(spec)?;
    model.check_probe(probe)?;

    let base_cfg = cfg
        .clone()
        .with_seed(derive_seed(cfg.seed, &[TAG_FIELD, 0u64.to_le_bytes()[0] as u64, 0]));
    let baseline = sample_posterior(model.as_ref(), data, beta, 0.0, Some(probe), &base_cfg)?;
    let base_series = baseline.probe(probe)?;
    let baseline_mean = crate::math::mean(base_series);
    let baseline_var = stats::variance_slice(base_series)?;
    if baseline_var <= 0.0 {
        return Err(Error::DegenerateProbe);
    }

    let means: Vec<Result<f64>> = h_grid
        .par_iter()
        .map(|&h| {
            if h == 0.0 {
                return Ok(baseline_mean);
            }
            let cfg_pt = cfg
                .clone()
                .with_seed(derive_seed(cfg.seed, &[TAG_FIELD, 1, h.to_bits()]));
            let samples = sample_posterior(model.as_ref(), data, beta, h, Some(probe), &cfg_pt)?;
            Ok(crate::math::mean(samples.probe(probe)?))
        })
        .collect();

    let mut delta = Vec::with_capacity(h_grid.len());
    let mut predicted = Vec::with_capacity(h_grid.len());
    for (&h, mean) in h_grid.iter().zip(means) {
        delta.push(mean? - baseline_mean);
        predicted.push(h * baseline_var);
    }

    // Through-origin OLS of observed on predicted; uncentered R².
    let sxy: f64 = predicted.iter().zip(&delta).map(|(x, y)| x * y).sum();
    let sxx: f64 = predicted.iter().map(|x| x * x).sum();
    let syy: f64 = delta.iter().map(|y| y * y).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res: f64 = predicted
        .iter()
        .zip(&delta)
        .map(|(x, y)| (y - slope * x) * (y - slope * x))
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 0.0 };

    Ok(FieldResponseResult {
        probe,
        h_grid: h_grid.to_vec(),
        delta_e: Series::new(format!("delta_e_{}", probe.as_str()), delta)?,
        predicted: Series::new("h_times_var0", predicted)?,
        baseline_mean,
        baseline_var,
        slope,
        r_squared,
    })
}

/// One cell of the (n, α) landscape.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeCell {
    pub alpha: f64,
    pub n: usize,
    pub report: ThermoReport,
    /// Survival function of the minimum weight, P(w_min > ε) per ε.
    pub boundary_tail: Vec<(f64, f64)>,
}

pub const BOUNDARY_EPSILONS: [f64; 4] = [0.01, 0.02, 0.05, 0.1];

/// Joint prior-strength and sample-size scan for the overfitted mixture.
/// Data are shared across the α column at fixed n so the comparison isolates
/// the prior.
pub fn landscape_scan(
    base_spec: &ModelSpec,
    alpha_grid: &[f64],
    n_grid: &[usize],
    beta: f64,
    cfg: &SamplerConfig,
    nu_mode: NuMode,
) -> Result<Vec<LandscapeCell>> {
    check_increasing(alpha_grid, true)?;
    let n_f: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    check_increasing(&n_f, true)?;

    let cells: Vec<(f64, usize)> = alpha_grid
        .iter()
        .flat_map(|&a| n_grid.iter().map(move |&n| (a, n)))
        .collect();

    let results: Vec<Result<LandscapeCell>> = cells
        .par_iter()
        .map(|&(alpha, n)| {
            let mut spec = base_spec.clone();
            spec.hyperparameters.insert("dirichlet_alpha".to_string(), alpha);
            let model = build_model(&spec)?;
            let mut data_rng = SeededRng::derive(cfg.seed, &[TAG_DATA, n as u64]);
            let data = model.generate_data(n, &mut data_rng);
            let cfg_pt = cfg
                .clone()
                .with_seed(derive_seed(cfg.seed, &[TAG_SAMPLER, alpha.to_bits(), n as u64]));
            let samples = sample_posterior(model.as_ref(), &data, beta, 0.0, None, &cfg_pt)?;
            let probes = [ProbeId::MinWeight, ProbeId::RedundantWeight, ProbeId::Separation];
            let report = thermo::build_report(&samples, model.as_ref(), None, nu_mode, &probes)?;
            let w_min = samples.probe(ProbeId::MinWeight)?;
            let total = w_min.len() as f64;
            let boundary_tail = BOUNDARY_EPSILONS
                .iter()
                .map(|&eps| {
                    let p = w_min.iter().filter(|&&w| w > eps).count() as f64 / total;
                    (eps, p)
                })
                .collect();
            Ok(LandscapeCell { alpha, n, report, boundary_tail })
        })
        .collect();

    results.into_iter().collect()
}

/// One row of the WAIC comparison table. The ratio column is an exact
/// algebraic identity on shared samples; the table exists to make that
/// visible next to per-model scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicRow {
    pub model: String,
    pub n: usize,
    pub p_waic: f64,
    pub two_nu_loglik: f64,
    pub ratio: f64,
    pub p_waic_over_n: f64,
    pub two_nu_over_n: f64,
}

/// β = 1 comparison of p_WAIC against 2ν̂ across models and sample sizes.
pub fn waic_compare(
    specs: &[ModelSpec],
    n_grid: &[usize],
    cfg: &SamplerConfig,
    nu_mode: NuMode,
) -> Result<Vec<WaicRow>> {
    let n_f: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    check_increasing(&n_f, true)?;

    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..n_grid.len()).map(move |i| (s, i)))
        .collect();

    let rows: Vec<Result<WaicRow>> = jobs
        .par_iter()
        .map(|&(si, ni)| {
            let spec = &specs[si];
            let n = n_grid[ni];
            let model = build_model(spec)?;
            let model_tag = spec.model_id as u64;
            let mut data_rng = SeededRng::derive(cfg.seed, &[TAG_DATA, model_tag, n as u64]);
            let data = model.generate_data(n, &mut data_rng);
            let cfg_pt = cfg
                .clone()
                .with_seed(derive_seed(cfg.seed, &[TAG_SAMPLER, model_tag, n as u64]));
            let samples = sample_posterior(model.as_ref(), &data, 1.0, 0.0, None, &cfg_pt)?;
            let p = thermo::p_waic(&samples)?;
            let two_nu = 2.0 * thermo::nu_loglik(&samples, nu_mode)?;
            Ok(WaicRow {
                model: spec.model_id.as_str().to_string(),
                n,
                p_waic: p,
                two_nu_loglik: two_nu,
                ratio: p / two_nu,
                p_waic_over_n: p / n as f64,
                two_nu_over_n: two_nu / n as f64,
            })
        })
        .collect();

    rows.into_iter().collect()
}

/// Correlation of the functional fluctuation against entropy magnitude and
/// entropy flow along one scan. Undefined pairs are flagged, not dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub scan: String,
    pub probe: String,
    pub corr_nu_entropy: Option<f64>,
    pub corr_nu_flow: Option<f64>,
    pub flags: Vec<String>,
}

pub fn correlation_report(scans: &[&ScanResult], probe: ProbeId) -> Result<Vec<CorrelationRow>> {
    let mut rows = Vec::with_capacity(scans.len());
    for scan in scans {
        if scan.grid.len() < 4 {
            return Err(Error::InsufficientSamples { need: 4, got: scan.grid.len() });
        }
        let mut flags = Vec::new();
        let name = probe.as_str();
        let nu = scan
            .series_of(|r| r.nu_functional.get(name).copied())
            .ok_or(Error::DegenerateInput("scan has failed points"))?;
        let entropy = scan
            .entropy_series(probe)
            .ok_or(Error::DegenerateInput("scan has failed points"))?;
        let flow = scan.entropy_flow.get(name).cloned();

        let corr = |a: &[f64], b: &[f64], what: &str, flags: &mut Vec<String>| match stats::pearson_slice(a, b)
        {
            Ok(r) => Some(r),
            Err(Error::DegenerateInput(_)) => {
                flags.push(format!("degenerate_pair_{what}"));
                None
            }
            Err(_) => {
                flags.push(format!("undefined_{what}"));
                None
            }
        };

        let corr_nu_entropy = corr(&nu, &entropy, "entropy", &mut flags);
        let corr_nu_flow = match flow {
            Some(f) => corr(&nu, &f, "flow", &mut flags),
            None => {
                flags.push("missing_flow".to_string());
                None
            }
        };
        rows.push(CorrelationRow {
            scan: scan.label.clone(),
            probe: name.to_string(),
            corr_nu_entropy,
            corr_nu_flow,
            flags,
        });
    }
    Ok(rows)
}

/// Replicated equation-of-state scaling run: per sample size, `replicates`
/// independent (data, posterior) draws; the gap is the replicate mean with
/// its standard error, and the slope is fitted to log mean-gap vs log n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EosScaling {
    pub model: String,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub mean_gap: Vec<f64>,
    pub gap_se: Vec<f64>,
    pub mean_nu: Vec<f64>,
    pub ratio: Vec<f64>,
    /// log-log slope of the mean gap; absent when some mean gap is <= 0.
    pub slope: Option<f64>,
    /// coefficient of variation of the ratio series across n.
    pub ratio_cv: Option<f64>,
}

pub fn eos_scaling(
    spec: &ModelSpec,
    n_grid: &[usize],
    beta: f64,
    cfg: &SamplerConfig,
    nu_mode: NuMode,
    replicates: usize,
) -> Result<EosScaling> {
    let n_f: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    check_increasing(&n_f, true)?;
    if replicates == 0 {
        return Err(Error::invalid_value("replicates", "must be >= 1"));
    }
    let model = build_model(spec)?;

    let jobs: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();

    let outcomes: Vec<Result<(usize, f64, f64)>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let mut data_rng = SeededRng::derive(cfg.seed, &[TAG_DATA, n as u64, rep as u64]);
            let data = model.generate_data(n, &mut data_rng);
            let m = (10 * n).max(10_000);
            let mut test_rng = SeededRng::derive(cfg.seed, &[TAG_TEST, n as u64, rep as u64]);
            let test = model.generate_data(m, &mut test_rng);
            let cfg_pt = cfg
                .clone()
                .with_seed(derive_seed(cfg.seed, &[TAG_SAMPLER, n as u64, rep as u64]));
            let samples = sample_posterior(model.as_ref(), &data, beta, 0.0, None, &cfg_pt)?;
            let nu = thermo::nu_loglik(&samples, nu_mode)?;
            let (t_hat, g_hat) = thermo::gibbs_losses(&samples, model.as_ref(), Some(&test))?;
            Ok((n, g_hat.expect("test set present") - t_hat, nu))
        })
        .collect();

    let mut by_n: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for o in outcomes {
        let (n, gap, nu) = o?;
        by_n.entry(n).or_default().push((gap, nu));
    }

    let mut mean_gap = Vec::new();
    let mut gap_se = Vec::new();
    let mut mean_nu = Vec::new();
    let mut ratio = Vec::new();
    for &n in n_grid {
        let reps = &by_n[&n];
        let gaps: Vec<f64> = reps.iter().map(|r| r.0).collect();
        let nus: Vec<f64> = reps.iter().map(|r| r.1).collect();
        let g = crate::math::mean(&gaps);
        let se = if gaps.len() > 1 {
            (stats::variance_slice(&gaps)? / gaps.len() as f64).sqrt()
        } else {
            0.0
        };
        let nu = crate::math::mean(&nus);
        mean_gap.push(g);
        gap_se.push(se);
        mean_nu.push(nu);
        ratio.push(if nu > 0.0 { g / (2.0 * nu / n as f64) } else { f64::NAN });
    }

    let slope = if mean_gap.iter().all(|&g| g > 0.0) {
        let log_n: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
        let log_gap: Vec<f64> = mean_gap.iter().map(|g| g.ln()).collect();
        Some(crate::math::linear_fit(&log_n, &log_gap).0)
    } else {
        None
    };
    let ratio_cv = if ratio.len() >= 2 && ratio.iter().all(|r| r.is_finite()) {
        let m = crate::math::mean(&ratio);
        if m.abs() > 0.0 {
            Some((stats::variance_slice(&ratio)?.sqrt()) / m.abs())
        } else {
            None
        }
    } else {
        None
    };

    Ok(EosScaling {
        model: spec.model_id.as_str().to_string(),
        n_grid: n_grid.to_vec(),
        replicates,
        mean_gap,
        gap_se,
        mean_nu,
        ratio,
        slope,
        ratio_cv,
    })
}

/// Convenience accessor used by callers assembling CSV rows.
pub fn point_samples(
    spec: &ModelSpec,
    data: &Dataset,
    beta: f64,
    cfg: &SamplerConfig,
) -> Result<PosteriorSamples> {
    let model = build_model(spec)?;
    sample_posterior(model.as_ref(), data, beta, 0.0, None, cfg)
}
