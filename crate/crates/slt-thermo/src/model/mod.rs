//! Model zoo: a uniform interface over six models covering the canonical
//! non-identifiability mechanisms (branch symmetry, boundary collapse,
//! continuous gauge freedom, piecewise activation ambiguity) plus a regular
//! Gaussian control used as an oracle baseline.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

mod discrete;
mod gauge;
mod gaussian;
mod mixture;
mod relu_multi;
mod relu_single;
pub mod transform;

pub use discrete::DiscreteSymmetry;
pub use gauge::GaugeRank1;
pub use gaussian::GaussianControl;
pub use mixture::BoundaryMixture;
pub use relu_multi::ReluMulti;
pub use relu_single::ReluSingle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    DiscreteSymmetry,
    BoundaryMixture,
    GaugeRank1,
    ReluSingle,
    ReluMulti,
    GaussianControl,
}

impl ModelId {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::DiscreteSymmetry => "discrete_symmetry",
            ModelId::BoundaryMixture => "boundary_mixture",
            ModelId::GaugeRank1 => "gauge_rank1",
            ModelId::ReluSingle => "relu_single",
            ModelId::ReluMulti => "relu_multi",
            ModelId::GaussianControl => "gaussian_control",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "discrete_symmetry" => Ok(ModelId::DiscreteSymmetry),
            "boundary_mixture" => Ok(ModelId::BoundaryMixture),
            "gauge_rank1" => Ok(ModelId::GaugeRank1),
            "relu_single" => Ok(ModelId::ReluSingle),
            "relu_multi" => Ok(ModelId::ReluMulti),
            "gaussian_control" => Ok(ModelId::GaussianControl),
            other => Err(Error::invalid_value("model_id", format!("unknown model `{other}`"))),
        }
    }
}

/// Scalar observables aligned with a suspected non-identifiable coordinate.
/// Each probe is valid only for its owning model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeId {
    /// sign(mu) branch indicator (discrete_symmetry)
    BranchSign,
    /// min_k weight_k (boundary_mixture)
    MinWeight,
    /// weight of the second component (boundary_mixture)
    RedundantWeight,
    /// s = ½(log‖U‖ − log‖V‖) along the rescaling orbit (gauge_rank1)
    GaugeCoordinate,
    /// sign(w) (relu_single)
    SlopeSign,
    /// sign pattern of the dominant units' slopes (relu_multi)
    SignConfiguration,
    /// rank code of units sorted by slope (relu_multi)
    PermutationIndex,
    /// number of units with weight norm below the death threshold (relu_multi)
    UnitDeathIndicator,
    /// component-mean separation |m1 − m2| (boundary_mixture)
    Separation,
    /// the location parameter itself (gaussian_control, discrete_symmetry)
    Location,
}

impl ProbeId {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeId::BranchSign => "branch_sign",
            ProbeId::MinWeight => "min_weight",
            ProbeId::RedundantWeight => "redundant_weight",
            ProbeId::GaugeCoordinate => "gauge_coordinate",
            ProbeId::SlopeSign => "slope_sign",
            ProbeId::SignConfiguration => "sign_configuration",
            ProbeId::PermutationIndex => "permutation_index",
            ProbeId::UnitDeathIndicator => "unit_death_indicator",
            ProbeId::Separation => "separation",
            ProbeId::Location => "location",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "branch_sign" => Ok(ProbeId::BranchSign),
            "min_weight" => Ok(ProbeId::MinWeight),
            "redundant_weight" => Ok(ProbeId::RedundantWeight),
            "gauge_coordinate" => Ok(ProbeId::GaugeCoordinate),
            "slope_sign" => Ok(ProbeId::SlopeSign),
            "sign_configuration" => Ok(ProbeId::SignConfiguration),
            "permutation_index" => Ok(ProbeId::PermutationIndex),
            "unit_death_indicator" => Ok(ProbeId::UnitDeathIndicator),
            "separation" => Ok(ProbeId::Separation),
            "location" => Ok(ProbeId::Location),
            other => Err(Error::invalid_value("probe", format!("unknown probe `{other}`"))),
        }
    }

    /// Discrete probes take finitely many values and feed the active-set
    /// entropy; continuous probes feed the histogram entropy.
    pub fn is_discrete(self) -> bool {
        matches!(
            self,
            ProbeId::BranchSign
                | ProbeId::SlopeSign
                | ProbeId::SignConfiguration
                | ProbeId::PermutationIndex
                | ProbeId::UnitDeathIndicator
        )
    }
}

/// Declarative model description: identity, named hyperparameters and the
/// constrained true parameters used by the data generator. Unspecified
/// entries fall back to documented per-model defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: ModelId,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub true_parameters: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(model_id: ModelId) -> Self {
        ModelSpec {
            model_id,
            hyperparameters: BTreeMap::new(),
            true_parameters: BTreeMap::new(),
        }
    }

    pub fn with_hyper(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    pub fn with_truth(mut self, key: &str, value: f64) -> Self {
        self.true_parameters.insert(key.to_string(), value);
        self
    }

    pub(crate) fn hyper(&self, key: &str, default: f64) -> f64 {
        self.hyperparameters.get(key).copied().unwrap_or(default)
    }

    pub(crate) fn truth(&self, key: &str, default: f64) -> f64 {
        self.true_parameters.get(key).copied().unwrap_or(default)
    }
}

/// Observations as a dense row-major n×d matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    pub generator_seed: u64,
}

impl Dataset {
    pub fn new(values: Vec<f64>, rows: usize, cols: usize, generator_seed: u64) -> Result<Self> {
        if rows == 0 {
            return Err(Error::EmptyData);
        }
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch { left: values.len(), right: rows * cols });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDensity("dataset contains non-finite entries"));
        }
        Ok(Dataset { values, rows, cols, generator_seed })
    }

    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV rendering: header row from the model's column names, one row per
    /// observation, LF endings.
    pub fn to_csv(&self, model: &dyn Model) -> String {
        let mut out = model.data_col_names().join(",");
        out.push('\n');
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Unconstrained point plus its constrained view and the log |det| of the
/// constraining transform at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub unconstrained: Vec<f64>,
    pub constrained: Vec<f64>,
    pub log_jacobian: f64,
}

/// Per-dataset sufficient statistics. Models that factor through low-order
/// moments use these to keep leapfrog cost independent of n.
#[derive(Debug, Clone)]
pub enum SuffStats {
    None,
    /// Scalar Gaussian: (n, Σy, Σy²).
    Gaussian { n: f64, sum: f64, sum_sq: f64 },
    /// Matrix observations: per-cell mean and the residual sum of squares
    /// around it, Σ_i ‖Y_i − Ȳ‖².
    MatrixMean { n: f64, mean: Vec<f64>, resid_sq: f64 },
}

/// Value and gradient of the target's ingredients at one unconstrained point.
#[derive(Debug, Clone)]
pub struct TargetParts {
    pub loglik_sum: f64,
    pub log_prior: f64,
    pub log_jacobian: f64,
    pub grad_loglik_sum: Vec<f64>,
    pub grad_log_prior: Vec<f64>,
    pub grad_log_jacobian: Vec<f64>,
    /// True when some datum sits exactly on an activation kink; the
    /// subgradient convention ReLU'(0) = 0 applies there.
    pub kink_touched: bool,
}

pub trait Model: Send + Sync {
    fn id(&self) -> ModelId;
    fn dim(&self) -> usize;
    fn data_cols(&self) -> usize;
    fn data_col_names(&self) -> Vec<String>;
    fn probes(&self) -> &[ProbeId];

    fn constrain(&self, unconstrained: &[f64]) -> ParameterVector;
    fn unconstrain(&self, constrained: &[f64]) -> Vec<f64>;

    fn generate_data(&self, n: usize, rng: &mut SeededRng) -> Dataset;

    /// Per-datum log-likelihood vector in the constrained parameterization.
    fn loglik_terms(&self, pv: &ParameterVector, data: &Dataset) -> Result<Vec<f64>>;

    /// Log prior density in the constrained parameterization (the transform
    /// Jacobian is accounted for separately by the sampler).
    fn log_prior(&self, pv: &ParameterVector) -> Result<f64>;

    fn suff_stats(&self, _data: &Dataset) -> SuffStats {
        SuffStats::None
    }

    /// Total log likelihood; overridden where sufficient statistics apply.
    fn loglik_sum(&self, pv: &ParameterVector, data: &Dataset, _ss: &SuffStats) -> f64 {
        self.loglik_terms(pv, data)
            .map(|t| crate::math::kahan_sum(t))
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Everything the sampler needs at one point, in one pass.
    fn target_parts(&self, u: &[f64], data: &Dataset, ss: &SuffStats) -> TargetParts;

    fn probe_value(&self, pv: &ParameterVector, probe: ProbeId) -> Result<f64>;

    /// Gradient of the probe in unconstrained coordinates, or None when the
    /// probe is non-differentiable (sign and rank probes).
    fn probe_grad(&self, u: &[f64], probe: ProbeId) -> Option<Vec<f64>>;

    /// Number of distinct values of a discrete probe (the K of its log K
    /// entropy bound); None for continuous probes.
    fn probe_levels(&self, probe: ProbeId) -> Option<usize> {
        if probe.is_discrete() && self.probes().contains(&probe) {
            Some(2)
        } else {
            None
        }
    }

    fn check_probe(&self, probe: ProbeId) -> Result<()> {
        if self.probes().contains(&probe) {
            Ok(())
        } else {
            Err(Error::InvalidProbe { probe, model: self.id() })
        }
    }

    /// Model-specific extra diagnostics attached to scan reports (e.g. the
    /// median identifiable error for the branch-symmetric model).
    fn report_extras(
        &self,
        _samples: &crate::sampler::PosteriorSamples,
    ) -> std::collections::BTreeMap<String, f64> {
        std::collections::BTreeMap::new()
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<Box<dyn Model>> {
    match spec.model_id {
        ModelId::GaussianControl => Ok(Box::new(GaussianControl::from_spec(spec)?)),
        ModelId::DiscreteSymmetry => Ok(Box::new(DiscreteSymmetry::from_spec(spec)?)),
        ModelId::BoundaryMixture => Ok(Box::new(BoundaryMixture::from_spec(spec)?)),
        ModelId::GaugeRank1 => Ok(Box::new(GaugeRank1::from_spec(spec)?)),
        ModelId::ReluSingle => Ok(Box::new(ReluSingle::from_spec(spec)?)),
        ModelId::ReluMulti => Ok(Box::new(ReluMulti::from_spec(spec)?)),
    }
}

pub(crate) fn require_positive(spec_path: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid_value(spec_path, format!("must be a positive real, got {v}")))
    }
}

/// Gradient, in unconstrained coordinates, of the tilted tempered target
/// β·log π + β·Σℓ_i + h·φ + log|J| (or with an untempered prior when
/// `temper_prior` is false). Returns the kink flag alongside.
#[allow(clippy::too_many_arguments)]
pub fn grad_log_target(
    model: &dyn Model,
    data: &Dataset,
    ss: &SuffStats,
    u: &[f64],
    beta: f64,
    h: f64,
    probe: Option<ProbeId>,
    temper_prior: bool,
) -> Result<(Vec<f64>, bool)> {
    let parts = model.target_parts(u, data, ss);
    let prior_scale = if temper_prior { beta } else { 1.0 };
    let mut g = vec![0.0; model.dim()];
    for i in 0..model.dim() {
        g[i] = beta * parts.grad_loglik_sum[i]
            + prior_scale * parts.grad_log_prior[i]
            + parts.grad_log_jacobian[i];
    }
    if h != 0.0 {
        let probe = probe.ok_or(Error::DegenerateInput("tilt h != 0 requires a probe"))?;
        model.check_probe(probe)?;
        let pg = model
            .probe_grad(u, probe)
            .ok_or(Error::NonDifferentiableProbe { probe })?;
        for i in 0..model.dim() {
            g[i] += h * pg[i];
        }
    }
    Ok((g, parts.kink_touched))
}

/// Value of the same assembled target.
#[allow(clippy::too_many_arguments)]
pub fn log_target_value(
    model: &dyn Model,
    data: &Dataset,
    ss: &SuffStats,
    u: &[f64],
    beta: f64,
    h: f64,
    probe: Option<ProbeId>,
    temper_prior: bool,
) -> Result<f64> {
    let pv = model.constrain(u);
    let ll = model.loglik_sum(&pv, data, ss);
    let lp = model.log_prior(&pv)?;
    let prior_scale = if temper_prior { beta } else { 1.0 };
    let mut v = beta * ll + prior_scale * lp + pv.log_jacobian;
    if h != 0.0 {
        let probe = probe.ok_or(Error::DegenerateInput("tilt h != 0 requires a probe"))?;
        v += h * model.probe_value(&pv, probe)?;
    }
    Ok(v)
}
