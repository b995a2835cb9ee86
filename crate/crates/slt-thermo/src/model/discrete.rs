//! Two-branch location mixture y ~ ½N(μ,1) + ½N(−μ,1). The likelihood is
//! exactly even in μ, so sign(μ) indexes two equivalent posterior branches.

use super::{
    require_positive, Dataset, Model, ModelId, ModelSpec, ParameterVector, ProbeId, SuffStats,
    TargetParts,
};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

const LN_2PI: f64 = 1.837_877_066_409_345_4;

pub struct DiscreteSymmetry {
    prior_sd: f64,
    true_mu: f64,
}

/// Numerically stable log cosh.
fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl DiscreteSymmetry {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        Ok(DiscreteSymmetry {
            prior_sd: require_positive("hyperparameters.prior_sd", spec.hyper("prior_sd", 2.0))?,
            true_mu: spec.truth("mu", 1.0),
        })
    }

    pub fn true_mu(&self) -> f64 {
        self.true_mu
    }
}

impl Model for DiscreteSymmetry {
    fn id(&self) -> ModelId {
        ModelId::DiscreteSymmetry
    }

    fn dim(&self) -> usize {
        1
    }

    fn data_cols(&self) -> usize {
        1
    }

    fn data_col_names(&self) -> Vec<String> {
        vec!["y".into()]
    }

    fn probes(&self) -> &[ProbeId] {
        &[ProbeId::BranchSign, ProbeId::Location]
    }

    fn constrain(&self, u: &[f64]) -> ParameterVector {
        ParameterVector {
            unconstrained: u.to_vec(),
            constrained: u.to_vec(),
            log_jacobian: 0.0,
        }
    }

    fn unconstrain(&self, constrained: &[f64]) -> Vec<f64> {
        constrained.to_vec()
    }

    fn generate_data(&self, n: usize, rng: &mut SeededRng) -> Dataset {
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let sign = if rng.next_f64() < 0.5 { 1.0 } else { -1.0 };
                sign * self.true_mu + rng.normal()
            })
            .collect();
        Dataset::new(vals, n, 1, rng.seed()).expect("generated data is finite")
    }

    fn loglik_terms(&self, pv: &ParameterVector, data: &Dataset) -> Result<Vec<f64>> {
        let mu = pv.constrained[0];
        if !mu.is_finite() {
            return Err(Error::NonFiniteDensity("discrete_symmetry location"));
        }
        // ½φ(y−μ) + ½φ(y+μ) = φ(y)·e^{−μ²/2}·cosh(μy)
        Ok(data
            .values()
            .iter()
            .map(|y| -0.5 * LN_2PI - 0.5 * (y * y + mu * mu) + ln_cosh(mu * y))
            .collect())
    }

    fn log_prior(&self, pv: &ParameterVector) -> Result<f64> {
        let mu = pv.constrained[0];
        let s2 = self.prior_sd * self.prior_sd;
        Ok(-0.5 * LN_2PI - self.prior_sd.ln() - mu * mu / (2.0 * s2))
    }

    fn target_parts(&self, u: &[f64], data: &Dataset, _ss: &SuffStats) -> TargetParts {
        let mu = u[0];
        let mut ll = 0.0;
        let mut g = 0.0;
        for &y in data.values() {
            ll += -0.5 * LN_2PI - 0.5 * (y * y + mu * mu) + ln_cosh(mu * y);
            g += -mu + y * (mu * y).tanh();
        }
        let pv = self.constrain(u);
        TargetParts {
            loglik_sum: ll,
            log_prior: self.log_prior(&pv).unwrap(),
            log_jacobian: 0.0,
            grad_loglik_sum: vec![g],
            grad_log_prior: vec![-mu / (self.prior_sd * self.prior_sd)],
            grad_log_jacobian: vec![0.0],
            kink_touched: false,
        }
    }

    fn probe_value(&self, pv: &ParameterVector, probe: ProbeId) -> Result<f64> {
        self.check_probe(probe)?;
        let mu = pv.constrained[0];
        Ok(match probe {
            ProbeId::BranchSign => {
                if mu >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => mu,
        })
    }

    fn probe_grad(&self, _u: &[f64], probe: ProbeId) -> Option<Vec<f64>> {
        match probe {
            ProbeId::Location => Some(vec![1.0]),
            _ => None,
        }
    }

    /// Median identifiable error: posterior median of | |μ| − |μ*| |, an
    /// error measure invariant to the branch symmetry.
    fn report_extras(
        &self,
        samples: &crate::sampler::PosteriorSamples,
    ) -> std::collections::BTreeMap<String, f64> {
        let mut extras = std::collections::BTreeMap::new();
        if let Ok(series) = samples.probe(ProbeId::Location) {
            let deltas: Vec<f64> = series
                .iter()
                .map(|mu| (mu.abs() - self.true_mu.abs()).abs())
                .collect();
            extras.insert("median_delta".to_string(), crate::math::median(&deltas));
        }
        extras
    }
}
