//! Regular one-parameter Gaussian location model. Conjugate, so the exact
//! posterior is available as an oracle for the sampler and the estimators.

use super::{
    require_positive, Dataset, Model, ModelId, ModelSpec, ParameterVector, ProbeId, SuffStats,
    TargetParts,
};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

const LN_2PI: f64 = 1.837_877_066_409_345_4;

pub struct GaussianControl {
    prior_sd: f64,
    noise_sd: f64,
    true_mu: f64,
}

impl GaussianControl {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        Ok(GaussianControl {
            prior_sd: require_positive("hyperparameters.prior_sd", spec.hyper("prior_sd", 1.0))?,
            noise_sd: require_positive("hyperparameters.noise_sd", spec.hyper("noise_sd", 1.0))?,
            true_mu: spec.truth("mu", 0.5),
        })
    }

    /// Exact posterior (mean, variance) of the tempered target, used by
    /// oracle tests. With a tempered prior both precisions scale with β.
    pub fn conjugate_posterior(&self, data: &Dataset, beta: f64, temper_prior: bool) -> (f64, f64) {
        let n = data.n() as f64;
        let sum: f64 = data.values().iter().sum();
        let tau0 = 1.0 / (self.prior_sd * self.prior_sd);
        let tau = 1.0 / (self.noise_sd * self.noise_sd);
        let prior_prec = if temper_prior { beta * tau0 } else { tau0 };
        let prec = prior_prec + beta * n * tau;
        (beta * tau * sum / prec, 1.0 / prec)
    }

    pub fn true_mu(&self) -> f64 {
        self.true_mu
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }
}

impl Model for GaussianControl {
    fn id(&self) -> ModelId {
        ModelId::GaussianControl
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
        &[ProbeId::Location]
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
            .map(|_| self.true_mu + self.noise_sd * rng.normal())
            .collect();
        Dataset::new(vals, n, 1, rng.seed()).expect("generated data is finite")
    }

    fn loglik_terms(&self, pv: &ParameterVector, data: &Dataset) -> Result<Vec<f64>> {
        let mu = pv.constrained[0];
        if !mu.is_finite() {
            return Err(Error::NonFiniteDensity("gaussian_control location"));
        }
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        Ok(data
            .values()
            .iter()
            .map(|y| c - (y - mu) * (y - mu) / (2.0 * s2))
            .collect())
    }

    fn log_prior(&self, pv: &ParameterVector) -> Result<f64> {
        let mu = pv.constrained[0];
        let s2 = self.prior_sd * self.prior_sd;
        Ok(-0.5 * LN_2PI - self.prior_sd.ln() - mu * mu / (2.0 * s2))
    }

    fn suff_stats(&self, data: &Dataset) -> SuffStats {
        let sum: f64 = data.values().iter().sum();
        let sum_sq: f64 = data.values().iter().map(|y| y * y).sum();
        SuffStats::Gaussian { n: data.n() as f64, sum, sum_sq }
    }

    fn loglik_sum(&self, pv: &ParameterVector, data: &Dataset, ss: &SuffStats) -> f64 {
        let mu = pv.constrained[0];
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        match ss {
            SuffStats::Gaussian { n, sum, sum_sq } => {
                n * c - (sum_sq - 2.0 * mu * sum + n * mu * mu) / (2.0 * s2)
            }
            _ => data.n() as f64 * c
                - data.values().iter().map(|y| (y - mu) * (y - mu)).sum::<f64>() / (2.0 * s2),
        }
    }

    fn target_parts(&self, u: &[f64], data: &Dataset, ss: &SuffStats) -> TargetParts {
        let mu = u[0];
        let s2 = self.noise_sd * self.noise_sd;
        let pv = self.constrain(u);
        let (n, sum) = match ss {
            SuffStats::Gaussian { n, sum, .. } => (*n, *sum),
            _ => (data.n() as f64, data.values().iter().sum()),
        };
        TargetParts {
            loglik_sum: self.loglik_sum(&pv, data, ss),
            log_prior: self.log_prior(&pv).unwrap(),
            log_jacobian: 0.0,
            grad_loglik_sum: vec![(sum - n * mu) / s2],
            grad_log_prior: vec![-mu / (self.prior_sd * self.prior_sd)],
            grad_log_jacobian: vec![0.0],
            kink_touched: false,
        }
    }

    fn probe_value(&self, pv: &ParameterVector, probe: ProbeId) -> Result<f64> {
        self.check_probe(probe)?;
        Ok(pv.constrained[0])
    }

    fn probe_grad(&self, _u: &[f64], probe: ProbeId) -> Option<Vec<f64>> {
        match probe {
            ProbeId::Location => Some(vec![1.0]),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> GaussianControl {
        GaussianControl::from_spec(&ModelSpec::new(ModelId::GaussianControl)).unwrap()
    }

    #[test]
    fn standard_normal_density_at_mode() {
        let m = model();
        let data = Dataset::new(vec![0.0], 1, 1, 0).unwrap();
        let pv = m.constrain(&[0.0]);
        let ll = m.loglik_terms(&pv, &data).unwrap();
        assert!((ll[0] + 0.918_938_533_204_672_7).abs() < 1e-12);
        assert!((m.log_prior(&pv).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn reproducible_generation() {
        let m = model();
        let a = m.generate_data(5, &mut SeededRng::derive(9, &[1]));
        let b = m.generate_data(5, &mut SeededRng::derive(9, &[1]));
        assert_eq!(a.values(), b.values());
        assert_eq!(a.n(), 5);
    }

    #[test]
    fn prior_gradient_is_gaussian_score() {
        // With no data the target gradient is the prior score −μ.
        let m = model();
        let data = Dataset::new(vec![0.0], 1, 1, 0).unwrap();
        let ss = SuffStats::Gaussian { n: 0.0, sum: 0.0, sum_sq: 0.0 };
        let parts = m.target_parts(&[0.7], &data, &ss);
        assert!((parts.grad_log_prior[0] + 0.7).abs() < 1e-14);
        assert_eq!(parts.grad_loglik_sum[0], 0.0);
    }

    #[test]
    fn suff_stats_match_direct_sum() {
        let m = model();
        let mut rng = SeededRng::new(4);
        let data = m.generate_data(50, &mut rng);
        let ss = m.suff_stats(&data);
        let pv = m.constrain(&[0.33]);
        let direct: f64 = m.loglik_terms(&pv, &data).unwrap().iter().sum();
        assert!((m.loglik_sum(&pv, &data, &ss) - direct).abs() < 1e-9);
    }
}
