//! One-unit ReLU regression y = ReLU(w·x + b) + ε. Near w ≈ 0 the map
//! (w, b) ~ (−w, −b) produces identical predictions on the inactive side,
//! giving a data-dependent discrete sign ambiguity.

use super::{
    require_positive, Dataset, Model, ModelId, ModelSpec, ParameterVector, ProbeId, SuffStats,
    TargetParts,
};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

const LN_2PI: f64 = 1.837_877_066_409_345_4;

pub struct ReluSingle {
    noise_sd: f64,
    prior_sd: f64,
    x_half_range: f64,
    true_w: f64,
    true_b: f64,
}

#[inline]
fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

impl ReluSingle {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        Ok(ReluSingle {
            noise_sd: require_positive("hyperparameters.noise_sd", spec.hyper("noise_sd", 0.3))?,
            prior_sd: require_positive("hyperparameters.prior_sd", spec.hyper("prior_sd", 1.0))?,
            x_half_range: require_positive(
                "hyperparameters.x_half_range",
                spec.hyper("x_half_range", 2.0),
            )?,
            true_w: spec.truth("w", 0.8),
            true_b: spec.truth("b", 0.2),
        })
    }
}

impl Model for ReluSingle {
    fn id(&self) -> ModelId {
        ModelId::ReluSingle
    }

    fn dim(&self) -> usize {
        2
    }

    fn data_cols(&self) -> usize {
        2
    }

    fn data_col_names(&self) -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    fn probes(&self) -> &[ProbeId] {
        &[ProbeId::SlopeSign]
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
        let mut vals = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let x = rng.uniform(-self.x_half_range, self.x_half_range);
            let y = relu(self.true_w * x + self.true_b) + self.noise_sd * rng.normal();
            vals.push(x);
            vals.push(y);
        }
        Dataset::new(vals, n, 2, rng.seed()).expect("generated data is finite")
    }

    fn loglik_terms(&self, pv: &ParameterVector, data: &Dataset) -> Result<Vec<f64>> {
        let (w, b) = (pv.constrained[0], pv.constrained[1]);
        if !w.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteDensity("relu_single parameters"));
        }
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        Ok((0..data.n())
            .map(|i| {
                let row = data.row(i);
                let r = row[1] - relu(w * row[0] + b);
                c - r * r / (2.0 * s2)
            })
            .collect())
    }

    fn log_prior(&self, pv: &ParameterVector) -> Result<f64> {
        let s2 = self.prior_sd * self.prior_sd;
        let ssq = pv.constrained[0] * pv.constrained[0] + pv.constrained[1] * pv.constrained[1];
        Ok(-LN_2PI - 2.0 * self.prior_sd.ln() - ssq / (2.0 * s2))
    }

    fn target_parts(&self, u: &[f64], data: &Dataset, _ss: &SuffStats) -> TargetParts {
        let (w, b) = (u[0], u[1]);
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        let mut ll = 0.0;
        let mut gw = 0.0;
        let mut gb = 0.0;
        let mut kink = false;
        for i in 0..data.n() {
            let row = data.row(i);
            let z = w * row[0] + b;
            let r = row[1] - relu(z);
            ll += c - r * r / (2.0 * s2);
            if z == 0.0 {
                kink = true; // ReLU'(0) := 0, contributes nothing
            } else if z > 0.0 {
                gw += r * row[0] / s2;
                gb += r / s2;
            }
        }
        let pv = self.constrain(u);
        let ps2 = self.prior_sd * self.prior_sd;
        TargetParts {
            loglik_sum: ll,
            log_prior: self.log_prior(&pv).unwrap(),
            log_jacobian: 0.0,
            grad_loglik_sum: vec![gw, gb],
            grad_log_prior: vec![-w / ps2, -b / ps2],
            grad_log_jacobian: vec![0.0, 0.0],
            kink_touched: kink,
        }
    }

    fn probe_value(&self, pv: &ParameterVector, probe: ProbeId) -> Result<f64> {
        self.check_probe(probe)?;
        Ok(if pv.constrained[0] >= 0.0 { 1.0 } else { -1.0 })
    }

    fn probe_grad(&self, _u: &[f64], _probe: ProbeId) -> Option<Vec<f64>> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ReluSingle {
        ReluSingle::from_spec(&ModelSpec::new(ModelId::ReluSingle)).unwrap()
    }

    #[test]
    fn inactive_unit_matches_standard_normal_density() {
        // (w,b) = (1,0) with datum (x=−1, y=0), σ=1: prediction 0, residual 0.
        let m = ReluSingle::from_spec(
            &ModelSpec::new(ModelId::ReluSingle).with_hyper("noise_sd", 1.0),
        )
        .unwrap();
        let data = Dataset::new(vec![-1.0, 0.0], 1, 2, 0).unwrap();
        let ll = m.loglik_terms(&m.constrain(&[1.0, 0.0]), &data).unwrap();
        assert!((ll[0] + 0.918_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn sign_map_agrees_on_inactive_side() {
        // (w,b) and (−w,−b) predict identically where both units are off.
        let m = model();
        let (w, b) = (0.05, -0.01);
        for x in [-1.5, -0.4, 0.3, 1.9] {
            let z = w * x + b;
            let zf = -w * x - b;
            if z <= 0.0 && zf <= 0.0 {
                assert_eq!(relu(z), relu(zf));
            }
        }
    }

    #[test]
    fn slope_sign_probe_and_kink_flag() {
        let m = model();
        assert_eq!(m.probe_value(&m.constrain(&[0.0, 1.0]), ProbeId::SlopeSign).unwrap(), 1.0);
        assert_eq!(m.probe_value(&m.constrain(&[-0.2, 1.0]), ProbeId::SlopeSign).unwrap(), -1.0);
        // Datum exactly on the kink: w·1 + (−1) = 0.
        let data = Dataset::new(vec![1.0, 0.5], 1, 2, 0).unwrap();
        let parts = m.target_parts(&[1.0, -1.0], &data, &SuffStats::None);
        assert!(parts.kink_touched);
        assert_eq!(parts.grad_loglik_sum, vec![0.0, 0.0]);
    }

    #[test]
    fn conditional_mean_matches_ramp() {
        let m = model();
        let data = m.generate_data(10_000, &mut SeededRng::new(21));
        let mut sum_y = 0.0;
        let mut sum_x = 0.0;
        let mut count = 0.0;
        for i in 0..data.n() {
            let row = data.row(i);
            if row[0] > 1.0 {
                sum_x += 0.8 * row[0] + 0.2;
                sum_y += row[1];
                count += 1.0;
            }
        }
        assert!((sum_y / count - sum_x / count).abs() < 0.02);
    }
}
