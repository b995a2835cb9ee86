//! Overfitted two-component Gaussian mixture with a Dirichlet(α, α) prior on
//! the weights, fitted to data from a single standard normal component. The
//! boundary singularity sits where the redundant weight collapses to zero.
//! Weights are parameterized by one stick-breaking logit so gradient-based
//! sampling respects the simplex boundary without rejection.

use super::transform::{simplex2, simplex2_inverse};
use super::{
    require_positive, Dataset, Model, ModelId, ModelSpec, ParameterVector, ProbeId, SuffStats,
    TargetParts,
};
use crate::error::{Error, Result};
use crate::math::{ln_gamma, log_sum_exp2};
use crate::rng::SeededRng;

const LN_2PI: f64 = 1.837_877_066_409_345_4;

pub struct BoundaryMixture {
    alpha: f64,
    mean_prior_sd: f64,
    data_mean: f64,
    data_sd: f64,
}

impl BoundaryMixture {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        Ok(BoundaryMixture {
            alpha: require_positive(
                "hyperparameters.dirichlet_alpha",
                spec.hyper("dirichlet_alpha", 1.0),
            )?,
            mean_prior_sd: require_positive(
                "hyperparameters.mean_prior_sd",
                spec.hyper("mean_prior_sd", 3.0),
            )?,
            data_mean: spec.truth("data_mean", 0.0),
            data_sd: require_positive("true_parameters.data_sd", spec.truth("data_sd", 1.0))?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Model for BoundaryMixture {
    fn id(&self) -> ModelId {
        ModelId::BoundaryMixture
    }

    // Unconstrained coordinates: [m1, m2, t] with (w1, w2) = stick(t).
    fn dim(&self) -> usize {
        3
    }

    fn data_cols(&self) -> usize {
        1
    }

    fn data_col_names(&self) -> Vec<String> {
        vec!["y".into()]
    }

    fn probes(&self) -> &[ProbeId] {
        &[ProbeId::MinWeight, ProbeId::RedundantWeight, ProbeId::Separation]
    }

    fn constrain(&self, u: &[f64]) -> ParameterVector {
        let (w1, w2, lj) = simplex2(u[2]);
        ParameterVector {
            unconstrained: u.to_vec(),
            constrained: vec![u[0], u[1], w1, w2],
            log_jacobian: lj,
        }
    }

    fn unconstrain(&self, constrained: &[f64]) -> Vec<f64> {
        vec![constrained[0], constrained[1], simplex2_inverse(constrained[2])]
    }

    fn generate_data(&self, n: usize, rng: &mut SeededRng) -> Dataset {
        let vals: Vec<f64> = (0..n)
            .map(|_| self.data_mean + self.data_sd * rng.normal())
            .collect();
        Dataset::new(vals, n, 1, rng.seed()).expect("generated data is finite")
    }

    fn loglik_terms(&self, pv: &ParameterVector, data: &Dataset) -> Result<Vec<f64>> {
        let (m1, m2, w1, w2) =
            (pv.constrained[0], pv.constrained[1], pv.constrained[2], pv.constrained[3]);
        if w1 <= 0.0 || w2 <= 0.0 {
            return Err(Error::NonFiniteDensity("mixture weight outside the open simplex"));
        }
        let (lw1, lw2) = (w1.ln(), w2.ln());
        Ok(data
            .values()
            .iter()
            .map(|y| {
                let a1 = -0.5 * LN_2PI - 0.5 * (y - m1) * (y - m1);
                let a2 = -0.5 * LN_2PI - 0.5 * (y - m2) * (y - m2);
                log_sum_exp2(lw1 + a1, lw2 + a2)
            })
            .collect())
    }

    fn log_prior(&self, pv: &ParameterVector) -> Result<f64> {
        let (m1, m2, w1, w2) =
            (pv.constrained[0], pv.constrained[1], pv.constrained[2], pv.constrained[3]);
        let s2 = self.mean_prior_sd * self.mean_prior_sd;
        let means = -LN_2PI
            - 2.0 * self.mean_prior_sd.ln()
            - (m1 * m1 + m2 * m2) / (2.0 * s2);
        let a = self.alpha;
        let dirichlet = ln_gamma(2.0 * a) - 2.0 * ln_gamma(a) + (a - 1.0) * (w1.ln() + w2.ln());
        Ok(means + dirichlet)
    }

    fn target_parts(&self, u: &[f64], data: &Dataset, _ss: &SuffStats) -> TargetParts {
        let pv = self.constrain(u);
        let (m1, m2, w1, w2) =
            (pv.constrained[0], pv.constrained[1], pv.constrained[2], pv.constrained[3]);
        let (lw1, lw2) = (w1.ln(), w2.ln());
        let mut ll = 0.0;
        let mut g = [0.0f64; 3];
        for &y in data.values() {
            let a1 = -0.5 * LN_2PI - 0.5 * (y - m1) * (y - m1);
            let a2 = -0.5 * LN_2PI - 0.5 * (y - m2) * (y - m2);
            let l = log_sum_exp2(lw1 + a1, lw2 + a2);
            ll += l;
            let r1 = (lw1 + a1 - l).exp();
            let r2 = 1.0 - r1;
            g[0] += r1 * (y - m1);
            g[1] += r2 * (y - m2);
            // d log w1/dt = w2, d log w2/dt = -w1
            g[2] += r1 * w2 - r2 * w1;
        }
        let s2 = self.mean_prior_sd * self.mean_prior_sd;
        TargetParts {
            loglik_sum: ll,
            log_prior: self.log_prior(&pv).unwrap(),
            log_jacobian: pv.log_jacobian,
            grad_loglik_sum: g.to_vec(),
            grad_log_prior: vec![-m1 / s2, -m2 / s2, (self.alpha - 1.0) * (w2 - w1)],
            grad_log_jacobian: vec![0.0, 0.0, w2 - w1],
            kink_touched: false,
        }
    }

    fn probe_value(&self, pv: &ParameterVector, probe: ProbeId) -> Result<f64> {
        self.check_probe(probe)?;
        let (m1, m2, w1, w2) =
            (pv.constrained[0], pv.constrained[1], pv.constrained[2], pv.constrained[3]);
        Ok(match probe {
            ProbeId::MinWeight => w1.min(w2),
            ProbeId::RedundantWeight => w2,
            _ => (m1 - m2).abs(),
        })
    }

    fn probe_grad(&self, u: &[f64], probe: ProbeId) -> Option<Vec<f64>> {
        let (w1, w2, _) = simplex2(u[2]);
        let dw1_dt = w1 * w2;
        match probe {
            ProbeId::MinWeight => {
                // min(w1, w2): follow whichever branch is active; sign(0) := +1
                // picks the w1 branch on ties.
                let d = if w1 <= w2 { dw1_dt } else { -dw1_dt };
                Some(vec![0.0, 0.0, d])
            }
            ProbeId::RedundantWeight => Some(vec![0.0, 0.0, -dw1_dt]),
            ProbeId::Separation => {
                let s = if u[0] - u[1] >= 0.0 { 1.0 } else { -1.0 };
                Some(vec![s, -s, 0.0])
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_with_alpha(alpha: f64) -> BoundaryMixture {
        BoundaryMixture::from_spec(
            &ModelSpec::new(ModelId::BoundaryMixture).with_hyper("dirichlet_alpha", alpha),
        )
        .unwrap()
    }

    #[test]
    fn equal_weight_density_between_modes() {
        // Equal weights, means ±1, datum 0: both components contribute
        // φ(1) each, so ℓ = log(exp(−½)/√(2π)).
        let m = model_with_alpha(1.0);
        let pv = m.constrain(&[1.0, -1.0, 0.0]);
        let data = Dataset::new(vec![0.0], 1, 1, 0).unwrap();
        let ll = m.loglik_terms(&pv, &data).unwrap();
        assert!((ll[0] + 1.418_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_prior_values() {
        // α = 1 is uniform on the simplex: the Dirichlet part is 0, so the
        // prior reduces to the two mean densities.
        let m = model_with_alpha(1.0);
        let pv = m.constrain(&[0.0, 0.0, 0.3]);
        let means_only = -LN_2PI - 2.0 * 3.0f64.ln();
        assert!((m.log_prior(&pv).unwrap() - means_only).abs() < 1e-12);

        // α = 10 at (0.5, 0.5): ln Γ(20) − 2 ln Γ(10) + 9 ln 0.25, evaluated
        // directly from ln 19! and ln 9!.
        let m = model_with_alpha(10.0);
        let pv = m.constrain(&[0.0, 0.0, 0.0]);
        let dirichlet = 121_645_100_408_832_000.0f64.ln() - 2.0 * 362_880.0f64.ln()
            + 9.0 * 0.25f64.ln();
        assert!((m.log_prior(&pv).unwrap() - (means_only + dirichlet)).abs() < 1e-9);
    }

    #[test]
    fn simplex_invariants() {
        let m = model_with_alpha(0.5);
        for t in [-30.0, -2.0, 0.0, 1.3, 25.0] {
            let pv = m.constrain(&[0.0, 0.0, t]);
            let (w1, w2) = (pv.constrained[2], pv.constrained[3]);
            assert!(w1 > 0.0 && w2 > 0.0);
            assert!((w1 + w2 - 1.0).abs() < 1e-14);
            let back = m.unconstrain(&pv.constrained);
            if t.abs() < 10.0 {
                assert!((back[2] - t).abs() < 1e-9 * t.abs().max(1.0));
            }
        }
    }

    #[test]
    fn probes() {
        let m = model_with_alpha(1.0);
        let pv = m.constrain(&[0.4, -0.2, simplex2_inverse(0.8)]);
        let w_min = m.probe_value(&pv, ProbeId::MinWeight).unwrap();
        assert!((w_min - 0.2).abs() < 1e-12);
        let sep = m.probe_value(&pv, ProbeId::Separation).unwrap();
        assert!((sep - 0.6).abs() < 1e-12);
        assert!(m.probe_value(&pv, ProbeId::GaugeCoordinate).is_err());
    }
}
