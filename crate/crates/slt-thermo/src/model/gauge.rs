//! Rank-1 matrix observation model Y = u vᵀ + ε with the continuous gauge
//! freedom (u, v) ~ (c·u, v/c). The likelihood factors through the per-cell
//! mean of the observed matrices, so leapfrog cost is independent of n.

use super::{
    require_positive, Dataset, Model, ModelId, ModelSpec, ParameterVector, ProbeId, SuffStats,
    TargetParts,
};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

const LN_2PI: f64 = 1.837_877_066_409_345_4;

pub struct GaugeRank1 {
    p: usize,
    q: usize,
    noise_sd: f64,
    true_u: Vec<f64>,
    true_v: Vec<f64>,
}

impl GaugeRank1 {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let p = spec.hyper("p", 5.0);
        let q = spec.hyper("q", 5.0);
        for (name, v) in [("p", p), ("q", q)] {
            if v.fract() != 0.0 || v < 2.0 {
                return Err(Error::invalid_value(
                    format!("hyperparameters.{name}"),
                    "must be an integer >= 2",
                ));
            }
        }
        let (p, q) = (p as usize, q as usize);
        let true_u: Vec<f64> = (0..p)
            .map(|i| spec.truth(&format!("u{}", i + 1), if i % 2 == 0 { 1.0 } else { -0.8 }))
            .collect();
        let true_v: Vec<f64> = (0..q)
            .map(|j| spec.truth(&format!("v{}", j + 1), if j % 2 == 0 { 0.9 } else { -0.6 }))
            .collect();
        Ok(GaugeRank1 {
            p,
            q,
            noise_sd: require_positive("hyperparameters.noise_sd", spec.hyper("noise_sd", 0.1))?,
            true_u,
            true_v,
        })
    }

    fn cells(&self) -> usize {
        self.p * self.q
    }
}

impl Model for GaugeRank1 {
    fn id(&self) -> ModelId {
        ModelId::GaugeRank1
    }

    fn dim(&self) -> usize {
        self.p + self.q
    }

    fn data_cols(&self) -> usize {
        self.cells()
    }

    fn data_col_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.cells());
        for j in 0..self.p {
            for k in 0..self.q {
                names.push(format!("y_{}_{}", j + 1, k + 1));
            }
        }
        names
    }

    fn probes(&self) -> &[ProbeId] {
        &[ProbeId::GaugeCoordinate]
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
        let mut vals = Vec::with_capacity(n * self.cells());
        for _ in 0..n {
            for j in 0..self.p {
                for k in 0..self.q {
                    vals.push(self.true_u[j] * self.true_v[k] + self.noise_sd * rng.normal());
                }
            }
        }
        Dataset::new(vals, n, self.cells(), rng.seed()).expect("generated data is finite")
    }

    fn loglik_terms(&self, pv: &ParameterVector, data: &Dataset) -> Result<Vec<f64>> {
        let (u, v) = pv.constrained.split_at(self.p);
        if pv.constrained.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteDensity("gauge_rank1 factors"));
        }
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        let mut out = Vec::with_capacity(data.n());
        for i in 0..data.n() {
            let row = data.row(i);
            let mut l = 0.0;
            for j in 0..self.p {
                for k in 0..self.q {
                    let r = row[j * self.q + k] - u[j] * v[k];
                    l += c - r * r / (2.0 * s2);
                }
            }
            out.push(l);
        }
        Ok(out)
    }

    fn log_prior(&self, pv: &ParameterVector) -> Result<f64> {
        let d = self.dim() as f64;
        let ssq: f64 = pv.constrained.iter().map(|x| x * x).sum();
        Ok(-0.5 * d * LN_2PI - 0.5 * ssq)
    }

    fn suff_stats(&self, data: &Dataset) -> SuffStats {
        let cells = self.cells();
        let n = data.n();
        let mut mean = vec![0.0; cells];
        for i in 0..n {
            for (m, &y) in mean.iter_mut().zip(data.row(i)) {
                *m += y;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let mut resid_sq = 0.0;
        for i in 0..n {
            for (m, &y) in mean.iter().zip(data.row(i)) {
                resid_sq += (y - m) * (y - m);
            }
        }
        SuffStats::MatrixMean { n: n as f64, mean, resid_sq }
    }

    fn loglik_sum(&self, pv: &ParameterVector, data: &Dataset, ss: &SuffStats) -> f64 {
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        match ss {
            SuffStats::MatrixMean { n, mean, resid_sq } => {
                let (u, v) = pv.constrained.split_at(self.p);
                let mut fit = 0.0;
                for j in 0..self.p {
                    for k in 0..self.q {
                        let r = mean[j * self.q + k] - u[j] * v[k];
                        fit += r * r;
                    }
                }
                n * self.cells() as f64 * c - (resid_sq + n * fit) / (2.0 * s2)
            }
            _ => self
                .loglik_terms(pv, data)
                .map(|t| t.iter().sum())
                .unwrap_or(f64::NEG_INFINITY),
        }
    }

    fn target_parts(&self, uvec: &[f64], data: &Dataset, ss: &SuffStats) -> TargetParts {
        let pv = self.constrain(uvec);
        let (u, v) = uvec.split_at(self.p);
        let s2 = self.noise_sd * self.noise_sd;
        let owned;
        let (n, mean) = match ss {
            SuffStats::MatrixMean { n, mean, .. } => (*n, mean),
            _ => {
                owned = self.suff_stats(data);
                match &owned {
                    SuffStats::MatrixMean { n, mean, .. } => (*n, mean),
                    _ => unreachable!(),
                }
            }
        };
        let mut grad = vec![0.0; self.dim()];
        for j in 0..self.p {
            for k in 0..self.q {
                let r = mean[j * self.q + k] - u[j] * v[k];
                grad[j] += n * r * v[k] / s2;
                grad[self.p + k] += n * r * u[j] / s2;
            }
        }
        TargetParts {
            loglik_sum: self.loglik_sum(&pv, data, ss),
            log_prior: self.log_prior(&pv).unwrap(),
            log_jacobian: 0.0,
            grad_loglik_sum: grad,
            grad_log_prior: uvec.iter().map(|x| -x).collect(),
            grad_log_jacobian: vec![0.0; self.dim()],
            kink_touched: false,
        }
    }

    fn probe_value(&self, pv: &ParameterVector, probe: ProbeId) -> Result<f64> {
        self.check_probe(probe)?;
        let (u, v) = pv.constrained.split_at(self.p);
        let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(0.5 * (nu.ln() - nv.ln()))
    }

    fn probe_grad(&self, uvec: &[f64], probe: ProbeId) -> Option<Vec<f64>> {
        if probe != ProbeId::GaugeCoordinate {
            return None;
        }
        let (u, v) = uvec.split_at(self.p);
        let nu2: f64 = u.iter().map(|x| x * x).sum();
        let nv2: f64 = v.iter().map(|x| x * x).sum();
        let mut g = Vec::with_capacity(self.dim());
        g.extend(u.iter().map(|x| x / (2.0 * nu2)));
        g.extend(v.iter().map(|x| -x / (2.0 * nv2)));
        Some(g)
    }
}
