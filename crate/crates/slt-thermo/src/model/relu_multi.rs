//! One-hidden-layer ReLU regression with K exchangeable units,
//! y = Σ_k a_k·ReLU(w_k·x + b_k) + ε. Exhibits both per-unit sign ambiguity
//! and K! relabeling symmetry; the truth uses two informative units and one
//! near-zero unit so a slack direction survives at large n.

use super::{
    require_positive, Dataset, Model, ModelId, ModelSpec, ParameterVector, ProbeId, SuffStats,
    TargetParts,
};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

const LN_2PI: f64 = 1.837_877_066_409_345_4;

pub struct ReluMulti {
    units: usize,
    noise_sd: f64,
    prior_sd: f64,
    x_half_range: f64,
    death_threshold: f64,
    truth: Vec<f64>, // [a_k, w_k, b_k] per unit
}

#[inline]
fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

fn default_truth_unit(k: usize) -> (f64, f64, f64) {
    match k {
        0 => (1.2, 1.0, 0.5),
        1 => (-0.9, 0.8, -0.3),
        _ => (0.05, 0.05, 0.0),
    }
}

impl ReluMulti {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let units = spec.hyper("units", 3.0);
        if units.fract() != 0.0 || units < 1.0 {
            return Err(Error::invalid_value("hyperparameters.units", "must be an integer >= 1"));
        }
        let units = units as usize;
        let mut truth = Vec::with_capacity(3 * units);
        for k in 0..units {
            let (a, w, b) = default_truth_unit(k);
            truth.push(spec.truth(&format!("a{}", k + 1), a));
            truth.push(spec.truth(&format!("w{}", k + 1), w));
            truth.push(spec.truth(&format!("b{}", k + 1), b));
        }
        Ok(ReluMulti {
            units,
            noise_sd: require_positive("hyperparameters.noise_sd", spec.hyper("noise_sd", 0.3))?,
            prior_sd: require_positive("hyperparameters.prior_sd", spec.hyper("prior_sd", 1.0))?,
            x_half_range: require_positive(
                "hyperparameters.x_half_range",
                spec.hyper("x_half_range", 2.0),
            )?,
            death_threshold: require_positive(
                "hyperparameters.death_threshold",
                spec.hyper("death_threshold", 0.1),
            )?,
            truth,
        })
    }

    pub fn units(&self) -> usize {
        self.units
    }

    fn predict(&self, params: &[f64], x: f64) -> f64 {
        let mut y = 0.0;
        for k in 0..self.units {
            y += params[3 * k] * relu(params[3 * k + 1] * x + params[3 * k + 2]);
        }
        y
    }

    /// Standard deviation of the unit's output a·ReLU(w·x + b) over a fixed
    /// grid spanning the input range. Inactive or near-zero units score ~0
    /// however large their raw parameters are.
    fn contribution_sd(&self, a: f64, w: f64, b: f64) -> f64 {
        const GRID: usize = 16;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for g in 0..GRID {
            let x = self.x_half_range * (2.0 * (g as f64 + 0.5) / GRID as f64 - 1.0);
            let v = a * relu(w * x + b);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / GRID as f64;
        (sum_sq / GRID as f64 - mean * mean).max(0.0).sqrt()
    }

    /// Unit indices sorted by output contribution descending, ties by index.
    fn dominance_order(&self, params: &[f64]) -> Vec<usize> {
        let scores: Vec<f64> = (0..self.units)
            .map(|k| self.contribution_sd(params[3 * k], params[3 * k + 1], params[3 * k + 2]))
            .collect();
        let mut idx: Vec<usize> = (0..self.units).collect();
        idx.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap().then(i.cmp(&j)));
        idx
    }

    /// Lehmer index of the permutation that sorts slopes ascending.
    fn rank_code(&self, params: &[f64]) -> usize {
        let mut idx: Vec<usize> = (0..self.units).collect();
        idx.sort_by(|&i, &j| {
            params[3 * i + 1]
                .partial_cmp(&params[3 * j + 1])
                .unwrap()
                .then(i.cmp(&j))
        });
        let mut code = 0usize;
        let k = self.units;
        let mut remaining: Vec<usize> = (0..k).collect();
        for (pos, &unit) in idx.iter().enumerate() {
            let rank = remaining.iter().position(|&r| r == unit).unwrap();
            code += rank * factorial(k - 1 - pos);
            remaining.remove(rank);
        }
        code
    }
}

fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}

impl Model for ReluMulti {
    fn id(&self) -> ModelId {
        ModelId::ReluMulti
    }

    fn dim(&self) -> usize {
        3 * self.units
    }

    fn data_cols(&self) -> usize {
        2
    }

    fn data_col_names(&self) -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    fn probes(&self) -> &[ProbeId] {
        &[ProbeId::SignConfiguration, ProbeId::PermutationIndex, ProbeId::UnitDeathIndicator]
    }

    fn probe_levels(&self, probe: ProbeId) -> Option<usize> {
        match probe {
            ProbeId::SignConfiguration => Some(1 << self.units.saturating_sub(1).max(1)),
            ProbeId::PermutationIndex => Some(factorial(self.units)),
            ProbeId::UnitDeathIndicator => Some(self.units + 1),
            _ => None,
        }
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
            let y = self.predict(&self.truth, x) + self.noise_sd * rng.normal();
            vals.push(x);
            vals.push(y);
        }
        Dataset::new(vals, n, 2, rng.seed()).expect("generated data is finite")
    }

    fn loglik_terms(&self, pv: &ParameterVector, data: &Dataset) -> Result<Vec<f64>> {
        if pv.constrained.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteDensity("relu_multi parameters"));
        }
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        Ok((0..data.n())
            .map(|i| {
                let row = data.row(i);
                let r = row[1] - self.predict(&pv.constrained, row[0]);
                c - r * r / (2.0 * s2)
            })
            .collect())
    }

    fn log_prior(&self, pv: &ParameterVector) -> Result<f64> {
        let d = self.dim() as f64;
        let s2 = self.prior_sd * self.prior_sd;
        let ssq: f64 = pv.constrained.iter().map(|x| x * x).sum();
        Ok(-0.5 * d * LN_2PI - d * self.prior_sd.ln() - ssq / (2.0 * s2))
    }

    fn target_parts(&self, u: &[f64], data: &Dataset, _ss: &SuffStats) -> TargetParts {
        let s2 = self.noise_sd * self.noise_sd;
        let c = -0.5 * LN_2PI - self.noise_sd.ln();
        let mut ll = 0.0;
        let mut grad = vec![0.0; self.dim()];
        let mut kink = false;
        for i in 0..data.n() {
            let row = data.row(i);
            let (x, y) = (row[0], row[1]);
            let mut pred = 0.0;
            for k in 0..self.units {
                pred += u[3 * k] * relu(u[3 * k + 1] * x + u[3 * k + 2]);
            }
            let r = y - pred;
            ll += c - r * r / (2.0 * s2);
            for k in 0..self.units {
                let z = u[3 * k + 1] * x + u[3 * k + 2];
                if z == 0.0 {
                    kink = true;
                } else if z > 0.0 {
                    grad[3 * k] += r * z / s2;
                    grad[3 * k + 1] += r * u[3 * k] * x / s2;
                    grad[3 * k + 2] += r * u[3 * k] / s2;
                } else {
                    // unit inactive: only the output weight sees ReLU(z) = 0
                    grad[3 * k] += 0.0;
                }
            }
        }
        let pv = self.constrain(u);
        let ps2 = self.prior_sd * self.prior_sd;
        TargetParts {
            loglik_sum: ll,
            log_prior: self.log_prior(&pv).unwrap(),
            log_jacobian: 0.0,
            grad_loglik_sum: grad,
            grad_log_prior: u.iter().map(|x| -x / ps2).collect(),
            grad_log_jacobian: vec![0.0; self.dim()],
            kink_touched: kink,
        }
    }

    fn probe_value(&self, pv: &ParameterVector, probe: ProbeId) -> Result<f64> {
        self.check_probe(probe)?;
        let p = &pv.constrained;
        Ok(match probe {
            ProbeId::SignConfiguration => {
                let order = self.dominance_order(p);
                let take = self.units.saturating_sub(1).max(1);
                let mut code = 0usize;
                for (bit, &k) in order.iter().take(take).enumerate() {
                    if p[3 * k + 1] > 0.0 {
                        code |= 1 << bit;
                    }
                }
                code as f64
            }
            ProbeId::PermutationIndex => self.rank_code(p) as f64,
            _ => {
                let mut dead = 0;
                for k in 0..self.units {
                    let norm = (p[3 * k] * p[3 * k]
                        + p[3 * k + 1] * p[3 * k + 1]
                        + p[3 * k + 2] * p[3 * k + 2])
                        .sqrt();
                    if norm < self.death_threshold {
                        dead += 1;
                    }
                }
                dead as f64
            }
        })
    }

    fn probe_grad(&self, _u: &[f64], _probe: ProbeId) -> Option<Vec<f64>> {
        None
    }

    /// Posterior unit-death rate: the mean fraction of units whose weight
    /// norm sits below the death threshold.
    fn report_extras(
        &self,
        samples: &crate::sampler::PosteriorSamples,
    ) -> std::collections::BTreeMap<String, f64> {
        let mut extras = std::collections::BTreeMap::new();
        if let Ok(series) = samples.probe(ProbeId::UnitDeathIndicator) {
            let rate = crate::math::mean(series) / self.units as f64;
            extras.insert("unit_death_rate".to_string(), rate);
        }
        extras
    }
}
