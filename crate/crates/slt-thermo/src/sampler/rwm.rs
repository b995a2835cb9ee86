//! Gaussian random-walk Metropolis. The fallback for non-differentiable
//! tilts; proposal scale adapts toward 0.35 acceptance during warmup.

use super::{draw_init, ChainOutput, SamplerConfig, Target};
use crate::error::Result;
use crate::rng::SeededRng;

const TARGET_ACCEPT: f64 = 0.35;

pub(crate) fn run_chain(
    target: &Target,
    cfg: &SamplerConfig,
    mut rng: SeededRng,
) -> Result<ChainOutput> {
    let dim = target.model.dim();
    let mut u = draw_init(target, &mut rng, dim)?;
    let mut logp = target.log_density(&u);
    let mut log_scale = cfg.initial_step_size.max(1e-6).ln();

    let step = |u: &mut Vec<f64>, logp: &mut f64, scale: f64, rng: &mut SeededRng| -> bool {
        let prop: Vec<f64> = u.iter().map(|x| x + scale * rng.normal()).collect();
        let lp = target.log_density(&prop);
        let alpha = if lp.is_finite() { (lp - *logp).exp().min(1.0) } else { 0.0 };
        if rng.next_f64() < alpha {
            *u = prop;
            *logp = lp;
            true
        } else {
            false
        }
    };

    for t in 0..cfg.warmup {
        let accepted = step(&mut u, &mut logp, log_scale.exp(), &mut rng);
        // Robbins-Monro on the log proposal scale.
        let gain = ((t + 10) as f64).powf(-0.6);
        log_scale += gain * ((accepted as u8 as f64) - TARGET_ACCEPT);
    }
    let scale = log_scale.exp();

    let mut draws = Vec::with_capacity(cfg.draws);
    let mut accepted_count = 0;
    for _ in 0..cfg.draws {
        if step(&mut u, &mut logp, scale, &mut rng) {
            accepted_count += 1;
        }
        draws.push(u.clone());
    }

    Ok(ChainOutput { draws, accepted: accepted_count, divergences: 0 })
}
