//! Convergence diagnostics: effective sample size via Geyer's initial
//! positive sequence, and split potential scale reduction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssResult {
    pub ess: f64,
    /// Series was constant: ESS reported as S by convention.
    pub constant: bool,
    /// Negative autocorrelation pushed the raw estimate above S; clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhatResult {
    pub rhat: f64,
    pub constant: bool,
}

fn group_chains(x: &[f64], chain_index: &[u32]) -> Result<Vec<Vec<f64>>> {
    if x.len() != chain_index.len() {
        return Err(Error::ShapeMismatch { left: x.len(), right: chain_index.len() });
    }
    let mut ids: Vec<u32> = chain_index.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut chains: Vec<Vec<f64>> = vec![Vec::new(); ids.len()];
    for (&v, &c) in x.iter().zip(chain_index) {
        let slot = ids.binary_search(&c).unwrap();
        chains[slot].push(v);
    }
    // Unequal chain lengths are truncated to the shortest.
    let min_len = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    for c in chains.iter_mut() {
        c.truncate(min_len);
    }
    Ok(chains)
}

fn chain_mean_var(c: &[f64]) -> (f64, f64) {
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let var = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Autocovariance at lag t with the 1/N convention.
fn autocov(c: &[f64], mean: f64, t: usize) -> f64 {
    let n = c.len();
    let mut s = 0.0;
    for i in 0..n - t {
        s += (c[i] - mean) * (c[i + t] - mean);
    }
    s / n as f64
}

/// Effective sample size from pooled chains. Truncates the autocorrelation
/// sum at the first non-positive Geyer pair.
pub fn effective_sample_size(x: &[f64], chain_index: &[u32]) -> Result<EssResult> {
    let chains = group_chains(x, chain_index)?;
    let c_count = chains.len();
    let n = chains.first().map(|c| c.len()).unwrap_or(0);
    let total = c_count * n;
    if !(c_count >= 2 || total >= 100) {
        return Err(Error::InsufficientSamples { need: 100, got: total });
    }
    if n < 4 {
        return Err(Error::InsufficientSamples { need: 4, got: n });
    }

    let stats: Vec<(f64, f64)> = chains.iter().map(|c| chain_mean_var(c)).collect();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / c_count as f64;
    let var_plus = if c_count >= 2 {
        let grand = stats.iter().map(|s| s.0).sum::<f64>() / c_count as f64;
        let b_over_n = stats.iter().map(|s| (s.0 - grand) * (s.0 - grand)).sum::<f64>()
            / (c_count - 1) as f64;
        w * (n as f64 - 1.0) / n as f64 + b_over_n
    } else {
        w * (n as f64 - 1.0) / n as f64 + w / n as f64
    };

    if var_plus <= 0.0 || w == 0.0 {
        return Ok(EssResult { ess: total as f64, constant: true, clamped: false });
    }

    let max_lag = (n - 1).min(1000);
    let rho = |t: usize| -> f64 {
        let mean_acov = chains
            .iter()
            .zip(&stats)
            .map(|(c, s)| autocov(c, s.0, t))
            .sum::<f64>()
            / c_count as f64;
        1.0 - (w - mean_acov) / var_plus
    };

    // τ = −1 + 2 Σ Γ_k over initial positive pairs Γ_k = ρ_{2k} + ρ_{2k+1}.
    let mut tau = -1.0;
    let mut t = 0usize;
    while t + 1 <= max_lag {
        let pair = if t == 0 { 1.0 + rho(1) } else { rho(t) + rho(t + 1) };
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        t += 2;
    }

    let raw = total as f64 / tau.max(f64::MIN_POSITIVE);
    let clamped = raw > total as f64;
    Ok(EssResult {
        ess: raw.clamp(1.0, total as f64),
        constant: false,
        clamped,
    })
}

/// Split potential scale reduction: each chain is halved and R̂ is computed
/// over the 2C half-chains. Values at or below 1.05 indicate mixing.
pub fn potential_scale_reduction(x: &[f64], chain_index: &[u32]) -> Result<RhatResult> {
    let chains = group_chains(x, chain_index)?;
    if chains.len() < 2 {
        return Err(Error::SingleChainError);
    }
    let n = chains[0].len();
    if n < 4 {
        return Err(Error::SingleChainError);
    }
    let half = n / 2;
    let mut split: Vec<&[f64]> = Vec::with_capacity(chains.len() * 2);
    for c in &chains {
        split.push(&c[..half]);
        split.push(&c[c.len() - half..]);
    }

    let stats: Vec<(f64, f64)> = split.iter().map(|c| chain_mean_var(c)).collect();
    let m = split.len() as f64;
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m;
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
    let b = half as f64 / (m - 1.0)
        * stats.iter().map(|s| (s.0 - grand) * (s.0 - grand)).sum::<f64>();

    if w == 0.0 {
        if b == 0.0 {
            return Ok(RhatResult { rhat: 1.0, constant: true });
        }
        return Ok(RhatResult { rhat: f64::INFINITY, constant: false });
    }

    let var_plus = (half as f64 - 1.0) / half as f64 * w + b / half as f64;
    Ok(RhatResult { rhat: (var_plus / w).sqrt().max(1.0), constant: false })
}
