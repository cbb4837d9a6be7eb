//! Softmax sampling under an emulated square-root query-cost model.
//!
//! Sample generation and cost accounting are deliberately decoupled: samples
//! come from an exact rejection sampler over a top-K-truncated proposal (so
//! their law is exactly the softmax distribution), while the ledger is
//! charged what the emulated quantum procedure would pay — a top-K finding
//! charge of `ceil(c_topk * sqrt(K*N) * ln(1/delta))` plus, per sample, two
//! oracle calls for each of `ceil(c_amp / sqrt(p))` amplification rounds,
//! where `p >= K/N` is the success probability of the truncated proposal.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{evaluate, FunctionFamily, QueryLedger};
use crate::rng::{purpose, StreamKey};
use crate::smoothing::SmoothingContext;

/// How amplification rounds are drawn per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplificationMode {
    /// `ceil(c_amp / sqrt(p))` rounds, always.
    #[default]
    Deterministic,
    /// Geometric draw with mean `c_amp / sqrt(p)`, for cost-variance studies.
    Stochastic,
}

/// Sampler knobs; `delta` is the failure probability routed to the top-K
/// charge and, when `emulate_failure` is set, to an emulated top-set
/// corruption event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub delta: f64,
    pub amplification: AmplificationMode,
    pub emulate_failure: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            delta: 0.01,
            amplification: AmplificationMode::Deterministic,
            emulate_failure: false,
        }
    }
}

/// Exact top-K indices of the center values (ties broken by smallest index).
///
/// Values are read through uncharged emulator access; the ledger is charged
/// the maximum-finding formula `ceil(c_topk * sqrt(K*N) * ln(1/delta))`.
pub fn top_k(
    family: &FunctionFamily,
    center: &[f64],
    k: usize,
    delta: f64,
    ledger: &mut QueryLedger,
) -> Result<Vec<usize>> {
    let n = family.n_functions();
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= {n}, got {k}")));
    }
    check_delta(delta)?;
    let values: Vec<f64> = (0..n).map(|i| family.value(i, center)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let mut top: Vec<usize> = order[..k].to_vec();
    top.sort_unstable();
    ledger.charge_quantum(top_k_charge(k, n, delta, ledger.constants().c_topk));
    Ok(top)
}

/// The documented top-K finding charge.
pub fn top_k_charge(k: usize, n: usize, delta: f64, c_topk: f64) -> u64 {
    (c_topk * ((k * n) as f64).sqrt() * (1.0 / delta).ln()).ceil() as u64
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("need delta in (0,1), got {delta}")));
    }
    Ok(())
}

/// Top-K-truncated proposal distribution over `[N]`.
///
/// Off the top set every weight is lifted to the threshold weight
/// `exp(h/eps')`, so the proposal dominates the softmax target and rejection
/// sampling against it is exact with acceptance probability
/// `success_prob = W / Z >= K/N`.
#[derive(Debug, Clone)]
pub struct TruncatedDistribution {
    in_top: Vec<bool>,
    top_set: Vec<usize>,
    threshold: f64,
    /// Center values shifted by their maximum (overflow-safe exponents).
    shifted_values: Vec<f64>,
    shifted_threshold: f64,
    epsilon_prime: f64,
    weights: Vec<f64>,
    cdf: Vec<f64>,
    success_prob: f64,
}

impl TruncatedDistribution {
    pub fn top_set(&self) -> &[usize] {
        &self.top_set
    }

    /// Threshold `h = min_{i in H} f_i(center)`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Proposal weights `w'`; they sum to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Acceptance probability `p = W/Z` of the rejection loop.
    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    /// One exact softmax draw: propose from `w'`, accept top-set indices
    /// unconditionally and off-set indices with probability
    /// `exp((f_i - h)/eps')`. Proposal trials are uncharged.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        loop {
            let u: f64 = rng.random_range(0.0..1.0);
            let i = match self.cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                Ok(pos) => pos + 1,
                Err(pos) => pos,
            }
            .min(self.cdf.len() - 1);
            if self.in_top[i] {
                return i;
            }
            let accept =
                ((self.shifted_values[i] - self.shifted_threshold) / self.epsilon_prime).exp();
            if rng.random_range(0.0..1.0) < accept.min(1.0) {
                return i;
            }
        }
    }
}

/// Build the truncated proposal for a top set from [`top_k`].
///
/// Asserts the preprocessing bound `success_prob >= K/N`, which holds for
/// every exact top set.
pub fn build_truncated(
    family: &FunctionFamily,
    center: &[f64],
    top_set: &[usize],
    ctx: &SmoothingContext,
) -> TruncatedDistribution {
    let dist = build_truncated_inner(family, center, top_set, ctx);
    let k = top_set.len() as f64;
    let n = family.n_functions() as f64;
    assert!(
        dist.success_prob >= k / n - 1e-12,
        "preprocessing bound violated: p = {} < K/N = {}",
        dist.success_prob,
        k / n
    );
    dist
}

fn build_truncated_inner(
    family: &FunctionFamily,
    center: &[f64],
    top_set: &[usize],
    ctx: &SmoothingContext,
) -> TruncatedDistribution {
    let n = family.n_functions();
    let k = top_set.len();
    let ep = ctx.epsilon_prime();
    let values: Vec<f64> = (0..n).map(|i| family.value(i, center)).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = values.iter().map(|v| v - max).collect();

    let mut in_top = vec![false; n];
    for &i in top_set {
        in_top[i] = true;
    }
    let threshold = top_set
        .iter()
        .map(|&i| values[i])
        .fold(f64::INFINITY, f64::min);
    let shifted_threshold = threshold - max;

    let off_weight = (shifted_threshold / ep).exp();
    let mut partition = (n - k) as f64 * off_weight;
    for &i in top_set {
        partition += (shifted[i] / ep).exp();
    }
    let total: f64 = shifted.iter().map(|v| (v / ep).exp()).sum();
    let success_prob = (total / partition).min(1.0);

    let weights: Vec<f64> = (0..n)
        .map(|i| {
            if in_top[i] {
                (shifted[i] / ep).exp() / partition
            } else {
                off_weight / partition
            }
        })
        .collect();
    let mut cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cdf.push(acc);
    }
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }

    TruncatedDistribution {
        in_top,
        top_set: top_set.to_vec(),
        threshold,
        shifted_values: shifted,
        shifted_threshold,
        epsilon_prime: ep,
        weights,
        cdf,
        success_prob,
    }
}

/// Emulated amplification rounds for one sample at success probability `p`.
pub fn amplification_rounds(
    p: f64,
    c_amp: f64,
    mode: AmplificationMode,
    rng: &mut ChaCha8Rng,
) -> Result<u64> {
    if !(p > 0.0) {
        return Err(Error::Internal(format!("success probability {p} not positive")));
    }
    let p = p.min(1.0);
    match mode {
        AmplificationMode::Deterministic => Ok((c_amp / p.sqrt()).ceil().max(1.0) as u64),
        AmplificationMode::Stochastic => {
            let q = (p.sqrt() / c_amp).min(1.0);
            let mut rounds = 1u64;
            while rng.random_range(0.0..1.0) >= q && rounds < 1_000_000 {
                rounds += 1;
            }
            Ok(rounds)
        }
    }
}

/// Draw `t_samples` i.i.d. softmax samples under the quantum cost model.
///
/// The top-set size is `K = min(t_samples, N)`; the ledger is charged the
/// top-K formula once plus two queries per amplification round per sample,
/// for a total of order `sqrt(N * t_samples) * ln(1/delta)`.
pub fn sample_batch(
    family: &FunctionFamily,
    center: &[f64],
    t_samples: usize,
    cfg: &SamplerConfig,
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
    key: &StreamKey,
) -> Result<Vec<usize>> {
    if t_samples == 0 {
        return Err(Error::invalid("t_samples", "need at least one sample"));
    }
    check_delta(cfg.delta)?;
    let n = family.n_functions();
    let k = t_samples.min(n);
    let mut top = top_k(family, center, k, cfg.delta, ledger)?;

    let mut corrupted = false;
    if cfg.emulate_failure && k < n {
        let mut failure_rng = key.rng(purpose::FAILURE);
        if failure_rng.random_range(0.0..1.0) < cfg.delta {
            // Failure path of the maximum-finding subroutine: one top-set
            // entry is swapped for a random outsider.
            let out: Vec<usize> = (0..n).filter(|i| !top.contains(i)).collect();
            let swap_in = out[failure_rng.random_range(0..out.len())];
            let swap_out = failure_rng.random_range(0..top.len());
            top[swap_out] = swap_in;
            top.sort_unstable();
            corrupted = true;
        }
    }

    let dist = if corrupted {
        build_truncated_inner(family, center, &top, ctx)
    } else {
        build_truncated(family, center, &top, ctx)
    };

    let mut sampling_rng = key.rng(purpose::SAMPLING);
    let mut amp_rng = key.rng(purpose::AMPLIFICATION);
    let c_amp = ledger.constants().c_amp;
    let mut samples = Vec::with_capacity(t_samples);
    for _ in 0..t_samples {
        samples.push(dist.draw(&mut sampling_rng));
        let rounds = amplification_rounds(dist.success_prob(), c_amp, cfg.amplification, &mut amp_rng)?;
        ledger.charge_quantum(2 * rounds);
    }
    Ok(samples)
}

/// Classical arm: charge `N` value queries for the weights once, then draws
/// are free. Uses the same proposal construction and the same sampling
/// stream as [`sample_batch`], so matched keys give identical samples.
pub fn classical_sample_batch(
    family: &FunctionFamily,
    center: &[f64],
    t_samples: usize,
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
    key: &StreamKey,
) -> Result<Vec<usize>> {
    if t_samples == 0 {
        return Err(Error::invalid("t_samples", "need at least one sample"));
    }
    let n = family.n_functions();
    for i in 0..n {
        let _ = evaluate(family, i, center, ledger)?;
    }
    let k = t_samples.min(n);
    let values: Vec<f64> = (0..n).map(|i| family.value(i, center)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let mut top: Vec<usize> = order[..k].to_vec();
    top.sort_unstable();
    let dist = build_truncated(family, center, &top, ctx);

    let mut sampling_rng = key.rng(purpose::SAMPLING);
    Ok((0..t_samples).map(|_| dist.draw(&mut sampling_rng)).collect())
}
