//! `minmax bench-sampler`: charged-cost sweep of the softmax sampler over N
//! for the quantum and classical arms, plus a distribution-exactness check.

use serde::{Deserialize, Serialize};

use minmax_core::problem::{make_affine_family, QueryLedger};
use minmax_core::qsampler::{classical_sample_batch, sample_batch, SamplerConfig};
use minmax_core::rng::StreamKey;
use minmax_core::smoothing::{softmax_weights, SmoothingContext};
use minmax_core::{stats, trials};

use crate::config::CommonArgs;
use crate::output::{self, TOOL_VERSION};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct BenchSamplerConfig {
    pub seed: u64,
    /// Samples requested per batch (the top-set size is min(T, N)).
    pub t_samples: usize,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub dim: usize,
    /// Family size for the exactness check.
    pub exactness_n: usize,
    pub exactness_draws: usize,
}

impl Default for BenchSamplerConfig {
    fn default() -> Self {
        BenchSamplerConfig {
            seed: 0,
            t_samples: 64,
            n_values: (6..=14).map(|k| 1usize << k).collect(),
            trials: 20,
            delta: 0.01,
            epsilon: 0.5,
            dim: 2,
            exactness_n: 64,
            exactness_draws: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    n: usize,
    arm: &'static str,
    trial: usize,
    charged: u64,
    version: &'static str,
}

#[derive(Debug, Serialize)]
struct Summary {
    quantum_slope: f64,
    classical_slope: f64,
    tv_distance: f64,
    chi_square_p_value: f64,
    version: &'static str,
}

pub fn run(common: &CommonArgs) -> anyhow::Result<()> {
    common.configure_jobs();
    let mut cfg = common.load_config::<BenchSamplerConfig>()?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }

    let (rows, quantum_slope, classical_slope) = sweep(&cfg);
    let (tv, chi_p) = exactness(&cfg);

    let out_dir = common.out_dir();
    crate::config::ensure_out_dir(&out_dir)?;
    output::write_csv(&out_dir.join("sampler_bench.csv"), &rows)?;
    output::write_json_report(
        &out_dir.join("sampler_summary.json"),
        &Summary {
            quantum_slope,
            classical_slope,
            tv_distance: tv,
            chi_square_p_value: chi_p,
            version: TOOL_VERSION,
        },
    )?;

    println!(
        "bench-sampler quantum_slope={quantum_slope:.3} classical_slope={classical_slope:.3} tv={tv:.4} chi2_p={chi_p:.4}"
    );
    Ok(())
}

/// Run the N-sweep and fit log-log slopes of the mean charge per arm.
fn sweep(cfg: &BenchSamplerConfig) -> (Vec<SweepRow>, f64, f64) {
    let jobs: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();

    let cfg_ref = &*cfg;
    let results = trials::run(jobs.len(), |j| {
        let (n, trial) = jobs[j];
        let (q, c) = one_trial(cfg_ref, n, trial);
        (n, trial, q, c)
    });

    let mut rows = Vec::with_capacity(results.len() * 2);
    for &(n, trial, q, _) in &results {
        rows.push(SweepRow { n, arm: "quantum", trial, charged: q, version: TOOL_VERSION });
    }
    for &(n, trial, _, c) in &results {
        rows.push(SweepRow { n, arm: "classical", trial, charged: c, version: TOOL_VERSION });
    }

    let ns: Vec<f64> = cfg.n_values.iter().map(|&n| n as f64).collect();
    let mean_for = |pick: fn(&(usize, usize, u64, u64)) -> u64| -> Vec<f64> {
        cfg.n_values
            .iter()
            .map(|&n| {
                let vals: Vec<f64> = results
                    .iter()
                    .filter(|r| r.0 == n)
                    .map(|r| pick(r) as f64)
                    .collect();
                stats::mean(&vals)
            })
            .collect()
    };
    let quantum_slope = stats::log_log_slope(&ns, &mean_for(|r| r.2));
    let classical_slope = stats::log_log_slope(&ns, &mean_for(|r| r.3));
    (rows, quantum_slope, classical_slope)
}

fn one_trial(cfg: &BenchSamplerConfig, n: usize, trial: usize) -> (u64, u64) {
    let family = make_affine_family(
        cfg.seed ^ (n as u64).wrapping_mul(0x9e37),
        n,
        cfg.dim,
        1.0,
        1.0,
    )
    .expect("bench family");
    let center = vec![0.1; cfg.dim];
    let ctx = SmoothingContext::new(cfg.epsilon, &family, 0.0, center.clone()).expect("context");
    let sampler = SamplerConfig { delta: cfg.delta, ..Default::default() };
    let key = StreamKey::new(cfg.seed).child(n as u64).child(trial as u64);

    let mut quantum_ledger = QueryLedger::new();
    sample_batch(
        &family,
        &center,
        cfg.t_samples,
        &sampler,
        &ctx,
        &mut quantum_ledger,
        &key,
    )
    .expect("quantum batch");

    let mut classical_ledger = QueryLedger::new();
    classical_sample_batch(
        &family,
        &center,
        cfg.t_samples,
        &ctx,
        &mut classical_ledger,
        &key,
    )
    .expect("classical batch");

    (
        quantum_ledger.quantum_charged(),
        classical_ledger.quantum_charged(),
    )
}

/// TV distance and chi-square p-value of a large sample batch against the
/// exact softmax weights on a skewed instance.
fn exactness(cfg: &BenchSamplerConfig) -> (f64, f64) {
    let family = make_affine_family(cfg.seed.wrapping_add(101), cfg.exactness_n, cfg.dim, 1.0, 1.0)
        .expect("exactness family");
    let center = vec![0.3; cfg.dim];
    let ctx = SmoothingContext::new(cfg.epsilon, &family, 0.0, center.clone()).expect("context");
    let mut ledger = QueryLedger::new();
    let exact = softmax_weights(&family, &center, &ctx, &mut ledger);
    let sampler = SamplerConfig { delta: cfg.delta, ..Default::default() };
    let key = StreamKey::new(cfg.seed).child(u64::MAX);
    let samples = sample_batch(
        &family,
        &center,
        cfg.exactness_draws,
        &sampler,
        &ctx,
        &mut ledger,
        &key,
    )
    .expect("exactness batch");
    let counts = stats::counts(&samples, cfg.exactness_n);
    let tv = stats::tv_distance_counts(&counts, &exact);
    let chi_p = stats::chi_square_p_value(&counts, &exact);
    (tv, chi_p)
}
