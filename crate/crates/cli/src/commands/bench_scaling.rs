//! `minmax bench-scaling`: total BROO charge over N for both sampling arms.
//!
//! Each trial runs one full BROO call per arm on an affine instance of size
//! N and records the ledger. The sampling component (total minus the three
//! per-iteration gradient-estimation queries) scales like sqrt(N) on the
//! quantum arm and linearly on the classical arm.

use serde::{Deserialize, Serialize};

use minmax_core::broo::{broo_solve_traced, BrooParams, BrooQuery, SamplingArm};
use minmax_core::problem::{make_affine_family, CostConstants, QueryLedger};
use minmax_core::rng::StreamKey;
use minmax_core::smoothing::SmoothingContext;
use minmax_core::{stats, trials};

use crate::config::CommonArgs;
use crate::output::{self, TOOL_VERSION};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct BenchScalingConfig {
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub dim: usize,
    pub epsilon: f64,
    /// BROO accuracy and failure probability per call.
    pub accuracy: f64,
    pub sigma: f64,
    pub cost_constants: CostConstants,
}

impl Default for BenchScalingConfig {
    fn default() -> Self {
        BenchScalingConfig {
            seed: 0,
            n_values: (6..=12).map(|k| 1usize << k).collect(),
            trials: 5,
            dim: 2,
            epsilon: 0.5,
            accuracy: 0.05,
            sigma: 0.1,
            cost_constants: CostConstants::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ScalingRow {
    n: usize,
    arm: &'static str,
    trial: usize,
    charged: u64,
    sampling_charged: u64,
    iterations: u64,
    version: &'static str,
}

#[derive(Debug, Serialize)]
struct Summary {
    quantum_sampling_slope: f64,
    classical_sampling_slope: f64,
    version: &'static str,
}

pub fn run(common: &CommonArgs) -> anyhow::Result<()> {
    common.configure_jobs();
    let mut cfg = common.load_config::<BenchScalingConfig>()?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }

    let jobs: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let cfg_ref = &cfg;
    let results = trials::run(jobs.len(), |j| {
        let (n, trial) = jobs[j];
        let (q, qs, c, cs, iters) = one_trial(cfg_ref, n, trial);
        (n, trial, q, qs, c, cs, iters)
    });

    let mut rows = Vec::new();
    for &(n, trial, q, qs, _, _, iters) in &results {
        rows.push(ScalingRow {
            n,
            arm: "quantum",
            trial,
            charged: q,
            sampling_charged: qs,
            iterations: iters,
            version: TOOL_VERSION,
        });
    }
    for &(n, trial, _, _, c, cs, iters) in &results {
        rows.push(ScalingRow {
            n,
            arm: "classical",
            trial,
            charged: c,
            sampling_charged: cs,
            iterations: iters,
            version: TOOL_VERSION,
        });
    }

    let ns: Vec<f64> = cfg.n_values.iter().map(|&n| n as f64).collect();
    let mean_sampling = |quantum: bool| -> Vec<f64> {
        cfg.n_values
            .iter()
            .map(|&n| {
                let vals: Vec<f64> = results
                    .iter()
                    .filter(|r| r.0 == n)
                    .map(|r| if quantum { r.3 as f64 } else { r.5 as f64 })
                    .collect();
                stats::mean(&vals)
            })
            .collect()
    };
    let quantum_slope = stats::log_log_slope(&ns, &mean_sampling(true));
    let classical_slope = stats::log_log_slope(&ns, &mean_sampling(false));

    let out_dir = common.out_dir();
    crate::config::ensure_out_dir(&out_dir)?;
    output::write_csv(&out_dir.join("scaling_bench.csv"), &rows)?;
    output::write_json_report(
        &out_dir.join("scaling_summary.json"),
        &Summary {
            quantum_sampling_slope: quantum_slope,
            classical_sampling_slope: classical_slope,
            version: TOOL_VERSION,
        },
    )?;
    println!(
        "bench-scaling quantum_sampling_slope={quantum_slope:.3} classical_sampling_slope={classical_slope:.3}"
    );
    Ok(())
}

fn one_trial(cfg: &BenchScalingConfig, n: usize, trial: usize) -> (u64, u64, u64, u64, u64) {
    let family = make_affine_family(
        cfg.seed ^ (n as u64).rotate_left(17) ^ trial as u64,
        n,
        cfg.dim,
        1.0,
        1.0,
    )
    .expect("scaling family");
    let center = vec![0.0; cfg.dim];
    let lambda = 1.0;
    let ctx = SmoothingContext::new(cfg.epsilon, &family, lambda, center.clone()).expect("context");
    let query = BrooQuery {
        center,
        lambda,
        accuracy: cfg.accuracy,
        failure_prob: cfg.sigma,
        radius: ctx.radius(),
    };
    let key = StreamKey::new(cfg.seed).child(n as u64).child(trial as u64);
    let params = BrooParams::default();

    let run_arm = |arm: SamplingArm| -> (u64, u64, u64) {
        let mut ledger = QueryLedger::with_constants(cfg.cost_constants);
        let (_, epochs) =
            broo_solve_traced(&family, &query, &ctx, &params, arm, &mut ledger, &key)
                .expect("broo run");
        let iters: u64 = epochs.iter().map(|e| e.iterations).sum();
        let total = ledger.quantum_charged();
        (total, total - 3 * iters, iters)
    };
    let (q, qs, iters) = run_arm(SamplingArm::Quantum);
    let (c, cs, _) = run_arm(SamplingArm::Classical);
    (q, qs, c, cs, iters)
}
