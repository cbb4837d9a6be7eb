//! `minmax hardness`: shuffled-instance progress experiments.

use serde::{Deserialize, Serialize};

use minmax_core::hardness::{make_shuffled_instance, run_progress_experiment, ExperimentArm};
use minmax_core::problem::QueryLedger;
use minmax_core::trials;

use crate::config::CommonArgs;
use crate::output::{self, TOOL_VERSION};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct HardnessConfig {
    pub seed: u64,
    pub chain_len: usize,
    pub n_functions: usize,
    pub ell: f64,
    pub dim: usize,
    pub trials: usize,
    /// Recorded queries (or guesses) per trial.
    pub budget: u64,
    pub arm: ArmSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmSpec {
    RandomGuess,
    Subgradient { epsilon: f64 },
}

impl Default for HardnessConfig {
    fn default() -> Self {
        HardnessConfig {
            seed: 0,
            chain_len: 8,
            n_functions: 16,
            ell: 1.0,
            dim: 64,
            trials: 100,
            budget: 1,
            arm: ArmSpec::RandomGuess,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct TraceRow {
    trial: usize,
    query_index: u64,
    prog: usize,
    cumulative_charge: u64,
    version: &'static str,
}

#[derive(Debug, Serialize)]
struct Summary {
    chain_len: usize,
    dim: usize,
    dim_required: f64,
    trials: usize,
    trials_reaching_chain_end: usize,
    max_prog_overall: usize,
    version: &'static str,
}

/// Full-scale dimension wanted by the progress-control argument (with a
/// nominal failure probability of 0.1).
fn dim_required(chain_len: usize, n_functions: usize) -> f64 {
    let t = chain_len as f64;
    t + (32.0 * t.powi(3) * (32.0 * (n_functions as f64).sqrt() * t.powi(5)).ln())
        .max(32.0 * t.powi(3) * (4.0 * t / 0.1).ln())
}

pub fn run(common: &CommonArgs) -> anyhow::Result<()> {
    common.configure_jobs();
    let mut cfg = common.load_config::<HardnessConfig>()?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }

    let required = dim_required(cfg.chain_len, cfg.n_functions);
    if (cfg.dim as f64) < required {
        eprintln!(
            "warning: dim {} below the progress-control requirement {:.3e}; results are illustrative",
            cfg.dim, required
        );
    }

    let cfg_ref = &cfg;
    let traces = trials::run(cfg.trials, |trial| {
        let instance = make_shuffled_instance(
            cfg_ref.chain_len,
            cfg_ref.n_functions,
            cfg_ref.ell,
            cfg_ref.dim,
            cfg_ref.seed.wrapping_add(trial as u64),
        )
        .expect("instance parameters validated");
        let arm = match cfg_ref.arm {
            ArmSpec::RandomGuess => ExperimentArm::RandomGuess,
            ArmSpec::Subgradient { epsilon } => ExperimentArm::Subgradient { epsilon },
        };
        let mut ledger = QueryLedger::new();
        run_progress_experiment(
            &arm,
            &instance,
            cfg_ref.budget,
            cfg_ref.seed.wrapping_add(trial as u64),
            &mut ledger,
        )
    });

    let mut rows = Vec::new();
    for (trial, trace) in traces.iter().enumerate() {
        for record in &trace.records {
            rows.push(TraceRow {
                trial,
                query_index: record.query_index,
                prog: record.prog,
                cumulative_charge: record.cumulative_charge,
                version: TOOL_VERSION,
            });
        }
    }
    let reaching = traces.iter().filter(|t| t.max_prog >= cfg.chain_len).count();
    let max_overall = traces.iter().map(|t| t.max_prog).max().unwrap_or(0);

    let out_dir = common.out_dir();
    crate::config::ensure_out_dir(&out_dir)?;
    output::write_csv(&out_dir.join("progress_trace.csv"), &rows)?;
    output::write_json_report(
        &out_dir.join("hardness_summary.json"),
        &Summary {
            chain_len: cfg.chain_len,
            dim: cfg.dim,
            dim_required: required,
            trials: cfg.trials,
            trials_reaching_chain_end: reaching,
            max_prog_overall: max_overall,
            version: TOOL_VERSION,
        },
    )?;
    println!(
        "hardness chain_len={} trials={} reaching_chain_end={} max_prog={}",
        cfg.chain_len, cfg.trials, reaching, max_overall
    );
    Ok(())
}
