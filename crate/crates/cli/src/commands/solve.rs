//! `minmax solve`: one end-to-end run, JSON report, one summary line.

use serde::{Deserialize, Serialize};

use minmax_core::broo::SamplingArm;
use minmax_core::solver::{self, InstanceSpec, Method, OuterParams, SolveConfig};

use crate::config::CommonArgs;
use crate::output;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolveCmdConfig(pub SolveConfig);

impl Default for SolveCmdConfig {
    fn default() -> Self {
        // Smoke configuration: subgradient descent on the opposed pair.
        SolveCmdConfig(SolveConfig {
            method: Method::Subgradient,
            arm: SamplingArm::Quantum,
            strategy: Default::default(),
            epsilon: 0.05,
            seed: 0,
            instance: InstanceSpec::SymmetricAffine {
                dim: 2,
                lipschitz: 1.0,
                domain_radius: 1.0,
            },
            cost_constants: Default::default(),
            outer: OuterParams::default(),
        })
    }
}

pub fn run(common: &CommonArgs) -> anyhow::Result<()> {
    common.configure_jobs();
    let mut config = common.load_config::<SolveCmdConfig>()?.0;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let report = solver::solve(&config)?;

    let out_dir = common.out_dir();
    crate::config::ensure_out_dir(&out_dir)?;
    let path = out_dir.join("solve_report.json");
    output::write_json_report(&path, &report)?;

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "solve method={:?} arm={:?} objective={:.6e} suboptimality={} charged={} converged={} report={}",
        config.method,
        config.arm,
        report.objective_value,
        report
            .suboptimality_estimate
            .map(|s| format!("{s:.6e}"))
            .unwrap_or_else(|| "n/a".into()),
        report.ledger_snapshot.quantum_charged(),
        report.converged,
        path.display()
    );
    Ok(())
}
