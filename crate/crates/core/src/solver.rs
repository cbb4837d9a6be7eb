//! End-to-end minimization drivers.
//!
//! Two methods are provided: a projected subgradient baseline on the max
//! objective, and a proximal outer loop that repeatedly queries the BROO at
//! the current center and recenters on its response. The outer loop pins the
//! regularization to the low end of the oracle contract band
//! (`lambda = eps/(r_eps R)`, `delta = c_delta * eps/(lambda R)`) and stops
//! once a response moves less than half the ball radius.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::broo::{broo_solve, BrooParams, BrooQuery, SamplingArm};
use crate::error::{Error, Result};
use crate::hardness;
use crate::problem::{
    make_affine_family, subgradient_query, symmetric_affine_pair, CostConstants, FunctionFamily,
    QueryLedger,
};
use crate::rng::StreamKey;
use crate::smoothing::{argmax, f_max, f_smax, SmoothingContext};
use crate::vecmath;

/// Outer-loop strategy slot. The accelerated ball-optimization outer loop
/// lives in external work; this crate ships the plain proximal recentering
/// loop and keeps the slot open for drop-in alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuterStrategy {
    #[default]
    SimpleProximal,
}

/// Constants of the proximal outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuterParams {
    /// Factor on the per-call BROO accuracy `delta = c_delta * eps/(lambda R)`.
    pub c_delta: f64,
    /// Outer-call budget factor: at most `ceil(c_outer * R / r_eps)` calls.
    pub c_outer: f64,
    pub broo: BrooParams,
}

impl Default for OuterParams {
    fn default() -> Self {
        OuterParams {
            c_delta: 1.0,
            c_outer: 2.0,
            broo: BrooParams::default(),
        }
    }
}

/// Which driver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Subgradient,
    ProxOuter,
}

/// Test-instance constructors addressable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// Random affine family (seeded from the run seed).
    Affine {
        n_functions: usize,
        dim: usize,
        lipschitz: f64,
        domain_radius: f64,
    },
    /// Two opposed linear functions with known minimum value 0.
    SymmetricAffine {
        dim: usize,
        lipschitz: f64,
        domain_radius: f64,
    },
    /// Shuffled zero-chain with explicit chain parameters.
    ShuffledHard {
        chain_len: usize,
        n_functions: usize,
        ell: f64,
        dim: usize,
    },
    /// Zero-chain scaled to the lower-bound parameter setting, with the
    /// dimension clipped to `dim_cap`.
    ScaledHard {
        n_functions: usize,
        lipschitz: f64,
        smoothness: f64,
        domain_radius: f64,
        dim_cap: usize,
    },
}

/// Full configuration of one `solve` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SolveConfig {
    pub method: Method,
    #[serde(default = "default_arm")]
    pub arm: SamplingArm,
    #[serde(default)]
    pub strategy: OuterStrategy,
    pub epsilon: f64,
    pub seed: u64,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub cost_constants: CostConstants,
    #[serde(default)]
    pub outer: OuterParams,
}

fn default_arm() -> SamplingArm {
    SamplingArm::Quantum
}

/// Result record of one driver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub output_point: Vec<f64>,
    /// Max-objective value at the output point.
    pub objective_value: f64,
    /// Gap to the reference optimum, when the instance has a known one.
    pub suboptimality_estimate: Option<f64>,
    pub ledger_snapshot: QueryLedger,
    pub iterations: u64,
    pub broo_calls: u64,
    /// Movement criterion met before the outer budget ran out.
    pub converged: bool,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub config_echo: Option<SolveConfig>,
}

/// Projected subgradient descent on the max objective over the ball of
/// radius `radius` around `x0`.
///
/// Runs `T = ceil((L R / eps)^2)` iterations at the fixed step
/// `R / (L sqrt(T))` and returns the iterate average. Each iteration charges
/// `N` value queries to identify the active function and one gradient query.
pub fn subgradient_method(
    family: &FunctionFamily,
    x0: &[f64],
    radius: f64,
    epsilon: f64,
    ledger: &mut QueryLedger,
) -> SolveReport {
    let start = Instant::now();
    let lipschitz = family.lipschitz();
    let t = ((lipschitz * radius / epsilon).powi(2)).ceil().max(1.0) as u64;
    let step = radius / (lipschitz * (t as f64).sqrt());

    let mut x = x0.to_vec();
    let mut sum = vec![0.0; family.dim()];
    for _ in 0..t {
        vecmath::axpy(&mut sum, 1.0, &x);
        let active = argmax(family, &x, ledger);
        let g = subgradient_query(family, active, &x, ledger).expect("index in range");
        let mut moved = x.clone();
        vecmath::axpy(&mut moved, -step, &g);
        x = vecmath::project_ball(&moved, x0, radius);
    }
    let average = vecmath::scale(&sum, 1.0 / t as f64);
    let objective_value = f_max(family, &average, ledger);
    SolveReport {
        output_point: average,
        objective_value,
        suboptimality_estimate: None,
        ledger_snapshot: ledger.clone(),
        iterations: t,
        broo_calls: 0,
        converged: true,
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
        config_echo: None,
    }
}

/// Proximal outer loop over BROO responses.
///
/// Per-call failure probability is `1/(6 T_outer)` so the whole run fails
/// with probability at most 1/3; the best point seen under the softmax
/// surrogate is returned.
pub fn prox_outer(
    family: &FunctionFamily,
    x0: &[f64],
    radius: f64,
    epsilon: f64,
    strategy: OuterStrategy,
    params: &OuterParams,
    arm: SamplingArm,
    ledger: &mut QueryLedger,
    key: &StreamKey,
) -> Result<SolveReport> {
    let OuterStrategy::SimpleProximal = strategy;
    let start = Instant::now();
    let lipschitz = family.lipschitz();
    let n = family.n_functions() as f64;
    let ball_radius = epsilon / (2.0 * lipschitz * n.ln());
    let lambda = epsilon / (ball_radius * radius);
    let delta = params.c_delta * epsilon / (lambda * radius);
    let outer_budget = ((params.c_outer * radius / ball_radius).ceil() as u64).max(1);
    let sigma = 1.0 / (6.0 * outer_budget as f64);

    let mut center = x0.to_vec();
    let mut best_point = center.clone();
    let mut best_value = f64::INFINITY;
    let mut converged = false;
    let mut calls = 0u64;
    let mut iterations = 0u64;

    for call_id in 0..outer_budget {
        let ctx = SmoothingContext::new(epsilon, family, lambda, center.clone())?;
        let query = BrooQuery {
            center: center.clone(),
            lambda,
            accuracy: delta,
            failure_prob: sigma,
            radius: ctx.radius(),
        };
        let response = broo_solve(
            family,
            &query,
            &ctx,
            &params.broo,
            arm,
            ledger,
            &key.child(call_id),
        )?;
        calls += 1;
        iterations += crate::broo::iteration_budget(
            lambda,
            delta,
            sigma,
            lipschitz,
            ledger.constants().c_iters,
        );
        let response = vecmath::project_ball(&response, x0, radius);
        let value = f_smax(family, &response, &ctx, ledger);
        if value < best_value {
            best_value = value;
            best_point = response.clone();
        }
        let movement = vecmath::distance(&response, &center);
        center = response;
        if movement < ball_radius / 2.0 {
            converged = true;
            break;
        }
    }

    let objective_value = f_max(family, &best_point, ledger);
    Ok(SolveReport {
        output_point: best_point,
        objective_value,
        suboptimality_estimate: None,
        ledger_snapshot: ledger.clone(),
        iterations,
        broo_calls: calls,
        converged,
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
        config_echo: None,
    })
}

/// Build the family described by an instance spec.
pub fn build_instance(
    spec: &InstanceSpec,
    epsilon: f64,
    seed: u64,
) -> Result<(FunctionFamily, Vec<String>)> {
    match spec {
        InstanceSpec::Affine {
            n_functions,
            dim,
            lipschitz,
            domain_radius,
        } => Ok((
            make_affine_family(seed, *n_functions, *dim, *lipschitz, *domain_radius)?,
            Vec::new(),
        )),
        InstanceSpec::SymmetricAffine {
            dim,
            lipschitz,
            domain_radius,
        } => Ok((symmetric_affine_pair(*lipschitz, *dim, *domain_radius), Vec::new())),
        InstanceSpec::ShuffledHard {
            chain_len,
            n_functions,
            ell,
            dim,
        } => {
            let inst = hardness::make_shuffled_instance(*chain_len, *n_functions, *ell, *dim, seed)?;
            Ok((inst.family(), Vec::new()))
        }
        InstanceSpec::ScaledHard {
            n_functions,
            lipschitz,
            smoothness,
            domain_radius,
            dim_cap,
        } => {
            let scaled = hardness::scaled_hard_family(
                *lipschitz,
                *smoothness,
                *domain_radius,
                epsilon,
                *n_functions,
                seed,
                *dim_cap,
            )?;
            let warnings = scaled.dim_warning().into_iter().collect();
            Ok((scaled.family, warnings))
        }
    }
}

fn domain_radius_of(spec: &InstanceSpec) -> f64 {
    match spec {
        InstanceSpec::Affine { domain_radius, .. }
        | InstanceSpec::SymmetricAffine { domain_radius, .. }
        | InstanceSpec::ScaledHard { domain_radius, .. } => *domain_radius,
        InstanceSpec::ShuffledHard { .. } => 1.0,
    }
}

/// Dispatch a configured run and collect the report.
pub fn solve(config: &SolveConfig) -> Result<SolveReport> {
    if !(config.epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "accuracy must be positive"));
    }
    let (family, warnings) = build_instance(&config.instance, config.epsilon, config.seed)?;
    let radius = domain_radius_of(&config.instance);
    let x0 = vec![0.0; family.dim()];
    let mut ledger = QueryLedger::with_constants(config.cost_constants);
    let key = StreamKey::new(config.seed);

    let mut report = match config.method {
        Method::Subgradient => subgradient_method(&family, &x0, radius, config.epsilon, &mut ledger),
        Method::ProxOuter => prox_outer(
            &family,
            &x0,
            radius,
            config.epsilon,
            config.strategy,
            &config.outer,
            config.arm,
            &mut ledger,
            &key,
        )?,
    };
    if let InstanceSpec::SymmetricAffine { .. } = config.instance {
        // Known optimum: the opposed pair has minimum value 0 at the origin.
        report.suboptimality_estimate = Some(report.objective_value);
    }
    report.warnings.extend(warnings);
    report.config_echo = Some(config.clone());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_config(method: Method) -> SolveConfig {
        SolveConfig {
            method,
            arm: SamplingArm::Quantum,
            strategy: OuterStrategy::SimpleProximal,
            epsilon: 0.1,
            seed: 7,
            instance: InstanceSpec::SymmetricAffine {
                dim: 2,
                lipschitz: 1.0,
                domain_radius: 1.0,
            },
            cost_constants: CostConstants::default(),
            outer: OuterParams::default(),
        }
    }

    #[test]
    fn subgradient_converges_on_symmetric_pair() {
        let family = symmetric_affine_pair(1.0, 2, 1.0);
        let mut ledger = QueryLedger::new();
        let x0 = vec![1.0, 0.0];
        let report = subgradient_method(&family, &x0, 1.0, 0.05, &mut ledger);
        assert!(
            report.objective_value <= 0.05,
            "suboptimality {} above target",
            report.objective_value
        );
        // Charge accounting: (N + 1) per iteration plus N for the final
        // objective evaluation.
        let t = report.iterations;
        assert_eq!(ledger.quantum_charged(), (2 + 1) * t + 2);
    }

    #[test]
    fn subgradient_iteration_count_and_trivial_accuracy() {
        let family = symmetric_affine_pair(1.0, 3, 1.0);
        let mut ledger = QueryLedger::new();
        let report = subgradient_method(&family, &[0.4, 0.0, 0.0], 1.0, 2.0, &mut ledger);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.output_point, vec![0.4, 0.0, 0.0]);
    }

    #[test]
    fn solve_smoke_subgradient_reports_suboptimality() {
        let report = solve(&symmetric_config(Method::Subgradient)).unwrap();
        let sub = report.suboptimality_estimate.expect("known optimum");
        assert!(sub <= 0.1);
        assert!(report.config_echo.is_some());
    }

    #[test]
    fn returned_points_stay_in_domain_ball() {
        let mut cfg = symmetric_config(Method::ProxOuter);
        cfg.cost_constants.c_iters = 20.0;
        let report = solve(&cfg).unwrap();
        assert!(vecmath::norm(&report.output_point) <= 1.0 + 1e-9);
    }

    #[test]
    fn arms_share_trajectories_but_not_charges() {
        let mut cfg = symmetric_config(Method::ProxOuter);
        cfg.cost_constants.c_iters = 10.0;
        let quantum = solve(&cfg).unwrap();
        cfg.arm = SamplingArm::Classical;
        let classical = solve(&cfg).unwrap();
        assert_eq!(quantum.output_point, classical.output_point);
        assert_ne!(
            quantum.ledger_snapshot.quantum_charged(),
            classical.ledger_snapshot.quantum_charged()
        );
    }

    #[test]
    fn solve_rejects_bad_epsilon() {
        let mut cfg = symmetric_config(Method::Subgradient);
        cfg.epsilon = 0.0;
        assert!(solve(&cfg).is_err());
    }
}
