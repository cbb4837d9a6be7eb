//! Ball regularized optimization oracle (BROO).
//!
//! A BROO query at `center` with regularization `lambda` and accuracy
//! `delta` must return a point whose regularized surrogate value is within
//! `lambda * delta^2 / 2` of the minimum over the smoothing ball. The
//! implementation is projected epoch SGD on the exponentiated softmax: all
//! sample indices are drawn up front from the center softmax (through the
//! quantum-cost or the classical-cost sampler), then epochs of doubling
//! length consume them with halving step sizes and shrinking trust regions,
//! projecting every iterate onto the intersection of the smoothing ball and
//! the epoch ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{FunctionFamily, QueryLedger};
use crate::qsampler::{classical_sample_batch, sample_batch, SamplerConfig};
use crate::rng::StreamKey;
use crate::smoothing::{gamma_stochastic_gradient, SmoothingContext};
use crate::vecmath;

/// One BROO invocation: center, regularization, accuracy, failure budget,
/// and the ball radius the response must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrooQuery {
    pub center: Vec<f64>,
    pub lambda: f64,
    pub accuracy: f64,
    pub failure_prob: f64,
    pub radius: f64,
}

/// Tunable constants of the epoch schedule. The iteration-budget factor
/// `c_iters` lives in [`crate::problem::CostConstants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrooParams {
    /// First epoch length.
    pub t1: u64,
    /// Factor on the initial trust-region diameter.
    pub c_domain: f64,
    pub sampler: SamplerConfig,
}

impl Default for BrooParams {
    fn default() -> Self {
        BrooParams {
            t1: 450,
            c_domain: 1.0,
            sampler: SamplerConfig::default(),
        }
    }
}

/// Which sampler charges the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArm {
    Quantum,
    Classical,
}

/// Which form of the BROO error bound a contract check uses. The oracle
/// definition states `lambda * delta^2 / 2`; the convergence analysis works
/// with `lambda * delta / 2`. Both are exposed so experiments can pin one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccuracyConvention {
    DeltaSquared,
    Delta,
}

/// Error tolerance of a valid BROO response under the chosen convention.
pub fn broo_tolerance(lambda: f64, delta: f64, convention: AccuracyConvention) -> f64 {
    match convention {
        AccuracyConvention::DeltaSquared => 0.5 * lambda * delta * delta,
        AccuracyConvention::Delta => 0.5 * lambda * delta,
    }
}

/// Stochastic-gradient iteration budget
/// `ceil(c_iters * L^2 / (lambda^2 delta^2) * ln(ln(L/(lambda delta))/sigma))`,
/// with the inner argument floored at `e^2` so the double log stays positive.
pub fn iteration_budget(lambda: f64, delta: f64, sigma: f64, lipschitz: f64, c_iters: f64) -> u64 {
    let ratio = (lipschitz / (lambda * delta)).max(std::f64::consts::E.powi(2));
    let log_term = (ratio.ln() / sigma).ln();
    let base = lipschitz * lipschitz / (lambda * lambda * delta * delta);
    (c_iters * base * log_term).ceil().max(1.0) as u64
}

/// Euclidean projection onto the intersection of two balls by Dykstra's
/// alternating method. An infinite second radius reduces to the single-ball
/// closed form.
pub fn project_two_balls(
    y: &[f64],
    center_a: &[f64],
    radius_a: f64,
    center_b: &[f64],
    radius_b: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if !radius_b.is_finite() {
        return Ok(vecmath::project_ball(y, center_a, radius_a));
    }
    if !radius_a.is_finite() {
        return Ok(vecmath::project_ball(y, center_b, radius_b));
    }
    let gap = vecmath::distance(center_a, center_b);
    if gap > radius_a + radius_b + tol {
        return Err(Error::EmptyIntersection {
            center_distance: gap,
            radius_sum: radius_a + radius_b,
        });
    }

    let mut x = y.to_vec();
    let mut p = vec![0.0; y.len()];
    let mut q = vec![0.0; y.len()];
    for _ in 0..200 {
        let yp = vecmath::add(&x, &p);
        let a = vecmath::project_ball(&yp, center_a, radius_a);
        p = vecmath::sub(&yp, &a);
        let aq = vecmath::add(&a, &q);
        let next = vecmath::project_ball(&aq, center_b, radius_b);
        q = vecmath::sub(&aq, &next);
        let moved = vecmath::distance(&x, &next);
        x = next;
        if moved < tol
            && vecmath::distance(&x, center_a) <= radius_a + tol
            && vecmath::distance(&x, center_b) <= radius_b + tol
        {
            return Ok(x);
        }
    }
    if vecmath::distance(&x, center_a) <= radius_a + 1e3 * tol
        && vecmath::distance(&x, center_b) <= radius_b + 1e3 * tol
    {
        return Ok(x);
    }
    Err(Error::Internal(format!(
        "two-ball projection failed to converge (residuals {:.3e}, {:.3e})",
        vecmath::distance(&x, center_a) - radius_a,
        vecmath::distance(&x, center_b) - radius_b,
    )))
}

/// Schedule snapshot at the start of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochState {
    pub epoch: usize,
    pub iterations: u64,
    pub step_size: f64,
    pub domain_radius: f64,
    pub anchor: Vec<f64>,
}

fn validate_query(
    family: &FunctionFamily,
    query: &BrooQuery,
    ctx: &SmoothingContext,
) -> Result<()> {
    if !(query.lambda > 0.0) {
        return Err(Error::invalid("lambda", "regularization must be positive"));
    }
    if !(query.accuracy > 0.0) {
        return Err(Error::invalid("accuracy", "accuracy must be positive"));
    }
    if !(query.failure_prob > 0.0 && query.failure_prob < 1.0) {
        return Err(Error::invalid("failure_prob", "need sigma in (0,1)"));
    }
    if (query.lambda - ctx.lambda()).abs() > 1e-12 * query.lambda.max(1.0)
        || (query.radius - ctx.radius()).abs() > 1e-12 * query.radius.max(1.0)
        || query.center != ctx.center()
    {
        return Err(Error::invalid(
            "query",
            "query and smoothing context disagree on center, lambda, or radius",
        ));
    }
    let lambda_cap = ctx.ball_param() * family.lipschitz() / query.radius;
    if query.lambda > lambda_cap * (1.0 + 1e-9) {
        return Err(Error::invalid(
            "lambda",
            format!("lambda {} above the contract cap {lambda_cap:.6e}", query.lambda),
        ));
    }
    Ok(())
}

/// Run the BROO and return the response point.
pub fn broo_solve(
    family: &FunctionFamily,
    query: &BrooQuery,
    ctx: &SmoothingContext,
    params: &BrooParams,
    arm: SamplingArm,
    ledger: &mut QueryLedger,
    key: &StreamKey,
) -> Result<Vec<f64>> {
    broo_solve_traced(family, query, ctx, params, arm, ledger, key).map(|(x, _)| x)
}

/// Classical-sampling baseline with identical optimization semantics.
pub fn classical_broo_solve(
    family: &FunctionFamily,
    query: &BrooQuery,
    ctx: &SmoothingContext,
    params: &BrooParams,
    ledger: &mut QueryLedger,
    key: &StreamKey,
) -> Result<Vec<f64>> {
    broo_solve(family, query, ctx, params, SamplingArm::Classical, ledger, key)
}

/// [`broo_solve`] that also reports the epoch schedule it executed.
pub fn broo_solve_traced(
    family: &FunctionFamily,
    query: &BrooQuery,
    ctx: &SmoothingContext,
    params: &BrooParams,
    arm: SamplingArm,
    ledger: &mut QueryLedger,
    key: &StreamKey,
) -> Result<(Vec<f64>, Vec<EpochState>)> {
    validate_query(family, query, ctx)?;
    let sigma = query.failure_prob;
    let budget = iteration_budget(
        query.lambda,
        query.accuracy,
        sigma,
        family.lipschitz(),
        ledger.constants().c_iters,
    );

    // All sample indices are prepared up front, mirroring the batched state
    // preparation; epochs consume them in order.
    let sampler_cfg = SamplerConfig {
        delta: sigma,
        ..params.sampler
    };
    let samples = match arm {
        SamplingArm::Quantum => sample_batch(
            family,
            &query.center,
            budget as usize,
            &sampler_cfg,
            ctx,
            ledger,
            key,
        )?,
        SamplingArm::Classical => classical_sample_batch(
            family,
            &query.center,
            budget as usize,
            ctx,
            ledger,
            key,
        )?,
    };

    let log_term = ((budget as f64).max(std::f64::consts::E.powi(2)).ln() / sigma).ln();
    let mut domain = params.c_domain * ctx.grad_bound() * log_term.sqrt() / query.lambda;
    let mut step = 1.0 / (3.0 * query.lambda);
    let mut epoch_len = params.t1;
    let mut anchor = query.center.clone();
    let mut epochs = Vec::new();
    let mut consumed = 0u64;
    let mut sample_iter = samples.iter();

    let degenerate = budget < params.t1;
    if degenerate {
        epoch_len = budget.max(1);
    }

    loop {
        if !degenerate && consumed + epoch_len > budget {
            break;
        }
        epochs.push(EpochState {
            epoch: epochs.len() + 1,
            iterations: epoch_len,
            step_size: step,
            domain_radius: domain,
            anchor: anchor.clone(),
        });

        let mut x = anchor.clone();
        let mut sum = vec![0.0; family.dim()];
        for _ in 0..epoch_len {
            let &i = sample_iter.next().expect("budget covers all epochs");
            vecmath::axpy(&mut sum, 1.0, &x);
            let g = gamma_stochastic_gradient(family, i, &x, ctx, ledger)?;
            let mut moved = x.clone();
            vecmath::axpy(&mut moved, -step, &g);
            x = project_two_balls(&moved, &query.center, query.radius, &anchor, domain, 1e-10)?;
            debug_assert!(
                vecmath::distance(&x, &query.center) <= query.radius * (1.0 + 1e-9),
                "iterate escaped the smoothing ball"
            );
        }
        anchor = vecmath::scale(&sum, 1.0 / epoch_len as f64);
        consumed += epoch_len;

        if degenerate {
            break;
        }
        epoch_len *= 2;
        step /= 2.0;
        domain /= std::f64::consts::SQRT_2;
    }

    Ok((anchor, epochs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{affine_family_from_parts, make_affine_family, CostConstants};
    use crate::smoothing::f_smax_reg;

    #[test]
    fn budget_arithmetic_example() {
        // L = lambda = delta = 1, sigma = 1/e: the ratio floors at e^2, the
        // double log is ln(2e), and the budget rounds up to 2.
        let sigma = 1.0 / std::f64::consts::E;
        let expected = (2.0 * std::f64::consts::E).ln().ceil() as u64;
        assert_eq!(expected, 2);
        assert_eq!(iteration_budget(1.0, 1.0, sigma, 1.0, 1.0), 2);
    }

    #[test]
    fn budget_scales_with_inverse_delta_squared() {
        let a = iteration_budget(1.0, 0.01, 0.1, 1.0, 1.0);
        let b = iteration_budget(1.0, 0.005, 0.1, 1.0, 1.0);
        let ratio = b as f64 / a as f64;
        assert!((3.8..=4.3).contains(&ratio), "ratio {ratio} not near 4");
    }

    #[test]
    fn budget_is_monotone_in_accuracy_and_regularization() {
        let mut prev = u64::MAX;
        for delta in [0.01, 0.02, 0.04, 0.08] {
            let b = iteration_budget(1.0, delta, 0.1, 1.0, 1.0);
            assert!(b <= prev);
            prev = b;
        }
        let mut prev = u64::MAX;
        for lambda in [0.5, 1.0, 2.0, 4.0] {
            let b = iteration_budget(lambda, 0.05, 0.1, 1.0, 1.0);
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn projection_identity_inside_both_balls() {
        let y = vec![0.1, 0.1];
        let p = project_two_balls(&y, &[0.0, 0.0], 1.0, &[0.05, 0.0], 1.0, 1e-10).unwrap();
        assert_eq!(p, y);
    }

    #[test]
    fn projection_single_ball_closed_form() {
        let y = vec![3.0, 4.0];
        let p = project_two_balls(&y, &[0.0, 0.0], 1.0, &[0.0, 0.0], f64::INFINITY, 1e-10).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-12);
        assert!((p[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn projection_concentric_balls_uses_smaller() {
        let y = vec![2.0, 0.0];
        let p = project_two_balls(&y, &[0.0, 0.0], 1.0, &[0.0, 0.0], 0.5, 1e-10).unwrap();
        assert!((vecmath::norm(&p) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn projection_general_case_is_feasible_and_optimal() {
        // Compare against a fine golden-section-free check: the projection
        // must beat every perturbed feasible point in distance to y.
        let c1 = vec![0.0, 0.0];
        let c2 = vec![1.2, 0.0];
        let (r1, r2) = (1.0, 0.8);
        let y = vec![0.9, 1.5];
        let p = project_two_balls(&y, &c1, r1, &c2, r2, 1e-12).unwrap();
        assert!(vecmath::distance(&p, &c1) <= r1 + 1e-9);
        assert!(vecmath::distance(&p, &c2) <= r2 + 1e-9);
        let d = vecmath::distance(&p, &y);
        for angle in 0..64 {
            let t = angle as f64 / 64.0 * std::f64::consts::TAU;
            let probe = vec![p[0] + 1e-4 * t.cos(), p[1] + 1e-4 * t.sin()];
            if vecmath::distance(&probe, &c1) <= r1 && vecmath::distance(&probe, &c2) <= r2 {
                assert!(vecmath::distance(&probe, &y) >= d - 1e-7);
            }
        }
    }

    #[test]
    fn projection_rejects_disjoint_balls() {
        let err = project_two_balls(&[0.0], &[0.0], 1.0, &[5.0], 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::EmptyIntersection { .. }));
    }

    fn identical_pair(slope: Vec<f64>) -> FunctionFamily {
        affine_family_from_parts(vec![slope.clone(), slope], vec![0.0, 0.0], 1.0, 2.0).unwrap()
    }

    #[test]
    fn broo_matches_prox_of_linear_closed_form() {
        // Two identical affine functions make the stochastic gradient exact,
        // so the oracle must land within delta of the regularized minimizer
        // center - min(r, |a|/lambda) * a/|a|.
        let slope = vec![0.3, 0.0];
        let family = identical_pair(slope.clone());
        let epsilon = 0.5;
        let lambda = 2.0;
        let center = vec![0.1, -0.2];
        let ctx = SmoothingContext::new(epsilon, &family, lambda, center.clone()).unwrap();
        let query = BrooQuery {
            center: center.clone(),
            lambda,
            accuracy: 0.02,
            failure_prob: 0.05,
            radius: ctx.radius(),
        };
        let mut ledger = QueryLedger::with_constants(CostConstants {
            c_iters: 40.0,
            ..Default::default()
        });
        let key = StreamKey::new(12);
        let params = BrooParams::default();
        let out = broo_solve(&family, &query, &ctx, &params, SamplingArm::Quantum, &mut ledger, &key)
            .unwrap();
        let shift = (ctx.radius()).min(vecmath::norm(&slope) / lambda);
        let expected = vec![center[0] - shift, center[1]];
        assert!(
            vecmath::distance(&out, &expected) <= query.accuracy + 1e-6,
            "got {out:?}, expected {expected:?}"
        );
    }

    #[test]
    fn epoch_schedule_invariants_hold() {
        let family = make_affine_family(3, 4, 2, 1.0, 1.0).unwrap();
        let lambda = 1.0;
        let ctx = SmoothingContext::new(0.5, &family, lambda, vec![0.0, 0.0]).unwrap();
        let query = BrooQuery {
            center: vec![0.0, 0.0],
            lambda,
            accuracy: 0.05,
            failure_prob: 0.1,
            radius: ctx.radius(),
        };
        let mut ledger = QueryLedger::with_constants(CostConstants {
            c_iters: 50.0,
            ..Default::default()
        });
        let key = StreamKey::new(4);
        let (out, epochs) = broo_solve_traced(
            &family,
            &query,
            &ctx,
            &BrooParams::default(),
            SamplingArm::Classical,
            &mut ledger,
            &key,
        )
        .unwrap();
        assert!(epochs.len() >= 2, "want a multi-epoch run, got {}", epochs.len());
        for w in epochs.windows(2) {
            assert_eq!(w[1].iterations, 2 * w[0].iterations);
            assert!((w[1].step_size - w[0].step_size / 2.0).abs() < 1e-15);
            assert!(
                (w[1].domain_radius - w[0].domain_radius / std::f64::consts::SQRT_2).abs() < 1e-12
            );
            assert!(vecmath::distance(&w[1].anchor, &query.center) <= query.radius * (1.0 + 1e-9));
        }
        assert_eq!(epochs[0].iterations, 450);
        assert!((epochs[0].step_size - 1.0 / (3.0 * lambda)).abs() < 1e-15);
        assert!(vecmath::distance(&out, &query.center) <= query.radius * (1.0 + 1e-9));
    }

    #[test]
    fn degenerate_budget_runs_single_truncated_epoch() {
        let family = make_affine_family(3, 4, 2, 1.0, 1.0).unwrap();
        let lambda = 1.0;
        let ctx = SmoothingContext::new(0.5, &family, lambda, vec![0.0, 0.0]).unwrap();
        let query = BrooQuery {
            center: vec![0.0, 0.0],
            lambda,
            accuracy: 0.5,
            failure_prob: 0.3,
            radius: ctx.radius(),
        };
        let budget = iteration_budget(lambda, 0.5, 0.3, 1.0, 1.0);
        assert!(budget < 450);
        let mut ledger = QueryLedger::new();
        let key = StreamKey::new(6);
        let (_, epochs) = broo_solve_traced(
            &family,
            &query,
            &ctx,
            &BrooParams::default(),
            SamplingArm::Classical,
            &mut ledger,
            &key,
        )
        .unwrap();
        assert_eq!(epochs.len(), 1);
        assert_eq!(epochs[0].iterations, budget.max(1));
    }

    #[test]
    fn arms_follow_identical_trajectories_with_matched_keys() {
        let family = make_affine_family(8, 8, 2, 1.0, 1.0).unwrap();
        let lambda = 1.5;
        let ctx = SmoothingContext::new(0.4, &family, lambda, vec![0.1, 0.0]).unwrap();
        let query = BrooQuery {
            center: vec![0.1, 0.0],
            lambda,
            accuracy: 0.05,
            failure_prob: 0.1,
            radius: ctx.radius(),
        };
        let key = StreamKey::new(21).child(7);
        let params = BrooParams::default();
        let mut lq = QueryLedger::with_constants(CostConstants { c_iters: 10.0, ..Default::default() });
        let mut lc = QueryLedger::with_constants(CostConstants { c_iters: 10.0, ..Default::default() });
        let q = broo_solve(&family, &query, &ctx, &params, SamplingArm::Quantum, &mut lq, &key)
            .unwrap();
        let c = broo_solve(&family, &query, &ctx, &params, SamplingArm::Classical, &mut lc, &key)
            .unwrap();
        assert_eq!(q, c);
        assert_ne!(lq.quantum_charged(), lc.quantum_charged());
    }

    #[test]
    fn classical_charge_is_weights_plus_three_per_iteration() {
        let family = make_affine_family(5, 64, 2, 1.0, 1.0).unwrap();
        let lambda = 1.0;
        let ctx = SmoothingContext::new(0.4, &family, lambda, vec![0.0, 0.0]).unwrap();
        let query = BrooQuery {
            center: vec![0.0, 0.0],
            lambda,
            accuracy: 0.1,
            failure_prob: 0.1,
            radius: ctx.radius(),
        };
        let constants = CostConstants { c_iters: 30.0, ..Default::default() };
        let budget = iteration_budget(lambda, 0.1, 0.1, 1.0, 30.0);
        let mut ledger = QueryLedger::with_constants(constants);
        let key = StreamKey::new(3);
        let (_, epochs) = broo_solve_traced(
            &family,
            &query,
            &ctx,
            &BrooParams::default(),
            SamplingArm::Classical,
            &mut ledger,
            &key,
        )
        .unwrap();
        let executed: u64 = epochs.iter().map(|e| e.iterations).sum();
        assert!(executed <= budget);
        assert_eq!(ledger.quantum_charged(), 64 + 3 * executed);
    }

    #[test]
    fn tolerance_conventions() {
        assert_eq!(broo_tolerance(2.0, 0.1, AccuracyConvention::DeltaSquared), 0.01);
        assert_eq!(broo_tolerance(2.0, 0.1, AccuracyConvention::Delta), 0.1);
    }

    #[test]
    fn median_anchor_value_improves_across_epochs() {
        // Over seeds, the median regularized surrogate value of the second
        // anchor should not exceed that of the first.
        let family = make_affine_family(17, 8, 2, 1.0, 1.0).unwrap();
        let lambda = 2.0;
        let ctx = SmoothingContext::new(0.4, &family, lambda, vec![0.0, 0.0]).unwrap();
        let query = BrooQuery {
            center: vec![0.0, 0.0],
            lambda,
            accuracy: 0.02,
            failure_prob: 0.1,
            radius: ctx.radius(),
        };
        let mut first = Vec::new();
        let mut last = Vec::new();
        for seed in 0..15 {
            let mut ledger = QueryLedger::with_constants(CostConstants {
                c_iters: 60.0,
                ..Default::default()
            });
            let key = StreamKey::new(seed);
            let (out, epochs) = broo_solve_traced(
                &family,
                &query,
                &ctx,
                &BrooParams::default(),
                SamplingArm::Classical,
                &mut ledger,
                &key,
            )
            .unwrap();
            let mut scratch = QueryLedger::new();
            first.push(f_smax_reg(&family, &epochs[0].anchor, &ctx, &mut scratch));
            last.push(f_smax_reg(&family, &out, &ctx, &mut scratch));
        }
        let m_first = crate::stats::median(&first);
        let m_last = crate::stats::median(&last);
        assert!(
            m_last <= m_first + 1e-12,
            "median anchor value regressed: {m_first} -> {m_last}"
        );
    }
}
