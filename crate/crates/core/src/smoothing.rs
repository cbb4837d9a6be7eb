//! The max objective, its softmax surrogate, and the exponentiated softmax.
//!
//! For a family `f_1..f_N` the surrogate is
//! `F_smax(x) = eps' * ln(sum_i exp(f_i(x)/eps'))` with
//! `eps' = eps / (2 ln N)`, which sandwiches the true max within `eps/2`.
//! Ball subproblems work with the regularized version
//! `F_smax(x) + lambda/2 * |x - center|^2` and with its exponentiated form
//! `Gamma(x) = sum_i p_i * eps' * exp((f_i^l(x) - f_i^l(center))/eps')`,
//! whose finite-sum structure admits one-sample stochastic gradients. All
//! logs are natural, so `exp`/`ln` stay exact inverses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{evaluate, subgradient_query, FunctionFamily, QueryLedger};
use crate::vecmath;

/// Parameters of one smoothing ball: accuracy split, regularization, center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingContext {
    epsilon: f64,
    epsilon_prime: f64,
    lambda: f64,
    center: Vec<f64>,
    radius: f64,
    /// Ball parameter `c` of the exponentiated-softmax regularity bound;
    /// the context keeps `radius * L_f <= c * epsilon_prime`.
    ball_param: f64,
    /// Frozen stochastic-gradient norm bound `e^2 * (L_f + lambda * radius)`.
    grad_bound: f64,
}

impl SmoothingContext {
    /// Context with the canonical radius `eps / (2 L_f ln N)` and `c = 1`.
    pub fn new(
        epsilon: f64,
        family: &FunctionFamily,
        lambda: f64,
        center: Vec<f64>,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "accuracy must be positive"));
        }
        if lambda < 0.0 {
            return Err(Error::invalid("lambda", "regularization must be nonnegative"));
        }
        if center.len() != family.dim() {
            return Err(Error::invalid("center", "center dimension mismatch"));
        }
        let n = family.n_functions() as f64;
        let epsilon_prime = epsilon / (2.0 * n.ln());
        let radius = epsilon / (2.0 * family.lipschitz() * n.ln());
        let ball_param = 1.0;
        let grad_bound =
            std::f64::consts::E.powi(2) * (family.lipschitz() + lambda * radius);
        if radius * family.lipschitz() > ball_param * epsilon_prime * (1.0 + 1e-12) {
            return Err(Error::Internal(
                "smoothing radius violates the ball-parameter bound".into(),
            ));
        }
        Ok(SmoothingContext {
            epsilon,
            epsilon_prime,
            lambda,
            center,
            radius,
            ball_param,
            grad_bound,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon_prime(&self) -> f64 {
        self.epsilon_prime
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn ball_param(&self) -> f64 {
        self.ball_param
    }

    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    /// Same context re-centered (weights and caches do not carry over).
    pub fn recenter(&self, center: Vec<f64>) -> Self {
        SmoothingContext {
            center,
            ..self.clone()
        }
    }

    fn check_ball(&self, x: &[f64]) -> Result<()> {
        let d = vecmath::distance(x, &self.center);
        if d > self.radius * (1.0 + 1e-9) {
            return Err(Error::OutsideBall {
                distance: d,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// Regularizer `lambda/2 * |x - center|^2`.
    fn regularizer(&self, x: &[f64]) -> f64 {
        let d = vecmath::distance(x, &self.center);
        0.5 * self.lambda * d * d
    }
}

/// `max_i f_i(x)`; charges `N` value queries.
pub fn f_max(family: &FunctionFamily, x: &[f64], ledger: &mut QueryLedger) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..family.n_functions() {
        let v = evaluate(family, i, x, ledger).expect("index in range");
        if v > best {
            best = v;
        }
    }
    best
}

/// Index of the maximal function at `x`, ties broken by smallest index;
/// charges `N` value queries.
pub fn argmax(family: &FunctionFamily, x: &[f64], ledger: &mut QueryLedger) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for i in 0..family.n_functions() {
        let v = evaluate(family, i, x, ledger).expect("index in range");
        if v > best {
            best = v;
            arg = i;
        }
    }
    arg
}

fn charged_values(family: &FunctionFamily, x: &[f64], ledger: &mut QueryLedger) -> Vec<f64> {
    (0..family.n_functions())
        .map(|i| evaluate(family, i, x, ledger).expect("index in range"))
        .collect()
}

/// Max-shifted log-sum-exp: `eps' * ln(sum exp(v_i/eps'))`.
fn log_sum_exp(values: &[f64], epsilon_prime: f64) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|v| ((v - m) / epsilon_prime).exp()).sum();
    m + epsilon_prime * sum.ln()
}

/// Softmax surrogate of the max; charges `N` value queries.
pub fn f_smax(
    family: &FunctionFamily,
    x: &[f64],
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
) -> f64 {
    let values = charged_values(family, x, ledger);
    log_sum_exp(&values, ctx.epsilon_prime())
}

/// Ball-regularized surrogate `F_smax(x) + lambda/2 |x - center|^2`.
pub fn f_smax_reg(
    family: &FunctionFamily,
    x: &[f64],
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
) -> f64 {
    f_smax(family, x, ctx, ledger) + ctx.regularizer(x)
}

/// Exact softmax distribution of the function values at `point`; charges `N`
/// value queries. The weights sum to 1 up to rounding.
pub fn softmax_weights(
    family: &FunctionFamily,
    point: &[f64],
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
) -> Vec<f64> {
    let values = charged_values(family, point, ledger);
    softmax_of(&values, ctx.epsilon_prime())
}

/// Softmax of raw values (shift-invariant, overflow-safe).
pub fn softmax_of(values: &[f64], epsilon_prime: f64) -> Vec<f64> {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = values.iter().map(|v| ((v - m) / epsilon_prime).exp()).collect();
    let z: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= z;
    }
    w
}

/// Softmax weights and center values computed once per ball (per BROO call)
/// and reused, so the ledger is charged a single batch of `N` queries.
#[derive(Debug, Clone)]
pub struct CenterCache {
    weights: Vec<f64>,
    center_values: Vec<f64>,
}

impl CenterCache {
    /// Charges `N` value queries.
    pub fn compute(
        family: &FunctionFamily,
        ctx: &SmoothingContext,
        ledger: &mut QueryLedger,
    ) -> Self {
        let center_values = charged_values(family, ctx.center(), ledger);
        let weights = softmax_of(&center_values, ctx.epsilon_prime());
        CenterCache {
            weights,
            center_values,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn center_values(&self) -> &[f64] {
        &self.center_values
    }
}

fn gamma_from_values(
    values_at_x: &[f64],
    cache: &CenterCache,
    ctx: &SmoothingContext,
    reg_at_x: f64,
) -> f64 {
    let ep = ctx.epsilon_prime();
    cache
        .weights()
        .iter()
        .zip(values_at_x)
        .zip(cache.center_values())
        .map(|((p, vx), vc)| p * ep * ((vx + reg_at_x - vc) / ep).exp())
        .sum()
}

/// Exponentiated softmax `Gamma(x)`; only defined on the smoothing ball.
/// Charges `2N` value queries (values at `x` and at the center).
pub fn gamma(
    family: &FunctionFamily,
    x: &[f64],
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    ctx.check_ball(x)?;
    let cache = CenterCache::compute(family, ctx, ledger);
    let values = charged_values(family, x, ledger);
    Ok(gamma_from_values(&values, &cache, ctx, ctx.regularizer(x)))
}

/// [`gamma`] with a precomputed center cache; charges `N` value queries.
pub fn gamma_cached(
    family: &FunctionFamily,
    x: &[f64],
    ctx: &SmoothingContext,
    cache: &CenterCache,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    ctx.check_ball(x)?;
    let values = charged_values(family, x, ledger);
    Ok(gamma_from_values(&values, &cache, ctx, ctx.regularizer(x)))
}

/// Exact gradient of the exponentiated softmax,
/// `sum_i p_i e^{(f_i^l(x)-f_i^l(center))/eps'} (grad f_i(x) + lambda (x - center))`.
/// Charges `2N` value and `N` gradient queries.
pub fn gamma_gradient_exact(
    family: &FunctionFamily,
    x: &[f64],
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    ctx.check_ball(x)?;
    let cache = CenterCache::compute(family, ctx, ledger);
    let values = charged_values(family, x, ledger);
    let reg = ctx.regularizer(x);
    let ep = ctx.epsilon_prime();
    let lambda_shift = vecmath::sub(x, ctx.center());
    let mut grad = vec![0.0; family.dim()];
    for i in 0..family.n_functions() {
        let factor = cache.weights()[i]
            * ((values[i] + reg - cache.center_values()[i]) / ep).exp();
        let mut gi = subgradient_query(family, i, x, ledger).expect("index in range");
        vecmath::axpy(&mut gi, ctx.lambda(), &lambda_shift);
        vecmath::axpy(&mut grad, factor, &gi);
    }
    Ok(grad)
}

/// One-sample stochastic gradient for an index drawn from the center
/// softmax: `e^{(f_i^l(x)-f_i^l(center))/eps'} (grad f_i(x) + lambda (x - center))`.
/// Charges 2 value queries and 1 gradient query. Unbiased for
/// [`gamma_gradient_exact`] when `index ~ softmax_weights(center)`.
pub fn gamma_stochastic_gradient(
    family: &FunctionFamily,
    index: usize,
    x: &[f64],
    ctx: &SmoothingContext,
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    ctx.check_ball(x)?;
    let value_x = evaluate(family, index, x, ledger)?;
    let value_c = evaluate(family, index, ctx.center(), ledger)?;
    let factor = ((value_x + ctx.regularizer(x) - value_c) / ctx.epsilon_prime()).exp();
    let mut g = subgradient_query(family, index, x, ledger)?;
    let lambda_shift = vecmath::sub(x, ctx.center());
    vecmath::axpy(&mut g, ctx.lambda(), &lambda_shift);
    for v in g.iter_mut() {
        *v *= factor;
    }
    Ok(g)
}
