//! Zero-chain hard instances for lower-bound experiments.
//!
//! The chain construction stacks `T` link functions
//! `f_i(x) = psi((x_i - x_{i-1})/2)` (with a constant base coordinate in
//! place of `x_0`) and pads the family with zero functions up to `N`. A
//! hidden Haar-random rotation and a uniform index permutation hide which
//! coordinates and which function indices carry information, so any solver
//! must discover the chain one link at a time. Progress of a point is the
//! highest rotated coordinate it has pushed past the activation threshold.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::problem::{sample_in_ball, FunctionFamily, QueryLedger};
use crate::rng::{purpose, StreamKey};
use crate::solver;
use crate::vecmath;

/// Chain activation threshold `1/(4 T^{3/2})`.
pub fn alpha_for_chain(chain_len: usize) -> f64 {
    1.0 / (4.0 * (chain_len as f64).powf(1.5))
}

/// Base coordinate `1/sqrt(T)` standing in for `x_0`.
pub fn base_coord(chain_len: usize) -> f64 {
    1.0 / (chain_len as f64).sqrt()
}

/// Piecewise link potential: flat up to `alpha`, then a quadratic ramp of
/// curvature `ell`, then affine with unit slope. C^1 at both junctions.
///
/// `ell = 0` degenerates to the hinge `max(|t| - alpha, 0)`.
pub fn psi(t: f64, alpha: f64, ell: f64) -> f64 {
    let a = t.abs();
    if a <= alpha {
        0.0
    } else if ell == 0.0 {
        a - alpha
    } else if a <= alpha + 1.0 / ell {
        0.5 * ell * (a - alpha) * (a - alpha)
    } else {
        a - alpha - 0.5 / ell
    }
}

/// Derivative of [`psi`] in `t`. At the hinge of the `ell = 0` form the
/// limit from the flat side (zero) is returned, so subgradients are
/// deterministic.
pub fn psi_derivative(t: f64, alpha: f64, ell: f64) -> f64 {
    let a = t.abs();
    if a <= alpha {
        0.0
    } else if ell == 0.0 || a > alpha + 1.0 / ell {
        t.signum()
    } else {
        ell * (a - alpha) * t.signum()
    }
}

/// Value of the `index`-th (0-based) unshuffled chain function at `x`.
/// Indices at or beyond the chain length are identically zero.
pub fn hard_value(index: usize, x: &[f64], chain_len: usize, ell: f64) -> f64 {
    if index >= chain_len {
        return 0.0;
    }
    let alpha = alpha_for_chain(chain_len);
    let prev = if index == 0 { base_coord(chain_len) } else { x[index - 1] };
    psi((x[index] - prev) / 2.0, alpha, ell)
}

/// Gradient of the `index`-th unshuffled chain function (dense output).
pub fn hard_gradient(index: usize, x: &[f64], chain_len: usize, ell: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    if index >= chain_len {
        return g;
    }
    let alpha = alpha_for_chain(chain_len);
    let prev = if index == 0 { base_coord(chain_len) } else { x[index - 1] };
    let slope = psi_derivative((x[index] - prev) / 2.0, alpha, ell);
    g[index] = 0.5 * slope;
    if index > 0 {
        g[index - 1] = -0.5 * slope;
    }
    g
}

/// Highest 1-based coordinate index with `|x_i| >= alpha`; 0 when no
/// coordinate passes the threshold.
pub fn prog(x: &[f64], alpha: f64) -> usize {
    x.iter()
        .rposition(|v| v.abs() >= alpha)
        .map(|i| i + 1)
        .unwrap_or(0)
}

/// The displayed lower bound on the suboptimality of any point with
/// progress below the chain length: `min(1/(8 T^{3/2}), ell/(32 T^3))`.
pub fn suboptimality_floor(chain_len: usize, ell: f64) -> f64 {
    let t = chain_len as f64;
    (1.0 / (8.0 * t.powf(1.5))).min(ell / (32.0 * t.powi(3)))
}

/// A shuffled chain instance: rotation columns, index permutation, and the
/// chain parameters needed to evaluate and to measure progress.
#[derive(Debug, Clone)]
pub struct HardInstance {
    chain_len: usize,
    n_functions: usize,
    ell: f64,
    dim: usize,
    /// `dim x chain_len` column-orthonormal rotation, stored by columns.
    rotation: Arc<Vec<Vec<f64>>>,
    /// `permutation[j]` is the public index of base function `j`.
    permutation: Arc<Vec<usize>>,
    inverse_permutation: Arc<Vec<usize>>,
    alpha: f64,
    base_coord: f64,
    seed: u64,
}

impl HardInstance {
    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    pub fn n_functions(&self) -> usize {
        self.n_functions
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn base_coord(&self) -> f64 {
        self.base_coord
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rotation_columns(&self) -> &[Vec<f64>] {
        &self.rotation
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Rotated chain coordinates `U^T x`.
    pub fn rotated_coords(&self, x: &[f64]) -> Vec<f64> {
        self.rotation.iter().map(|u| vecmath::dot(u, x)).collect()
    }

    /// Progress of `x` measured in the hidden chain basis.
    pub fn progress(&self, x: &[f64]) -> usize {
        prog(&self.rotated_coords(x), self.alpha)
    }

    /// The instance as an oracle family: `f~_i(x) = f_{perm^{-1}(i)}(U^T x)`.
    pub fn family(&self) -> FunctionFamily {
        self.scaled_family(1.0, 1.0)
    }

    /// Scaled oracle family `L*R*f~_i(x/R)`, which is `L`-Lipschitz on the
    /// ball of radius `R` and `L*ell/R`-smooth.
    pub fn scaled_family(&self, lipschitz: f64, radius: f64) -> FunctionFamily {
        let this = self.clone();
        let value = move |i: usize, x: &[f64]| {
            let j = this.inverse_permutation[i];
            if j >= this.chain_len {
                return 0.0;
            }
            let scaled: Vec<f64> = x.iter().map(|v| v / radius).collect();
            let z = this.rotated_coords(&scaled);
            lipschitz * radius * hard_value(j, &z, this.chain_len, this.ell)
        };
        let that = self.clone();
        let subgradient = move |i: usize, x: &[f64]| {
            let j = that.inverse_permutation[i];
            if j >= that.chain_len {
                return vec![0.0; x.len()];
            }
            let scaled: Vec<f64> = x.iter().map(|v| v / radius).collect();
            let z = that.rotated_coords(&scaled);
            let alpha = that.alpha;
            let prev = if j == 0 { that.base_coord } else { z[j - 1] };
            let slope = psi_derivative((z[j] - prev) / 2.0, alpha, that.ell);
            // Chain rule through U^T and the 1/R input scaling.
            let mut g = vecmath::scale(&that.rotation[j], 0.5 * slope * lipschitz);
            if j > 0 {
                vecmath::axpy(&mut g, -0.5 * slope * lipschitz, &that.rotation[j - 1]);
            }
            g
        };
        let smoothness = lipschitz * self.ell / radius;
        FunctionFamily::new(
            self.n_functions,
            self.dim,
            lipschitz,
            Some(smoothness),
            radius,
            Arc::new(value),
            Arc::new(subgradient),
        )
        .expect("instance dimensions already validated")
    }
}

fn validate_chain_args(chain_len: usize, n_functions: usize, dim: usize) -> Result<()> {
    if chain_len == 0 {
        return Err(Error::invalid("chain_len", "chain length must be positive"));
    }
    if dim < chain_len {
        return Err(Error::invalid(
            "dim",
            format!("dimension {dim} smaller than chain length {chain_len}"),
        ));
    }
    if n_functions < chain_len.max(2) {
        return Err(Error::invalid(
            "n_functions",
            format!("need at least max(chain_len, 2) = {} functions", chain_len.max(2)),
        ));
    }
    Ok(())
}

/// Shuffled chain instance with Haar-random rotation (Gaussian matrix +
/// thin QR with sign-fixed diagonal) and a uniform permutation.
pub fn make_shuffled_instance(
    chain_len: usize,
    n_functions: usize,
    ell: f64,
    dim: usize,
    seed: u64,
) -> Result<HardInstance> {
    validate_chain_args(chain_len, n_functions, dim)?;
    let mut rng = StreamKey::new(seed).child(purpose::INSTANCE).rng(0);
    let rotation = haar_columns(dim, chain_len, &mut rng);
    let mut permutation: Vec<usize> = (0..n_functions).collect();
    permutation.shuffle(&mut rng);
    let mut inverse = vec![0usize; n_functions];
    for (j, &i) in permutation.iter().enumerate() {
        inverse[i] = j;
    }
    Ok(HardInstance {
        chain_len,
        n_functions,
        ell,
        dim,
        rotation: Arc::new(rotation),
        permutation: Arc::new(permutation),
        inverse_permutation: Arc::new(inverse),
        alpha: alpha_for_chain(chain_len),
        base_coord: base_coord(chain_len),
        seed,
    })
}

/// Test-mode instance: identity permutation and leading-columns rotation, so
/// values match [`hard_value`] directly.
pub fn make_unshuffled_instance(
    chain_len: usize,
    n_functions: usize,
    ell: f64,
    dim: usize,
) -> Result<HardInstance> {
    validate_chain_args(chain_len, n_functions, dim)?;
    let rotation: Vec<Vec<f64>> = (0..chain_len).map(|j| vecmath::unit_vector(dim, j)).collect();
    let permutation: Vec<usize> = (0..n_functions).collect();
    Ok(HardInstance {
        chain_len,
        n_functions,
        ell,
        dim,
        rotation: Arc::new(rotation),
        permutation: Arc::new(permutation.clone()),
        inverse_permutation: Arc::new(permutation),
        alpha: alpha_for_chain(chain_len),
        base_coord: base_coord(chain_len),
        seed: 0,
    })
}

/// Haar-distributed `dim x k` column-orthonormal matrix via Gaussian sampling
/// and twice-iterated modified Gram-Schmidt (positive diagonal).
fn haar_columns<R: Rng>(dim: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.random_range(0.0..1.0);
                    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                })
                .collect()
        })
        .collect();
    for j in 0..k {
        // Two orthogonalization passes keep U^T U = I to ~1e-15 even for
        // unlucky Gaussian draws.
        for _ in 0..2 {
            for i in 0..j {
                let proj = {
                    let (head, tail) = cols.split_at(j);
                    vecmath::dot(&head[i], &tail[0])
                };
                let prev = cols[i].clone();
                vecmath::axpy(&mut cols[j], -proj, &prev);
            }
        }
        let nrm = vecmath::norm(&cols[j]);
        for v in cols[j].iter_mut() {
            *v /= nrm;
        }
    }
    cols
}

/// Scaled hard family for end-to-end runs.
///
/// The chain length follows the lower-bound parameter setting
/// `T = ceil(max((L_f R / eps)^{2/3}, (L_g R^2 / eps)^{1/3}) / 5)` with inner
/// smoothness `ell = L_g R / L_f`; the result is `L_f`-Lipschitz and
/// `L_g`-smooth on the ball of radius `R`. Desk runs clip the dimension to
/// `dim_cap` and report the full-scale requirement through
/// [`ScaledHardFamily::dim_warning`].
#[derive(Debug, Clone)]
pub struct ScaledHardFamily {
    pub family: FunctionFamily,
    pub instance: HardInstance,
    pub lipschitz: f64,
    pub radius: f64,
    pub chain_len: usize,
    pub dim: usize,
    /// Full-scale dimension demanded by the progress-control argument.
    pub dim_required: f64,
    pub dim_clipped: bool,
}

impl ScaledHardFamily {
    pub fn dim_warning(&self) -> Option<String> {
        self.dim_clipped.then(|| {
            format!(
                "hard-instance dimension clipped to {} (progress-control argument wants d >= {:.3e}); results are illustrative",
                self.dim, self.dim_required
            )
        })
    }
}

pub fn scaled_hard_family(
    lipschitz: f64,
    smoothness: f64,
    radius: f64,
    epsilon: f64,
    n_functions: usize,
    seed: u64,
    dim_cap: usize,
) -> Result<ScaledHardFamily> {
    if !(epsilon > 0.0) || epsilon >= (lipschitz * radius).min(smoothness * radius * radius) {
        return Err(Error::invalid(
            "epsilon",
            format!(
                "need 0 < epsilon < min(L_f*R, L_g*R^2) = {:.6e}",
                (lipschitz * radius).min(smoothness * radius * radius)
            ),
        ));
    }
    let t_real = ((lipschitz * radius / epsilon).powf(2.0 / 3.0))
        .max((smoothness * radius * radius / epsilon).powf(1.0 / 3.0))
        / 5.0;
    let chain_len = (t_real.ceil() as usize).max(1);
    let ell = smoothness * radius / lipschitz;
    let t = chain_len as f64;
    // Proposition precondition, with a nominal failure probability of 0.1.
    let dim_required = t + (32.0 * t.powi(3) * (32.0 * (n_functions as f64).sqrt() * t.powi(5)).ln())
        .max(32.0 * t.powi(3) * (4.0 * t / 0.1).ln());
    let dim = dim_cap.max(chain_len);
    let dim_clipped = (dim as f64) < dim_required;
    let instance = make_shuffled_instance(chain_len, n_functions, ell, dim, seed)?;
    let family = instance.scaled_family(lipschitz, radius);
    Ok(ScaledHardFamily {
        family,
        instance,
        lipschitz,
        radius,
        chain_len,
        dim,
        dim_required,
        dim_clipped,
    })
}

/// One recorded oracle query of a progress experiment.
#[derive(Debug, Clone)]
pub struct ProgressRecord {
    pub query_index: u64,
    pub point: Vec<f64>,
    pub prog: usize,
    /// Charged oracle calls seen so far (each recorded call charges 1).
    pub cumulative_charge: u64,
}

/// Per-query progress trace of one experiment run.
#[derive(Debug, Clone, Default)]
pub struct ProgressTrace {
    pub records: Vec<ProgressRecord>,
    pub max_prog: usize,
}

impl ProgressTrace {
    fn record(&mut self, point: Vec<f64>, prog: usize) {
        let query_index = self.records.len() as u64;
        self.max_prog = self.max_prog.max(prog);
        self.records.push(ProgressRecord {
            query_index,
            point,
            prog,
            cumulative_charge: query_index + 1,
        });
    }
}

/// Which point-generating process the progress experiment observes.
#[derive(Debug, Clone)]
pub enum ExperimentArm {
    /// Projected subgradient descent on the instance objective.
    Subgradient { epsilon: f64 },
    /// Oracle-free uniform guessing in the domain ball; every guess is
    /// recorded as if it had been queried.
    RandomGuess,
}

/// Run a solver (or guesser) against the instance while recording the chain
/// progress of every queried point. `budget` caps the number of recorded
/// queries.
pub fn run_progress_experiment(
    arm: &ExperimentArm,
    instance: &HardInstance,
    budget: u64,
    seed: u64,
    ledger: &mut QueryLedger,
) -> ProgressTrace {
    let mut trace = ProgressTrace::default();
    match arm {
        ExperimentArm::RandomGuess => {
            let mut rng = StreamKey::new(seed).child(purpose::EXPERIMENT).rng(0);
            for _ in 0..budget {
                let x = sample_in_ball(instance.dim(), 1.0, &mut rng);
                let p = instance.progress(&x);
                trace.record(x, p);
            }
        }
        ExperimentArm::Subgradient { epsilon } => {
            let (family, shared) = traced_family(instance);
            let x0 = vec![0.0; instance.dim()];
            // The budget caps recorded queries; the subgradient driver sizes
            // its own iteration count from epsilon.
            let _ = solver::subgradient_method(&family, &x0, 1.0, *epsilon, ledger);
            let mut inner = shared.lock().unwrap();
            trace.records = std::mem::take(&mut inner.records);
            trace.records.truncate(budget as usize);
            trace.max_prog = trace.records.iter().map(|r| r.prog).max().unwrap_or(0);
        }
    }
    trace
}

type SharedTrace = Arc<std::sync::Mutex<ProgressTrace>>;

/// Wrap the instance family so every value/subgradient call records the
/// progress of the queried point.
pub fn traced_family(instance: &HardInstance) -> (FunctionFamily, SharedTrace) {
    let shared: SharedTrace = Arc::new(std::sync::Mutex::new(ProgressTrace::default()));
    let base = instance.family();
    let inst_v = instance.clone();
    let trace_v = Arc::clone(&shared);
    let base_v = base.clone();
    let value = move |i: usize, x: &[f64]| {
        let p = inst_v.progress(x);
        trace_v.lock().unwrap().record(x.to_vec(), p);
        base_v.value(i, x)
    };
    let inst_g = instance.clone();
    let trace_g = Arc::clone(&shared);
    let base_g = base.clone();
    let subgradient = move |i: usize, x: &[f64]| {
        let p = inst_g.progress(x);
        trace_g.lock().unwrap().record(x.to_vec(), p);
        base_g.subgradient(i, x)
    };
    let family = FunctionFamily::new(
        base.n_functions(),
        base.dim(),
        base.lipschitz(),
        base.smoothness(),
        base.domain_radius(),
        Arc::new(value),
        Arc::new(subgradient),
    )
    .expect("base family already validated");
    (family, shared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::evaluate;

    #[test]
    fn psi_is_zero_at_flat_boundary() {
        assert_eq!(psi(0.25, 0.25, 4.0), 0.0);
        assert_eq!(psi(-0.25, 0.25, 4.0), 0.0);
    }

    #[test]
    fn psi_branches_agree_at_junction() {
        // At |t| = alpha + 1/ell both branch formulas give 1/(2*ell).
        let (alpha, ell) = (0.1, 2.5);
        let t = alpha + 1.0 / ell;
        let quadratic = 0.5 * ell * (t - alpha) * (t - alpha);
        let affine = t - alpha - 0.5 / ell;
        assert!((quadratic - 1.0 / (2.0 * ell)).abs() < 1e-15);
        assert!((affine - 1.0 / (2.0 * ell)).abs() < 1e-15);
        assert!((psi(t, alpha, ell) - 1.0 / (2.0 * ell)).abs() < 1e-15);
    }

    #[test]
    fn psi_hand_value_at_branch_junction() {
        // alpha = 1/4, ell = 4: psi(1/2) sits exactly at the junction and
        // evaluates to 1/8 from either branch.
        assert_eq!(psi(0.5, 0.25, 4.0), 0.125);
        assert_eq!(psi(-0.5, 0.25, 4.0), 0.125);
    }

    #[test]
    fn psi_derivative_matches_finite_differences() {
        let (alpha, ell) = (0.08, 3.0);
        let h = 1e-7;
        for &t in &[-0.5, -0.2, -0.09, 0.0, 0.05, 0.09, 0.2, 0.6] {
            let fd = (psi(t + h, alpha, ell) - psi(t - h, alpha, ell)) / (2.0 * h);
            assert!(
                (psi_derivative(t, alpha, ell) - fd).abs() < 1e-6,
                "t={t}: analytic {} vs fd {fd}",
                psi_derivative(t, alpha, ell)
            );
        }
    }

    #[test]
    fn hard_value_zero_beyond_chain_and_on_flat_points() {
        let x = vec![0.3, 0.3, 0.3, 0.0];
        assert_eq!(hard_value(3, &x, 2, 4.0), 0.0);
        // Equal consecutive coordinates sit in the flat region for i >= 1.
        assert_eq!(hard_value(1, &x, 3, 4.0), 0.0);
    }

    #[test]
    fn hard_value_at_origin_chain_one() {
        // T = 1: t = (0 - 1)/2 = -1/2, psi_{1/4,4}(1/2) = 1/8.
        assert_eq!(hard_value(0, &[0.0, 0.0], 1, 4.0), 0.125);
    }

    #[test]
    fn hard_gradient_at_origin_confirmed_by_finite_differences() {
        // Finite-difference oracle first, then the frozen hand value -1/2.
        let x = vec![0.0, 0.0];
        let h = 1e-7;
        let mut fd = vec![0.0; 2];
        for k in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            fd[k] = (hard_value(0, &xp, 1, 4.0) - hard_value(0, &xm, 1, 4.0)) / (2.0 * h);
        }
        let g = hard_gradient(0, &x, 1, 4.0);
        for k in 0..2 {
            assert!((g[k] - fd[k]).abs() < 1e-6);
        }
        assert!((g[0] - (-0.5)).abs() < 1e-12);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn prog_conventions() {
        assert_eq!(prog(&[0.0, 0.0, 0.0], 0.1), 0);
        assert_eq!(prog(&[0.1, 0.0, 0.05], 0.1), 1);
        assert_eq!(prog(&[0.0, 0.1, 0.1], 0.1), 3);
    }

    #[test]
    fn floor_values() {
        assert_eq!(suboptimality_floor(1, 4.0), 0.125);
        assert_eq!(suboptimality_floor(4, 1.0), 1.0 / 2048.0);
        let mut prev = f64::INFINITY;
        for t in 1..10 {
            let f = suboptimality_floor(t, 1.0);
            assert!(f <= prev);
            prev = f;
        }
    }

    #[test]
    fn unshuffled_family_matches_hard_value() {
        let inst = make_unshuffled_instance(3, 6, 4.0, 5).unwrap();
        let fam = inst.family();
        let mut ledger = QueryLedger::new();
        let x = vec![0.1, -0.2, 0.4, 0.0, 0.9];
        for i in 0..6 {
            let via_family = evaluate(&fam, i, &x, &mut ledger).unwrap();
            assert_eq!(via_family, hard_value(i, &x[..], 3, 4.0));
        }
    }

    #[test]
    fn rotation_is_column_orthonormal() {
        let inst = make_shuffled_instance(4, 8, 1.0, 24, 7).unwrap();
        let u = inst.rotation_columns();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (vecmath::dot(&u[i], &u[j]) - expected).abs() < 1e-10,
                    "U^T U deviates at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn permutation_is_bijective_and_seeded() {
        let a = make_shuffled_instance(3, 10, 1.0, 12, 5).unwrap();
        let b = make_shuffled_instance(3, 10, 1.0, 12, 5).unwrap();
        assert_eq!(a.permutation(), b.permutation());
        let mut seen = vec![false; 10];
        for &p in a.permutation() {
            assert!(!seen[p]);
            seen[p] = true;
        }
    }

    #[test]
    fn rotation_invariance_change_of_variable() {
        // Evaluating the shuffled family at U z reproduces the unshuffled
        // values of the permuted base index at z (padded to dimension d).
        let inst = make_shuffled_instance(3, 6, 2.0, 16, 21).unwrap();
        let fam = inst.family();
        let z = vec![0.3, -0.5, 0.2];
        let mut x = vec![0.0; 16];
        for (j, col) in inst.rotation_columns().iter().enumerate() {
            vecmath::axpy(&mut x, z[j], col);
        }
        for i in 0..6 {
            let j = inst.permutation().iter().position(|&p| p == i).unwrap();
            let direct = hard_value(j, &z, 3, 2.0);
            assert!((fam.value(i, &x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_family_value_scaling_identity() {
        let scaled = scaled_hard_family(2.0, 2.0, 3.0, 0.05, 8, 9, 20).unwrap();
        let base = scaled.instance.family();
        let x = vec![0.0; scaled.dim];
        let expected = 2.0 * 3.0 * base.value(0, &x);
        assert!((scaled.family.value(0, &x) - expected).abs() < 1e-12);
    }

    #[test]
    fn scaled_family_chain_length_arithmetic() {
        // L_f = L_g = R = 1, eps = 1/40: T = ceil(max(40^{2/3}, 40^{1/3})/5) = 3.
        let t_real = (40.0f64.powf(2.0 / 3.0)).max(40.0f64.powf(1.0 / 3.0)) / 5.0;
        assert_eq!(t_real.ceil() as usize, 3);
        let scaled = scaled_hard_family(1.0, 1.0, 1.0, 1.0 / 40.0, 8, 1, 20).unwrap();
        assert_eq!(scaled.chain_len, 3);
        assert!(scaled.dim_clipped);
        assert!(scaled.dim_warning().is_some());
    }

    #[test]
    fn scaled_family_rejects_large_epsilon() {
        let err = scaled_hard_family(1.0, 1.0, 1.0, 2.0, 8, 1, 20).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument { name: "epsilon", .. }));
    }

    #[test]
    fn guessing_trace_records_every_point() {
        let inst = make_shuffled_instance(2, 4, 1.0, 8, 3).unwrap();
        let mut ledger = QueryLedger::new();
        let trace = run_progress_experiment(&ExperimentArm::RandomGuess, &inst, 25, 11, &mut ledger);
        assert_eq!(trace.records.len(), 25);
        assert!(trace.records.windows(2).all(|w| w[0].query_index + 1 == w[1].query_index));
    }

    #[test]
    fn zero_budget_trace_is_empty() {
        let inst = make_shuffled_instance(2, 4, 1.0, 8, 3).unwrap();
        let mut ledger = QueryLedger::new();
        let trace = run_progress_experiment(&ExperimentArm::RandomGuess, &inst, 0, 11, &mut ledger);
        assert_eq!(trace.max_prog, 0);
        assert!(trace.records.is_empty());
    }
}
