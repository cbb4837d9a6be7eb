//! Function families, oracle access with query accounting, and smoke-test
//! instance constructors.
//!
//! A [`FunctionFamily`] bundles `N` convex Lipschitz functions over `R^d`
//! with deterministic value and subgradient maps. All charged access goes
//! through [`evaluate`] and [`subgradient_query`], which update a
//! [`QueryLedger`]; modules that emulate quantum subroutines may also read
//! values through [`FunctionFamily::value`] without charging and account for
//! their cost with the documented formulas instead.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, StreamKey};
use crate::vecmath;

type ValueFn = dyn Fn(usize, &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(usize, &[f64]) -> Vec<f64> + Send + Sync;

/// `N` convex functions with value and subgradient access.
///
/// Families are immutable and cheap to clone (the oracles are shared), so
/// they can be handed to parallel trials directly.
#[derive(Clone)]
pub struct FunctionFamily {
    n_functions: usize,
    dim: usize,
    lipschitz: f64,
    smoothness: Option<f64>,
    domain_radius: f64,
    value: Arc<ValueFn>,
    subgradient: Arc<GradFn>,
}

impl std::fmt::Debug for FunctionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionFamily")
            .field("n_functions", &self.n_functions)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("smoothness", &self.smoothness)
            .field("domain_radius", &self.domain_radius)
            .finish()
    }
}

impl FunctionFamily {
    /// Build a family from its oracles.
    ///
    /// `n_functions` must be at least 2: the softmax smoothing parameter
    /// `epsilon / (2 ln N)` is undefined for a single function.
    pub fn new(
        n_functions: usize,
        dim: usize,
        lipschitz: f64,
        smoothness: Option<f64>,
        domain_radius: f64,
        value: Arc<ValueFn>,
        subgradient: Arc<GradFn>,
    ) -> Result<Self> {
        if n_functions < 2 {
            return Err(Error::invalid(
                "n_functions",
                format!("need at least 2 functions, got {n_functions}"),
            ));
        }
        if dim == 0 {
            return Err(Error::invalid("dim", "dimension must be positive"));
        }
        if !(lipschitz > 0.0) {
            return Err(Error::invalid("lipschitz", "Lipschitz constant must be positive"));
        }
        if !(domain_radius > 0.0) {
            return Err(Error::invalid("domain_radius", "domain radius must be positive"));
        }
        if let Some(s) = smoothness {
            if s < 0.0 {
                return Err(Error::invalid("smoothness", "smoothness must be nonnegative"));
            }
        }
        Ok(FunctionFamily {
            n_functions,
            dim,
            lipschitz,
            smoothness,
            domain_radius,
            value,
            subgradient,
        })
    }

    pub fn n_functions(&self) -> usize {
        self.n_functions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// Uncharged value access. Emulated quantum subroutines use this and
    /// charge the ledger with their own cost formulas.
    pub fn value(&self, index: usize, x: &[f64]) -> f64 {
        debug_assert!(index < self.n_functions);
        (self.value)(index, x)
    }

    /// Uncharged subgradient access.
    pub fn subgradient(&self, index: usize, x: &[f64]) -> Vec<f64> {
        debug_assert!(index < self.n_functions);
        (self.subgradient)(index, x)
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.n_functions {
            Err(Error::IndexOutOfRange {
                index,
                n_functions: self.n_functions,
            })
        } else {
            Ok(())
        }
    }
}

/// Named constant factors of the query cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConstants {
    /// Factor on the top-K finding charge `sqrt(K*N) * ln(1/delta)`.
    pub c_topk: f64,
    /// Factor on the per-sample amplification rounds `1/sqrt(p)`.
    pub c_amp: f64,
    /// Factor on the epoch-SGD iteration budget.
    pub c_iters: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        CostConstants {
            c_topk: 1.0,
            c_amp: 1.0,
            c_iters: 1.0,
        }
    }
}

/// Running counts of charged oracle queries.
///
/// `quantum_charged` is the total charge under the emulated cost model: plain
/// value and gradient queries charge 1 each, and the sampler charges its
/// square-root formulas directly. Counters only ever increase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    value_queries: u64,
    gradient_queries: u64,
    quantum_charged: u64,
    domain_violations: u64,
    cost_constants: CostConstants,
}

impl Default for QueryLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::with_constants(CostConstants::default())
    }

    pub fn with_constants(cost_constants: CostConstants) -> Self {
        QueryLedger {
            value_queries: 0,
            gradient_queries: 0,
            quantum_charged: 0,
            domain_violations: 0,
            cost_constants,
        }
    }

    pub fn value_queries(&self) -> u64 {
        self.value_queries
    }

    pub fn gradient_queries(&self) -> u64 {
        self.gradient_queries
    }

    pub fn quantum_charged(&self) -> u64 {
        self.quantum_charged
    }

    pub fn domain_violations(&self) -> u64 {
        self.domain_violations
    }

    pub fn constants(&self) -> &CostConstants {
        &self.cost_constants
    }

    /// One charged value query (one emulated oracle call).
    pub fn charge_value_query(&mut self) {
        self.value_queries += 1;
        self.quantum_charged += 1;
    }

    /// One charged gradient query. Gradient estimation costs a single oracle
    /// call in the emulated model.
    pub fn charge_gradient_query(&mut self) {
        self.gradient_queries += 1;
        self.quantum_charged += 1;
    }

    /// Direct charge from a documented sampler cost formula.
    pub fn charge_quantum(&mut self, amount: u64) {
        self.quantum_charged += amount;
    }

    pub fn flag_domain_violation(&mut self) {
        self.domain_violations += 1;
    }

    /// Merge the counts of another ledger (used when joining per-phase
    /// ledgers into an experiment total).
    pub fn absorb(&mut self, other: &QueryLedger) {
        self.value_queries += other.value_queries;
        self.gradient_queries += other.gradient_queries;
        self.quantum_charged += other.quantum_charged;
        self.domain_violations += other.domain_violations;
    }
}

/// Charged evaluation of `f_i(x)`.
///
/// Points outside the domain ball are evaluated anyway but flagged on the
/// ledger; projections keep solver iterates feasible, and finite-difference
/// probes near the boundary must not hard-fail.
pub fn evaluate(
    family: &FunctionFamily,
    index: usize,
    x: &[f64],
    ledger: &mut QueryLedger,
) -> Result<f64> {
    family.check_index(index)?;
    if vecmath::norm(x) > family.domain_radius() * (1.0 + 1e-12) {
        ledger.flag_domain_violation();
    }
    ledger.charge_value_query();
    Ok(family.value(index, x))
}

/// Charged subgradient query: returns an element of the subdifferential of
/// `f_i` at `x` for exactly one charged oracle call.
pub fn subgradient_query(
    family: &FunctionFamily,
    index: usize,
    x: &[f64],
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    family.check_index(index)?;
    if vecmath::norm(x) > family.domain_radius() * (1.0 + 1e-12) {
        ledger.flag_domain_violation();
    }
    ledger.charge_gradient_query();
    Ok(family.subgradient(index, x))
}

/// Random affine family `f_i(x) = <a_i, x> + b_i` with `|a_i| <= lipschitz`,
/// reproducible from the seed. The max of affine functions is piecewise
/// linear, so small-dimension instances have grid-computable minima.
pub fn make_affine_family(
    seed: u64,
    n_functions: usize,
    dim: usize,
    lipschitz: f64,
    domain_radius: f64,
) -> Result<FunctionFamily> {
    if n_functions < 2 {
        return Err(Error::invalid(
            "n_functions",
            format!("need at least 2 functions, got {n_functions}"),
        ));
    }
    let mut rng = StreamKey::new(seed).rng(purpose::INSTANCE);
    let mut slopes = Vec::with_capacity(n_functions);
    let mut offsets = Vec::with_capacity(n_functions);
    for _ in 0..n_functions {
        // Direction uniform on the sphere, magnitude in [L/2, L].
        let mut a: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng)).collect();
        let nrm = vecmath::norm(&a);
        let magnitude = lipschitz * rng.random_range(0.5..1.0);
        if nrm > 0.0 {
            for v in a.iter_mut() {
                *v *= magnitude / nrm;
            }
        }
        slopes.push(a);
        offsets.push(lipschitz * domain_radius * rng.random_range(-0.25..0.25));
    }
    affine_family_from_parts(slopes, offsets, lipschitz, domain_radius)
}

/// Two opposed linear functions `f_1 = L*x_1`, `f_2 = -L*x_1`.
/// Their max is `L*|x_1|` with minimum 0 on the hyperplane `x_1 = 0`.
pub fn symmetric_affine_pair(lipschitz: f64, dim: usize, domain_radius: f64) -> FunctionFamily {
    let mut e1 = vecmath::unit_vector(dim, 0);
    for v in e1.iter_mut() {
        *v *= lipschitz;
    }
    let neg = vecmath::scale(&e1, -1.0);
    affine_family_from_parts(vec![e1, neg], vec![0.0, 0.0], lipschitz, domain_radius)
        .expect("two functions are always accepted")
}

/// Assemble an affine family from explicit coefficients.
pub fn affine_family_from_parts(
    slopes: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    lipschitz: f64,
    domain_radius: f64,
) -> Result<FunctionFamily> {
    let n = slopes.len();
    if n != offsets.len() {
        return Err(Error::invalid("offsets", "slope/offset length mismatch"));
    }
    let dim = slopes.first().map(|a| a.len()).unwrap_or(0);
    let slopes = Arc::new(slopes);
    let offsets = Arc::new(offsets);
    let slopes_v = Arc::clone(&slopes);
    let offsets_v = Arc::clone(&offsets);
    let value = move |i: usize, x: &[f64]| vecmath::dot(&slopes_v[i], x) + offsets_v[i];
    let subgradient = move |i: usize, _x: &[f64]| slopes[i].clone();
    FunctionFamily::new(
        n,
        dim,
        lipschitz,
        Some(0.0), // affine functions have zero curvature
        domain_radius,
        Arc::new(value),
        Arc::new(subgradient),
    )
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; avoids pulling rand_distr in for one distribution.
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Sample a point uniformly from the ball of radius `radius` around the origin.
pub fn sample_in_ball<R: Rng>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut g: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
    let nrm = vecmath::norm(&g);
    let u: f64 = rng.random_range(0.0..1.0);
    let r = radius * u.powf(1.0 / dim as f64);
    if nrm > 0.0 {
        for v in g.iter_mut() {
            *v *= r / nrm;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_evaluate_matches_inner_product() {
        let fam = symmetric_affine_pair(1.0, 4, 10.0);
        let mut ledger = QueryLedger::new();
        let x = vec![2.0, 0.0, 0.0, 0.0];
        let v = evaluate(&fam, 0, &x, &mut ledger).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(ledger.value_queries(), 1);
        assert_eq!(ledger.quantum_charged(), 1);
    }

    #[test]
    fn repeated_evaluate_is_deterministic_and_charges_each_call() {
        let fam = make_affine_family(3, 5, 3, 1.0, 1.0).unwrap();
        let mut ledger = QueryLedger::new();
        let x = vec![0.1, -0.2, 0.3];
        let a = evaluate(&fam, 2, &x, &mut ledger).unwrap();
        let b = evaluate(&fam, 2, &x, &mut ledger).unwrap();
        assert_eq!(a, b);
        assert_eq!(ledger.value_queries(), 2);
        assert_eq!(ledger.quantum_charged(), 2);
    }

    #[test]
    fn subgradient_of_affine_is_slope_everywhere() {
        let fam = symmetric_affine_pair(2.5, 3, 1.0);
        let mut ledger = QueryLedger::new();
        for x in [vec![0.0; 3], vec![0.3, -0.1, 0.9]] {
            let g = subgradient_query(&fam, 1, &x, &mut ledger).unwrap();
            assert_eq!(g, vec![-2.5, 0.0, 0.0]);
        }
        assert_eq!(ledger.gradient_queries(), 2);
        assert_eq!(ledger.quantum_charged(), 2);
    }

    #[test]
    fn index_out_of_range_is_rejected() {
        let fam = symmetric_affine_pair(1.0, 2, 1.0);
        let mut ledger = QueryLedger::new();
        let err = evaluate(&fam, 2, &[0.0, 0.0], &mut ledger).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 2, .. }));
        assert_eq!(ledger.value_queries(), 0);
    }

    #[test]
    fn out_of_domain_is_flagged_not_rejected() {
        let fam = symmetric_affine_pair(1.0, 2, 1.0);
        let mut ledger = QueryLedger::new();
        let v = evaluate(&fam, 0, &[5.0, 0.0], &mut ledger).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(ledger.domain_violations(), 1);
    }

    #[test]
    fn single_function_family_is_rejected() {
        let err = make_affine_family(0, 1, 2, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument { name: "n_functions", .. }));
    }

    #[test]
    fn same_seed_reproduces_family() {
        let a = make_affine_family(42, 6, 4, 2.0, 1.5).unwrap();
        let b = make_affine_family(42, 6, 4, 2.0, 1.5).unwrap();
        let x = vec![0.3, -0.4, 0.2, 0.9];
        for i in 0..6 {
            assert_eq!(a.value(i, &x), b.value(i, &x));
            assert_eq!(a.subgradient(i, &x), b.subgradient(i, &x));
        }
    }

    #[test]
    fn affine_family_lipschitz_on_random_pairs() {
        let fam = make_affine_family(11, 8, 5, 3.0, 2.0).unwrap();
        let mut rng = StreamKey::new(99).rng(purpose::EXPERIMENT);
        for _ in 0..100 {
            let x = sample_in_ball(5, 2.0, &mut rng);
            let y = sample_in_ball(5, 2.0, &mut rng);
            let d = vecmath::distance(&x, &y);
            for i in 0..8 {
                let gap = (fam.value(i, &x) - fam.value(i, &y)).abs();
                assert!(gap <= 3.0 * d + 1e-12);
            }
        }
    }

    #[test]
    fn subgradient_inequality_holds_on_samples() {
        let fam = make_affine_family(5, 4, 3, 1.0, 1.0).unwrap();
        let mut rng = StreamKey::new(17).rng(purpose::EXPERIMENT);
        for _ in 0..50 {
            let x = sample_in_ball(3, 1.0, &mut rng);
            let y = sample_in_ball(3, 1.0, &mut rng);
            for i in 0..4 {
                let g = fam.subgradient(i, &x);
                let lower = fam.value(i, &x) + vecmath::dot(&g, &vecmath::sub(&y, &x));
                assert!(fam.value(i, &y) >= lower - 1e-12);
            }
        }
    }
}
