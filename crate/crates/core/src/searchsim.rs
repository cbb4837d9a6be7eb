//! Dense state-vector simulator for the multi-round unstructured search
//! problem.
//!
//! An instance hides `K` items `a_1..a_K` in `[N]`, each guarding a `d`-bit
//! key: querying the oracle at the pair `(a_i, s_i)` reveals the next key
//! `s_{i+1}`, and every other input returns the zero string. States live on
//! the basis `|key> |item> |result>` with `2^d * N * 2^d` amplitudes; the
//! oracle XORs the search function into the result register, which makes it
//! a self-inverse basis permutation. The simulator stays dense by design —
//! desk-scale caps keep it affordable and the code auditable.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{purpose, StreamKey};

/// Default cap on the number of simulated amplitudes.
pub const DEFAULT_AMPLITUDE_CAP: usize = 1 << 20;

/// One multi-round search instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchInstance {
    n_items: usize,
    rounds: usize,
    key_bits: u32,
    items: Vec<usize>,
    keys: Vec<u64>,
    seed: u64,
}

impl SearchInstance {
    /// Draw a random instance: items uniform in `[N]`, keys distinct with
    /// `s_1 = 0`.
    pub fn random(n_items: usize, rounds: usize, key_bits: u32, seed: u64) -> Result<Self> {
        if n_items == 0 || rounds == 0 {
            return Err(Error::invalid("rounds", "need n_items >= 1 and rounds >= 1"));
        }
        if key_bits == 0 || key_bits > 30 {
            return Err(Error::invalid("key_bits", "need 1 <= key_bits <= 30"));
        }
        let space = 1u64 << key_bits;
        if rounds as u64 > space {
            return Err(Error::invalid(
                "rounds",
                format!("{rounds} distinct keys do not fit in {key_bits} bits"),
            ));
        }
        let mut rng = StreamKey::new(seed).child(purpose::INSTANCE).rng(0);
        let items: Vec<usize> = (0..rounds).map(|_| rng.random_range(0..n_items)).collect();
        // Distinct nonzero keys after the fixed all-zeros first key.
        let mut pool: Vec<u64> = (1..space).collect();
        pool.shuffle(&mut rng);
        let mut keys = vec![0u64];
        keys.extend_from_slice(&pool[..rounds - 1]);
        Ok(SearchInstance {
            n_items,
            rounds,
            key_bits,
            items,
            keys,
            seed,
        })
    }

    /// Fixed instance for tests. Keys must be pairwise distinct and start
    /// with the all-zeros string.
    pub fn with_layout(
        n_items: usize,
        key_bits: u32,
        items: Vec<usize>,
        keys: Vec<u64>,
    ) -> Result<Self> {
        if items.len() != keys.len() || items.is_empty() {
            return Err(Error::invalid("items", "items and keys must be equal-length and nonempty"));
        }
        if keys[0] != 0 {
            return Err(Error::invalid("keys", "first key must be the all-zeros string"));
        }
        let space = 1u64 << key_bits;
        for (i, &k) in keys.iter().enumerate() {
            if k >= space {
                return Err(Error::invalid("keys", format!("key {k} does not fit in {key_bits} bits")));
            }
            if keys[..i].contains(&k) {
                return Err(Error::invalid("keys", "keys must be pairwise distinct"));
            }
        }
        if let Some(&bad) = items.iter().find(|&&a| a >= n_items) {
            return Err(Error::invalid("items", format!("item {bad} out of range")));
        }
        let rounds = items.len();
        Ok(SearchInstance {
            n_items,
            rounds,
            key_bits,
            items,
            keys,
            seed: 0,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    /// Key-register dimension `2^d`.
    pub fn key_space(&self) -> usize {
        1usize << self.key_bits
    }

    /// Amplitudes needed to simulate this instance.
    pub fn amplitudes_needed(&self) -> usize {
        self.key_space() * self.n_items * self.key_space()
    }

    /// Full-scale bit requirement `d >= 10 K ln N` of the decay analysis;
    /// desk runs clip below it.
    pub fn key_bits_required(&self) -> f64 {
        10.0 * self.rounds as f64 * (self.n_items as f64).ln()
    }

    pub fn key_bits_clipped(&self) -> bool {
        (self.key_bits as f64) < self.key_bits_required()
    }
}

/// The search function: `s_{i+1}` on the pair `(a_i, s_i)` for `i < K`,
/// the zero string everywhere else (including the final pair, whose
/// successor is undefined).
pub fn f_search(item: usize, key: u64, instance: &SearchInstance) -> u64 {
    for i in 0..instance.rounds {
        if instance.items[i] == item && instance.keys[i] == key {
            return if i + 1 < instance.rounds {
                instance.keys[i + 1]
            } else {
                0
            };
        }
    }
    0
}

/// Register names of the simulator basis `|key>|item>|result>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Register {
    Key,
    Item,
    Result,
}

/// Adversary step descriptions accepted by [`apply_adversary_step`].
#[derive(Debug, Clone)]
pub enum AdversaryStep {
    /// Hadamard on every qubit of a register (register size must be a power
    /// of two).
    HadamardAll(Register),
    /// Inversion about the mean on the item register, restricted to branches
    /// whose key register holds `key_condition` (or everywhere when `None`).
    GroverDiffusion { key_condition: Option<u64> },
    /// XOR the result register into the key register.
    KeyCopy,
    /// Arbitrary unitary on one register, given as a dense row-major matrix.
    Custom { register: Register, matrix: Vec<Vec<Complex64>> },
}

/// Dense state over `|key>|item>|result>`.
#[derive(Debug, Clone)]
pub struct SearchState {
    amps: Vec<Complex64>,
    key_space: usize,
    n_items: usize,
}

impl SearchState {
    /// Basis state `|key>|item>|result>`.
    pub fn basis(instance: &SearchInstance, key: u64, item: usize, result: u64, cap: usize) -> Result<Self> {
        let mut state = Self::zeroed(instance, cap)?;
        let idx = state.index(key as usize, item, result as usize);
        state.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Key register in a basis state, item register uniform, result zero —
    /// the standard start of one search round.
    pub fn uniform_items(instance: &SearchInstance, key: u64, cap: usize) -> Result<Self> {
        let mut state = Self::zeroed(instance, cap)?;
        let amp = Complex64::new(1.0 / (instance.n_items as f64).sqrt(), 0.0);
        for item in 0..instance.n_items {
            let idx = state.index(key as usize, item, 0);
            state.amps[idx] = amp;
        }
        Ok(state)
    }

    fn zeroed(instance: &SearchInstance, cap: usize) -> Result<Self> {
        let required = instance.amplitudes_needed();
        if required > cap {
            return Err(Error::SimulatorTooLarge {
                required,
                bytes: required * std::mem::size_of::<Complex64>(),
                cap,
            });
        }
        Ok(SearchState {
            amps: vec![Complex64::new(0.0, 0.0); required],
            key_space: instance.key_space(),
            n_items: instance.n_items,
        })
    }

    #[inline]
    fn index(&self, key: usize, item: usize, result: usize) -> usize {
        (key * self.n_items + item) * self.key_space + result
    }

    pub fn amplitude(&self, key: u64, item: usize, result: u64) -> Complex64 {
        self.amps[self.index(key as usize, item, result as usize)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn register_layout(&self, register: Register) -> (usize, usize) {
        // (size, stride)
        match register {
            Register::Result => (self.key_space, 1),
            Register::Item => (self.n_items, self.key_space),
            Register::Key => (self.key_space, self.n_items * self.key_space),
        }
    }

    /// Apply a dense unitary across one register.
    fn apply_register_matrix(&mut self, register: Register, matrix: &[Vec<Complex64>]) {
        let (size, stride) = self.register_layout(register);
        let total = self.amps.len();
        let block = size * stride;
        let mut scratch = vec![Complex64::new(0.0, 0.0); size];
        for hi in (0..total).step_by(block) {
            for lo in 0..stride {
                for (c, slot) in scratch.iter_mut().enumerate() {
                    *slot = self.amps[hi + c * stride + lo];
                }
                for (rowi, row) in matrix.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, m) in row.iter().enumerate() {
                        acc += m * scratch[c];
                    }
                    self.amps[hi + rowi * stride + lo] = acc;
                }
            }
        }
    }

    /// Hadamard butterflies over every bit of a power-of-two register.
    fn apply_hadamard_all(&mut self, register: Register) -> Result<()> {
        let (size, stride) = self.register_layout(register);
        if !size.is_power_of_two() {
            return Err(Error::invalid(
                "register",
                format!("Hadamard-all needs a power-of-two register, size is {size}"),
            ));
        }
        let total = self.amps.len();
        let block = size * stride;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut bit = 1usize;
        while bit < size {
            let bit_stride = bit * stride;
            for hi in (0..total).step_by(block) {
                for c in 0..size {
                    if c & bit != 0 {
                        continue;
                    }
                    for lo in 0..stride {
                        let i0 = hi + c * stride + lo;
                        let i1 = i0 + bit_stride;
                        let a = self.amps[i0];
                        let b = self.amps[i1];
                        self.amps[i0] = (a + b) * inv_sqrt2;
                        self.amps[i1] = (a - b) * inv_sqrt2;
                    }
                }
            }
            bit <<= 1;
        }
        Ok(())
    }
}

/// Apply the search oracle `|s>|a>|r> -> |s>|a>|r xor F(a,s)>`.
///
/// Only the `K` informative pairs permute anything, so the pass touches
/// `K * 2^d` amplitudes. The map is an involution.
pub fn apply_search_oracle(state: &mut SearchState, instance: &SearchInstance) {
    for i in 0..instance.rounds {
        let value = f_search(instance.items[i], instance.keys[i], instance);
        if value == 0 {
            continue;
        }
        let key = instance.keys[i] as usize;
        let item = instance.items[i];
        let v = value as usize;
        for r in 0..state.key_space {
            let partner = r ^ v;
            if r < partner {
                let ia = state.index(key, item, r);
                let ib = state.index(key, item, partner);
                state.amps.swap(ia, ib);
            }
        }
    }
    debug_assert!((state.norm() - 1.0).abs() < 1e-10);
}

/// Apply one adversary step (a unitary independent of the search function).
pub fn apply_adversary_step(state: &mut SearchState, step: &AdversaryStep) -> Result<()> {
    match step {
        AdversaryStep::HadamardAll(register) => state.apply_hadamard_all(*register)?,
        AdversaryStep::GroverDiffusion { key_condition } => {
            grover_diffusion(state, *key_condition);
        }
        AdversaryStep::KeyCopy => key_copy(state),
        AdversaryStep::Custom { register, matrix } => {
            let (size, _) = state.register_layout(*register);
            check_unitary(matrix, size)?;
            state.apply_register_matrix(*register, matrix);
        }
    }
    debug_assert!((state.norm() - 1.0).abs() < 1e-10);
    Ok(())
}

/// Inversion about the mean on the item register, optionally only in the
/// branches whose key register equals `key_condition`.
fn grover_diffusion(state: &mut SearchState, key_condition: Option<u64>) {
    let n = state.n_items;
    let key_space = state.key_space;
    for key in 0..key_space {
        if let Some(cond) = key_condition {
            if key != cond as usize {
                continue;
            }
        }
        for result in 0..key_space {
            let mut mean = Complex64::new(0.0, 0.0);
            for item in 0..n {
                mean += state.amps[state.index(key, item, result)];
            }
            mean /= n as f64;
            for item in 0..n {
                let idx = state.index(key, item, result);
                state.amps[idx] = 2.0 * mean - state.amps[idx];
            }
        }
    }
}

/// XOR the result register into the key register: `|s>|a>|r> -> |s xor r>|a>|r>`.
fn key_copy(state: &mut SearchState) {
    let mut out = vec![Complex64::new(0.0, 0.0); state.amps.len()];
    for key in 0..state.key_space {
        for item in 0..state.n_items {
            for result in 0..state.key_space {
                let src = state.index(key, item, result);
                let dst = state.index(key ^ result, item, result);
                out[dst] = state.amps[src];
            }
        }
    }
    state.amps = out;
}

/// Phase flip on every basis state with a nonzero result register. Together
/// with two oracle calls this marks exactly the informative item branches.
fn phase_flip_result_nonzero(state: &mut SearchState) {
    let key_space = state.key_space;
    for (idx, amp) in state.amps.iter_mut().enumerate() {
        if idx % key_space != 0 {
            *amp = -*amp;
        }
    }
}

fn check_unitary(matrix: &[Vec<Complex64>], size: usize) -> Result<()> {
    if matrix.len() != size || matrix.iter().any(|row| row.len() != size) {
        return Err(Error::invalid(
            "matrix",
            format!("expected a {size}x{size} matrix"),
        ));
    }
    let mut deviation: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..size {
                acc += matrix[k][i].conj() * matrix[k][j];
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((acc - expected).norm());
        }
    }
    if deviation > 1e-8 {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: 1e-8,
        });
    }
    Ok(())
}

/// Norm of the projection of the state onto key-register value `s_k`
/// (`k` is 1-based), marginalized over the other registers.
pub fn key_overlap(state: &SearchState, k: usize, instance: &SearchInstance) -> f64 {
    assert!(k >= 1 && k <= instance.rounds, "round index out of range");
    let key = instance.keys[k - 1] as usize;
    let mut sum = 0.0;
    for item in 0..state.n_items {
        for result in 0..state.key_space {
            sum += state.amps[state.index(key, item, result)].norm_sqr();
        }
    }
    sum.sqrt()
}

/// Probability distribution of measuring the result register.
fn result_distribution(state: &SearchState) -> Vec<f64> {
    let mut probs = vec![0.0; state.key_space];
    for key in 0..state.key_space {
        for item in 0..state.n_items {
            for result in 0..state.key_space {
                probs[result] += state.amps[state.index(key, item, result)].norm_sqr();
            }
        }
    }
    probs
}

/// Charged oracle calls of the chained adversary: `2q + 1` per round (two
/// per Grover iteration plus one reveal) over `K - 1` rounds.
pub fn chained_grover_queries(rounds: usize, per_round_queries: usize) -> u64 {
    (rounds.saturating_sub(1) as u64) * (2 * per_round_queries as u64 + 1)
}

/// Success probability of the canonical chained adversary.
///
/// Per round the adversary holds a key (classically, via measure-and-feed-
/// forward), prepares a uniform item register, runs `per_round_queries`
/// Grover iterations whose marking is two oracle calls around a phase flip
/// on a nonzero result register, then queries once more and measures the
/// result register. Measured nonzero values become the next held key; the
/// branch tree is followed exactly, and the reported value is the total
/// probability of holding `s_K` after the last round.
pub fn run_chained_grover(
    instance: &SearchInstance,
    per_round_queries: usize,
    cap: usize,
) -> Result<f64> {
    // Validate the cap once even for the trivial single-round case.
    let _ = SearchState::zeroed(instance, cap)?;
    let goal = *instance.keys.last().expect("instance has at least one key");
    let mut branches: Vec<(f64, u64)> = vec![(1.0, instance.keys[0])];
    for _round in 1..instance.rounds {
        let mut next: Vec<(f64, u64)> = Vec::new();
        for &(prob, held) in &branches {
            if prob <= 1e-15 {
                continue;
            }
            let mut state = SearchState::uniform_items(instance, held, cap)?;
            for _ in 0..per_round_queries {
                apply_search_oracle(&mut state, instance);
                phase_flip_result_nonzero(&mut state);
                apply_search_oracle(&mut state, instance);
                apply_adversary_step(
                    &mut state,
                    &AdversaryStep::GroverDiffusion {
                        key_condition: Some(held),
                    },
                )?;
            }
            apply_search_oracle(&mut state, instance);
            for (value, p) in result_distribution(&state).into_iter().enumerate() {
                if p <= 1e-15 {
                    continue;
                }
                let new_held = if value == 0 { held } else { value as u64 };
                match next.iter_mut().find(|(_, h)| *h == new_held) {
                    Some(slot) => slot.0 += prob * p,
                    None => next.push((prob * p, new_held)),
                }
            }
        }
        branches = next;
    }
    Ok(branches
        .iter()
        .filter(|(_, held)| *held == goal)
        .map(|(p, _)| p)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_instance() -> SearchInstance {
        // N = 4, d = 2, two rounds: find a_1 = 2 at key 0, read s_2 = 3.
        SearchInstance::with_layout(4, 2, vec![2, 1], vec![0, 3]).unwrap()
    }

    #[test]
    fn f_search_table() {
        let inst = small_instance();
        assert_eq!(f_search(2, 0, &inst), 3); // first pair reveals s_2
        assert_eq!(f_search(1, 0, &inst), 0); // wrong item
        assert_eq!(f_search(1, 3, &inst), 0); // final pair has no successor
        assert_eq!(f_search(2, 3, &inst), 0); // key mismatch
    }

    #[test]
    fn oracle_moves_basis_states() {
        let inst = small_instance();
        let mut state = SearchState::basis(&inst, 0, 2, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        apply_search_oracle(&mut state, &inst);
        assert_eq!(state.amplitude(0, 2, 3), Complex64::new(1.0, 0.0));
        assert_eq!(state.amplitude(0, 2, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn oracle_is_an_involution() {
        let inst = small_instance();
        let mut state = SearchState::uniform_items(&inst, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        let before = state.amps.clone();
        apply_search_oracle(&mut state, &inst);
        apply_search_oracle(&mut state, &inst);
        for (a, b) in state.amps.iter().zip(&before) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn oracle_on_uniform_superposition_hand_weights() {
        // Uniform over items at key 0: only the a_1 branch gains result 3,
        // with amplitude 1/sqrt(N).
        let inst = small_instance();
        let mut state = SearchState::uniform_items(&inst, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        apply_search_oracle(&mut state, &inst);
        let half = Complex64::new(0.5, 0.0);
        assert!((state.amplitude(0, 2, 3) - half).norm() < 1e-12);
        assert!((state.amplitude(0, 1, 0) - half).norm() < 1e-12);
        assert_eq!(state.amplitude(0, 2, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn double_hadamard_is_identity() {
        let inst = small_instance();
        let mut state = SearchState::basis(&inst, 0, 1, 2, DEFAULT_AMPLITUDE_CAP).unwrap();
        let before = state.amps.clone();
        apply_adversary_step(&mut state, &AdversaryStep::HadamardAll(Register::Key)).unwrap();
        apply_adversary_step(&mut state, &AdversaryStep::HadamardAll(Register::Key)).unwrap();
        for (a, b) in state.amps.iter().zip(&before) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_custom_step_is_identity_and_nonunitary_rejected() {
        let inst = small_instance();
        let mut state = SearchState::uniform_items(&inst, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        let before = state.amps.clone();
        let eye: Vec<Vec<Complex64>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        apply_adversary_step(
            &mut state,
            &AdversaryStep::Custom { register: Register::Item, matrix: eye.clone() },
        )
        .unwrap();
        assert_eq!(state.amps, before);

        let mut broken = eye;
        broken[0][0] = Complex64::new(2.0, 0.0);
        let err = apply_adversary_step(
            &mut state,
            &AdversaryStep::Custom { register: Register::Item, matrix: broken },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotUnitary { .. }));
    }

    #[test]
    fn single_grover_iteration_on_four_items_is_exact() {
        // One mark-and-diffuse round at N = 4 concentrates everything on the
        // marked branch: the classic exact case.
        let inst = small_instance();
        let mut state = SearchState::uniform_items(&inst, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        apply_search_oracle(&mut state, &inst);
        phase_flip_result_nonzero(&mut state);
        apply_search_oracle(&mut state, &inst);
        apply_adversary_step(
            &mut state,
            &AdversaryStep::GroverDiffusion { key_condition: Some(0) },
        )
        .unwrap();
        assert!((state.amplitude(0, 2, 0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chained_success_exact_single_round() {
        let inst = small_instance();
        let success = run_chained_grover(&inst, 1, DEFAULT_AMPLITUDE_CAP).unwrap();
        assert!((success - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_iterations_leave_only_the_measurement_guess() {
        // Without Grover iterations the reveal query still lands on the
        // marked branch with probability 1/N.
        let inst = small_instance();
        let success = run_chained_grover(&inst, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        assert!((success - 0.25).abs() < 1e-12);
        assert!(success <= 0.25f64 + 0.25 + 1e-12);
    }

    #[test]
    fn chained_success_decays_with_rounds() {
        let mut prev = f64::INFINITY;
        for rounds in [1usize, 2, 3] {
            let inst = SearchInstance::random(8, rounds, 4, 5).unwrap();
            let success = run_chained_grover(&inst, 1, DEFAULT_AMPLITUDE_CAP).unwrap();
            assert!(
                success <= prev + 1e-12,
                "success not nonincreasing: {success} after {prev}"
            );
            prev = success;
        }
    }

    #[test]
    fn key_overlap_examples() {
        let inst = small_instance();
        let state = SearchState::basis(&inst, 0, 0, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        assert!((key_overlap(&state, 1, &inst) - 1.0).abs() < 1e-12);
        // s_2 = 3 is untouched by a zero-key basis state.
        assert_eq!(key_overlap(&state, 2, &inst), 0.0);

        let mut uniform = state.clone();
        apply_adversary_step(&mut uniform, &AdversaryStep::HadamardAll(Register::Key)).unwrap();
        let expected = 0.5; // 2^{-d/2} at d = 2
        assert!((key_overlap(&uniform, 2, &inst) - expected).abs() < 1e-12);
    }

    #[test]
    fn information_bound_for_product_states() {
        // With zero oracle applications, overlap with an unknown later key
        // never exceeds 2^{-d/2} for these product starts.
        for seed in 0..10u64 {
            let inst = SearchInstance::random(4, 3, 4, seed).unwrap();
            let bound = 0.25 + 1e-10; // 2^{-4/2}
            let basis = SearchState::basis(&inst, 0, 0, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
            let mut uniform = basis.clone();
            apply_adversary_step(&mut uniform, &AdversaryStep::HadamardAll(Register::Key)).unwrap();
            for k in 2..=3 {
                assert!(key_overlap(&basis, k, &inst) <= bound);
                assert!(key_overlap(&uniform, k, &inst) <= bound);
            }
        }
    }

    #[test]
    fn key_copy_moves_result_into_key() {
        let inst = small_instance();
        let mut state = SearchState::basis(&inst, 1, 0, 3, DEFAULT_AMPLITUDE_CAP).unwrap();
        apply_adversary_step(&mut state, &AdversaryStep::KeyCopy).unwrap();
        assert_eq!(state.amplitude(1 ^ 3, 0, 3), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn size_cap_is_enforced_with_estimate() {
        let inst = SearchInstance::random(8, 2, 4, 1).unwrap();
        let err = SearchState::basis(&inst, 0, 0, 0, 16).unwrap_err();
        match err {
            Error::SimulatorTooLarge { required, bytes, cap } => {
                assert_eq!(required, 16 * 8 * 16);
                assert_eq!(bytes, required * 16);
                assert_eq!(cap, 16);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn norms_survive_long_random_operation_sequences() {
        let inst = SearchInstance::random(4, 2, 3, 9).unwrap();
        let mut state = SearchState::uniform_items(&inst, 0, DEFAULT_AMPLITUDE_CAP).unwrap();
        let steps = [
            AdversaryStep::HadamardAll(Register::Key),
            AdversaryStep::HadamardAll(Register::Result),
            AdversaryStep::GroverDiffusion { key_condition: None },
            AdversaryStep::KeyCopy,
        ];
        let mut rng = StreamKey::new(4).rng(purpose::EXPERIMENT);
        for _ in 0..1000 {
            if rng.random_range(0.0..1.0) < 0.3 {
                apply_search_oracle(&mut state, &inst);
            } else {
                let step = &steps[rng.random_range(0..steps.len())];
                apply_adversary_step(&mut state, step).unwrap();
            }
            assert!((state.norm() - 1.0).abs() < 1e-10);
        }
    }
}
