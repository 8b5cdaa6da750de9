//! Shot sampling, readout flips and Monte-Carlo Pauli noise.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded through
//! `SeedableRng::seed_from_u64`. ChaCha is a counter-based stream cipher with
//! a fixed, platform-independent output, so a given seed reproduces the same
//! histogram on every machine.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

use super::bits::{format_bitstring, parse_bitstring};
use super::circuit::Circuit;
use super::state::StateVector;

/// Depolarizing and readout error rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub p_depol_1q: f64,
    pub p_depol_2q: f64,
    pub p_readout_flip: f64,
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel {
        p_depol_1q: 0.0,
        p_depol_2q: 0.0,
        p_readout_flip: 0.0,
    };

    pub fn new(p_depol_1q: f64, p_depol_2q: f64, p_readout_flip: f64) -> Result<Self> {
        let model = Self {
            p_depol_1q,
            p_depol_2q,
            p_readout_flip,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_depol_1q", self.p_depol_1q),
            ("p_depol_2q", self.p_depol_2q),
            ("p_readout_flip", self.p_readout_flip),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.p_depol_1q > 0.0 || self.p_depol_2q > 0.0
    }

    /// Error rate for a gate of the given arity; multi-qubit gates share the
    /// two-qubit rate.
    fn gate_rate(&self, arity: usize) -> f64 {
        if arity == 1 {
            self.p_depol_1q
        } else {
            self.p_depol_2q
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::NONE
    }
}

/// Measurement histogram keyed by printed bitstring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    num_qubits: usize,
    shots: u64,
    seed: u64,
    histogram: BTreeMap<String, u64>,
}

impl Counts {
    /// Builds counts from a histogram; `shots` is the sum of the values.
    pub fn from_histogram(
        num_qubits: usize,
        seed: u64,
        histogram: BTreeMap<String, u64>,
    ) -> Result<Self> {
        for key in histogram.keys() {
            parse_bitstring(key, num_qubits).map_err(|e| Error::Counts(e.to_string()))?;
        }
        let shots = histogram.values().sum();
        Ok(Self {
            num_qubits,
            shots,
            seed,
            histogram,
        })
    }

    fn from_tally(num_qubits: usize, seed: u64, tally: &[u64]) -> Self {
        let histogram: BTreeMap<String, u64> = tally
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (format_bitstring(k, num_qubits), c))
            .collect();
        Self {
            num_qubits,
            shots: tally.iter().sum(),
            seed,
            histogram,
        }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    pub fn shots(&self) -> u64 {
        self.shots
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn histogram(&self) -> &BTreeMap<String, u64> {
        &self.histogram
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.histogram.get(bits).copied().unwrap_or(0)
    }

    /// Empirical frequency of `bits`; zero when there are no shots.
    pub fn frequency(&self, bits: &str) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.get(bits) as f64 / self.shots as f64
        }
    }

    /// Histogram over a subset of qubits. `qubits[i]` becomes qubit `i` of
    /// the result.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Counts> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        let mut tally = vec![0u64; 1usize << qubits.len()];
        for (key, &c) in &self.histogram {
            let full = parse_bitstring(key, self.num_qubits)?;
            let local = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &q)| acc | (((full >> q) & 1) << i));
            tally[local] += c;
        }
        Ok(Counts::from_tally(qubits.len(), self.seed, &tally))
    }

    /// Adds another histogram over the same register. Associative and
    /// commutative; the seed of `self` is kept.
    pub fn merge(&mut self, other: &Counts) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::Counts(format!(
                "cannot merge {}-qubit counts into {}-qubit counts",
                other.num_qubits, self.num_qubits
            )));
        }
        for (k, &c) in &other.histogram {
            *self.histogram.entry(k.clone()).or_insert(0) += c;
        }
        self.shots += other.shots;
        Ok(())
    }
}

/// SplitMix64 mix of `(seed, stream)`; used to give every grid point or
/// worker its own independent generator.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Amplitudes of cached ideal prefix states allowed per noisy run.
const PREFIX_BUDGET: usize = 1 << 20;

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverse-CDF sampler over basis states.
struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn new(state: &StateVector) -> Self {
        let mut acc = 0.0;
        let cdf = state
            .amps()
            .iter()
            .map(|z| {
                acc += z.norm_sqr();
                acc
            })
            .collect();
        Self { cdf }
    }

    fn sample(&self, u: f64) -> usize {
        let total = *self.cdf.last().expect("non-empty state");
        let x = u * total;
        self.cdf.partition_point(|&c| c <= x).min(self.cdf.len() - 1)
    }
}

fn flip_readout(outcome: usize, num_qubits: usize, p: f64, rng: &mut ChaCha8Rng) -> usize {
    if p <= 0.0 {
        return outcome;
    }
    let mut out = outcome;
    for q in 0..num_qubits {
        if rng.random::<f64>() < p {
            out ^= 1 << q;
        }
    }
    out
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::Counts("shots must be at least 1".into()));
    }
    Ok(())
}

/// Draws `shots` i.i.d. measurements of every qubit from `|amps|²`, with
/// optional independent readout flips.
pub fn sample_counts(
    state: &StateVector,
    shots: u64,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<Counts> {
    check_shots(shots)?;
    let p_flip = match noise {
        Some(n) => {
            n.validate()?;
            n.p_readout_flip
        }
        None => 0.0,
    };
    let n = state.num_qubits();
    let sampler = Sampler::new(state);
    let mut rng = rng_for(seed);
    let mut tally = vec![0u64; state.dim()];
    for _ in 0..shots {
        let outcome = sampler.sample(rng.random());
        tally[flip_readout(outcome, n, p_flip, &mut rng)] += 1;
    }
    Ok(Counts::from_tally(n, seed, &tally))
}

/// Quantum-trajectory noisy execution.
///
/// For each shot, every gate independently suffers an error with probability
/// `p_depol_1q` (one-qubit gates) or `p_depol_2q` (gates on two or more
/// qubits); an error applies a uniformly random non-identity Pauli string to
/// the touched qubits right after the gate. The final state is measured once
/// and each bit is flipped with `p_readout_flip`. Shots with no gate error
/// reuse the noiseless final state.
///
/// With all rates zero the random stream is consumed exactly as in
/// [`sample_counts`], so both return identical counts for the same seed.
pub fn run_noisy(
    circuit: &Circuit,
    initial: &StateVector,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Counts> {
    check_shots(shots)?;
    noise.validate()?;
    let n = circuit.num_qubits();
    let ops = circuit.ops();
    // prefix[i] is the ideal state before op i, kept while it fits the budget
    let keep_prefix = (ops.len() + 1) * initial.dim() <= PREFIX_BUDGET;
    let mut prefix = Vec::new();
    if initial.num_qubits() != n {
        return Err(Error::Dimension(format!(
            "{n}-qubit circuit on a {}-qubit state",
            initial.num_qubits()
        )));
    }
    let mut ideal = initial.clone();
    for op in ops {
        if keep_prefix {
            prefix.push(ideal.clone());
        }
        ideal.apply(op)?;
    }
    let ideal_sampler = Sampler::new(&ideal);
    let matrices: Vec<DenseMatrix> = ops.iter().map(|op| op.matrix()).collect();
    let mut rng = rng_for(seed);
    let mut tally = vec![0u64; ideal.dim()];
    let mut errors: Vec<(usize, usize)> = Vec::new();

    for _ in 0..shots {
        errors.clear();
        if noise.has_gate_noise() {
            for (i, op) in ops.iter().enumerate() {
                let p = noise.gate_rate(op.arity());
                if p > 0.0 && rng.random::<f64>() < p {
                    let strings = 1usize << (2 * op.arity());
                    errors.push((i, rng.random_range(1..strings)));
                }
            }
        }
        let outcome = if errors.is_empty() {
            ideal_sampler.sample(rng.random())
        } else {
            let first = errors[0].0;
            let (mut state, start) = if keep_prefix {
                (prefix[first].clone(), first)
            } else {
                (initial.clone(), 0)
            };
            let mut pending = errors.iter().peekable();
            for (i, op) in ops.iter().enumerate().skip(start) {
                state.apply_validated(op, Some(&matrices[i]));
                while let Some(&&(at, string)) = pending.peek() {
                    if at != i {
                        break;
                    }
                    for (j, &q) in op.targets().iter().enumerate() {
                        state.apply_pauli(q, (string >> (2 * j)) & 3);
                    }
                    pending.next();
                }
            }
            Sampler::new(&state).sample(rng.random())
        };
        tally[flip_readout(outcome, n, noise.p_readout_flip, &mut rng)] += 1;
    }
    Ok(Counts::from_tally(n, seed, &tally))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::circuit::run_statevector;
    use crate::qsim::gate::GateOp;
    use crate::qsim::state::init_basis_state;

    fn bell_circuit() -> Circuit {
        let mut c = Circuit::new(2, "bell");
        c.push(GateOp::h(1)).unwrap();
        c.push(GateOp::cnot(1, 0)).unwrap();
        c
    }

    fn within_sigmas(freq: f64, p: f64, shots: u64, k: f64) -> bool {
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        (freq - p).abs() <= k * sigma
    }

    #[test]
    fn basis_state_always_measures_itself() {
        let c = sample_counts(&init_basis_state(1, "0").unwrap(), 100, 42, None).unwrap();
        assert_eq!(c.get("0"), 100);
        assert_eq!(c.histogram().len(), 1);
        assert_eq!(c.shots(), 100);
    }

    #[test]
    fn bell_counts_are_binomial() {
        let bell = run_statevector(&bell_circuit(), &init_basis_state(2, "00").unwrap()).unwrap();
        let c = sample_counts(&bell, 4096, 7, None).unwrap();
        assert!(within_sigmas(c.frequency("00"), 0.5, 4096, 4.0));
        assert_eq!(c.get("00") + c.get("11"), 4096);
    }

    #[test]
    fn readout_flip_rate() {
        let noise = NoiseModel::new(0.0, 0.0, 0.1).unwrap();
        let c = sample_counts(&init_basis_state(1, "0").unwrap(), 10_000, 1, Some(&noise)).unwrap();
        assert!(within_sigmas(c.frequency("1"), 0.1, 10_000, 4.0));
    }

    #[test]
    fn zero_shots_rejected() {
        let s = init_basis_state(1, "0").unwrap();
        assert!(sample_counts(&s, 0, 1, None).is_err());
        assert!(run_noisy(&Circuit::new(1, "e"), &s, 0, &NoiseModel::NONE, 1).is_err());
    }

    #[test]
    fn noise_rates_validated() {
        assert!(NoiseModel::new(-0.1, 0.0, 0.0).is_err());
        assert!(NoiseModel::new(0.0, 1.5, 0.0).is_err());
        assert!(NoiseModel::new(0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn noiseless_run_matches_sample_counts() {
        let init = init_basis_state(2, "00").unwrap();
        let bell = run_statevector(&bell_circuit(), &init).unwrap();
        let a = run_noisy(&bell_circuit(), &init, 2000, &NoiseModel::NONE, 99).unwrap();
        let b = sample_counts(&bell, 2000, 99, Some(&NoiseModel::NONE)).unwrap();
        assert_eq!(a, b);
        let c = sample_counts(&bell, 2000, 99, None).unwrap();
        assert_eq!(a, c);
        // readout-only noise also shares the stream
        let ro = NoiseModel::new(0.0, 0.0, 0.05).unwrap();
        assert_eq!(
            run_noisy(&bell_circuit(), &init, 2000, &ro, 3).unwrap(),
            sample_counts(&bell, 2000, 3, Some(&ro)).unwrap()
        );
    }

    #[test]
    fn full_two_qubit_depolarizing_distribution() {
        let noise = NoiseModel::new(0.0, 1.0, 0.0).unwrap();
        let shots = 40_000;
        let c = run_noisy(&bell_circuit(), &init_basis_state(2, "00").unwrap(), shots, &noise, 5)
            .unwrap();
        // Of the 15 non-identity Pauli pairs, 8 flip exactly one qubit of the
        // Bell state (|01⟩, |10⟩ each 4/15); the other 7 keep it in span{|00⟩, |11⟩}.
        for (bits, p) in [("00", 7.0 / 30.0), ("11", 7.0 / 30.0), ("01", 4.0 / 15.0), ("10", 4.0 / 15.0)] {
            assert!(
                within_sigmas(c.frequency(bits), p, shots, 4.0),
                "{bits}: {}",
                c.frequency(bits)
            );
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let noise = NoiseModel::new(0.01, 0.05, 0.02).unwrap();
        let init = init_basis_state(2, "00").unwrap();
        let a = run_noisy(&bell_circuit(), &init, 3000, &noise, 11).unwrap();
        let b = run_noisy(&bell_circuit(), &init, 3000, &noise, 11).unwrap();
        assert_eq!(a, b);
        let c = run_noisy(&bell_circuit(), &init, 3000, &noise, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn marginal_and_merge() {
        let mut h = BTreeMap::new();
        h.insert("01".to_string(), 3);
        h.insert("11".to_string(), 5);
        h.insert("10".to_string(), 2);
        let c = Counts::from_histogram(2, 0, h).unwrap();
        let q0 = c.marginal(&[0]).unwrap();
        assert_eq!((q0.get("0"), q0.get("1")), (2, 8));
        let q1 = c.marginal(&[1]).unwrap();
        assert_eq!((q1.get("0"), q1.get("1")), (3, 7));
        assert!(c.marginal(&[2]).is_err());

        let mut m = q0.clone();
        m.merge(&q1).unwrap();
        assert_eq!(m.shots(), 20);
        assert_eq!(m.get("1"), 15);
        assert!(m.merge(&c).is_err());
    }

    #[test]
    fn merge_is_associative() {
        let s = init_basis_state(2, "00").unwrap();
        let bell = run_statevector(&bell_circuit(), &s).unwrap();
        let parts: Vec<Counts> = (0..3).map(|k| sample_counts(&bell, 500, derive_seed(1, k), None).unwrap()).collect();
        let mut left = parts[0].clone();
        left.merge(&parts[1]).unwrap();
        left.merge(&parts[2]).unwrap();
        let mut right_tail = parts[1].clone();
        right_tail.merge(&parts[2]).unwrap();
        let mut right = parts[0].clone();
        right.merge(&right_tail).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn histogram_keys_validated() {
        let mut h = BTreeMap::new();
        h.insert("012".to_string(), 1);
        assert!(Counts::from_histogram(3, 0, h).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|k| derive_seed(7, k)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
