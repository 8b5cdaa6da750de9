//! Collective neutrino Hamiltonian, exact evolution and exact observables.
//!
//! Units: the evolution Hamiltonian is dimensionless, energies in units of
//! the self-interaction scale η and times in units of 1/η.
//!
//! Encoding: flavour e is |0⟩ and μ is |1⟩. Neutrino `k` (0-based, the `k`-th
//! character of a flavour string) lives on qubit `n - 1 - k`, so a flavour
//! string prints as the bitstring of its basis state: "eμ" is |01⟩.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c64, eig_hermitian, pauli, DenseMatrix, Eigen, Hermitian, Unitary, C64, I};
use crate::qsim::{format_bitstring, StateVector};

/// Largest neutrino count the exact oracle accepts.
pub const MAX_NEUTRINOS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavour {
    E,
    Mu,
}

impl Flavour {
    pub fn bit(self) -> usize {
        match self {
            Flavour::E => 0,
            Flavour::Mu => 1,
        }
    }
}

/// Initial flavour of every neutrino, in neutrino order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlavourString(Vec<Flavour>);

impl FlavourString {
    pub fn new(flavours: Vec<Flavour>) -> Self {
        Self(flavours)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flavours(&self) -> &[Flavour] {
        &self.0
    }

    /// Basis index of the product state.
    pub fn basis_index(&self) -> usize {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (k, f)| acc | (f.bit() << (n - 1 - k)))
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    /// The default string for `n` neutrinos: all e except a final μ.
    pub fn default_for(n: usize) -> Self {
        let mut v = vec![Flavour::E; n];
        if n >= 2 {
            v[n - 1] = Flavour::Mu;
        }
        Self(v)
    }
}

impl FromStr for FlavourString {
    type Err = Error;

    /// Accepts `e` for electron and `m`, `μ` or `u` for muon flavour.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                'e' | 'E' => Ok(Flavour::E),
                'm' | 'M' | 'μ' | 'u' => Ok(Flavour::Mu),
                other => Err(Error::InvalidParams(format!(
                    "unknown flavour {other:?} in {s:?}; use e or μ (m)"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for FlavourString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fl in &self.0 {
            f.write_str(match fl {
                Flavour::E => "e",
                Flavour::Mu => "μ",
            })?;
        }
        Ok(())
    }
}

/// Pairwise propagation angles θ^{pq}, keyed by 0-based `(p, q)` with `p < q`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairAngles(BTreeMap<(usize, usize), f64>);

impl PairAngles {
    pub fn new() -> Self {
        Self::default()
    }

    /// Same angle for every pair of `n` neutrinos.
    pub fn uniform(n: usize, theta: f64) -> Self {
        let mut a = Self::new();
        for (p, q) in pairs(n) {
            a.set(p, q, theta);
        }
        a
    }

    /// Stores θ^{pq}; order of `p` and `q` is irrelevant.
    pub fn set(&mut self, p: usize, q: usize, theta: f64) {
        self.0.insert((p.min(q), p.max(q)), theta);
    }

    pub fn get(&self, p: usize, q: usize) -> Option<f64> {
        self.0.get(&(p.min(q), p.max(q))).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }
}

/// Lexicographic pairs `(p, q)`, `p < q < n`.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeutrinoParams {
    pub n: usize,
    /// Vacuum mixing angle, radians.
    pub theta_nu: f64,
    pub coupling_angles: PairAngles,
    /// Mass-squared difference, eV².
    pub delta_m2: f64,
    /// Neutrino energy, GeV.
    pub energy: f64,
    /// Charged-current potential in units of η.
    pub v_cc: f64,
    pub initial_flavours: FlavourString,
}

impl NeutrinoParams {
    /// Two neutrinos, θ_ν = 0.195, θ¹² = π/6, initial state eμ.
    pub fn two_neutrino() -> Self {
        let mut angles = PairAngles::new();
        angles.set(0, 1, std::f64::consts::FRAC_PI_6);
        Self {
            n: 2,
            theta_nu: 0.195,
            coupling_angles: angles,
            delta_m2: 2e-4,
            energy: 0.005,
            v_cc: 0.0,
            initial_flavours: FlavourString::default_for(2),
        }
    }

    /// Three neutrinos, θ¹² = 0, θ¹³ = θ²³ = π/6, initial state eeμ.
    pub fn three_neutrino() -> Self {
        let mut angles = PairAngles::new();
        angles.set(0, 1, 0.0);
        angles.set(0, 2, std::f64::consts::FRAC_PI_6);
        angles.set(1, 2, std::f64::consts::FRAC_PI_6);
        Self {
            n: 3,
            theta_nu: 0.195,
            coupling_angles: angles,
            delta_m2: 2e-4,
            energy: 0.005,
            v_cc: 0.0,
            initial_flavours: FlavourString::default_for(3),
        }
    }

    /// Single neutrino in vacuum, θ_ν = 0.295.
    pub fn vacuum() -> Self {
        Self {
            n: 1,
            theta_nu: 0.295,
            coupling_angles: PairAngles::new(),
            delta_m2: 2e-4,
            energy: 0.005,
            v_cc: 0.0,
            initial_flavours: FlavourString::default_for(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.n > MAX_NEUTRINOS {
            return Err(Error::TooManyQubits {
                num_qubits: self.n,
                cap: MAX_NEUTRINOS,
            });
        }
        if !self.theta_nu.is_finite() {
            return bad("theta_nu must be finite".into());
        }
        if !(self.delta_m2 > 0.0 && self.delta_m2.is_finite()) {
            return bad(format!("delta_m2 must be positive, got {}", self.delta_m2));
        }
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return bad(format!("energy must be positive, got {}", self.energy));
        }
        if !self.v_cc.is_finite() {
            return bad("v_cc must be finite".into());
        }
        if self.initial_flavours.len() != self.n {
            return bad(format!(
                "initial flavour string {} has {} entries for n = {}",
                self.initial_flavours,
                self.initial_flavours.len(),
                self.n
            ));
        }
        for ((p, q), theta) in self.coupling_angles.iter() {
            if q >= self.n {
                return bad(format!("pair angle ({}, {}) names a neutrino beyond n = {}", p + 1, q + 1, self.n));
            }
            if !theta.is_finite() {
                return bad(format!("pair angle ({}, {}) is not finite", p + 1, q + 1));
            }
        }
        for (p, q) in pairs(self.n) {
            if self.coupling_angles.get(p, q).is_none() {
                return bad(format!("missing pair angle for ({}, {})", p + 1, q + 1));
            }
        }
        Ok(())
    }

    /// Qubit carrying neutrino `k`.
    pub fn qubit_of(&self, k: usize) -> usize {
        self.n - 1 - k
    }
}

/// Vacuum field vector `(sin 2θ, 0, -cos 2θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BField {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl BField {
    pub fn as_array(&self) -> [f64; 3] {
        [self.bx, self.by, self.bz]
    }
}

pub fn b_vector(theta_nu: f64) -> BField {
    let (s, c) = (2.0 * theta_nu).sin_cos();
    BField { bx: s, by: 0.0, bz: -c }
}

/// Single-body field `b + (0, 0, v_cc/2)`.
pub fn single_body_field(params: &NeutrinoParams) -> [f64; 3] {
    let b = b_vector(params.theta_nu);
    [b.bx, b.by, b.bz + params.v_cc / 2.0]
}

/// `J^{pq} = 1 - cos θ^{pq}` with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    j: Vec<f64>,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.j[p * self.n + q]
    }
}

pub fn coupling_matrix(params: &NeutrinoParams) -> Result<CouplingMatrix> {
    params.validate()?;
    let n = params.n;
    let mut j = vec![0.0; n * n];
    for (p, q) in pairs(n) {
        let theta = params.coupling_angles.get(p, q).expect("validated");
        let v = 1.0 - theta.cos();
        j[p * n + q] = v;
        j[q * n + p] = v;
    }
    Ok(CouplingMatrix { n, j })
}

/// Adds `coeff · P` for the Pauli string `P = ⊗ σ_axis` on the listed qubits
/// (axis 1 = x, 2 = y, 3 = z).
fn add_pauli_string(m: &mut DenseMatrix, coeff: f64, factors: &[(usize, usize)]) {
    let dim = m.rows();
    let flip: usize = factors
        .iter()
        .filter(|(_, a)| *a == 1 || *a == 2)
        .map(|(q, _)| 1usize << q)
        .sum();
    for col in 0..dim {
        let mut v = c64(coeff, 0.0);
        for &(q, axis) in factors {
            let bit = (col >> q) & 1;
            match axis {
                2 => v *= if bit == 0 { I } else { -I },
                3 if bit == 1 => v = -v,
                _ => {}
            }
        }
        let row = col ^ flip;
        m.set(row, col, m.get(row, col) + v);
    }
}

fn add_field(m: &mut DenseMatrix, field: [f64; 3], scale: f64, qubit: usize) {
    for (axis, &f) in field.iter().enumerate() {
        if f != 0.0 {
            add_pauli_string(m, scale * f, &[(qubit, axis + 1)]);
        }
    }
}

fn add_exchange(m: &mut DenseMatrix, j: f64, qa: usize, qb: usize) {
    if j != 0.0 {
        for axis in 1..=3 {
            add_pauli_string(m, j, &[(qa, axis), (qb, axis)]);
        }
    }
}

fn hermitian(m: DenseMatrix) -> Result<Hermitian> {
    Hermitian::new(m)
}

/// `Σ_k f·σ_k + Σ_{p<q} J^{pq} σ_p·σ_q` with `f = b + (0, 0, v_cc/2)`.
pub fn hamiltonian_summed(params: &NeutrinoParams) -> Result<Hermitian> {
    let j = coupling_matrix(params)?;
    let n = params.n;
    let field = single_body_field(params);
    let mut m = DenseMatrix::zeros(1 << n, 1 << n);
    for k in 0..n {
        add_field(&mut m, field, 1.0, params.qubit_of(k));
    }
    for (p, q) in pairs(n) {
        add_exchange(&mut m, j.get(p, q), params.qubit_of(p), params.qubit_of(q));
    }
    hermitian(m)
}

/// `Σ_{p<q} [f·(σ_p + σ_q)/(N-1) + J^{pq} σ_p·σ_q]`; for one neutrino the
/// pair sum is empty and the result is `f·σ`.
pub fn hamiltonian_reduced(params: &NeutrinoParams) -> Result<Hermitian> {
    params.validate()?;
    if params.n == 1 {
        return hamiltonian_summed(params);
    }
    let mut m = DenseMatrix::zeros(1 << params.n, 1 << params.n);
    for (p, q) in pairs(params.n) {
        let (h1, h2) = pair_terms(params, p, q)?;
        m = m.add(h1.matrix()).add(h2.matrix());
    }
    hermitian(m)
}

/// Single-body part `f·(σ_p + σ_q)/(N-1)` and interaction part
/// `J^{pq} σ_p·σ_q` of pair `(p, q)`, as full-register matrices.
pub fn pair_terms(params: &NeutrinoParams, p: usize, q: usize) -> Result<(Hermitian, Hermitian)> {
    let j = coupling_matrix(params)?;
    let n = params.n;
    if p == q || p >= n || q >= n {
        return Err(Error::InvalidParams(format!(
            "({}, {}) is not a pair of {n} neutrinos",
            p + 1,
            q + 1
        )));
    }
    let field = single_body_field(params);
    let scale = 1.0 / (n - 1) as f64;
    let dim = 1 << n;
    let mut h1 = DenseMatrix::zeros(dim, dim);
    add_field(&mut h1, field, scale, params.qubit_of(p));
    add_field(&mut h1, field, scale, params.qubit_of(q));
    let mut h2 = DenseMatrix::zeros(dim, dim);
    add_exchange(&mut h2, j.get(p, q), params.qubit_of(p), params.qubit_of(q));
    Ok((hermitian(h1)?, hermitian(h2)?))
}

pub fn initial_state(params: &NeutrinoParams) -> Result<StateVector> {
    params.validate()?;
    StateVector::basis(params.n, params.initial_flavours.basis_index())
}

/// Basis index of the flavour-inverted state: the reversed flavour string.
pub fn inversion_target(params: &NeutrinoParams) -> Result<usize> {
    params.validate()?;
    let init = &params.initial_flavours;
    let reversed = init.reversed();
    if reversed == *init {
        let reason = if init.flavours().windows(2).all(|w| w[0] == w[1]) {
            "all neutrinos share one flavour"
        } else {
            "the flavour string is a palindrome"
        };
        return Err(Error::InvalidParams(format!(
            "inversion of {init} is undefined: {reason}"
        )));
    }
    Ok(reversed.basis_index())
}

/// Printed bitstring of [`inversion_target`].
pub fn inversion_target_bits(params: &NeutrinoParams) -> Result<String> {
    Ok(format_bitstring(inversion_target(params)?, params.n))
}

/// Diagonalized Hamiltonian, reusable across many times.
#[derive(Clone, Debug)]
pub struct ExactEvolver {
    params: NeutrinoParams,
    eigen: Eigen,
    initial: StateVector,
}

impl ExactEvolver {
    pub fn new(params: &NeutrinoParams) -> Result<Self> {
        let h = hamiltonian_summed(params)?;
        Ok(Self {
            params: params.clone(),
            eigen: eig_hermitian(&h)?,
            initial: initial_state(params)?,
        })
    }

    pub fn params(&self) -> &NeutrinoParams {
        &self.params
    }

    pub fn propagator(&self, t: f64) -> Unitary {
        self.eigen.propagator(t)
    }

    /// `exp(-iHt)|ψ₀⟩`; exactly `|ψ₀⟩` at `t = 0`.
    pub fn state(&self, t: f64) -> Result<StateVector> {
        if t == 0.0 {
            return Ok(self.initial.clone());
        }
        StateVector::from_amplitudes(self.eigen.evolve(self.initial.amps(), t))
    }

    pub fn inversion_probability(&self, t: f64) -> Result<f64> {
        let target = inversion_target(&self.params)?;
        Ok(self.state(t)?.amps()[target].norm_sqr().min(1.0))
    }
}

pub fn evolve_exact(params: &NeutrinoParams, t: f64) -> Result<StateVector> {
    ExactEvolver::new(params)?.state(t)
}

pub fn inversion_probability_exact(params: &NeutrinoParams, t: f64) -> Result<f64> {
    ExactEvolver::new(params)?.inversion_probability(t)
}

/// `|⟨ψ|σ_y⊗σ_y|ψ*⟩|` for a two-qubit pure state.
pub fn concurrence_exact(state: &StateVector) -> Result<f64> {
    if state.num_qubits() != 2 {
        return Err(Error::Unsupported(format!(
            "concurrence is implemented for 2 qubits, got {}",
            state.num_qubits()
        )));
    }
    let yy = crate::linalg::kron(&pauli::y(), &pauli::y());
    let conj: Vec<C64> = state.amps().iter().map(|z| z.conj()).collect();
    let tilde = yy.apply(&conj);
    let overlap: C64 = state.amps().iter().zip(&tilde).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm().min(1.0))
}

/// `sin²(2θ)·sin²(1.27·Δm²[eV²]·L[km]/E[GeV])`.
pub fn vacuum_disappearance(theta: f64, dm2: f64, length_km: f64, energy_gev: f64) -> Result<f64> {
    if !(energy_gev > 0.0) {
        return Err(Error::InvalidParams(format!("energy must be positive, got {energy_gev}")));
    }
    let phase = 1.27 * dm2 * length_km / energy_gev;
    Ok(((2.0 * theta).sin().powi(2) * phase.sin().powi(2)).clamp(0.0, 1.0))
}

/// Baseline in km at which the vacuum phase `1.27·Δm²·L/E` equals `phase`.
pub fn baseline_for_phase(phase: f64, dm2: f64, energy_gev: f64) -> f64 {
    phase * energy_gev / (1.27 * dm2)
}

/// Period `π/(2J¹²)` of the two-neutrino flavour swap.
pub fn swap_period(params: &NeutrinoParams) -> Result<f64> {
    if params.n != 2 {
        return Err(Error::Unsupported("swap period is defined for n = 2".into()));
    }
    let j = coupling_matrix(params)?.get(0, 1);
    if j <= 0.0 {
        return Err(Error::InvalidParams("swap period needs J¹² > 0".into()));
    }
    Ok(std::f64::consts::PI / (2.0 * j))
}
