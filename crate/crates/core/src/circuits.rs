//! Experiment-level circuits and estimators.

use crate::decomp::{
    bfield_rotation_circuit, conjugate_circuit, field_rotation_circuit, spin_flip_circuit,
    xyz_propagator_circuit, XYZCoefficients,
};
use crate::error::{Error, Result};
use crate::neutrino::{coupling_matrix, pairs, single_body_field, Flavour, NeutrinoParams};
use crate::qsim::{Circuit, Counts, GateOp, StateVector};

/// One-qubit vacuum oscillation: `Ry(-2θ)`, `Phase(phase)`, `Ry(2θ)`.
///
/// From |0⟩ the final `P(1)` is `sin²(2θ)·sin²(phase/2)`.
pub fn vacuum_circuit(theta: f64, phase: f64) -> Result<Circuit> {
    let mut c = Circuit::new(1, "vacuum");
    c.push(GateOp::ry(-2.0 * theta, 0))?;
    c.push(GateOp::phase(phase, 0))?;
    c.push(GateOp::ry(2.0 * theta, 0))?;
    Ok(c)
}

/// Order in which pair propagators are applied inside one Trotter step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum PairOrder {
    /// (1,2), (1,3), .., (2,3), ..
    #[default]
    Lexicographic,
    Reversed,
    /// Explicit 0-based pairs; must list every pair exactly once.
    Custom(Vec<(usize, usize)>),
}

impl PairOrder {
    pub fn pairs(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        let lex = pairs(n);
        match self {
            PairOrder::Lexicographic => Ok(lex),
            PairOrder::Reversed => Ok(lex.into_iter().rev().collect()),
            PairOrder::Custom(list) => {
                let mut norm: Vec<(usize, usize)> =
                    list.iter().map(|&(p, q)| (p.min(q), p.max(q))).collect();
                norm.sort_unstable();
                if norm != lex {
                    return Err(Error::InvalidParams(format!(
                        "pair order {list:?} does not list every pair of {n} neutrinos once"
                    )));
                }
                Ok(list.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolutionOptions {
    pub trotter_steps: usize,
    pub pair_order: PairOrder,
    /// Route non-adjacent pairs next to each other with SWAPs and back.
    pub hardware_swaps: bool,
}

impl EvolutionOptions {
    pub fn new(trotter_steps: usize) -> Self {
        Self {
            trotter_steps,
            pair_order: PairOrder::Lexicographic,
            hardware_swaps: false,
        }
    }
}

/// Default Trotter steps: 1 for two neutrinos (the split is exact), 32 otherwise.
pub fn default_trotter_steps(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        32
    }
}

/// Single-step pair block on qubits `(qa, qb)`: field rotations on both, then
/// the exchange propagator.
fn pair_block(
    c: &mut Circuit,
    params: &NeutrinoParams,
    j: f64,
    alpha: f64,
    dt: f64,
    qa: usize,
    qb: usize,
) -> Result<()> {
    for q in [qa, qb] {
        let rot = if params.v_cc == 0.0 {
            bfield_rotation_circuit(params.theta_nu, alpha, q)?
        } else {
            field_rotation_circuit(single_body_field(params), alpha, q)?
        };
        c.append(&rot)?;
    }
    c.append(&xyz_propagator_circuit(XYZCoefficients::isotropic(j * dt)?, qa, qb)?)
}

/// Adjacent SWAPs moving qubit `from` next to `anchor`; returns the swaps and
/// the qubit `from` ends on.
fn route(anchor: usize, from: usize) -> (Vec<(usize, usize)>, usize) {
    let mut swaps = Vec::new();
    let mut cur = from;
    let dest = if from > anchor { anchor + 1 } else { anchor - 1 };
    while cur != dest {
        let next = if cur > dest { cur - 1 } else { cur + 1 };
        swaps.push((cur, next));
        cur = next;
    }
    (swaps, cur)
}

/// First-order Trotterized evolution from the initial flavour state.
///
/// X gates prepare the μ neutrinos. Each of the `trotter_steps` steps applies,
/// for every pair `(p, q)` in the chosen order, the field rotation with
/// `α = (t/r)/(N-1)` on both qubits followed by the exchange propagator with
/// `h = J^{pq}·t/r`.
pub fn evolution_circuit_with(params: &NeutrinoParams, t: f64, opts: &EvolutionOptions) -> Result<Circuit> {
    params.validate()?;
    let n = params.n;
    if n < 2 {
        return Err(Error::InvalidParams("evolution circuit needs n ≥ 2".into()));
    }
    if opts.trotter_steps == 0 {
        return Err(Error::InvalidParams("trotter_steps must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidParams("t must be finite".into()));
    }
    let j = coupling_matrix(params)?;
    let order = opts.pair_order.pairs(n)?;
    let dt = t / opts.trotter_steps as f64;
    let alpha = dt / (n - 1) as f64;

    let mut c = Circuit::new(n, format!("evolution n={n} t={t} r={}", opts.trotter_steps));
    for (k, f) in params.initial_flavours.flavours().iter().enumerate() {
        if *f == Flavour::Mu {
            c.push(GateOp::x(params.qubit_of(k)))?;
        }
    }
    for _ in 0..opts.trotter_steps {
        for &(p, q) in &order {
            let (qa, qb) = (params.qubit_of(p), params.qubit_of(q));
            let jpq = j.get(p, q);
            if opts.hardware_swaps && qa.abs_diff(qb) > 1 {
                let (swaps, moved) = route(qa, qb);
                for &(x, y) in &swaps {
                    c.push(GateOp::swap(x, y))?;
                }
                pair_block(&mut c, params, jpq, alpha, dt, qa, moved)?;
                for &(x, y) in swaps.iter().rev() {
                    c.push(GateOp::swap(x, y))?;
                }
            } else {
                pair_block(&mut c, params, jpq, alpha, dt, qa, qb)?;
            }
        }
    }
    Ok(c)
}

pub fn evolution_circuit(params: &NeutrinoParams, t: f64, trotter_steps: usize) -> Result<Circuit> {
    evolution_circuit_with(params, t, &EvolutionOptions::new(trotter_steps))
}

/// Ancilla SWAP test between two `m`-qubit preparations.
///
/// Qubit 0 is the ancilla, `b` runs on qubits `1..=m` and `a` on
/// `m+1..=2m`. The ancilla gets H, CSWAP(0; m+1+i, 1+i) for every `i`, then H,
/// so that `P(0) = (1 + |⟨a|b⟩|²)/2`.
pub fn swap_test_circuit(a: &Circuit, b: &Circuit) -> Result<Circuit> {
    let m = a.num_qubits();
    if b.num_qubits() != m {
        return Err(Error::Dimension(format!(
            "SWAP test registers differ: {m} vs {} qubits",
            b.num_qubits()
        )));
    }
    let total = 2 * m + 1;
    let map_a: Vec<usize> = (0..m).map(|i| m + 1 + i).collect();
    let map_b: Vec<usize> = (0..m).map(|i| 1 + i).collect();
    let mut c = Circuit::new(total, format!("swap-test({}, {})", a.label(), b.label()));
    c.append(&a.remapped(total, &map_a)?)?;
    c.append(&b.remapped(total, &map_b)?)?;
    c.push(GateOp::h(0))?;
    for i in 0..m {
        c.push(GateOp::cswap(0, map_a[i], map_b[i]))?;
    }
    c.push(GateOp::h(0))?;
    Ok(c)
}

/// Spin-flipped copy `σ_y^{⊗m}|ψ*⟩` of a preparation circuit.
pub fn spin_flipped(prep: &Circuit) -> Result<Circuit> {
    let mut c = conjugate_circuit(prep)?;
    c.append(&spin_flip_circuit(prep.num_qubits(), 0)?)?;
    c.set_label(format!("flip({})", prep.label()));
    Ok(c)
}

/// Five-qubit concurrence circuit for two neutrinos: evolution on qubits 3,4
/// and its spin-flipped conjugate on qubits 1,2, compared by the SWAP test
/// on ancilla 0.
pub fn concurrence_circuit_with(params: &NeutrinoParams, t: f64, opts: &EvolutionOptions) -> Result<Circuit> {
    if params.n != 2 {
        return Err(Error::Unsupported(format!(
            "concurrence circuit needs n = 2, got n = {}",
            params.n
        )));
    }
    let evo = evolution_circuit_with(params, t, opts)?;
    let flipped = spin_flipped(&evo)?;
    swap_test_circuit(&evo, &flipped)
}

pub fn concurrence_circuit(params: &NeutrinoParams, t: f64, trotter_steps: usize) -> Result<Circuit> {
    concurrence_circuit_with(params, t, &EvolutionOptions::new(trotter_steps))
}

/// `√max(P(0) - P(1), 0)` from the ancilla marginals of a final state.
///
/// `P(0) - P(1)` equals `2P(0) - 1` but is exactly zero when the two halves
/// cancel exactly.
pub fn swap_test_concurrence(state: &StateVector) -> Result<f64> {
    let (p0, p1) = state.qubit_marginals(0)?;
    Ok((p0 - p1).max(0.0).sqrt())
}

/// Ancilla survival probability `P(0)` of a final state.
pub fn ancilla_survival(state: &StateVector) -> Result<f64> {
    Ok(state.qubit_marginals(0)?.0)
}

/// `√max(2P(0) - 1, 0)` with `P(0)` the ancilla frequency.
///
/// Multi-qubit counts are reduced to qubit 0 first.
pub fn concurrence_from_counts(counts: &Counts) -> Result<f64> {
    let (n0, n1) = ancilla_counts(counts)?;
    let shots = n0 + n1;
    Ok(((n0 as f64 - n1 as f64) / shots as f64).max(0.0).sqrt())
}

fn ancilla_counts(counts: &Counts) -> Result<(u64, u64)> {
    if counts.shots() == 0 {
        return Err(Error::Counts("concurrence needs at least one shot".into()));
    }
    let anc = if counts.num_qubits() == 1 {
        counts.clone()
    } else {
        counts.marginal(&[0])?
    };
    Ok((anc.get("0"), anc.get("1")))
}

/// Binomial standard error of `P(0)`.
pub fn survival_stderr(p0: f64, shots: u64) -> f64 {
    (p0 * (1.0 - p0) / shots as f64).max(0.0).sqrt()
}

/// Standard error of the concurrence estimate: the delta-method value
/// `σ_P/C`, capped by `√(2σ_P)`, the spread of `√(2P-1)` at the clamp.
pub fn concurrence_stderr(c: f64, p0: f64, shots: u64) -> f64 {
    let sp = survival_stderr(p0, shots);
    let cap = (2.0 * sp).sqrt();
    if c > 0.0 {
        (sp / c).min(cap)
    } else {
        cap
    }
}

/// Concurrence estimate and its standard error from counts.
pub fn concurrence_estimate(counts: &Counts) -> Result<(f64, f64)> {
    let (n0, n1) = ancilla_counts(counts)?;
    let shots = n0 + n1;
    let c = concurrence_from_counts(counts)?;
    Ok((c, concurrence_stderr(c, n0 as f64 / shots as f64, shots)))
}
