//! Pair ordering inside a Trotter step, checked against a Taylor-series
//! propagator built directly from Pauli actions.

use num_complex::Complex64 as C;

use nuqsim::circuits::{evolution_circuit_with, EvolutionOptions, PairOrder};
use nuqsim::neutrino::{pairs, NeutrinoParams};
use nuqsim::qsim::{run_statevector, GateKind, StateVector};

fn pauli(psi: &[C], qubit: usize, axis: usize) -> Vec<C> {
    let mask = 1 << qubit;
    let mut out = vec![C::new(0.0, 0.0); psi.len()];
    for (i, a) in psi.iter().enumerate() {
        let up = i & mask == 0;
        match axis {
            0 => out[i ^ mask] = *a,
            1 => out[i ^ mask] = *a * if up { C::new(0.0, 1.0) } else { C::new(0.0, -1.0) },
            _ => out[i] = if up { *a } else { -*a },
        }
    }
    out
}

struct Oracle {
    n: usize,
    field: [f64; 3],
    couplings: Vec<(usize, usize, f64)>,
}

impl Oracle {
    fn new(p: &NeutrinoParams) -> Self {
        let th = 2.0 * p.theta_nu;
        let field = [th.sin(), 0.0, -th.cos() + p.v_cc / 2.0];
        let couplings = pairs(p.n)
            .into_iter()
            .map(|(a, b)| (a, b, 1.0 - p.coupling_angles.get(a, b).unwrap().cos()))
            .collect();
        Self { n: p.n, field, couplings }
    }

    fn h(&self, psi: &[C]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); psi.len()];
        let mut acc = |v: Vec<C>, w: f64| out.iter_mut().zip(v).for_each(|(o, x)| *o += x * w);
        for k in 0..self.n {
            for axis in 0..3 {
                if self.field[axis] != 0.0 {
                    acc(pauli(psi, k, axis), self.field[axis]);
                }
            }
        }
        for &(a, b, j) in &self.couplings {
            for axis in 0..3 {
                acc(pauli(&pauli(psi, a, axis), b, axis), j);
            }
        }
        out
    }

    /// `exp(-iHt)|start⟩` by Taylor series over slices of length ≤ 0.05.
    fn evolve(&self, start: usize, t: f64) -> Vec<C> {
        let mut psi = vec![C::new(0.0, 0.0); 1 << self.n];
        psi[start] = C::new(1.0, 0.0);
        let slices = (t / 0.05).ceil().max(1.0) as usize;
        let dt = t / slices as f64;
        for _ in 0..slices {
            let mut term = psi.clone();
            for k in 1..30 {
                term = self.h(&term);
                let s = C::new(0.0, -dt / k as f64);
                term.iter_mut().for_each(|x| *x *= s);
                psi.iter_mut().zip(&term).for_each(|(p, x)| *p += x);
            }
        }
        psi
    }
}

fn inversion(p: &NeutrinoParams, t: f64, order: PairOrder, steps: usize) -> f64 {
    let target = p.initial_flavours.reversed().basis_index();
    let opts = EvolutionOptions {
        pair_order: order,
        ..EvolutionOptions::new(steps)
    };
    let c = evolution_circuit_with(p, t, &opts).unwrap();
    let out = run_statevector(&c, &StateVector::basis(p.n, 0).unwrap()).unwrap();
    out.probabilities()[target]
}

fn grid() -> Vec<f64> {
    (0..=8).map(|i| 0.5 * i as f64).collect()
}

fn max_gap(steps: usize, a: PairOrder, b: PairOrder) -> f64 {
    let p = NeutrinoParams::three_neutrino();
    grid()
        .into_iter()
        .map(|t| (inversion(&p, t, a.clone(), steps) - inversion(&p, t, b.clone(), steps)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn oracle_preserves_norm() {
    let o = Oracle::new(&NeutrinoParams::three_neutrino());
    let psi = o.evolve(1, 4.0);
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn both_orders_converge_to_exact() {
    let p = NeutrinoParams::three_neutrino();
    let o = Oracle::new(&p);
    let start = p.initial_flavours.basis_index();
    let target = p.initial_flavours.reversed().basis_index();
    for order in [PairOrder::Lexicographic, PairOrder::Reversed] {
        let err = |steps: usize| {
            grid()
                .into_iter()
                .map(|t| (inversion(&p, t, order.clone(), steps) - o.evolve(start, t)[target].norm_sqr()).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(16), err(128));
        assert!(fine < coarse / 4.0, "{order:?}: {coarse:e} -> {fine:e}");
        assert!(fine < 5e-3, "{order:?}: {fine:e}");
    }
}

#[test]
fn order_gap_shrinks_as_one_over_steps() {
    let gaps: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&r| max_gap(r, PairOrder::Lexicographic, PairOrder::Reversed))
        .collect();
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.7..=2.3).contains(&ratio), "gaps {gaps:?}");
    }
}

#[test]
fn custom_order_matching_lexicographic_is_identical() {
    let p = NeutrinoParams::three_neutrino();
    let custom = PairOrder::Custom(pairs(3));
    for t in [0.7, 2.9] {
        assert_eq!(
            inversion(&p, t, custom.clone(), 8),
            inversion(&p, t, PairOrder::Lexicographic, 8)
        );
    }
    assert!(PairOrder::Custom(vec![(0, 1), (0, 1), (1, 2)]).pairs(3).is_err());
}

#[test]
fn hardware_routing_preserves_state() {
    let p = NeutrinoParams::three_neutrino();
    for t in [0.4, 3.1] {
        let run = |swaps: bool| {
            let opts = EvolutionOptions {
                hardware_swaps: swaps,
                ..EvolutionOptions::new(4)
            };
            let c = evolution_circuit_with(&p, t, &opts).unwrap();
            (run_statevector(&c, &StateVector::basis(3, 0).unwrap()).unwrap(), c.count(|k| *k == GateKind::SWAP))
        };
        let ((direct, swaps_direct), (routed, swaps_routed)) = (run(false), run(true));
        assert_eq!(swaps_direct, 0);
        assert_eq!(swaps_routed, 2 * 4);
        let fid = direct.inner(&routed).unwrap().norm();
        assert!((fid - 1.0).abs() < 1e-12, "overlap {fid}");
    }
}

#[test]
#[ignore = "first-order Trotter error flips sign with the pair order; measured gap at 256 steps is ~1e-3"]
fn order_gap_below_1e6_at_256_steps() {
    let gap = max_gap(256, PairOrder::Lexicographic, PairOrder::Reversed);
    assert!(gap < 1e-6, "gap {gap:e}");
}
