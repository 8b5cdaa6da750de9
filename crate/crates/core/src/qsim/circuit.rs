use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Unitary};

use super::gate::{GateKind, GateOp};
use super::state::StateVector;

/// Widest circuit `circuit_unitary` will expand.
pub const MAX_UNITARY_QUBITS: usize = 6;

/// Ordered gate program on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
    label: String,
}

impl Circuit {
    pub fn new(num_qubits: usize, label: impl Into<String>) -> Self {
        Self {
            num_qubits,
            ops: Vec::new(),
            label: label.into(),
        }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    #[inline]
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    /// Appends every op of `other`, which must not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits > self.num_qubits {
            return Err(Error::Dimension(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.num_qubits, self.num_qubits
            )));
        }
        for op in &other.ops {
            self.push(op.clone())?;
        }
        Ok(())
    }

    /// Re-targets the circuit onto a `num_qubits` register, sending qubit `q`
    /// to `mapping[q]`.
    pub fn remapped(&self, num_qubits: usize, mapping: &[usize]) -> Result<Circuit> {
        if mapping.len() != self.num_qubits {
            return Err(Error::Dimension(format!(
                "mapping covers {} qubits, circuit has {}",
                mapping.len(),
                self.num_qubits
            )));
        }
        let mut out = Circuit::new(num_qubits, self.label.clone());
        for op in &self.ops {
            out.push(op.remapped(mapping)?)?;
        }
        Ok(out)
    }

    pub fn count(&self, pred: impl Fn(&GateKind) -> bool) -> usize {
        self.ops.iter().filter(|op| pred(op.kind())).count()
    }

    pub fn cnot_count(&self) -> usize {
        self.count(|k| matches!(k, GateKind::CNOT))
    }

    /// Gates touching `qubit`.
    pub fn ops_on(&self, qubit: usize) -> impl Iterator<Item = &GateOp> {
        self.ops.iter().filter(move |op| op.targets().contains(&qubit))
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {} ({} qubits, {} ops)", self.label, self.num_qubits, self.ops.len())?;
        for op in &self.ops {
            let args = match op.kind() {
                GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Phase(a) => format!("({a:.6})"),
                GateKind::U3 { theta, phi, lambda } => {
                    format!("({theta:.6}, {phi:.6}, {lambda:.6})")
                }
                _ => String::new(),
            };
            let qs: Vec<String> = op.targets().iter().map(|q| format!("q{q}")).collect();
            writeln!(f, "{}{} {}", op.kind().name(), args, qs.join(", "))?;
        }
        Ok(())
    }
}

/// Applies every op of `circuit` to a copy of `initial`.
pub fn run_statevector(circuit: &Circuit, initial: &StateVector) -> Result<StateVector> {
    if circuit.num_qubits() != initial.num_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit on a {}-qubit state",
            circuit.num_qubits(),
            initial.num_qubits()
        )));
    }
    let mut state = initial.clone();
    for op in circuit.ops() {
        state.apply(op)?;
    }
    Ok(state)
}

/// Full unitary of a circuit; column `k` is the circuit applied to basis state `k`.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Unitary> {
    let n = circuit.num_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits: n,
            cap: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m = DenseMatrix::zeros(dim, dim);
    for col in 0..dim {
        let out = run_statevector(circuit, &StateVector::basis(n, col)?)?;
        for (row, &z) in out.amps().iter().enumerate() {
            m.set(row, col, z);
        }
    }
    Unitary::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli};
    use crate::qsim::state::init_basis_state;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(1, "empty");
        let s = init_basis_state(1, "1").unwrap();
        assert_eq!(run_statevector(&c, &s).unwrap(), s);
        assert_eq!(circuit_unitary(&c).unwrap().matrix(), &DenseMatrix::identity(2));
    }

    #[test]
    fn single_x_unitary_is_sigma_x() {
        let mut c = Circuit::new(1, "x");
        c.push(GateOp::x(0)).unwrap();
        assert_eq!(circuit_unitary(&c).unwrap().matrix(), &pauli::x());
    }

    #[test]
    fn bell_state() {
        let mut c = Circuit::new(2, "bell");
        c.push(GateOp::h(1)).unwrap();
        c.push(GateOp::cnot(1, 0)).unwrap();
        let s = run_statevector(&c, &init_basis_state(2, "00").unwrap()).unwrap();
        assert!((s.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amps()[3].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn push_validates_width() {
        let mut c = Circuit::new(2, "bad");
        assert!(c.push(GateOp::cnot(0, 2)).is_err());
        assert!(c.is_empty());
    }

    #[test]
    fn width_cap_on_unitary() {
        assert!(matches!(
            circuit_unitary(&Circuit::new(7, "wide")),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn mismatched_widths_rejected() {
        let c = Circuit::new(2, "c");
        assert!(run_statevector(&c, &init_basis_state(3, "000").unwrap()).is_err());
    }

    #[test]
    fn remap_moves_targets() {
        let mut c = Circuit::new(2, "c");
        c.push(GateOp::cnot(0, 1)).unwrap();
        let r = c.remapped(5, &[3, 1]).unwrap();
        assert_eq!(r.ops()[0].targets(), &[3, 1]);
        assert!(c.remapped(5, &[3]).is_err());
    }

    // Oracle: embed each gate as a full 2^n matrix. Single-qubit gates use the
    // Kronecker chain I ⊗ .. ⊗ g ⊗ .. ⊗ I (most significant qubit leftmost);
    // multi-qubit gates are embedded entry by entry.
    fn embed(op: &GateOp, n: usize) -> DenseMatrix {
        let g = op.matrix();
        let t = op.targets();
        if t.len() == 1 {
            let mut m = DenseMatrix::identity(1);
            for q in (0..n).rev() {
                let f = if q == t[0] { g.clone() } else { pauli::id() };
                m = kron(&m, &f);
            }
            return m;
        }
        let dim = 1usize << n;
        let k = t.len();
        let local = |idx: usize| -> usize {
            t.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> q) & 1))
        };
        let mask: usize = t.iter().map(|&q| 1usize << q).sum();
        let mut m = DenseMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                if r & !mask == c & !mask {
                    m.set(r, c, g.get(local(r), local(c)));
                }
            }
        }
        assert_eq!(g.rows(), 1 << k);
        m
    }

    fn arb_op(n: usize) -> impl Strategy<Value = GateOp> {
        let angle = -3.2f64..3.2;
        let q = 0..n;
        prop_oneof![
            q.clone().prop_map(GateOp::x),
            q.clone().prop_map(GateOp::h),
            (angle.clone(), q.clone()).prop_map(|(a, q)| GateOp::ry(a, q)),
            (angle.clone(), q.clone()).prop_map(|(a, q)| GateOp::rz(a, q)),
            (angle.clone(), q.clone()).prop_map(|(a, q)| GateOp::phase(a, q)),
            (angle.clone(), angle.clone(), angle, q.clone())
                .prop_map(|(a, b, c, q)| GateOp::u3(a, b, c, q)),
            (q.clone(), 1..n).prop_map(move |(a, d)| GateOp::cnot(a, (a + d) % n)),
            (q.clone(), 1..n).prop_map(move |(a, d)| GateOp::swap(a, (a + d) % n)),
            (q, 1..n, 1..n).prop_filter_map("distinct", move |(c, d1, d2)| {
                let (a, b) = ((c + d1) % n, (c + d2) % n);
                (a != b).then(|| GateOp::cswap(c, a, b))
            }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn statevector_matches_embedded_matrix_product(
            ops in prop::collection::vec(arb_op(4), 0..24),
            start in 0usize..16,
        ) {
            let n = 4;
            let mut c = Circuit::new(n, "random");
            let mut full = DenseMatrix::identity(1 << n);
            for op in ops {
                full = &embed(&op, n) * &full;
                c.push(op).unwrap();
            }
            let init = StateVector::basis(n, start).unwrap();
            let out = run_statevector(&c, &init).unwrap();
            let want = full.apply(init.amps());
            for (a, b) in out.amps().iter().zip(&want) {
                prop_assert!((a - b).norm() < 1e-9);
            }
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn raw_two_qubit_gate_matches_embedding(
            a in 0usize..3, d in 1usize..3,
            th in -3.0f64..3.0, ph in -3.0f64..3.0,
        ) {
            let b = (a + d) % 3;
            let u = kron(&GateKind::Ry(th).matrix(), &GateKind::Phase(ph).matrix());
            let cx = GateKind::CNOT.matrix();
            let m = &cx * &u;
            let op = GateOp::raw2q(m, a, b).unwrap();
            let mut c = Circuit::new(3, "raw");
            c.push(GateOp::h(0)).unwrap();
            c.push(GateOp::h(2)).unwrap();
            c.push(op.clone()).unwrap();
            let got = circuit_unitary(&c).unwrap();
            let want = &embed(&op, 3) * &(&embed(&GateOp::h(2), 3) * &embed(&GateOp::h(0), 3));
            prop_assert!(got.matrix().max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn embedded_cnot_agrees_with_kron_for_adjacent_pair() {
        // control on the more significant qubit of an adjacent pair: CX ⊗ I
        let want = kron(&GateKind::CNOT.matrix(), &pauli::id());
        let got = embed(&GateOp::cnot(2, 1), 3);
        assert_eq!(got, want);
    }
}
