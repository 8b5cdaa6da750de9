use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, C64, I, ONE, ZERO};

use super::bits::parse_bitstring;
use super::gate::{GateKind, GateOp};

/// Norm tolerance for states.
pub const EPS_NORM: f64 = 1e-9;
/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

/// Dense statevector over `num_qubits` qubits; amplitude `k` belongs to the
/// basis state whose bit `q` is qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state by index.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidParams(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { num_qubits, amps })
    }

    /// Takes ownership of raw amplitudes; the length must be a power of two
    /// and the norm within `EPS_NORM` of one.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "statevector length {dim} is not a power of two >= 2"
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("non-finite amplitude".into()));
        }
        let state = Self {
            num_qubits: dim.trailing_zeros() as usize,
            amps,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > EPS_NORM {
            return Err(Error::InvalidParams(format!("state norm² is {norm}, expected 1")));
        }
        Ok(state)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &str) -> Result<C64> {
        Ok(self.amps[parse_bitstring(bits, self.num_qubits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|⟨bits|ψ⟩|²`.
    pub fn probability_of(&self, bits: &str) -> Result<f64> {
        Ok(self.amps[parse_bitstring(bits, self.num_qubits)?].norm_sqr().min(1.0))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Probability that `qubit` reads 0 and 1, each summed separately.
    pub fn qubit_marginals(&self, qubit: usize) -> Result<(f64, f64)> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        let (mut p0, mut p1) = (0.0, 0.0);
        for (k, z) in self.amps.iter().enumerate() {
            if k & mask == 0 {
                p0 += z.norm_sqr();
            } else {
                p1 += z.norm_sqr();
            }
        }
        Ok((p0, p1))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Dimension(format!(
                "inner product of {}- and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Applies `op` in place.
    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        self.apply_validated(op, None);
        Ok(())
    }

    /// Applies an op already validated against this register. `matrix`, when
    /// given, must equal `op.matrix()`.
    pub(crate) fn apply_validated(&mut self, op: &GateOp, matrix: Option<&DenseMatrix>) {
        let t = op.targets();
        match op.kind() {
            GateKind::X => self.apply_x(t[0]),
            GateKind::CNOT => self.apply_cnot(t[0], t[1]),
            GateKind::SWAP => self.apply_swap(t[0], t[1]),
            GateKind::CSWAP => self.apply_cswap(t[0], t[1], t[2]),
            kind => {
                let owned;
                let m = match matrix {
                    Some(m) => m,
                    None => {
                        owned = kind.matrix();
                        &owned
                    }
                };
                if kind.arity() == 1 {
                    self.apply_1q(t[0], m)
                } else {
                    self.apply_2q(t[0], t[1], m)
                }
            }
        }
    }

    /// Applies a Pauli (`1 = X`, `2 = Y`, `3 = Z`, `0 = I`) to one qubit.
    pub(crate) fn apply_pauli(&mut self, qubit: usize, pauli: usize) {
        let mask = 1usize << qubit;
        match pauli {
            0 => {}
            1 => self.apply_x(qubit),
            2 => {
                for i0 in (0..self.amps.len()).filter(|k| k & mask == 0) {
                    let i1 = i0 | mask;
                    let (a0, a1) = (self.amps[i0], self.amps[i1]);
                    self.amps[i0] = -I * a1;
                    self.amps[i1] = I * a0;
                }
            }
            3 => {
                for (k, z) in self.amps.iter_mut().enumerate() {
                    if k & mask != 0 {
                        *z = -*z;
                    }
                }
            }
            _ => unreachable!("pauli index {pauli}"),
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn apply_x(&mut self, q: usize) {
        let mask = 1usize << q;
        for i0 in 0..self.amps.len() {
            if i0 & mask == 0 {
                self.amps.swap(i0, i0 | mask);
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (am, bm) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & am != 0 && i & bm == 0 {
                self.amps.swap(i, (i & !am) | bm);
            }
        }
    }

    fn apply_cswap(&mut self, control: usize, a: usize, b: usize) {
        let (cm, am, bm) = (1usize << control, 1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & am != 0 && i & bm == 0 {
                self.amps.swap(i, (i & !am) | bm);
            }
        }
    }

    fn apply_1q(&mut self, q: usize, m: &DenseMatrix) {
        let (m00, m01, m10, m11) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        let stride = 1usize << q;
        let dim = self.amps.len();
        let mut block = 0;
        while block < dim {
            for i0 in block..block + stride {
                let i1 = i0 + stride;
                let (a0, a1) = (self.amps[i0], self.amps[i1]);
                self.amps[i0] = m00 * a0 + m01 * a1;
                self.amps[i1] = m10 * a0 + m11 * a1;
            }
            block += 2 * stride;
        }
    }

    /// Dense two-qubit kernel: gathers the four amplitudes that differ only in
    /// qubits `hi` and `lo`, multiplies by `m` (local index `2·b_hi + b_lo`),
    /// and scatters them back.
    fn apply_2q(&mut self, hi: usize, lo: usize, m: &DenseMatrix) {
        let (hm, lm) = (1usize << hi, 1usize << lo);
        let mut g = [[ZERO; 4]; 4];
        for (r, row) in g.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = m.get(r, c);
            }
        }
        for base in 0..self.amps.len() {
            if base & (hm | lm) != 0 {
                continue;
            }
            let idx = [base, base | lm, base | hm, base | hm | lm];
            let v = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amps[k] = g[r][0] * v[0] + g[r][1] * v[1] + g[r][2] * v[2] + g[r][3] * v[3];
            }
        }
    }
}

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::InvalidParams("register needs at least one qubit".into()));
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Basis state named by a printed bitstring (most-significant qubit first).
pub fn init_basis_state(num_qubits: usize, bits: &str) -> Result<StateVector> {
    check_width(num_qubits)?;
    let index = parse_bitstring(bits, num_qubits)?;
    StateVector::basis(num_qubits, index)
}

/// Returns `op` applied to a copy of `state`.
pub fn apply_gate(state: &StateVector, op: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(op)?;
    Ok(out)
}

/// `|⟨bits|ψ⟩|²`.
pub fn probability_of(state: &StateVector, bits: &str) -> Result<f64> {
    state.probability_of(bits)
}
