use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{c64, DenseMatrix, C64, EPS_UNITARY, ONE, ZERO};

/// Gate vocabulary of the simulator.
///
/// Rotation conventions: `Ry(θ) = exp(-iθY/2)`, `Rz(θ) = exp(-iθZ/2)`,
/// `Phase(λ) = diag(1, e^{iλ})` and
/// `U3(θ,φ,λ) = [[cos θ/2, -e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
///
/// For multi-qubit gates the first target is the most significant bit of the
/// local matrix index: `CNOT` targets are `[control, target]`, `CSWAP` targets
/// are `[control, a, b]` and a `Raw2Q` matrix acts on `|t0 t1⟩`.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    H,
    Ry(f64),
    Rz(f64),
    Phase(f64),
    U3 { theta: f64, phi: f64, lambda: f64 },
    Raw1Q(DenseMatrix),
    CNOT,
    SWAP,
    Raw2Q(DenseMatrix),
    CSWAP,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X
            | GateKind::H
            | GateKind::Ry(_)
            | GateKind::Rz(_)
            | GateKind::Phase(_)
            | GateKind::U3 { .. }
            | GateKind::Raw1Q(_) => 1,
            GateKind::CNOT | GateKind::SWAP | GateKind::Raw2Q(_) => 2,
            GateKind::CSWAP => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "p",
            GateKind::U3 { .. } => "u3",
            GateKind::Raw1Q(_) => "unitary1q",
            GateKind::CNOT => "cx",
            GateKind::SWAP => "swap",
            GateKind::Raw2Q(_) => "unitary2q",
            GateKind::CSWAP => "cswap",
        }
    }

    /// Local matrix of the gate, `2^arity` square.
    pub fn matrix(&self) -> DenseMatrix {
        match self {
            GateKind::X => DenseMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]]),
            GateKind::H => {
                let h = c64(FRAC_1_SQRT_2, 0.0);
                DenseMatrix::from_rows([[h, h], [h, -h]])
            }
            GateKind::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                DenseMatrix::from_rows([[c64(c, 0.0), c64(-s, 0.0)], [c64(s, 0.0), c64(c, 0.0)]])
            }
            GateKind::Rz(theta) => DenseMatrix::diagonal(&[
                C64::from_polar(1.0, -theta / 2.0),
                C64::from_polar(1.0, theta / 2.0),
            ]),
            GateKind::Phase(lambda) => DenseMatrix::diagonal(&[ONE, C64::from_polar(1.0, *lambda)]),
            GateKind::U3 { theta, phi, lambda } => {
                let (s, c) = (theta / 2.0).sin_cos();
                DenseMatrix::from_rows([
                    [c64(c, 0.0), -C64::from_polar(s, *lambda)],
                    [C64::from_polar(s, *phi), C64::from_polar(c, phi + lambda)],
                ])
            }
            GateKind::Raw1Q(m) | GateKind::Raw2Q(m) => m.clone(),
            GateKind::CNOT => permutation(4, |i| match i {
                2 => 3,
                3 => 2,
                other => other,
            }),
            GateKind::SWAP => permutation(4, |i| match i {
                1 => 2,
                2 => 1,
                other => other,
            }),
            GateKind::CSWAP => permutation(8, |i| match i {
                5 => 6,
                6 => 5,
                other => other,
            }),
        }
    }
}

fn permutation(n: usize, image: impl Fn(usize) -> usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for col in 0..n {
        m.set(image(col), col, ONE);
    }
    m
}

/// A gate bound to qubit indices.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    kind: GateKind,
    targets: Vec<usize>,
}

impl GateOp {
    /// Checks arity, distinct targets and, for raw kinds, shape and unitarity.
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} takes {} qubit(s), got {}",
                kind.name(),
                kind.arity(),
                targets.len()
            )));
        }
        for (i, a) in targets.iter().enumerate() {
            if targets[i + 1..].contains(a) {
                return Err(Error::InvalidGate(format!(
                    "{} has repeated qubit {a}",
                    kind.name()
                )));
            }
        }
        match &kind {
            GateKind::Raw1Q(m) | GateKind::Raw2Q(m) => {
                let dim = 1usize << kind.arity();
                if m.rows() != dim || m.cols() != dim {
                    return Err(Error::InvalidGate(format!(
                        "{} needs a {dim}x{dim} matrix, got {}x{}",
                        kind.name(),
                        m.rows(),
                        m.cols()
                    )));
                }
                let deviation = m.unitary_deviation();
                if deviation > EPS_UNITARY {
                    return Err(Error::NotUnitary { deviation });
                }
            }
            GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Phase(a) if !a.is_finite() => {
                return Err(Error::InvalidGate(format!("{} angle is not finite", kind.name())));
            }
            GateKind::U3 { theta, phi, lambda }
                if !(theta.is_finite() && phi.is_finite() && lambda.is_finite()) =>
            {
                return Err(Error::InvalidGate("u3 angle is not finite".into()));
            }
            _ => {}
        }
        Ok(Self { kind, targets })
    }

    pub fn x(q: usize) -> Self {
        Self::known(GateKind::X, vec![q])
    }

    pub fn h(q: usize) -> Self {
        Self::known(GateKind::H, vec![q])
    }

    pub fn ry(theta: f64, q: usize) -> Self {
        Self::known(GateKind::Ry(theta), vec![q])
    }

    pub fn rz(theta: f64, q: usize) -> Self {
        Self::known(GateKind::Rz(theta), vec![q])
    }

    pub fn phase(lambda: f64, q: usize) -> Self {
        Self::known(GateKind::Phase(lambda), vec![q])
    }

    pub fn u3(theta: f64, phi: f64, lambda: f64, q: usize) -> Self {
        Self::known(GateKind::U3 { theta, phi, lambda }, vec![q])
    }

    /// `Rx(θ)` expressed as `U3(θ, -π/2, π/2)`.
    pub fn rx(theta: f64, q: usize) -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self::u3(theta, -FRAC_PI_2, FRAC_PI_2, q)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::known(GateKind::CNOT, vec![control, target])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::known(GateKind::SWAP, vec![a, b])
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        Self::known(GateKind::CSWAP, vec![control, a, b])
    }

    pub fn raw1q(m: DenseMatrix, q: usize) -> Result<Self> {
        Self::new(GateKind::Raw1Q(m), vec![q])
    }

    pub fn raw2q(m: DenseMatrix, a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::Raw2Q(m), vec![a, b])
    }

    fn known(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { kind, targets }
    }

    #[inline]
    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    #[inline]
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn matrix(&self) -> DenseMatrix {
        self.kind.matrix()
    }

    /// Same gate with every target `q` replaced by `mapping[q]`.
    pub fn remapped(&self, mapping: &[usize]) -> Result<Self> {
        let targets = self
            .targets
            .iter()
            .map(|&q| {
                mapping.get(q).copied().ok_or(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: mapping.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.kind.clone(), targets)
    }

    /// Checks that targets are distinct and inside an `num_qubits` register.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        for (i, &q) in self.targets.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
            if self.targets[i + 1..].contains(&q) {
                return Err(Error::InvalidGate(format!(
                    "{} has repeated qubit {q}",
                    self.kind.name()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn named_matrices_are_unitary() {
        let kinds = [
            GateKind::X,
            GateKind::H,
            GateKind::Ry(0.3),
            GateKind::Rz(-1.1),
            GateKind::Phase(0.7),
            GateKind::U3 { theta: 0.4, phi: 1.2, lambda: -0.5 },
            GateKind::CNOT,
            GateKind::SWAP,
            GateKind::CSWAP,
        ];
        for k in kinds {
            assert!(k.matrix().unitary_deviation() < 1e-14, "{}", k.name());
        }
    }

    #[test]
    fn u3_special_cases() {
        let y = GateKind::U3 { theta: PI, phi: PI / 2.0, lambda: PI / 2.0 }.matrix();
        assert!(y.max_abs_diff(&crate::linalg::pauli::y()) < 1e-15);
        let rx = GateOp::rx(0.8, 0).matrix();
        let (s, c) = (0.4f64).sin_cos();
        let want = DenseMatrix::from_rows([[c64(c, 0.0), c64(0.0, -s)], [c64(0.0, -s), c64(c, 0.0)]]);
        assert!(rx.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn new_rejects_bad_ops() {
        assert!(GateOp::new(GateKind::CNOT, vec![1, 1]).is_err());
        assert!(GateOp::new(GateKind::X, vec![0, 1]).is_err());
        assert!(GateOp::raw1q(DenseMatrix::identity(4), 0).is_err());
        let skew = DenseMatrix::from_rows([[ONE, ONE], [ZERO, ONE]]);
        assert!(GateOp::raw1q(skew, 0).is_err());
        assert!(GateOp::new(GateKind::Ry(f64::NAN), vec![0]).is_err());
    }

    #[test]
    fn validate_checks_range() {
        assert!(GateOp::cnot(0, 2).validate(2).is_err());
        assert!(GateOp::cnot(0, 1).validate(2).is_ok());
        assert!(GateOp::cnot(1, 1).validate(2).is_err());
    }
}
