//! Gate-level compilation of the propagators.
//!
//! Two-qubit interaction: `exp(-i(h_x XX + h_y YY + h_z ZZ))` on qubits
//! `(a, b)` is realized in time order as
//!
//! ```text
//! CX(a→b) · U2⊗V2 · CX(a→b) · U3⊗V3 · CX(a→b) · U4⊗V4
//! ```
//!
//! with `U` gates on `a`, `V` gates on `b` and
//!
//! | gate | matrix                               | named form          |
//! |------|--------------------------------------|---------------------|
//! | U2   | (i/√2)(X+Z)·exp(-i(h_x - π/4)X)      | Rx(2h_x - π/2), H   |
//! | V2   | exp(-i h_z Z)                        | Rz(2h_z)            |
//! | U3   | (-i/√2)(X+Z)                         | H                   |
//! | V3   | exp(+i h_y Z)                        | Rz(-2h_y)           |
//! | U4   | (I - iX)/√2                          | Rx(π/2)             |
//! | V4   | (I + iX)/√2                          | Rx(-π/2)            |
//!
//! The named forms differ from the matrices only by global phase.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{c64, kron, pauli, DenseMatrix, Hermitian, C64, I};
use crate::qsim::{Circuit, GateKind, GateOp};

/// Coefficients of `h_x XX + h_y YY + h_z ZZ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XYZCoefficients {
    h_x: f64,
    h_y: f64,
    h_z: f64,
}

impl XYZCoefficients {
    pub fn new(h_x: f64, h_y: f64, h_z: f64) -> Result<Self> {
        if !(h_x.is_finite() && h_y.is_finite() && h_z.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "XYZ coefficients must be finite, got ({h_x}, {h_y}, {h_z})"
            )));
        }
        Ok(Self { h_x, h_y, h_z })
    }

    /// `h_x = h_y = h_z = h`.
    pub fn isotropic(h: f64) -> Result<Self> {
        Self::new(h, h, h)
    }

    pub fn h_x(&self) -> f64 {
        self.h_x
    }

    pub fn h_y(&self) -> f64 {
        self.h_y
    }

    pub fn h_z(&self) -> f64 {
        self.h_z
    }

    pub fn is_isotropic(&self) -> bool {
        self.h_x == self.h_y && self.h_y == self.h_z
    }

    /// `h_x XX + h_y YY + h_z ZZ` as a 4×4 matrix.
    pub fn hamiltonian(&self) -> Hermitian {
        let [x, y, z] = pauli::xyz();
        let m = kron(&x, &x)
            .scale(c64(self.h_x, 0.0))
            .add(&kron(&y, &y).scale(c64(self.h_y, 0.0)))
            .add(&kron(&z, &z).scale(c64(self.h_z, 0.0)));
        Hermitian::new(m).expect("real combination of Hermitian Pauli products")
    }
}

fn exp_x(angle: f64) -> DenseMatrix {
    // exp(-i·angle·X)
    let (s, c) = angle.sin_cos();
    DenseMatrix::from_rows([[c64(c, 0.0), c64(0.0, -s)], [c64(0.0, -s), c64(c, 0.0)]])
}

fn exp_z(angle: f64) -> DenseMatrix {
    // exp(-i·angle·Z)
    DenseMatrix::diagonal(&[C64::from_polar(1.0, -angle), C64::from_polar(1.0, angle)])
}

fn x_plus_z(scale: C64) -> DenseMatrix {
    DenseMatrix::from_rows([[scale, scale], [scale, -scale]])
}

/// The literal `U_i`/`V_i` matrices, in the order `[U2, V2, U3, V3, U4, V4]`.
pub fn xyz_local_gates(h: &XYZCoefficients) -> [DenseMatrix; 6] {
    let r = FRAC_1_SQRT_2;
    let u2 = &x_plus_z(I * r) * &exp_x(h.h_x - PI / 4.0);
    let v2 = exp_z(h.h_z);
    let u3 = x_plus_z(-I * r);
    let v3 = exp_z(-h.h_y);
    let u4 = DenseMatrix::from_rows([[c64(r, 0.0), c64(0.0, -r)], [c64(0.0, -r), c64(r, 0.0)]]);
    let v4 = DenseMatrix::from_rows([[c64(r, 0.0), c64(0.0, r)], [c64(0.0, r), c64(r, 0.0)]]);
    [u2, v2, u3, v3, u4, v4]
}

/// Three-CNOT circuit for `exp(-i(h_x XX + h_y YY + h_z ZZ))` on `(a, b)`.
///
/// The register is `max(a, b) + 1` qubits wide. Isotropic coefficients emit
/// the literal matrices as raw gates; anything else emits Rx, Rz and H
/// gates around the same CNOT skeleton.
pub fn xyz_propagator_circuit(h: XYZCoefficients, qubit_a: usize, qubit_b: usize) -> Result<Circuit> {
    if qubit_a == qubit_b {
        return Err(Error::InvalidGate(format!(
            "propagator needs two distinct qubits, got {qubit_a} twice"
        )));
    }
    let (a, b) = (qubit_a, qubit_b);
    let mut c = Circuit::new(a.max(b) + 1, "xyz");
    if h.is_isotropic() {
        let [u2, v2, u3, v3, u4, v4] = xyz_local_gates(&h);
        for (u, v) in [(u2, v2), (u3, v3), (u4, v4)] {
            c.push(GateOp::cnot(a, b))?;
            c.push(GateOp::raw1q(u, a)?)?;
            c.push(GateOp::raw1q(v, b)?)?;
        }
    } else {
        c.push(GateOp::cnot(a, b))?;
        c.push(GateOp::rx(2.0 * h.h_x - FRAC_PI_2, a))?;
        c.push(GateOp::h(a))?;
        c.push(GateOp::rz(2.0 * h.h_z, b))?;
        c.push(GateOp::cnot(a, b))?;
        c.push(GateOp::h(a))?;
        c.push(GateOp::rz(-2.0 * h.h_y, b))?;
        c.push(GateOp::cnot(a, b))?;
        c.push(GateOp::rx(FRAC_PI_2, a))?;
        c.push(GateOp::rx(-FRAC_PI_2, b))?;
    }
    Ok(c)
}

/// `exp(-iα b·σ)` on `qubit` for `b = (sin 2θ_ν, 0, -cos 2θ_ν)`:
/// `Ry(-β)`, `Rz(2α)`, `Ry(β)` in time order with `β = π - 2θ_ν`.
pub fn bfield_rotation_circuit(theta_nu: f64, alpha: f64, qubit: usize) -> Result<Circuit> {
    let (s, c) = (2.0 * theta_nu).sin_cos();
    field_rotation_circuit([s, 0.0, -c], alpha, qubit)
}

/// `exp(-iα f·σ)` on `qubit` for a field `f` in the x–z plane.
pub fn field_rotation_circuit(field: [f64; 3], alpha: f64, qubit: usize) -> Result<Circuit> {
    let [fx, fy, fz] = field;
    if fy != 0.0 {
        return Err(Error::Unsupported("field rotation needs f_y = 0".into()));
    }
    if !(fx.is_finite() && fz.is_finite() && alpha.is_finite()) {
        return Err(Error::InvalidParams("field rotation arguments must be finite".into()));
    }
    let beta = fx.atan2(fz);
    let norm = fx.hypot(fz);
    let mut c = Circuit::new(qubit + 1, "field");
    c.push(GateOp::ry(-beta, qubit))?;
    c.push(GateOp::rz(2.0 * alpha * norm, qubit))?;
    c.push(GateOp::ry(beta, qubit))?;
    Ok(c)
}

/// Circuit whose unitary is the elementwise conjugate of `c`'s.
///
/// | gate            | conjugate         |
/// |-----------------|-------------------|
/// | X, H, Ry(θ)     | unchanged (real)  |
/// | CNOT, SWAP, CSWAP | unchanged       |
/// | Rz(θ)           | Rz(-θ)            |
/// | Phase(λ)        | Phase(-λ)         |
/// | U3(θ, φ, λ)     | U3(θ, -φ, -λ)     |
/// | raw matrix M    | raw matrix M*     |
pub fn conjugate_circuit(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.num_qubits(), format!("{}*", c.label()));
    for op in c.ops() {
        let kind = match op.kind() {
            GateKind::Rz(a) => GateKind::Rz(-a),
            GateKind::Phase(a) => GateKind::Phase(-a),
            GateKind::U3 { theta, phi, lambda } => GateKind::U3 {
                theta: *theta,
                phi: -phi,
                lambda: -lambda,
            },
            GateKind::Raw1Q(m) => GateKind::Raw1Q(m.conj()),
            GateKind::Raw2Q(m) => GateKind::Raw2Q(m.conj()),
            k @ (GateKind::X
            | GateKind::H
            | GateKind::Ry(_)
            | GateKind::CNOT
            | GateKind::SWAP
            | GateKind::CSWAP) => k.clone(),
        };
        out.push(GateOp::new(kind, op.targets().to_vec())?)?;
    }
    Ok(out)
}

/// `σ_y` on qubits `offset .. offset + num_qubits`.
pub fn spin_flip_circuit(num_qubits: usize, offset: usize) -> Result<Circuit> {
    let mut c = Circuit::new(offset + num_qubits, "spin-flip");
    for q in offset..offset + num_qubits {
        c.push(GateOp::raw1q(pauli::y(), q)?)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{distance_up_to_global_phase, expm_hermitian, Unitary};
    use crate::qsim::{circuit_unitary, init_basis_state, run_statevector, StateVector};
    use proptest::prelude::*;

    fn oracle_xyz(h: &XYZCoefficients) -> Unitary {
        expm_hermitian(&h.hamiltonian(), 1.0).unwrap()
    }

    // The circuit acts on (a, b) = (1, 0) so that qubit a is the left Kronecker factor.
    fn xyz_distance(h: XYZCoefficients) -> f64 {
        let c = xyz_propagator_circuit(h, 1, 0).unwrap();
        distance_up_to_global_phase(&circuit_unitary(&c).unwrap(), &oracle_xyz(&h))
    }

    #[test]
    fn zero_coefficients_give_identity() {
        let h = XYZCoefficients::isotropic(0.0).unwrap();
        let c = xyz_propagator_circuit(h, 1, 0).unwrap();
        assert!(distance_up_to_global_phase(&circuit_unitary(&c).unwrap(), &Unitary::identity(4)) < 1e-10);
    }

    #[test]
    fn isotropic_pi_over_6_coupling() {
        let j = 1.0 - (PI / 6.0).cos();
        assert!(xyz_distance(XYZCoefficients::isotropic(j * 1.0).unwrap()) < 1e-9);
    }

    #[test]
    fn both_qubit_orders_match() {
        let h = XYZCoefficients::new(0.3, -0.7, 1.1).unwrap();
        let oracle = oracle_xyz(&h);
        for (a, b) in [(0, 1), (1, 0)] {
            let u = circuit_unitary(&xyz_propagator_circuit(h, a, b).unwrap()).unwrap();
            assert!(distance_up_to_global_phase(&u, &oracle) < 1e-9);
        }
    }

    #[test]
    fn isotropic_emits_literal_matrices() {
        let h = XYZCoefficients::isotropic(0.4).unwrap();
        let c = xyz_propagator_circuit(h, 0, 1).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c.cnot_count(), 3);
        assert_eq!(c.count(|k| matches!(k, GateKind::Raw1Q(_))), 6);
        let [u2, v2, u3, v3, u4, v4] = xyz_local_gates(&h);
        assert_eq!(c.ops()[1].matrix(), u2);
        assert_eq!(c.ops()[2].matrix(), v2);
        assert_eq!(c.ops()[4].matrix(), u3);
        assert_eq!(c.ops()[5].matrix(), v3);
        assert_eq!(c.ops()[7].matrix(), u4);
        assert_eq!(c.ops()[8].matrix(), v4);
        // V3 = V2† when the couplings are equal
        assert!(v3.max_abs_diff(&v2.adjoint()) < 1e-15);
    }

    #[test]
    fn distinct_qubits_required() {
        let h = XYZCoefficients::isotropic(0.1).unwrap();
        assert!(xyz_propagator_circuit(h, 2, 2).is_err());
        assert!(XYZCoefficients::new(f64::NAN, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn random_coefficients_match_oracle(
            hx in -PI..PI, hy in -PI..PI, hz in -PI..PI,
        ) {
            let h = XYZCoefficients::new(hx, hy, hz).unwrap();
            prop_assert!(xyz_distance(h) < 1e-9);
            prop_assert_eq!(xyz_propagator_circuit(h, 0, 1).unwrap().cnot_count(), 3);
        }

        #[test]
        fn field_rotation_matches_oracle(
            th in -PI..PI, alpha in -3.0f64..3.0,
        ) {
            let c = bfield_rotation_circuit(th, alpha, 0).unwrap();
            let (s, co) = (2.0 * th).sin_cos();
            let b = pauli::x().scale(c64(s, 0.0)).add(&pauli::z().scale(c64(-co, 0.0)));
            let want = expm_hermitian(&Hermitian::new(b).unwrap(), alpha).unwrap();
            prop_assert!(distance_up_to_global_phase(&circuit_unitary(&c).unwrap(), &want) < 1e-10);
        }

        #[test]
        fn conjugation_is_elementwise_and_involutive(
            angles in prop::collection::vec(-3.0f64..3.0, 6),
        ) {
            let mut c = Circuit::new(2, "mix");
            c.push(GateOp::ry(angles[0], 0)).unwrap();
            c.push(GateOp::rz(angles[1], 1)).unwrap();
            c.push(GateOp::cnot(0, 1)).unwrap();
            c.push(GateOp::phase(angles[2], 0)).unwrap();
            c.push(GateOp::u3(angles[3], angles[4], angles[5], 1)).unwrap();
            c.push(GateOp::h(0)).unwrap();
            c.push(GateOp::raw1q(pauli::y(), 1).unwrap()).unwrap();
            c.push(GateOp::swap(0, 1)).unwrap();
            let u = circuit_unitary(&c).unwrap();
            let cc = conjugate_circuit(&c).unwrap();
            prop_assert!(circuit_unitary(&cc).unwrap().matrix().max_abs_diff(&u.matrix().conj()) < 1e-10);
            let back = circuit_unitary(&conjugate_circuit(&cc).unwrap()).unwrap();
            prop_assert!(back.matrix().max_abs_diff(u.matrix()) < 1e-10);
        }

        #[test]
        fn spin_flip_overlap_is_twice_determinant(
            re in prop::collection::vec(-1.0f64..1.0, 4),
            im in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let raw: Vec<C64> = re.iter().zip(&im).map(|(&r, &i)| c64(r, i)).collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let amps: Vec<C64> = raw.iter().map(|z| z / norm).collect();
            let psi = StateVector::from_amplitudes(amps.clone()).unwrap();
            let conj = StateVector::from_amplitudes(amps.iter().map(|z| z.conj()).collect()).unwrap();
            let tilde = run_statevector(&spin_flip_circuit(2, 0).unwrap(), &conj).unwrap();
            let overlap = psi.inner(&tilde).unwrap().norm();
            // amplitudes indexed as a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩
            let (a, b, cc, d) = (amps[0], amps[1], amps[2], amps[3]);
            prop_assert!((overlap - 2.0 * (a * d - b * cc).norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn axis_aligned_field_is_rx() {
        let c = bfield_rotation_circuit(PI / 4.0, 0.37, 0).unwrap();
        let want = Unitary::new(GateOp::rx(2.0 * 0.37, 0).matrix()).unwrap();
        assert!(distance_up_to_global_phase(&circuit_unitary(&c).unwrap(), &want) < 1e-10);
        let id = bfield_rotation_circuit(0.195, 0.0, 0).unwrap();
        assert!(distance_up_to_global_phase(&circuit_unitary(&id).unwrap(), &Unitary::identity(2)) < 1e-10);
    }

    #[test]
    fn scaled_field_rotation() {
        let f = [0.3, 0.0, -1.4];
        let c = field_rotation_circuit(f, 0.8, 0).unwrap();
        let m = pauli::x().scale(c64(f[0], 0.0)).add(&pauli::z().scale(c64(f[2], 0.0)));
        let want = expm_hermitian(&Hermitian::new(m).unwrap(), 0.8).unwrap();
        assert!(distance_up_to_global_phase(&circuit_unitary(&c).unwrap(), &want) < 1e-10);
        assert!(field_rotation_circuit([0.0, 1.0, 0.0], 0.1, 0).is_err());
    }

    #[test]
    fn real_circuits_are_fixed_by_conjugation() {
        let mut c = Circuit::new(3, "real");
        c.push(GateOp::x(0)).unwrap();
        c.push(GateOp::cnot(0, 2)).unwrap();
        c.push(GateOp::cswap(1, 0, 2)).unwrap();
        let cc = conjugate_circuit(&c).unwrap();
        assert_eq!(cc.ops(), c.ops());
        let p = conjugate_circuit(&{
            let mut p = Circuit::new(1, "p");
            p.push(GateOp::phase(0.6, 0)).unwrap();
            p
        })
        .unwrap();
        assert_eq!(p.ops()[0].kind(), &GateKind::Phase(-0.6));
    }

    #[test]
    fn spin_flip_on_basis_states() {
        let s = run_statevector(&spin_flip_circuit(1, 0).unwrap(), &init_basis_state(1, "0").unwrap()).unwrap();
        assert!((s.amps()[1] - I).norm() < 1e-15);
        let s2 = run_statevector(&spin_flip_circuit(2, 0).unwrap(), &init_basis_state(2, "01").unwrap()).unwrap();
        assert!((s2.amplitude("10").unwrap().norm() - 1.0).abs() < 1e-15);
        let wide = spin_flip_circuit(2, 3).unwrap();
        assert_eq!(wide.num_qubits(), 5);
        assert_eq!(wide.ops()[1].targets(), &[4]);
    }
}
