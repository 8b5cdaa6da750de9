//! Small dense complex matrices.
//!
//! Everything here is sized for the oracle side of the simulator: the largest
//! matrix built in practice is a 2^7 x 2^7 propagator, so storage is a flat
//! row-major `Vec` and the eigensolver is a plain cyclic Jacobi sweep.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `max |U†U - I|` for anything accepted as unitary.
pub const EPS_UNITARY: f64 = 1e-10;
/// Tolerance on `max |A - A†|` for anything accepted as Hermitian.
pub const EPS_HERM: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-15;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.data[k * n + k] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting empty shapes, length
    /// mismatches and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Square matrix from nested rows. Panics on ragged input; meant for literals.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self {
            rows: N,
            cols: N,
            data,
        }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (k, &d) in diag.iter().enumerate() {
            m.data[k * n + k] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self.get(k, k)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A†|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    /// `max |U†U - I|`; infinite for non-square input.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let mut s = ZERO;
                for r in 0..n {
                    s += self.data[r * n + a].conj() * self.data[r * n + b];
                }
                let target = if a == b { ONE } else { ZERO };
                dev = dev.max((s - target).norm());
            }
        }
        dev
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`; `a` indexes the most significant block.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = DenseMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out.data[(ar * b.rows + br) * cols + ac * b.cols + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    out
}

/// Square matrix with `max |A - A†| <= EPS_HERM`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(DenseMatrix);

impl Hermitian {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let deviation = m.hermitian_deviation();
        if deviation > EPS_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }
}

/// Square matrix with `max |U†U - I| <= EPS_UNITARY`.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary(DenseMatrix);

impl Unitary {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "unitary matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let deviation = m.unitary_deviation();
        if deviation > EPS_UNITARY {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DenseMatrix::identity(n))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }
}

/// Spectral decomposition `H = V diag(values) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Unitary,
}

impl Eigen {
    /// `V diag(e^{-i λ_k t}) V†`.
    pub fn propagator(&self, t: f64) -> Unitary {
        let v = self.vectors.matrix();
        let n = v.rows();
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let mut scaled = v.clone();
        for r in 0..n {
            for (c, ph) in phases.iter().enumerate() {
                scaled.data[r * n + c] *= ph;
            }
        }
        Unitary(&scaled * &v.adjoint())
    }

    /// `exp(-iHt)·psi` without forming the full propagator.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let v = self.vectors.matrix();
        let n = v.rows();
        assert_eq!(psi.len(), n);
        let mut coeffs = vec![ZERO; n];
        for r in 0..n {
            let x = psi[r];
            if x == ZERO {
                continue;
            }
            for (c, coeff) in coeffs.iter_mut().enumerate() {
                *coeff += v.data[r * n + c].conj() * x;
            }
        }
        for (coeff, &l) in coeffs.iter_mut().zip(&self.values) {
            *coeff *= C64::from_polar(1.0, -l * t);
        }
        v.apply(&coeffs)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation to the resulting
/// 2x2 block.
pub fn eig_hermitian(h: &Hermitian) -> Result<Eigen> {
    let n = h.dim();
    let mut a = h.matrix().data.clone();
    // Diagonal is real for Hermitian input; drop any residual imaginary part.
    for k in 0..n {
        a[k * n + k] = C64::new(a[k * n + k].re, 0.0);
    }
    let mut v = DenseMatrix::identity(n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = JACOBI_REL_TOL * scale;

    let off_norm = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let g00 = C64::new(c, 0.0);
                let g01 = C64::new(s, 0.0);
                let g10 = -phase.conj() * s;
                let g11 = phase.conj() * c;

                for k in 0..n {
                    let x = a[k * n + p];
                    let y = a[k * n + q];
                    a[k * n + p] = x * g00 + y * g10;
                    a[k * n + q] = x * g01 + y * g11;
                }
                for k in 0..n {
                    let x = a[p * n + k];
                    let y = a[q * n + k];
                    a[p * n + k] = g00.conj() * x + g10.conj() * y;
                    a[q * n + k] = g01.conj() * x + g11.conj() * y;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);

                for k in 0..n {
                    let x = v.data[k * n + p];
                    let y = v.data[k * n + q];
                    v.data[k * n + p] = x * g00 + y * g10;
                    v.data[k * n + q] = x * g01 + y * g11;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > tol {
            return Err(Error::NoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_norm: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&k| a[k * n + k].re).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.data[r * n + dst] = v.data[r * n + src];
        }
    }
    Ok(Eigen {
        values,
        vectors: Unitary::new(vectors)?,
    })
}

/// `exp(-iHt)` through the spectral decomposition of `H`.
pub fn expm_hermitian(h: &Hermitian, t: f64) -> Result<Unitary> {
    let eig = eig_hermitian(h)?;
    Unitary::new(eig.propagator(t).into_matrix())
}

/// `min_φ ‖U - e^{iφ} V‖_F`.
///
/// The optimal phase is `conj(tr(U†V))/|tr(U†V)|`; the norm is then taken
/// directly rather than through `sqrt(2d - 2|tr(U†V)|)`, which loses about
/// eight digits to cancellation when the two matrices agree.
///
/// Panics if the dimensions differ.
pub fn distance_up_to_global_phase(u: &Unitary, v: &Unitary) -> f64 {
    phase_distance(u.matrix(), v.matrix())
}

pub(crate) fn phase_distance(u: &DenseMatrix, v: &DenseMatrix) -> f64 {
    assert_eq!(
        (u.rows, u.cols),
        (v.rows, v.cols),
        "distance_up_to_global_phase: dimension mismatch"
    );
    let overlap: C64 = u.data.iter().zip(&v.data).map(|(a, b)| a.conj() * b).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        ONE
    };
    u.data
        .iter()
        .zip(&v.data)
        .map(|(a, b)| (a - phase * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::{DenseMatrix, C64, I, ONE, ZERO};

    pub fn id() -> DenseMatrix {
        DenseMatrix::identity(2)
    }

    pub fn x() -> DenseMatrix {
        DenseMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> DenseMatrix {
        DenseMatrix::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> DenseMatrix {
        DenseMatrix::from_rows([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// `[X, Y, Z]`.
    pub fn xyz() -> [DenseMatrix; 3] {
        [x(), y(), z()]
    }
}
