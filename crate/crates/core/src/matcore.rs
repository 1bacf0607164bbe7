//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Everything here is a pure
//! function of its inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Per-entry tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in `(-PSD_CLAMP, 0)` are rounding noise and are clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;

const PHASE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Pauli matrix `σ_i`; index 0 is the 2×2 identity.
pub fn pauli(i: usize) -> ComplexMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let data = match i {
        0 => [one, z, z, one],
        1 => [z, one, one, z],
        2 => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        3 => [one, z, z, -one],
        _ => panic!("Pauli index {i} out of range"),
    };
    ComplexMatrix::from_row_slice(2, 2, &data)
}

/// `v·σ` for a real 3-vector.
pub fn pauli_dot(v: &[f64; 3]) -> ComplexMatrix {
    (1..=3).fold(ComplexMatrix::zeros(2, 2), |acc, i| {
        acc + pauli(i) * c(v[i - 1], 0.0)
    })
}

pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise deviation `|m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Partial trace over `traced` for an operator on `C^dA ⊗ C^dB`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    traced: Party,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = da * db;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for dims ({da}, {db})",
            m.nrows(),
            m.ncols()
        )));
    }
    let out = match traced {
        Party::B => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Party::A => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(out)
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending. Each eigenvector is rephased so that
/// its first component with modulus above 1e-12 is real and positive.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|v| v)
    }

    /// Rebuild `f(M) = V f(Λ) V†` for a real function of the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(f(v));
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        if let Some(z) = col.iter().find(|z| z.norm() > PHASE_EPS).copied() {
            let phase = z.conj() / z.norm();
            col *= phase;
        }
        vectors.set_column(dst, &col);
    }
    Ok(HermEig { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, descending. No eigenvectors are formed.
pub fn eigvalsh(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Trace norm `Tr √(X†X)`.
///
/// Hermitian inputs (the only kind the measures produce) go through the
/// eigenvalue route `Σ|λ_i|`; anything else falls back to singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    if m.is_square() && hermitian_deviation(m) <= HERMITIAN_TOL * scale {
        eigvalsh(m).iter().map(|v| v.abs()).sum()
    } else {
        trace_norm_svd(m)
    }
}

/// Trace norm as the sum of singular values, valid for any matrix.
pub fn trace_norm_svd(m: &ComplexMatrix) -> f64 {
    m.singular_values().iter().sum()
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian positive square root. Eigenvalues in `(-1e-10, 0)` are clamped.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    if let Some(&min) = eig.values.last() {
        if min < -PSD_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    Ok(eig.map_spectrum(|v| v.max(0.0).sqrt()))
}

/// Uhlmann fidelity `‖√ρ √σ‖₁²`, clamped to `[0, 1]`.
///
/// Eigenvalues within rounding of zero are set to zero before the square
/// roots, so rank-deficient arguments keep full precision.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() || !rho.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            rho.shape(),
            sigma.shape()
        )));
    }
    let product = rank_aware_sqrt(rho)? * rank_aware_sqrt(sigma)?;
    let tr = trace_norm_svd(&product);
    Ok((tr * tr).clamp(0.0, 1.0))
}

fn rank_aware_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    if let Some(&min) = eig.values.last() {
        if min < -PSD_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    let floor = 64.0 * f64::EPSILON * eig.values.first().copied().unwrap_or(0.0).abs().max(1.0);
    Ok(eig.map_spectrum(|v| if v <= floor { 0.0 } else { v.sqrt() }))
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for x in q.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
    }
    q
}

/// `exp(iH)` for Hermitian `H`.
pub fn unitary_exp(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let phase = Complex64::from_polar(1.0, eig.values[j]);
        for x in scaled.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    Ok(&scaled * eig.vectors.adjoint())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Conjugation `U M U†`.
pub fn conjugate(u: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    u * m * u.adjoint()
}
