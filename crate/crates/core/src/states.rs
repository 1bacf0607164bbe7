//! Bipartite states: validation, named families, Schmidt and Bloch forms.

use nalgebra::{DVector, Matrix3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    self, c, hermitian_deviation, identity, partial_trace, pauli, pauli_dot, tensor_product,
    ComplexMatrix, Party, HERMITIAN_TOL, PSD_CLAMP,
};

pub const TRACE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;
pub const TETRAHEDRON_TOL: f64 = 1e-12;

/// A validated state `ρ_AB` on `C^dA ⊗ C^dB`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: (usize, usize),
}

impl DensityMatrix {
    /// Checks, in order: shape, finiteness, Hermiticity (1e-10 per entry),
    /// no eigenvalue below `-1e-10`, unit trace (1e-10).
    pub fn validate(raw: ComplexMatrix, dims: (usize, usize)) -> Result<Self> {
        let n = dims.0 * dims.1;
        if dims.0 == 0 || dims.1 == 0 || raw.nrows() != n || raw.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims ({}, {})",
                raw.nrows(),
                raw.ncols(),
                dims.0,
                dims.1
            )));
        }
        if !matcore::is_finite(&raw) {
            return Err(Error::NonFinite);
        }
        let dev = hermitian_deviation(&raw);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let min = matcore::eigvalsh(&raw).last().copied().unwrap_or(0.0);
        if min < -PSD_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
        let tr = matcore::trace(&raw);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        Ok(Self { mat: raw, dims })
    }

    /// Wraps a matrix produced by a trace-preserving, positivity-preserving
    /// map of an already valid state.
    pub(crate) fn from_trusted(mat: ComplexMatrix, dims: (usize, usize)) -> Self {
        debug_assert_eq!(mat.nrows(), dims.0 * dims.1);
        Self {
            mat: matcore::hermitian_part(&mat),
            dims,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn reduced_a(&self) -> ComplexMatrix {
        partial_trace(&self.mat, self.dims, Party::B).expect("dims checked at construction")
    }

    pub fn reduced_b(&self) -> ComplexMatrix {
        partial_trace(&self.mat, self.dims, Party::A).expect("dims checked at construction")
    }

    pub fn purity(&self) -> f64 {
        matcore::hs_norm(&self.mat).powi(2)
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn local_unitary(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Self {
        let u = tensor_product(ua, ub);
        Self::from_trusted(matcore::conjugate(&u, &self.mat), self.dims)
    }

    /// `ρ_AB ⊗ ρ_C` with `C` grouped into party B.
    pub fn tensor(&self, ancilla: &ComplexMatrix) -> Self {
        let dc = ancilla.nrows();
        Self::from_trusted(
            tensor_product(&self.mat, ancilla),
            (self.dims.0, self.dims.1 * dc),
        )
    }

    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        Self::validate(tensor_product(rho_a, rho_b), (rho_a.nrows(), rho_b.nrows()))
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        Self {
            mat: identity(n) * c(1.0 / n as f64, 0.0),
            dims,
        }
    }
}

/// Normalized pure state on `C^dA ⊗ C^dB`, amplitude of `|i⟩|j⟩` at `i·dB + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
    dims: (usize, usize),
}

impl PureState {
    pub fn new(amplitudes: DVector<Complex64>, dims: (usize, usize)) -> Result<Self> {
        if amplitudes.len() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims ({}, {})",
                amplitudes.len(),
                dims.0,
                dims.1
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amplitudes: DVector<Complex64>, dims: (usize, usize)) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amplitudes / c(norm, 0.0), dims)
    }

    /// `Σ_k |kk⟩/√m` on `C^m ⊗ C^n`, `n ≥ m`.
    pub fn maximally_entangled(m: usize, n: usize) -> Result<Self> {
        if n < m || m == 0 {
            return Err(Error::DimensionMismatch(format!(
                "need n >= m, got ({m}, {n})"
            )));
        }
        let mut v = DVector::zeros(m * n);
        for k in 0..m {
            v[k * n + k] = c(1.0 / (m as f64).sqrt(), 0.0);
        }
        Self::new(v, (m, n))
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn density(&self) -> DensityMatrix {
        let mat = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_trusted(mat, self.dims)
    }
}

#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// `λ_k`, descending, summing to one; length `min(dA, dB)`.
    pub coefficients: Vec<f64>,
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
}

impl SchmidtForm {
    pub fn reconstruct(&self) -> DVector<Complex64> {
        let (da, db) = (self.basis_a.nrows(), self.basis_b.nrows());
        let mut v = DVector::zeros(da * db);
        for (k, &lam) in self.coefficients.iter().enumerate() {
            let a = self.basis_a.column(k);
            let b = self.basis_b.column(k);
            let w = lam.max(0.0).sqrt();
            for i in 0..da {
                for j in 0..db {
                    v[i * db + j] += a[i] * b[j] * w;
                }
            }
        }
        v
    }

    /// Number of coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > tol).count()
    }
}

/// Schmidt decomposition through the SVD of the `dA×dB` amplitude matrix.
pub fn schmidt(psi: &PureState) -> SchmidtForm {
    let (da, db) = psi.dims;
    let coeff = ComplexMatrix::from_fn(da, db, |i, j| psi.amplitudes[i * db + j]);
    let svd = coeff.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let r = da.min(db);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut basis_a = ComplexMatrix::zeros(da, r);
    let mut basis_b = ComplexMatrix::zeros(db, r);
    let mut coefficients = Vec::with_capacity(r);
    for (dst, &k) in order.iter().enumerate() {
        coefficients.push(svd.singular_values[k].powi(2));
        basis_a.set_column(dst, &u.column(k));
        // amplitude_ij = Σ_k s_k U_ik (V†)_kj
        for j in 0..db {
            basis_b[(j, dst)] = v_t[(k, j)];
        }
    }
    SchmidtForm {
        coefficients,
        basis_a,
        basis_b,
    }
}

/// Entanglement of formation of a pure state, `-Σ λ log₂ λ` with `0 log 0 = 0`.
pub fn eof_pure(s: &SchmidtForm) -> f64 {
    s.coefficients
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Two-qubit Pauli decomposition
/// `ρ = ¼(I⊗I + x·σ⊗I + I⊗y·σ + Σ T_ij σ_i⊗σ_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochForm {
    pub x: [f64; 3],
    pub y: [f64; 3],
    /// `T_ij = Tr ρ (σ_i ⊗ σ_j)`.
    pub t: [[f64; 3]; 3],
    /// Diagonal of `t`.
    pub c: [f64; 3],
}

impl BlochForm {
    pub fn bell_diagonal(c: [f64; 3]) -> Self {
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            t[i][i] = c[i];
        }
        Self {
            x: [0.0; 3],
            y: [0.0; 3],
            t,
            c,
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = identity(4);
        let id = pauli(0);
        m += tensor_product(&pauli_dot(&self.x), &id);
        m += tensor_product(&id, &pauli_dot(&self.y));
        for i in 0..3 {
            for j in 0..3 {
                if self.t[i][j] != 0.0 {
                    m += tensor_product(&pauli(i + 1), &pauli(j + 1)) * c(self.t[i][j], 0.0);
                }
            }
        }
        m * c(0.25, 0.0)
    }

    pub fn x_norm(&self) -> f64 {
        norm3(&self.x)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst = worst.max(self.t[i][j].abs());
                }
            }
        }
        worst
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dims {:?}",
            rho.dims
        )));
    }
    Ok(())
}

fn expect_real(m: &ComplexMatrix, op: &ComplexMatrix) -> f64 {
    matcore::trace(&(m * op)).re
}

pub fn bloch_decompose(rho: &DensityMatrix) -> Result<BlochForm> {
    require_two_qubits(rho)?;
    let id = pauli(0);
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        x[i] = expect_real(&rho.mat, &tensor_product(&pauli(i + 1), &id));
        y[i] = expect_real(&rho.mat, &tensor_product(&id, &pauli(i + 1)));
        for j in 0..3 {
            t[i][j] = expect_real(&rho.mat, &tensor_product(&pauli(i + 1), &pauli(j + 1)));
        }
    }
    let c = [t[0][0], t[1][1], t[2][2]];
    Ok(BlochForm { x, y, t, c })
}

/// SU(2) element acting on Bloch vectors as the rotation `r ∈ SO(3)`,
/// i.e. `U (n·σ) U† = (r n)·σ`. Built from the unit quaternion of `r`.
pub fn su2_from_rotation(r: &Matrix3<f64>) -> ComplexMatrix {
    let tr = r.trace();
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (r[(2, 1)] - r[(1, 2)]) / s;
        y = (r[(0, 2)] - r[(2, 0)]) / s;
        z = (r[(1, 0)] - r[(0, 1)]) / s;
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        w = (r[(2, 1)] - r[(1, 2)]) / s;
        x = 0.25 * s;
        y = (r[(0, 1)] + r[(1, 0)]) / s;
        z = (r[(0, 2)] + r[(2, 0)]) / s;
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        w = (r[(0, 2)] - r[(2, 0)]) / s;
        x = (r[(0, 1)] + r[(1, 0)]) / s;
        y = 0.25 * s;
        z = (r[(1, 2)] + r[(2, 1)]) / s;
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        w = (r[(1, 0)] - r[(0, 1)]) / s;
        x = (r[(0, 2)] + r[(2, 0)]) / s;
        y = (r[(1, 2)] + r[(2, 1)]) / s;
        z = 0.25 * s;
    }
    let norm = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / norm, x / norm, y / norm, z / norm);
    // U = w I - i (x σ1 + y σ2 + z σ3)
    identity(2) * c(w, 0.0) - pauli_dot(&[x, y, z]) * c(0.0, 1.0)
}

/// Local-unitary canonical form with a diagonal correlation tensor.
///
/// `T = O₁ D O₂ᵀ` with `O₁, O₂ ∈ SO(3)` (determinant signs pushed into `D`);
/// the state is rotated by the SU(2) lifts of `O₁ᵀ` on A and `O₂ᵀ` on B.
/// Returned `c` may carry signs.
pub fn canonicalize(rho: &DensityMatrix) -> Result<(DensityMatrix, BlochForm)> {
    let frame = canonical_frame(rho)?;
    Ok((frame.state, frame.form))
}

/// Canonical state together with the local unitaries that produced it:
/// `state = (ua ⊗ ub) ρ (ua ⊗ ub)†`.
#[derive(Debug, Clone)]
pub struct CanonicalFrame {
    pub state: DensityMatrix,
    pub form: BlochForm,
    pub ua: ComplexMatrix,
    pub ub: ComplexMatrix,
}

pub fn canonical_frame(rho: &DensityMatrix) -> Result<CanonicalFrame> {
    let form = bloch_decompose(rho)?;
    let t = Matrix3::from_fn(|i, j| form.t[i][j]);
    let svd = t.svd(true, true);
    let mut o1 = svd.u.expect("requested U");
    let mut o2 = svd.v_t.expect("requested V^T").transpose();
    if o1.determinant() < 0.0 {
        o1.column_mut(2).neg_mut();
    }
    if o2.determinant() < 0.0 {
        o2.column_mut(2).neg_mut();
    }
    let ua = su2_from_rotation(&o1.transpose());
    let ub = su2_from_rotation(&o2.transpose());
    let state = rho.local_unitary(&ua, &ub);
    let form = bloch_decompose(&state)?;
    Ok(CanonicalFrame {
        state,
        form,
        ua,
        ub,
    })
}

/// The four Bell-basis eigenvalues of `¼(I + Σ c_i σ_i⊗σ_i)`.
pub fn bell_diagonal_spectrum(c: [f64; 3]) -> [f64; 4] {
    let [c1, c2, c3] = c;
    [
        0.25 * (1.0 + c1 - c2 + c3),
        0.25 * (1.0 - c1 + c2 + c3),
        0.25 * (1.0 + c1 + c2 - c3),
        0.25 * (1.0 - c1 - c2 - c3),
    ]
}

pub fn in_tetrahedron(c: [f64; 3]) -> bool {
    c.iter().all(|v| v.is_finite())
        && bell_diagonal_spectrum(c)
            .iter()
            .all(|&l| l >= -TETRAHEDRON_TOL)
}

pub fn make_bell_diagonal(c: [f64; 3]) -> Result<DensityMatrix> {
    if !in_tetrahedron(c) {
        return Err(Error::OutsideTetrahedron(c));
    }
    Ok(DensityMatrix::from_trusted(
        BlochForm::bell_diagonal(c).to_matrix(),
        (2, 2),
    ))
}

/// Swap operator `Σ_ij |ij⟩⟨ji|` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = c(1.0, 0.0);
        }
    }
    f
}

/// `|Φ⟩ = Σ_i |ii⟩/√d`.
pub fn max_entangled_vector(d: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    v
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::OutOfRange {
            name: "d",
            value: d as f64,
            range: "[2, ∞)",
        });
    }
    Ok(())
}

/// Werner state `((d−x) I + (dx−1) F)/(d³−d)`, `x ∈ [−1, 1]`.
pub fn make_werner(d: usize, x: f64) -> Result<DensityMatrix> {
    check_dimension(d)?;
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            range: "[-1, 1]",
        });
    }
    let df = d as f64;
    let norm = df * df * df - df;
    let mat = identity(d * d) * c((df - x) / norm, 0.0)
        + swap_operator(d) * c((df * x - 1.0) / norm, 0.0);
    DensityMatrix::validate(mat, (d, d))
}

/// Isotropic state `((1−x) I + (d²x−1) |Φ⟩⟨Φ|)/(d²−1)`, `x ∈ [0, 1]`.
pub fn make_isotropic(d: usize, x: f64) -> Result<DensityMatrix> {
    check_dimension(d)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            range: "[0, 1]",
        });
    }
    let df = d as f64;
    let phi = max_entangled_vector(d);
    let proj = &phi * phi.adjoint();
    let norm = df * df - 1.0;
    let mat =
        identity(d * d) * c((1.0 - x) / norm, 0.0) + proj * c((df * df * x - 1.0) / norm, 0.0);
    DensityMatrix::validate(mat, (d, d))
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn random_pure<R: Rng + ?Sized>(dims: (usize, usize), rng: &mut R) -> PureState {
    let n = dims.0 * dims.1;
    let v = DVector::from_fn(n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::normalized(v, dims).expect("Gaussian vector is nonzero")
}

/// Ginibre-induced mixed state `G G† / Tr(G G†)` with `G` of width `rank`.
pub fn random_density<R: Rng + ?Sized>(
    dims: (usize, usize),
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n = dims.0 * dims.1;
    if rank == 0 || rank > n {
        return Err(Error::OutOfRange {
            name: "rank",
            value: rank as f64,
            range: "[1, dA·dB]",
        });
    }
    let g = matcore::random_gaussian_matrix(n, rank, rng);
    let gg = &g * g.adjoint();
    let tr = matcore::trace(&gg).re;
    Ok(DensityMatrix::from_trusted(gg / c(tr, 0.0), dims))
}

/// Random two-qubit state, local Bloch vector length drawn in the bulk.
pub fn random_two_qubit<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let rank = rng.gen_range(1..=4);
    random_density((2, 2), rank, rng).expect("rank within bounds")
}

/// Random physical Bell-diagonal correlation triple, uniform in the tetrahedron.
pub fn random_bell_diagonal<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    // Uniform mixture weights of the four Bell projectors.
    let mut w: [f64; 4] = [0.0; 4];
    for wi in w.iter_mut() {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        *wi = -u.ln();
    }
    let s: f64 = w.iter().sum();
    let p = w.map(|v| v / s);
    // Inverse of bell_diagonal_spectrum.
    [
        p[0] - p[1] + p[2] - p[3],
        -p[0] + p[1] + p[2] - p[3],
        p[0] + p[1] - p[2] - p[3],
    ]
}

/// JSON state file: `{"dims":[dA,dB], "re":[[...]], "im":[[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let n = m.nrows();
        let re = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].im).collect())
            .collect();
        Self {
            dims: [rho.dims.0, rho.dims.1],
            re,
            im,
        }
    }

    /// Raw matrix without physical validation; shape errors only.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.dims[0] * self.dims[1];
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !rows_ok(&self.re) || !rows_ok(&self.im) {
            return Err(Error::DimensionMismatch(format!(
                "re/im must be {n}x{n} for dims {:?}",
                self.dims
            )));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| {
            c(self.re[i][j], self.im[i][j])
        }))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::validate(self.to_matrix()?, (self.dims[0], self.dims[1]))
    }
}
