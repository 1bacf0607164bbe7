//! Locally invariant projective measurements on party A.

use crate::error::{Error, Result};
use crate::matcore::{
    self, c, hermitian_eig, identity, pauli_dot, tensor_product, unitary_exp, ComplexMatrix,
};
use crate::states::DensityMatrix;

/// Tolerance for projector algebra (idempotence, orthogonality, completeness).
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Invariance residual `‖Σ Π ρ_A Π − ρ_A‖₂` accepted as zero.
pub const INVARIANCE_TOL: f64 = 1e-9;

/// Default gap below which adjacent eigenvalues of `ρ_A` count as degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

/// A complete set of orthogonal projectors on `C^dA`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMeasurement {
    projectors: Vec<ComplexMatrix>,
}

impl LocalMeasurement {
    pub fn new(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::InvalidMeasurement("no projectors".into()))?;
        let d = first.nrows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (k, p) in projectors.iter().enumerate() {
            if p.shape() != (d, d) {
                return Err(Error::InvalidMeasurement(format!(
                    "projector {k} has shape {:?}, expected ({d}, {d})",
                    p.shape()
                )));
            }
            if matcore::hermitian_deviation(p) > PROJECTOR_TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "projector {k} is not Hermitian"
                )));
            }
            if matcore::max_abs_diff(&(p * p), p) > PROJECTOR_TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "projector {k} is not idempotent"
                )));
            }
            for (j, q) in projectors.iter().enumerate().skip(k + 1) {
                if q.shape() == (d, d) && (p * q).iter().any(|z| z.norm() > PROJECTOR_TOL) {
                    return Err(Error::InvalidMeasurement(format!(
                        "projectors {k} and {j} are not orthogonal"
                    )));
                }
            }
            sum += p;
        }
        if matcore::max_abs_diff(&sum, &identity(d)) > PROJECTOR_TOL {
            return Err(Error::InvalidMeasurement(
                "projectors do not sum to identity".into(),
            ));
        }
        Ok(Self { projectors })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(basis: &ComplexMatrix) -> Self {
        let projectors = (0..basis.ncols())
            .map(|k| {
                let v = basis.column(k);
                v * v.adjoint()
            })
            .collect();
        Self { projectors }
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// `Σ_k Π_k M Π_k` on the A-side operator `M`.
    pub fn dephase(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.projectors
            .iter()
            .fold(ComplexMatrix::zeros(m.nrows(), m.ncols()), |acc, p| {
                acc + p * m * p
            })
    }

    /// Merge groups of projectors into a coarser measurement. `groups[k]` is
    /// the group label of projector `k`.
    pub fn coarsen(&self, groups: &[usize]) -> Result<Self> {
        if groups.len() != self.projectors.len() {
            return Err(Error::InvalidMeasurement(
                "group labels do not match projectors".into(),
            ));
        }
        let labels = groups.iter().copied().max().map_or(0, |m| m + 1);
        let d = self.dim();
        let mut merged = vec![ComplexMatrix::zeros(d, d); labels];
        for (p, &g) in self.projectors.iter().zip(groups) {
            merged[g] += p;
        }
        merged.retain(|p| p.iter().any(|z| z.norm() > 0.0));
        Self::new(merged)
    }
}

/// Post-measurement state `Σ_k (Π_k ⊗ I) ρ (Π_k ⊗ I)`.
pub fn apply_measurement(rho: &DensityMatrix, m: &LocalMeasurement) -> Result<DensityMatrix> {
    let (da, db) = rho.dims();
    if m.dim() != da {
        return Err(Error::DimensionMismatch(format!(
            "measurement on C^{} applied to party A of dimension {da}",
            m.dim()
        )));
    }
    Ok(DensityMatrix::from_trusted(
        dephase_a(rho.matrix(), m, db),
        rho.dims(),
    ))
}

pub(crate) fn dephase_a(rho: &ComplexMatrix, m: &LocalMeasurement, db: usize) -> ComplexMatrix {
    let id_b = identity(db);
    let n = rho.nrows();
    m.projectors
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, p| {
            let big = tensor_product(p, &id_b);
            acc + &big * rho * &big
        })
}

pub fn is_invariant(m: &LocalMeasurement, rho_a: &ComplexMatrix) -> bool {
    m.dim() == rho_a.nrows() && matcore::hs_norm(&(m.dephase(rho_a) - rho_a)) <= INVARIANCE_TOL
}

/// Measurement `{(I ± ê·σ)/2}` along a unit Bloch direction.
pub fn sphere_measurement(e_hat: [f64; 3]) -> Result<LocalMeasurement> {
    let norm = crate::states::norm3(&e_hat);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVector(norm));
    }
    let es = pauli_dot(&e_hat);
    let half = c(0.5, 0.0);
    Ok(LocalMeasurement {
        projectors: vec![(identity(2) + &es) * half, (identity(2) - &es) * half],
    })
}

/// Unit vector `(sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FamilyKind {
    Unique,
    QubitSphere,
    BlockDegenerate,
}

/// The set of rank-one measurements that leave `ρ_A` invariant.
#[derive(Debug, Clone)]
pub enum MeasurementFamily {
    /// Nondegenerate `ρ_A`: its spectral projectors.
    Unique(LocalMeasurement),
    /// `dA = 2` with `ρ_A ∝ I`: every `{(I ± ê·σ)/2}`.
    QubitSphere,
    /// Spectral projectors refined by a free unitary inside each degenerate
    /// eigenspace. `basis` columns are eigenvectors grouped so that block `b`
    /// occupies the next `blocks[b]` columns.
    BlockDegenerate {
        basis: ComplexMatrix,
        blocks: Vec<usize>,
    },
}

impl MeasurementFamily {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Self::Unique(_) => FamilyKind::Unique,
            Self::QubitSphere => FamilyKind::QubitSphere,
            Self::BlockDegenerate { .. } => FamilyKind::BlockDegenerate,
        }
    }

    /// Real parameter count of the block unitaries (zero for the other kinds).
    pub fn block_parameter_count(&self) -> usize {
        match self {
            Self::BlockDegenerate { blocks, .. } => blocks.iter().map(|s| s * s).sum(),
            _ => 0,
        }
    }

    /// Member of a `BlockDegenerate` family for the given generator
    /// coordinates, each block unitary being `exp(i H_b)`.
    pub fn block_member(&self, params: &[f64]) -> Result<LocalMeasurement> {
        let Self::BlockDegenerate { basis, blocks } = self else {
            return Err(Error::InvalidMeasurement(
                "not a block-degenerate family".into(),
            ));
        };
        let unitaries = block_unitaries(blocks, params)?;
        Ok(block_measurement(basis, blocks, &unitaries))
    }
}

/// Hermitian `s×s` matrix from `s²` real coordinates: diagonal first, then
/// real and imaginary parts of the strict upper triangle.
pub fn hermitian_from_params(s: usize, params: &[f64]) -> ComplexMatrix {
    assert_eq!(params.len(), s * s);
    let mut h = ComplexMatrix::zeros(s, s);
    let mut it = params.iter().copied();
    for i in 0..s {
        h[(i, i)] = c(it.next().unwrap(), 0.0);
    }
    for i in 0..s {
        for j in (i + 1)..s {
            let re = it.next().unwrap();
            let im = it.next().unwrap();
            h[(i, j)] = c(re, im);
            h[(j, i)] = c(re, -im);
        }
    }
    h
}

pub fn block_unitaries(blocks: &[usize], params: &[f64]) -> Result<Vec<ComplexMatrix>> {
    let needed: usize = blocks.iter().map(|s| s * s).sum();
    if params.len() != needed {
        return Err(Error::InvalidMeasurement(format!(
            "expected {needed} block parameters, got {}",
            params.len()
        )));
    }
    let mut offset = 0;
    blocks
        .iter()
        .map(|&s| {
            let h = hermitian_from_params(s, &params[offset..offset + s * s]);
            offset += s * s;
            unitary_exp(&h)
        })
        .collect()
}

/// Rank-one projectors onto `basis · blockdiag(unitaries)`.
pub fn block_measurement(
    basis: &ComplexMatrix,
    blocks: &[usize],
    unitaries: &[ComplexMatrix],
) -> LocalMeasurement {
    let d = basis.nrows();
    let mut rotation = ComplexMatrix::zeros(d, d);
    let mut offset = 0;
    for (&s, u) in blocks.iter().zip(unitaries) {
        rotation.view_mut((offset, offset), (s, s)).copy_from(u);
        offset += s;
    }
    LocalMeasurement::from_basis(&(basis * rotation))
}

/// Classify the invariant measurements of `ρ_A` by its spectrum.
pub fn invariant_family(rho_a: &ComplexMatrix, degeneracy_tol: f64) -> Result<MeasurementFamily> {
    let eig = hermitian_eig(rho_a)?;
    let d = eig.values.len();
    let mut blocks = vec![1usize];
    for w in eig.values.windows(2) {
        if (w[0] - w[1]).abs() <= degeneracy_tol {
            *blocks.last_mut().unwrap() += 1;
        } else {
            blocks.push(1);
        }
    }
    Ok(if blocks.len() == d {
        MeasurementFamily::Unique(LocalMeasurement::from_basis(&eig.vectors))
    } else if d == 2 {
        MeasurementFamily::QubitSphere
    } else {
        MeasurementFamily::BlockDegenerate {
            basis: eig.vectors,
            blocks,
        }
    })
}
