//! Local channels on party B, flip-channel dynamics, the frozen-MIN region,
//! and the monotonicity audit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{self, c, identity, pauli, tensor_product, ComplexMatrix};
use crate::min::{self, OptimizerConfig};
use crate::states::{
    bell_diagonal_spectrum, bloch_decompose, in_tetrahedron, make_bell_diagonal, random_two_qubit,
    DensityMatrix,
};

pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Violations below this are rounding, not counterexamples.
pub const MONOTONICITY_TOL: f64 = 1e-8;

/// Extra allowance when a search (not an exact evaluation) produced `N1`.
pub const SEARCH_SLACK: f64 = 2e-4;

/// Completely positive trace-preserving map as Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let d = ops
            .first()
            .ok_or(Error::NotTracePreserving(f64::INFINITY))?
            .nrows();
        if ops.iter().any(|k| k.shape() != (d, d)) {
            return Err(Error::DimensionMismatch(
                "Kraus operators differ in shape".into(),
            ));
        }
        let ch = Self {
            ops,
            label: label.into(),
        };
        let resid = ch.completeness_residual();
        if resid > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(resid));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            ops: vec![identity(d)],
            label: "identity".into(),
        }
    }

    /// Replaces every input by `I/d`.
    pub fn fully_depolarizing(d: usize) -> Self {
        let w = c(1.0 / (d as f64).sqrt(), 0.0);
        let mut ops = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = ComplexMatrix::zeros(d, d);
                k[(i, j)] = w;
                ops.push(k);
            }
        }
        Self {
            ops,
            label: "fully-depolarizing".into(),
        }
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// Largest entry of `Σ K†K − I`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        matcore::max_abs_diff(&sum, &identity(d))
    }

    /// Action on a single system.
    pub fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.ops
            .iter()
            .fold(ComplexMatrix::zeros(m.nrows(), m.ncols()), |acc, k| {
                acc + k * m * k.adjoint()
            })
    }
}

fn apply_local(rho: &DensityMatrix, ch: &KrausChannel, on_b: bool) -> Result<DensityMatrix> {
    let (da, db) = rho.dims();
    let target = if on_b { db } else { da };
    if ch.dim() != target {
        return Err(Error::DimensionMismatch(format!(
            "channel on C^{} applied to party of dimension {target}",
            ch.dim()
        )));
    }
    let n = rho.dim();
    let out = ch.ops.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
        let big = if on_b {
            tensor_product(&identity(da), k)
        } else {
            tensor_product(k, &identity(db))
        };
        acc + &big * rho.matrix() * big.adjoint()
    });
    Ok(DensityMatrix::from_trusted(out, rho.dims()))
}

/// `Σ_k (I ⊗ K_k) ρ (I ⊗ K_k)†`.
pub fn apply_channel_b(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    apply_local(rho, ch, true)
}

/// `Σ_k (K_k ⊗ I) ρ (K_k ⊗ I)†`.
pub fn apply_channel_a(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    apply_local(rho, ch, false)
}

/// Bit flip (1), bit-phase flip (2) or phase flip (3) with Bloch multiplier
/// `p`: Kraus operators `√((1+p)/2) I` and `√((1−p)/2) σ_axis`.
pub fn flip_channel(axis: usize, p: f64) -> Result<KrausChannel> {
    check_axis(axis)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    let keep = ((1.0 + p) / 2.0).sqrt();
    let flip = ((1.0 - p) / 2.0).sqrt();
    let name = ["bit-flip", "bit-phase-flip", "phase-flip"][axis - 1];
    KrausChannel::new(
        vec![identity(2) * c(keep, 0.0), pauli(axis) * c(flip, 0.0)],
        name,
    )
}

fn check_axis(axis: usize) -> Result<()> {
    if !(1..=3).contains(&axis) {
        return Err(Error::OutOfRange {
            name: "axis",
            value: axis as f64,
            range: "{1, 2, 3}",
        });
    }
    Ok(())
}

/// `ρ_AB ⊗ ρ_C`, with the ancilla joining party B.
pub fn attach_ancilla(rho: &DensityMatrix, rho_c: &ComplexMatrix) -> Result<DensityMatrix> {
    let ancilla = DensityMatrix::validate(rho_c.clone(), (1, rho_c.nrows()))?;
    Ok(rho.tensor(ancilla.matrix()))
}

/// Seeded random channel: the `kraus_count` stacked `d×d` blocks of an
/// isometry obtained by orthonormalizing a complex Gaussian `(d·k)×d` matrix.
pub fn random_channel<R: Rng + ?Sized>(
    d: usize,
    kraus_count: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if kraus_count == 0 {
        return Err(Error::OutOfRange {
            name: "kraus_count",
            value: 0.0,
            range: "[1, ∞)",
        });
    }
    let g = matcore::random_gaussian_matrix(d * kraus_count, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        if z.norm() > 0.0 {
            let phase = z / z.norm();
            for x in q.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
    }
    let ops = (0..kraus_count)
        .map(|k| q.rows(k * d, d).into_owned())
        .collect();
    KrausChannel::new(ops, format!("random-{kraus_count}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    One,
    Two,
}

/// Multiplier applied to the two damped correlations after time `γt`.
pub fn flip_multiplier(sided: Sided, gamma_t: f64) -> f64 {
    match sided {
        Sided::One => (-gamma_t).exp(),
        Sided::Two => (-2.0 * gamma_t).exp(),
    }
}

/// `c_axis` is kept and the other two components are scaled by `p`.
pub fn evolve_correlations(c0: [f64; 3], axis: usize, p: f64) -> [f64; 3] {
    let mut out = c0;
    for (i, v) in out.iter_mut().enumerate() {
        if i + 1 != axis {
            *v *= p;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsTrace {
    /// Times in units of `1/γ`.
    pub times: Vec<f64>,
    pub c_t: Vec<[f64; 3]>,
    pub n1_t: Vec<f64>,
    pub n2_t: Vec<f64>,
    pub channel: String,
    pub sided: Sided,
    /// Largest deviation between the analytic `c(t)` and explicit Kraus evolution.
    pub max_evolution_residual: f64,
}

/// `γt` grid of `points` equally spaced values on `[0, end]`.
pub fn linear_grid(end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| end * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Bell-diagonal state under a flip channel, on B only or on both sides.
pub fn dynamics_sweep(
    c0: [f64; 3],
    axis: usize,
    sided: Sided,
    gamma_t: &[f64],
    cfg: &OptimizerConfig,
) -> Result<DynamicsTrace> {
    check_axis(axis)?;
    let rho0 = make_bell_diagonal(c0)?;
    let rows: Vec<([f64; 3], f64, f64, f64)> = gamma_t
        .par_iter()
        .map(|&t| {
            if t.is_nan() || t < 0.0 {
                return Err(Error::OutOfRange {
                    name: "gamma_t",
                    value: t,
                    range: "[0, ∞)",
                });
            }
            let analytic = evolve_correlations(c0, axis, flip_multiplier(sided, t));
            let ch = flip_channel(axis, (-t).exp())?;
            let mut explicit = apply_channel_b(&rho0, &ch)?;
            if sided == Sided::Two {
                explicit = apply_channel_a(&explicit, &ch)?;
            }
            let form = bloch_decompose(&explicit)?;
            let mut resid = 0.0f64;
            for i in 0..3 {
                resid = resid.max((form.x[i]).abs()).max(form.y[i].abs());
                for j in 0..3 {
                    let expected = if i == j { analytic[i] } else { 0.0 };
                    resid = resid.max((form.t[i][j] - expected).abs());
                }
            }
            let state = make_bell_diagonal(analytic)?;
            let n1 = min::n1_two_qubit(&state, cfg)?.value;
            let n2 = min::n2_two_qubit(&state, cfg)?.value;
            Ok((analytic, n1, n2, resid))
        })
        .collect::<Result<_>>()?;

    Ok(DynamicsTrace {
        times: gamma_t.to_vec(),
        c_t: rows.iter().map(|r| r.0).collect(),
        n1_t: rows.iter().map(|r| r.1).collect(),
        n2_t: rows.iter().map(|r| r.2).collect(),
        channel: flip_channel(axis, 1.0)?.label().to_string(),
        sided,
        max_evolution_residual: rows.iter().fold(0.0, |a, r| a.max(r.3)),
    })
}

/// Position of a correlation triple relative to the frozen region of a flip
/// channel, the set where `|c_axis|` is the largest component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionFlag {
    Inside,
    Boundary,
    Outside,
}

impl RegionFlag {
    /// Boundary points are frozen too: `|c_axis|` ties for the maximum.
    pub fn is_frozen(self) -> bool {
        !matches!(self, RegionFlag::Outside)
    }
}

pub const REGION_TOL: f64 = 1e-12;

pub fn freezing_flag(c: [f64; 3], axis: usize) -> Result<RegionFlag> {
    check_axis(axis)?;
    if !in_tetrahedron(c) {
        return Ok(RegionFlag::Outside);
    }
    let k = axis - 1;
    let lead = c[k].abs();
    let rival = (0..3)
        .filter(|&i| i != k)
        .map(|i| c[i].abs())
        .fold(0.0f64, f64::max);
    let on_face = bell_diagonal_spectrum(c)
        .iter()
        .any(|&l| l.abs() <= REGION_TOL);
    Ok(if lead < rival - REGION_TOL {
        RegionFlag::Outside
    } else if (lead - rival).abs() <= REGION_TOL || on_face {
        RegionFlag::Boundary
    } else {
        RegionFlag::Inside
    })
}

/// A convex polytope as vertices plus faces (vertex indices, unordered).
#[derive(Debug, Clone, Serialize)]
pub struct Polytope {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
}

/// Half-space `n·c + offset ≥ 0`.
#[derive(Debug, Clone, Copy)]
struct HalfSpace {
    n: [f64; 3],
    offset: f64,
}

impl HalfSpace {
    fn eval(&self, p: &[f64; 3]) -> f64 {
        self.n[0] * p[0] + self.n[1] * p[1] + self.n[2] * p[2] + self.offset
    }
}

fn tetrahedron_halfspaces() -> [HalfSpace; 4] {
    // One per Bell-basis eigenvalue being nonnegative.
    [
        HalfSpace {
            n: [1.0, -1.0, 1.0],
            offset: 1.0,
        },
        HalfSpace {
            n: [-1.0, 1.0, 1.0],
            offset: 1.0,
        },
        HalfSpace {
            n: [1.0, 1.0, -1.0],
            offset: 1.0,
        },
        HalfSpace {
            n: [-1.0, -1.0, -1.0],
            offset: 1.0,
        },
    ]
}

fn solve3(rows: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let m = nalgebra::Matrix3::from_fn(|i, j| rows[i][j]);
    if m.determinant().abs() < 1e-12 {
        return None;
    }
    let x = m
        .lu()
        .solve(&nalgebra::Vector3::new(rhs[0], rhs[1], rhs[2]))?;
    Some([x[0], x[1], x[2]])
}

/// Vertex enumeration of `{p : h(p) ≥ 0 ∀h}` by intersecting plane triples.
fn polytope(halfspaces: &[HalfSpace]) -> Polytope {
    let tol = 1e-12;
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let n = halfspaces.len();
    for a in 0..n {
        for b in (a + 1)..n {
            for d in (b + 1)..n {
                let hs = [halfspaces[a], halfspaces[b], halfspaces[d]];
                let Some(p) = solve3(hs.map(|h| h.n), hs.map(|h| -h.offset)) else {
                    continue;
                };
                let p = p.map(|v| if v.abs() < tol { 0.0 } else { v });
                if halfspaces.iter().all(|h| h.eval(&p) >= -tol)
                    && !vertices
                        .iter()
                        .any(|q| (0..3).all(|i| (q[i] - p[i]).abs() < 1e-9))
                {
                    vertices.push(p);
                }
            }
        }
    }
    vertices.sort_by(|p, q| {
        p.iter()
            .zip(q)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for h in halfspaces {
        let on: Vec<usize> = (0..vertices.len())
            .filter(|&i| h.eval(&vertices[i]).abs() < 1e-9)
            .collect();
        if on.len() >= 3 && !faces.contains(&on) {
            faces.push(on);
        }
    }
    Polytope { vertices, faces }
}

/// The two polytopes (`c_axis ≥ 0` and `c_axis ≤ 0`) where a flip channel
/// along `axis` leaves the trace MIN of a Bell-diagonal state frozen.
pub fn freezing_polytopes(axis: usize) -> Result<[Polytope; 2]> {
    check_axis(axis)?;
    let k = axis - 1;
    let build = |sign: f64| {
        let mut hs = tetrahedron_halfspaces().to_vec();
        for i in (0..3).filter(|&i| i != k) {
            for s in [1.0, -1.0] {
                let mut n = [0.0; 3];
                n[k] = sign;
                n[i] = -s;
                hs.push(HalfSpace { n, offset: 0.0 });
            }
        }
        polytope(&hs)
    };
    Ok([build(1.0), build(-1.0)])
}

/// Tetrahedron points on a `resolution³` lattice over `[−1, 1]³` with flags.
pub fn sample_region(axis: usize, resolution: usize) -> Result<Vec<([f64; 3], RegionFlag)>> {
    check_axis(axis)?;
    if resolution < 2 {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution as f64,
            range: "[2, ∞)",
        });
    }
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / (resolution - 1) as f64;
    let mut out = Vec::new();
    for i in 0..resolution {
        for j in 0..resolution {
            for l in 0..resolution {
                let p = [coord(i), coord(j), coord(l)];
                if in_tetrahedron(p) {
                    out.push((p, freezing_flag(p, axis)?));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditCase {
    pub index: usize,
    pub kraus_count: usize,
    pub before: f64,
    pub after: f64,
    pub allowance: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub seed: u64,
    pub cases: Vec<AuditCase>,
    pub violations: usize,
    /// Largest `after − before` over all cases (negative when all decrease).
    pub max_increase: f64,
}

/// Check `N1(ρ) ≥ N1(E_B(ρ))` on `n_states × n_channels` seeded pairs of
/// random two-qubit states and random channels with 1–4 Kraus operators.
pub fn monotonicity_audit(
    n_states: usize,
    n_channels: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<MonotonicityReport> {
    if n_states == 0 || n_channels == 0 {
        return Err(Error::OutOfRange {
            name: "count",
            value: 0.0,
            range: "[1, ∞)",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_states * n_channels);
    for _ in 0..n_states {
        let rho = random_two_qubit(&mut rng);
        for _ in 0..n_channels {
            let k = rng.gen_range(1..=4);
            pairs.push((rho.clone(), random_channel(2, k, &mut rng)?));
        }
    }
    let cases: Vec<AuditCase> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, (rho, ch))| {
            let before = min::n1_numeric(rho, cfg)?;
            let after = min::n1_numeric(&apply_channel_b(rho, ch)?, cfg)?;
            let searched = before.method.is_search() || after.method.is_search();
            let allowance = MONOTONICITY_TOL + if searched { SEARCH_SLACK } else { 0.0 };
            Ok(AuditCase {
                index,
                kraus_count: ch.ops().len(),
                before: before.value,
                after: after.value,
                allowance,
                violation: after.value > before.value + allowance,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MonotonicityReport {
        seed,
        violations: cases.iter().filter(|c| c.violation).count(),
        max_increase: cases
            .iter()
            .map(|c| c.after - c.before)
            .fold(f64::NEG_INFINITY, f64::max),
        cases,
    })
}
