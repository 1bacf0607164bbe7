//! Brute-force maximization over locally invariant measurements.
//!
//! Dispatch follows the spectrum of `ρ_A`: a nondegenerate spectrum admits a
//! single rank-one invariant measurement, evaluated directly. A fully
//! degenerate qubit is searched over the Bloch sphere (grid, then golden
//! section refinement); any other degeneracy is searched over block
//! unitaries by compass search with step halving.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::{self, c, unitary_exp, ComplexMatrix};
use crate::measure::{
    block_measurement, direction, invariant_family, sphere_measurement, LocalMeasurement,
    MeasurementFamily,
};
use crate::states::DensityMatrix;

use super::{Measure, Method, MinResult, Objective, OptimizerConfig};

pub const MAX_TOTAL_DIM: usize = 64;

/// Golden-section line searches stop at this bracket width (radians).
const LINE_TOL: f64 = 1e-9;
const BLOCK_INITIAL_STEP: f64 = 0.5;
const BLOCK_MIN_STEP: f64 = 1e-7;
const BLOCK_MAX_SWEEPS: usize = 400;

pub fn n1_numeric(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MinResult> {
    optimize(rho, Measure::N1, cfg)
}

pub fn n2_numeric(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MinResult> {
    optimize(rho, Measure::N2, cfg)
}

pub fn nb_numeric(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MinResult> {
    optimize(rho, Measure::Nb, cfg)
}

pub fn optimize(rho: &DensityMatrix, measure: Measure, cfg: &OptimizerConfig) -> Result<MinResult> {
    cfg.validate()?;
    if rho.dim() > MAX_TOTAL_DIM {
        return Err(Error::DimensionBound(rho.dim()));
    }
    let objective = Objective::new(rho.matrix(), rho.dims().1, measure)?;
    let family = invariant_family(&rho.reduced_a(), cfg.degeneracy_tol)?;
    let result = match family {
        MeasurementFamily::Unique(m) => MinResult {
            value: objective.eval(&m),
            method: Method::NumericUnique,
            optimal: Some(m),
            direction: None,
            iterations: 1,
        },
        MeasurementFamily::QubitSphere => sphere_search(&objective, cfg),
        ref fam @ MeasurementFamily::BlockDegenerate { .. } => block_search(&objective, fam, cfg)?,
    };
    Ok(MinResult {
        value: result.value.max(0.0),
        ..result
    })
}

/// Deterministic maximum: larger value wins, ties go to the earlier index.
fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

fn sphere_value(objective: &Objective<'_>, theta: f64, phi: f64) -> f64 {
    let m = sphere_measurement(direction(theta, phi)).expect("unit direction");
    objective.eval(&m)
}

/// Maximum of a function on `[lo, hi]` by golden-section search. Returns the
/// best point seen, including the bracket ends.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    while b - a > LINE_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
        evals += 1;
    }
    (best.0, best.1, evals)
}

fn sphere_search(objective: &Objective<'_>, cfg: &OptimizerConfig) -> MinResult {
    let g = cfg.sphere_grid;
    let spacing = PI / g as f64;
    // θ on g + 1 points including both poles; φ on [0, π) since ±ê coincide.
    let cells: Vec<(usize, usize)> = (0..=g).flat_map(|i| (0..g).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| sphere_value(objective, i as f64 * spacing, j as f64 * spacing))
        .collect();
    let mut evaluations = values.len();

    let mut ranked: Vec<usize> = (0..cells.len()).collect();
    // Stable sort keeps lexicographic (θ, φ) order among equal values.
    ranked.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let starts: Vec<usize> = ranked.into_iter().take(cfg.restarts).collect();

    let refined: Vec<(f64, f64, f64, usize)> = starts
        .par_iter()
        .map(|&k| {
            let (i, j) = cells[k];
            let mut theta = i as f64 * spacing;
            let mut phi = j as f64 * spacing;
            let mut best = values[k];
            let mut evals = 0;
            for _ in 0..cfg.refine_iters {
                let before = best;
                let (t, v, n) = golden_max(
                    |t| sphere_value(objective, t, phi),
                    theta - spacing,
                    theta + spacing,
                );
                evals += n;
                if v > best {
                    theta = t;
                    best = v;
                }
                let (p, v, n) = golden_max(
                    |p| sphere_value(objective, theta, p),
                    phi - spacing,
                    phi + spacing,
                );
                evals += n;
                if v > best {
                    phi = p;
                    best = v;
                }
                if best - before < cfg.tol {
                    break;
                }
            }
            (theta, phi, best, evals)
        })
        .collect();

    let mut winner = (0usize, f64::NEG_INFINITY);
    for (r, &(_, _, v, n)) in refined.iter().enumerate() {
        evaluations += n;
        winner = better(winner, (r, v));
    }
    let (theta, phi, value, _) = refined[winner.0];
    let e = direction(theta, phi);
    MinResult {
        value,
        method: Method::NumericSphere,
        optimal: Some(sphere_measurement(e).expect("unit direction")),
        direction: Some(e),
        iterations: evaluations,
    }
}

/// Basis of Hermitian generators for an `s×s` block.
fn generator_basis(s: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(s * s);
    for i in 0..s {
        let mut h = ComplexMatrix::zeros(s, s);
        h[(i, i)] = c(1.0, 0.0);
        out.push(h);
    }
    for i in 0..s {
        for j in (i + 1)..s {
            let mut re = ComplexMatrix::zeros(s, s);
            re[(i, j)] = c(1.0, 0.0);
            re[(j, i)] = c(1.0, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(s, s);
            im[(i, j)] = c(0.0, 1.0);
            im[(j, i)] = c(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

struct BlockRun {
    value: f64,
    unitaries: Vec<ComplexMatrix>,
    evaluations: usize,
}

fn block_search(
    objective: &Objective<'_>,
    family: &MeasurementFamily,
    cfg: &OptimizerConfig,
) -> Result<MinResult> {
    let MeasurementFamily::BlockDegenerate { basis, blocks } = family else {
        unreachable!("dispatched on kind");
    };
    let generators: Vec<Vec<ComplexMatrix>> = blocks.iter().map(|&s| generator_basis(s)).collect();

    let runs: Vec<BlockRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start: Vec<ComplexMatrix> = if r == 0 {
                blocks.iter().map(|&s| matcore::identity(s)).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
                blocks
                    .iter()
                    .map(|&s| matcore::random_unitary(s, &mut rng))
                    .collect()
            };
            compass_search(objective, basis, blocks, &generators, start, cfg)
        })
        .collect::<Result<_>>()?;

    let mut winner = (0usize, f64::NEG_INFINITY);
    let mut evaluations = 0;
    for (r, run) in runs.iter().enumerate() {
        evaluations += run.evaluations;
        winner = better(winner, (r, run.value));
    }
    let best = &runs[winner.0];
    Ok(MinResult {
        value: best.value,
        method: Method::NumericBlock,
        optimal: Some(block_measurement(basis, blocks, &best.unitaries)),
        direction: None,
        iterations: evaluations,
    })
}

fn compass_search(
    objective: &Objective<'_>,
    basis: &ComplexMatrix,
    blocks: &[usize],
    generators: &[Vec<ComplexMatrix>],
    mut current: Vec<ComplexMatrix>,
    cfg: &OptimizerConfig,
) -> Result<BlockRun> {
    let eval = |u: &[ComplexMatrix]| objective.eval(&block_measurement(basis, blocks, u));
    let mut value = eval(&current);
    let mut evaluations = 1;
    let mut step = BLOCK_INITIAL_STEP;
    for _ in 0..BLOCK_MAX_SWEEPS {
        let before = value;
        for (b, gens) in generators.iter().enumerate() {
            for g in gens {
                for sign in [1.0, -1.0] {
                    let kick = unitary_exp(&(g * c(sign * step, 0.0)))?;
                    let mut trial = current.clone();
                    trial[b] = &current[b] * kick;
                    let v = eval(&trial);
                    evaluations += 1;
                    if v > value + cfg.tol {
                        value = v;
                        current = trial;
                        break;
                    }
                }
            }
        }
        if value - before <= cfg.tol {
            step *= 0.5;
            if step < BLOCK_MIN_STEP {
                break;
            }
        }
    }
    Ok(BlockRun {
        value,
        unitaries: current,
        evaluations,
    })
}

/// Evaluate a fixed measurement, for audits that compare against the search.
pub fn evaluate(rho: &DensityMatrix, m: &LocalMeasurement, measure: Measure) -> Result<f64> {
    super::disturbance(rho, m, measure)
}
