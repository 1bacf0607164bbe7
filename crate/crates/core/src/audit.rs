//! Oracle and relation audits: every closed form checked against the
//! numeric optimizer on seeded random inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::matcore::random_unitary;
use crate::measure::LocalMeasurement;
use crate::min::{
    self, relation_check, two_qubit_formula, two_qubit_formula_l1, two_qubit_formula_literal,
    Measure, Method, OptimizerConfig, RelationCase,
};
use crate::states::{
    canonical_frame, make_bell_diagonal, make_isotropic, make_werner, random_bell_diagonal,
    random_pure, random_two_qubit,
};

/// Closed form vs `NumericUnique`: both are exact evaluations.
pub const UNIQUE_ORACLE_TOL: f64 = 1e-8;
/// Closed form vs a sphere or block search.
pub const SEARCH_ORACLE_TOL: f64 = 1e-4;
pub const RELATION_TOL: f64 = 1e-10;
pub const PURE_RELATION_TOL: f64 = 1e-8;
/// Minimum `‖x‖` for a two-qubit oracle sample.
pub const MIN_BLOCH_NORM: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct OracleCase {
    pub index: usize,
    pub family: &'static str,
    pub closed: f64,
    pub numeric: f64,
    pub method: Method,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Residual of the term-by-term `(√χ₊ + √χ₋)/(2‖x‖)` evaluation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_residual: Option<f64>,
    /// Residual of the sum-of-absolute-values reading of the norms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoarseCase {
    pub index: usize,
    pub d: usize,
    pub rank_one_optimum: f64,
    pub best_coarse: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub cases: Vec<OracleCase>,
    pub coarse: Vec<CoarseCase>,
    pub max_unique_residual: f64,
    pub max_search_residual: f64,
    pub max_literal_residual: f64,
    pub max_l1_residual: f64,
    pub failures: usize,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn oracle_case(
    index: usize,
    family: &'static str,
    closed: f64,
    numeric: min::MinResult,
    alternatives: Option<(f64, f64)>,
) -> OracleCase {
    let tolerance = if numeric.method.is_search() {
        SEARCH_ORACLE_TOL
    } else {
        UNIQUE_ORACLE_TOL
    };
    let residual = (closed - numeric.value).abs();
    OracleCase {
        index,
        family,
        closed,
        numeric: numeric.value,
        method: numeric.method,
        residual,
        tolerance,
        pass: residual <= tolerance,
        literal_residual: alternatives.map(|(lit, _)| (lit - numeric.value).abs()),
        l1_residual: alternatives.map(|(_, l1)| (l1 - numeric.value).abs()),
    }
}

/// `n_two_qubit` random two-qubit states with `‖x‖ > 0.05`, half as many
/// Bell-diagonal states, and a coarse-measurement check on `d = 3` Werner
/// and isotropic states.
pub fn oracle_audit(n_two_qubit: usize, seed: u64, cfg: &OptimizerConfig) -> Result<OracleReport> {
    let mut rng = rng_for(seed, 0);
    let mut generic = Vec::with_capacity(n_two_qubit);
    while generic.len() < n_two_qubit {
        let rho = random_two_qubit(&mut rng);
        if crate::states::bloch_decompose(&rho)?.x_norm() > MIN_BLOCH_NORM {
            generic.push(rho);
        }
    }
    let bell: Vec<[f64; 3]> = (0..n_two_qubit.div_ceil(2))
        .map(|_| random_bell_diagonal(&mut rng))
        .collect();

    let mut cases: Vec<OracleCase> = generic
        .par_iter()
        .enumerate()
        .map(|(i, rho)| {
            let frame = canonical_frame(rho)?;
            let closed = two_qubit_formula(frame.form.x, frame.form.c);
            let literal = two_qubit_formula_literal(frame.form.x, frame.form.c);
            let l1 = two_qubit_formula_l1(frame.form.x, frame.form.c);
            let numeric = min::n1_numeric(rho, cfg)?;
            Ok(oracle_case(
                i,
                "two-qubit",
                closed,
                numeric,
                Some((literal, l1)),
            ))
        })
        .collect::<Result<_>>()?;
    let offset = cases.len();
    let bell_cases: Vec<OracleCase> = bell
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let closed = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let numeric = min::n1_numeric(&make_bell_diagonal(*c)?, cfg)?;
            Ok(oracle_case(
                offset + i,
                "bell-diagonal",
                closed,
                numeric,
                None,
            ))
        })
        .collect::<Result<_>>()?;
    cases.extend(bell_cases);

    let coarse = coarse_audit(seed, cfg)?;
    let max_of =
        |f: &dyn Fn(&OracleCase) -> Option<f64>| cases.iter().filter_map(f).fold(0.0f64, f64::max);
    Ok(OracleReport {
        seed,
        max_unique_residual: max_of(&|c| (!c.method.is_search()).then_some(c.residual)),
        max_search_residual: max_of(&|c| c.method.is_search().then_some(c.residual)),
        max_literal_residual: max_of(&|c| c.literal_residual),
        max_l1_residual: max_of(&|c| c.l1_residual),
        failures: cases.iter().filter(|c| !c.pass).count()
            + coarse.iter().filter(|c| !c.pass).count(),
        cases,
        coarse,
    })
}

/// Random coarse measurements (one rank-2 and one rank-1 projector, from
/// Haar bases) never beat the rank-1 optimum on `d = 3` Werner and
/// isotropic states, whose reduced states are maximally mixed.
fn coarse_audit(seed: u64, cfg: &OptimizerConfig) -> Result<Vec<CoarseCase>> {
    let states = [
        make_werner(3, -0.6)?,
        make_werner(3, 0.9)?,
        make_isotropic(3, 0.8)?,
        make_isotropic(3, 0.1)?,
    ];
    states
        .par_iter()
        .enumerate()
        .map(|(index, rho)| {
            let optimum = min::n1_numeric(rho, cfg)?.value;
            let mut rng = rng_for(seed, 1 + index as u64);
            let mut best = 0.0f64;
            for _ in 0..32 {
                let basis = random_unitary(3, &mut rng);
                let coarse = LocalMeasurement::from_basis(&basis).coarsen(&[0, 0, 1])?;
                best = best.max(min::disturbance(rho, &coarse, Measure::N1)?);
            }
            Ok(CoarseCase {
                index,
                d: 3,
                rank_one_optimum: optimum,
                best_coarse: best,
                pass: best <= optimum + SEARCH_ORACLE_TOL,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationAuditCase {
    pub family: String,
    #[serde(flatten)]
    pub report: min::RelationReport,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationAudit {
    pub seed: u64,
    pub cases: Vec<RelationAuditCase>,
    pub max_residual: f64,
    pub failures: usize,
}

/// `x` on `points` equally spaced values over `[lo, hi]`.
pub fn parameter_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1).max(1) as f64)
        .collect()
}

/// Eq. (16) on `n_random` Bell-diagonal states, the Werner identity for
/// `d = 2..4`, the isotropic identity for `d = 2, 3` (11-point grids), and
/// `N1 = √(2 N2)` on `n_random / 2` random `2×n` pure states.
pub fn relations_audit(n_random: usize, seed: u64, cfg: &OptimizerConfig) -> Result<RelationAudit> {
    let mut rng = rng_for(seed, 0);
    let mut inputs: Vec<(String, RelationCase, f64)> = Vec::new();
    for _ in 0..n_random {
        let c = random_bell_diagonal(&mut rng);
        inputs.push((
            "bell-diagonal".into(),
            RelationCase::BellDiagonal(c),
            RELATION_TOL,
        ));
    }
    for d in 2..=4 {
        for x in parameter_grid(-1.0, 1.0, 11) {
            inputs.push((
                format!("werner-d{d}"),
                RelationCase::Werner { d, x },
                RELATION_TOL,
            ));
        }
    }
    for d in 2..=3 {
        for x in parameter_grid(0.0, 1.0, 11) {
            inputs.push((
                format!("isotropic-d{d}"),
                RelationCase::Isotropic { d, x },
                RELATION_TOL,
            ));
        }
    }
    for _ in 0..n_random.div_ceil(2) {
        let n = rng.gen_range(2..=3);
        let psi = random_pure((2, n), &mut rng);
        inputs.push((
            format!("pure-2x{n}"),
            RelationCase::Pure(psi),
            PURE_RELATION_TOL,
        ));
    }
    let cases: Vec<RelationAuditCase> = inputs
        .into_par_iter()
        .map(|(family, case, tolerance)| {
            let report = relation_check(&case, cfg)?;
            Ok(RelationAuditCase {
                family,
                pass: report.residual <= tolerance,
                report,
                tolerance,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RelationAudit {
        seed,
        max_residual: cases.iter().map(|c| c.report.residual).fold(0.0, f64::max),
        failures: cases.iter().filter(|c| !c.pass).count(),
        cases,
    })
}
