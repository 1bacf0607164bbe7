//! Measurement-induced nonlocality.
//!
//! Three measures share one maximization over locally invariant
//! measurements on party A:
//!
//! * `N1`: trace-norm disturbance `‖ρ − Π(ρ)‖₁`,
//! * `N2`: squared Hilbert-Schmidt disturbance `‖ρ − Π(ρ)‖₂²`,
//! * `NB`: Bures form `2(1 − √F(ρ, Π(ρ)))`.
//!
//! [`closed`] holds the analytic evaluators, [`numeric`] the brute-force
//! optimizers that serve as their oracles, and [`relations`] the identities
//! linking `N1` and `N2` on the symmetric families.

pub mod closed;
pub mod numeric;
pub mod relations;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix};
use crate::measure::{dephase_a, LocalMeasurement, DEFAULT_DEGENERACY_TOL};

pub use closed::{
    h_of_e, n1_isotropic, n1_pure_2xn, n1_pure_degenerate_mxm, n1_two_qubit, n1_werner,
    n2_two_qubit, two_qubit_formula, two_qubit_formula_l1, two_qubit_formula_literal,
};
pub use numeric::{n1_numeric, n2_numeric, nb_numeric, optimize};
pub use relations::{relation_check, RelationCase, RelationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    N1,
    N2,
    Nb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    NumericUnique,
    NumericSphere,
    NumericBlock,
}

impl Method {
    /// Whether the value came from a search rather than an exact evaluation.
    pub fn is_search(self) -> bool {
        matches!(self, Method::NumericSphere | Method::NumericBlock)
    }
}

#[derive(Debug, Clone)]
pub struct MinResult {
    pub value: f64,
    pub method: Method,
    /// Maximizing measurement, when one is known.
    pub optimal: Option<LocalMeasurement>,
    /// Bloch direction of the maximizer for qubit-sphere searches.
    pub direction: Option<[f64; 3]>,
    pub iterations: usize,
}

impl MinResult {
    pub(crate) fn closed(value: f64, optimal: Option<LocalMeasurement>) -> Self {
        Self {
            value: value.max(0.0),
            method: Method::ClosedForm,
            optimal,
            direction: None,
            iterations: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Sphere grid resolution `G`: `G + 1` polar by `G` azimuthal samples.
    pub sphere_grid: usize,
    /// Maximum refinement rounds per restart.
    pub refine_iters: usize,
    pub restarts: usize,
    /// Stop refining once a round improves the value by less than this.
    pub tol: f64,
    pub seed: u64,
    /// Eigenvalue gap of `ρ_A` treated as a degeneracy.
    pub degeneracy_tol: f64,
    /// `‖x‖` below which the two-qubit closed form takes its `x = 0` branch.
    pub branch_threshold: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            sphere_grid: 64,
            refine_iters: 20,
            restarts: 4,
            tol: 1e-10,
            seed: 0,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            branch_threshold: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sphere_grid < 8 {
            return Err(Error::InvalidConfig(format!(
                "sphere_grid must be at least 8, got {}",
                self.sphere_grid
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if [self.degeneracy_tol, self.branch_threshold]
            .iter()
            .any(|v| v.is_nan() || *v < 0.0)
        {
            return Err(Error::InvalidConfig(
                "thresholds must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Disturbance of a fixed state under one measurement, for one measure.
pub(crate) struct Objective<'a> {
    rho: &'a ComplexMatrix,
    db: usize,
    measure: Measure,
    sqrt_rho: Option<ComplexMatrix>,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(rho: &'a ComplexMatrix, db: usize, measure: Measure) -> Result<Self> {
        let sqrt_rho = match measure {
            Measure::Nb => Some(matcore::psd_sqrt(rho)?),
            _ => None,
        };
        Ok(Self {
            rho,
            db,
            measure,
            sqrt_rho,
        })
    }

    pub(crate) fn eval(&self, m: &LocalMeasurement) -> f64 {
        let post = dephase_a(self.rho, m, self.db);
        match self.measure {
            Measure::N1 => matcore::trace_norm(&(self.rho - &post)),
            Measure::N2 => matcore::hs_norm(&(self.rho - &post)).powi(2),
            Measure::Nb => {
                let root = self.sqrt_rho.as_ref().expect("computed for Nb");
                let inner = root * &post * root;
                let tr: f64 = matcore::eigvalsh(&inner)
                    .iter()
                    .map(|v| v.max(0.0).sqrt())
                    .sum();
                let fid = (tr * tr).clamp(0.0, 1.0);
                2.0 * (1.0 - fid.sqrt())
            }
        }
    }
}

/// Disturbance `‖ρ − Π(ρ)‖` of `rho` under the measurement `m` for `measure`.
pub fn disturbance(
    rho: &crate::states::DensityMatrix,
    m: &LocalMeasurement,
    measure: Measure,
) -> Result<f64> {
    if m.dim() != rho.dims().0 {
        return Err(Error::DimensionMismatch(format!(
            "measurement on C^{} for party A of dimension {}",
            m.dim(),
            rho.dims().0
        )));
    }
    Ok(Objective::new(rho.matrix(), rho.dims().1, measure)?.eval(m))
}
