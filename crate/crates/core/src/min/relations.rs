//! Identities between the trace and Hilbert-Schmidt measures on families
//! where both are known. `N1` comes from the closed forms; `N2` from the
//! numeric optimizer, so each report compares two independent routes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::{make_bell_diagonal, make_isotropic, make_werner, schmidt, PureState};

use super::closed::{n1_isotropic, n1_pure_2xn, n1_werner};
use super::numeric::n2_numeric;
use super::OptimizerConfig;

#[derive(Debug, Clone)]
pub enum RelationCase {
    BellDiagonal([f64; 3]),
    Werner { d: usize, x: f64 },
    Isotropic { d: usize, x: f64 },
    Pure(PureState),
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub identity: &'static str,
    pub n1: f64,
    pub n2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl RelationReport {
    fn new(identity: &'static str, n1: f64, n2: f64, rhs: f64) -> Self {
        Self {
            identity,
            n1,
            n2,
            lhs: n1,
            rhs,
            residual: (n1 - rhs).abs(),
        }
    }
}

pub fn relation_check(case: &RelationCase, cfg: &OptimizerConfig) -> Result<RelationReport> {
    match case {
        RelationCase::BellDiagonal(c) => {
            let rho = make_bell_diagonal(*c)?;
            let mut a = c.map(f64::abs);
            a.sort_by(|p, q| q.total_cmp(p));
            let n1 = a[0];
            let n2 = n2_numeric(&rho, cfg)?.value;
            let rhs = (4.0 * n2 - a[1] * a[1]).max(0.0).sqrt();
            Ok(RelationReport::new("N1 = sqrt(4 N2 - c0^2)", n1, n2, rhs))
        }
        RelationCase::Werner { d, x } => {
            let n1 = n1_werner(*d, *x)?;
            let n2 = n2_numeric(&make_werner(*d, *x)?, cfg)?.value;
            let df = *d as f64;
            let rhs = (df * (df - 1.0) * n2).sqrt();
            Ok(RelationReport::new("N1 = sqrt(d(d-1) N2)", n1, n2, rhs))
        }
        RelationCase::Isotropic { d, x } => {
            let n1 = n1_isotropic(*d, *x)?;
            let n2 = n2_numeric(&make_isotropic(*d, *x)?, cfg)?.value;
            let df = *d as f64;
            let rhs = 2.0 * ((df - 1.0) * n2 / df).sqrt();
            Ok(RelationReport::new(
                "N1 = 2 sqrt((d-1) N2 / d)",
                n1,
                n2,
                rhs,
            ))
        }
        RelationCase::Pure(psi) => {
            if psi.dims().0 != 2 {
                return Err(Error::UnsupportedFamily(format!(
                    "pure-state relation needs dA = 2, got {:?}",
                    psi.dims()
                )));
            }
            let n1 = n1_pure_2xn(&schmidt(psi))?;
            let n2 = n2_numeric(&psi.density(), cfg)?.value;
            Ok(RelationReport::new(
                "N1 = sqrt(2 N2)",
                n1,
                n2,
                (2.0 * n2).sqrt(),
            ))
        }
    }
}
