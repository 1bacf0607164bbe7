//! Recognizes the state families that have closed-form MIN values.

use minkit::matcore::{hermitian_eig, max_abs_diff};
use minkit::states::{
    bloch_decompose, make_bell_diagonal, make_isotropic, make_werner, max_entangled_vector,
    swap_operator, DensityMatrix, PureState,
};
use serde::Serialize;

/// Residual on each family's defining equations accepted as membership.
pub const DETECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Pure {
        #[serde(skip)]
        state: PureState,
    },
    BellDiagonal {
        c: [f64; 3],
    },
    Werner {
        d: usize,
        x: f64,
    },
    Isotropic {
        d: usize,
        x: f64,
    },
    TwoQubit,
    Generic,
}

/// Tries pure, Bell-diagonal, Werner, isotropic and generic two-qubit, in that order.
pub fn detect(rho: &DensityMatrix) -> Family {
    let (da, db) = rho.dims();
    if (rho.purity() - 1.0).abs() <= DETECTION_TOL {
        if let Some(state) = dominant_vector(rho) {
            return Family::Pure { state };
        }
    }
    if (da, db) == (2, 2) {
        if let Ok(form) = bloch_decompose(rho) {
            let x_or_y = form
                .x
                .iter()
                .chain(&form.y)
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if x_or_y <= DETECTION_TOL && form.max_off_diagonal() <= DETECTION_TOL {
                let c = [form.t[0][0], form.t[1][1], form.t[2][2]];
                if make_bell_diagonal(c).is_ok() {
                    return Family::BellDiagonal { c };
                }
            }
        }
    }
    if da == db {
        let d = da;
        let x = (rho.matrix() * swap_operator(d)).trace().re;
        if matches_family(rho, make_werner(d, x.clamp(-1.0, 1.0))) {
            return Family::Werner {
                d,
                x: x.clamp(-1.0, 1.0),
            };
        }
        let phi = max_entangled_vector(d);
        let x = (phi.adjoint() * rho.matrix() * &phi)[(0, 0)].re;
        if matches_family(rho, make_isotropic(d, x.clamp(0.0, 1.0))) {
            return Family::Isotropic {
                d,
                x: x.clamp(0.0, 1.0),
            };
        }
    }
    if (da, db) == (2, 2) {
        Family::TwoQubit
    } else {
        Family::Generic
    }
}

fn matches_family(rho: &DensityMatrix, candidate: minkit::Result<DensityMatrix>) -> bool {
    candidate.is_ok_and(|m| max_abs_diff(m.matrix(), rho.matrix()) <= DETECTION_TOL)
}

fn dominant_vector(rho: &DensityMatrix) -> Option<PureState> {
    let eig = hermitian_eig(rho.matrix()).ok()?;
    PureState::normalized(eig.vectors.column(0).into_owned(), rho.dims()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use minkit::states::random_two_qubit;
    use rand::SeedableRng;

    #[test]
    fn detection_order() {
        assert!(matches!(
            detect(&make_bell_diagonal([0.45, 0.3, 0.2]).unwrap()),
            Family::BellDiagonal { .. }
        ));
        // The singlet is pure, Bell-diagonal and Werner; purity wins.
        assert!(matches!(
            detect(&make_bell_diagonal([-1.0, -1.0, -1.0]).unwrap()),
            Family::Pure { .. }
        ));
        match detect(&make_werner(3, 0.7).unwrap()) {
            Family::Werner { d, x } => assert!(d == 3 && (x - 0.7).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        match detect(&make_isotropic(3, 0.4).unwrap()) {
            Family::Isotropic { d, x } => assert!(d == 3 && (x - 0.4).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let rho = loop {
            let r = random_two_qubit(&mut rng);
            if r.purity() < 0.99 {
                break r;
            }
        };
        assert!(matches!(detect(&rho), Family::TwoQubit));
        assert!(matches!(
            detect(&DensityMatrix::maximally_mixed((2, 3))),
            Family::Generic
        ));
    }
}
