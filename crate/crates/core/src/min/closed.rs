//! Closed-form evaluators.

use crate::error::{Error, Result};
use crate::matcore::conjugate;
use crate::measure::{sphere_measurement, LocalMeasurement};
use crate::states::{canonical_frame, norm3, DensityMatrix, SchmidtForm};

use super::{Measure, MinResult, Objective, OptimizerConfig};

/// Schmidt coefficients below this count as zero.
const SCHMIDT_ZERO: f64 = 1e-12;

/// `N1 = 2√(λ₁λ₂)` for a pure state with at most two Schmidt terms.
pub fn n1_pure_2xn(s: &SchmidtForm) -> Result<f64> {
    let nonzero = s.rank(SCHMIDT_ZERO);
    if nonzero > 2 {
        return Err(Error::TooManySchmidtTerms(nonzero));
    }
    let l1 = s.coefficients.first().copied().unwrap_or(1.0);
    let l2 = s.coefficients.get(1).copied().unwrap_or(0.0).max(0.0);
    if (l1 - l2).abs() <= SCHMIDT_ZERO {
        // ρ_A ∝ I; every rank-one basis is equivalent to the Schmidt basis.
        return Ok(1.0);
    }
    Ok(2.0 * (l1 * l2).sqrt())
}

/// `N1 = 2(m−1)/m` for a maximally entangled `m×n` pure state.
pub fn n1_pure_degenerate_mxm(m: usize) -> f64 {
    let m = m as f64;
    2.0 * (m - 1.0) / m
}

/// `N1 = |dx − 1|/(d + 1)` for the Werner state.
pub fn n1_werner(d: usize, x: f64) -> Result<f64> {
    check_family(d, x, -1.0)?;
    let d = d as f64;
    Ok((d * x - 1.0).abs() / (d + 1.0))
}

/// `N1 = 2|d²x − 1|/(d(d + 1))` for the isotropic state.
pub fn n1_isotropic(d: usize, x: f64) -> Result<f64> {
    check_family(d, x, 0.0)?;
    let d = d as f64;
    Ok(2.0 * (d * d * x - 1.0).abs() / (d * (d + 1.0)))
}

fn check_family(d: usize, x: f64, lower: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::OutOfRange {
            name: "d",
            value: d as f64,
            range: "[2, ∞)",
        });
    }
    if !(lower..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            range: if lower < 0.0 { "[-1, 1]" } else { "[0, 1]" },
        });
    }
    Ok(())
}

/// Two-qubit trace MIN for `x ≠ 0` in the canonical frame where the
/// correlation tensor is `diag(c)`; `‖·‖` is the Euclidean norm.
///
/// Evaluated as the largest singular value of `diag(c)` restricted to the
/// plane orthogonal to `x`, which equals `(√χ₊ + √χ₋)/(2‖x‖)` but keeps full
/// precision where `χ₋ = 0` (pure states).
pub fn two_qubit_formula(x: [f64; 3], c: [f64; 3]) -> f64 {
    let xn = norm3(&x);
    let xh = x.map(|v| v / xn);
    let k = (0..3)
        .min_by(|&i, &j| xh[i].abs().total_cmp(&xh[j].abs()))
        .expect("three entries");
    let mut axis = [0.0; 3];
    axis[k] = 1.0;
    let e1 = cross(&xh, &axis);
    let e1n = norm3(&e1);
    let e1 = e1.map(|v| v / e1n);
    let e2 = cross(&xh, &e1);
    let u: [f64; 3] = std::array::from_fn(|i| c[i] * e1[i]);
    let v: [f64; 3] = std::array::from_fn(|i| c[i] * e2[i]);
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let (uu, vv, uv) = (dot(&u, &u), dot(&v, &v), dot(&u, &v));
    let disc = ((uu - vv).powi(2) + 4.0 * uv * uv).sqrt();
    ((uu + vv + disc) / 2.0).sqrt()
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `(√χ₊ + √χ₋)/(2‖x‖)` with `χ± = α ± 2√β‖x‖`, term by term.
pub fn two_qubit_formula_literal(x: [f64; 3], c: [f64; 3]) -> f64 {
    formula_with_norms(x, c, norm3(&x), norm3(&c))
}

/// The literal expression with every vector norm read as a sum of absolute
/// values. Kept only to report how far that reading is from the oracle.
pub fn two_qubit_formula_l1(x: [f64; 3], c: [f64; 3]) -> f64 {
    let l1 = |v: &[f64; 3]| v.iter().map(|a| a.abs()).sum::<f64>();
    formula_with_norms(x, c, l1(&x), l1(&c))
}

fn formula_with_norms(x: [f64; 3], c: [f64; 3], xn: f64, cn: f64) -> f64 {
    let sq = |v: f64| v * v;
    let alpha = sq(cn) * sq(xn) - (0..3).map(|i| sq(c[i]) * sq(x[i])).sum::<f64>();
    let beta = sq(x[0]) * sq(c[1]) * sq(c[2])
        + sq(x[1]) * sq(c[2]) * sq(c[0])
        + sq(x[2]) * sq(c[0]) * sq(c[1]);
    let chi_plus = alpha + 2.0 * beta.sqrt() * xn;
    let chi_minus = alpha - 2.0 * beta.sqrt() * xn;
    (chi_plus.max(0.0).sqrt() + chi_minus.max(0.0).sqrt()) / (2.0 * xn)
}

fn sorted_abs_desc(c: [f64; 3]) -> [f64; 3] {
    let mut a = c.map(f64::abs);
    a.sort_by(|p, q| q.total_cmp(p));
    a
}

fn argmin_abs(c: [f64; 3]) -> usize {
    (0..3)
        .min_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()))
        .expect("three entries")
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// Spectral measurement of `ρ_A = (I + x·σ)/2`.
fn bloch_axis_measurement(x: [f64; 3]) -> Result<LocalMeasurement> {
    let n = norm3(&x);
    sphere_measurement(x.map(|v| v / n))
}

/// Measurement along the canonical axis `k`, pulled back to the input frame.
fn canonical_axis_measurement(k: usize, ua: &crate::matcore::ComplexMatrix) -> LocalMeasurement {
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let m = sphere_measurement(e).expect("unit axis");
    let back = ua.adjoint();
    LocalMeasurement::new(m.projectors().iter().map(|p| conjugate(&back, p)).collect())
        .expect("unitary image of a measurement")
}

/// Trace MIN of a two-qubit state from its canonical form.
///
/// Uses the `x = 0` branch `max|c_i|` when `‖x‖ < cfg.branch_threshold`.
pub fn n1_two_qubit(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MinResult> {
    require_two_qubits(rho)?;
    let frame = canonical_frame(rho)?;
    let x = frame.form.x;
    let c = frame.form.c;
    if norm3(&x) < cfg.branch_threshold {
        let value = sorted_abs_desc(c)[0];
        let m = canonical_axis_measurement(argmin_abs(c), &frame.ua);
        Ok(MinResult::closed(value, Some(m)))
    } else {
        let original_x = crate::states::bloch_decompose(rho)?.x;
        let m = bloch_axis_measurement(original_x)?;
        Ok(MinResult::closed(two_qubit_formula(x, c), Some(m)))
    }
}

/// Hilbert-Schmidt MIN of a two-qubit state.
///
/// For `x = 0` this is `(c₊² + c₀²)/4`; otherwise the squared disturbance
/// at the unique invariant measurement.
pub fn n2_two_qubit(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MinResult> {
    require_two_qubits(rho)?;
    let form = crate::states::bloch_decompose(rho)?;
    if form.x_norm() < cfg.branch_threshold {
        let frame = canonical_frame(rho)?;
        let [cp, c0, _] = sorted_abs_desc(frame.form.c);
        let m = canonical_axis_measurement(argmin_abs(frame.form.c), &frame.ua);
        Ok(MinResult::closed((cp * cp + c0 * c0) / 4.0, Some(m)))
    } else {
        let m = bloch_axis_measurement(form.x)?;
        let value = Objective::new(rho.matrix(), 2, Measure::N2)?.eval(&m);
        Ok(MinResult::closed(value, Some(m)))
    }
}

/// `h(ê) = Q + √H` for a Bell-diagonal correlation triple, with `ê` given in
/// the frame whose axes carry `(c₊, c₀, c₋)`. The maximal disturbance along
/// `ê` is `½√(2h(ê))`.
pub fn h_of_e(e_hat: [f64; 3], c: [f64; 3]) -> Result<f64> {
    let norm = norm3(&e_hat);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVector(norm));
    }
    let [cp, c0, cm] = sorted_abs_desc(c);
    let (p2, z2, m2) = (cp * cp, c0 * c0, cm * cm);
    let theta = e_hat[2].clamp(-1.0, 1.0).acos();
    let phi = e_hat[1].atan2(e_hat[0]);
    let s2 = theta.sin().powi(2);
    let s4 = s2 * s2;
    let cos2phi = phi.cos().powi(2);
    let sin2phi = phi.sin().powi(2);

    let q = p2 + z2 - s2 * (z2 - m2 + cos2phi * (p2 - z2));
    let a = s4 * (p2 - z2).powi(2);
    let b = 2.0 * (p2 - z2) * (s2 * (p2 + z2 - 2.0 * m2) - s4 * (p2 - m2));
    let cc = (p2 - z2 - s2 * (p2 - m2)).powi(2);
    let h = a * sin2phi * sin2phi + b * sin2phi + cc;
    Ok(q + h.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c as cx, identity};
    use crate::measure::{invariant_family, MeasurementFamily, DEFAULT_DEGENERACY_TOL};
    use crate::states::{make_bell_diagonal, random_two_qubit, schmidt, BlochForm, PureState};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn schmidt_of(l: [f64; 2]) -> SchmidtForm {
        SchmidtForm {
            coefficients: l.to_vec(),
            basis_a: identity(2),
            basis_b: identity(2),
        }
    }

    #[test]
    fn pure_2xn_values() {
        assert_eq!(n1_pure_2xn(&schmidt_of([0.5, 0.5])).unwrap(), 1.0);
        assert_eq!(n1_pure_2xn(&schmidt_of([1.0, 0.0])).unwrap(), 0.0);
        assert!((n1_pure_2xn(&schmidt_of([0.9, 0.1])).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn pure_2xn_matches_invariant_measurement() {
        // Independent route: the unique invariant measurement of ρ_A applied
        // to |ψ⟩⟨ψ| with λ = (0.9, 0.1).
        let amps = DVector::from_vec(vec![
            cx(0.9f64.sqrt(), 0.0),
            cx(0.0, 0.0),
            cx(0.0, 0.0),
            cx(0.1f64.sqrt(), 0.0),
        ]);
        let psi = PureState::new(amps, (2, 2)).unwrap();
        let rho = psi.density();
        let MeasurementFamily::Unique(m) =
            invariant_family(&rho.reduced_a(), DEFAULT_DEGENERACY_TOL).unwrap()
        else {
            panic!()
        };
        let direct = super::super::disturbance(&rho, &m, Measure::N1).unwrap();
        assert!((direct - 0.6).abs() < 1e-12);
        assert!((n1_pure_2xn(&schmidt(&psi)).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn pure_2xn_rejects_three_terms() {
        let psi = PureState::maximally_entangled(3, 3).unwrap();
        assert!(matches!(
            n1_pure_2xn(&schmidt(&psi)),
            Err(Error::TooManySchmidtTerms(3))
        ));
    }

    #[test]
    fn degenerate_mxm_values() {
        assert_eq!(n1_pure_degenerate_mxm(2), 1.0);
        assert!((n1_pure_degenerate_mxm(3) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn werner_and_isotropic_values() {
        assert!((n1_werner(2, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(n1_werner(3, 1.0 / 3.0).unwrap(), 0.0);
        assert_eq!(n1_werner(3, -1.0).unwrap(), 1.0);
        assert!(n1_werner(3, 2.0).is_err());
        for d in 2..6 {
            let df = d as f64;
            assert!((n1_isotropic(d, 1.0).unwrap() - 2.0 * (df - 1.0) / df).abs() < 1e-15);
            assert!(n1_isotropic(d, 1.0 / (df * df)).unwrap().abs() < 1e-15);
        }
        assert!(n1_isotropic(2, -0.5).is_err());
    }

    #[test]
    fn two_qubit_bell_diagonal_and_product() {
        let cfg = OptimizerConfig::default();
        let rho = make_bell_diagonal([0.45, 0.3, 0.2]).unwrap();
        let r = n1_two_qubit(&rho, &cfg).unwrap();
        assert!((r.value - 0.45).abs() < 1e-12);
        assert_eq!(r.method, super::super::Method::ClosedForm);
        // The reported measurement attains the value.
        let m = r.optimal.unwrap();
        assert!((super::super::disturbance(&rho, &m, Measure::N1).unwrap() - 0.45).abs() < 1e-12);

        let ra = (identity(2) + crate::matcore::pauli(3) * cx(0.4, 0.0)) * cx(0.5, 0.0);
        let rb = (identity(2) + crate::matcore::pauli(1) * cx(0.2, 0.0)) * cx(0.5, 0.0);
        let prod = DensityMatrix::product(&ra, &rb).unwrap();
        assert!(n1_two_qubit(&prod, &cfg).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn two_qubit_formula_matches_unique_measurement() {
        let cfg = OptimizerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 30 {
            let rho = random_two_qubit(&mut rng);
            let x = crate::states::bloch_decompose(&rho).unwrap().x;
            if norm3(&x) <= 0.1 {
                continue;
            }
            let closed = n1_two_qubit(&rho, &cfg).unwrap().value;
            let MeasurementFamily::Unique(m) =
                invariant_family(&rho.reduced_a(), DEFAULT_DEGENERACY_TOL).unwrap()
            else {
                panic!()
            };
            let direct = super::super::disturbance(&rho, &m, Measure::N1).unwrap();
            assert!(
                (closed - direct).abs() < 1e-8,
                "closed {closed} direct {direct}"
            );
            checked += 1;
        }
    }

    #[test]
    fn n2_two_qubit_values() {
        let cfg = OptimizerConfig::default();
        let rho = make_bell_diagonal([0.45, 0.3, 0.2]).unwrap();
        assert!((n2_two_qubit(&rho, &cfg).unwrap().value - 0.073125).abs() < 1e-15);
        let mm = DensityMatrix::maximally_mixed((2, 2));
        assert_eq!(n2_two_qubit(&mm, &cfg).unwrap().value, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_two_qubit(&mut rng);
        let MeasurementFamily::Unique(m) =
            invariant_family(&rho.reduced_a(), DEFAULT_DEGENERACY_TOL).unwrap()
        else {
            panic!()
        };
        let post = crate::measure::apply_measurement(&rho, &m).unwrap();
        let direct = crate::matcore::hs_norm(&(rho.matrix() - post.matrix())).powi(2);
        assert!((n2_two_qubit(&rho, &cfg).unwrap().value - direct).abs() < 1e-12);
    }

    #[test]
    fn h_values() {
        let c = [0.45, 0.3, 0.2];
        let h = h_of_e([0.0, 1.0, 0.0], c).unwrap();
        assert!((h - 2.0 * 0.45f64.powi(2)).abs() < 1e-15);
        let iso = [0.3, 0.3, 0.3];
        let h1 = h_of_e([1.0, 0.0, 0.0], iso).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let h2 = h_of_e([s, s, s], iso).unwrap();
        assert!((h1 - h2).abs() < 1e-15);
        assert!(h_of_e([0.5, 0.0, 0.0], c).is_err());
    }

    #[test]
    fn h_matches_trace_norm_route() {
        let c = [0.45, 0.3, 0.2];
        // Sorted frame state: axes carry (c₊, c₀, c₋).
        let rho = BlochForm::bell_diagonal(c).to_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let e = crate::states::random_pure((2, 1), &mut rng);
            // Bloch vector of a random qubit state is a random unit vector.
            let a = e.amplitudes();
            let bloch = [
                2.0 * (a[0].conj() * a[1]).re,
                2.0 * (a[0].conj() * a[1]).im,
                a[0].norm_sqr() - a[1].norm_sqr(),
            ];
            let m = sphere_measurement(bloch).unwrap();
            let post = crate::measure::dephase_a(&rho, &m, 2);
            let direct = crate::matcore::trace_norm(&(&rho - post));
            let via_h = 0.5 * (2.0 * h_of_e(bloch, c).unwrap()).sqrt();
            assert!((direct - via_h).abs() < 1e-10);
        }
    }

    #[test]
    fn euclidean_and_l1_readings_differ() {
        let x = [0.1, 0.2, -0.15];
        let c = [0.3, -0.2, 0.1];
        assert!((two_qubit_formula(x, c) - two_qubit_formula_l1(x, c)).abs() > 1e-3);
    }

    #[test]
    fn small_x_limit() {
        // x = (ε, 0, 0): value → max(|c₂|, |c₃|).
        let c = [0.2, 0.3, 0.45];
        let v = two_qubit_formula([1e-4, 0.0, 0.0], c);
        assert!((v - 0.45).abs() < 1e-12);
        let v = two_qubit_formula([0.0, 0.0, 1e-4], c);
        assert!((v - 0.3).abs() < 1e-12);
    }

    #[test]
    fn stable_form_equals_literal_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x: [f64; 3] = std::array::from_fn(|_| rand::Rng::gen_range(&mut rng, -0.6..0.6));
            let c: [f64; 3] = std::array::from_fn(|_| rand::Rng::gen_range(&mut rng, -0.6..0.6));
            let (a, b) = (two_qubit_formula(x, c), two_qubit_formula_literal(x, c));
            // The literal form loses up to √ε when χ₋ is near zero.
            assert!((a - b).abs() < 1e-7, "{x:?} {c:?}: {a} vs {b}");
        }
    }

    #[test]
    fn pure_states_keep_full_precision() {
        let cfg = OptimizerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let rho = crate::states::random_pure((2, 2), &mut rng).density();
            let frame = canonical_frame(&rho).unwrap();
            if norm3(&frame.form.x) < 0.05 {
                continue;
            }
            let closed = two_qubit_formula(frame.form.x, frame.form.c);
            let exact = super::super::numeric::n1_numeric(&rho, &cfg).unwrap().value;
            assert!((closed - exact).abs() < 1e-12, "{closed} vs {exact}");
        }
    }
}
