//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Oracles here are computed independently of the evaluators under test
//! where possible: Schmidt weights from the reduced-state spectrum, the
//! ancilla law from `Tr ρ_C²`, the h(ê) value from a direct trace norm.

use std::path::Path;
use std::process::Command;

use minkit::audit::parameter_grid;
use minkit::channels::{
    attach_ancilla, dynamics_sweep, freezing_polytopes, linear_grid, monotonicity_audit, Sided,
};
use minkit::matcore::{eigvalsh, trace};
use minkit::measure::{direction, sphere_measurement};
use minkit::min::{
    disturbance, h_of_e, n1_isotropic, n1_numeric, n1_pure_2xn, n1_two_qubit, n1_werner,
    n2_numeric, relation_check, two_qubit_formula, Measure, Method, OptimizerConfig, RelationCase,
};
use minkit::states::{
    bloch_decompose, canonical_frame, make_bell_diagonal, make_isotropic, make_werner,
    random_bell_diagonal, random_density, random_pure, random_two_qubit, schmidt, PureState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

// Criterion 1.
const PURE_ORACLE_TOL: f64 = 1e-4;
const DEGENERATE_BELL_TOL: f64 = 1e-6;
// Criterion 2.
const UNIQUE_ORACLE_TOL: f64 = 1e-8;
const MIN_BLOCH_NORM: f64 = 0.05;
const SPHERE_ORACLE_TOL: f64 = 1e-4;
// Criterion 3.
const EQ16_TOL: f64 = 1e-10;
// Criteria 4 and 5.
const FAMILY_ORACLE_TOL: f64 = 1e-3;
const AD1_TOL: f64 = 1e-10;
const ISOTROPIC_TWICE_TOL: f64 = 1e-9;
// Criterion 6.
const MONOTONICITY_TOL: f64 = 1e-8;
const MONOTONICITY_SLACK: f64 = 2e-4;
// Criterion 7.
const EQ2_TOL: f64 = 1e-10;
const ANCILLA_N1_TOL: f64 = 2e-4;
// Criterion 8.
const FREEZE_TOL: f64 = 1e-9;
const VERTEX_TOL: f64 = 1e-12;
// Criterion 9.
const H_DIRECT_TOL: f64 = 1e-10;
const H_MAX_TOL: f64 = 1e-6;
// Criterion 10.
const PURE_RELATION_TOL: f64 = 1e-8;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

/// Schmidt weights as the spectrum of `ρ_A`, largest first.
fn reduced_spectrum(psi: &PureState) -> Vec<f64> {
    eigvalsh(&psi.density().reduced_a())
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let psi = random_pure((2, 2 + i % 2), &mut r);
        let l = reduced_spectrum(&psi);
        let oracle = 2.0 * (l[0].max(0.0) * l[1].max(0.0)).sqrt();
        let numeric = n1_numeric(&psi.density(), &cfg())
            .map_err(|e| e.to_string())?
            .value;
        let closed = n1_pure_2xn(&schmidt(&psi)).map_err(|e| e.to_string())?;
        worst = worst
            .max((oracle - numeric).abs())
            .max((oracle - closed).abs());
    }
    let bell = PureState::maximally_entangled(2, 2).map_err(|e| e.to_string())?;
    let bell_value = n1_numeric(&bell.density(), &cfg())
        .map_err(|e| e.to_string())?
        .value;
    check(
        worst <= PURE_ORACLE_TOL && (bell_value - 1.0).abs() <= DEGENERATE_BELL_TOL,
        format!("max |2√(λ₁λ₂) − numeric| = {worst:.2e}; Bell state N1 = {bell_value:.12}"),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let (mut worst, mut count, mut wrong_method) = (0.0f64, 0, 0);
    while count < 100 {
        let rho = random_two_qubit(&mut r);
        let x = bloch_decompose(&rho).map_err(|e| e.to_string())?.x;
        if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() <= MIN_BLOCH_NORM {
            continue;
        }
        count += 1;
        let frame = canonical_frame(&rho).map_err(|e| e.to_string())?;
        let closed = two_qubit_formula(frame.form.x, frame.form.c);
        let numeric = n1_numeric(&rho, &cfg()).map_err(|e| e.to_string())?;
        wrong_method += usize::from(numeric.method != Method::NumericUnique);
        worst = worst.max((closed - numeric.value).abs());
    }
    let mut worst_bd = 0.0f64;
    for _ in 0..50 {
        let c = random_bell_diagonal(&mut r);
        let oracle = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rho = make_bell_diagonal(c).map_err(|e| e.to_string())?;
        let numeric = n1_numeric(&rho, &cfg()).map_err(|e| e.to_string())?;
        wrong_method += usize::from(numeric.method != Method::NumericSphere);
        worst_bd = worst_bd.max((oracle - numeric.value).abs());
    }
    check(
        worst <= UNIQUE_ORACLE_TOL && worst_bd <= SPHERE_ORACLE_TOL && wrong_method == 0,
        format!("Eq. (8) vs unique {worst:.2e}; max|c| vs sphere {worst_bd:.2e}; misrouted {wrong_method}"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = random_bell_diagonal(&mut r);
        let rho = make_bell_diagonal(c).map_err(|e| e.to_string())?;
        let n1 = n1_two_qubit(&rho, &cfg()).map_err(|e| e.to_string())?.value;
        let n2 = n2_numeric(&rho, &cfg()).map_err(|e| e.to_string())?.value;
        let mut a = c.map(f64::abs);
        a.sort_by(|p, q| q.total_cmp(p));
        worst = worst.max((n1 - (4.0 * n2 - a[1] * a[1]).max(0.0).sqrt()).abs());
    }
    check(
        worst <= EQ16_TOL,
        format!("max |N1 − √(4N2 − c0²)| = {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let (mut oracle, mut relation) = (0.0f64, 0.0f64);
    let mut zero_ok = true;
    for d in 2..=4 {
        for x in parameter_grid(-1.0, 1.0, 11) {
            let closed = n1_werner(d, x).map_err(|e| e.to_string())?;
            let rho = make_werner(d, x).map_err(|e| e.to_string())?;
            let numeric = n1_numeric(&rho, &cfg()).map_err(|e| e.to_string())?.value;
            oracle = oracle.max((closed - numeric).abs());
            let rep = relation_check(&RelationCase::Werner { d, x }, &cfg())
                .map_err(|e| e.to_string())?;
            relation = relation.max(rep.residual);
        }
        zero_ok &= n1_werner(d, 1.0 / d as f64).map_err(|e| e.to_string())? == 0.0;
    }
    check(
        oracle <= FAMILY_ORACLE_TOL && relation <= AD1_TOL && zero_ok,
        format!("Eq. (19) vs numeric {oracle:.2e}; Eq. (ad1) residual {relation:.2e}; N1(1/d) = 0: {zero_ok}"),
    )
}

fn criterion_5() -> Outcome {
    let mut oracle = 0.0f64;
    let mut endpoint = 0.0f64;
    for d in 2..=3 {
        for x in parameter_grid(0.0, 1.0, 11) {
            let closed = n1_isotropic(d, x).map_err(|e| e.to_string())?;
            let rho = make_isotropic(d, x).map_err(|e| e.to_string())?;
            let numeric = n1_numeric(&rho, &cfg()).map_err(|e| e.to_string())?.value;
            oracle = oracle.max((closed - numeric).abs());
        }
        let df = d as f64;
        let rho = make_isotropic(d, 1.0).map_err(|e| e.to_string())?;
        let n1 = n1_isotropic(d, 1.0).map_err(|e| e.to_string())?;
        let n2 = n2_numeric(&rho, &cfg()).map_err(|e| e.to_string())?.value;
        endpoint = endpoint
            .max((n1 - 2.0 * (df - 1.0) / df).abs())
            .max((n1 - 2.0 * n2).abs());
    }
    check(
        oracle <= FAMILY_ORACLE_TOL && endpoint <= ISOTROPIC_TWICE_TOL,
        format!("Eq. (22) vs numeric {oracle:.2e}; x = 1 residual {endpoint:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let report = monotonicity_audit(50, 4, 42, &cfg()).map_err(|e| e.to_string())?;
    // Recount against the pinned tolerances rather than trusting the report's flags.
    let violations = report
        .cases
        .iter()
        .filter(|c| {
            let slack = if c.allowance > MONOTONICITY_TOL {
                MONOTONICITY_SLACK
            } else {
                0.0
            };
            c.after > c.before + MONOTONICITY_TOL + slack
        })
        .count();
    check(
        report.cases.len() == 200 && violations == 0 && report.violations == 0,
        format!(
            "{} pairs, {violations} violations, max increase {:.2e}",
            report.cases.len(),
            report.max_increase
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let (mut eq2, mut n1_gap) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let rho = random_two_qubit(&mut r);
        let dc = 2 + i % 2;
        let rank = r.gen_range(1..=dc);
        let rho_c = random_density((1, dc), rank, &mut r).map_err(|e| e.to_string())?;
        let purity_c = trace(&(rho_c.matrix() * rho_c.matrix())).re;
        let big = attach_ancilla(&rho, rho_c.matrix()).map_err(|e| e.to_string())?;
        let n2 = n2_numeric(&rho, &cfg()).map_err(|e| e.to_string())?.value;
        let n2_big = n2_numeric(&big, &cfg()).map_err(|e| e.to_string())?.value;
        let n1 = n1_numeric(&rho, &cfg()).map_err(|e| e.to_string())?.value;
        let n1_big = n1_numeric(&big, &cfg()).map_err(|e| e.to_string())?.value;
        eq2 = eq2.max((n2_big - n2 * purity_c).abs());
        n1_gap = n1_gap.max((n1_big - n1).abs());
    }
    check(
        eq2 <= EQ2_TOL && n1_gap <= ANCILLA_N1_TOL,
        format!("Eq. (2) residual {eq2:.2e}; |N1(ρ⊗ρ_C) − N1(ρ)| ≤ {n1_gap:.2e}"),
    )
}

fn same_vertices(got: &[[f64; 3]], want: &[[f64; 3]]) -> bool {
    got.len() == want.len()
        && want.iter().all(|w| {
            got.iter()
                .any(|g| (0..3).all(|i| (g[i] - w[i]).abs() <= VERTEX_TOL))
        })
}

fn criterion_8(dir: &Path) -> Outcome {
    let trace = dynamics_sweep(
        [0.2, 0.3, 0.45],
        3,
        Sided::One,
        &linear_grid(5.0, 41),
        &cfg(),
    )
    .map_err(|e| e.to_string())?;
    let frozen = trace
        .n1_t
        .iter()
        .fold(0.0f64, |m, v| m.max((v - 0.45).abs()));
    let decreasing = trace.n2_t.windows(2).all(|w| w[1] < w[0]);

    let t = 1.0 / 3.0;
    let upper = [
        [0.0, 0.0, 0.0],
        [1.0, -1.0, 1.0],
        [-1.0, 1.0, 1.0],
        [t, t, t],
        [-t, -t, t],
    ];
    let lower = [
        [0.0, 0.0, 0.0],
        [1.0, 1.0, -1.0],
        [-1.0, -1.0, -1.0],
        [t, -t, -t],
        [-t, t, -t],
    ];
    let [p_up, p_low] = freezing_polytopes(3).map_err(|e| e.to_string())?;
    let library = same_vertices(&p_up.vertices, &upper) && same_vertices(&p_low.vertices, &lower);

    let out = dir.join("region.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_minkit"))
        .args(["region", "--axis", "3", "--resolution", "9", "--out"])
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    let sidecar: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.join("region.csv.manifest.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let emitted = |k: usize| -> Vec<[f64; 3]> {
        serde_json::from_value(sidecar["extra"]["hexahedra"][k]["vertices"].clone())
            .unwrap_or_default()
    };
    let cli = status.success()
        && same_vertices(&emitted(0), &upper)
        && same_vertices(&emitted(1), &lower);
    check(
        frozen <= FREEZE_TOL && decreasing && library && cli,
        format!("max |n1 − 0.45| = {frozen:.2e}; n2 strictly decreasing: {decreasing}; hexahedra (library, CLI): ({library}, {cli})"),
    )
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let (mut direct_gap, mut max_gap) = (0.0f64, 0.0f64);
    let grid = 64;
    for _ in 0..20 {
        let c = random_bell_diagonal(&mut r);
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| c[j].abs().total_cmp(&c[i].abs()));
        // Bell-diagonal state in the frame whose axes carry (c₊, c₀, c₋).
        let sorted = order.map(|i| c[i]);
        let rho = make_bell_diagonal(sorted).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let theta = (1.0 - 2.0 * r.gen::<f64>()).acos();
            let e = direction(theta, r.gen_range(0.0..std::f64::consts::TAU));
            let h = h_of_e(e, c).map_err(|e| e.to_string())?;
            let m = sphere_measurement(e).map_err(|e| e.to_string())?;
            let direct = disturbance(&rho, &m, Measure::N1).map_err(|e| e.to_string())?;
            direct_gap = direct_gap.max((0.5 * (2.0 * h).sqrt() - direct).abs());
        }
        let mut best = 0.0f64;
        for i in 0..=grid {
            for j in 0..grid {
                let th = std::f64::consts::PI * i as f64 / grid as f64;
                let ph = std::f64::consts::PI * j as f64 / grid as f64;
                best = best.max(h_of_e(direction(th, ph), c).map_err(|e| e.to_string())?);
            }
        }
        max_gap = max_gap.max((best - 2.0 * sorted[0] * sorted[0]).abs());
    }
    check(
        direct_gap <= H_DIRECT_TOL && max_gap <= H_MAX_TOL,
        format!("max |½√(2h) − direct| = {direct_gap:.2e}; max |max h − 2c₊²| = {max_gap:.2e}"),
    )
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let psi = random_pure((2, 2 + i % 2), &mut r);
        let n1 = n1_pure_2xn(&schmidt(&psi)).map_err(|e| e.to_string())?;
        let n2 = n2_numeric(&psi.density(), &cfg())
            .map_err(|e| e.to_string())?
            .value;
        worst = worst.max((n1 - (2.0 * n2).sqrt()).abs());
    }
    check(
        worst <= PURE_RELATION_TOL,
        format!("max |N1 − √(2N2)| = {worst:.2e}"),
    )
}

fn run_audit(dir: &Path, name: &str, threads: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_minkit"))
        .env("MINKIT_THREADS", threads)
        .args([
            "audit",
            "monotonicity",
            "--states",
            "10",
            "--channels",
            "3",
            "--seed",
            "7",
            "--out",
        ])
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("audit exited with {status}"));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn criterion_11(dir: &Path) -> Outcome {
    let a = run_audit(dir, "a.json", "1")?;
    let b = run_audit(dir, "b.json", "1")?;
    let c = run_audit(dir, "c.json", "4")?;
    check(
        a == b && a == c && !a.is_empty(),
        format!(
            "{} bytes; repeat identical: {}; across thread counts: {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        ("Theorem 2 oracle equivalence", Box::new(criterion_1)),
        ("Theorem 3 oracle equivalence", Box::new(criterion_2)),
        ("Eq. (16) Bell-diagonal relation", Box::new(criterion_3)),
        ("Werner closed form and Eq. (ad1)", Box::new(criterion_4)),
        ("Isotropic closed form", Box::new(criterion_5)),
        ("Theorem 1 monotonicity audit", Box::new(criterion_6)),
        ("Ancilla laws", Box::new(criterion_7)),
        (
            "Freezing and Fig. 1(b) hexahedra",
            Box::new(|| criterion_8(dir.path())),
        ),
        ("h(ê) consistency", Box::new(criterion_9)),
        ("Pure-state relation", Box::new(criterion_10)),
        ("Determinism", Box::new(|| criterion_11(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
