use std::path::Path;

use anyhow::Context;
use minkit::audit::{oracle_audit, relations_audit};
use minkit::channels::{
    dynamics_sweep, freezing_polytopes, linear_grid, monotonicity_audit, sample_region, Sided,
};
use minkit::geometry::level_surface;
use minkit::matcore::{identity, ComplexMatrix};
use minkit::min::{self, Measure, Method, OptimizerConfig};
use minkit::states::{schmidt, DensityMatrix, StateFile};
use serde::Serialize;
use serde_json::json;

use crate::detect::{detect, Family, DETECTION_TOL};
use crate::output::{fmt_sig, write_csv, write_json, RunManifest};
use crate::{exit, AuditKind, Cli, Command, Failure, MethodArg, SidedArg};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = cli.opt.config();
    cfg.validate()?;
    match &cli.command {
        Command::Compute {
            state,
            measure,
            method,
            out,
        } => compute(state, (*measure).into(), *method, out.as_deref(), &cfg),
        Command::Surface {
            level,
            resolution,
            out,
        } => surface(*level, *resolution, out.as_deref(), &cfg),
        Command::Region {
            axis,
            resolution,
            out,
        } => region(*axis, *resolution, out.as_deref(), &cfg),
        Command::Sweep {
            c0,
            axis,
            sided,
            points,
            t_max,
            out,
        } => sweep(c0, *axis, *sided, *points, *t_max, out.as_deref(), &cfg),
        Command::Audit {
            kind,
            count,
            states,
            channels,
            out,
        } => audit(*kind, *count, *states, *channels, out.as_deref(), &cfg),
    }
}

fn malformed(e: minkit::Error) -> Failure {
    Failure::new(exit::MALFORMED_INPUT, e)
}

pub fn read_state(path: &Path) -> Result<(DensityMatrix, Vec<u8>), Failure> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| Failure::new(exit::MALFORMED_INPUT, e))?;
    let file: StateFile = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(|e| Failure::new(exit::MALFORMED_INPUT, e))?;
    let raw = file.to_matrix().map_err(malformed)?;
    let rho = DensityMatrix::validate(raw, (file.dims[0], file.dims[1]))?;
    Ok((rho, bytes))
}

#[derive(Debug, Serialize)]
struct ComputeReport {
    value: f64,
    method: Method,
    measure: Measure,
    family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimal_measurement: Option<Vec<MatrixJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_vs_oracle: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let rows = |imag: bool| {
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| if imag { m[(i, j)].im } else { m[(i, j)].re })
                        .collect()
                })
                .collect()
        };
        Self {
            re: rows(false),
            im: rows(true),
        }
    }
}

fn is_maximally_mixed(m: &ComplexMatrix) -> bool {
    let d = m.nrows();
    minkit::matcore::max_abs_diff(m, &(identity(d) / minkit::matcore::c(d as f64, 0.0)))
        <= DETECTION_TOL
}

/// Closed-form value for the detected family, when one exists.
fn closed_form(
    rho: &DensityMatrix,
    family: &Family,
    measure: Measure,
    cfg: &OptimizerConfig,
) -> minkit::Result<Option<min::MinResult>> {
    let closed = |v: f64| {
        Some(min::MinResult {
            value: v,
            method: Method::ClosedForm,
            optimal: None,
            direction: None,
            iterations: 0,
        })
    };
    let (da, db) = rho.dims();
    Ok(match (family, measure) {
        (Family::Pure { state }, Measure::N1 | Measure::N2) => {
            let n1 = if da == 2 {
                Some(min::n1_pure_2xn(&schmidt(state))?)
            } else if da <= db && is_maximally_mixed(&rho.reduced_a()) {
                Some(min::n1_pure_degenerate_mxm(da))
            } else {
                None
            };
            match (n1, measure) {
                (Some(v), Measure::N1) => closed(v),
                (Some(v), _) if da == 2 => closed(v * v / 2.0),
                _ => None,
            }
        }
        (Family::BellDiagonal { .. } | Family::TwoQubit, Measure::N1) => {
            Some(min::n1_two_qubit(rho, cfg)?)
        }
        (Family::BellDiagonal { .. } | Family::TwoQubit, Measure::N2) => {
            Some(min::n2_two_qubit(rho, cfg)?)
        }
        (Family::Werner { d, x }, Measure::N1 | Measure::N2) => {
            let n1 = min::n1_werner(*d, *x)?;
            let df = *d as f64;
            closed(if measure == Measure::N1 {
                n1
            } else {
                n1 * n1 / (df * (df - 1.0))
            })
        }
        (Family::Isotropic { d, x }, Measure::N1 | Measure::N2) => {
            let n1 = min::n1_isotropic(*d, *x)?;
            let df = *d as f64;
            closed(if measure == Measure::N1 {
                n1
            } else {
                df * n1 * n1 / (4.0 * (df - 1.0))
            })
        }
        _ => None,
    })
}

fn compute(
    path: &Path,
    measure: Measure,
    method: MethodArg,
    out: Option<&Path>,
    cfg: &OptimizerConfig,
) -> Result<(), Failure> {
    let (rho, bytes) = read_state(path)?;
    let family = detect(&rho);
    let closed = match method {
        MethodArg::Numeric => None,
        _ => closed_form(&rho, &family, measure, cfg)?,
    };
    let (result, residual) = match closed {
        Some(r) => {
            let oracle = match min::optimize(&rho, measure, cfg) {
                Ok(o) => Some((r.value - o.value).abs()),
                Err(minkit::Error::DimensionBound(_)) => None,
                Err(e) => return Err(e.into()),
            };
            (r, oracle)
        }
        None if method == MethodArg::Closed => {
            return Err(minkit::Error::UnsupportedFamily(format!(
                "no closed form for {measure:?} of this state"
            ))
            .into())
        }
        None => (min::optimize(&rho, measure, cfg)?, None),
    };
    let report = ComputeReport {
        value: result.value,
        method: result.method,
        measure,
        family,
        optimal_measurement: result
            .optimal
            .as_ref()
            .map(|m| m.projectors().iter().map(MatrixJson::from).collect()),
        residual_vs_oracle: residual,
    };
    write_json(out, &report)?;
    let args = json!({"measure": measure, "method": format!("{method:?}").to_lowercase()});
    RunManifest::new("compute", args, cfg, Some(&bytes)).write_beside(out)?;
    Ok(())
}

fn surface(
    level: f64,
    resolution: usize,
    out: Option<&Path>,
    cfg: &OptimizerConfig,
) -> Result<(), Failure> {
    if level.is_nan() || level <= 0.0 {
        return Err(Failure::new(
            exit::MALFORMED_INPUT,
            anyhow::anyhow!("level must lie in (0, 1], got {level}"),
        ));
    }
    let points = level_surface(level, resolution).map_err(malformed)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let mut r: Vec<String> = p.c.iter().map(|v| fmt_sig(*v)).collect();
            r.push(p.face.to_string());
            r
        })
        .collect();
    write_csv(out, &["c1", "c2", "c3", "face_id"], &rows)?;
    let args = json!({"level": level, "resolution": resolution});
    RunManifest::new("surface", args, cfg, None).write_beside(out)?;
    Ok(())
}

fn region(
    axis: usize,
    resolution: usize,
    out: Option<&Path>,
    cfg: &OptimizerConfig,
) -> Result<(), Failure> {
    let samples = sample_region(axis, resolution).map_err(malformed)?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|(c, flag)| {
            let mut r: Vec<String> = c.iter().map(|v| fmt_sig(*v)).collect();
            r.push(format!("{flag:?}").to_lowercase());
            r.push(flag.is_frozen().to_string());
            r
        })
        .collect();
    write_csv(out, &["c1", "c2", "c3", "flag", "frozen"], &rows)?;
    let args = json!({"axis": axis, "resolution": resolution});
    let mut manifest = RunManifest::new("region", args, cfg, None);
    manifest.extra = Some(json!({ "hexahedra": freezing_polytopes(axis)? }));
    manifest.write_beside(out)?;
    Ok(())
}

fn sweep(
    c0: &[f64],
    axis: usize,
    sided: SidedArg,
    points: usize,
    t_max: f64,
    out: Option<&Path>,
    cfg: &OptimizerConfig,
) -> Result<(), Failure> {
    let c0: [f64; 3] = c0.try_into().map_err(|_| {
        Failure::new(
            exit::MALFORMED_INPUT,
            anyhow::anyhow!("--c0 needs three values"),
        )
    })?;
    if !(1..=3).contains(&axis) || t_max.is_nan() || t_max < 0.0 || points == 0 {
        return Err(Failure::new(
            exit::MALFORMED_INPUT,
            anyhow::anyhow!("need axis in 1..=3, t-max >= 0 and at least one point"),
        ));
    }
    let sided_lib = match sided {
        SidedArg::One => Sided::One,
        SidedArg::Two => Sided::Two,
    };
    let trace = dynamics_sweep(c0, axis, sided_lib, &linear_grid(t_max, points), cfg)?;
    let rows: Vec<Vec<String>> = (0..trace.times.len())
        .map(|i| {
            let mut r = vec![fmt_sig(trace.times[i])];
            r.extend(trace.c_t[i].iter().map(|v| fmt_sig(*v)));
            r.push(fmt_sig(trace.n1_t[i]));
            r.push(fmt_sig(trace.n2_t[i]));
            r
        })
        .collect();
    write_csv(out, &["gamma_t", "c1", "c2", "c3", "n1", "n2"], &rows)?;
    let args = json!({
        "c0": c0, "axis": axis, "sided": trace.sided, "points": points, "t_max": t_max,
    });
    let mut manifest = RunManifest::new("sweep", args, cfg, None);
    manifest.extra = Some(json!({
        "channel": trace.channel,
        "max_evolution_residual": trace.max_evolution_residual,
    }));
    manifest.write_beside(out)?;
    Ok(())
}

#[derive(Serialize)]
struct AuditOutput<T: Serialize> {
    kind: &'static str,
    pass: bool,
    failures: usize,
    report: T,
}

fn audit(
    kind: AuditKind,
    count: usize,
    states: usize,
    channels: usize,
    out: Option<&Path>,
    cfg: &OptimizerConfig,
) -> Result<(), Failure> {
    let seed = cfg.seed;
    let failures = match kind {
        AuditKind::Monotonicity => {
            let r = monotonicity_audit(states, channels, seed, cfg).map_err(malformed)?;
            emit(out, "monotonicity", r.violations, &r)?
        }
        AuditKind::Relations => {
            let r = relations_audit(count, seed, cfg)?;
            emit(out, "relations", r.failures, &r)?
        }
        AuditKind::Oracle => {
            let r = oracle_audit(count, seed, cfg)?;
            emit(out, "oracle", r.failures, &r)?
        }
    };
    let args = json!({
        "kind": format!("{kind:?}").to_lowercase(),
        "count": count, "states": states, "channels": channels,
    });
    RunManifest::new("audit", args, cfg, None).write_beside(out)?;
    if failures > 0 {
        return Err(Failure::new(
            exit::AUDIT_FAILURE,
            anyhow::anyhow!("{failures} audit case(s) failed"),
        ));
    }
    Ok(())
}

fn emit<T: Serialize>(
    out: Option<&Path>,
    kind: &'static str,
    failures: usize,
    report: &T,
) -> Result<usize, Failure> {
    write_json(
        out,
        &AuditOutput {
            kind,
            pass: failures == 0,
            failures,
            report,
        },
    )?;
    Ok(failures)
}
