//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use isoprofile_core::config::Tolerances;
use isoprofile_core::density::{
    check_mcp_density, density_sup_bound, Density1D, DensityKind, DensitySpec, GridCache, ModelDensityParams,
    Violation, DEFAULT_GRID_POINTS,
};
use isoprofile_core::geometry::{brute_force_min_content, IntervalSet};
use isoprofile_core::kernels::CurvatureParams;
use isoprofile_core::needles::{
    check_localized_inequality, random_decomposition, sharpness_family, sharpness_ratio, summarize,
    verify_theorem_conclusion, DecompositionSummary, NeedleCertificate, NeedleDecomposition, TheoremCheck,
    TheoremReport,
};
use isoprofile_core::profile::{inverse_mass, isoperimetric_profile, needle_mass};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cli::{with_sink, Command, Format, Outcome, OutputArgs};
use crate::error::CliError;
use crate::formats::{load_decomposition, load_tabulated, save_decomposition, write_csv, write_json};
use crate::range::{parse_list, parse_log_range};

/// Normalization tolerance for certificates.
const NORM_TOL: f64 = 1e-8;

pub fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    match cmd {
        Command::Profile {
            curvature,
            v_log,
            v_grid,
            tol,
            output,
        } => profile(
            &curvature.params()?,
            &grid(v_log, v_grid)?,
            &tol.resolve()?,
            output,
            stdout,
        ),
        Command::DensityCheck {
            curvature,
            constant,
            value,
            a,
            tabulated,
            grid_n,
            max_violations,
            tol,
            output,
        } => {
            let params = curvature.params()?;
            let spec = match (constant, a, tabulated) {
                (true, _, _) => DensitySpec::Constant { value: *value },
                (_, Some(a), _) => DensitySpec::Model { a: *a },
                (_, _, Some(path)) => {
                    let t = load_tabulated(path)?;
                    let (x, h) = t.nodes();
                    DensitySpec::Tabulated {
                        x: x.to_vec(),
                        h: h.to_vec(),
                    }
                }
                _ => unreachable!("clap enforces one density source"),
            };
            density_check(
                &params,
                &spec,
                *grid_n,
                *max_violations,
                &tol.resolve()?,
                output,
                stdout,
            )
        }
        Command::Sharpness {
            curvature,
            a_log,
            a_grid,
            limit,
            tol,
            output,
        } => sharpness(
            &curvature.params()?,
            &grid(a_log, a_grid)?,
            *limit,
            &tol.resolve()?,
            output,
            stdout,
        ),
        Command::Verify {
            curvature,
            decomposition,
            trials,
            max_needles,
            seed,
            delta,
            save_decomposition,
            family_a,
            psi_band,
            eta,
            grid_n,
            tol,
            output,
        } => {
            let tol = tol.resolve()?;
            let params = curvature.params()?;
            if let Some(a) = family_a {
                let params = params.ok_or_else(|| CliError::Input("--family-a needs --K, --N and --D".into()))?;
                let opts = TheoremCheck {
                    psi_band: *psi_band,
                    eta: *eta,
                };
                return verify_family(&params, *a, delta.unwrap_or(*a), &opts, &tol, output, stdout);
            }
            let decs = match (decomposition, trials) {
                (Some(path), _) => {
                    let dec = load_decomposition(path, &tol.quad)?;
                    if params.is_some_and(|p| p != dec.params) {
                        return Err(CliError::Input(
                            "--K/--N/--D disagree with the decomposition file".into(),
                        ));
                    }
                    vec![dec]
                }
                (None, Some(count)) => {
                    let params = params.ok_or_else(|| CliError::Input("--trials needs --K, --N and --D".into()))?;
                    generate(
                        &params,
                        *count,
                        *max_needles,
                        *seed,
                        delta.unwrap_or(0.05),
                        save_decomposition.as_deref(),
                        &tol,
                    )?
                }
                _ => unreachable!("clap enforces one source"),
            };
            verify_decompositions(&decs, *grid_n, &tol, output, stdout)
        }
        Command::Oracle {
            curvature,
            v_log,
            v_grid,
            grid_n,
            rel_tol,
            tol,
            output,
        } => oracle(
            &curvature.params()?,
            &grid(v_log, v_grid)?,
            *grid_n,
            *rel_tol,
            &tol.resolve()?,
            output,
            stdout,
        ),
    }
}

fn grid(log: &Option<String>, list: &Option<String>) -> Result<Vec<f64>, CliError> {
    match (log, list) {
        (Some(spec), _) => parse_log_range(spec),
        (_, Some(spec)) => parse_list(spec),
        _ => Err(CliError::Input("a grid is required".into())),
    }
}

fn format_or(output: &OutputArgs, default: Format) -> Format {
    output.format.unwrap_or(default)
}

fn json_only(output: &OutputArgs) -> Result<(), CliError> {
    if output.format == Some(Format::Csv) {
        return Err(CliError::Input("this command only writes JSON".into()));
    }
    Ok(())
}

/// Rows for CSV and JSON alike; JSON keys follow the CSV header.
fn emit_rows<T: Serialize>(
    output: &OutputArgs,
    header: &[&str],
    rows: &[Vec<f64>],
    json: &T,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    with_sink(&output.out, stdout, |w| match format_or(output, Format::Csv) {
        Format::Csv => write_csv(w, header, rows),
        Format::Json => write_json(w, json),
    })
}

#[derive(Debug, Serialize)]
struct ProfileRow {
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "N")]
    n: f64,
    #[serde(rename = "D")]
    d: f64,
    v: f64,
    a: f64,
    #[serde(rename = "I")]
    i: f64,
    #[serde(rename = "I_asym")]
    i_asym: f64,
    ratio: f64,
}

const PROFILE_HEADER: [&str; 8] = ["K", "N", "D", "v", "a", "I", "I_asym", "ratio"];

fn profile(
    params: &CurvatureParams,
    vs: &[f64],
    tol: &Tolerances,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let rows: Vec<ProfileRow> = vs
        .iter()
        .map(|&v| {
            let p = isoperimetric_profile(params, v, tol)?;
            Ok(ProfileRow {
                k: params.k(),
                n: params.n(),
                d: params.d(),
                v: p.v,
                a: p.a,
                i: p.i,
                i_asym: p.i_asym,
                ratio: p.ratio(),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.k, r.n, r.d, r.v, r.a, r.i, r.i_asym, r.ratio])
        .collect();
    emit_rows(output, &PROFILE_HEADER, &table, &rows, stdout)?;
    Ok(Outcome::Passed)
}

#[derive(Debug, Serialize)]
struct DensityCheckReport {
    params: CurvatureParams,
    density: DensityKind,
    grid_n: usize,
    checked: usize,
    violation_count: usize,
    /// Worst first, truncated.
    violations: Vec<Violation>,
    worst: Option<Violation>,
    refined_worst: Option<Violation>,
    mcp_passed: bool,
    normalization_error: f64,
    sup: f64,
    sup_bound: f64,
    passed: bool,
}

fn density_check(
    params: &CurvatureParams,
    spec: &DensitySpec,
    grid_n: usize,
    max_violations: usize,
    tol: &Tolerances,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    json_only(output)?;
    if grid_n < 2 {
        return Err(CliError::Input("--grid-n must be at least 2".into()));
    }
    let h = spec.build(params, &tol.quad)?;
    let mcp = check_mcp_density(&h, params, grid_n);
    let mut violations = mcp.violations.clone();
    violations.sort_by(|x, y| x.margin.total_cmp(&y.margin));
    violations.truncate(max_violations);
    let normalization_error = (h.total_mass(&tol.quad) - 1.0).abs();
    let sup = GridCache::new(&h, DEFAULT_GRID_POINTS).max();
    let sup_bound = density_sup_bound(params, params.d(), &tol.quad)?;
    let sup_ok = sup <= sup_bound + 1e-9;
    let report = DensityCheckReport {
        params: *params,
        density: h.kind(),
        grid_n,
        checked: mcp.checked,
        violation_count: mcp.violations.len(),
        violations,
        worst: mcp.worst,
        refined_worst: mcp.refined_worst,
        mcp_passed: mcp.passed,
        normalization_error,
        sup,
        sup_bound,
        passed: mcp.passed && normalization_error <= NORM_TOL && sup_ok,
    };
    with_sink(&output.out, stdout, |w| write_json(w, &report))?;
    Ok(if report.passed {
        Outcome::Passed
    } else if !mcp.passed {
        Outcome::Failed(format!("{} MCP violations", report.violation_count))
    } else if normalization_error > NORM_TOL {
        Outcome::Failed(format!("density mass differs from 1 by {normalization_error:e}"))
    } else {
        Outcome::Failed(format!("sup {sup} exceeds bound {sup_bound}"))
    })
}

#[derive(Debug, Serialize)]
struct SharpnessRow {
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "N")]
    n: f64,
    #[serde(rename = "D")]
    d: f64,
    a: f64,
    v: f64,
    ratio: f64,
}

fn sharpness(
    params: &CurvatureParams,
    as_: &[f64],
    limit: f64,
    tol: &Tolerances,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let rows: Vec<SharpnessRow> = as_
        .iter()
        .map(|&a| {
            let v = needle_mass(&ModelDensityParams::new(*params, a)?, &tol.quad)?;
            Ok(SharpnessRow {
                k: params.k(),
                n: params.n(),
                d: params.d(),
                a,
                v,
                ratio: sharpness_ratio(params, a, &tol.quad)?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.k, r.n, r.d, r.a, r.v, r.ratio]).collect();
    emit_rows(output, &["K", "N", "D", "a", "v", "ratio"], &table, &rows, stdout)?;
    let last = rows.last().map_or(f64::NAN, |r| r.ratio);
    Ok(if last <= limit {
        Outcome::Passed
    } else {
        Outcome::Failed(format!("last sharpness ratio {last} exceeds {limit}"))
    })
}

#[derive(Debug, Serialize)]
struct FamilyVerification {
    params: CurvatureParams,
    a: f64,
    set: IntervalSet,
    #[serde(flatten)]
    report: TheoremReport,
    passed: bool,
}

fn verify_family(
    params: &CurvatureParams,
    a: f64,
    delta: f64,
    opts: &TheoremCheck,
    tol: &Tolerances,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    json_only(output)?;
    let space = sharpness_family(params, a, &tol.quad)?;
    let set = IntervalSet::interval(params.d(), 0.0, a)?;
    let report = verify_theorem_conclusion(&space, 0.0, params, &set, delta, opts, &tol.quad)?;
    let passed = report.passed();
    let out = FamilyVerification {
        params: *params,
        a,
        set,
        report,
        passed,
    };
    with_sink(&output.out, stdout, |w| write_json(w, &out))?;
    Ok(if passed {
        Outcome::Passed
    } else {
        Outcome::Failed(format!("theorem check {:?}", out.report.status))
    })
}

fn generate(
    params: &CurvatureParams,
    count: usize,
    max_needles: usize,
    seed: u64,
    delta: f64,
    save: Option<&Path>,
    tol: &Tolerances,
) -> Result<Vec<NeedleDecomposition>, CliError> {
    if count == 0 || max_needles == 0 {
        return Err(CliError::Input("--trials and --max-needles must be positive".into()));
    }
    if save.is_some() && count != 1 {
        return Err(CliError::Input("--save-decomposition requires --trials 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decs = (0..count)
        .map(|i| random_decomposition(params, delta, 1 + i % max_needles, &mut rng, &tol.quad))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = save {
        save_decomposition(path, &decs[0])?;
    }
    Ok(decs)
}

#[derive(Debug, Serialize)]
struct TrialReport {
    index: usize,
    needles: usize,
    lhs: f64,
    rhs: f64,
    slack: f64,
    flagged: Vec<usize>,
    certificates: Vec<NeedleCertificate>,
    certificates_hold: bool,
    summary: DecompositionSummary,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct LocalizedVerification {
    trials: usize,
    failures: usize,
    min_slack: f64,
    passed: bool,
    runs: Vec<TrialReport>,
}

fn verify_decompositions(
    decs: &[NeedleDecomposition],
    grid_n: usize,
    tol: &Tolerances,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    json_only(output)?;
    let runs = decs
        .iter()
        .enumerate()
        .map(|(index, dec)| {
            let rep = check_localized_inequality(dec, tol)?;
            let certificates = dec
                .needles
                .iter()
                .map(|n| n.certify(&dec.params, grid_n, &tol.quad))
                .collect::<Result<Vec<_>, _>>()?;
            let certificates_hold = certificates.iter().all(|c| c.holds(NORM_TOL));
            Ok(TrialReport {
                index,
                needles: dec.needles.len(),
                lhs: rep.lhs,
                rhs: rep.rhs,
                slack: rep.slack,
                flagged: rep.flagged,
                certificates,
                certificates_hold,
                summary: summarize(dec, None, &tol.quad)?,
                passed: rep.passed && certificates_hold,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let failures = runs.iter().filter(|r| !r.passed).count();
    let report = LocalizedVerification {
        trials: runs.len(),
        failures,
        min_slack: runs.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        passed: failures == 0,
        runs,
    };
    with_sink(&output.out, stdout, |w| write_json(w, &report))?;
    Ok(if report.passed {
        Outcome::Passed
    } else {
        Outcome::Failed(format!("{failures} of {} decompositions failed", report.trials))
    })
}

#[derive(Debug, Serialize)]
struct OracleRow {
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "N")]
    n: f64,
    #[serde(rename = "D")]
    d: f64,
    v: f64,
    a: f64,
    #[serde(rename = "I")]
    i: f64,
    brute: f64,
    rel_err: f64,
}

fn oracle(
    params: &CurvatureParams,
    vs: &[f64],
    grid_n: usize,
    rel_tol: f64,
    tol: &Tolerances,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    if grid_n < 2 {
        return Err(CliError::Input("--grid-n must be at least 2".into()));
    }
    let rows: Vec<OracleRow> = vs
        .iter()
        .map(|&v| {
            let a = inverse_mass(params, v, tol)?;
            let h = Density1D::model(ModelDensityParams::new(*params, a)?, &tol.quad)?;
            let i = isoperimetric_profile(params, v, tol)?.i;
            let brute = brute_force_min_content(&h, v, grid_n, &tol.quad)?.content;
            Ok(OracleRow {
                k: params.k(),
                n: params.n(),
                d: params.d(),
                v,
                a,
                i,
                brute,
                rel_err: (brute - i).abs() / i,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.k, r.n, r.d, r.v, r.a, r.i, r.brute, r.rel_err])
        .collect();
    emit_rows(
        output,
        &["K", "N", "D", "v", "a", "I", "brute", "rel_err"],
        &table,
        &rows,
        stdout,
    )?;
    let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(if worst <= rel_tol {
        Outcome::Passed
    } else {
        Outcome::Failed(format!("brute force differs from the profile by {worst:e}"))
    })
}
