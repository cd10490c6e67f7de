//! Command dispatch and JSON/CSV report assembly.

use agler_core::agler::{CertificateCheck, WitnessCheck, DEFAULT_NORM_CAP};
use agler_core::colligation::ColligationSpec;
use agler_core::kernels::sample_cone;
use agler_core::separation::SeparationReport;
use agler_core::test_functions::FamilySpec;
use agler_core::theorem::TheoremReport;
use agler_core::{
    agler_feasibility_with, base_kernel, bounds_over_cone, carleson_products, is_unitary,
    membership_test, minimal_norm_with, strong_separation_certificate, truncation_trend,
    verify_certificate, verify_theorem, Colligation, ConeBounds, FeasibilityResult,
    FeasibilityStatus, InterpolationProblem, MembershipReport, MinimalNorm, MinimalNormStatus,
    Route, SolverConfig, TheoremParams, TrendRow, UnitaryCheck, ValueMap,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{field, Command, ConfigError, Prepared, DEFAULT_C_MAX};

pub const SCHEMA_VERSION: u32 = 1;

/// Success, feasible or verdict true.
pub const EXIT_OK: i32 = 0;
/// Infeasible or verdict false.
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Unitarity tolerance required before transfer functions are evaluated.
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] agler_core::Error),
    #[error("cannot serialize report: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

/// Everything a command produces; written to disk in one go by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: Command,
    pub exit_code: i32,
    pub json: String,
    pub csv: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'static str,
    domain: String,
    family: FamilySpec,
    /// How "for all admissible kernels" was checked: EXACT or SAMPLED.
    kernel_route: Route,
    /// Test-function family used by the solvers: EXACT (finite) or GRID(m).
    family_route: String,
    n_points: usize,
    seed: u64,
    n_samples: usize,
    verdict: &'a str,
    exit_code: i32,
    result: T,
}

fn family_route(p: &Prepared) -> String {
    match p.family.grid_size() {
        Some(m) => format!("GRID({m})"),
        None => "EXACT".into(),
    }
}

fn solver_config(p: &Prepared) -> SolverConfig {
    SolverConfig {
        certificate_tol: p.config.tolerances.certificate,
        witness_tol: p.config.tolerances.witness,
        ..SolverConfig::default()
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "inf".into()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn depth(p: &Prepared) -> usize {
    p.config.depth.unwrap_or(p.points.len())
}

fn c_max(p: &Prepared) -> f64 {
    p.config.c_max.unwrap_or(DEFAULT_C_MAX)
}

pub fn run(p: &Prepared) -> Result<Outcome, RunError> {
    let (verdict, exit_code, json_result, csv) = match p.command {
        Command::Pick => pick(p)?,
        Command::Grammian => grammian(p)?,
        Command::Carleson => carleson(p)?,
        Command::Analyze => analyze(p)?,
        Command::Realize => realize(p)?,
        Command::VerifyTheorem => theorem(p)?,
    };
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command: p.command.name(),
        domain: p.points.domain().to_string(),
        family: p.family.to_spec(),
        kernel_route: Route::for_domain(p.points.domain()),
        family_route: family_route(p),
        n_points: p.points.len(),
        seed: p.seed,
        n_samples: p.n_samples,
        verdict,
        exit_code,
        result: json_result,
    };
    let mut json = serde_json::to_string_pretty(&envelope)?;
    json.push('\n');
    Ok(Outcome {
        command: p.command,
        exit_code,
        json,
        csv: csv.filter(|_| p.config.output.csv),
    })
}

type Parts = (&'static str, i32, serde_json::Value, Option<String>);

#[derive(Serialize)]
#[serde(untagged)]
enum Verification {
    Certificate(CertificateCheck),
    Witness(WitnessCheck),
}

#[derive(Serialize)]
struct PickFeasibility {
    #[serde(rename = "C")]
    c: f64,
    feasibility: FeasibilityResult,
    verification: Option<Verification>,
}

fn pick(p: &Prepared) -> Result<Parts, RunError> {
    let targets = p.targets.clone().expect("validated");
    let config = solver_config(p);
    let tol = &p.config.tolerances;
    match p.config.c {
        Some(c) => {
            let problem =
                InterpolationProblem::new(p.points.clone(), targets, c, p.family.clone())?;
            let feasibility = agler_feasibility_with(&problem, &config);
            let (verdict, code, verification) = match &feasibility.status {
                FeasibilityStatus::Feasible(cert) => (
                    "feasible",
                    EXIT_OK,
                    Some(Verification::Certificate(verify_certificate(
                        cert,
                        &problem,
                        tol.certificate,
                    )?)),
                ),
                FeasibilityStatus::Infeasible(w) => (
                    "infeasible",
                    EXIT_NEGATIVE,
                    Some(Verification::Witness(w.verify(&problem, tol.witness)?)),
                ),
                FeasibilityStatus::Indeterminate(_) => ("indeterminate", EXIT_INDETERMINATE, None),
            };
            let body = PickFeasibility {
                c,
                feasibility,
                verification,
            };
            Ok((verdict, code, serde_json::to_value(body)?, None))
        }
        None => {
            let m: MinimalNorm = minimal_norm_with(
                &p.points,
                &targets,
                &p.family,
                tol.min_norm,
                DEFAULT_NORM_CAP,
                &config,
            )?;
            let (verdict, code) = match m.status {
                MinimalNormStatus::Converged => ("converged", EXIT_OK),
                MinimalNormStatus::Unbounded => ("unbounded", EXIT_NEGATIVE),
                MinimalNormStatus::Indeterminate => ("indeterminate", EXIT_INDETERMINATE),
            };
            Ok((
                verdict,
                code,
                serde_json::json!({ "minimal_norm": m }),
                None,
            ))
        }
    }
}

const TREND_HEADER: [&str; 6] = [
    "n",
    "lambda_min",
    "lambda_max",
    "N_estimate",
    "M_estimate",
    "provenance",
];

fn trend_csv(rows: &[TrendRow]) -> Result<String, RunError> {
    csv_table(
        &TREND_HEADER,
        rows.iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.lambda_min),
                    fmt_f64(r.lambda_max),
                    fmt_opt(r.n_estimate),
                    fmt_f64(r.m_estimate),
                    r.provenance.to_string(),
                ]
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct GrammianBody {
    depth: usize,
    trend: Vec<TrendRow>,
    cone: ConeBounds,
}

fn grammian_parts(p: &Prepared) -> Result<(GrammianBody, String), RunError> {
    let d = depth(p);
    let trend = truncation_trend(&p.points, &p.family, d)?;
    let cone = bounds_over_cone(&p.points.prefix(d), &p.family, p.n_samples, p.seed)?;
    let csv = trend_csv(&trend)?;
    Ok((
        GrammianBody {
            depth: d,
            trend,
            cone,
        },
        csv,
    ))
}

fn grammian(p: &Prepared) -> Result<Parts, RunError> {
    let (body, csv) = grammian_parts(p)?;
    let (verdict, code) = if body.cone.n_estimate.is_some() {
        ("bounded_below", EXIT_OK)
    } else {
        ("degenerate", EXIT_NEGATIVE)
    };
    Ok((verdict, code, serde_json::to_value(body)?, Some(csv)))
}

#[derive(Serialize)]
struct CarlesonBody {
    /// Index into `per_descriptor` of the largest `eps`.
    best: usize,
    epsilon: f64,
    per_descriptor: Vec<SeparationReport>,
}

fn carleson_parts(p: &Prepared) -> Result<(CarlesonBody, String), RunError> {
    let reps = p
        .family
        .descriptors()
        .iter()
        .map(|d| carleson_products(&p.points, &p.family, d))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = 0;
    for (i, r) in reps.iter().enumerate() {
        if r.constant > reps[best].constant {
            best = i;
        }
    }
    let rows = reps
        .iter()
        .flat_map(|r| {
            let name = r.descriptor.map(|d| d.to_string()).unwrap_or_default();
            r.per_index_detail
                .iter()
                .map(move |row| vec![name.clone(), row.i.to_string(), fmt_f64(row.value)])
        })
        .collect();
    let csv = csv_table(&["descriptor", "m", "product"], rows)?;
    Ok((
        CarlesonBody {
            best,
            epsilon: reps[best].constant,
            per_descriptor: reps,
        },
        csv,
    ))
}

fn carleson(p: &Prepared) -> Result<Parts, RunError> {
    let (body, csv) = carleson_parts(p)?;
    let ok = body.per_descriptor[body.best].verdict;
    let (verdict, code) = if ok {
        ("carleson_sufficient", EXIT_OK)
    } else {
        ("not_established", EXIT_NEGATIVE)
    };
    Ok((verdict, code, serde_json::to_value(body)?, Some(csv)))
}

#[derive(Serialize)]
struct AnalyzeBody {
    #[serde(rename = "C_max")]
    c_max: f64,
    grammian: GrammianBody,
    carleson: CarlesonBody,
    strong_separation: SeparationReport,
}

fn analyze(p: &Prepared) -> Result<Parts, RunError> {
    let (grammian, csv) = grammian_parts(p)?;
    let (carleson, _) = carleson_parts(p)?;
    let points = p.points.prefix(depth(p));
    let strong = strong_separation_certificate(&points, &p.family, c_max(p))?;
    let (verdict, code) = if strong.verdict {
        ("strongly_separated", EXIT_OK)
    } else {
        ("not_separated_within_C_max", EXIT_NEGATIVE)
    };
    let body = AnalyzeBody {
        c_max: c_max(p),
        grammian,
        carleson,
        strong_separation: strong,
    };
    Ok((verdict, code, serde_json::to_value(body)?, Some(csv)))
}

#[derive(Serialize)]
struct RealizeBody {
    colligation: ColligationSpec,
    unitary: UnitaryCheck,
    #[serde(rename = "C")]
    c: f64,
    /// Row-major `[re, im]` values per point.
    values: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    max_abs_value: Option<f64>,
    membership: Option<MembershipReport>,
}

fn realize(p: &Prepared) -> Result<Parts, RunError> {
    let spec = p.config.colligation.clone().expect("validated");
    let col = Colligation::from_spec(&spec).map_err(|e| field("/colligation", e.to_string()))?;
    if col.family() != &p.family {
        return Err(field("/family", "does not match the colligation's family").into());
    }
    let unitary = is_unitary(&col, UNITARY_TOL)?;
    let c = p.config.c.unwrap_or(1.0);
    let mut body = RealizeBody {
        colligation: spec,
        unitary,
        c,
        values: None,
        max_abs_value: None,
        membership: None,
    };
    if !unitary.unitary {
        return Ok((
            "not_unitary",
            EXIT_NEGATIVE,
            serde_json::to_value(body)?,
            None,
        ));
    }
    let values = ValueMap::from_colligation(&col, &p.points)?;
    let base = base_kernel(&p.points, &p.family)?;
    let mut kernels = vec![base.clone()];
    kernels.extend(sample_cone(&base, p.n_samples, p.seed)?);
    let membership = membership_test(&values, &kernels, c, p.config.tolerances.membership)?;

    let mut rows = Vec::new();
    let mut grid = Vec::new();
    let mut max_abs: f64 = 0.0;
    for (i, v) in values.values().iter().enumerate() {
        let mut m = Vec::new();
        for r in 0..v.nrows() {
            let mut line = Vec::new();
            for cc in 0..v.ncols() {
                let z = v[(r, cc)];
                max_abs = max_abs.max(z.norm());
                line.push([z.re, z.im]);
                rows.push(vec![
                    i.to_string(),
                    r.to_string(),
                    cc.to_string(),
                    fmt_f64(z.re),
                    fmt_f64(z.im),
                ]);
            }
            m.push(line);
        }
        grid.push(m);
    }
    let csv = csv_table(&["i", "row", "col", "re", "im"], rows)?;
    let (verdict, code) = if membership.passed {
        ("member", EXIT_OK)
    } else {
        ("not_member", EXIT_NEGATIVE)
    };
    body.values = Some(grid);
    body.max_abs_value = Some(max_abs);
    body.membership = Some(membership);
    Ok((verdict, code, serde_json::to_value(body)?, Some(csv)))
}

fn theorem(p: &Prepared) -> Result<Parts, RunError> {
    let params = TheoremParams {
        n_samples: p.n_samples,
        seed: p.seed,
        c_max: c_max(p),
    };
    let rep: TheoremReport = verify_theorem(&p.points, &p.family, depth(p), &params)?;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_opt(r.strong_sep_constant),
                fmt_opt(r.lambda_min_worst),
                fmt_opt(r.lambda_max_worst),
                r.lambda_route.to_string(),
                fmt_opt(r.sqrt_mn),
                fmt_opt(r.carleson_epsilon),
                r.consistency_flags
                    .as_ref()
                    .is_some_and(|f| f.consistent())
                    .to_string(),
                r.status.clone(),
            ]
        })
        .collect();
    let csv = csv_table(
        &[
            "n",
            "strong_sep_constant",
            "lambda_min_worst",
            "lambda_max_worst",
            "lambda_route",
            "sqrt_MN",
            "carleson_epsilon",
            "consistent",
            "status",
        ],
        rows,
    )?;
    let (verdict, code) = if rep.all_consistent {
        ("consistent", EXIT_OK)
    } else {
        ("inconsistent", EXIT_NEGATIVE)
    };
    Ok((verdict, code, serde_json::to_value(rep)?, Some(csv)))
}
