//! Cross-check table of separation and Grammian diagnostics over nested
//! truncations.
//!
//! The flags only assert implications that hold for each finite truncation.
//! Two of them are theorems at finite size:
//!
//! * on the disc the Szego kernel is extremal, so the minimal norm of the
//!   `delta_i` data is at most `sqrt(N)` and hence at most `sqrt(N M)`;
//! * for any test function `psi`, `B_i o psi / B_i(psi(w_i))` (with `B_i`
//!   the finite Blaschke product vanishing on the other images) interpolates
//!   `delta_i` with norm at most `1 / eps_psi`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agler::DEFAULT_NORM_CAP;
use crate::error::{Error, Result};
pub use crate::grammian::Route;
use crate::grammian::{bounds_over_cone, LAMBDA_FLOOR};
use crate::separation::{
    carleson_products, finite_or_null, strong_separation_certificate, CARLESON_TOL,
};
use crate::test_functions::{DomainTag, FamilySpec, PointConfig, TestFunctionFamily};

pub const SCHEMA_VERSION: u32 = 1;

/// Relative slack for comparing a bisected minimal norm with a closed-form bound.
pub const FLAG_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub n_samples: usize,
    pub seed: u64,
    #[serde(rename = "C_max")]
    pub c_max: f64,
}

impl Default for TheoremParams {
    fn default() -> Self {
        Self {
            n_samples: 16,
            seed: 0,
            c_max: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyFlags {
    pub strong_constant_finite: bool,
    pub lambda_min_positive: bool,
    pub carleson_positive: bool,
    /// `strong <= sqrt(N M)`; only checked on the EXACT route.
    pub strong_le_sqrt_mn: Option<bool>,
    /// `strong <= 1 / eps` for the best Carleson descriptor; `None` when
    /// `1 / eps` exceeds the minimal-norm cap.
    pub strong_le_inverse_carleson: Option<bool>,
}

impl ConsistencyFlags {
    /// No flag that was checked came out false.
    pub fn consistent(&self) -> bool {
        self.strong_le_sqrt_mn != Some(false) && self.strong_le_inverse_carleson != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremRow {
    pub n: usize,
    pub status: String,
    #[serde(serialize_with = "opt_finite_or_null")]
    pub strong_sep_constant: Option<f64>,
    /// EXACT for finite coordinate families, GRID(m) for the G2 grid family.
    pub strong_route: String,
    /// Minimal norm of the probe `delta_n` (newest point).
    #[serde(serialize_with = "opt_finite_or_null")]
    pub probe_norm: Option<f64>,
    pub lambda_min_worst: Option<f64>,
    pub lambda_max_worst: Option<f64>,
    pub lambda_route: Route,
    #[serde(rename = "N_estimate")]
    pub n_estimate: Option<f64>,
    #[serde(rename = "M_estimate")]
    pub m_estimate: Option<f64>,
    #[serde(rename = "sqrt_MN")]
    pub sqrt_mn: Option<f64>,
    pub carleson_epsilon: Option<f64>,
    pub carleson_descriptor: Option<String>,
    pub consistency_flags: Option<ConsistencyFlags>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSummary {
    /// `lambda_min(first) / lambda_min(last)`; `None` if either is missing or nonpositive.
    pub lambda_min_decrease_factor: Option<f64>,
    /// `strong(last) / strong(first)`.
    pub strong_increase_factor: Option<f64>,
    /// Both diagnostics moved adversely between the first and last rows.
    pub adverse_together: bool,
    /// Neither diagnostic moved adversely.
    pub stable_together: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub schema_version: u32,
    pub domain: String,
    pub family: FamilySpec,
    pub depth: usize,
    pub params: TheoremParams,
    pub rows: Vec<TheoremRow>,
    pub trend: TrendSummary,
    pub all_consistent: bool,
    pub note: String,
}

fn opt_finite_or_null<S: serde::Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => finite_or_null(x, s),
        None => s.serialize_none(),
    }
}

fn strong_route(family: &TestFunctionFamily) -> String {
    match family.grid_size() {
        Some(m) => format!("GRID({m})"),
        None => "EXACT".into(),
    }
}

fn row(points: &PointConfig, family: &TestFunctionFamily, params: &TheoremParams) -> TheoremRow {
    let n = points.len();
    let mut row = TheoremRow {
        n,
        status: "ok".into(),
        strong_sep_constant: None,
        strong_route: strong_route(family),
        probe_norm: None,
        lambda_min_worst: None,
        lambda_max_worst: None,
        lambda_route: Route::for_domain(points.domain()),
        n_estimate: None,
        m_estimate: None,
        sqrt_mn: None,
        carleson_epsilon: None,
        carleson_descriptor: None,
        consistency_flags: None,
    };
    let mut errors = Vec::new();

    match strong_separation_certificate(points, family, params.c_max) {
        Ok(rep) => {
            row.strong_sep_constant = Some(rep.constant);
            row.probe_norm = rep.per_index_detail.last().map(|d| d.value);
        }
        Err(e) => errors.push(format!("strong: {e}")),
    }
    match bounds_over_cone(points, family, params.n_samples, params.seed) {
        Ok(b) => {
            row.lambda_min_worst = Some(b.lambda_min);
            row.lambda_max_worst = Some(b.lambda_max);
            row.n_estimate = b.n_estimate;
            row.m_estimate = Some(b.m_estimate);
            row.sqrt_mn = b.n_estimate.map(|nn| (nn * b.m_estimate).sqrt());
        }
        Err(e) => errors.push(format!("grammian: {e}")),
    }
    let carleson = family
        .descriptors()
        .iter()
        .map(|d| carleson_products(points, family, d))
        .collect::<Result<Vec<_>>>();
    match carleson {
        Ok(reps) => {
            // First descriptor attaining the best eps, so ties are deterministic.
            if let Some(best) = reps
                .iter()
                .reduce(|a, b| if b.constant > a.constant { b } else { a })
            {
                row.carleson_epsilon = Some(best.constant);
                row.carleson_descriptor = best.descriptor.map(|d| d.to_string());
            }
        }
        Err(e) => errors.push(format!("carleson: {e}")),
    }

    if !errors.is_empty() {
        row.status = errors.join("; ");
        return row;
    }
    let strong = row.strong_sep_constant.unwrap_or(f64::INFINITY);
    let eps = row.carleson_epsilon.unwrap_or(0.0);
    let slack = |bound: f64| bound * (1.0 + FLAG_REL_TOL);
    row.consistency_flags = Some(ConsistencyFlags {
        strong_constant_finite: strong.is_finite(),
        lambda_min_positive: row.lambda_min_worst.is_some_and(|l| l > LAMBDA_FLOOR),
        carleson_positive: eps > CARLESON_TOL,
        strong_le_sqrt_mn: match (row.lambda_route, row.sqrt_mn) {
            (Route::Exact, Some(b)) => Some(strong <= slack(b)),
            _ => None,
        },
        // Past the norm cap the solver reports infinity, so the bound is only
        // testable below it.
        strong_le_inverse_carleson: (eps > 0.0 && 1.0 / eps <= DEFAULT_NORM_CAP)
            .then(|| strong <= slack(1.0 / eps)),
    });
    row
}

fn trend(rows: &[TheoremRow]) -> TrendSummary {
    let ok: Vec<&TheoremRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let (first, last) = match (ok.first(), ok.last()) {
        (Some(f), Some(l)) if ok.len() >= 2 => (*f, *l),
        _ => {
            return TrendSummary {
                lambda_min_decrease_factor: None,
                strong_increase_factor: None,
                adverse_together: false,
                stable_together: true,
            }
        }
    };
    let lambda = match (first.lambda_min_worst, last.lambda_min_worst) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some(a / b),
        _ => None,
    };
    let strong = match (first.strong_sep_constant, last.strong_sep_constant) {
        (Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    let lam_adverse = lambda.is_none_or(|f| f > 1.0 + FLAG_REL_TOL);
    let strong_adverse = strong.is_none_or(|f| f > 1.0 + FLAG_REL_TOL);
    TrendSummary {
        lambda_min_decrease_factor: lambda,
        strong_increase_factor: strong,
        adverse_together: lam_adverse && strong_adverse,
        stable_together: !lam_adverse && !strong_adverse,
    }
}

fn domain_name(d: DomainTag) -> String {
    d.to_string()
}

/// One row per truncation `n = 1..=depth`. Per-row failures are reported in
/// the row's `status` instead of aborting the table.
pub fn verify_theorem(
    points: &PointConfig,
    family: &TestFunctionFamily,
    depth: usize,
    params: &TheoremParams,
) -> Result<TheoremReport> {
    if depth == 0 || depth > points.len() {
        return Err(Error::InvalidInput(format!(
            "depth must lie in 1..={}, got {depth}",
            points.len()
        )));
    }
    if points.domain() != family.domain() {
        return Err(Error::DomainMismatch {
            expected: family.domain().to_string(),
            found: points.domain().to_string(),
        });
    }
    let rows: Vec<TheoremRow> = (1..=depth)
        .into_par_iter()
        .map(|n| row(&points.prefix(n), family, params))
        .collect();
    let trend = trend(&rows);
    let all_consistent = rows.iter().all(|r| {
        r.consistency_flags
            .as_ref()
            .is_some_and(ConsistencyFlags::consistent)
    });
    Ok(TheoremReport {
        schema_version: SCHEMA_VERSION,
        domain: domain_name(points.domain()),
        family: family.to_spec(),
        depth,
        params: params.clone(),
        rows,
        trend,
        all_consistent,
        note: "finite-truncation diagnostics only; no statement about the infinite sequence is certified".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{generate, SequenceFamily, SequenceSpec};
    use crate::C64;

    fn disc_seq(family: SequenceFamily, depth: usize) -> PointConfig {
        generate(&SequenceSpec::new(family, depth)).unwrap()
    }

    #[test]
    fn exponential_sequence_is_consistent() {
        let pts = disc_seq(SequenceFamily::ExponentialRadial { base: 0.5 }, 8);
        let rep = verify_theorem(
            &pts,
            &TestFunctionFamily::disc(),
            8,
            &TheoremParams::default(),
        )
        .unwrap();
        assert_eq!(rep.rows.len(), 8);
        assert!(rep.all_consistent);
        for r in &rep.rows {
            let f = r.consistency_flags.as_ref().unwrap();
            assert!(
                f.strong_constant_finite && f.lambda_min_positive && f.carleson_positive,
                "{r:?}"
            );
            assert_eq!(f.strong_le_sqrt_mn, Some(true));
            assert_eq!(r.lambda_route, Route::Exact);
        }
        let lam: Vec<f64> = rep
            .rows
            .iter()
            .map(|r| r.lambda_min_worst.unwrap())
            .collect();
        assert!(lam.iter().all(|&l| l > lam[7] * 0.999));
    }

    #[test]
    fn polynomial_sequence_moves_adversely() {
        let pts = disc_seq(SequenceFamily::PolynomialRadial { power: 1.0 }, 30);
        let rep = verify_theorem(
            &pts,
            &TestFunctionFamily::disc(),
            30,
            &TheoremParams {
                c_max: 1e12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rep.all_consistent);
        assert!(rep.trend.adverse_together);
        // Nested principal submatrices: lambda_min can only drop.
        for w in rep.rows.windows(2) {
            assert!(w[1].lambda_min_worst.unwrap() <= w[0].lambda_min_worst.unwrap() + 1e-12);
            assert!(
                w[1].strong_sep_constant.unwrap()
                    >= w[0].strong_sep_constant.unwrap() * (1.0 - 1e-6)
            );
        }
    }

    #[test]
    fn single_point_row() {
        let pts = PointConfig::disc(&[C64::new(0.3, 0.0)]).unwrap();
        let rep = verify_theorem(
            &pts,
            &TestFunctionFamily::disc(),
            1,
            &TheoremParams::default(),
        )
        .unwrap();
        let r = &rep.rows[0];
        assert!(rep.all_consistent);
        assert!((r.strong_sep_constant.unwrap() - 1.0).abs() < 1e-6);
        assert!((r.lambda_min_worst.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.carleson_epsilon, Some(1.0));
        assert!(rep.trend.stable_together);
    }

    #[test]
    fn bidisc_rows_are_sampled() {
        let pts = generate(&SequenceSpec::new(
            SequenceFamily::DiagonalBidisc {
                inner: Box::new(SequenceFamily::ExponentialRadial { base: 0.5 }),
            },
            3,
        ))
        .unwrap();
        let rep = verify_theorem(
            &pts,
            &TestFunctionFamily::polydisc(2).unwrap(),
            3,
            &TheoremParams::default(),
        )
        .unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| r.lambda_route == Route::Sampled && r.status == "ok"));
        assert!(rep.rows.iter().all(|r| r
            .consistency_flags
            .as_ref()
            .unwrap()
            .strong_le_sqrt_mn
            .is_none()));
        assert!(rep.all_consistent);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"schema_version\":1"));
        assert!(json.contains("\"lambda_route\":\"SAMPLED\""));
    }

    #[test]
    fn bad_depth() {
        let pts = disc_seq(SequenceFamily::ExponentialRadial { base: 0.5 }, 3);
        assert!(verify_theorem(
            &pts,
            &TestFunctionFamily::disc(),
            4,
            &TheoremParams::default()
        )
        .is_err());
        assert!(verify_theorem(
            &pts,
            &TestFunctionFamily::disc(),
            0,
            &TheoremParams::default()
        )
        .is_err());
    }
}
