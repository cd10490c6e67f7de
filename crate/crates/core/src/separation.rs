//! Pseudohyperbolic geometry, the Carleson-type product condition and finite
//! weak/strong separation constants.
//!
//! Separation constants are minimal norms of finite interpolation problems, so
//! they are exact for the truncation at hand (up to the bisection tolerance)
//! and say nothing by themselves about the infinite sequence.

use rayon::prelude::*;
use serde::Serialize;

use crate::agler::{
    minimal_norm_with, MinimalNorm, MinimalNormStatus, SolverConfig, DEFAULT_NORM_CAP,
};
use crate::error::{Error, Result};
use crate::test_functions::{Descriptor, PointConfig, TestFunctionFamily};
use crate::C64;

/// Carleson verdict threshold on `eps`.
pub const CARLESON_TOL: f64 = 1e-8;

/// Relative bisection tolerance for separation constants.
pub const SEPARATION_TOL: f64 = 1e-7;

/// `|z - w| / |1 - z conj(w)|`.
pub fn pseudohyperbolic(z: C64, w: C64) -> Result<f64> {
    for v in [z, w] {
        if !(v.norm() < 1.0) {
            return Err(Error::NotInDisc {
                value: format!("{v}"),
            });
        }
    }
    Ok(raw_rho(z, w))
}

fn raw_rho(z: C64, w: C64) -> f64 {
    if z == w {
        return 0.0;
    }
    (z - w).norm() / (C64::new(1.0, 0.0) - z * w.conj()).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationKind {
    Weak,
    Strong,
    CarlesonSufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetailRow {
    pub i: usize,
    /// Second index for pairwise (weak) rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    /// `null` in JSON when infinite.
    #[serde(serialize_with = "finite_or_null")]
    pub value: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub kind: SeparationKind,
    #[serde(serialize_with = "finite_or_null")]
    pub constant: f64,
    pub per_index_detail: Vec<DetailRow>,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<Descriptor>,
}

pub(crate) fn finite_or_null<S: serde::Serializer>(
    v: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// For each `m`, `prod_{j != m} rho(psi(w_j), psi(w_m))`, accumulated in log
/// space. `eps` is the minimum over `m`.
pub fn carleson_products(
    points: &PointConfig,
    family: &TestFunctionFamily,
    descriptor: &Descriptor,
) -> Result<SeparationReport> {
    if !family.descriptors().contains(descriptor) {
        return Err(Error::InvalidInput(format!(
            "descriptor {descriptor} is not in the family"
        )));
    }
    let images = points
        .points()
        .iter()
        .map(|p| family.evaluate(descriptor, p))
        .collect::<Result<Vec<_>>>()?;
    let per_index_detail: Vec<DetailRow> = (0..images.len())
        .map(|m| {
            let log: f64 = (0..images.len())
                .filter(|&j| j != m)
                .map(|j| raw_rho(images[j], images[m]).ln())
                .sum();
            DetailRow {
                i: m,
                j: None,
                value: log.exp(),
                status: "exact".into(),
            }
        })
        .collect();
    let constant = per_index_detail
        .iter()
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    // A single point has the empty product 1.
    let constant = if constant.is_finite() { constant } else { 1.0 };
    Ok(SeparationReport {
        kind: SeparationKind::CarlesonSufficient,
        constant,
        verdict: constant > CARLESON_TOL,
        per_index_detail,
        descriptor: Some(*descriptor),
    })
}

fn detail(i: usize, j: Option<usize>, m: Result<MinimalNorm>) -> DetailRow {
    match m {
        Ok(m) => DetailRow {
            i,
            j,
            value: m.value,
            status: match m.status {
                MinimalNormStatus::Converged => "converged",
                MinimalNormStatus::Indeterminate => "indeterminate",
                MinimalNormStatus::Unbounded => "unbounded",
            }
            .into(),
        },
        Err(e) => DetailRow {
            i,
            j,
            value: f64::INFINITY,
            status: format!("error: {e}"),
        },
    }
}

fn check_cmax(c_max: f64) -> Result<()> {
    if c_max >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "C_max must be at least 1, got {c_max}"
        )))
    }
}

fn report(kind: SeparationKind, rows: Vec<DetailRow>, c_max: f64) -> SeparationReport {
    let constant = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    SeparationReport {
        kind,
        constant,
        verdict: constant.is_finite() && constant <= c_max,
        per_index_detail: rows,
        descriptor: None,
    }
}

/// `R = max_{i != j}` of the minimal norm with `phi(w_i) = 1`, `phi(w_j) = 0`.
pub fn weak_separation_constant(
    points: &PointConfig,
    family: &TestFunctionFamily,
    c_max: f64,
) -> Result<SeparationReport> {
    check_cmax(c_max)?;
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "weak separation needs at least two points".into(),
        ));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let config = SolverConfig::default();
    let rows = pairs
        .par_iter()
        .map(|&(i, j)| {
            let sub = points.select(&[i, j]);
            let targets = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
            detail(
                i,
                Some(j),
                minimal_norm_with(
                    &sub,
                    &targets,
                    family,
                    SEPARATION_TOL,
                    DEFAULT_NORM_CAP,
                    &config,
                ),
            )
        })
        .collect();
    Ok(report(SeparationKind::Weak, rows, c_max))
}

/// Per `i`, the minimal norm of `phi(w_j) = delta_ij` over the whole truncation.
pub fn strong_separation_certificate(
    points: &PointConfig,
    family: &TestFunctionFamily,
    c_max: f64,
) -> Result<SeparationReport> {
    check_cmax(c_max)?;
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "strong separation needs at least one point".into(),
        ));
    }
    let config = SolverConfig::default();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let targets: Vec<C64> = (0..n)
                .map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect();
            detail(
                i,
                None,
                minimal_norm_with(
                    points,
                    &targets,
                    family,
                    SEPARATION_TOL,
                    DEFAULT_NORM_CAP,
                    &config,
                ),
            )
        })
        .collect();
    Ok(report(SeparationKind::Strong, rows, c_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::test_functions::DomainTag;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn disc(zs: &[f64]) -> PointConfig {
        PointConfig::disc(&zs.iter().map(|&x| r(x)).collect::<Vec<_>>()).unwrap()
    }

    fn dyadic(n: usize) -> Vec<f64> {
        (1..=n).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect()
    }

    fn mobius(a: C64, z: C64) -> C64 {
        (z - a) / (r(1.0) - a.conj() * z)
    }

    // Plain-product oracle for the disc family.
    fn products(zs: &[f64]) -> Vec<f64> {
        (0..zs.len())
            .map(|m| {
                (0..zs.len())
                    .filter(|&j| j != m)
                    .map(|j| ((zs[j] - zs[m]) / (1.0 - zs[j] * zs[m])).abs())
                    .product()
            })
            .collect()
    }

    #[test]
    fn rho_examples() {
        let w = C64::new(0.3, -0.4);
        assert_eq!(pseudohyperbolic(w, w).unwrap(), 0.0);
        assert!((pseudohyperbolic(r(0.0), w).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            pseudohyperbolic(r(1.0), w),
            Err(Error::NotInDisc { .. })
        ));
        let mut g = rng::stream(1, 0);
        for _ in 0..100 {
            let (a, z, w) = (
                rng::disc_point(&mut g, 0.95),
                rng::disc_point(&mut g, 0.95),
                rng::disc_point(&mut g, 0.95),
            );
            let lhs = pseudohyperbolic(mobius(a, z), mobius(a, w)).unwrap();
            let rhs = pseudohyperbolic(z, w).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
            assert!((0.0..1.0).contains(&rhs));
        }
    }

    #[test]
    fn carleson_examples() {
        let fam = TestFunctionFamily::disc();
        let z1 = Descriptor::Coordinate(0);
        let rep = carleson_products(&disc(&[0.0, 0.5]), &fam, &z1).unwrap();
        assert!((rep.constant - 0.5).abs() < 1e-15);
        assert!(rep.verdict);

        // eps decreases to its limit (about 0.01466); the truncations settle
        // from n = 12 on.
        let mut eps = Vec::new();
        for n in [8, 12, 16, 30] {
            let zs = dyadic(n);
            let rep = carleson_products(&disc(&zs), &fam, &z1).unwrap();
            let oracle = products(&zs);
            for (row, o) in rep.per_index_detail.iter().zip(&oracle) {
                assert!((row.value - o).abs() < 1e-12 * o.max(1e-300));
            }
            assert!(rep.verdict);
            eps.push(rep.constant);
        }
        assert!(eps.windows(2).all(|w| w[1] <= w[0]), "{eps:?}");
        assert!((eps[2] / eps[1] - 1.0).abs() < 0.1, "{eps:?}");
        assert!(eps[3] > 0.014, "{eps:?}");

        let d2 = DomainTag::Polydisc(2);
        let pts =
            PointConfig::from_coords(d2, vec![vec![r(0.3), r(0.1)], vec![r(0.3), r(0.5)]]).unwrap();
        let rep = carleson_products(&pts, &TestFunctionFamily::polydisc(2).unwrap(), &z1).unwrap();
        assert_eq!(rep.constant, 0.0);
        assert!(!rep.verdict);
    }

    #[test]
    fn carleson_log_space_survives_long_sequences() {
        let zs: Vec<f64> = (1..=60).map(|j| 1.0 - 1.0 / (j as f64 + 1.0)).collect();
        let rep = carleson_products(
            &disc(&zs),
            &TestFunctionFamily::disc(),
            &Descriptor::Coordinate(0),
        )
        .unwrap();
        assert!(rep.constant >= 0.0 && rep.constant < 1e-8);
        assert!(!rep.verdict);
        // Bounded by the smallest single factor.
        let min_factor = zs
            .windows(2)
            .map(|w| (w[1] - w[0]) / (1.0 - w[0] * w[1]))
            .fold(1.0, f64::min);
        assert!(rep.constant <= min_factor);
    }

    #[test]
    fn weak_separation_examples() {
        let fam = TestFunctionFamily::disc();
        let rep = weak_separation_constant(&disc(&[0.0, 0.5]), &fam, 10.0).unwrap();
        assert!((rep.constant - 2.0).abs() < 1e-6);
        for row in &rep.per_index_detail {
            assert!((row.value - 2.0).abs() < 1e-6, "{row:?}");
        }
        assert!(rep.verdict);

        let d2 = DomainTag::Polydisc(2);
        let z1 = TestFunctionFamily::with_descriptors(d2, vec![Descriptor::Coordinate(0)]).unwrap();
        let pts =
            PointConfig::from_coords(d2, vec![vec![r(0.3), r(0.1)], vec![r(0.3), r(0.5)]]).unwrap();
        let rep = weak_separation_constant(&pts, &z1, 10.0).unwrap();
        assert!(rep.constant.is_infinite());
        assert!(!rep.verdict);

        let rep = weak_separation_constant(&disc(&[-0.4, 0.1, 0.4]), &fam, 100.0).unwrap();
        for row in &rep.per_index_detail {
            let mirror = rep
                .per_index_detail
                .iter()
                .find(|o| o.i == row.j.unwrap() && o.j == Some(row.i))
                .unwrap();
            assert!((row.value - mirror.value).abs() < 1e-6);
        }
        assert!(weak_separation_constant(&disc(&[0.1]), &fam, 2.0).is_err());
        assert!(weak_separation_constant(&disc(&[0.1, 0.2]), &fam, 0.5).is_err());
    }

    #[test]
    fn strong_separation_examples() {
        let fam = TestFunctionFamily::disc();
        let rep = strong_separation_certificate(&disc(&[0.3]), &fam, 1.0).unwrap();
        assert!((rep.constant - 1.0).abs() < 1e-12);

        let pts = disc(&[0.0, 0.5]);
        let strong = strong_separation_certificate(&pts, &fam, 10.0).unwrap();
        let weak = weak_separation_constant(&pts, &fam, 10.0).unwrap();
        assert!((strong.per_index_detail[0].value - weak.per_index_detail[0].value).abs() < 1e-6);

        // Disc closed form: 1 / prod_{j != i} rho(z_i, z_j) (Blaschke quotient).
        let zs = dyadic(6);
        let pts = disc(&zs);
        let strong = strong_separation_certificate(&pts, &fam, 1e6).unwrap();
        let weak = weak_separation_constant(&pts, &fam, 1e6).unwrap();
        for (row, p) in strong.per_index_detail.iter().zip(products(&zs)) {
            assert!(
                (row.value - 1.0 / p).abs() < 1e-6 * (1.0 / p),
                "{row:?} vs {}",
                1.0 / p
            );
        }
        assert!(strong.constant.is_finite() && strong.verdict);
        assert!(strong.constant >= weak.constant - 1e-6 * weak.constant);
    }

    #[test]
    fn carleson_implies_finite_strong_constant() {
        let fam = TestFunctionFamily::disc();
        let pts = disc(&dyadic(8));
        let c = carleson_products(&pts, &fam, &Descriptor::Coordinate(0)).unwrap();
        assert!(c.verdict);
        let s = strong_separation_certificate(&pts, &fam, 1e6).unwrap();
        assert!(s.verdict);
        // f o psi with the Blaschke-quotient f has norm at most 1 / eps.
        assert!(s.constant <= 1.0 / c.constant * (1.0 + 1e-6));
    }
}
