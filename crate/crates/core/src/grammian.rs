//! Normalized Grammians `G[i][j] = k(w_i, w_j) / sqrt(k(w_i, w_i) k(w_j, w_j))`
//! and the uniform bound diagnostics `N` (lower) and `M` (upper).

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    base_kernel, random_psd_factor, sample_seed, scale_by_gram, KernelSample, Provenance,
};
use crate::linalg::{min_max_eigenvalues, HermitianMatrix, PSD_REL_TOL};
use crate::test_functions::{DomainTag, PointConfig, TestFunctionFamily};
use crate::C64;

/// Diagonal entries at or below this are degenerate.
pub const DEGENERATE_DIAGONAL: f64 = 1e-14;

/// `lambda_min` at or below this reports `N_estimate = inf` (serialized as `null`).
pub const LAMBDA_FLOOR: f64 = PSD_REL_TOL;

/// How a statement quantified over the admissible cone was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Route {
    /// Szego kernel is extremal on the disc, so the base kernel decides.
    Exact,
    /// Base kernel plus random cone samples.
    Sampled,
}

impl Route {
    pub fn for_domain(domain: DomainTag) -> Self {
        match domain {
            DomainTag::Disc | DomainTag::Polydisc(1) => Route::Exact,
            _ => Route::Sampled,
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Exact => "EXACT",
            Route::Sampled => "SAMPLED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrammianDiagnostics {
    #[serde(rename = "G")]
    pub g: HermitianMatrix,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `1 / lambda_min`; `None` is the infinity flag.
    #[serde(rename = "N_estimate")]
    pub n_estimate: Option<f64>,
    #[serde(rename = "M_estimate")]
    pub m_estimate: f64,
    pub kernel_provenance: Provenance,
}

impl GrammianDiagnostics {
    fn from_normalized(g: HermitianMatrix, provenance: Provenance) -> Self {
        let spec = min_max_eigenvalues(&g);
        Self {
            g,
            lambda_min: spec.min_eig,
            lambda_max: spec.max_eig,
            n_estimate: n_estimate(spec.min_eig),
            m_estimate: spec.max_eig,
            kernel_provenance: provenance,
        }
    }

    /// `sqrt(N M)`, or `None` when `N` is infinite.
    pub fn sqrt_nm(&self) -> Option<f64> {
        self.n_estimate.map(|n| (n * self.m_estimate).sqrt())
    }
}

pub fn n_estimate(lambda_min: f64) -> Option<f64> {
    (lambda_min > LAMBDA_FLOOR).then(|| 1.0 / lambda_min)
}

fn normalize(gram: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = gram.diagonal();
    if let Some((index, &value)) = d
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > DEGENERATE_DIAGONAL))
    {
        return Err(Error::DegenerateDiagonal { index, value });
    }
    let s: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    Ok(HermitianMatrix::from_upper(d.len(), |i, j| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            gram.get(i, j) / (s[i] * s[j])
        }
    }))
}

pub fn normalized_grammian(k: &KernelSample) -> Result<GrammianDiagnostics> {
    let g = normalize(k.gram())?;
    Ok(GrammianDiagnostics::from_normalized(g, k.provenance()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub index: usize,
    pub seed: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeBounds {
    pub route: Route,
    pub base: GrammianDiagnostics,
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(rename = "N_estimate")]
    pub n_estimate: Option<f64>,
    #[serde(rename = "M_estimate")]
    pub m_estimate: f64,
    /// Whether the base kernel attains both extremes (within 1e-9).
    pub worst_at_base: bool,
    pub samples: Vec<SampleRow>,
}

/// Diagnostics for the base kernel and `n_samples` random cone samples
/// `base o G_g`. Sample `i` uses seed `sample_seed(seed, i)`.
pub fn bounds_over_cone(
    points: &PointConfig,
    family: &TestFunctionFamily,
    n_samples: usize,
    seed: u64,
) -> Result<ConeBounds> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    let base = base_kernel(points, family)?;
    let base_diag = normalized_grammian(&base)?;
    let n = points.len();
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|index| {
            let s = sample_seed(seed, index);
            let k = scale_by_gram(&base, &random_psd_factor(n, n, s), Provenance::ScaledBy(s))?;
            let spec = min_max_eigenvalues(&normalize(k.gram())?);
            Ok(SampleRow {
                index,
                seed: s,
                lambda_min: spec.min_eig,
                lambda_max: spec.max_eig,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda_min = samples
        .iter()
        .map(|r| r.lambda_min)
        .fold(base_diag.lambda_min, f64::min);
    let lambda_max = samples
        .iter()
        .map(|r| r.lambda_max)
        .fold(base_diag.lambda_max, f64::max);
    let worst_at_base =
        base_diag.lambda_min <= lambda_min + 1e-9 && base_diag.lambda_max >= lambda_max - 1e-9;
    Ok(ConeBounds {
        route: Route::for_domain(points.domain()),
        base: base_diag,
        lambda_min,
        lambda_max,
        n_estimate: n_estimate(lambda_min),
        m_estimate: lambda_max,
        worst_at_base,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurReductionReport {
    pub passed: bool,
    pub trials: usize,
    /// Minimum over trials of `lambda_min(c I - G_s)`, `c = lambda_max(G_base)`.
    pub worst_upper_margin: f64,
    /// Minimum over trials of `lambda_min(G_s - d I)`, `d = lambda_min(G_base)`.
    pub worst_lower_margin: f64,
    /// Seed of the first violating trial.
    pub witness_seed: Option<u64>,
}

/// Checks that the bounds of the base Grammian carry over to every sampled
/// Schur rescaling `base o G_g`.
pub fn schur_reduction_check(
    base: &KernelSample,
    n_trials: usize,
    seed: u64,
) -> Result<SchurReductionReport> {
    let tol = 1e-9;
    let g_base = normalized_grammian(base)?;
    let (d, c) = (g_base.lambda_min, g_base.lambda_max);
    let n = base.points().len();
    let margins = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, i);
            let k = scale_by_gram(base, &random_psd_factor(n, n, s), Provenance::ScaledBy(s))?;
            let g = normalize(k.gram())?;
            let upper = min_max_eigenvalues(&g.neg().shifted(c)).min_eig;
            let lower = min_max_eigenvalues(&g.shifted(-d)).min_eig;
            Ok((s, upper, lower))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_upper_margin = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let worst_lower_margin = margins.iter().map(|m| m.2).fold(f64::INFINITY, f64::min);
    let witness_seed = margins
        .iter()
        .find(|m| m.1 < -tol || m.2 < -tol)
        .map(|m| m.0);
    Ok(SchurReductionReport {
        passed: witness_seed.is_none(),
        trials: n_trials,
        worst_upper_margin,
        worst_lower_margin,
        witness_seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(rename = "N_estimate")]
    pub n_estimate: Option<f64>,
    #[serde(rename = "M_estimate")]
    pub m_estimate: f64,
    pub provenance: Provenance,
}

/// Base-kernel diagnostics for the prefixes `n = 1..=depth` of `points`.
pub fn truncation_trend(
    points: &PointConfig,
    family: &TestFunctionFamily,
    depth: usize,
) -> Result<Vec<TrendRow>> {
    let depth = depth.min(points.len());
    let full = base_kernel(&points.prefix(depth), family)?;
    (1..=depth)
        .into_par_iter()
        .map(|n| {
            let d = normalized_grammian(&full.prefix(n))?;
            Ok(TrendRow {
                n,
                lambda_min: d.lambda_min,
                lambda_max: d.lambda_max,
                n_estimate: d.n_estimate,
                m_estimate: d.m_estimate,
                provenance: d.kernel_provenance,
            })
        })
        .collect()
}

/// Interlacing along a trend table: `lambda_min` non-increasing and
/// `lambda_max` non-decreasing, up to `tol`.
pub fn trend_is_monotone(rows: &[TrendRow], tol: f64) -> bool {
    rows.windows(2).all(|w| {
        w[1].lambda_min <= w[0].lambda_min + tol && w[1].lambda_max >= w[0].lambda_max - tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{product_szego_gram, scale_by_random_psd, szego_gram};
    use crate::rng;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disc(zs: &[f64]) -> PointConfig {
        PointConfig::disc(&zs.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    fn dyadic(n: usize) -> PointConfig {
        disc(
            &(1..=n)
                .map(|j| 1.0 - 0.5f64.powi(j as i32))
                .collect::<Vec<_>>(),
        )
    }

    // |G_ij| for the Szego kernel in closed form.
    fn szego_modulus(a: C64, b: C64) -> f64 {
        ((1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr())).sqrt() / (c(1.0, 0.0) - a * b.conj()).norm()
    }

    #[test]
    fn two_point_example() {
        let d = normalized_grammian(&szego_gram(&disc(&[0.0, 0.5])).unwrap()).unwrap();
        let r = 3f64.sqrt() / 2.0;
        assert!((d.g.get(0, 1).re - r).abs() < 1e-15);
        assert!((d.lambda_min - (1.0 - r)).abs() < 1e-12);
        assert!((d.lambda_max - (1.0 + r)).abs() < 1e-12);
        assert_eq!(d.g.diagonal(), vec![1.0, 1.0]);
        assert!((d.n_estimate.unwrap() - 1.0 / (1.0 - r)).abs() < 1e-9);
    }

    #[test]
    fn szego_closed_form() {
        let mut r = rng::stream(2, 0);
        let zs: Vec<C64> = (0..8).map(|_| rng::disc_point(&mut r, 0.97)).collect();
        let d =
            normalized_grammian(&szego_gram(&PointConfig::disc(&zs).unwrap()).unwrap()).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let m = d.g.get(i, j).norm();
                assert!((m - szego_modulus(zs[i], zs[j])).abs() < 1e-12);
                assert!(m <= 1.0 + 1e-12);
                if i != j {
                    assert!(m < 1.0);
                }
            }
        }
        assert!(d.lambda_min <= 1.0 && d.lambda_max >= 1.0);
    }

    #[test]
    fn degenerate_diagonal_rejected() {
        let g = HermitianMatrix::from_real_rows(&[&[1e-15, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            normalize(&g),
            Err(Error::DegenerateDiagonal { index: 0, .. })
        ));
    }

    #[test]
    fn infinity_flag() {
        assert_eq!(n_estimate(0.0), None);
        assert_eq!(n_estimate(1e-12), None);
        assert_eq!(n_estimate(0.5), Some(2.0));
    }

    #[test]
    fn cone_bounds_on_disc_are_attained_by_szego() {
        let b = bounds_over_cone(&disc(&[0.0, 0.5]), &TestFunctionFamily::disc(), 200, 9).unwrap();
        assert_eq!(b.route, Route::Exact);
        assert!((b.lambda_min - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-9);
        assert!(b.worst_at_base);
        assert_eq!(b.samples.len(), 200);

        let single = bounds_over_cone(&disc(&[0.3]), &TestFunctionFamily::disc(), 10, 1).unwrap();
        assert!(single
            .samples
            .iter()
            .all(|r| (r.lambda_min - 1.0).abs() < 1e-15 && (r.lambda_max - 1.0).abs() < 1e-15));

        let b = bounds_over_cone(&dyadic(10), &TestFunctionFamily::disc(), 20, 3).unwrap();
        assert!(b.lambda_min > 0.0);
        assert!(b.worst_at_base);
    }

    #[test]
    fn cone_bounds_deterministic_and_labeled() {
        let d2 = DomainTag::Polydisc(2);
        let pts = PointConfig::from_coords(
            d2,
            vec![
                vec![c(0.1, 0.0), c(0.2, 0.1)],
                vec![c(-0.4, 0.3), c(0.5, 0.0)],
            ],
        )
        .unwrap();
        let fam = TestFunctionFamily::polydisc(2).unwrap();
        let a = bounds_over_cone(&pts, &fam, 30, 4).unwrap();
        let b = bounds_over_cone(&pts, &fam, 30, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.route, Route::Sampled);
        assert!(bounds_over_cone(&pts, &fam, 0, 4).is_err());
    }

    #[test]
    fn schur_reduction_examples() {
        let pts = disc(&[0.0, 0.5]);
        let base = szego_gram(&pts).unwrap();
        let ones = scale_by_gram(
            &base,
            &HermitianMatrix::all_ones(2),
            Provenance::UserSupplied,
        )
        .unwrap();
        let (a, b) = (
            normalized_grammian(&base).unwrap(),
            normalized_grammian(&ones).unwrap(),
        );
        assert_eq!(a.g, b.g);

        assert!(schur_reduction_check(&base, 100, 1).unwrap().passed);
        let base = szego_gram(&disc(&[0.0, 0.3, 0.6, 0.9])).unwrap();
        let rep = schur_reduction_check(&base, 100, 2).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.worst_upper_margin >= -1e-9 && rep.worst_lower_margin >= -1e-9);
    }

    #[test]
    fn dyadic_trend_is_monotone_and_bounded() {
        let rows = truncation_trend(&dyadic(12), &TestFunctionFamily::disc(), 12).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!((rows[0].lambda_min, rows[0].lambda_max), (1.0, 1.0));
        assert!(trend_is_monotone(&rows, 1e-12));
        assert!(rows.iter().all(|r| r.lambda_min > 0.0));
        // About 6.5e-5 at depth 12; the decay has nearly stopped by then.
        assert!(rows[11].lambda_min > 1e-5);
        assert!(rows[11].lambda_min > 0.5 * rows[9].lambda_min);
    }

    #[test]
    fn polynomial_trend_degenerates() {
        let pts = disc(
            &(1..=40)
                .map(|j| 1.0 - 1.0 / (j as f64 + 1.0))
                .collect::<Vec<_>>(),
        );
        let rows = truncation_trend(&pts, &TestFunctionFamily::disc(), 40).unwrap();
        assert!(rows[39].lambda_min < rows[9].lambda_min / 2.0);
        assert!(rows[39].n_estimate.is_none());
    }

    #[test]
    fn product_kernel_trend_monotone() {
        let d2 = DomainTag::Polydisc(2);
        let mut r = rng::stream(12, 0);
        let pts = PointConfig::from_coords(
            d2,
            (0..10)
                .map(|_| vec![rng::disc_point(&mut r, 0.9), rng::disc_point(&mut r, 0.9)])
                .collect(),
        )
        .unwrap();
        let _ = product_szego_gram(&pts).unwrap();
        let rows = truncation_trend(&pts, &TestFunctionFamily::polydisc(2).unwrap(), 10).unwrap();
        assert!(trend_is_monotone(&rows, 1e-12));
    }

    proptest! {
        #[test]
        fn diagonal_rescaling_invariance(seed in 0u64..1000, scale in proptest::collection::vec(0.1f64..10.0, 5)) {
            let mut r = rng::stream(seed, 0);
            let zs: Vec<C64> = (0..5).map(|_| rng::disc_point(&mut r, 0.95)).collect();
            let k = szego_gram(&PointConfig::disc(&zs).unwrap()).unwrap();
            let dm = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(5, scale.iter().map(|&s| c(s, 0.0))));
            let rescaled = k.gram().congruence(&dm).unwrap();
            let k2 = KernelSample::new(k.points().clone(), rescaled, Provenance::UserSupplied).unwrap();
            let (a, b) = (normalized_grammian(&k).unwrap(), normalized_grammian(&k2).unwrap());
            prop_assert!((a.g.as_matrix() - b.g.as_matrix()).camax() < 1e-12);
        }

        #[test]
        fn sampled_grammians_respect_unit_diagonal(seed in 0u64..500) {
            let k = szego_gram(&disc(&[0.0, 0.4, -0.7])).unwrap();
            let s = scale_by_random_psd(&k, seed).unwrap();
            let d = normalized_grammian(&s).unwrap();
            prop_assert!(d.g.diagonal().iter().all(|&x| (x - 1.0).abs() < 1e-12));
            prop_assert!(d.lambda_min <= 1.0 + 1e-12 && d.lambda_max >= 1.0 - 1e-12);
        }
    }
}
