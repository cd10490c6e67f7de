//! Positive kernels restricted to finite point sets, sampling of the
//! admissible cone and admissibility checks.
//!
//! A kernel `k` is admissible for a family when `(1 - psi(w_i) conj(psi(w_j))) o k`
//! is PSD for every member `psi`. The cone can only be sampled here (base
//! kernel times random PSD Schur factors); exact statements over the whole cone
//! come from the dual route in [`crate::agler`].

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_psd, schur_product, HermitianMatrix};
use crate::rng;
use crate::test_functions::{symmetrize, Descriptor, DomainTag, PointConfig, TestFunctionFamily};
use crate::C64;

/// Points closer than this (chordal distance) are rejected as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Szego,
    ProductSzego,
    SymmetrizedSzego,
    ScaledBy(u64),
    UserSupplied,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Szego => write!(f, "szego"),
            Provenance::ProductSzego => write!(f, "product_szego"),
            Provenance::SymmetrizedSzego => write!(f, "symmetrized_szego"),
            Provenance::ScaledBy(seed) => write!(f, "scaled_by({seed})"),
            Provenance::UserSupplied => write!(f, "user_supplied"),
        }
    }
}

/// A positive kernel restricted to a point list: `gram[i][j] = k(w_i, w_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    points: PointConfig,
    gram: HermitianMatrix,
    provenance: Provenance,
}

impl KernelSample {
    /// Checks shape, strictly positive diagonal and PSD at the default
    /// relative tolerance.
    pub fn new(points: PointConfig, gram: HermitianMatrix, provenance: Provenance) -> Result<Self> {
        if gram.dim() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: gram.dim(),
            });
        }
        if let Some((index, &value)) = gram
            .diagonal()
            .iter()
            .enumerate()
            .find(|(_, &d)| !(d > 0.0))
        {
            return Err(Error::DegenerateDiagonal { index, value });
        }
        let chk = is_psd(&gram, gram.default_psd_tol())?;
        if !chk.psd {
            return Err(Error::InvalidInput(format!(
                "kernel Gram matrix is not PSD (min eigenvalue {:.3e})",
                chk.report.min_eig
            )));
        }
        Ok(Self {
            points,
            gram,
            provenance,
        })
    }

    pub fn points(&self) -> &PointConfig {
        &self.points
    }

    pub fn gram(&self) -> &HermitianMatrix {
        &self.gram
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Restriction to the first `k` points.
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            points: self.points.prefix(k),
            gram: self.gram.leading(k),
            provenance: self.provenance,
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let gram = HermitianMatrix::from_upper(indices.len(), |a, b| {
            self.gram.get(indices[a], indices[b])
        });
        Self {
            points: self.points.select(indices),
            gram,
            provenance: self.provenance,
        }
    }
}

fn szego(z: C64, w: C64) -> C64 {
    C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - z * w.conj())
}

/// Szego kernel `1 / (1 - z conj(w))` on disc points.
pub fn szego_gram(points: &PointConfig) -> Result<KernelSample> {
    if !matches!(points.domain(), DomainTag::Disc | DomainTag::Polydisc(1)) {
        return Err(Error::DomainMismatch {
            expected: DomainTag::Disc.to_string(),
            found: points.domain().to_string(),
        });
    }
    non_empty(points)?;
    points.check_distinct(DUPLICATE_TOL)?;
    let w: Vec<C64> = points.points().iter().map(|p| p.coords()[0]).collect();
    let gram = HermitianMatrix::from_upper(w.len(), |i, j| szego(w[i], w[j]));
    KernelSample::new(points.clone(), gram, Provenance::Szego)
}

/// Product of coordinate Szego kernels on the polydisc.
pub fn product_szego_gram(points: &PointConfig) -> Result<KernelSample> {
    if !points.domain().is_polydisc_like() {
        return Err(Error::DomainMismatch {
            expected: "polydisc".into(),
            found: points.domain().to_string(),
        });
    }
    non_empty(points)?;
    let pts = points.points();
    let gram = HermitianMatrix::from_upper(pts.len(), |i, j| {
        pts[i]
            .coords()
            .iter()
            .zip(pts[j].coords())
            .map(|(&z, &w)| szego(z, w))
            .product()
    });
    KernelSample::new(points.clone(), gram, Provenance::ProductSzego)
}

/// Candidate kernel on `G2`: the symmetrization of the bidisc Szego kernel,
/// `s(z1,w1) s(z2,w2) + s(z1,w2) s(z2,w1)`. Admissibility for the `psi_alpha`
/// grid is checked on every call and the kernel is rejected if it fails.
pub fn symmetrized_szego_gram(
    pairs: &[(C64, C64)],
    grid_size: usize,
) -> Result<(KernelSample, AdmissibilityReport)> {
    let points = pairs
        .iter()
        .map(|&(a, b)| symmetrize(a, b))
        .collect::<Result<Vec<_>>>()?;
    let config = PointConfig::new(DomainTag::SymmetrizedBidisc, points)?;
    symmetrized_from_pairs(config, pairs.to_vec(), grid_size)
}

/// As [`symmetrized_szego_gram`], recovering the disc pairs from `(s, p)`.
pub fn symmetrized_szego_gram_on(
    points: &PointConfig,
    grid_size: usize,
) -> Result<(KernelSample, AdmissibilityReport)> {
    if points.domain() != DomainTag::SymmetrizedBidisc {
        return Err(Error::DomainMismatch {
            expected: DomainTag::SymmetrizedBidisc.to_string(),
            found: points.domain().to_string(),
        });
    }
    let pairs = points
        .points()
        .iter()
        .map(|p| p.unsymmetrize().expect("G2 point"))
        .collect();
    symmetrized_from_pairs(points.clone(), pairs, grid_size)
}

fn symmetrized_from_pairs(
    config: PointConfig,
    pairs: Vec<(C64, C64)>,
    grid_size: usize,
) -> Result<(KernelSample, AdmissibilityReport)> {
    non_empty(&config)?;
    config.check_distinct(DUPLICATE_TOL)?;
    let gram = HermitianMatrix::from_upper(pairs.len(), |i, j| {
        let (z1, z2) = pairs[i];
        let (w1, w2) = pairs[j];
        szego(z1, w1) * szego(z2, w2) + szego(z1, w2) * szego(z2, w1)
    });
    let sample = KernelSample::new(config, gram, Provenance::SymmetrizedSzego)?;
    let family = TestFunctionFamily::g2(grid_size)?;
    let report = verify_admissible(&sample, &family, sample.gram().default_psd_tol())?;
    if !report.admissible {
        return Err(Error::AdmissibilityFailure {
            descriptor: report.worst.0.to_string(),
            margin: report.worst.1,
        });
    }
    Ok((sample, report))
}

/// The reference kernel for a family: Szego on the disc, the product Szego
/// kernel on the polydisc and the symmetrized Szego kernel on `G2`.
pub fn base_kernel(points: &PointConfig, family: &TestFunctionFamily) -> Result<KernelSample> {
    if points.domain() != family.domain() {
        return Err(Error::DomainMismatch {
            expected: family.domain().to_string(),
            found: points.domain().to_string(),
        });
    }
    match family.domain() {
        DomainTag::Disc => szego_gram(points),
        DomainTag::Polydisc(_) => {
            points.check_distinct(DUPLICATE_TOL)?;
            product_szego_gram(points)
        }
        DomainTag::SymmetrizedBidisc => {
            let grid = family.grid_size().unwrap_or(family.len());
            symmetrized_szego_gram_on(points, grid).map(|(k, _)| k)
        }
    }
}

fn non_empty(points: &PointConfig) -> Result<()> {
    if points.is_empty() {
        Err(Error::InvalidInput(
            "kernel needs at least one point".into(),
        ))
    } else {
        Ok(())
    }
}

/// `V* V` for a random complex `rank x n` matrix `V`, rescaled so the diagonal
/// has mean 1.
pub fn random_psd_factor(n: usize, rank: usize, seed: u64) -> HermitianMatrix {
    let mut r = rng::stream(seed, 0);
    let v = rng::gaussian_matrix(&mut r, rank.max(1), n);
    let g = HermitianMatrix::symmetrized(v.adjoint() * v);
    let mean = g.trace() / n as f64;
    g.scaled(1.0 / mean)
}

/// `k -> k o G_g`: stays PSD and keeps admissibility (Schur product theorem).
pub fn scale_by_gram(
    base: &KernelSample,
    g: &HermitianMatrix,
    provenance: Provenance,
) -> Result<KernelSample> {
    let gram = schur_product(base.gram(), g)?;
    KernelSample::new(base.points().clone(), gram, provenance)
}

pub fn scale_by_random_psd(base: &KernelSample, seed: u64) -> Result<KernelSample> {
    scale_by_random_psd_with_rank(base, seed, base.points().len())
}

/// Low `rank` probes extreme rays of the cone.
pub fn scale_by_random_psd_with_rank(
    base: &KernelSample,
    seed: u64,
    rank: usize,
) -> Result<KernelSample> {
    let g = random_psd_factor(base.points().len(), rank, seed);
    scale_by_gram(base, &g, Provenance::ScaledBy(seed))
}

/// Seed of the `index`-th sample in a batch drawn with `seed`.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// `count` cone samples `base o G_g`, in index order.
pub fn sample_cone(base: &KernelSample, count: usize, seed: u64) -> Result<Vec<KernelSample>> {
    (0..count)
        .into_par_iter()
        .map(|i| scale_by_random_psd(base, sample_seed(seed, i)))
        .collect()
}

/// `D_t[i][j] = 1 - psi_t(w_i) conj(psi_t(w_j))`, one matrix per descriptor.
pub fn test_masks(
    family: &TestFunctionFamily,
    points: &PointConfig,
) -> Result<Vec<HermitianMatrix>> {
    let values = family.evaluate_all(points)?;
    Ok(values
        .iter()
        .map(|v| {
            HermitianMatrix::from_upper(v.len(), |i, j| C64::new(1.0, 0.0) - v[i] * v[j].conj())
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Minimum eigenvalue of `D_t o gram` per descriptor.
    pub per_test_margin: Vec<(Descriptor, f64)>,
    pub worst: (Descriptor, f64),
    pub tol: f64,
}

pub fn verify_admissible(
    k: &KernelSample,
    family: &TestFunctionFamily,
    tol: f64,
) -> Result<AdmissibilityReport> {
    let masks = test_masks(family, k.points())?;
    let per_test_margin = family
        .descriptors()
        .iter()
        .zip(&masks)
        .map(|(d, m)| {
            let masked = schur_product(m, k.gram())?;
            Ok((*d, is_psd(&masked, tol)?.report.min_eig))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = per_test_margin
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("family is nonempty");
    Ok(AdmissibilityReport {
        admissible: worst.1 >= -tol,
        per_test_margin,
        worst,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_max_eigenvalues;
    use crate::test_functions::Point;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disc(zs: &[f64]) -> PointConfig {
        PointConfig::disc(&zs.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    fn random_disc(seed: u64, n: usize) -> PointConfig {
        let mut r = rng::stream(seed, 0);
        PointConfig::disc(
            &(0..n)
                .map(|_| rng::disc_point(&mut r, 0.95))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn szego_examples() {
        let k = szego_gram(&disc(&[0.0])).unwrap();
        assert_eq!(k.gram().get(0, 0), c(1.0, 0.0));
        let k = szego_gram(&disc(&[0.0, 0.5])).unwrap();
        let expect = HermitianMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 4.0 / 3.0]]).unwrap();
        assert!((k.gram().as_matrix() - expect.as_matrix()).camax() < 1e-15);
        for seed in 0..20 {
            let k = szego_gram(&random_disc(seed, 6)).unwrap();
            assert!(is_psd(k.gram(), 1e-9).unwrap().psd);
        }
    }

    #[test]
    fn szego_rejects_duplicates() {
        let pts = disc(&[0.3, 0.3]);
        assert!(matches!(
            szego_gram(&pts),
            Err(Error::DuplicatePoints { .. })
        ));
    }

    #[test]
    fn product_szego_examples() {
        let d2 = DomainTag::Polydisc(2);
        let one = PointConfig::from_coords(d2, vec![vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(
            product_szego_gram(&one).unwrap().gram().get(0, 0),
            c(1.0, 0.0)
        );
        let two =
            PointConfig::from_coords(d2, vec![vec![c(0.0, 0.0); 2], vec![c(0.5, 0.0); 2]]).unwrap();
        let k = product_szego_gram(&two).unwrap();
        assert!((k.gram().get(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((k.gram().get(1, 1) - c(16.0 / 9.0, 0.0)).norm() < 1e-14);

        let fam = TestFunctionFamily::polydisc(2).unwrap();
        let mut r = rng::stream(5, 0);
        let pts = PointConfig::from_coords(
            d2,
            (0..6)
                .map(|_| vec![rng::disc_point(&mut r, 0.9), rng::disc_point(&mut r, 0.9)])
                .collect(),
        )
        .unwrap();
        let k = product_szego_gram(&pts).unwrap();
        assert!(verify_admissible(&k, &fam, 1e-9).unwrap().admissible);
    }

    #[test]
    fn product_masks_leave_the_complementary_factor() {
        // (1 - z_i conj(z_j)) o s(z) s(w) = J o s(w)
        let d2 = DomainTag::Polydisc(2);
        let mut r = rng::stream(8, 0);
        let pts = PointConfig::from_coords(
            d2,
            (0..5)
                .map(|_| vec![rng::disc_point(&mut r, 0.9), rng::disc_point(&mut r, 0.9)])
                .collect(),
        )
        .unwrap();
        let k = product_szego_gram(&pts).unwrap();
        let masks = test_masks(&TestFunctionFamily::polydisc(2).unwrap(), &pts).unwrap();
        let masked = schur_product(&masks[0], k.gram()).unwrap();
        let second: Vec<C64> = pts.points().iter().map(|p| p.coords()[1]).collect();
        for i in 0..5 {
            for j in 0..5 {
                assert!((masked.get(i, j) - szego(second[i], second[j])).norm() < 1e-12);
            }
        }
        assert!(is_psd(&masked, 1e-9).unwrap().psd);
    }

    #[test]
    fn symmetrized_szego_examples() {
        let (k, _) = symmetrized_szego_gram(&[(c(0.0, 0.0), c(0.0, 0.0))], 64).unwrap();
        assert_eq!(k.gram().get(0, 0), c(2.0, 0.0));

        // Pairs (0,0) and (0.5,0): s(0, .) = 1, so off-diagonal = 1 + 1 and
        // the second diagonal entry is s(0.5,0.5) s(0,0) + s(0.5,0) s(0,0.5) = 4/3 + 1.
        let (k, _) = symmetrized_szego_gram(
            &[(c(0.0, 0.0), c(0.0, 0.0)), (c(0.5, 0.0), c(0.0, 0.0))],
            64,
        )
        .unwrap();
        assert!((k.gram().get(0, 1) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((k.gram().get(1, 1) - c(7.0 / 3.0, 0.0)).norm() < 1e-14);

        let mut r = rng::stream(17, 0);
        let pairs: Vec<_> = (0..5)
            .map(|_| (rng::disc_point(&mut r, 0.9), rng::disc_point(&mut r, 0.9)))
            .collect();
        let (_, report) = symmetrized_szego_gram(&pairs, 64).unwrap();
        assert!(report.admissible);
        assert_eq!(report.per_test_margin.len(), 64);
    }

    #[test]
    fn symmetrized_rejects_duplicate_symmetrizations() {
        let r = symmetrized_szego_gram(
            &[(c(0.1, 0.0), c(0.4, 0.0)), (c(0.4, 0.0), c(0.1, 0.0))],
            16,
        );
        assert!(matches!(r, Err(Error::DuplicatePoints { .. })));
    }

    #[test]
    fn scaling_by_all_ones_is_identity() {
        let base = szego_gram(&disc(&[0.0, 0.5, -0.3])).unwrap();
        let s = scale_by_gram(
            &base,
            &HermitianMatrix::all_ones(3),
            Provenance::UserSupplied,
        )
        .unwrap();
        assert_eq!(s.gram(), base.gram());
    }

    #[test]
    fn random_scalings_stay_admissible() {
        let fam = TestFunctionFamily::disc();
        let base = szego_gram(&disc(&[0.0, 0.5])).unwrap();
        let s = scale_by_random_psd(&base, 42).unwrap();
        assert!(is_psd(s.gram(), 1e-9).unwrap().psd);
        assert!(verify_admissible(&s, &fam, 1e-9).unwrap().admissible);
        let base = szego_gram(&random_disc(3, 5)).unwrap();
        for s in sample_cone(&base, 100, 7).unwrap() {
            assert!(
                verify_admissible(&s, &fam, s.gram().default_psd_tol())
                    .unwrap()
                    .admissible
            );
        }
        for rank in 1..=3 {
            let s = scale_by_random_psd_with_rank(&base, 11, rank).unwrap();
            assert!(
                verify_admissible(&s, &fam, s.gram().default_psd_tol())
                    .unwrap()
                    .admissible
            );
        }
    }

    #[test]
    fn sample_cone_is_deterministic() {
        let base = szego_gram(&random_disc(4, 4)).unwrap();
        assert_eq!(
            sample_cone(&base, 10, 3).unwrap(),
            sample_cone(&base, 10, 3).unwrap()
        );
    }

    #[test]
    fn verify_admissible_examples() {
        let fam = TestFunctionFamily::disc();
        // (1 - z conj(w)) s(z, w) = 1: the masked Szego matrix is all-ones.
        let k = szego_gram(&random_disc(9, 4)).unwrap();
        let rep = verify_admissible(&k, &fam, 1e-9).unwrap();
        assert!(rep.admissible);
        assert!(rep.worst.1.abs() < 1e-12);

        let pts = disc(&[0.0, 0.5]);
        let ones = KernelSample::new(
            pts.clone(),
            HermitianMatrix::all_ones(2),
            Provenance::UserSupplied,
        )
        .unwrap();
        // masked = [[1, 1], [1, 0.75]] has determinant -0.25 < 0.
        let rep = verify_admissible(&ones, &fam, 1e-9).unwrap();
        let masked = HermitianMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 0.75]]).unwrap();
        assert!((rep.worst.1 - min_max_eigenvalues(&masked).min_eig).abs() < 1e-14);
        assert!(!rep.admissible);

        let diag =
            KernelSample::new(pts, HermitianMatrix::identity(2), Provenance::UserSupplied).unwrap();
        assert!(verify_admissible(&diag, &fam, 1e-9).unwrap().admissible);
    }

    #[test]
    fn g2_grid_refinement_is_monotone() {
        let mut r = rng::stream(23, 0);
        let pairs: Vec<_> = (0..4)
            .map(|_| (rng::disc_point(&mut r, 0.9), rng::disc_point(&mut r, 0.9)))
            .collect();
        let (k, _) = symmetrized_szego_gram(&pairs, 8).unwrap();
        // A Schur factor that is not in the cone for every grid size.
        let bad = KernelSample::new(
            k.points().clone(),
            HermitianMatrix::identity(4).shifted(0.0),
            Provenance::UserSupplied,
        )
        .unwrap();
        for cand in [k, bad] {
            for m in [4usize, 8, 16] {
                let fine = verify_admissible(&cand, &TestFunctionFamily::g2(2 * m).unwrap(), 1e-9)
                    .unwrap();
                let coarse =
                    verify_admissible(&cand, &TestFunctionFamily::g2(m).unwrap(), 1e-9).unwrap();
                if fine.admissible {
                    assert!(coarse.admissible);
                }
            }
        }
    }

    #[test]
    fn kernel_sample_validation() {
        let pts = disc(&[0.0, 0.5]);
        let bad = HermitianMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(KernelSample::new(pts.clone(), bad, Provenance::UserSupplied).is_err());
        let zero = HermitianMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            KernelSample::new(pts.clone(), zero, Provenance::UserSupplied),
            Err(Error::DegenerateDiagonal { index: 0, .. })
        ));
        assert!(
            KernelSample::new(pts, HermitianMatrix::identity(3), Provenance::UserSupplied).is_err()
        );
        let _ = Point::disc(c(0.0, 0.0)).unwrap();
    }
}
