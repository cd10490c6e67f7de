//! Dense complex Hermitian linear algebra.
//!
//! Eigen-decompositions and SVDs are delegated to `nalgebra`; this module adds
//! the Hermitian newtype, tolerance-aware PSD tests, Schur (entrywise)
//! products and a rank-revealing least-squares solve.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

/// Inputs whose asymmetry is below this bound are symmetrized; above it they
/// are rejected.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative factor in the default PSD tolerance `1e-9 * max(1, max diag)`.
pub const PSD_REL_TOL: f64 = 1e-9;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Validates and symmetrizes `m`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput(
                "Hermitian matrix must have dim >= 1".into(),
            ));
        }
        let asymmetry = (&m - m.adjoint()).camax();
        if !asymmetry.is_finite() || asymmetry > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { asymmetry });
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds the matrix from its upper triangle; `f(i, j)` is only called
    /// for `i <= j` and the diagonal is forced real.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "Hermitian matrix must have dim >= 1");
        let mut data = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            data[(i, i)] = C64::new(f(i, i).re, 0.0);
            for j in i + 1..dim {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v.conj();
            }
        }
        Self { data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = C64::new(v, 0.0);
            }
        }
        Self::new(m)
    }

    /// `(m + m*) / 2` with no validation.
    pub fn symmetrized(m: DMatrix<C64>) -> Self {
        let adj = m.adjoint();
        let mut data = (m + adj) * C64::new(0.5, 0.0);
        for i in 0..data.nrows() {
            data[(i, i)].im = 0.0;
        }
        Self { data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper(dim, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn all_ones(dim: usize) -> Self {
        Self::from_upper(dim, |_, _| C64::new(1.0, 0.0))
    }

    /// Rank-one `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_upper(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn max_diagonal(&self) -> f64 {
        self.diagonal()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.camax()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `1e-9 * max(1, max diagonal entry)`.
    pub fn default_psd_tol(&self) -> f64 {
        PSD_REL_TOL * self.max_diagonal().max(1.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: &self.data * C64::new(c, 0.0),
        }
    }

    /// `self + c I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..self.dim() {
            data[(i, i)] += C64::new(c, 0.0);
        }
        Self { data }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Transpose, equal to the entrywise conjugate for Hermitian input.
    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
        }
    }

    /// Congruence `T* self T`.
    pub fn congruence(&self, t: &DMatrix<C64>) -> Result<Self> {
        check_dims(self.dim(), t.nrows())?;
        Ok(Self::symmetrized(t.adjoint() * &self.data * t))
    }

    /// Principal submatrix on the leading `k` indices.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.dim());
        Self {
            data: self.data.view((0, 0), (k, k)).into_owned(),
        }
    }

    /// Quadratic form `v* H v` (real for Hermitian `H`).
    pub fn quadratic_form(&self, v: &DVector<C64>) -> f64 {
        v.dotc(&(&self.data * v)).re
    }

    /// Bilinear pairing `sum_ij self_ij * other_ij` (real when both are
    /// Hermitian). Equal to `1^T (self o other) 1`.
    pub fn pairing(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum::<C64>()
            .re
    }

    /// Ascending eigenvalues with matching unit eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = self.data.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, c| {
            eig.eigenvectors[(i, order[c])]
        });
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    /// Projection onto the PSD cone (negative eigenvalues clipped to zero).
    pub fn clip_to_psd(&self) -> Self {
        let (vals, vecs) = self.eigh();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| C64::new(v.max(0.0), 0.0)),
        ));
        Self::symmetrized(&vecs * d * vecs.adjoint())
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.data[(i, j)].re, self.data[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom(
                "matrix rows must all have length equal to the row count",
            ));
        }
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
        HermitianMatrix::new(m).map_err(D::Error::custom)
    }
}

/// Extremal eigenvalues plus a unit eigenvector for the smallest one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub min_eig: f64,
    pub max_eig: f64,
    pub witness_vector: DVector<C64>,
}

pub fn min_max_eigenvalues(h: &HermitianMatrix) -> SpectralReport {
    let (vals, vecs) = h.eigh();
    SpectralReport {
        min_eig: vals[0],
        max_eig: vals[vals.len() - 1],
        witness_vector: vecs.column(0).into_owned(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdCheck {
    pub psd: bool,
    pub report: SpectralReport,
}

/// `min_eig >= -tol`, with the spectral report attached either way.
pub fn is_psd(h: &HermitianMatrix, tol: f64) -> Result<PsdCheck> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "PSD tolerance must be >= 0, got {tol}"
        )));
    }
    let report = min_max_eigenvalues(h);
    Ok(PsdCheck {
        psd: report.min_eig >= -tol,
        report,
    })
}

/// Entrywise (Hadamard) product.
pub fn schur_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_dims(a.dim(), b.dim())?;
    Ok(HermitianMatrix::from_upper(a.dim(), |i, j| {
        a.get(i, j) * b.get(i, j)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub x: DVector<C64>,
    /// `||A x - b||_2`.
    pub residual: f64,
    pub rank: usize,
    /// Set when the numerical rank is below `min(rows, cols)`; not an error.
    pub rank_deficient: bool,
}

/// Minimum-norm least-squares solution through a rank-revealing SVD.
pub fn solve_least_squares(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<LeastSquares> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    if a.ncols() == 0 || a.nrows() == 0 {
        return Err(Error::InvalidInput(
            "least squares needs a non-empty matrix".into(),
        ));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = smax * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let x = svd
        .solve(b, cutoff)
        .map_err(|e| Error::InvalidInput(format!("least squares failed: {e}")))?;
    let residual = (a * &x - b).norm();
    Ok(LeastSquares {
        x,
        residual,
        rank,
        rank_deficient: rank < a.nrows().min(a.ncols()),
    })
}
