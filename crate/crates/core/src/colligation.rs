//! Finite unitary colligations with diagonal representations.
//!
//! State coordinate `i` carries the test function `psi_{t_i}`, so
//! `rho(E(x)) = diag(psi_{t_i}(x))` and the transfer function is
//!
//! ```text
//! f(x) = D + C rho (I - A rho)^{-1} B.
//! ```

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSample;
use crate::linalg::{min_max_eigenvalues, HermitianMatrix};
use crate::rng;
use crate::test_functions::{FamilySpec, Point, PointConfig, TestFunctionFamily};
use crate::C64;

/// Condition number above which `I - A rho` is treated as singular.
pub const RESOLVENT_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    a: DMatrix<C64>,
    b: DMatrix<C64>,
    c: DMatrix<C64>,
    d: DMatrix<C64>,
    rep_assignment: Vec<usize>,
    family: TestFunctionFamily,
}

impl Colligation {
    pub fn new(
        a: DMatrix<C64>,
        b: DMatrix<C64>,
        c: DMatrix<C64>,
        d: DMatrix<C64>,
        rep_assignment: Vec<usize>,
        family: TestFunctionFamily,
    ) -> Result<Self> {
        let state = a.nrows();
        let (out_dim, in_dim) = d.shape();
        let dims = [
            (a.ncols(), state),
            (b.nrows(), state),
            (b.ncols(), in_dim),
            (c.nrows(), out_dim),
            (c.ncols(), state),
            (rep_assignment.len(), state),
        ];
        if let Some(&(found, expected)) = dims.iter().find(|(f, e)| f != e) {
            return Err(Error::DimensionMismatch { expected, found });
        }
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidInput(
                "input and output dimensions must be positive".into(),
            ));
        }
        if let Some(&t) = rep_assignment.iter().find(|&&t| t >= family.len()) {
            return Err(Error::InvalidInput(format!(
                "rep_assignment index {t} out of range for a family of {} functions",
                family.len()
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            rep_assignment,
            family,
        })
    }

    /// Splits `V = [[A, B], [C, D]]` with an `state_dim x state_dim` block `A`.
    pub fn from_block(
        v: &DMatrix<C64>,
        state_dim: usize,
        rep_assignment: Vec<usize>,
        family: TestFunctionFamily,
    ) -> Result<Self> {
        if state_dim > v.nrows().min(v.ncols()) {
            return Err(Error::DimensionMismatch {
                expected: v.nrows().min(v.ncols()),
                found: state_dim,
            });
        }
        let (rows, cols) = v.shape();
        let (o, i) = (rows - state_dim, cols - state_dim);
        Self::new(
            v.view((0, 0), (state_dim, state_dim)).into_owned(),
            v.view((0, state_dim), (state_dim, i)).into_owned(),
            v.view((state_dim, 0), (o, state_dim)).into_owned(),
            v.view((state_dim, state_dim), (o, i)).into_owned(),
            rep_assignment,
            family,
        )
    }

    /// Haar-random unitary `V` of size `state_dim + dim` with uniformly random
    /// test-function assignment.
    pub fn random(
        family: &TestFunctionFamily,
        state_dim: usize,
        dim: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut g = rng::stream(seed, 0);
        let v = rng::haar_unitary(&mut g, state_dim + dim);
        let rep = (0..state_dim)
            .map(|_| g.random_range(0..family.len()))
            .collect();
        Self::from_block(&v, state_dim, rep, family.clone())
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.d.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn a(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<C64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<C64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<C64> {
        &self.d
    }

    pub fn rep_assignment(&self) -> &[usize] {
        &self.rep_assignment
    }

    pub fn family(&self) -> &TestFunctionFamily {
        &self.family
    }

    /// `V = [[A, B], [C, D]]`.
    pub fn block_matrix(&self) -> DMatrix<C64> {
        let s = self.state_dim();
        let mut v = DMatrix::zeros(s + self.out_dim(), s + self.in_dim());
        v.view_mut((0, 0), (s, s)).copy_from(&self.a);
        v.view_mut((0, s), (s, self.in_dim())).copy_from(&self.b);
        v.view_mut((s, 0), (self.out_dim(), s)).copy_from(&self.c);
        v.view_mut((s, s), (self.out_dim(), self.in_dim()))
            .copy_from(&self.d);
        v
    }

    pub fn to_spec(&self) -> ColligationSpec {
        let flat = |m: &DMatrix<C64>| -> Vec<[f64; 2]> {
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        };
        ColligationSpec {
            state_dim: self.state_dim(),
            in_dim: self.in_dim(),
            out_dim: self.out_dim(),
            a: flat(&self.a),
            b: flat(&self.b),
            c: flat(&self.c),
            d: flat(&self.d),
            rep_assignment: self.rep_assignment.clone(),
            family: self.family.to_spec(),
        }
    }

    pub fn from_spec(spec: &ColligationSpec) -> Result<Self> {
        let family = TestFunctionFamily::from_spec(&spec.family)?;
        let unflat = |rows: usize, cols: usize, data: &[[f64; 2]]| -> Result<DMatrix<C64>> {
            if data.len() != rows * cols {
                return Err(Error::DimensionMismatch {
                    expected: rows * cols,
                    found: data.len(),
                });
            }
            Ok(DMatrix::from_fn(rows, cols, |i, j| {
                let [re, im] = data[i * cols + j];
                C64::new(re, im)
            }))
        };
        let (s, i, o) = (spec.state_dim, spec.in_dim, spec.out_dim);
        Self::new(
            unflat(s, s, &spec.a)?,
            unflat(s, i, &spec.b)?,
            unflat(o, s, &spec.c)?,
            unflat(o, i, &spec.d)?,
            spec.rep_assignment.clone(),
            family,
        )
    }
}

/// JSON form: dimensions, row-major `[re, im]` blocks, assignment and family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColligationSpec {
    pub state_dim: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    #[serde(rename = "A")]
    pub a: Vec<[f64; 2]>,
    #[serde(rename = "B")]
    pub b: Vec<[f64; 2]>,
    #[serde(rename = "C")]
    pub c: Vec<[f64; 2]>,
    #[serde(rename = "D")]
    pub d: Vec<[f64; 2]>,
    pub rep_assignment: Vec<usize>,
    pub family: FamilySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitaryCheck {
    pub unitary: bool,
    /// `max(|V*V - I|_max, |VV* - I|_max)`.
    pub defect: f64,
}

pub fn is_unitary(col: &Colligation, tol: f64) -> Result<UnitaryCheck> {
    let v = col.block_matrix();
    if v.nrows() != v.ncols() {
        return Err(Error::DimensionMismatch {
            expected: v.nrows(),
            found: v.ncols(),
        });
    }
    let eye = DMatrix::<C64>::identity(v.nrows(), v.ncols());
    let defect = (v.adjoint() * &v - &eye)
        .camax()
        .max((&v * v.adjoint() - &eye).camax());
    Ok(UnitaryCheck {
        unitary: defect <= tol,
        defect,
    })
}

/// `D + C rho (I - A rho)^{-1} B` at `x`.
pub fn transfer_eval(col: &Colligation, x: &Point) -> Result<DMatrix<C64>> {
    if col.state_dim() == 0 {
        col.family.e_vector(x)?;
        return Ok(col.d.clone());
    }
    let e = col.family.e_vector(x)?;
    let rho: Vec<C64> = col.rep_assignment.iter().map(|&t| e[t]).collect();
    let s = col.state_dim();
    // A rho scales column j of A by rho_j.
    let a_rho = DMatrix::from_fn(s, s, |i, j| col.a[(i, j)] * rho[j]);
    let m = DMatrix::<C64>::identity(s, s) - a_rho;
    let sv = m.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= RESOLVENT_CONDITION_LIMIT) {
        return Err(Error::SingularResolvent { condition });
    }
    let sol = m
        .lu()
        .solve(&col.b)
        .ok_or(Error::SingularResolvent { condition })?;
    let rho_sol = DMatrix::from_fn(s, col.in_dim(), |i, j| rho[i] * sol[(i, j)]);
    Ok(&col.d + &col.c * rho_sol)
}

/// Matrix values of a function on a finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueMap {
    points: PointConfig,
    values: Vec<DMatrix<C64>>,
}

impl ValueMap {
    pub fn new(points: PointConfig, values: Vec<DMatrix<C64>>) -> Result<Self> {
        if values.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: values.len(),
            });
        }
        if let Some(first) = values.first() {
            if let Some(v) = values.iter().find(|v| v.shape() != first.shape()) {
                return Err(Error::DimensionMismatch {
                    expected: first.nrows(),
                    found: v.nrows(),
                });
            }
        }
        Ok(Self { points, values })
    }

    /// Transfer-function values of `col` on `points`.
    pub fn from_colligation(col: &Colligation, points: &PointConfig) -> Result<Self> {
        let values = points
            .points()
            .par_iter()
            .map(|p| transfer_eval(col, p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points.clone(), values)
    }

    /// Scalar values `f(w_j)`.
    pub fn scalar(points: PointConfig, values: &[C64]) -> Result<Self> {
        Self::new(
            points,
            values
                .iter()
                .map(|&v| DMatrix::from_element(1, 1, v))
                .collect(),
        )
    }

    pub fn points(&self) -> &PointConfig {
        &self.points
    }

    pub fn values(&self) -> &[DMatrix<C64>] {
        &self.values
    }

    /// `(out_dim, in_dim)`; `(0, 0)` when empty.
    pub fn shape(&self) -> (usize, usize) {
        self.values.first().map(|v| v.shape()).unwrap_or((0, 0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub passed: bool,
    pub worst_margin: f64,
    pub per_sample_margin: Vec<f64>,
}

/// Tests `[(C^2 I - S(x_i) S(x_j)*) k(x_i, x_j)]_{ij} >= -tol` for each kernel sample.
pub fn membership_test(
    values: &ValueMap,
    kernels: &[KernelSample],
    bound: f64,
    tol: f64,
) -> Result<MembershipReport> {
    let n = values.points.len();
    let (out, _) = values.shape();
    let per_sample_margin = kernels
        .iter()
        .map(|k| {
            if k.points() != &values.points {
                return Err(Error::PointMismatch);
            }
            let mut m = DMatrix::zeros(n * out, n * out);
            let c2 = DMatrix::<C64>::identity(out, out) * C64::new(bound * bound, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let block =
                        (&c2 - &values.values[i] * values.values[j].adjoint()) * k.gram().get(i, j);
                    m.view_mut((i * out, j * out), (out, out)).copy_from(&block);
                }
            }
            Ok(min_max_eigenvalues(&HermitianMatrix::symmetrized(m)).min_eig)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_margin = per_sample_margin
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(MembershipReport {
        passed: per_sample_margin.iter().all(|&m| m >= -tol),
        worst_margin,
        per_sample_margin,
    })
}

/// Block-diagonal sum of scalar colligations: transfer `diag(phi_1, ..., phi_n)`.
pub fn diag_direct_sum(cols: &[Colligation]) -> Result<Colligation> {
    let first = cols
        .first()
        .ok_or_else(|| Error::InvalidInput("direct sum of no colligations".into()))?;
    if cols.iter().any(|c| c.family != first.family) {
        return Err(Error::FamilyMismatch);
    }
    if let Some(c) = cols.iter().find(|c| c.in_dim() != 1 || c.out_dim() != 1) {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: c.in_dim().max(c.out_dim()),
        });
    }
    let s: usize = cols.iter().map(|c| c.state_dim()).sum();
    let k = cols.len();
    let mut a = DMatrix::zeros(s, s);
    let mut b = DMatrix::zeros(s, k);
    let mut c = DMatrix::zeros(k, s);
    let mut d = DMatrix::zeros(k, k);
    let mut rep = Vec::with_capacity(s);
    let mut off = 0;
    for (idx, col) in cols.iter().enumerate() {
        let si = col.state_dim();
        a.view_mut((off, off), (si, si)).copy_from(&col.a);
        b.view_mut((off, idx), (si, 1)).copy_from(&col.b);
        c.view_mut((idx, off), (1, si)).copy_from(&col.c);
        d[(idx, idx)] = col.d[(0, 0)];
        rep.extend_from_slice(&col.rep_assignment);
        off += si;
    }
    Colligation::new(a, b, c, d, rep, first.family.clone())
}

/// Blocks `(A^t, C^t; B^t, D^t)`: the transfer function is `Phi(z)^t`.
pub fn transpose(col: &Colligation) -> Colligation {
    Colligation {
        a: col.a.transpose(),
        b: col.c.transpose(),
        c: col.b.transpose(),
        d: col.d.transpose(),
        rep_assignment: col.rep_assignment.clone(),
        family: col.family.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductReport {
    pub values: ValueMap,
    pub membership: MembershipReport,
}

/// Pointwise `f g` and its membership at `C = 1` on the given samples.
pub fn product(
    f: &ValueMap,
    g: &ValueMap,
    kernels: &[KernelSample],
    tol: f64,
) -> Result<ProductReport> {
    if f.points != g.points {
        return Err(Error::PointMismatch);
    }
    let (_, fi) = f.shape();
    let (go, _) = g.shape();
    if fi != go {
        return Err(Error::DimensionMismatch {
            expected: fi,
            found: go,
        });
    }
    let values = ValueMap::new(
        f.points.clone(),
        f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect(),
    )?;
    let membership = membership_test(&values, kernels, 1.0, tol)?;
    Ok(ProductReport { values, membership })
}
