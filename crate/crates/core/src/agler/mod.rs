//! Finite interpolation feasibility through Agler decompositions.
//!
//! A problem `(w_j, x_j, C)` is solvable by some `phi` with `||phi||_Psi <= C`
//! exactly when there are PSD slices `G_t`, one per test function, with
//!
//! ```text
//! C^2 - x_i conj(x_j) = sum_t G_t[i][j] (1 - psi_t(w_i) conj(psi_t(w_j))).
//! ```
//!
//! Writing `P = C^2 J - x x*` and `D_t` for the masks, the obstruction side is
//! an admissible kernel `W` (trace 1, `W o D_t >= 0`) with `sum_ij P_ij W_ij < 0`.
//! Both sides come back as certificates that [`verify_certificate`] and
//! [`DualWitness::verify`] re-check from scratch.
//!
//! One test function: the affine set is a single point `G = P o (1 / D)`, so
//! the decision is an eigenvalue computation. Several: an interior point SDP.

mod sdp;

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{test_masks, KernelSample, Provenance, DUPLICATE_TOL};
use crate::linalg::{min_max_eigenvalues, HermitianMatrix};
use crate::test_functions::{PointConfig, TestFunctionFamily};
use crate::C64;

use sdp::{Ipm, Step};

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationProblem {
    points: PointConfig,
    targets: Vec<C64>,
    bound: f64,
    family: TestFunctionFamily,
}

impl InterpolationProblem {
    pub fn new(
        points: PointConfig,
        targets: Vec<C64>,
        bound: f64,
        family: TestFunctionFamily,
    ) -> Result<Self> {
        if targets.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: targets.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::InvalidInput(
                "interpolation problem needs at least one point".into(),
            ));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bound must be positive and finite, got {bound}"
            )));
        }
        if targets.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("targets must be finite".into()));
        }
        if points.domain() != family.domain() {
            return Err(Error::DomainMismatch {
                expected: family.domain().to_string(),
                found: points.domain().to_string(),
            });
        }
        points.check_distinct(DUPLICATE_TOL)?;
        Ok(Self {
            points,
            targets,
            bound,
            family,
        })
    }

    /// Same points and targets, different `C`.
    pub fn with_bound(&self, bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bound must be positive and finite, got {bound}"
            )));
        }
        Ok(Self {
            bound,
            ..self.clone()
        })
    }

    pub fn points(&self) -> &PointConfig {
        &self.points
    }

    pub fn targets(&self) -> &[C64] {
        &self.targets
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn family(&self) -> &TestFunctionFamily {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `C^2 J - x x*`.
    pub fn target_matrix(&self) -> HermitianMatrix {
        let c2 = self.bound * self.bound;
        let x = &self.targets;
        HermitianMatrix::from_upper(x.len(), |i, j| C64::new(c2, 0.0) - x[i] * x[j].conj())
    }

    pub fn masks(&self) -> Vec<HermitianMatrix> {
        test_masks(&self.family, &self.points).expect("points validated against the family")
    }

    fn scale(&self) -> f64 {
        (self.bound * self.bound).max(1.0)
    }

    /// Smallest violation a witness must show: `tol` on the scale of the data
    /// `x x*`, plus a rounding floor for the `C^2 J` term.
    fn witness_threshold(&self, tol: f64) -> f64 {
        let data = self
            .targets
            .iter()
            .map(|x| x.norm_sqr())
            .fold(1.0, f64::max);
        tol * data + ROUNDING_FLOOR * self.len() as f64 * self.scale()
    }
}

/// Relative rounding floor (a few dozen ulps) for pairings against `C^2 J`.
const ROUNDING_FLOOR: f64 = 1e-14;

/// `((C^2 - x_i conj(x_j)) k(w_i, w_j))`.
pub fn pick_matrix(problem: &InterpolationProblem, k: &KernelSample) -> Result<HermitianMatrix> {
    if k.points() != problem.points() {
        return Err(Error::PointMismatch);
    }
    crate::linalg::schur_product(&problem.target_matrix(), k.gram())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AglerCertificate {
    pub gammas: Vec<HermitianMatrix>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub valid: bool,
    pub residual: f64,
    pub min_slice_eigenvalue: f64,
}

/// Recomputes `max |P - sum_t G_t o D_t|` and every slice spectrum. Passes when
/// the residual is at most `tol max(1, C^2)` and each slice has
/// `lambda_min >= -tol max(1, max diag G_t)`.
pub fn verify_certificate(
    cert: &AglerCertificate,
    problem: &InterpolationProblem,
    tol: f64,
) -> Result<CertificateCheck> {
    let masks = problem.masks();
    if cert.gammas.len() != masks.len() {
        return Err(Error::DimensionMismatch {
            expected: masks.len(),
            found: cert.gammas.len(),
        });
    }
    let n = problem.len();
    if let Some(g) = cert.gammas.iter().find(|g| g.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.dim(),
        });
    }
    let residual = decomposition_residual(&cert.gammas, &masks, &problem.target_matrix());
    let mut psd = true;
    let mut min_slice_eigenvalue = f64::INFINITY;
    for g in &cert.gammas {
        let lmin = min_max_eigenvalues(g).min_eig;
        psd &= lmin >= -tol * g.max_diagonal().max(1.0);
        min_slice_eigenvalue = min_slice_eigenvalue.min(lmin);
    }
    Ok(CertificateCheck {
        valid: psd && residual <= tol * problem.scale(),
        residual,
        min_slice_eigenvalue,
    })
}

fn decomposition_residual(
    gammas: &[HermitianMatrix],
    masks: &[HermitianMatrix],
    p: &HermitianMatrix,
) -> f64 {
    residual_matrix(gammas, masks, p).camax()
}

fn residual_matrix(
    gammas: &[HermitianMatrix],
    masks: &[HermitianMatrix],
    p: &HermitianMatrix,
) -> DMatrix<C64> {
    let mut r = p.as_matrix().clone();
    for (g, d) in gammas.iter().zip(masks) {
        r -= g.as_matrix().component_mul(d.as_matrix());
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualWitness {
    #[serde(rename = "W")]
    pub w: HermitianMatrix,
    pub violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessCheck {
    pub valid: bool,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub min_masked_eigenvalue: f64,
    /// `-sum_ij P_ij W_ij`, recomputed.
    pub violation: f64,
}

impl DualWitness {
    /// Builds a trace-1 witness from any nonzero candidate.
    fn normalized(w: HermitianMatrix, problem: &InterpolationProblem) -> Option<Self> {
        let tr = w.trace();
        if !(tr > 0.0 && tr.is_finite()) {
            return None;
        }
        let w = w.scaled(1.0 / tr);
        let violation = -problem.target_matrix().pairing(&w);
        Some(Self { w, violation })
    }

    /// `W >= -tol`, `W o D_t >= -tol` for every test function, trace 1 and
    /// recomputed violation above `tol max(1, |x|^2)` plus a rounding floor of
    /// order `1e-14 n C^2`.
    pub fn verify(&self, problem: &InterpolationProblem, tol: f64) -> Result<WitnessCheck> {
        if self.w.dim() != problem.len() {
            return Err(Error::DimensionMismatch {
                expected: problem.len(),
                found: self.w.dim(),
            });
        }
        let trace = self.w.trace();
        let min_eigenvalue = min_max_eigenvalues(&self.w).min_eig;
        let min_masked_eigenvalue = problem
            .masks()
            .iter()
            .map(|d| {
                min_max_eigenvalues(&crate::linalg::schur_product(d, &self.w).expect("same dim"))
                    .min_eig
            })
            .fold(f64::INFINITY, f64::min);
        let violation = -problem.target_matrix().pairing(&self.w);
        let valid = (trace - 1.0).abs() <= 1e-9
            && min_eigenvalue >= -tol
            && min_masked_eigenvalue >= -tol
            && violation > problem.witness_threshold(tol)
            && (violation - self.violation).abs() <= 1e-9 * problem.scale();
        Ok(WitnessCheck {
            valid,
            trace,
            min_eigenvalue,
            min_masked_eigenvalue,
            violation,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Best estimate of `max s` with `P - s I` decomposable; negative means infeasible.
    pub margin_estimate: f64,
    pub primal_residual: f64,
    pub dual_violation: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "certificate", rename_all = "snake_case")]
pub enum FeasibilityStatus {
    Feasible(AglerCertificate),
    Infeasible(DualWitness),
    Indeterminate(Diagnostics),
}

impl FeasibilityStatus {
    pub fn label(&self) -> &'static str {
        match self {
            FeasibilityStatus::Feasible(_) => "feasible",
            FeasibilityStatus::Infeasible(_) => "infeasible",
            FeasibilityStatus::Indeterminate(_) => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverRoute {
    /// Some `|x_j| > C`, or `P = 0`.
    Trivial,
    /// One test function: closed-form slice.
    SingleMask,
    InteriorPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityResult {
    #[serde(flatten)]
    pub status: FeasibilityStatus,
    pub route: SolverRoute,
    pub iterations: usize,
    /// Grid size for `G2` families; a feasible verdict only covers the grid.
    pub grid_size: Option<usize>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, FeasibilityStatus::Feasible(_))
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.status, FeasibilityStatus::Infeasible(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Certificate residual and slice PSD tolerance (relative).
    pub certificate_tol: f64,
    /// Witness violation threshold (relative to `max(1, C^2)`).
    pub witness_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            certificate_tol: 1e-8,
            witness_tol: 1e-10,
        }
    }
}

pub fn agler_feasibility(problem: &InterpolationProblem) -> FeasibilityResult {
    agler_feasibility_with(problem, &SolverConfig::default())
}

pub fn agler_feasibility_with(
    problem: &InterpolationProblem,
    config: &SolverConfig,
) -> FeasibilityResult {
    let start = Instant::now();
    let (status, route, iterations) = solve(problem, config);
    FeasibilityResult {
        status,
        route,
        iterations,
        grid_size: match problem.family().domain() {
            crate::DomainTag::SymmetrizedBidisc => problem.family().grid_size(),
            _ => None,
        },
        wall_time: start.elapsed(),
    }
}

fn solve(
    problem: &InterpolationProblem,
    config: &SolverConfig,
) -> (FeasibilityStatus, SolverRoute, usize) {
    let p = problem.target_matrix();
    let n = problem.len();
    let masks = problem.masks();

    let (j, worst) = p
        .diagonal()
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    if worst < 0.0 {
        // |x_j| > C: the point mass at w_j is admissible.
        let w = HermitianMatrix::from_upper(n, |a, b| {
            C64::new(if a == j && b == j { 1.0 } else { 0.0 }, 0.0)
        });
        let witness = DualWitness::normalized(w, problem).expect("unit trace");
        if witness
            .verify(problem, config.witness_tol)
            .map(|c| c.valid)
            .unwrap_or(false)
        {
            return (
                FeasibilityStatus::Infeasible(witness),
                SolverRoute::Trivial,
                0,
            );
        }
    }
    let scale = p.max_abs_entry();
    if scale == 0.0 {
        let cert = AglerCertificate {
            gammas: vec![HermitianMatrix::from_upper(n, |_, _| C64::new(0.0, 0.0)); masks.len()],
            residual: 0.0,
        };
        return (FeasibilityStatus::Feasible(cert), SolverRoute::Trivial, 0);
    }
    if masks.len() == 1 {
        return (
            single_mask(problem, &p, &masks[0], config),
            SolverRoute::SingleMask,
            0,
        );
    }
    interior_point(problem, &p, &masks, config)
}

fn single_mask(
    problem: &InterpolationProblem,
    p: &HermitianMatrix,
    d: &HermitianMatrix,
    config: &SolverConfig,
) -> FeasibilityStatus {
    let n = p.dim();
    let s = HermitianMatrix::from_upper(n, |i, j| C64::new(1.0, 0.0) / d.get(i, j));
    let gamma = crate::linalg::schur_product(p, &s).expect("same dim");
    let spec = min_max_eigenvalues(&gamma);
    if spec.min_eig < 0.0 {
        // W = S o (conj(v) v^T): W o D = conj(v) v^T >= 0 and sum P_ij W_ij = v* G v.
        let v = &spec.witness_vector;
        let w = HermitianMatrix::from_upper(n, |i, j| s.get(i, j) * v[i].conj() * v[j]);
        if let Some(witness) = DualWitness::normalized(w, problem) {
            if witness
                .verify(problem, config.witness_tol)
                .is_ok_and(|c| c.valid)
            {
                return FeasibilityStatus::Infeasible(witness);
            }
        }
    }
    // Clipping moves each entry by at most |lambda_min|, so half the residual
    // budget decides the feasible side.
    if spec.min_eig >= -0.5 * config.certificate_tol * problem.scale() {
        let gamma = if spec.min_eig < 0.0 {
            gamma.clip_to_psd()
        } else {
            gamma
        };
        let residual =
            decomposition_residual(std::slice::from_ref(&gamma), std::slice::from_ref(d), p);
        return FeasibilityStatus::Feasible(AglerCertificate {
            gammas: vec![gamma],
            residual,
        });
    }
    FeasibilityStatus::Indeterminate(Diagnostics {
        margin_estimate: spec.min_eig,
        primal_residual: 0.0,
        dual_violation: -spec.min_eig,
        message: "Pick slice is barely indefinite; obstruction below the witness threshold".into(),
    })
}

/// Moves each slice onto the affine set with the least-norm entrywise
/// correction `delta_t[i][j] = R_ij conj(D_t[i][j]) / sum_s |D_s[i][j]|^2`.
fn project_affine(gammas: &mut [HermitianMatrix], masks: &[HermitianMatrix], p: &HermitianMatrix) {
    let r = residual_matrix(gammas, masks, p);
    let n = p.dim();
    let weight = DMatrix::from_fn(n, n, |i, j| {
        masks.iter().map(|d| d.get(i, j).norm_sqr()).sum::<f64>()
    });
    for (g, d) in gammas.iter_mut().zip(masks) {
        let delta =
            HermitianMatrix::from_upper(n, |i, j| r[(i, j)] * d.get(i, j).conj() / weight[(i, j)]);
        *g = g.add(&delta).expect("same dim");
    }
}

fn interior_point(
    problem: &InterpolationProblem,
    p: &HermitianMatrix,
    masks: &[HermitianMatrix],
    config: &SolverConfig,
) -> (FeasibilityStatus, SolverRoute, usize) {
    let n = p.dim();
    let t = masks.len();
    let scale = p.max_abs_entry();
    let p_hat = p.scaled(1.0 / scale);
    let s0 = p_hat.diagonal().into_iter().fold(f64::INFINITY, f64::min);
    let b = p_hat.shifted(-s0).into_matrix();
    let mut ipm = Ipm::new(masks.iter().map(|d| d.as_matrix().clone()).collect(), b);

    let primal = |ipm: &Ipm| -> Option<AglerCertificate> {
        let s = s0 - ipm.xu;
        let mut gammas: Vec<HermitianMatrix> = ipm
            .x
            .iter()
            .zip(masks)
            .map(|(x, d)| {
                let g = HermitianMatrix::symmetrized(x.scale(scale));
                let diag = HermitianMatrix::from_upper(n, |i, j| {
                    C64::new(
                        if i == j {
                            scale * s / (t as f64 * d.get(i, i).re)
                        } else {
                            0.0
                        },
                        0.0,
                    )
                });
                g.add(&diag).expect("same dim")
            })
            .collect();
        for _ in 0..3 {
            project_affine(&mut gammas, masks, p);
            if gammas.iter().all(|g| min_max_eigenvalues(g).min_eig >= 0.0) {
                break;
            }
            for g in gammas.iter_mut() {
                *g = g.clip_to_psd();
            }
        }
        project_affine(&mut gammas, masks, p);
        let cert = AglerCertificate {
            residual: decomposition_residual(&gammas, masks, p),
            gammas,
        };
        let ok = verify_certificate(&cert, problem, config.certificate_tol)
            .map(|c| c.valid)
            .unwrap_or(false);
        ok.then_some(cert)
    };
    let dual = |ipm: &Ipm| -> Option<DualWitness> {
        // W = conj(K) with K = -Y.
        let w = HermitianMatrix::symmetrized(ipm.y.map(|z| -z.conj()));
        let witness = DualWitness::normalized(w, problem)?;
        let ok = witness
            .verify(problem, config.witness_tol)
            .map(|c| c.valid)
            .unwrap_or(false);
        ok.then_some(witness)
    };

    let mut last = ipm.progress();
    for k in 0..config.max_iterations {
        let outcome = ipm.step();
        last = ipm.progress();
        let done = outcome != Step::Continue || k + 1 == config.max_iterations;
        let feasible_side = last.pinf < 1e-10 && s0 - last.pobj > 1e-7;
        let infeasible_side = last.dinf < 1e-10 && last.dobj - s0 > 1e-7;
        if feasible_side || done {
            if let Some(cert) = primal(&ipm) {
                return (
                    FeasibilityStatus::Feasible(cert),
                    SolverRoute::InteriorPoint,
                    ipm.iterations,
                );
            }
        }
        if infeasible_side || done {
            if let Some(w) = dual(&ipm) {
                return (
                    FeasibilityStatus::Infeasible(w),
                    SolverRoute::InteriorPoint,
                    ipm.iterations,
                );
            }
        }
        if done {
            break;
        }
    }
    let margin = s0 - 0.5 * (last.pobj + last.dobj);
    (
        FeasibilityStatus::Indeterminate(Diagnostics {
            margin_estimate: margin * scale,
            primal_residual: last.pinf,
            dual_violation: (last.dobj - s0) * scale,
            message: format!(
                "no certificate after {} interior point iterations (gap {:.2e})",
                ipm.iterations,
                (last.pobj - last.dobj).abs()
            ),
        }),
        SolverRoute::InteriorPoint,
        ipm.iterations,
    )
}

/// Minimal eigenvalue of the Pick matrix at each sampled admissible kernel.
/// A margin below `-tol` proves infeasibility at the problem's bound.
pub fn kernel_necessary_check(
    problem: &InterpolationProblem,
    samples: &[KernelSample],
) -> Result<Vec<(Provenance, f64)>> {
    samples
        .iter()
        .map(|k| {
            Ok((
                k.provenance(),
                min_max_eigenvalues(&pick_matrix(problem, k)?).min_eig,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalNormStatus {
    Converged,
    /// The solver certified neither side of the bracket.
    Indeterminate,
    /// Still infeasible at the upper cap.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalNorm {
    pub status: MinimalNormStatus,
    /// Midpoint of the final bracket; `inf` when unbounded.
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
    /// Largest bound known (or assumed from `max |x_j|`) to be infeasible.
    pub lower: f64,
    /// Smallest bound certified feasible.
    pub upper: Option<f64>,
    pub solves: usize,
}

impl MinimalNorm {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

fn serialize_extended<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Upper limit of the doubling search in [`minimal_norm`]. Past it the data
/// term `x x*` sits below about `1e-12` of `C^2 J`, too close to rounding for
/// witnesses to be told apart from noise, so the norm is reported unbounded.
pub const DEFAULT_NORM_CAP: f64 = 1e6;

pub fn minimal_norm(
    points: &PointConfig,
    targets: &[C64],
    family: &TestFunctionFamily,
    tol: f64,
) -> Result<MinimalNorm> {
    minimal_norm_with(
        points,
        targets,
        family,
        tol,
        DEFAULT_NORM_CAP,
        &SolverConfig::default(),
    )
}

/// Bisection on `C`, starting from the lower bound `max |x_j|` and doubling
/// upward until feasible or past `cap`. Stops when the bracket width is at
/// most `tol max(1, lower)`.
pub fn minimal_norm_with(
    points: &PointConfig,
    targets: &[C64],
    family: &TestFunctionFamily,
    tol: f64,
    cap: f64,
    config: &SolverConfig,
) -> Result<MinimalNorm> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let lo0 = targets.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if lo0 == 0.0 {
        InterpolationProblem::new(points.clone(), targets.to_vec(), 1.0, family.clone())?;
        return Ok(MinimalNorm {
            status: MinimalNormStatus::Converged,
            value: 0.0,
            lower: 0.0,
            upper: Some(0.0),
            solves: 0,
        });
    }
    let problem = InterpolationProblem::new(points.clone(), targets.to_vec(), lo0, family.clone())?;
    let mut solves = 0;
    let check = |c: f64, solves: &mut usize| -> Result<FeasibilityResult> {
        *solves += 1;
        Ok(agler_feasibility_with(&problem.with_bound(c)?, config))
    };

    if check(lo0, &mut solves)?.is_feasible() {
        return Ok(MinimalNorm {
            status: MinimalNormStatus::Converged,
            value: lo0,
            lower: lo0,
            upper: Some(lo0),
            solves: 1,
        });
    }
    let mut lo = lo0;
    let mut hi = 2.0 * lo0;
    loop {
        let r = check(hi, &mut solves)?;
        if r.is_feasible() {
            break;
        }
        let indeterminate = !r.is_infeasible();
        if indeterminate || hi > cap {
            let status = if indeterminate {
                MinimalNormStatus::Indeterminate
            } else {
                MinimalNormStatus::Unbounded
            };
            if !indeterminate {
                lo = hi;
            }
            return Ok(MinimalNorm {
                status,
                value: f64::INFINITY,
                lower: lo,
                upper: None,
                solves,
            });
        }
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol * lo.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let r = check(mid, &mut solves)?;
        if r.is_feasible() {
            hi = mid;
        } else if r.is_infeasible() {
            lo = mid;
        } else {
            return Ok(MinimalNorm {
                status: MinimalNormStatus::Indeterminate,
                value: 0.5 * (lo + hi),
                lower: lo,
                upper: Some(hi),
                solves,
            });
        }
    }
    Ok(MinimalNorm {
        status: MinimalNormStatus::Converged,
        value: 0.5 * (lo + hi),
        lower: lo,
        upper: Some(hi),
        solves,
    })
}
