//! Primal-dual interior point method (HKM direction, Mehrotra predictor-corrector)
//! for the Agler slice problem
//!
//! ```text
//! min u  s.t.  sum_t G_t o D_t - u I = B,   G_t >= 0,  u >= 0
//! ```
//!
//! with dual
//!
//! ```text
//! max <B, Y>  s.t.  Z_t = -conj(D_t) o Y >= 0,  z_u = 1 + tr Y >= 0.
//! ```
//!
//! Hermitian matrices are handled directly with the real inner product
//! `Re tr(A B)`. The Schur complement system is assembled in real coordinates
//! of the Hermitian matrix space (diagonal, then real and imaginary parts of
//! the strict upper triangle).

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::C64;

type Mat = DMatrix<C64>;

const STEP_FRACTION: f64 = 0.95;

fn herm(m: &Mat) -> Mat {
    (m + m.adjoint()).scale(0.5)
}

fn re_trace_prod(a: &Mat, b: &Mat) -> f64 {
    // Re tr(A B) = Re sum_ij A_ij B_ji
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

fn trace_re(m: &Mat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

fn to_coords(h: &Mat) -> DVector<f64> {
    let n = h.nrows();
    let mut v = DVector::zeros(n * n);
    for i in 0..n {
        v[i] = h[(i, i)].re;
    }
    let mut p = n;
    for k in 0..n {
        for l in k + 1..n {
            let z = (h[(k, l)] + h[(l, k)].conj()) * 0.5;
            v[p] = z.re;
            v[p + 1] = z.im;
            p += 2;
        }
    }
    v
}

fn from_coords(v: &DVector<f64>, n: usize) -> Mat {
    let mut h = Mat::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(v[i], 0.0);
    }
    let mut p = n;
    for k in 0..n {
        for l in k + 1..n {
            let z = C64::new(v[p], v[p + 1]);
            h[(k, l)] = z;
            h[(l, k)] = z.conj();
            p += 2;
        }
    }
    h
}

/// `(alpha_max)` such that `x + alpha dx` stays PD; infinite when `dx` is PSD.
fn max_step(x: &Mat, dx: &Mat) -> f64 {
    let n = x.nrows();
    let Some(ch) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let mut linv = Mat::identity(n, n);
    let l = ch.l();
    if !l.solve_lower_triangular_mut(&mut linv) {
        return 0.0;
    }
    let s = herm(&(&linv * dx * linv.adjoint()));
    let lmin = s
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn hpd_inverse(m: &Mat) -> Option<Mat> {
    Cholesky::new(m.clone()).map(|c| herm(&c.inverse()))
}

/// Current iterate and progress measures.
#[derive(Debug, Clone)]
pub(crate) struct Ipm {
    masks: Vec<Mat>,
    b: Mat,
    n: usize,
    pub x: Vec<Mat>,
    pub xu: f64,
    pub y: Mat,
    pub z: Vec<Mat>,
    pub zu: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    Continue,
    Converged,
    Stalled,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Progress {
    pub pobj: f64,
    pub dobj: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub mu: f64,
}

struct Direction {
    dx: Vec<Mat>,
    dxu: f64,
    dy: Mat,
    dz: Vec<Mat>,
    dzu: f64,
}

impl Ipm {
    pub fn new(masks: Vec<Mat>, b: Mat) -> Self {
        let n = b.nrows();
        let t = masks.len();
        let scale = 1.0 + b.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
        Self {
            x: vec![Mat::identity(n, n).scale(scale); t],
            xu: scale,
            y: Mat::zeros(n, n),
            z: vec![Mat::identity(n, n); t],
            zu: 1.0,
            masks,
            b,
            n,
            iterations: 0,
        }
    }

    fn apply_a(&self, x: &[Mat], xu: f64) -> Mat {
        let mut out = Mat::identity(self.n, self.n).scale(-xu);
        for (xt, d) in x.iter().zip(&self.masks) {
            out += xt.component_mul(d);
        }
        out
    }

    fn apply_at(&self, y: &Mat) -> (Vec<Mat>, f64) {
        let blocks = self
            .masks
            .iter()
            .map(|d| d.map(|c| c.conj()).component_mul(y))
            .collect();
        (blocks, -trace_re(y))
    }

    fn primal_residual(&self) -> Mat {
        &self.b - self.apply_a(&self.x, self.xu)
    }

    fn dual_residual(&self) -> (Vec<Mat>, f64) {
        let (aty, atyu) = self.apply_at(&self.y);
        let rd = aty.iter().zip(&self.z).map(|(a, z)| -(a + z)).collect();
        (rd, 1.0 - atyu - self.zu)
    }

    fn complementarity(&self, x: &[Mat], xu: f64, z: &[Mat], zu: f64) -> f64 {
        let s: f64 = x.iter().zip(z).map(|(a, b)| re_trace_prod(a, b)).sum();
        (s + xu * zu) / (self.n * self.masks.len() + 1) as f64
    }

    pub fn progress(&self) -> Progress {
        let rp = self.primal_residual();
        let (rd, rdu) = self.dual_residual();
        let bnorm = self.b.norm();
        let dnorm = (rd.iter().map(|m| m.norm_squared()).sum::<f64>() + rdu * rdu).sqrt();
        Progress {
            pobj: self.xu,
            dobj: re_trace_prod(&self.b, &self.y),
            pinf: rp.norm() / (1.0 + bnorm),
            dinf: dnorm / 2.0,
            mu: self.complementarity(&self.x, self.xu, &self.z, self.zu),
        }
    }

    /// Real matrix of `dY -> A(herm(X A^T(dY) Z^-1))` in Hermitian coordinates.
    fn schur_matrix(&self, zinv: &[Mat]) -> DMatrix<f64> {
        let n = self.n;
        let n2 = n * n;
        let mut lc = vec![C64::new(0.0, 0.0); n2 * n2];
        let mut f = vec![C64::new(0.0, 0.0); n * n * n];
        for ((x, zi), d) in self.x.iter().zip(zinv).zip(&self.masks) {
            // f[(k n + j) n + l] = conj(d_kl) zi_lj
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        f[(k * n + j) * n + l] = d[(k, l)].conj() * zi[(l, j)];
                    }
                }
            }
            for i in 0..n {
                for k in 0..n {
                    let a = x[(i, k)];
                    for j in 0..n {
                        let b = d[(i, j)] * a;
                        let row = (i * n + j) * n2 + k * n;
                        let fk = &f[(k * n + j) * n..(k * n + j + 1) * n];
                        for (slot, &fv) in lc[row..row + n].iter_mut().zip(fk) {
                            *slot += b * fv;
                        }
                    }
                }
            }
        }
        let ratio = C64::new(self.xu / self.zu, 0.0);
        for i in 0..n {
            for k in 0..n {
                lc[(i * n + i) * n2 + k * n + k] += ratio;
            }
        }
        let col = |k: usize, l: usize| -> Mat {
            Mat::from_fn(n, n, |i, j| lc[(i * n + j) * n2 + k * n + l])
        };
        let mut m = DMatrix::zeros(n2, n2);
        for k in 0..n {
            m.set_column(k, &to_coords(&col(k, k)));
        }
        let iu = C64::new(0.0, 1.0);
        let mut p = n;
        for k in 0..n {
            for l in k + 1..n {
                let (a, b) = (col(k, l), col(l, k));
                m.set_column(p, &to_coords(&(&a + &b)));
                m.set_column(p + 1, &to_coords(&((&a - &b) * iu)));
                p += 2;
            }
        }
        m
    }

    fn direction(
        &self,
        lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
        zinv: &[Mat],
        rp: &Mat,
        rd: &(Vec<Mat>, f64),
        sigma_mu: f64,
        corr: Option<&Direction>,
    ) -> Option<Direction> {
        let mut hx: Vec<Mat> = Vec::with_capacity(self.x.len());
        for (t, ((x, zi), r)) in self.x.iter().zip(zinv).zip(&rd.0).enumerate() {
            let mut h = zi.scale(sigma_mu) - x - herm(&(x * r * zi));
            if let Some(c) = corr {
                h -= herm(&(&c.dx[t] * &c.dz[t] * zi));
            }
            hx.push(h);
        }
        let mut hxu = sigma_mu / self.zu - self.xu - self.xu * rd.1 / self.zu;
        if let Some(c) = corr {
            hxu -= c.dxu * c.dzu / self.zu;
        }
        let rhs = herm(&(rp - self.apply_a(&hx, hxu)));
        let dyv = lu.solve(&to_coords(&rhs))?;
        if dyv.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dy = from_coords(&dyv, self.n);
        let (atdy, atdyu) = self.apply_at(&dy);
        let dz: Vec<Mat> =
            rd.0.iter()
                .zip(&atdy)
                .map(|(r, a)| herm(&(r - a)))
                .collect();
        let dzu = rd.1 - atdyu;
        let dx: Vec<Mat> = hx
            .iter()
            .zip(&self.x)
            .zip(&atdy)
            .zip(zinv)
            .map(|(((h, x), a), zi)| h + herm(&(x * a * zi)))
            .collect();
        let dxu = hxu + self.xu * atdyu / self.zu;
        Some(Direction {
            dx,
            dxu,
            dy,
            dz,
            dzu,
        })
    }

    fn step_lengths(&self, d: &Direction) -> (f64, f64) {
        let mut ap = if d.dxu < 0.0 {
            -self.xu / d.dxu
        } else {
            f64::INFINITY
        };
        let mut ad = if d.dzu < 0.0 {
            -self.zu / d.dzu
        } else {
            f64::INFINITY
        };
        for (x, dx) in self.x.iter().zip(&d.dx) {
            ap = ap.min(max_step(x, dx));
        }
        for (z, dz) in self.z.iter().zip(&d.dz) {
            ad = ad.min(max_step(z, dz));
        }
        ((STEP_FRACTION * ap).min(1.0), (STEP_FRACTION * ad).min(1.0))
    }

    pub fn step(&mut self) -> Step {
        let before = self.progress();
        if before.pinf < 1e-11
            && before.dinf < 1e-11
            && before.mu * (self.n * self.masks.len() + 1) as f64
                <= 1e-11 * (1.0 + before.pobj.abs() + before.dobj.abs())
        {
            return Step::Converged;
        }
        let Some(zinv) = self.z.iter().map(hpd_inverse).collect::<Option<Vec<_>>>() else {
            return Step::Stalled;
        };
        let m = self.schur_matrix(&zinv);
        let lu = m.lu();
        let rp = self.primal_residual();
        let rd = self.dual_residual();
        let Some(pred) = self.direction(&lu, &zinv, &rp, &rd, 0.0, None) else {
            return Step::Stalled;
        };
        let (ap, ad) = self.step_lengths(&pred);
        let xs: Vec<Mat> = self
            .x
            .iter()
            .zip(&pred.dx)
            .map(|(x, d)| x + d.scale(ap))
            .collect();
        let zs: Vec<Mat> = self
            .z
            .iter()
            .zip(&pred.dz)
            .map(|(z, d)| z + d.scale(ad))
            .collect();
        let mu_aff =
            self.complementarity(&xs, self.xu + ap * pred.dxu, &zs, self.zu + ad * pred.dzu);
        let sigma = (mu_aff / before.mu).clamp(0.0, 1.0).powi(3);
        let Some(dir) = self.direction(&lu, &zinv, &rp, &rd, sigma * before.mu, Some(&pred)) else {
            return Step::Stalled;
        };
        let (ap, ad) = self.step_lengths(&dir);
        if ap < 1e-12 && ad < 1e-12 {
            return Step::Stalled;
        }
        for (x, d) in self.x.iter_mut().zip(&dir.dx) {
            *x = herm(&(&*x + d.scale(ap)));
        }
        self.xu += ap * dir.dxu;
        self.y = herm(&(&self.y + dir.dy.scale(ad)));
        for (z, d) in self.z.iter_mut().zip(&dir.dz) {
            *z = herm(&(&*z + d.scale(ad)));
        }
        self.zu += ad * dir.dzu;
        self.iterations += 1;
        Step::Continue
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_trip() {
        let h = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new(i as f64 + 1.0, 0.0)
            } else if i < j {
                C64::new(i as f64 - j as f64, 0.5 * (i + j) as f64)
            } else {
                C64::new(j as f64 - i as f64, -0.5 * (i + j) as f64)
            }
        });
        assert!((from_coords(&to_coords(&h), 3) - &h).camax() < 1e-15);
    }

    #[test]
    fn max_step_of_identity_direction() {
        let x = Mat::identity(2, 2);
        assert!(max_step(&x, &x).is_infinite());
        assert!((max_step(&x, &(-x.scale(2.0))) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn single_mask_problem_converges() {
        // one mask of all-ones: min u s.t. G - uI = B, G >= 0; optimum u = max(0, -lambda_min(B))
        let b = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                C64::new(0.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        });
        let mut ipm = Ipm::new(vec![Mat::from_element(2, 2, C64::new(1.0, 0.0))], b);
        for _ in 0..100 {
            if ipm.step() != Step::Continue {
                break;
            }
        }
        let p = ipm.progress();
        assert!((p.pobj - 1.0).abs() < 1e-7, "{p:?}");
        assert!((p.dobj - 1.0).abs() < 1e-7, "{p:?}");
    }
}
