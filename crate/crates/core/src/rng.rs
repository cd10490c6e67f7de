//! Seeded, counter-addressable random streams.
//!
//! Every random draw in the crate goes through [`stream`]: the pair
//! `(seed, index)` fixes a ChaCha8 key and stream, so batch jobs give the same
//! numbers whatever order (or thread) the samples are produced in.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::test_functions::{symmetrize, DomainTag, Point};
use crate::C64;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Uniform sample from the open disc of the given radius.
pub fn disc_point<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    C64::from_polar(r, theta)
}

/// Haar-distributed unitary (QR of a complex Ginibre matrix with the phases of
/// `diag(R)` divided out).
pub fn haar_unitary<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let g = gaussian_matrix(rng, dim, dim);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random point of `domain`; on `G2` the symmetrization of two disc samples.
pub fn random_point<R: Rng>(rng: &mut R, domain: DomainTag, radius: f64) -> Point {
    match domain {
        DomainTag::SymmetrizedBidisc => {
            let (a, b) = (disc_point(rng, radius), disc_point(rng, radius));
            symmetrize(a, b).expect("disc samples stay inside")
        }
        _ => {
            let coords = (0..domain.coordinate_count())
                .map(|_| disc_point(rng, radius))
                .collect();
            Point::new(domain, coords).expect("disc samples stay inside")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| stream(7, 3).random()).collect();
        let b: Vec<f64> = (0..4).map(|_| stream(7, 3).random()).collect();
        assert_eq!(a, b);
        let x: f64 = stream(7, 3).random();
        let y: f64 = stream(7, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = stream(1, 0);
        let u = haar_unitary(&mut rng, 6);
        let defect = (u.adjoint() * &u - DMatrix::<C64>::identity(6, 6)).camax();
        assert!(defect < 1e-12, "defect {defect}");
    }
}
