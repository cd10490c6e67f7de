//! Fixed inputs shared by the criterion benches.

use agler_core::rng::{self, random_point};
use agler_core::{Colligation, InterpolationProblem, Point, PointConfig, TestFunctionFamily, C64};

/// `n` random points of the family's domain, radius 0.9.
pub fn points(family: &TestFunctionFamily, n: usize, seed: u64) -> PointConfig {
    let mut g = rng::stream(seed, 0);
    let pts: Vec<Point> = (0..n)
        .map(|_| random_point(&mut g, family.domain(), 0.9))
        .collect();
    PointConfig::new(family.domain(), pts).expect("random points are distinct")
}

/// Targets taken from a random transfer function scaled by `s`, so that
/// `s < 1` gives a feasible problem and `s > 1` usually an infeasible one.
pub fn problem(family: &TestFunctionFamily, n: usize, s: f64, seed: u64) -> InterpolationProblem {
    let pts = points(family, n, seed);
    let col = Colligation::random(family, 3, 1, seed).expect("valid family");
    let x: Vec<C64> = pts
        .points()
        .iter()
        .map(|p| agler_core::transfer_eval(&col, p).expect("unitary colligation")[(0, 0)] * s)
        .collect();
    InterpolationProblem::new(pts, x, 1.0, family.clone()).expect("consistent problem")
}
