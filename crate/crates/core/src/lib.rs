//! Numerical toolkit for interpolation in algebras generated by test functions.
//!
//! The crate works on finite truncations of point sequences in the disc, the
//! polydisc and the symmetrized bidisc. It builds admissible kernels, measures
//! normalized Grammians, decides finite interpolation problems through Agler
//! decompositions (with re-verifiable primal and dual certificates) and
//! evaluates transfer functions of unitary colligations.
//!
//! Every module works on dense complex matrices of desk-scale size (a few
//! hundred points at most).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agler;
pub mod colligation;
pub mod error;
pub mod gallery;
pub mod grammian;
pub mod kernels;
pub mod linalg;
pub mod rng;
pub mod separation;
pub mod test_functions;
pub mod theorem;

pub use num_complex::Complex64 as C64;

pub use agler::{
    agler_feasibility, agler_feasibility_with, kernel_necessary_check, minimal_norm,
    minimal_norm_with, pick_matrix, verify_certificate, AglerCertificate, CertificateCheck,
    DualWitness, FeasibilityResult, FeasibilityStatus, InterpolationProblem, MinimalNorm,
    MinimalNormStatus, SolverConfig, WitnessCheck,
};
pub use colligation::{
    diag_direct_sum, is_unitary, membership_test, product, transfer_eval, transpose, Colligation,
    MembershipReport, ProductReport, UnitaryCheck, ValueMap,
};
pub use error::{Error, Result};
pub use gallery::{generate, SequenceFamily, SequenceSpec};
pub use grammian::{
    bounds_over_cone, normalized_grammian, schur_reduction_check, truncation_trend, ConeBounds,
    GrammianDiagnostics, SchurReductionReport, TrendRow,
};
pub use kernels::{
    base_kernel, product_szego_gram, scale_by_random_psd, symmetrized_szego_gram, szego_gram,
    verify_admissible, AdmissibilityReport, KernelSample, Provenance,
};
pub use linalg::{
    is_psd, min_max_eigenvalues, schur_product, solve_least_squares, HermitianMatrix, LeastSquares,
    PsdCheck, SpectralReport,
};
pub use separation::{
    carleson_products, pseudohyperbolic, strong_separation_certificate, weak_separation_constant,
    SeparationKind, SeparationReport,
};
pub use test_functions::{
    membership_check, symmetrize, Descriptor, DomainTag, Membership, Point, PointConfig,
    TestFunctionFamily,
};
pub use theorem::{verify_theorem, Route, TheoremParams, TheoremReport, TheoremRow};
