//! Canonical systems in Arov gauge.
//!
//! A canonical system is a j-monotonic family of 2×2 transfer matrices
//! `A(z, ℓ)` solving `A' = A (izA(ℓ) − B(ℓ)) j dμ`. This crate propagates
//! such families for piecewise-constant coefficients, moves them between
//! gauges, resolves the Weyl disks and the Schur functions `s±`, integrates
//! the Riccati flow of stripped Schur functions and evaluates the spectral
//! diagnostics built on them.
//!
//! Matrices act on row vectors from the right throughout.

pub mod coefficients;
pub mod error;
mod extrapolate;
pub mod mat2;
pub mod propagate;
pub mod riccati;
pub mod spectral;
pub mod weyl;

pub use coefficients::{
    ab_from_a, validate_general, ABPair, ArovParameters, CanonicalSystem, CheckedGeneral, FullLine, Gauge,
    GeneralCoefficients, Grid, GridMap, TailPolicy,
};
pub use error::{CoefficientError, Error, Result};
pub use mat2::{j_defect, mobius_right, su11_normalizer, JClass, JDefect, Mat2, ProjPoint, ScaledMat2};
pub use num_complex::Complex64;
pub use propagate::{
    propagate_constant, recover_parameters, to_arov_gauge, to_pdb_gauge, transfer, transfer_general,
    TransferFamily,
};
pub use riccati::{a_to_c, boundary_limit, c_to_a, integrate_riccati, riccati_fixed_point, riccati_rhs};
pub use spectral::{bp_defect, exponential_type, reflectionless_defect, Arc};
pub use weyl::{classify_limit, schur_minus, schur_plus, weyl_disk, Disk, LimitType, SchurOptions, SchurValue};
