//! Higher-order Fourier analysis toolkit for cyclic groups.
//!
//! Computational building blocks for the study of Gowers uniformity norms
//! and their inverse theory at desk scale: discrete derivative calculus on
//! cubes, uniformity norms by several independent routes, the exact U^2
//! inverse algorithm, bracket polynomials with their carry-bit coefficient
//! structure, nilsequences on abelian towers and the Heisenberg nilmanifold,
//! approximate-polynomial measurement, and the cube-cocycle verification
//! machinery (cocycles with loss, the Z_r normal-form transform, generalized
//! cocycles, derivatives conditions, and polynomial hierarchies).
//!
//! Everything is sized for exhaustive cross-checking: each production path
//! is paired with a brute-force oracle, and exact rational arithmetic is
//! used wherever a claim is an exact identity rather than an approximation.

pub mod bracket;
pub mod budget;
pub mod cocycle;
pub mod cubesys;
pub mod domain;
pub mod error;
pub mod fourier;
pub mod gowers;
pub mod hierarchy;
pub mod inverse;
pub mod io;
pub mod nil;
pub mod pipeline;
pub mod signals;
pub mod tolerances;

pub use budget::Budget;
pub use domain::{Cube, CubeValue, CyclicDomain, GroupFn, ValueMode, VecFn};
pub use error::{Error, Result};
pub use fourier::{dft, dft_direct, idft, Spectrum};
pub use gowers::{
    gowers_fast, gowers_naive, gowers_recursive, gowers_via_ssf, ssf, u2_via_fourier, NormMethod,
    NormReport,
};
pub use inverse::{
    character_field, correlate, diagonal_project, poly_phase_search, u2_inverse, CharacterField,
    CorrelationResult, PhasePoly,
};
