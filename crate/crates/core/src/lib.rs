//! Integer factorization by projective measurements on engineered spectra,
//! together with both physical realizations of the required observables:
//! diagonal multi-spin operators with prime spectra and one-dimensional
//! Schroedinger potentials constructed by an inverse-spectral ladder.
//!
//! - [`numtheory`]: prime tables, the classical factorization oracle, and
//!   spectrum builders.
//! - [`measure`]: the measurement protocol itself -- degenerate manifolds,
//!   Born-rule sampling, both protocol variants, the one-measurement
//!   primality test, window preparation, and exhaustive path enumeration.
//! - [`digital`]: subset zeta/Moebius synthesis of diagonal multi-spin
//!   couplings with prescribed eigenvalues.
//! - [`susy`]: superpotential-ladder construction of potentials with
//!   prescribed spectra, a finite-difference eigensolver to verify them,
//!   and the first-order matrix form of the ladder equations.

pub mod digital;
pub mod error;
pub mod measure;
pub mod numtheory;
pub mod susy;

pub use error::{Error, Result};
pub use measure::{factorize, primality_test, BranchState, FactorizationRun, Variant};
pub use numtheory::{factor_oracle, Factorization, PrimeTable, SpectrumSpec};
