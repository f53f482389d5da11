//! Random subcomplexes `V_ε` of barycentric subdivisions.
//!
//! A cochain `ε` of degree `k - 1` on a finite simplicial complex `K` picks
//! out the subcomplex of `Sd(K)` made of flags whose smallest simplex
//! carries a nonvanishing coboundary. This crate builds those subcomplexes,
//! computes their mod 2 homology, and evaluates the exact expected values of
//! their face counts and Euler characteristics under the product Bernoulli
//! measure, alongside exhaustive and Monte Carlo estimators.

pub mod cochain;
pub mod complex;
pub mod error;
pub mod expectation;
pub mod gallery;
pub mod harness;
pub mod homology;
pub mod measure;
pub mod rational;
pub mod subcomplex;
pub mod subdivision;

pub use cochain::{Cochain, CochainFile, Measure};
pub use complex::{macdonald_symmetry_check, ComplexFile, FacePolynomial, Simplex, SimplicialComplex};
pub use error::{Error, Result};
pub use homology::{betti, BettiVector, ChainComplex};
pub use rational::{parse_q, Poly, Q};
pub use subcomplex::{build_v, VSubcomplex};
pub use subdivision::{barycentric_subdivide, FlagComplex, LambdaTable, QCoefficients};

/// Version string embedded in every report.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default limit on the total number of simplices a subdivision may produce.
pub const DEFAULT_MAX_SIMPLICES: u128 = 5_000_000;

/// Default limit on the number of bits an exhaustive enumeration may range over.
pub const DEFAULT_MAX_ENUM_BITS: usize = 24;
