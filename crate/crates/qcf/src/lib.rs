//! Force-based quasicontinuum (QCF) analysis on a one-dimensional periodic
//! atomic chain with next-nearest-neighbour pair interactions.
//!
//! The crate builds the linearized atomistic, local-continuum (QCL), QNL and
//! force-mixed QCF operators around a uniformly stretched state, and measures
//! the stability properties that distinguish them: coercivity, inverse
//! operator norms in discrete Sobolev-type norms, spectra and eigenvector
//! conditioning, and linearized wave dynamics.
//!
//! Layout of a period: vectors hold `2N` sites `ℓ = -N+1, …, N` stored in
//! natural order, all index arithmetic wraps modulo `2N`, and the atomistic
//! region is `A = {-K, …, K}`. Displacements live in the zero-mean subspace
//! `U`; dual quantities are identified with their zero-mean representatives.
//!
//! Grid sweeps (tables, stability scans, dynamics trials) run through
//! [`exec::map_cells`], which is data-parallel via rayon when the default
//! `parallel` feature is enabled and degrades to a sequential loop otherwise.

pub mod chain;
pub mod csvfmt;
pub mod dynamics;
mod evd;
pub mod exec;
pub mod forces;
mod linalg;
pub mod operators;
pub mod spectral;
pub mod stability;

pub use chain::{ChainConfig, Displacement, DualVector};
pub use dynamics::{StabilityAudit, TrajectoryMethod, TrajectoryResult};
pub use forces::{LennardJones, LinearizedCoefficients, Potential};
pub use operators::{LinearizedOperator, Model};
pub use spectral::{SpectralResult, SweepCell};
pub use stability::{CoercivityResult, Figure1Row, TMatrixResult};

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A deformation produced a non-positive nearest-neighbour gap, leaving
    /// the domain on which the interaction law is defined.
    #[error("deformation out of domain: {0}")]
    Domain(String),

    #[error("unsupported norm selection: {0}")]
    UnsupportedNorm(String),

    #[error("matrix numerically singular: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    Singular { pivot: f64, threshold: f64 },

    #[error("QR iteration did not converge at eigenvalue index {index}")]
    QrNoConvergence { index: usize },

    #[error("diagonalization failed: {0}")]
    Defective(String),

    /// Spectrum fails the requirements for stable oscillatory dynamics
    /// (real and non-negative up to certification tolerances).
    #[error("dynamically unstable spectrum: {0}")]
    UnstableSpectrum(String),

    #[error("result failed certification: {0}")]
    Certification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
