//! Quantum f-divergences and channel reversibility on finite-dimensional
//! matrix algebras.
//!
//! The crate computes distinguishability measures between positive
//! semidefinite operators (f-divergences, Rényi and relative entropies,
//! Chernoff/Hoeffding distances, Bayesian error exponents), builds Petz
//! recovery maps for quantum channels, and decides numerically whether a
//! channel is reversible on a pair or a set of states by evaluating the
//! equality conditions attached to the monotonicity of f-divergences.
//!
//! Everything is spectral: operators are decomposed into eigenvalue
//! clusters with orthogonal projections, powers and logarithms are taken
//! on the support only (`X^0` is the support projection, `X^{-1}` the
//! generalized inverse, `log*` vanishes on the kernel), and divergences
//! are assembled from the finitely many eigenvalue ratios that occur.
//! Extended-real conventions `0 * (±inf) = 0` and `log 0 = -inf` are
//! modeled by [`ExtReal`].
//!
//! Core math is generic over the real scalar through the [`Real`] trait;
//! concrete `f64` aliases live at the crate root ([`Mat64`], [`Psd64`],
//! [`Channel64`], ...).
//!
//! ```
//! use qfdiv::fdiv::{relative_entropy, f_divergence, DivergenceFunction};
//! use qfdiv::discrimination::chernoff_distance;
//! use qfdiv::Psd64;
//!
//! let rho = Psd64::from_diagonal(&[0.75, 0.25])?;
//! let sigma = Psd64::from_diagonal(&[0.5, 0.5])?;
//!
//! let s = relative_entropy(&rho, &sigma)?.unwrap_finite();
//! let expected = 0.75 * (1.5_f64).ln() + 0.25 * (0.5_f64).ln();
//! assert!((s - expected).abs() < 1e-12);
//!
//! // The same value through the generic evaluator.
//! let via_f = f_divergence(&rho, &sigma, &DivergenceFunction::x_log_x())?;
//! assert!((via_f.unwrap_finite() - s).abs() < 1e-12);
//!
//! // Distinguishability of the pair in the symmetric error exponent.
//! let c = chernoff_distance(&rho, &sigma)?;
//! assert!(c.value.unwrap_finite() > 0.0);
//! # Ok::<(), qfdiv::Error>(())
//! ```

pub mod channels;
pub mod discrimination;
pub mod fdiv;
pub mod matcore;
pub mod opconvex;
pub mod optim;
pub mod quad;
pub mod reversibility;
pub mod sampling;
pub mod scalar;

use thiserror::Error;

pub use channels::{Channel, PropertyReport, TomiyamaKind};
pub use fdiv::{ClassicalPair, DivergenceFunction, FunctionSpec};
pub use matcore::{CMatrix, PsdOperator, SpectralDecomposition, Tolerances};
pub use opconvex::{CanonicalFunction, Measure, RepresentingMeasure};
pub use reversibility::{EqualityReport, Verdict};
pub use scalar::{ExtReal, Real};

/// Errors for divergence and channel computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("not Hermitian (residual {0} > tolerance {1})")]
    NotHermitian(f64, f64),

    #[error("not positive semidefinite (min eigenvalue {0}, scale {1})")]
    NotPsd(f64, f64),

    #[error("non-finite entry in matrix input")]
    NonFinite,

    #[error("dimension cap exceeded: {0} > {1}")]
    DimensionCap(usize, usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("indeterminate extended-real form (+inf) + (-inf)")]
    IndeterminateForm,

    #[error("divergence function evaluation produced NaN at x = {0}")]
    Evaluation(f64),

    #[error("quadrature failed to converge (estimate {estimate}, error {error})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("channel has no representation for this operation: {0}")]
    Representation(String),

    #[error("support hypothesis violated: {0}")]
    SupportViolation(String),

    #[error("trace preservation violated: {0}")]
    TraceViolation(String),

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// `f64` complex matrix.
pub type Mat64 = matcore::CMatrix<f64>;
/// `f64` positive semidefinite operator.
pub type Psd64 = matcore::PsdOperator<f64>;
/// `f64` spectral decomposition.
pub type Spectral64 = matcore::SpectralDecomposition<f64>;
/// `f64` quantum channel.
pub type Channel64 = channels::Channel<f64>;
/// `f64` divergence function descriptor.
pub type DivergenceFunction64 = fdiv::DivergenceFunction<f64>;
/// `f64` extended real.
pub type ExtReal64 = scalar::ExtReal<f64>;
/// `f64` representing measure.
pub type RepresentingMeasure64 = opconvex::RepresentingMeasure<f64>;
