//! Fourier integral operators on `ℝ`: phases, symbols, application by
//! quadrature, canonical transformations and Gabor matrices.

mod canonical;
mod matrix;
mod operator;
mod phase;
mod symbol;
mod tame;

pub use canonical::{canonical_transform, discretize_chi, CanonicalMap, CanonicalMethod, ChiPrime};
pub use matrix::{
    chi_distances, compare_moduli, decay_fit, envelope_constant, factorization_residual,
    gabor_matrix, gabor_matrix_quadratic_stft, gabor_matrix_quadratic_stft_complex, DecayBucket,
    DecayFit, GaussianWindow, StftQuadrature, TwoPathReport,
};
pub use operator::{apply_fio, FioOperator, LinearOperator};
pub use phase::{Phase, PhaseSpec, QuadraticPhase, ScalarFn};
pub use symbol::{MultiplierFn, Symbol, SymbolFn};
pub use tame::{tameness_check, Region, TamenessReport};
