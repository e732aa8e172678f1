//! Numerical laboratory for Gabor frames, Gabor matrices of Fourier integral
//! and pseudodifferential operators, and compactness tests for lattice
//! matrices. Every type is generic over `f32`/`f64`; the aliases below fix
//! `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fio;
pub mod gabor;
pub mod lattice;
pub mod psdo;
pub mod scalar;
pub mod seqops;
pub mod tf;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Signal = tf::SampledSignal<f64>;
pub type Lattice = lattice::Lattice<f64>;
pub type TruncatedLattice = lattice::TruncatedLattice<f64>;
pub type LatticeMap = lattice::LatticeMap<f64>;
pub type WeightSpec = lattice::WeightSpec<f64>;
pub type GaborSystem = gabor::GaborSystem<f64>;
pub type LatticeMatrix = seqops::LatticeMatrix<f64>;
pub type Diagonals = seqops::Diagonals<f64>;
pub type Symbol = fio::Symbol<f64>;
pub type Phase = fio::Phase<f64>;
pub type QuadraticPhase = fio::QuadraticPhase<f64>;
pub type CanonicalMap = fio::CanonicalMap<f64>;
pub type FioOperator = fio::FioOperator<f64>;
pub type PsdoSymbol = psdo::PsdoSymbol<f64>;
pub type PsdoOperator = psdo::PsdoOperator<f64>;

/// Library version embedded in experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
