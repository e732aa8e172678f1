//! Matrices indexed by `Λ_R × Λ_R`: ψ-relative diagonals, the class norm,
//! boundedness certificates and the finite-scale compactness diagnostic with
//! its singular-value oracle.

mod class;
mod compact;
mod matrix;
mod shifted;

pub use class::{apply_matrix, class_norm, weight_table, ClassReport, GammaWeight};
pub use compact::{
    compactness_diagnostic, section_singular_values, shell_probe, CompactnessOptions,
    CompactnessVerdict, DiagnosticReport, GammaTail, OracleHead, OracleReport, SectionSvals,
    ShellProbe, Verdict,
};
pub use matrix::LatticeMatrix;
pub use shifted::{apply_shifted_diag, diagonal_decompose, Diagonals, ShiftedMode};
