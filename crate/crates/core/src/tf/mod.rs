//! Sampled signals on a periodic centered grid, the continuous Fourier
//! transform realized by FFT, time-frequency shifts, the STFT and the
//! cross-Wigner distribution.

mod fourier;
mod signal;
mod stft;
mod wigner;
mod windows;

pub use fourier::{fourier, CenteredFft};
pub use signal::SampledSignal;
pub use stft::{
    decay_at_infinity_profile, modulation_norm_estimate, stft, stft_checked, stft_grid_map,
    tf_shift, DecayProfile, ModulationNorm, TfPoint,
};
pub use wigner::cross_wigner;
pub(crate) use wigner::half_shift;
pub use windows::{gaussian, random_gaussian_mixture};
