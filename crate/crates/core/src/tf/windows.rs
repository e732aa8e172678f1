use num_complex::Complex;
use rand::Rng;

use super::{tf_shift, SampledSignal, TfPoint};
use crate::error::Result;
use crate::scalar::Real;

/// `L²`-normalized Gaussian `2^{d/4} w^{−d/2} e^{−π|t|²/w²}`.
pub fn gaussian<T: Real>(d: usize, l: T, n: usize, width: T) -> Result<SampledSignal<T>> {
    let amp = T::lit(2f64.powf(d as f64 / 4.0)) * width.powf(-T::lit(d as f64 / 2.0));
    SampledSignal::from_fn(d, l, n, |t| {
        let r2: T = t.iter().map(|&x| x * x).sum();
        Complex::new(amp * (-T::PI() * r2 / (width * width)).exp(), T::zero())
    })
}

/// Random combination of `atoms` unit-width Gaussian atoms `π(x, ω)g` with
/// `x`, `ω` on the grid inside `[−spread, spread]^d`; normalized.
pub fn random_gaussian_mixture<T: Real>(
    d: usize,
    l: T,
    n: usize,
    atoms: usize,
    spread: T,
    rng: &mut impl Rng,
) -> Result<SampledSignal<T>> {
    let g = gaussian(d, l, n, T::one())?;
    let dx = g.dx();
    let dual = T::one() / l;
    let mut f = SampledSignal::zeros(d, l, n)?;
    let span = spread.to_f64_lossy();
    let snap = |v: f64, h: T| (T::lit(v) / h).round() * h;
    for _ in 0..atoms {
        let x = (0..d)
            .map(|_| snap(rng.random_range(-span..=span), dx))
            .collect();
        let w = (0..d)
            .map(|_| snap(rng.random_range(-span..=span), dual))
            .collect();
        let c = Complex::new(
            T::lit(rng.random_range(-1.0..1.0)),
            T::lit(rng.random_range(-1.0..1.0)),
        );
        f = f.axpy(c, &tf_shift(&g, &TfPoint::new(x, w))?)?;
    }
    f.normalized()
}
