use num_complex::Complex;
use rayon::prelude::*;

use super::{fourier, CenteredFft, SampledSignal};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// `f(t + dx/2)` by a phase ramp on the Fourier side.
pub(crate) fn half_shift<T: Real>(f: &SampledSignal<T>) -> Result<SampledSignal<T>> {
    let mut fh = fourier(f, false)?;
    let h = f.dx() / T::lit(2.0);
    let dual = fh.clone();
    for (j, z) in fh.data_mut().iter_mut().enumerate() {
        *z *= cis(T::two_pi() * dual.coord(j) * h);
    }
    let back = fourier(&fh, true)?;
    f.with_data(back.into_data())
}

/// `W(f, g)(x, ω) = ∫ f(x + t/2) conj(g(x − t/2)) e^{−2πiωt} dt` on the square
/// phase-space grid of side `L` with `N` points per axis. Needs `L² = N` so
/// that position and frequency spacings coincide; `d = 1` only.
pub fn cross_wigner<T: Real>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
) -> Result<SampledSignal<T>> {
    f.check_grid(g)?;
    if f.d() != 1 {
        return Err(Error::Unsupported(
            "cross-Wigner distribution is implemented for d = 1".into(),
        ));
    }
    let n = f.n();
    let l = f.side();
    if (l * l - T::from_usize_lossy(n)).abs() > T::lit(1e-9) * T::from_usize_lossy(n) {
        return Err(Error::Parameter(format!(
            "phase-space grid needs L² = N, got L = {l}, N = {n}"
        )));
    }
    let fh = half_shift(f)?;
    let gh = half_shift(g)?;
    let (fd, gd, fhd, ghd) = (f.data(), g.data(), fh.data(), gh.data());
    let plan = CenteredFft::new(n);
    let dx = f.dx();
    let half = (n / 2) as i64;
    let w = |k: i64| k.rem_euclid(n as i64) as usize;
    let rows: Vec<Vec<Complex<T>>> = (0..n as i64)
        .into_par_iter()
        .map(|j| {
            // k indexes t = k·dx over the centered range
            let mut line: Vec<Complex<T>> = (0..n as i64)
                .map(|c| {
                    let k = c - half;
                    let (a, b) = if k.rem_euclid(2) == 0 {
                        (fd[w(j + k / 2)], gd[w(j - k / 2)])
                    } else {
                        let h = k.div_euclid(2);
                        // x + k dx/2 = x_{j+h} + dx/2, x − k dx/2 = x_{j−h−1} + dx/2
                        (fhd[w(j + h)], ghd[w(j - h - 1)])
                    };
                    a * b.conj()
                })
                .collect();
            // t = ±L/2 alias to one FFT bin; averaging them keeps W(f, f) real
            let q = (n / 4) as i64;
            let far = if (n / 2).is_multiple_of(2) {
                fd[w(j + q)] * gd[w(j - q)].conj()
            } else {
                fhd[w(j + q)] * ghd[w(j - q - 1)].conj()
            };
            line[0] = (line[0] + far) * T::lit(0.5);
            plan.forward(&mut line);
            line.iter_mut().for_each(|z| *z *= dx);
            line
        })
        .collect();
    SampledSignal::new(2, l, n, rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::{tf_shift, TfPoint};
    use std::f64::consts::PI;

    fn gauss() -> SampledSignal<f64> {
        SampledSignal::from_fn(1, 8.0, 64, |t| {
            Complex::new(2f64.powf(0.25) * (-PI * t[0] * t[0]).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn gaussian_wigner_closed_form() {
        let g = gauss();
        let w = cross_wigner(&g, &g).unwrap();
        for (idx, z) in w.data().iter().enumerate() {
            let p = w.position(idx);
            let exact = 2.0 * (-2.0 * PI * (p[0] * p[0] + p[1] * p[1])).exp();
            assert!(
                (z - exact).norm() <= 1e-4 * exact.max(1e-6),
                "{p:?}: {z} vs {exact}"
            );
        }
    }

    #[test]
    fn mass_conservation_and_realness() {
        let g = gauss();
        let f = tf_shift(&g, &TfPoint::new(vec![0.75], vec![-0.5]))
            .unwrap()
            .axpy(Complex::new(0.3, 0.4), &g)
            .unwrap();
        let w = cross_wigner(&f, &f).unwrap();
        let mass: Complex<f64> = w.data().iter().sum::<Complex<f64>>() * w.cell();
        assert!((mass.re - f.norm_sq()).abs() < 1e-10);
        let im = w.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(im < 1e-12, "{im}");
    }

    #[test]
    fn grid_requirements() {
        let g = SampledSignal::<f64>::zeros(1, 4.0, 32).unwrap();
        assert!(cross_wigner(&g, &g).is_err());
    }
}
