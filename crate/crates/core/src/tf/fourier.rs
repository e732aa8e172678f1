use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::SampledSignal;
use crate::error::Result;
use crate::scalar::{cis, Real};

/// Length-`N` centered DFT `X_k = Σ_j x_j e^{∓2πi(k−N/2)(j−N/2)/N}` (unscaled).
#[derive(Clone)]
pub struct CenteredFft<T: Real> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    pre: Vec<Complex<T>>,
    post: Vec<Complex<T>>,
}

impl<T: Real> CenteredFft<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let c = n / 2;
        // integer reduction keeps the phases exact for large N
        let phase =
            |num: usize| cis(T::two_pi() * T::from_usize_lossy(num % n) / T::from_usize_lossy(n));
        let c2 = (c * c) % n;
        let pre = (0..n).map(|j| phase(c * j)).collect();
        let post = (0..n).map(|k| phase((c * k) % n + n - c2)).collect();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            pre,
            post,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Sign `−` in the exponent.
    pub fn forward(&self, buf: &mut [Complex<T>]) {
        buf.iter_mut().zip(&self.pre).for_each(|(z, p)| *z *= p);
        self.fwd.process(buf);
        buf.iter_mut().zip(&self.post).for_each(|(z, p)| *z *= p);
    }

    /// Sign `+` in the exponent.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        buf.iter_mut()
            .zip(&self.pre)
            .for_each(|(z, p)| *z *= p.conj());
        self.inv.process(buf);
        buf.iter_mut()
            .zip(&self.post)
            .for_each(|(z, p)| *z *= p.conj());
    }

    /// Applies the transform along `axis` of a row-major `N^d` array.
    pub fn along_axis(&self, data: &mut [Complex<T>], d: usize, axis: usize, inverse: bool) {
        let n = self.n;
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, z) in line.iter_mut().enumerate() {
                    *z = data[base + k * stride];
                }
                if inverse {
                    self.inverse(&mut line);
                } else {
                    self.forward(&mut line);
                }
                for (k, z) in line.iter().enumerate() {
                    data[base + k * stride] = *z;
                }
            }
        }
    }
}

/// Riemann-sum approximation of `f̂(ω) = ∫ f(t) e^{−2πiω·t} dt` on the dual
/// grid (side `N/L`, spacing `1/L`); `inverse` uses `e^{+2πiω·t}`. Both
/// directions are unitary for the `dx^d`-weighted `L²` norms.
pub fn fourier<T: Real>(f: &SampledSignal<T>, inverse: bool) -> Result<SampledSignal<T>> {
    let n = f.n();
    let plan = CenteredFft::new(n);
    let mut data = f.data().to_vec();
    for axis in 0..f.d() {
        plan.along_axis(&mut data, f.d(), axis, inverse);
    }
    let scale = f.cell();
    data.iter_mut().for_each(|z| *z *= scale);
    let dual_side = T::from_usize_lossy(n) / f.side();
    SampledSignal::new(f.d(), dual_side, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn direct(f: &SampledSignal<f64>) -> Vec<Complex<f64>> {
        let n = f.n();
        let dual = 1.0 / f.side();
        (0..n)
            .map(|k| {
                let w = (k as f64 - (n / 2) as f64) * dual;
                f.data()
                    .iter()
                    .enumerate()
                    .map(|(j, z)| z * cis(-2.0 * PI * w * f.coord(j)))
                    .sum::<Complex<f64>>()
                    * f.dx()
            })
            .collect()
    }

    #[test]
    fn matches_direct_quadrature_for_odd_half_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [6, 10, 16, 30] {
            let data = (0..n)
                .map(|_| Complex::new(rng.random(), rng.random()))
                .collect();
            let f = SampledSignal::new(1, 3.0f64, n, data).unwrap();
            let fast = fourier(&f, false).unwrap();
            for (a, b) in fast.data().iter().zip(direct(&f)) {
                assert!((a - b).norm() < 1e-12);
            }
            assert!((fast.dx() - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_is_a_fixed_point() {
        let g = SampledSignal::from_fn(1, 16.0, 256, |t| {
            Complex::new(2f64.powf(0.25) * (-PI * t[0] * t[0]).exp(), 0.0)
        })
        .unwrap();
        let gh = fourier(&g, false).unwrap();
        for (j, z) in gh.data().iter().enumerate() {
            let w = gh.coord(j);
            let exact = 2f64.powf(0.25) * (-PI * w * w).exp();
            assert!((z - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn spike_has_flat_modulus() {
        let mut s = SampledSignal::<f64>::zeros(1, 4.0, 32).unwrap();
        s.data_mut()[5] = Complex::new(1.0, 0.0);
        let sh = fourier(&s, false).unwrap();
        for z in sh.data() {
            assert!((z.norm() - s.dx()).abs() < 1e-14);
        }
    }

    #[test]
    fn roundtrip_and_unitarity_in_two_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = (0..256)
            .map(|_| Complex::new(rng.random(), rng.random()))
            .collect();
        let f = SampledSignal::new(2, 4.0f64, 16, data).unwrap();
        let fh = fourier(&f, false).unwrap();
        assert!((fh.norm() - f.norm()).abs() < 1e-12 * f.norm());
        let back = fourier(&fh, true).unwrap();
        assert!(back.same_grid(&f));
        let err = back.sub(&f).unwrap().norm() / f.norm();
        assert!(err < 1e-12);
    }
}
