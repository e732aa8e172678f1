use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::{CenteredFft, SampledSignal};
use crate::error::{Error, Result};
use crate::lattice::{Exponent, WeightSpec};
use crate::scalar::{cis, Real};

/// A phase-space point `(x, ω)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TfPoint<T> {
    pub x: Vec<T>,
    pub omega: Vec<T>,
}

impl<T: Real> TfPoint<T> {
    pub fn new(x: Vec<T>, omega: Vec<T>) -> Self {
        Self { x, omega }
    }

    /// Splits a `2d`-vector into position and frequency halves.
    pub fn from_slice(p: &[T]) -> Self {
        let d = p.len() / 2;
        Self::new(p[..d].to_vec(), p[d..].to_vec())
    }

    /// Nearest sample shifts of `x` and whether `x` lies on the grid.
    pub fn grid_shift(&self, f: &SampledSignal<T>) -> (Vec<i64>, bool) {
        let dx = f.dx();
        let mut exact = true;
        let shifts = self
            .x
            .iter()
            .map(|&x| {
                let q = x / dx;
                let k = q.round();
                if (q - k).abs() > T::lit(1e-9) {
                    exact = false;
                }
                k.to_i64().unwrap_or(0)
            })
            .collect();
        (shifts, exact)
    }
}

#[inline]
fn wrap(j: i64, n: usize) -> usize {
    j.rem_euclid(n as i64) as usize
}

/// Periodic sample translation `(T_s f)_j = f_{j−s}` per axis.
fn shifted_index(idx: &[usize], s: &[i64], n: usize) -> usize {
    idx.iter()
        .zip(s)
        .fold(0, |acc, (&j, &k)| acc * n + wrap(j as i64 - k, n))
}

/// `π(x, ω) f(t) = e^{2πiω·t} f(t − x)` with `x` rounded to the grid.
pub fn tf_shift<T: Real>(f: &SampledSignal<T>, lambda: &TfPoint<T>) -> Result<SampledSignal<T>> {
    if lambda.x.len() != f.d() || lambda.omega.len() != f.d() {
        return Err(Error::Shape(
            "phase-space point dimension differs from signal".into(),
        ));
    }
    let (s, _) = lambda.grid_shift(f);
    let n = f.n();
    let mut out = Vec::with_capacity(f.len());
    let mut pos = vec![T::zero(); f.d()];
    for idx in 0..f.len() {
        let m = f.multi_index(idx);
        f.position_into(idx, &mut pos);
        let phase: T = pos.iter().zip(&lambda.omega).map(|(&t, &w)| t * w).sum();
        out.push(f.data()[shifted_index(&m, &s, n)] * cis(T::two_pi() * phase));
    }
    f.with_data(out)
}

fn stft_one<T: Real>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
    p: &TfPoint<T>,
) -> (Complex<T>, bool) {
    let (s, exact) = p.grid_shift(f);
    let n = f.n();
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut pos = vec![T::zero(); f.d()];
    for idx in 0..f.len() {
        let m = f.multi_index(idx);
        f.position_into(idx, &mut pos);
        let phase: T = pos.iter().zip(&p.omega).map(|(&t, &w)| t * w).sum();
        acc +=
            f.data()[idx] * g.data()[shifted_index(&m, &s, n)].conj() * cis(-T::two_pi() * phase);
    }
    (acc * f.cell(), exact)
}

/// `V_g f(x, ω) = dx^d Σ_t f(t) conj(g(t − x)) e^{−2πiω·t}` at each point, plus
/// the number of points whose position was rounded to the grid.
pub fn stft_checked<T: Real>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
    points: &[TfPoint<T>],
) -> Result<(Vec<Complex<T>>, usize)> {
    f.check_grid(g)?;
    if points
        .iter()
        .any(|p| p.x.len() != f.d() || p.omega.len() != f.d())
    {
        return Err(Error::Shape(
            "phase-space point dimension differs from signal".into(),
        ));
    }
    let res: Vec<(Complex<T>, bool)> = points.par_iter().map(|p| stft_one(f, g, p)).collect();
    let off = res.iter().filter(|r| !r.1).count();
    Ok((res.into_iter().map(|r| r.0).collect(), off))
}

pub fn stft<T: Real>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
    points: &[TfPoint<T>],
) -> Result<Vec<Complex<T>>> {
    stft_checked(f, g, points).map(|r| r.0)
}

/// Full STFT on the grid `x ∈ stride·dx·ℤ^d`, `ω ∈ L^{−1}ℤ^d`: one FFT per
/// shift. `map` receives `x` and the spectrum (row-major over `ω`, centered)
/// and its results are returned in shift order.
pub fn stft_grid_map<T: Real, R: Send>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
    stride: usize,
    map: impl Fn(&[T], &[Complex<T>]) -> R + Sync,
) -> Result<Vec<R>> {
    f.check_grid(g)?;
    if stride == 0 || !f.n().is_multiple_of(stride) {
        return Err(Error::Parameter(format!(
            "stride {stride} must divide N = {}",
            f.n()
        )));
    }
    let n = f.n();
    let d = f.d();
    let per_axis = n / stride;
    let count = per_axis.pow(d as u32);
    let plan = CenteredFft::new(n);
    let cell = f.cell();
    let half = (n / 2) as i64;
    Ok((0..count)
        .into_par_iter()
        .map(|c| {
            let mut rest = c;
            let mut sidx = vec![0usize; d];
            for a in (0..d).rev() {
                sidx[a] = (rest % per_axis) * stride;
                rest /= per_axis;
            }
            let shift: Vec<i64> = sidx.iter().map(|&k| k as i64 - half).collect();
            let x: Vec<T> = sidx.iter().map(|&k| f.coord(k)).collect();
            let mut buf: Vec<Complex<T>> = (0..f.len())
                .map(|idx| {
                    let m = f.multi_index(idx);
                    f.data()[idx] * g.data()[shifted_index(&m, &shift, n)].conj()
                })
                .collect();
            for axis in 0..d {
                plan.along_axis(&mut buf, d, axis, false);
            }
            buf.iter_mut().for_each(|z| *z *= cell);
            map(&x, &buf)
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulationNorm<T> {
    pub value: T,
    /// Fraction of `|V_g f·m|²` mass on the outer shell of the phase-space grid.
    pub tail: T,
    /// Set when `tail` exceeds the accuracy threshold.
    pub accuracy_warning: bool,
}

const TAIL_WARNING: f64 = 1e-6;

/// Mixed-norm quadrature `‖V_g f · m‖_{L^{p,q}}` over the STFT grid of the
/// given stride; inner norm over `x`, outer over `ω`.
pub fn modulation_norm_estimate<T: Real>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
    p: Exponent,
    q: Exponent,
    m: &WeightSpec<T>,
    stride: usize,
) -> Result<ModulationNorm<T>> {
    let d = f.d();
    let x_edge = T::lit(0.375) * f.side();
    let w_edge = T::lit(0.375) * T::from_usize_lossy(f.n()) / f.side();
    let dual = T::one() / f.side();
    let n = f.n();
    let freqs: Vec<Vec<T>> = (0..f.len())
        .map(|idx| {
            f.multi_index(idx)
                .iter()
                .map(|&k| T::from_i64_lossy(k as i64 - (n / 2) as i64) * dual)
                .collect()
        })
        .collect();
    // rows[shift][freq] = |V_g f|·m
    let rows = stft_grid_map(f, g, stride, |x, spec| {
        let mut pt = x.to_vec();
        pt.resize(2 * d, T::zero());
        spec.iter()
            .zip(&freqs)
            .map(|(z, w)| {
                pt[d..].copy_from_slice(w);
                z.norm() * m.eval(&pt)
            })
            .collect::<Vec<T>>()
    })?;
    let dxs = (f.dx() * T::from_usize_lossy(stride)).powi(d as i32);
    let dws = dual.powi(d as i32);
    let inner: Vec<T> = (0..freqs.len())
        .map(|k| p.norm(rows.iter().map(|r| r[k])) * dxs.powf(T::lit(p.recip())))
        .collect();
    let value = q.norm(inner.into_iter()) * dws.powf(T::lit(q.recip()));
    let per_axis = n / stride;
    let mut shell = T::zero();
    let mut total = T::zero();
    for (c, r) in rows.iter().enumerate() {
        let mut rest = c;
        let mut outer_x = false;
        for _ in 0..d {
            let k = (rest % per_axis) * stride;
            rest /= per_axis;
            outer_x |= f.coord(k).abs() >= x_edge;
        }
        for (v, w) in r.iter().zip(&freqs) {
            let e = *v * *v;
            total += e;
            if outer_x || w.iter().any(|x| x.abs() >= w_edge) {
                shell += e;
            }
        }
    }
    let tail = if total > T::zero() {
        shell / total
    } else {
        T::zero()
    };
    Ok(ModulationNorm {
        value,
        tail,
        accuracy_warning: tail > T::lit(TAIL_WARNING),
    })
}

/// Tail profile `t(R) = sup{|V_Ψσ(z, ζ)| : |(z, ζ)| ≥ R}`, a finite-scale
/// proxy for vanishing at infinity.
#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile<T> {
    pub radii: Vec<T>,
    pub tails: Vec<T>,
    /// `t(0)`
    pub peak: T,
    /// `t(R_max)/t(0)`, zero for the zero symbol.
    pub ratio: T,
    pub theta: T,
    pub pass: bool,
}

pub fn decay_at_infinity_profile<T: Real>(
    sigma: &SampledSignal<T>,
    psi: &SampledSignal<T>,
    radii: &[T],
    theta: T,
    stride: usize,
) -> Result<DecayProfile<T>> {
    if radii.is_empty() {
        return Err(Error::Parameter(
            "decay profile needs at least one radius".into(),
        ));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let dual = T::one() / sigma.side();
    let n = sigma.n();
    let fsq: Vec<T> = (0..sigma.len())
        .map(|idx| {
            sigma
                .multi_index(idx)
                .iter()
                .map(|&k| {
                    let w = T::from_i64_lossy(k as i64 - (n / 2) as i64) * dual;
                    w * w
                })
                .sum()
        })
        .collect();
    let partial = stft_grid_map(sigma, psi, stride, |x, spec| {
        let xsq: T = x.iter().map(|&v| v * v).sum();
        let mut out = vec![T::zero(); radii.len() + 1];
        for (z, w2) in spec.iter().zip(&fsq) {
            let r = (xsq + *w2).sqrt();
            let a = z.norm();
            out[0] = out[0].max(a);
            for (slot, &big_r) in out[1..].iter_mut().zip(&radii) {
                if r >= big_r {
                    *slot = slot.max(a);
                }
            }
        }
        out
    })?;
    let mut acc = vec![T::zero(); radii.len() + 1];
    for p in partial {
        acc.iter_mut().zip(p).for_each(|(a, b)| *a = a.max(b));
    }
    let peak = acc[0];
    let tails = acc[1..].to_vec();
    let last = *tails.last().expect("radii nonempty");
    let ratio = if peak > T::zero() {
        last / peak
    } else {
        T::zero()
    };
    Ok(DecayProfile {
        radii,
        tails,
        peak,
        ratio,
        theta,
        pass: ratio <= theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gauss(l: f64, n: usize) -> SampledSignal<f64> {
        SampledSignal::from_fn(1, l, n, |t| {
            Complex::new(2f64.powf(0.25) * (-PI * t[0] * t[0]).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn shift_identity_group_law_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = (0..64)
            .map(|_| Complex::new(rng.random(), rng.random()))
            .collect();
        let f = SampledSignal::new(1, 8.0f64, 64, data).unwrap();
        assert_eq!(
            tf_shift(&f, &TfPoint::new(vec![0.0], vec![0.0])).unwrap(),
            f
        );
        let a = tf_shift(&f, &TfPoint::new(vec![0.5], vec![0.0])).unwrap();
        let ab = tf_shift(&a, &TfPoint::new(vec![1.25], vec![0.0])).unwrap();
        let c = tf_shift(&f, &TfPoint::new(vec![1.75], vec![0.0])).unwrap();
        assert!(ab.sub(&c).unwrap().norm() < 1e-13);
        let m = tf_shift(&f, &TfPoint::new(vec![0.375], vec![1.3])).unwrap();
        assert!((m.norm() - f.norm()).abs() < 1e-12);
        let (_, exact) = TfPoint::new(vec![0.3], vec![0.0]).grid_shift(&f);
        assert!(!exact);
    }

    #[test]
    fn gaussian_ambiguity_function() {
        let g = gauss(16.0, 256);
        let pts: Vec<TfPoint<f64>> = [(0.0, 0.0), (1.0, 0.5), (-0.75, 1.25), (2.0, -1.0)]
            .iter()
            .map(|&(x, w)| TfPoint::new(vec![x], vec![w]))
            .collect();
        let v = stft(&g, &g, &pts).unwrap();
        assert!((v[0] - 1.0).norm() < 1e-12);
        for (p, z) in pts.iter().zip(&v) {
            let exact = (-PI * (p.x[0].powi(2) + p.omega[0].powi(2)) / 2.0).exp();
            assert!((z.norm() - exact).abs() <= 1e-6 * exact.max(1e-12));
        }
    }

    #[test]
    fn covariance_of_the_stft() {
        let g = gauss(16.0, 256);
        let mu = TfPoint::new(vec![1.5], vec![-0.75]);
        let pg = tf_shift(&g, &mu).unwrap();
        let lam = TfPoint::new(vec![0.5], vec![0.25]);
        let diff = TfPoint::new(vec![-1.0], vec![1.0]);
        let a = stft(&pg, &g, &[lam]).unwrap()[0];
        let b = stft(&g, &g, &[diff]).unwrap()[0];
        assert!((a.norm() - b.norm()).abs() < 1e-8);
    }

    #[test]
    fn grid_stft_agrees_with_direct_evaluation() {
        let g = gauss(8.0, 64);
        let f = tf_shift(&g, &TfPoint::new(vec![0.5], vec![0.75])).unwrap();
        let rows = stft_grid_map(&f, &g, 4, |x, s| (x.to_vec(), s.to_vec())).unwrap();
        assert_eq!(rows.len(), 16);
        let (x, spec) = &rows[9];
        for k in [20usize, 32, 40] {
            let w = (k as f64 - 32.0) / 8.0;
            let direct = stft(&f, &g, &[TfPoint::new(x.clone(), vec![w])]).unwrap()[0];
            assert!((direct - spec[k]).norm() < 1e-12);
        }
        assert!(stft_grid_map(&f, &g, 3, |_, _| ()).is_err());
    }

    #[test]
    fn moyal_identity() {
        let g = gauss(8.0, 64);
        let f = tf_shift(&g, &TfPoint::new(vec![-1.0], vec![0.5]))
            .unwrap()
            .axpy(Complex::new(0.0, 2.0), &g)
            .unwrap();
        let two = Exponent::Finite(2.0);
        let est = modulation_norm_estimate(&f, &g, two, two, &WeightSpec::one(), 1).unwrap();
        assert!((est.value - f.norm() * g.norm()).abs() < 1e-4 * f.norm());
        assert!(!est.accuracy_warning);
        let z = SampledSignal::<f64>::zeros(1, 8.0, 64).unwrap();
        assert_eq!(
            modulation_norm_estimate(&z, &g, two, two, &WeightSpec::one(), 2)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn weighted_norm_grows_under_dilation() {
        let two = Exponent::Finite(2.0);
        let g = gauss(16.0, 128);
        let v = WeightSpec::polynomial(2.0);
        let mut last = 0.0f64;
        for w in [0.5, 1.0, 2.0, 3.0] {
            let f = SampledSignal::from_fn(1, 16.0, 128, |t| {
                Complex::new((-PI * t[0] * t[0] / (w * w)).exp() / w.sqrt(), 0.0)
            })
            .unwrap();
            let val = modulation_norm_estimate(&f, &g, two, two, &v, 1)
                .unwrap()
                .value;
            if w > 1.0 {
                assert!(val > last);
            }
            last = val;
        }
    }

    #[test]
    fn decay_profiles() {
        let (l, n) = (8.0, 64);
        let psi = SampledSignal::from_fn(2, l, n, |p| {
            Complex::new(2f64.sqrt() * (-PI * (p[0] * p[0] + p[1] * p[1])).exp(), 0.0)
        })
        .unwrap();
        let radii = [1.0, 2.0, 3.0, 3.75];
        let one = SampledSignal::from_fn(2, l, n, |_| Complex::new(1.0, 0.0)).unwrap();
        let prof = decay_at_infinity_profile(&one, &psi, &radii, 1e-3, 2).unwrap();
        assert!(!prof.pass);
        assert!(prof.tails.windows(2).all(|w| w[1] <= w[0]));
        let bump = SampledSignal::from_fn(2, l, n, |p| {
            let r2 = (p[0] * p[0] + p[1] * p[1]) / 4.0;
            Complex::new(
                if r2 < 1.0 {
                    (-1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                },
                0.0,
            )
        })
        .unwrap();
        let prof = decay_at_infinity_profile(&bump, &psi, &radii, 1e-3, 2).unwrap();
        assert!(prof.pass, "ratio {}", prof.ratio);
        assert!(prof.tails.windows(2).all(|w| w[1] <= w[0]));
        let zero = SampledSignal::<f64>::zeros(2, l, n).unwrap();
        let prof = decay_at_infinity_profile(&zero, &psi, &radii, 1e-3, 2).unwrap();
        assert!(prof.tails.iter().all(|&t| t == 0.0));
        assert!(decay_at_infinity_profile(&zero, &psi, &[], 1e-3, 2).is_err());
    }
}
