use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::{CanonicalMap, LinearOperator, QuadraticPhase, Symbol};
use crate::error::{Error, Result};
use crate::gabor::GaborSystem;
use crate::lattice::TruncatedLattice;
use crate::scalar::{cis, Real};
use crate::seqops::LatticeMatrix;
use crate::tf::{gaussian, SampledSignal};

/// `M(T)_{μ,λ} = ⟨T π(λ)g, π(μ)g⟩`, assembled in parallel over columns `λ`.
pub fn gabor_matrix<T: Real>(
    op: &dyn LinearOperator<T>,
    sys: &GaborSystem<T>,
) -> Result<LatticeMatrix<T>> {
    let lat = sys.lattice().clone();
    let n = lat.len();
    let cols: Vec<Vec<Complex<T>>> = (0..n)
        .into_par_iter()
        .map(|lam| {
            let image = op.apply(sys.atom(lam))?;
            (0..n)
                .map(|mu| image.inner(sys.atom(mu)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    LatticeMatrix::from_columns(lat, &cols)
}

/// `‖T f − D_h M(T) C_h f‖₂ / ‖f‖₂`, with the synthesis weights of `sys`
/// applied on both sides of `M(T)`.
pub fn factorization_residual<T: Real>(
    op: &dyn LinearOperator<T>,
    sys: &GaborSystem<T>,
    dual: &GaborSystem<T>,
    matrix: &LatticeMatrix<T>,
    f: &SampledSignal<T>,
) -> Result<T> {
    let c = dual.analysis(f)?;
    let wc: Vec<Complex<T>> = c.iter().zip(sys.weights()).map(|(z, &w)| *z * w).collect();
    let y = matrix.mul_vec(&wc)?;
    let approx = dual.synthesis(&y)?;
    let exact = op.apply(f)?;
    Ok(exact.sub(&approx)?.norm() / f.norm())
}

/// Unit-norm Gaussian `g(t) = 2^{1/4} w^{−1/2} e^{−πt²/w²}` with its
/// closed-form transform `ĝ(ω) = 2^{1/4} w^{1/2} e^{−πw²ω²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianWindow<T> {
    pub width: T,
}

impl<T: Real> GaussianWindow<T> {
    pub fn new(width: T) -> Self {
        Self { width }
    }

    pub fn eval(&self, t: T) -> T {
        T::lit(2f64.powf(0.25)) / self.width.sqrt()
            * (-T::PI() * t * t / (self.width * self.width)).exp()
    }

    pub fn hat(&self, w: T) -> T {
        T::lit(2f64.powf(0.25))
            * self.width.sqrt()
            * (-T::PI() * self.width * self.width * w * w).exp()
    }

    pub fn sample(&self, l: T, n: usize) -> Result<SampledSignal<T>> {
        gaussian(1, l, n, self.width)
    }
}

/// Quadrature controls for the window-STFT route.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StftQuadrature<T> {
    /// Grid step in both variables.
    pub h: T,
    /// Half-width of the square integration box around the base point, in
    /// window widths.
    pub radius: T,
}

impl<T: Real> Default for StftQuadrature<T> {
    fn default() -> Self {
        Self {
            h: T::lit(1.0 / 16.0),
            radius: T::lit(4.5),
        }
    }
}

/// Complex value of `M_{μ,λ}` through the short-time Fourier transform of
/// `σ`: with `z₀ = (μ₁, λ₂)` and `ζ = (μ₂ − ∇_xΦ(z₀), λ₁ − ∇_ηΦ(z₀))`,
///
/// `M_{μ,λ} = e^{2πi(Φ(z₀) − μ₁μ₂)} ∫ σ(z₀ + u) Ψ(u) e^{−2πiζ·u} du`,
/// `Ψ(u) = e^{2πiΦ₂(u)} g(u₁) ĝ(u₂)`,
///
/// which is exact for quadratic `Φ`. The modulus is `|V_{Ψ̄}σ(z₀, ζ)|`.
pub fn gabor_matrix_quadratic_stft_complex<T: Real>(
    sigma: &Symbol<T>,
    phase: &QuadraticPhase<T>,
    window: &GaussianWindow<T>,
    lattice: &TruncatedLattice<T>,
    quad: &StftQuadrature<T>,
) -> Result<LatticeMatrix<T>> {
    phase.validate()?;
    if lattice.d() != 1 {
        return Err(Error::Unsupported(
            "the STFT route is implemented for d = 1".into(),
        ));
    }
    if !(quad.h > T::zero()) || !(quad.radius > T::zero()) {
        return Err(Error::Parameter(
            "quadrature step and radius must be positive".into(),
        ));
    }
    if sigma.is_zero() {
        return Ok(LatticeMatrix::zeros(lattice.clone()));
    }
    let (tb, fb) = lattice.bounds();
    let alpha = lattice.base().step(0);
    let beta = lattice.base().step(1);
    let times: Vec<T> = (-tb..=tb).map(|k| T::from_i64_lossy(k) * alpha).collect();
    let freqs: Vec<T> = (-fb..=fb).map(|k| T::from_i64_lossy(k) * beta).collect();
    let kmax = (quad.radius * window.width / quad.h)
        .ceil()
        .to_i64()
        .unwrap_or(0);
    let us: Vec<T> = (-kmax..=kmax)
        .map(|k| T::from_i64_lossy(k) * quad.h)
        .collect();
    let m = us.len();
    let gu: Vec<T> = us.iter().map(|&u| window.eval(u)).collect();
    let ghat: Vec<T> = us.iter().map(|&u| window.hat(u)).collect();
    let two_pi = T::two_pi();
    let psi: Vec<Complex<T>> = (0..m * m)
        .map(|k| {
            let (i, j) = (k / m, k % m);
            cis(two_pi * phase.remainder(us[i], us[j])) * (gu[i] * ghat[j])
        })
        .collect();
    let h2 = quad.h * quad.h;
    // blocks[(it, jf)][(μ₂ index, λ₁ index)] for base point (μ₁, λ₂) = (times[it], freqs[jf])
    let blocks: Vec<Vec<Complex<T>>> = (0..times.len() * freqs.len())
        .into_par_iter()
        .map(|b| {
            let (it, jf) = (b / freqs.len(), b % freqs.len());
            let (mu1, lam2) = (times[it], freqs[jf]);
            let gx = phase.grad_x(mu1, lam2);
            let ge = phase.grad_eta(mu1, lam2);
            let base = phase.value(mu1, lam2);
            let f: Vec<Complex<T>> = (0..m * m)
                .map(|k| {
                    let (i, j) = (k / m, k % m);
                    sigma.eval(mu1 + us[i], lam2 + us[j]) * psi[k]
                })
                .collect();
            // ζ₂ = λ₁ − ∇_ηΦ for λ₁ over times; ζ₁ = μ₂ − ∇_xΦ for μ₂ over freqs
            let z2: Vec<T> = times.iter().map(|&l1| l1 - ge).collect();
            let z1: Vec<T> = freqs.iter().map(|&m2| m2 - gx).collect();
            let mut stage = vec![Complex::new(T::zero(), T::zero()); m * z2.len()];
            for (q, &zeta2) in z2.iter().enumerate() {
                let tw: Vec<Complex<T>> = us.iter().map(|&u| cis(-two_pi * zeta2 * u)).collect();
                for i in 0..m {
                    let row = &f[i * m..(i + 1) * m];
                    stage[q * m + i] = row
                        .iter()
                        .zip(&tw)
                        .fold(Complex::new(T::zero(), T::zero()), |a, (x, t)| a + x * t);
                }
            }
            let mut out = vec![Complex::new(T::zero(), T::zero()); z1.len() * z2.len()];
            for (p, &zeta1) in z1.iter().enumerate() {
                let tw: Vec<Complex<T>> = us.iter().map(|&u| cis(-two_pi * zeta1 * u)).collect();
                for q in 0..z2.len() {
                    let col = &stage[q * m..(q + 1) * m];
                    let s = col
                        .iter()
                        .zip(&tw)
                        .fold(Complex::new(T::zero(), T::zero()), |a, (x, t)| a + x * t);
                    let mu2 = freqs[p];
                    let ph = base - mu1 * mu2;
                    out[p * z2.len() + q] = s * h2 * cis(two_pi * ph);
                }
            }
            out
        })
        .collect();
    let nf = freqs.len();
    let nt = times.len();
    Ok(LatticeMatrix::from_fn(lattice.clone(), |mu, lam| {
        let (mu_t, mu_f) = (mu / nf, mu % nf);
        let (lam_t, lam_f) = (lam / nf, lam % nf);
        debug_assert!(mu_t < nt && lam_t < nt);
        blocks[mu_t * nf + lam_f][mu_f * nt + lam_t]
    }))
}

/// Modulus matrix `|V_{Ψ̄}σ(z_{λ,μ})|` of the STFT route.
pub fn gabor_matrix_quadratic_stft<T: Real>(
    sigma: &Symbol<T>,
    phase: &QuadraticPhase<T>,
    window: &GaussianWindow<T>,
    lattice: &TruncatedLattice<T>,
    quad: &StftQuadrature<T>,
) -> Result<LatticeMatrix<T>> {
    Ok(
        gabor_matrix_quadratic_stft_complex(sigma, phase, window, lattice, quad)?
            .map(|z| Complex::new(z.norm(), T::zero())),
    )
}

/// Entrywise comparison of two matrices on entries of `reference` with
/// modulus at least `threshold`.
#[derive(Clone, Debug, Serialize)]
pub struct TwoPathReport<T> {
    pub compared: usize,
    pub max_rel_dev: T,
    pub max_abs_dev: T,
    pub threshold: T,
}

pub fn compare_moduli<T: Real>(
    reference: &LatticeMatrix<T>,
    other: &LatticeMatrix<T>,
    threshold: T,
) -> Result<TwoPathReport<T>> {
    if reference.lattice() != other.lattice() {
        return Err(Error::Shape("matrices live on different lattices".into()));
    }
    let mut rep = TwoPathReport {
        compared: 0,
        max_rel_dev: T::zero(),
        max_abs_dev: T::zero(),
        threshold,
    };
    for (a, b) in reference.entries().iter().zip(other.entries()) {
        let (x, y) = (a.norm(), b.norm());
        rep.max_abs_dev = rep.max_abs_dev.max((x - y).abs());
        if x >= threshold {
            rep.compared += 1;
            rep.max_rel_dev = rep.max_rel_dev.max((x - y).abs() / x);
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayBucket<T> {
    /// Bucket range in `⟨χ(λ) − μ⟩`.
    pub lo: T,
    pub hi: T,
    pub count: usize,
    /// `sup |M_{μ,λ}|` in the bucket.
    pub envelope: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit<T> {
    /// Least-squares `log C` intercept, exponentiated.
    pub c_fit: T,
    pub s_fit: T,
    /// RMS residual of the log-fit.
    pub residual: T,
    pub usable: usize,
    /// Smallest `C` with `|M_{μ,λ}| ≤ C⟨χ(λ) − μ⟩^{−s_fit}` on all usable entries.
    pub c_envelope: T,
    pub buckets: Vec<DecayBucket<T>>,
    pub monotone: bool,
}

/// `⟨χ(λ) − μ⟩` for every `(μ, λ)`, row-major like the matrix.
pub fn chi_distances<T: Real>(
    lattice: &TruncatedLattice<T>,
    chi: &CanonicalMap<T>,
) -> Result<Vec<T>> {
    let n = lattice.len();
    let pts: Vec<Vec<T>> = lattice.points().collect();
    let imgs: Vec<(T, T)> = pts
        .iter()
        .map(|p| chi.apply(p[0], p[1]))
        .collect::<Result<_>>()?;
    Ok((0..n * n)
        .map(|k| {
            let (mu, lam) = (k / n, k % n);
            let (x, xi) = imgs[lam];
            (T::one() + (x - pts[mu][0]).powi(2) + (xi - pts[mu][1]).powi(2)).sqrt()
        })
        .collect())
}

/// Smallest `C` with `|M| ≤ C⟨χ(λ) − μ⟩^{−s}` over entries above `floor`.
pub fn envelope_constant<T: Real>(
    m: &LatticeMatrix<T>,
    chi: &CanonicalMap<T>,
    s: T,
    floor: T,
) -> Result<T> {
    let dist = chi_distances(m.lattice(), chi)?;
    Ok(m.entries()
        .iter()
        .zip(&dist)
        .filter(|(z, _)| z.norm() > floor)
        .map(|(z, d)| z.norm() * d.powf(s))
        .fold(T::zero(), T::max))
}

/// Fits `log|M_{μ,λ}| ≈ log C − s log⟨χ(λ) − μ⟩` over entries above `floor`
/// and tabulates the envelope in unit-width distance buckets.
pub fn decay_fit<T: Real>(
    m: &LatticeMatrix<T>,
    chi: &CanonicalMap<T>,
    floor: T,
) -> Result<DecayFit<T>> {
    let dist = chi_distances(m.lattice(), chi)?;
    let pts: Vec<(T, T)> = m
        .entries()
        .iter()
        .zip(&dist)
        .filter(|(z, _)| z.norm() > floor)
        .map(|(z, &d)| (d, z.norm()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData { usable: pts.len() });
    }
    let xs: Vec<f64> = pts.iter().map(|(d, _)| -d.to_f64_lossy().ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, a)| a.to_f64_lossy().ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { usable: pts.len() });
    }
    let s = sxy / sxx;
    let log_c = my - s * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - log_c - s * x).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let s_fit = T::lit(s);
    let c_envelope = pts
        .iter()
        .map(|&(d, a)| a * d.powf(s_fit))
        .fold(T::zero(), T::max);
    let dmax = pts.iter().map(|p| p.0).fold(T::one(), T::max);
    let nb = (dmax - T::one()).floor().to_usize().unwrap_or(0) + 1;
    let mut buckets: Vec<DecayBucket<T>> = (0..nb)
        .map(|b| DecayBucket {
            lo: T::one() + T::from_usize_lossy(b),
            hi: T::lit(2.0) + T::from_usize_lossy(b),
            count: 0,
            envelope: T::zero(),
        })
        .collect();
    for &(d, a) in &pts {
        let b = ((d - T::one()).floor().to_usize().unwrap_or(0)).min(nb - 1);
        buckets[b].count += 1;
        buckets[b].envelope = buckets[b].envelope.max(a);
    }
    buckets.retain(|b| b.count > 0);
    let monotone = buckets.windows(2).all(|w| w[1].envelope <= w[0].envelope);
    Ok(DecayFit {
        c_fit: T::lit(log_c.exp()),
        s_fit,
        residual: T::lit(residual),
        usable: pts.len(),
        c_envelope,
        buckets,
        monotone,
    })
}
