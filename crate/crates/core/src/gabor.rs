//! Gabor systems `{π(λ)g : λ ∈ Λ_R}` on the periodic grid.
//!
//! The frame operator `S = D_g C_g` acts on the `N^d`-dimensional grid space
//! and is applied matrix-free. Lattice steps must be multiples of the grid
//! spacings so every atom is an exact sampled time-frequency shift.
//!
//! A symmetric section can wrap around the torus, in which case several
//! lattice points name the same atom. Synthesis weights each coefficient by
//! `1/multiplicity`, so `S` is the frame operator of the distinct atoms and
//! `D_g` is the adjoint of `C_g` for the weighted pairing `Σ_λ w_λ c_λ conj(d_λ)`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::TruncatedLattice;
use crate::scalar::{dot_conj, Real};
use crate::tf::{tf_shift, SampledSignal, TfPoint};

#[derive(Clone, Debug)]
pub struct GaborSystem<T> {
    window: SampledSignal<T>,
    lattice: TruncatedLattice<T>,
    atoms: Vec<SampledSignal<T>>,
    weights: Vec<T>,
    distinct: usize,
}

/// Frame bound estimates; serializes as `{A, B, ratio, iterations, residual}`.
#[derive(Clone, Debug, Serialize)]
pub struct FrameBounds<T> {
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    /// `B/A`
    pub ratio: T,
    pub iterations: usize,
    /// Last relative change of the Rayleigh quotients.
    pub residual: T,
}

impl<T: Real> FrameBounds<T> {
    pub fn is_tight(&self, tol: T) -> bool {
        self.ratio - T::one() <= tol
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FrameBoundsOptions {
    pub trials: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for FrameBoundsOptions {
    fn default() -> Self {
        Self {
            trials: 2,
            max_iter: 4000,
            tol: 1e-12,
            seed: 0x5eed,
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport<T> {
    pub iterations: usize,
    pub residual: T,
}

fn on_multiple<T: Real>(value: T, unit: T) -> bool {
    let q = value / unit;
    (q - q.round()).abs() <= T::lit(1e-9) * T::one().max(q.abs())
}

impl<T: Real> GaborSystem<T> {
    pub fn new(window: SampledSignal<T>, lattice: TruncatedLattice<T>) -> Result<Self> {
        if window.d() != lattice.d() {
            return Err(Error::Shape(format!(
                "window dimension {} differs from lattice dimension {}",
                window.d(),
                lattice.d()
            )));
        }
        if !(window.norm() > T::zero()) {
            return Err(Error::Parameter("window must be nonzero".into()));
        }
        let base = lattice.base();
        let dual = T::one() / window.side();
        if !on_multiple(base.alpha, window.dx()) || !on_multiple(base.beta, dual) {
            return Err(Error::Parameter(format!(
                "lattice steps ({}, {}) must be multiples of dx = {} and 1/L = {}",
                base.alpha,
                base.beta,
                window.dx(),
                dual
            )));
        }
        let atoms = (0..lattice.len())
            .into_par_iter()
            .map(|i| tf_shift(&window, &TfPoint::from_slice(&lattice.point(i))))
            .collect::<Result<Vec<_>>>()?;
        // lattice periods of the torus per axis, when the steps divide them
        let d = lattice.d();
        let period = |span: T, step: T| -> Option<i64> {
            let q = span / step;
            (q - q.round())
                .abs()
                .le(&T::lit(1e-9))
                .then(|| q.round().to_i64().unwrap_or(0))
                .filter(|&p| p > 0)
        };
        let pt = period(window.side(), base.alpha);
        let pf = period(T::from_usize_lossy(window.n()) / window.side(), base.beta);
        let key = |c: &[i64]| -> Vec<i64> {
            c.iter()
                .enumerate()
                .map(|(a, &k)| match if a < d { pt } else { pf } {
                    Some(p) => k.rem_euclid(p),
                    None => k,
                })
                .collect()
        };
        let mut counts: std::collections::BTreeMap<Vec<i64>, usize> = Default::default();
        let keys: Vec<Vec<i64>> = (0..lattice.len())
            .map(|i| key(&lattice.coords(i)))
            .collect();
        for k in &keys {
            *counts.entry(k.clone()).or_default() += 1;
        }
        let weights = keys
            .iter()
            .map(|k| T::one() / T::from_usize_lossy(counts[k]))
            .collect();
        Ok(Self {
            window,
            lattice,
            atoms,
            weights,
            distinct: counts.len(),
        })
    }

    /// Synthesis weights `w_λ = 1/multiplicity(λ)`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Number of distinct atoms on the torus.
    pub fn distinct_atoms(&self) -> usize {
        self.distinct
    }

    /// Same lattice, different window.
    pub fn with_window(&self, window: SampledSignal<T>) -> Result<Self> {
        Self::new(window, self.lattice.clone())
    }

    pub fn window(&self) -> &SampledSignal<T> {
        &self.window
    }

    pub fn lattice(&self) -> &TruncatedLattice<T> {
        &self.lattice
    }

    /// `π(λ)g` for the `index`-th lattice point.
    pub fn atom(&self, index: usize) -> &SampledSignal<T> {
        &self.atoms[index]
    }

    /// `c_λ = ⟨f, π(λ)g⟩`
    pub fn analysis(&self, f: &SampledSignal<T>) -> Result<Vec<Complex<T>>> {
        self.window.check_grid(f)?;
        let cell = f.cell();
        Ok(self
            .atoms
            .par_iter()
            .map(|a| dot_conj(f.data(), a.data()) * cell)
            .collect())
    }

    /// `Σ_λ w_λ c_λ π(λ)g`
    pub fn synthesis(&self, c: &[Complex<T>]) -> Result<SampledSignal<T>> {
        if c.len() != self.atoms.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} atoms",
                c.len(),
                self.atoms.len()
            )));
        }
        let len = self.window.len();
        let zero = Complex::new(T::zero(), T::zero());
        let chunk = 64.max(len / rayon::current_num_threads().max(1));
        let mut out = vec![zero; len];
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(ci, block)| {
                let start = ci * chunk;
                for ((coef, atom), &w) in c.iter().zip(&self.atoms).zip(&self.weights) {
                    if *coef == zero {
                        continue;
                    }
                    let cw = coef * w;
                    for (o, a) in block.iter_mut().zip(&atom.data()[start..]) {
                        *o += cw * a;
                    }
                }
            });
        self.window.with_data(out)
    }

    /// `S f = D_g C_g f`
    pub fn frame_operator(&self, f: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        self.synthesis(&self.analysis(f)?)
    }

    /// `D_g C_h f` where `self` carries `g` and `dual` carries `h`.
    pub fn reconstruct(&self, dual: &Self, f: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        self.synthesis(&dual.analysis(f)?)
    }

    fn random_signal(&self, rng: &mut ChaCha8Rng) -> SampledSignal<T> {
        let data = (0..self.window.len())
            .map(|_| {
                Complex::new(
                    T::lit(rng.random_range(-1.0..1.0)),
                    T::lit(rng.random_range(-1.0..1.0)),
                )
            })
            .collect();
        self.window.with_data(data).expect("grid unchanged")
    }

    /// Largest Rayleigh quotient of `op` by power iteration; returns (value, iterations, residual).
    fn power(
        &self,
        op: &dyn Fn(&SampledSignal<T>) -> Result<SampledSignal<T>>,
        opts: &FrameBoundsOptions,
        rng: &mut ChaCha8Rng,
    ) -> Result<(T, usize, T)> {
        let tol = T::lit(opts.tol);
        let mut best = (T::zero(), 0, T::zero());
        for _ in 0..opts.trials.max(1) {
            let mut x = self.random_signal(rng).normalized()?;
            let mut rho = T::zero();
            let mut res = T::one();
            let mut it = 0;
            while it < opts.max_iter {
                it += 1;
                let y = op(&x)?;
                let new_rho = y.inner(&x)?.re;
                res = (new_rho - rho).abs() / new_rho.abs().max(T::min_positive_value());
                rho = new_rho;
                let ny = y.norm();
                if !(ny > T::zero()) {
                    res = T::zero();
                    break;
                }
                x = y.scaled(Complex::new(T::one() / ny, T::zero()));
                if res <= tol && it > 2 {
                    break;
                }
            }
            if rho > best.0 || best.1 == 0 {
                best = (rho, best.1 + it, res);
            } else {
                best.1 += it;
            }
        }
        Ok(best)
    }

    pub fn frame_bounds(&self, trials: usize) -> Result<FrameBounds<T>> {
        self.frame_bounds_with(&FrameBoundsOptions {
            trials,
            ..FrameBoundsOptions::default()
        })
    }

    /// `B` by power iteration on `S`, `A = B − λ_max(B·I − S)`.
    pub fn frame_bounds_with(&self, opts: &FrameBoundsOptions) -> Result<FrameBounds<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let (b, it_b, res_b) = self.power(&|x| self.frame_operator(x), opts, &mut rng)?;
        if !(b > T::zero()) {
            return Err(Error::NotAFrame {
                a: 0.0,
                b: b.to_f64_lossy(),
            });
        }
        let shifted = |x: &SampledSignal<T>| -> Result<SampledSignal<T>> {
            let s = self.frame_operator(x)?;
            x.scaled(Complex::new(b, T::zero())).sub(&s)
        };
        let (gap, it_a, res_a) = self.power(&shifted, opts, &mut rng)?;
        let a = (b - gap).max(T::zero());
        if a < T::lit(1e-10) * b {
            return Err(Error::NotAFrame {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
            });
        }
        Ok(FrameBounds {
            a,
            b,
            ratio: b / a,
            iterations: it_a + it_b,
            residual: res_a.max(res_b),
        })
    }

    /// Solves `S h = x` by conjugate gradients to relative residual `tol`.
    pub fn solve_frame_operator(
        &self,
        x: &SampledSignal<T>,
        tol: T,
        max_iter: usize,
    ) -> Result<(SampledSignal<T>, SolveReport<T>)> {
        let bnorm = x.norm();
        let mut h = SampledSignal::zeros(x.d(), x.side(), x.n())?;
        if !(bnorm > T::zero()) {
            return Ok((
                h,
                SolveReport {
                    iterations: 0,
                    residual: T::zero(),
                },
            ));
        }
        let mut r = x.clone();
        let mut p = r.clone();
        let mut rr = r.norm_sq();
        let mut best = T::infinity();
        let mut stalls = 0;
        for it in 1..=max_iter {
            let sp = self.frame_operator(&p)?;
            let denom = sp.inner(&p)?.re;
            if !(denom > T::zero()) {
                break;
            }
            let step = Complex::new(rr / denom, T::zero());
            h = h.axpy(step, &p)?;
            r = r.axpy(-step, &sp)?;
            let rr_new = r.norm_sq();
            let rel = rr_new.sqrt() / bnorm;
            if rel <= tol {
                return Ok((
                    h,
                    SolveReport {
                        iterations: it,
                        residual: rel,
                    },
                ));
            }
            if rel < best * T::lit(0.999) {
                best = rel;
                stalls = 0;
            } else {
                stalls += 1;
                if stalls > 50 {
                    break;
                }
            }
            p = r.axpy(Complex::new(rr_new / rr, T::zero()), &p)?;
            rr = rr_new;
        }
        let residual = self.frame_operator(&h)?.sub(x)?.norm() / bnorm;
        let fb = self.frame_bounds(1).ok();
        Err(Error::Conditioning {
            a: fb.as_ref().map_or(0.0, |f| f.a.to_f64_lossy()),
            b: fb.as_ref().map_or(0.0, |f| f.b.to_f64_lossy()),
            iterations: max_iter,
            residual: residual.to_f64_lossy(),
        })
    }

    /// Canonical dual window `h = S^{−1} g`.
    pub fn dual_window(&self) -> Result<(SampledSignal<T>, SolveReport<T>)> {
        self.solve_frame_operator(&self.window, T::lit(1e-10), 10 * self.window.len() + 100)
    }

    /// Dense `S` in `f64`, `S_{jk} = dx^d Σ_λ w_λ a_λ[j] conj(a_λ[k])` in grid coordinates.
    pub fn frame_matrix(&self) -> DMatrix<Complex<f64>> {
        let len = self.window.len();
        let cell = self.window.cell().to_f64_lossy();
        let cols: Vec<Vec<Complex<f64>>> = (0..len)
            .into_par_iter()
            .map(|k| {
                let mut col = vec![Complex::new(0.0, 0.0); len];
                for (atom, w) in self.atoms.iter().zip(&self.weights) {
                    let a = atom.data();
                    let ck = a[k].conj() * *w;
                    let ck = Complex::new(ck.re.to_f64_lossy(), ck.im.to_f64_lossy());
                    if ck.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (c, z) in col.iter_mut().zip(a) {
                        *c += Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()) * ck;
                    }
                }
                col.iter_mut().for_each(|c| *c *= cell);
                col
            })
            .collect();
        DMatrix::from_fn(len, len, |j, k| cols[k][j])
    }

    /// Parseval window `g_t = S^{−1/2} g` from the Hermitian eigendecomposition of `S`.
    pub fn tight_window(&self) -> Result<SampledSignal<T>> {
        let eig = self.frame_matrix().symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let low = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(low > 1e-10 * top) {
            return Err(Error::NotAFrame {
                a: low.max(0.0),
                b: top,
            });
        }
        let u = &eig.eigenvectors;
        let g: Vec<Complex<f64>> = self
            .window
            .data()
            .iter()
            .map(|z| Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
            .collect();
        let gv = nalgebra::DVector::from_vec(g);
        let mut coeff = u.adjoint() * gv;
        for (c, lam) in coeff.iter_mut().zip(eig.eigenvalues.iter()) {
            *c /= lam.sqrt();
        }
        let out = u * coeff;
        let data = out
            .iter()
            .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
            .collect();
        self.window.with_data(data)
    }

    /// `Σ_λ w_λ |⟨f, π(λ)g⟩|² / ‖f‖²`
    pub fn energy_ratio(&self, f: &SampledSignal<T>) -> Result<T> {
        let c = self.analysis(f)?;
        let e: T = c
            .iter()
            .zip(&self.weights)
            .map(|(z, &w)| z.norm_sqr() * w)
            .sum();
        Ok(e / f.norm_sq())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::{gaussian, random_gaussian_mixture};

    fn system(alpha: f64, r: f64) -> GaborSystem<f64> {
        let g = gaussian(1, 10.0, 100, 1.0).unwrap();
        let lat = TruncatedLattice::build(alpha, alpha, 1, r).unwrap();
        GaborSystem::new(g, lat).unwrap()
    }

    #[test]
    fn rejects_off_grid_lattices() {
        let g = gaussian(1, 10.0, 100, 1.0).unwrap();
        let lat = TruncatedLattice::build(0.15, 0.5, 1, 2.0).unwrap();
        assert!(GaborSystem::new(g.clone(), lat).is_err());
        let lat = TruncatedLattice::build(0.5, 0.25, 1, 2.0).unwrap();
        assert!(GaborSystem::new(g, lat).is_err());
    }

    #[test]
    fn wrapped_section_counts_seam_atoms_once() {
        let sys = system(0.5, 5.0);
        assert_eq!(sys.lattice().len(), 441);
        assert_eq!(sys.distinct_atoms(), 400);
        let i = sys.lattice().index_of(&[-10, 3]).unwrap();
        let j = sys.lattice().index_of(&[10, 3]).unwrap();
        assert!(sys.atom(i).sub(sys.atom(j)).unwrap().norm() < 1e-12);
        assert_eq!(sys.weights()[i], 0.5);
        let corner = sys.lattice().index_of(&[10, -10]).unwrap();
        assert_eq!(sys.weights()[corner], 0.25);
        let inner = sys.lattice().index_of(&[0, 9]).unwrap();
        assert_eq!(sys.weights()[inner], 1.0);
    }

    #[test]
    fn analysis_basics() {
        let sys = system(0.5, 2.0);
        let g = sys.window().clone();
        let c = sys.analysis(&g).unwrap();
        assert!((c[sys.lattice().origin_index()] - 1.0).norm() < 1e-12);
        let z = SampledSignal::<f64>::zeros(1, 10.0, 100).unwrap();
        assert!(sys.analysis(&z).unwrap().iter().all(|c| c.norm() == 0.0));
        let mut e0 = vec![Complex::new(0.0, 0.0); sys.lattice().len()];
        e0[sys.lattice().origin_index()] = Complex::new(1.0, 0.0);
        assert!(sys.synthesis(&e0).unwrap().sub(&g).unwrap().norm() < 1e-15);
    }

    #[test]
    fn adjointness() {
        let sys = system(0.5, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_gaussian_mixture(1, 10.0, 100, 3, 2.0, &mut rng).unwrap();
        let c: Vec<Complex<f64>> = (0..sys.lattice().len())
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let lhs = sys.synthesis(&c).unwrap().inner(&f).unwrap();
        let wc: Vec<Complex<f64>> = c.iter().zip(sys.weights()).map(|(z, w)| z * w).collect();
        let rhs = dot_conj(&wc, &sys.analysis(&f).unwrap());
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn frame_bounds_match_dense_eigenvalues() {
        let sys = system(0.5, 5.0);
        let fb = sys.frame_bounds(2).unwrap();
        let eig = sys.frame_matrix().symmetric_eigen();
        let hi = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let lo = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!((fb.b - hi).abs() < 1e-8 * hi);
        assert!((fb.a - lo).abs() < 1e-6 * hi, "{} vs {}", fb.a, lo);
        assert!(fb.ratio.is_finite() && fb.ratio > 1.0);
        let json = serde_json::to_value(&fb).unwrap();
        assert!(json.get("A").is_some() && json.get("ratio").is_some());
    }

    #[test]
    fn critical_density_is_not_a_frame() {
        let g = gaussian(1, 8.0, 64, 1.0).unwrap();
        let lat = TruncatedLattice::build(1.0, 1.0, 1, 4.0).unwrap();
        let sys = GaborSystem::new(g, lat).unwrap();
        match sys.frame_bounds(1) {
            Err(Error::NotAFrame { a, b }) => assert!(a < 1e-10 * b),
            other => panic!("expected a degenerate frame, got {other:?}"),
        }
    }

    #[test]
    fn dual_window_reconstructs() {
        let sys = system(0.5, 5.0);
        let (h, rep) = sys.dual_window().unwrap();
        assert!(rep.residual <= 1e-10);
        let dual = sys.with_window(h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let f = random_gaussian_mixture(1, 10.0, 100, 4, 2.0, &mut rng).unwrap();
            let err = sys.reconstruct(&dual, &f).unwrap().sub(&f).unwrap().norm();
            assert!(err <= 1e-6, "{err}");
        }
    }

    #[test]
    fn tight_window_is_parseval() {
        let sys = system(0.5, 5.0);
        let gt = sys.tight_window().unwrap();
        let tight = sys.with_window(gt.clone()).unwrap();
        let fb = tight.frame_bounds(1).unwrap();
        assert!(fb.is_tight(1e-6), "{fb:?}");
        assert!((fb.b - 1.0).abs() < 1e-6);
        // S = Id, so the dual of a Parseval window is itself
        let (h, _) = tight.dual_window().unwrap();
        assert!(h.sub(&gt).unwrap().norm() < 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_gaussian_mixture(1, 10.0, 100, 4, 2.0, &mut rng).unwrap();
        assert!((tight.energy_ratio(&f).unwrap() - 1.0).abs() < 1e-6);
    }
}
