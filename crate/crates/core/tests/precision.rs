//! The same pipelines in `f32` and `f64`: single precision must reproduce the
//! double-precision results to its own accuracy.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tflab::fio::{gabor_matrix, FioOperator, QuadraticPhase, Symbol};
use tflab::gabor::GaborSystem;
use tflab::lattice::TruncatedLattice;
use tflab::psdo::{PsdoOperator, PsdoSymbol};
use tflab::seqops::LatticeMatrix;
use tflab::tf::{gaussian, random_gaussian_mixture};
use tflab::Real;

fn system<T: Real>() -> GaborSystem<T> {
    let lat = TruncatedLattice::build(T::lit(0.5), T::lit(0.5), 1, T::lit(5.0)).unwrap();
    GaborSystem::new(gaussian(1, T::lit(10.0), 100, T::one()).unwrap(), lat).unwrap()
}

fn reconstruction_error<T: Real>() -> f64 {
    let sys = system::<T>();
    let (h, _) = sys.dual_window().unwrap();
    let dual = sys.with_window(h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_gaussian_mixture(1, T::lit(10.0), 100, 3, T::lit(1.0), &mut rng).unwrap();
    let g = sys.reconstruct(&dual, &f).unwrap();
    (g.sub(&f).unwrap().norm() / f.norm()).to_f64_lossy()
}

fn fio_matrix<T: Real>() -> LatticeMatrix<T> {
    let op = FioOperator::new(
        Symbol::Gaussian { center: [T::lit(0.5), T::lit(-0.25)], width: T::lit(2.0) },
        QuadraticPhase::chirp(),
    );
    gabor_matrix(&op, &system()).unwrap()
}

fn psdo_matrix<T: Real>() -> LatticeMatrix<T> {
    let sym = PsdoSymbol::weyl(Symbol::Gaussian { center: [T::zero(), T::zero()], width: T::lit(1.5) });
    gabor_matrix(&PsdoOperator::new(&sym, T::lit(10.0), 100).unwrap(), &system()).unwrap()
}

fn max_dev(a: &LatticeMatrix<f32>, b: &LatticeMatrix<f64>) -> f64 {
    let scale = b.max_abs();
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (Complex::new(x.re as f64, x.im as f64) - y).norm())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn reconstruction_in_both_precisions() {
    let (double, single) = (reconstruction_error::<f64>(), reconstruction_error::<f32>());
    assert!(double < 1e-9, "f64 error {double:e}");
    assert!(single < 1e-4, "f32 error {single:e}");
}

#[test]
fn fio_gabor_matrix_agrees_across_precisions() {
    let dev = max_dev(&fio_matrix::<f32>(), &fio_matrix::<f64>());
    assert!(dev < 1e-4, "relative deviation {dev:e}");
}

#[test]
fn psdo_gabor_matrix_agrees_across_precisions() {
    let dev = max_dev(&psdo_matrix::<f32>(), &psdo_matrix::<f64>());
    assert!(dev < 1e-4, "relative deviation {dev:e}");
}

#[test]
fn root_aliases_are_double_precision() {
    let s: tflab::Signal = gaussian(1, 10.0, 100, 1.0).unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-12);
    let lat: tflab::TruncatedLattice = TruncatedLattice::build(0.5, 0.5, 1, 2.0).unwrap();
    assert_eq!(lat.len(), 81);
}
