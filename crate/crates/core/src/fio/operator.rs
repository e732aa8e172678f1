use num_complex::Complex;
use rayon::prelude::*;

use super::{Phase, Symbol};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::tf::{fourier, SampledSignal};

/// A linear map on sampled signals of a fixed grid.
pub trait LinearOperator<T: Real>: Send + Sync {
    fn apply(&self, f: &SampledSignal<T>) -> Result<SampledSignal<T>>;
}

impl<T: Real, F> LinearOperator<T> for F
where
    F: Fn(&SampledSignal<T>) -> Result<SampledSignal<T>> + Send + Sync,
{
    fn apply(&self, f: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        self(f)
    }
}

/// `T f(x) = ∫ e^{2πiΦ(x,η)} σ(x,η) f̂(η) dη`
#[derive(Clone, Debug)]
pub struct FioOperator<T> {
    pub symbol: Symbol<T>,
    pub phase: Phase<T>,
}

impl<T: Real> FioOperator<T> {
    pub fn new(symbol: Symbol<T>, phase: impl Into<Phase<T>>) -> Self {
        Self {
            symbol,
            phase: phase.into(),
        }
    }
}

impl<T: Real> LinearOperator<T> for FioOperator<T> {
    fn apply(&self, f: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        apply_fio(&self.symbol, &self.phase, f)
    }
}

fn check_finite<T: Real>(z: Complex<T>, what: &str, x: T, eta: T) -> Result<Complex<T>> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Evaluation(format!(
            "{what} is not finite at (x, η) = ({x}, {eta})"
        )))
    }
}

/// Riemann sum of the oscillatory integral over the centered frequency grid
/// `η_k = (k − N/2)/L`, evaluated at every grid point `x`. Symbols independent
/// of `x` with `Φ` quadratic and `b = 1` take an exact FFT route.
pub fn apply_fio<T: Real>(
    sigma: &Symbol<T>,
    phase: &Phase<T>,
    f: &SampledSignal<T>,
) -> Result<SampledSignal<T>> {
    if f.d() != 1 {
        return Err(Error::Unsupported(
            "FIO application is implemented for d = 1".into(),
        ));
    }
    let n = f.n();
    let l = f.side();
    let spec = fourier(f, false)?;
    let etas: Vec<T> = (0..n)
        .map(|k| (T::from_usize_lossy(k) - T::from_usize_lossy(n / 2)) / l)
        .collect();
    let xs: Vec<T> = (0..n).map(|j| f.coord(j)).collect();
    let two_pi = T::two_pi();
    if sigma.is_zero() {
        return SampledSignal::zeros(1, l, n);
    }
    if let (true, Phase::Quadratic(q)) = (sigma.is_x_independent(), phase) {
        if q.b == T::one() {
            let half = T::lit(0.5);
            let mut g = Vec::with_capacity(n);
            for (k, &eta) in etas.iter().enumerate() {
                let s = check_finite(sigma.eval(T::zero(), eta), "symbol", T::zero(), eta)?;
                g.push(spec.data()[k] * s * cis(two_pi * (half * q.c * eta * eta - q.x0 * eta)));
            }
            let inv = fourier(&spec.with_data(g)?, true)?;
            let out = inv
                .data()
                .iter()
                .zip(&xs)
                .map(|(z, &x)| *z * cis(two_pi * (half * q.a * x * x + q.eta0 * x)))
                .collect();
            return f.with_data(out);
        }
    }
    let deta = T::one() / l;
    let hat = spec.data();
    let out: Result<Vec<Complex<T>>> = xs
        .par_iter()
        .map(|&x| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, &eta) in etas.iter().enumerate() {
                if hat[k].re == T::zero() && hat[k].im == T::zero() {
                    continue;
                }
                let s = check_finite(sigma.eval(x, eta), "symbol", x, eta)?;
                let ph = phase.value(x, eta);
                if !ph.is_finite() {
                    return Err(Error::Evaluation(format!(
                        "phase is not finite at (x, η) = ({x}, {eta})"
                    )));
                }
                acc += hat[k] * s * cis(two_pi * ph);
            }
            Ok(acc * deta)
        })
        .collect();
    f.with_data(out?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fio::{PhaseSpec, QuadraticPhase};
    use crate::tf::gaussian;

    fn test_signal() -> SampledSignal<f64> {
        SampledSignal::from_fn(1, 16.0, 256, |t: &[f64]| {
            let x = t[0];
            Complex::new(
                (-std::f64::consts::PI * (x - 0.5).powi(2)).exp(),
                0.3 * (-(x + 1.0).powi(2)).exp(),
            )
        })
        .unwrap()
    }

    fn max_diff(a: &SampledSignal<f64>, b: &SampledSignal<f64>) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn general(q: QuadraticPhase<f64>) -> Phase<f64> {
        Phase::General(PhaseSpec::new(move |x, e| q.value(x, e)))
    }

    #[test]
    fn standard_phase_is_identity_on_both_routes() {
        let f = test_signal();
        let fast = apply_fio(&Symbol::one(), &QuadraticPhase::standard().into(), &f).unwrap();
        let slow = apply_fio(&Symbol::one(), &general(QuadraticPhase::standard()), &f).unwrap();
        assert!(max_diff(&fast, &f) < 1e-12);
        assert!(max_diff(&slow, &f) < 1e-8);
    }

    #[test]
    fn multiplier_matches_fourier_oracle() {
        let f = test_signal();
        let m = |e: f64| Complex::new(1.0 / (1.0 + e * e), e.sin());
        let out = apply_fio(
            &Symbol::custom(move |_, e| m(e)),
            &QuadraticPhase::standard().into(),
            &f,
        )
        .unwrap();
        let hat = fourier(&f, false).unwrap();
        let l = f.side();
        let scaled: Vec<Complex<f64>> = hat
            .data()
            .iter()
            .enumerate()
            .map(|(k, z)| z * m((k as f64 - 128.0) / l))
            .collect();
        let oracle = fourier(&hat.with_data(scaled).unwrap(), true).unwrap();
        assert!(max_diff(&out, &oracle) < 1e-8);
    }

    #[test]
    fn chirp_phase_multiplies_by_chirp() {
        let f = test_signal();
        let expect = f
            .with_data(
                f.data()
                    .iter()
                    .enumerate()
                    .map(|(j, z)| z * cis(std::f64::consts::PI * f.coord(j).powi(2)))
                    .collect(),
            )
            .unwrap();
        let fast = apply_fio(&Symbol::one(), &QuadraticPhase::chirp().into(), &f).unwrap();
        let slow = apply_fio(&Symbol::one(), &general(QuadraticPhase::chirp()), &f).unwrap();
        assert!(max_diff(&fast, &expect) < 1e-6);
        assert!(max_diff(&slow, &expect) < 1e-6);
    }

    #[test]
    fn fast_route_matches_quadrature_for_general_quadratics() {
        let f = gaussian(1, 16.0, 256, 1.0).unwrap();
        let q = QuadraticPhase::new(0.2, 1.0, -0.3, 0.5, 0.25).unwrap();
        let fast = apply_fio(&Symbol::one(), &q.into(), &f).unwrap();
        let slow = apply_fio(&Symbol::one(), &general(q), &f).unwrap();
        assert!(max_diff(&fast, &slow) < 1e-10);
    }

    #[test]
    fn zero_symbol_and_errors() {
        let f = test_signal();
        let z = apply_fio(&Symbol::zero(), &QuadraticPhase::standard().into(), &f).unwrap();
        assert_eq!(z.norm(), 0.0);
        let bad = Symbol::custom(|x: f64, _| Complex::new(1.0 / x.abs().min(0.0), 0.0));
        assert!(matches!(
            apply_fio(&bad, &QuadraticPhase::standard().into(), &f),
            Err(Error::Evaluation(_))
        ));
        let f2 = SampledSignal::<f64>::zeros(2, 4.0, 8).unwrap();
        assert!(apply_fio(&Symbol::one(), &QuadraticPhase::standard().into(), &f2).is_err());
    }
}
