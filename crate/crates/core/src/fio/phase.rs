use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type ScalarFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// `Φ(x, η) = ½a x² + b xη + ½c η² + η₀x − x₀η` on `ℝ × ℝ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadraticPhase<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub x0: T,
    pub eta0: T,
}

impl<T: Real> Default for QuadraticPhase<T> {
    fn default() -> Self {
        Self::standard()
    }
}

impl<T: Real> QuadraticPhase<T> {
    pub fn new(a: T, b: T, c: T, x0: T, eta0: T) -> Result<Self> {
        let p = Self { a, b, c, x0, eta0 };
        p.validate()?;
        Ok(p)
    }

    /// `Φ = xη`
    pub fn standard() -> Self {
        Self {
            a: T::zero(),
            b: T::one(),
            c: T::zero(),
            x0: T::zero(),
            eta0: T::zero(),
        }
    }

    /// `Φ = xη + x²/2`
    pub fn chirp() -> Self {
        Self {
            a: T::one(),
            ..Self::standard()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.a, self.b, self.c, self.x0, self.eta0];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(
                "quadratic phase coefficients must be finite".into(),
            ));
        }
        if self.b == T::zero() {
            return Err(Error::Parameter(
                "quadratic phase needs a nondegenerate mixed term b".into(),
            ));
        }
        Ok(())
    }

    pub fn value(&self, x: T, eta: T) -> T {
        let half = T::lit(0.5);
        half * self.a * x * x + self.b * x * eta + half * self.c * eta * eta + self.eta0 * x
            - self.x0 * eta
    }

    pub fn grad_x(&self, x: T, eta: T) -> T {
        self.a * x + self.b * eta + self.eta0
    }

    pub fn grad_eta(&self, x: T, eta: T) -> T {
        self.b * x + self.c * eta - self.x0
    }

    /// Second-order remainder `Φ₂(w) = ½⟨H w, w⟩`, with `H` the constant Hessian.
    pub fn remainder(&self, w1: T, w2: T) -> T {
        T::lit(0.5) * (self.a * w1 * w1 + T::lit(2.0) * self.b * w1 * w2 + self.c * w2 * w2)
    }
}

/// General phase from user evaluators. Missing derivatives fall back to
/// central differences and are flagged through [`PhaseSpec::uses_finite_differences`].
#[derive(Clone)]
pub struct PhaseSpec<T> {
    pub phi: ScalarFn<T>,
    pub grad_x: Option<ScalarFn<T>>,
    pub grad_eta: Option<ScalarFn<T>>,
    pub mixed: Option<ScalarFn<T>>,
    /// Declared `C_α` for `|α| = 2, 3`.
    pub bounds: [Option<T>; 2],
    /// Declared lower bound on `|∂²_{x,η}Φ|`.
    pub delta: Option<T>,
}

impl<T> fmt::Debug for PhaseSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseSpec")
            .field("grad_x", &self.grad_x.is_some())
            .field("grad_eta", &self.grad_eta.is_some())
            .field("mixed", &self.mixed.is_some())
            .finish_non_exhaustive()
    }
}

impl<T: Real> PhaseSpec<T> {
    pub fn new(phi: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self {
            phi: Arc::new(phi),
            grad_x: None,
            grad_eta: None,
            mixed: None,
            bounds: [None, None],
            delta: None,
        }
    }

    pub fn with_gradients(
        mut self,
        grad_x: impl Fn(T, T) -> T + Send + Sync + 'static,
        grad_eta: impl Fn(T, T) -> T + Send + Sync + 'static,
        mixed: impl Fn(T, T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.grad_x = Some(Arc::new(grad_x));
        self.grad_eta = Some(Arc::new(grad_eta));
        self.mixed = Some(Arc::new(mixed));
        self
    }

    pub fn with_bounds(mut self, c2: Option<T>, c3: Option<T>, delta: Option<T>) -> Self {
        self.bounds = [c2, c3];
        self.delta = delta;
        self
    }

    pub fn uses_finite_differences(&self) -> bool {
        self.grad_x.is_none() || self.grad_eta.is_none() || self.mixed.is_none()
    }
}

const FD_STEP: f64 = 1e-5;

/// A phase function of FIO type on `ℝ × ℝ`.
#[derive(Clone, Debug)]
pub enum Phase<T> {
    Quadratic(QuadraticPhase<T>),
    General(PhaseSpec<T>),
}

impl<T: Real> From<QuadraticPhase<T>> for Phase<T> {
    fn from(q: QuadraticPhase<T>) -> Self {
        Phase::Quadratic(q)
    }
}

impl<T: Real> Phase<T> {
    pub fn as_quadratic(&self) -> Option<&QuadraticPhase<T>> {
        match self {
            Phase::Quadratic(q) => Some(q),
            Phase::General(_) => None,
        }
    }

    pub fn value(&self, x: T, eta: T) -> T {
        match self {
            Phase::Quadratic(q) => q.value(x, eta),
            Phase::General(p) => (p.phi)(x, eta),
        }
    }

    pub fn grad_x(&self, x: T, eta: T) -> T {
        match self {
            Phase::Quadratic(q) => q.grad_x(x, eta),
            Phase::General(p) => match &p.grad_x {
                Some(g) => g(x, eta),
                None => {
                    let h = T::lit(FD_STEP);
                    ((p.phi)(x + h, eta) - (p.phi)(x - h, eta)) / (h + h)
                }
            },
        }
    }

    pub fn grad_eta(&self, x: T, eta: T) -> T {
        match self {
            Phase::Quadratic(q) => q.grad_eta(x, eta),
            Phase::General(p) => match &p.grad_eta {
                Some(g) => g(x, eta),
                None => {
                    let h = T::lit(FD_STEP);
                    ((p.phi)(x, eta + h) - (p.phi)(x, eta - h)) / (h + h)
                }
            },
        }
    }

    /// `∂²_{x,η}Φ`
    pub fn mixed(&self, x: T, eta: T) -> T {
        match self {
            Phase::Quadratic(q) => q.b,
            Phase::General(p) => match &p.mixed {
                Some(g) => g(x, eta),
                None => {
                    let h = T::lit(1e-4);
                    let f = &p.phi;
                    (f(x + h, eta + h) - f(x + h, eta - h) - f(x - h, eta + h) + f(x - h, eta - h))
                        / (T::lit(4.0) * h * h)
                }
            },
        }
    }

    /// Relative disagreement of the supplied gradients with central
    /// differences of `Φ`, maximized over the samples.
    pub fn gradient_consistency(&self, samples: &[(T, T)]) -> T {
        let h = T::lit(1e-5);
        let h2 = T::lit(1e-4);
        let mut worst = T::zero();
        for &(x, eta) in samples {
            let fx = (self.value(x + h, eta) - self.value(x - h, eta)) / (h + h);
            let fe = (self.value(x, eta + h) - self.value(x, eta - h)) / (h + h);
            let fm = (self.value(x + h2, eta + h2)
                - self.value(x + h2, eta - h2)
                - self.value(x - h2, eta + h2)
                + self.value(x - h2, eta - h2))
                / (T::lit(4.0) * h2 * h2);
            for (got, fd) in [
                (self.grad_x(x, eta), fx),
                (self.grad_eta(x, eta), fe),
                (self.mixed(x, eta), fm),
            ] {
                let scale = T::one().max(fd.abs());
                worst = worst.max((got - fd).abs() / scale);
            }
        }
        worst
    }

    pub fn declared_bounds(&self) -> ([Option<T>; 2], Option<T>) {
        match self {
            Phase::Quadratic(q) => {
                let c2 = q.a.abs().max(q.b.abs()).max(q.c.abs());
                ([Some(c2), Some(T::zero())], Some(q.b.abs()))
            }
            Phase::General(p) => (p.bounds, p.delta),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<(f64, f64)> {
        (-3..=3)
            .flat_map(|i| (-3..=3).map(move |j| (0.7 * i as f64, 0.45 * j as f64)))
            .collect()
    }

    #[test]
    fn quadratic_closed_forms_match_differences() {
        let q = QuadraticPhase::new(0.3, 1.7, -0.4, 0.2, -1.1).unwrap();
        let phase = Phase::Quadratic(q);
        assert!(phase.gradient_consistency(&samples()) < 1e-6);
        assert_eq!(phase.mixed(1.0, 2.0), 1.7);
    }

    #[test]
    fn remainder_is_exact_second_order_term() {
        let q = QuadraticPhase::new(0.3f64, 1.7, -0.4, 0.2, -1.1).unwrap();
        let (x, e, w1, w2) = (0.9, -0.3, 0.25, -1.5);
        let lin = q.value(x, e) + q.grad_x(x, e) * w1 + q.grad_eta(x, e) * w2;
        assert!((q.value(x + w1, e + w2) - lin - q.remainder(w1, w2)).abs() < 1e-13);
    }

    #[test]
    fn degenerate_quadratic_rejected() {
        assert!(QuadraticPhase::new(1.0, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(QuadraticPhase::new(f64::NAN, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn finite_difference_fallback_is_flagged_and_accurate() {
        let spec = PhaseSpec::new(|x: f64, e: f64| x * e + 0.1 * (x + e).sin());
        assert!(spec.uses_finite_differences());
        let p = Phase::General(spec);
        let (x, e) = (0.4, -0.8);
        assert!((p.grad_x(x, e) - (e + 0.1 * (x + e).cos())).abs() < 1e-8);
        assert!((p.mixed(x, e) - (1.0 - 0.1 * (x + e).sin())).abs() < 1e-6);
    }

    #[test]
    fn wrong_gradient_detected() {
        let spec = PhaseSpec::new(|x: f64, e: f64| x * e).with_gradients(
            |_, e| 2.0 * e,
            |x, _| x,
            |_, _| 1.0,
        );
        assert!(Phase::General(spec).gradient_consistency(&samples()) > 0.1);
    }
}
