use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use super::Region;
use crate::scalar::Real;

pub type SymbolFn<T> = Arc<dyn Fn(T, T) -> Complex<T> + Send + Sync>;
pub type MultiplierFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

/// Amplitude `σ(x, η)` on `ℝ × ℝ`.
#[derive(Clone)]
pub enum Symbol<T> {
    Constant(Complex<T>),
    /// `e^{−π|z − c|²/w²}`
    Gaussian {
        center: [T; 2],
        width: T,
    },
    /// `exp(1 − 1/(1 − |z − c|²/r²))` inside the disc of radius `r`, zero outside.
    Bump {
        center: [T; 2],
        radius: T,
    },
    /// `e^{−π|z − c|²/w²}` times a `C^∞` cutoff that is 1 for `|z − c| ≤ r/2`
    /// and 0 for `|z − c| ≥ r`; compactly supported with Gaussian-like spectrum.
    CutoffGaussian {
        center: [T; 2],
        width: T,
        radius: T,
    },
    /// Smoothed indicator of `[−h, h]²`: a product of `C^∞` steps falling from
    /// 1 at `|t| = h` to 0 at `|t| = h + ramp`.
    SmoothBox {
        half_width: T,
        ramp: T,
    },
    /// Function of `η` alone.
    Multiplier(MultiplierFn<T>),
    Custom(SymbolFn<T>),
}

impl<T: fmt::Debug> fmt::Debug for Symbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Constant(c) => write!(f, "Constant({c:?})"),
            Symbol::Gaussian { center, width } => write!(f, "Gaussian({center:?}, {width:?})"),
            Symbol::Bump { center, radius } => write!(f, "Bump({center:?}, {radius:?})"),
            Symbol::CutoffGaussian {
                center,
                width,
                radius,
            } => {
                write!(f, "CutoffGaussian({center:?}, {width:?}, {radius:?})")
            }
            Symbol::SmoothBox { half_width, ramp } => {
                write!(f, "SmoothBox({half_width:?}, {ramp:?})")
            }
            Symbol::Multiplier(_) => f.write_str("Multiplier(..)"),
            Symbol::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// `C^∞` step: 1 for `t ≤ 0`, 0 for `t ≥ 1`.
fn smooth_step<T: Real>(t: T) -> T {
    let e = |s: T| {
        if s > T::zero() {
            (-T::one() / s).exp()
        } else {
            T::zero()
        }
    };
    let (a, b) = (e(T::one() - t), e(t));
    a / (a + b)
}

impl<T: Real> Symbol<T> {
    pub fn one() -> Self {
        Symbol::Constant(Complex::new(T::one(), T::zero()))
    }

    pub fn zero() -> Self {
        Symbol::Constant(Complex::new(T::zero(), T::zero()))
    }

    pub fn custom(f: impl Fn(T, T) -> Complex<T> + Send + Sync + 'static) -> Self {
        Symbol::Custom(Arc::new(f))
    }

    pub fn multiplier(f: impl Fn(T) -> Complex<T> + Send + Sync + 'static) -> Self {
        Symbol::Multiplier(Arc::new(f))
    }

    pub fn eval(&self, x: T, eta: T) -> Complex<T> {
        let re = |v: T| Complex::new(v, T::zero());
        match self {
            Symbol::Constant(c) => *c,
            Symbol::Gaussian { center, width } => {
                let r2 = (x - center[0]).powi(2) + (eta - center[1]).powi(2);
                re((-T::PI() * r2 / (*width * *width)).exp())
            }
            Symbol::Bump { center, radius } => {
                let q = ((x - center[0]).powi(2) + (eta - center[1]).powi(2)) / (*radius * *radius);
                re(if q < T::one() {
                    (T::one() - T::one() / (T::one() - q)).exp()
                } else {
                    T::zero()
                })
            }
            Symbol::CutoffGaussian {
                center,
                width,
                radius,
            } => {
                let r = ((x - center[0]).powi(2) + (eta - center[1]).powi(2)).sqrt();
                let half = *radius / T::lit(2.0);
                let cut = smooth_step((r - half) / half);
                re(if cut > T::zero() {
                    cut * (-T::PI() * r * r / (*width * *width)).exp()
                } else {
                    T::zero()
                })
            }
            Symbol::SmoothBox { half_width, ramp } => {
                let s = |t: T| smooth_step((t.abs() - *half_width) / *ramp);
                re(s(x) * s(eta))
            }
            Symbol::Multiplier(m) => m(eta),
            Symbol::Custom(f) => f(x, eta),
        }
    }

    /// `σ` does not depend on `x`.
    pub fn is_x_independent(&self) -> bool {
        matches!(self, Symbol::Constant(_) | Symbol::Multiplier(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Symbol::Constant(c) if c.norm() == T::zero())
    }

    /// `sup |σ|` on the region samples.
    pub fn sup(&self, region: &Region<T>) -> T {
        region
            .grid()
            .into_iter()
            .fold(T::zero(), |m, (x, e)| m.max(self.eval(x, e).norm()))
    }

    /// Sampled `sup |∂^α σ|` for `|α| = 0, 1, 2` by central differences.
    pub fn derivative_report(&self, region: &Region<T>) -> [T; 3] {
        let h = T::lit(1e-4);
        let two = T::lit(2.0);
        let mut out = [T::zero(); 3];
        for (x, e) in region.grid() {
            let f = |dx: T, de: T| self.eval(x + dx, e + de);
            let c = f(T::zero(), T::zero());
            let z = T::zero();
            let first = [
                (f(h, z) - f(-h, z)) / (two * h),
                (f(z, h) - f(z, -h)) / (two * h),
            ];
            let second = [
                (f(h, z) - c * two + f(-h, z)) / (h * h),
                (f(z, h) - c * two + f(z, -h)) / (h * h),
                (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (T::lit(4.0) * h * h),
            ];
            out[0] = out[0].max(c.norm());
            out[1] = first.iter().fold(out[1], |m, v| m.max(v.norm()));
            out[2] = second.iter().fold(out[2], |m, v| m.max(v.norm()));
        }
        out
    }
}
