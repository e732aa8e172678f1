use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Weight evaluator closure on `ℝ^N`.
pub type WeightFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Submultiplicative or moderate weight on phase space.
#[derive(Clone)]
pub enum WeightSpec<T> {
    /// `v_s(r) = (1 + |r|²)^{s/2}`
    Polynomial { s: T },
    /// Constant weight (`m ≡ c`).
    Constant(T),
    /// Arbitrary positive evaluator.
    Custom(WeightFn<T>),
}

impl<T: Real> fmt::Debug for WeightSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial { s } => write!(f, "Polynomial {{ s: {s} }}"),
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: Real> WeightSpec<T> {
    pub fn polynomial(s: T) -> Self {
        Self::Polynomial { s }
    }

    pub fn one() -> Self {
        Self::Constant(T::one())
    }

    pub fn custom(f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, r: &[T]) -> T {
        match self {
            Self::Polynomial { s } => {
                let sq: T = r.iter().map(|&x| x * x).sum();
                (T::one() + sq).powf(*s / T::lit(2.0))
            }
            Self::Constant(c) => *c,
            Self::Custom(f) => f(r),
        }
    }

    /// Weight composed with a map: `r ↦ m(χ(r))`.
    pub fn compose(self, chi: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self::custom(move |r| self.eval(&chi(r)))
    }

    /// Sharp moderateness constant with respect to `v` when it is known in
    /// closed form. `⟨r+k⟩² ≤ (4/3)⟨r⟩²⟨k⟩²` with equality at `r = k`, `|r|² = 1/2`,
    /// so `v_t` is `v_s`-moderate for `s ≥ |t|` with constant `(4/3)^{|t|/2}`.
    pub fn known_moderate_constant(&self, v: &WeightSpec<T>) -> Option<T> {
        match (self, v) {
            (Self::Constant(_), Self::Polynomial { s }) if *s >= T::zero() => Some(T::one()),
            (Self::Constant(_), Self::Constant(c)) if *c >= T::one() => Some(T::one()),
            (Self::Polynomial { s: sm }, Self::Polynomial { s: sv }) if *sv >= sm.abs() => {
                Some(T::lit(4.0 / 3.0).powf(sm.abs() / T::lit(2.0)))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModerateEstimate<T> {
    /// `max m(r+k) / (m(r) v(k))` over the full sample.
    pub constant: T,
    /// Estimates on nested prefixes (quarter, half, full sample).
    pub nested: Vec<T>,
    /// Set when the nested estimates keep growing, i.e. no uniform constant is visible.
    pub growing: bool,
}

/// Sampled moderateness constant `C_m` of `m` with respect to `v`.
pub fn moderate_constant_estimate<T: Real>(
    m: &dyn Fn(&[T]) -> T,
    v: &WeightSpec<T>,
    sample: &[Vec<T>],
) -> Result<ModerateEstimate<T>> {
    if sample.is_empty() {
        return Err(Error::Parameter(
            "moderate constant needs a nonempty sample".into(),
        ));
    }
    let ms: Vec<T> = sample.iter().map(|r| m(r)).collect();
    if let Some(bad) = ms.iter().find(|&&x| !(x > T::zero())) {
        return Err(Error::Domain(format!("weight value {bad} is not positive")));
    }
    let vs: Vec<T> = sample.iter().map(|k| v.eval(k)).collect();
    let sup_over = |n: usize| -> Result<T> {
        let mut best = T::zero();
        for (i, r) in sample[..n].iter().enumerate() {
            for (j, k) in sample[..n].iter().enumerate() {
                let sum: Vec<T> = r.iter().zip(k).map(|(a, b)| *a + *b).collect();
                let top = m(&sum);
                if !(top > T::zero()) {
                    return Err(Error::Domain(format!("weight value {top} is not positive")));
                }
                best = best.max(top / (ms[i] * vs[j]));
            }
        }
        Ok(best)
    };
    let n = sample.len();
    let cuts = [(n / 4).max(1), (n / 2).max(1), n];
    let nested = cuts
        .iter()
        .map(|&c| sup_over(c))
        .collect::<Result<Vec<_>>>()?;
    let growth = T::lit(1.1);
    let growing = nested[1] > nested[0] * growth && nested[2] > nested[1] * growth;
    Ok(ModerateEstimate {
        constant: nested[2],
        nested,
        growing,
    })
}
