use serde::{Deserialize, Serialize};

use super::Phase;
use crate::scalar::Real;

/// Rectangular sample region in `(x, η)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub x: (T, T),
    pub eta: (T, T),
    /// Samples per axis.
    pub samples: usize,
}

impl<T: Real> Region<T> {
    pub fn square(half: T, samples: usize) -> Self {
        Self {
            x: (-half, half),
            eta: (-half, half),
            samples,
        }
    }

    fn axis(range: (T, T), n: usize) -> Vec<T> {
        let n = n.max(2);
        (0..n)
            .map(|k| {
                range.0 + (range.1 - range.0) * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1)
            })
            .collect()
    }

    pub fn xs(&self) -> Vec<T> {
        Self::axis(self.x, self.samples)
    }

    pub fn etas(&self) -> Vec<T> {
        Self::axis(self.eta, self.samples)
    }

    pub fn grid(&self) -> Vec<(T, T)> {
        let etas = self.etas();
        self.xs()
            .into_iter()
            .flat_map(|x| etas.iter().map(move |&e| (x, e)))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TamenessReport<T> {
    /// Sampled `sup |∂^αΦ|` over `|α| = 2`.
    pub second_sup: T,
    /// Sampled `sup |∂^αΦ|` over `|α| = 3`.
    pub third_sup: T,
    /// Sampled `min |∂²_{x,η}Φ|`.
    pub det_min: T,
    /// Sampled `sup |∇_xΦ(x,η) − ∇_xΦ(x',η)|`.
    pub phase3_sup: T,
    /// `(s, sup over |x − x'| ≤ s)` for growing separations `s`.
    pub phase3_profile: Vec<(T, T)>,
    /// The phase-3 sup saturates instead of growing with the separation.
    pub phase3_bounded: bool,
    pub second_ok: Option<bool>,
    pub third_ok: Option<bool>,
    pub det_ok: Option<bool>,
}

fn within<T: Real>(value: T, bound: T) -> bool {
    value <= bound * T::lit(1.001) + T::lit(1e-5)
}

/// Finite-difference scan of the derivative bounds, the nondegeneracy and
/// the mixed-norm condition of `Φ` over `region`.
pub fn tameness_check<T: Real>(phase: &Phase<T>, region: &Region<T>) -> TamenessReport<T> {
    let f = |x: T, e: T| phase.value(x, e);
    let h2 = T::lit(1e-3);
    let h3 = T::lit(1e-2);
    let two = T::lit(2.0);
    let mut second_sup = T::zero();
    let mut third_sup = T::zero();
    let mut det_min = T::infinity();
    for (x, e) in region.grid() {
        let c = f(x, e);
        let dxx = (f(x + h2, e) - two * c + f(x - h2, e)) / (h2 * h2);
        let dee = (f(x, e + h2) - two * c + f(x, e - h2)) / (h2 * h2);
        let dxe = (f(x + h2, e + h2) - f(x + h2, e - h2) - f(x - h2, e + h2) + f(x - h2, e - h2))
            / (T::lit(4.0) * h2 * h2);
        second_sup = second_sup.max(dxx.abs()).max(dee.abs()).max(dxe.abs());
        det_min = det_min.min(phase.mixed(x, e).abs());
        // third derivatives as central differences of second differences
        let sxx = |e: T, x: T| (f(x + h3, e) - two * f(x, e) + f(x - h3, e)) / (h3 * h3);
        let see = |x: T, e: T| (f(x, e + h3) - two * f(x, e) + f(x, e - h3)) / (h3 * h3);
        let dxxx = (sxx(e, x + h3) - sxx(e, x - h3)) / (two * h3);
        let dxxe = (sxx(e + h3, x) - sxx(e - h3, x)) / (two * h3);
        let dxee = (see(x + h3, e) - see(x - h3, e)) / (two * h3);
        let deee = (see(x, e + h3) - see(x, e - h3)) / (two * h3);
        third_sup = [dxxx, dxxe, dxee, deee]
            .iter()
            .fold(third_sup, |m, v| m.max(v.abs()));
    }
    let xs = region.xs();
    let etas = region.etas();
    let span = region.x.1 - region.x.0;
    let seps: Vec<T> = [0.25, 0.5, 1.0].iter().map(|&s| span * T::lit(s)).collect();
    let mut prof = vec![T::zero(); seps.len()];
    for &e in &etas {
        let g: Vec<T> = xs.iter().map(|&x| phase.grad_x(x, e)).collect();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &x2) in xs.iter().enumerate().skip(i + 1) {
                let diff = (g[i] - g[j]).abs();
                let sep = x2 - x;
                for (p, &s) in prof.iter_mut().zip(&seps) {
                    if sep <= s * T::lit(1.0 + 1e-12) {
                        *p = p.max(diff);
                    }
                }
            }
        }
    }
    let phase3_sup = *prof.last().expect("three separations");
    let phase3_bounded = phase3_sup <= T::lit(1.25) * prof[1] + T::lit(1e-9);
    let (bounds, delta) = phase.declared_bounds();
    TamenessReport {
        second_sup,
        third_sup,
        det_min,
        phase3_sup,
        phase3_profile: seps.into_iter().zip(prof).collect(),
        phase3_bounded,
        second_ok: bounds[0].map(|c| within(second_sup, c)),
        third_ok: bounds[1].map(|c| within(third_sup, c)),
        det_ok: delta.map(|d| det_min >= d * T::lit(0.999)),
    }
}
