use serde::{Deserialize, Serialize};

use super::{Coords, Lattice};
use crate::scalar::Real;

/// Placement of the half-open fundamental box relative to the lattice points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainAnchor {
    /// `Π[−α/2, α/2) × Π[−β/2, β/2)`
    #[default]
    Centered,
    /// `Π[0, α) × Π[0, β)`
    Corner,
}

/// Half-open box `Q` such that every point of `ℝ^{2d}` is uniquely `q + λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalDomain<T> {
    pub lattice: Lattice<T>,
    pub anchor: DomainAnchor,
}

impl<T: Real> FundamentalDomain<T> {
    pub fn new(lattice: Lattice<T>, anchor: DomainAnchor) -> Self {
        Self { lattice, anchor }
    }

    pub fn centered(lattice: Lattice<T>) -> Self {
        Self::new(lattice, DomainAnchor::Centered)
    }

    /// Splits `p = r + λ` with `λ ∈ Λ` and `r ∈ Q`.
    pub fn decompose(&self, p: &[T]) -> (Coords, Vec<T>) {
        let shift = match self.anchor {
            DomainAnchor::Centered => T::lit(0.5),
            DomainAnchor::Corner => T::zero(),
        };
        let snap = T::lit(1e-12);
        let mut coords = Vec::with_capacity(p.len());
        let mut rem = Vec::with_capacity(p.len());
        for (a, &x) in p.iter().enumerate() {
            let step = self.lattice.step(a);
            let mut q = x / step + shift;
            // values within rounding of a cell edge belong to the lower-closed side
            let nearest = q.round();
            if (q - nearest).abs() < snap * T::one().max(nearest.abs()) {
                q = nearest;
            }
            let k = q.floor();
            coords.push(k.to_i64().unwrap_or(0));
            rem.push(x - k * step);
        }
        (coords, rem)
    }

    pub fn contains(&self, r: &[T]) -> bool {
        r.iter().enumerate().all(|(a, &x)| {
            let step = self.lattice.step(a);
            match self.anchor {
                DomainAnchor::Centered => {
                    x >= -step / T::lit(2.0) - T::lit(1e-12)
                        && x < step / T::lit(2.0) + T::lit(1e-12)
                }
                DomainAnchor::Corner => x >= -T::lit(1e-12) && x < step + T::lit(1e-12),
            }
        })
    }

    /// `sup_{u ∈ Q} |u|` (Euclidean).
    pub fn max_norm(&self) -> T {
        let two = T::lit(2.0);
        (0..2 * self.lattice.d)
            .map(|a| {
                let s = self.lattice.step(a);
                match self.anchor {
                    DomainAnchor::Centered => (s / two) * (s / two),
                    DomainAnchor::Corner => s * s,
                }
            })
            .sum::<T>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_is_unique_and_lower_closed() {
        let lat = Lattice::new(1.0f64, 1.0, 1).unwrap();
        let q = FundamentalDomain::centered(lat);
        let (k, r) = q.decompose(&[0.3, 0.0]);
        assert_eq!(k, vec![0, 0]);
        assert!((r[0] - 0.3).abs() < 1e-15);
        // boundary point goes to the lower-closed side
        let (k, r) = q.decompose(&[0.5, -0.5]);
        assert_eq!(k, vec![1, 0]);
        assert_eq!(r, vec![-0.5, -0.5]);
        assert!(q.contains(&r));
    }

    #[test]
    fn corner_anchor() {
        let lat = Lattice::new(0.5f64, 0.5, 1).unwrap();
        let q = FundamentalDomain::new(lat, DomainAnchor::Corner);
        let (k, r) = q.decompose(&[0.7, -0.2]);
        assert_eq!(k, vec![1, -1]);
        assert!((r[0] - 0.2).abs() < 1e-12 && (r[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_over_a_sweep() {
        let lat = Lattice::new(0.5, 0.75, 1).unwrap();
        let q = FundamentalDomain::centered(lat);
        for i in -40..40 {
            for j in -40..40 {
                let p = [i as f64 * 0.071, j as f64 * 0.093];
                let (k, r) = q.decompose(&p);
                assert!(q.contains(&r));
                let back = lat.point(&k);
                assert!((back[0] + r[0] - p[0]).abs() < 1e-12);
                assert!((back[1] + r[1] - p[1]).abs() < 1e-12);
            }
        }
    }
}
