//! Lattices `αℤ^d × βℤ^d`, their finite sections, weights, weighted mixed-norm
//! sequence spaces and lattice self-maps with bounded fibers.

mod domain;
mod map;
mod seq;
mod weights;

pub use domain::{DomainAnchor, FundamentalDomain};
pub use map::{Admissible, LatticeDoc, LatticeMap};
pub use seq::{lpq_norm, lpq_norm_groups, translate_coords, translate_seq, Exponent};
pub use weights::{moderate_constant_estimate, ModerateEstimate, WeightSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Integer coordinates `(n, m) ∈ ℤ^d × ℤ^d` of a lattice point.
pub type Coords = Vec<i64>;

/// The regular lattice `αℤ^d × βℤ^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice<T> {
    pub alpha: T,
    pub beta: T,
    pub d: usize,
}

impl<T: Real> Lattice<T> {
    pub fn new(alpha: T, beta: T, d: usize) -> Result<Self> {
        if !(alpha > T::zero()) || !(beta > T::zero()) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Parameter(format!(
                "lattice steps must be positive, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if d == 0 {
            return Err(Error::Parameter(
                "lattice dimension must be at least 1".into(),
            ));
        }
        Ok(Self { alpha, beta, d })
    }

    /// Step along coordinate `axis` of `ℝ^{2d}`.
    #[inline]
    pub fn step(&self, axis: usize) -> T {
        if axis < self.d {
            self.alpha
        } else {
            self.beta
        }
    }

    pub fn point(&self, coords: &[i64]) -> Vec<T> {
        coords
            .iter()
            .enumerate()
            .map(|(a, &k)| T::from_i64_lossy(k) * self.step(a))
            .collect()
    }

    /// Integer coordinates of `p`, or a parameter error when `p ∉ Λ`.
    pub fn coords_of(&self, p: &[T]) -> Result<Coords> {
        if p.len() != 2 * self.d {
            return Err(Error::Shape(format!(
                "point has {} components, lattice lives in dimension {}",
                p.len(),
                2 * self.d
            )));
        }
        p.iter()
            .enumerate()
            .map(|(a, &x)| {
                let q = x / self.step(a);
                let k = q.round();
                if (q - k).abs() > T::lit(1e-9) * T::one().max(k.abs()) {
                    Err(Error::Parameter(format!(
                        "point component {x} is not on the lattice"
                    )))
                } else {
                    Ok(k.to_i64().unwrap_or(0))
                }
            })
            .collect()
    }
}

/// The finite section `Λ_R = {λ ∈ Λ : |λ|_∞ ≤ R}` enumerated lexicographically
/// on the integer coordinates `(n, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedLattice<T> {
    base: Lattice<T>,
    radius: T,
    time_bound: i64,
    freq_bound: i64,
    len: usize,
}

impl<T: Real> TruncatedLattice<T> {
    pub fn new(base: Lattice<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Parameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        let slack = T::lit(1e-9);
        let time_bound = (radius / base.alpha + slack).floor().to_i64().unwrap_or(0);
        let freq_bound = (radius / base.beta + slack).floor().to_i64().unwrap_or(0);
        let side_t = (2 * time_bound + 1) as usize;
        let side_f = (2 * freq_bound + 1) as usize;
        let len = side_t
            .checked_pow(base.d as u32)
            .and_then(|a| {
                side_f
                    .checked_pow(base.d as u32)
                    .and_then(|b| a.checked_mul(b))
            })
            .ok_or_else(|| Error::Parameter("truncated lattice too large".into()))?;
        Ok(Self {
            base,
            radius,
            time_bound,
            freq_bound,
            len,
        })
    }

    /// Builds `Λ_R` for `αℤ^d × βℤ^d`.
    pub fn build(alpha: T, beta: T, d: usize, radius: T) -> Result<Self> {
        Self::new(Lattice::new(alpha, beta, d)?, radius)
    }

    pub fn base(&self) -> &Lattice<T> {
        &self.base
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn d(&self) -> usize {
        self.base.d
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Largest `|n|` and `|m|` present.
    pub fn bounds(&self) -> (i64, i64) {
        (self.time_bound, self.freq_bound)
    }

    #[inline]
    fn bound(&self, axis: usize) -> i64 {
        if axis < self.base.d {
            self.time_bound
        } else {
            self.freq_bound
        }
    }

    pub fn coords(&self, mut index: usize) -> Coords {
        let dim = 2 * self.base.d;
        let mut c = vec![0i64; dim];
        for a in (0..dim).rev() {
            let b = self.bound(a);
            let side = (2 * b + 1) as usize;
            c[a] = (index % side) as i64 - b;
            index /= side;
        }
        c
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != 2 * self.base.d {
            return None;
        }
        let mut idx = 0usize;
        for (a, &k) in coords.iter().enumerate() {
            let b = self.bound(a);
            if k < -b || k > b {
                return None;
            }
            idx = idx * (2 * b + 1) as usize + (k + b) as usize;
        }
        Some(idx)
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        self.index_of(coords).is_some()
    }

    pub fn point(&self, index: usize) -> Vec<T> {
        self.base.point(&self.coords(index))
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<T>> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }

    /// `|λ|_∞` in phase-space units.
    pub fn norm_inf(&self, coords: &[i64]) -> T {
        coords
            .iter()
            .enumerate()
            .map(|(a, &k)| T::from_i64_lossy(k.abs()) * self.base.step(a))
            .fold(T::zero(), T::max)
    }

    /// Euclidean `|λ|` in phase-space units.
    pub fn norm2(&self, coords: &[i64]) -> T {
        self.base
            .point(coords)
            .iter()
            .map(|&x| x * x)
            .sum::<T>()
            .sqrt()
    }

    pub fn origin_index(&self) -> usize {
        self.index_of(&vec![0; 2 * self.base.d])
            .expect("origin is always present")
    }

    /// Indices of the sub-section `{|k|_∞ ≤ r}` in integer coordinates.
    pub fn section_indices(&self, r: i64) -> Vec<usize> {
        (0..self.len)
            .filter(|&i| self.coords(i).iter().all(|k| k.abs() <= r))
            .collect()
    }
}

pub(crate) fn add_coords(a: &[i64], b: &[i64]) -> Coords {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub_coords(a: &[i64], b: &[i64]) -> Coords {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
