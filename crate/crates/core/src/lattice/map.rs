use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{seq::Exponent, sub_coords, Coords, TruncatedLattice};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A self-map `ψ : Λ_R → Λ` given as a table in enumeration order.
#[derive(Clone, Debug)]
pub struct LatticeMap<T> {
    lattice: TruncatedLattice<T>,
    targets: Vec<Coords>,
    // index of ψ(λ) inside Λ_R, when present
    target_index: Vec<Option<usize>>,
    fiber_bound: usize,
}

/// Splitting `ψ₂(i, j) = ψ̃₂(j) + a(i, j)` with offsets in a finite set `K`.
#[derive(Clone, Debug, Serialize)]
pub struct Admissible {
    /// `ψ̃₂(j)` keyed by the frequency coordinates `j`.
    pub psi2_tilde: BTreeMap<Coords, Coords>,
    /// `a(i, j)` in enumeration order.
    pub offsets: Vec<Coords>,
    /// The offset set `K`, sorted.
    pub k_set: Vec<Coords>,
    /// Fiber bound of `ψ` and of `ψ̃₂` combined.
    pub m: usize,
    /// `M₁ = |K|·M`.
    pub m1: usize,
}

impl Admissible {
    /// `C·M^{1/q}·M₁^{1/p}` with `C = |K|`.
    pub fn j_psi_bound(&self, p: Exponent, q: Exponent) -> f64 {
        self.k_set.len() as f64 * (self.m as f64).powf(q.recip()) * (self.m1 as f64).powf(p.recip())
    }
}

/// JSON form of a truncated lattice with an attached map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub alpha: f64,
    pub beta: f64,
    pub d: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
    pub psi: Vec<[Vec<f64>; 2]>,
    pub offsets: Vec<Coords>,
}

impl<T: Real> LatticeMap<T> {
    pub fn from_targets(lattice: TruncatedLattice<T>, targets: Vec<Coords>) -> Result<Self> {
        if targets.len() != lattice.len() {
            return Err(Error::Shape(format!(
                "map table has {} entries, section has {}",
                targets.len(),
                lattice.len()
            )));
        }
        let dim = 2 * lattice.d();
        if targets.iter().any(|t| t.len() != dim) {
            return Err(Error::Shape("map target of wrong dimension".into()));
        }
        let target_index = targets.iter().map(|t| lattice.index_of(t)).collect();
        let mut fibers: BTreeMap<&Coords, usize> = BTreeMap::new();
        for t in &targets {
            *fibers.entry(t).or_default() += 1;
        }
        let fiber_bound = fibers.values().copied().max().unwrap_or(0);
        Ok(Self {
            lattice,
            targets,
            target_index,
            fiber_bound,
        })
    }

    pub fn from_fn(lattice: TruncatedLattice<T>, f: impl Fn(&[i64]) -> Coords) -> Result<Self> {
        let targets = (0..lattice.len()).map(|i| f(&lattice.coords(i))).collect();
        Self::from_targets(lattice, targets)
    }

    pub fn identity(lattice: TruncatedLattice<T>) -> Self {
        Self::from_fn(lattice, |c| c.to_vec()).expect("identity table is well formed")
    }

    pub fn lattice(&self) -> &TruncatedLattice<T> {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `ψ(λ)` for the `index`-th point of `Λ_R`.
    pub fn target(&self, index: usize) -> &Coords {
        &self.targets[index]
    }

    pub fn targets(&self) -> &[Coords] {
        &self.targets
    }

    pub fn target_index(&self, index: usize) -> Option<usize> {
        self.target_index[index]
    }

    pub fn is_identity(&self) -> bool {
        self.target_index
            .iter()
            .enumerate()
            .all(|(i, t)| *t == Some(i))
    }

    /// `M = max_λ card ψ⁻¹({λ})` over the section.
    pub fn fiber_bound(&self) -> usize {
        self.fiber_bound
    }

    /// Greedy partition of `Λ_R` into at most `M` classes on which `ψ` is injective.
    pub fn partition_injective(&self) -> Vec<Vec<usize>> {
        let mut seen: BTreeMap<&Coords, usize> = BTreeMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, t) in self.targets.iter().enumerate() {
            let slot = seen.entry(t).or_default();
            if *slot == classes.len() {
                classes.push(Vec::new());
            }
            classes[*slot].push(i);
            *slot += 1;
        }
        classes
    }

    /// Admissible splitting along the time/frequency coordinates, accepted iff `|K| ≤ cap`.
    pub fn admissibility_decompose(&self, cap: usize) -> Result<Admissible> {
        let d = self.lattice.d();
        let mut psi2_tilde: BTreeMap<Coords, Coords> = BTreeMap::new();
        // lexicographic order visits the least time index first for every j
        for (i, t) in self.targets.iter().enumerate() {
            let j = self.lattice.coords(i)[d..].to_vec();
            psi2_tilde.entry(j).or_insert_with(|| t[d..].to_vec());
        }
        let offsets: Vec<Coords> = self
            .targets
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let j = &self.lattice.coords(i)[d..];
                sub_coords(&t[d..], &psi2_tilde[j])
            })
            .collect();
        let k_set: Vec<Coords> = offsets
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if k_set.len() > cap {
            return Err(Error::NotAdmissible(format!(
                "offset set has {} elements, cap is {cap}",
                k_set.len()
            )));
        }
        let mut fib: BTreeMap<&Coords, usize> = BTreeMap::new();
        for v in psi2_tilde.values() {
            *fib.entry(v).or_default() += 1;
        }
        let m = self
            .fiber_bound
            .max(fib.values().copied().max().unwrap_or(0));
        Ok(Admissible {
            psi2_tilde,
            offsets,
            m1: k_set.len() * m,
            k_set,
            m,
        })
    }

    /// `(J_ψ x)_λ = x_{ψ(λ)}`, zero where `ψ(λ) ∉ Λ_R`.
    pub fn apply_j(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.target_index
            .iter()
            .map(|t| t.map_or(Complex::new(T::zero(), T::zero()), |k| x[k]))
            .collect()
    }

    /// `(I_ψ x)_γ = Σ_{ψ(λ)=γ} x_λ`, restricted to `Λ_R`.
    pub fn apply_i(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut y = vec![Complex::new(T::zero(), T::zero()); x.len()];
        for (i, t) in self.target_index.iter().enumerate() {
            if let Some(k) = t {
                y[*k] += x[i];
            }
        }
        y
    }

    pub fn to_doc(&self, admissible: Option<&Admissible>) -> LatticeDoc {
        let base = self.lattice.base();
        LatticeDoc {
            alpha: base.alpha.to_f64_lossy(),
            beta: base.beta.to_f64_lossy(),
            d: base.d,
            radius: self.lattice.radius().to_f64_lossy(),
            points: self
                .lattice
                .points()
                .map(|p| p.into_iter().map(Real::to_f64_lossy).collect())
                .collect(),
            psi: (0..self.len())
                .map(|i| {
                    let f = |c: &[i64]| base.point(c).into_iter().map(Real::to_f64_lossy).collect();
                    [f(&self.lattice.coords(i)), f(&self.targets[i])]
                })
                .collect(),
            offsets: admissible.map(|a| a.k_set.clone()).unwrap_or_default(),
        }
    }
}
