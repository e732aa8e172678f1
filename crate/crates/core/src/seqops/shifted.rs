use std::collections::BTreeMap;

use num_complex::Complex;

use super::LatticeMatrix;
use crate::error::{Error, Result};
use crate::lattice::{Coords, LatticeMap, TruncatedLattice};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftedMode {
    /// `D_{a,ψ}`: `y_γ = Σ_{ψ(λ)=γ} a_λ x_λ`
    Direct,
    /// `D_{a,ψ}ᵗ`: `y_λ = a_λ x_{ψ(λ)}`
    Transpose,
}

/// Shifted-diagonal operator on `Λ_R`; images outside the section read and write as zero.
/// With `a ≡ 1` the two modes are `I_ψ` and `J_ψ`.
pub fn apply_shifted_diag<T: Real>(
    a: &[Complex<T>],
    psi: &LatticeMap<T>,
    x: &[Complex<T>],
    mode: ShiftedMode,
) -> Result<Vec<Complex<T>>> {
    let n = psi.len();
    if a.len() != n || x.len() != n {
        return Err(Error::Shape("shifted diagonal shape mismatch".into()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut y = vec![zero; n];
    match mode {
        ShiftedMode::Direct => {
            for lam in 0..n {
                if let Some(t) = psi.target_index(lam) {
                    y[t] += a[lam] * x[lam];
                }
            }
        }
        ShiftedMode::Transpose => {
            for (lam, out) in y.iter_mut().enumerate() {
                if let Some(t) = psi.target_index(lam) {
                    *out = a[lam] * x[t];
                }
            }
        }
    }
    Ok(y)
}

/// ψ-relative diagonals `a^γ_λ = a_{ψ(λ)+γ, λ}` keyed by `γ` (integer coordinates).
/// Only diagonals carrying a nonzero entry are stored.
#[derive(Clone, Debug)]
pub struct Diagonals<T> {
    lattice: TruncatedLattice<T>,
    diags: BTreeMap<Coords, Vec<Complex<T>>>,
}

impl<T: Real> Diagonals<T> {
    pub fn new(
        lattice: TruncatedLattice<T>,
        diags: BTreeMap<Coords, Vec<Complex<T>>>,
    ) -> Result<Self> {
        if diags.values().any(|v| v.len() != lattice.len()) {
            return Err(Error::Shape(
                "diagonal length differs from the section".into(),
            ));
        }
        Ok(Self { lattice, diags })
    }

    pub fn from_matrix(a: &LatticeMatrix<T>, psi: &LatticeMap<T>) -> Result<Self> {
        let lat = a.lattice();
        if lat != psi.lattice() {
            return Err(Error::Shape(
                "matrix and map live on different sections".into(),
            ));
        }
        let n = lat.len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut diags: BTreeMap<Coords, Vec<Complex<T>>> = BTreeMap::new();
        let rows: Vec<Coords> = (0..n).map(|i| lat.coords(i)).collect();
        for lam in 0..n {
            let base = psi.target(lam);
            for (mu, row) in rows.iter().enumerate() {
                let z = a.get(mu, lam);
                if z == zero {
                    continue;
                }
                let gamma: Coords = row.iter().zip(base).map(|(m, p)| m - p).collect();
                diags.entry(gamma).or_insert_with(|| vec![zero; n])[lam] = z;
            }
        }
        Ok(Self {
            lattice: lat.clone(),
            diags,
        })
    }

    pub fn lattice(&self) -> &TruncatedLattice<T> {
        &self.lattice
    }

    pub fn gammas(&self) -> impl Iterator<Item = &Coords> {
        self.diags.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Coords, &Vec<Complex<T>>)> {
        self.diags.iter()
    }

    pub fn get(&self, gamma: &[i64]) -> Option<&Vec<Complex<T>>> {
        self.diags.get(gamma)
    }

    pub fn len(&self) -> usize {
        self.diags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diags.is_empty()
    }

    /// `γ ↦ ‖a^γ‖_∞`
    pub fn sup_norms(&self) -> Vec<(Coords, T)> {
        self.diags
            .iter()
            .map(|(g, v)| {
                (
                    g.clone(),
                    v.iter().map(|z| z.norm()).fold(T::zero(), T::max),
                )
            })
            .collect()
    }

    /// `Σ_γ T_γ D_{a^γ,ψ}` evaluated on the basis vectors `e_λ`:
    /// `T_γ D_{a^γ,ψ} e_λ = a^γ_λ e_{ψ(λ)+γ}`.
    pub fn reassemble(&self, psi: &LatticeMap<T>) -> Result<LatticeMatrix<T>> {
        let mut out = LatticeMatrix::zeros(self.lattice.clone());
        let zero = Complex::new(T::zero(), T::zero());
        for (gamma, a) in &self.diags {
            for (lam, &z) in a.iter().enumerate() {
                if z == zero {
                    continue;
                }
                let target: Coords = psi
                    .target(lam)
                    .iter()
                    .zip(gamma)
                    .map(|(p, g)| p + g)
                    .collect();
                let mu = self.lattice.index_of(&target).ok_or_else(|| {
                    Error::Consistency(format!(
                        "diagonal entry maps outside the section at {target:?}"
                    ))
                })?;
                let prev = out.get(mu, lam);
                out.set(mu, lam, prev + z);
            }
        }
        Ok(out)
    }
}

/// Extracts all ψ-diagonals and checks that their reassembly reproduces `A`
/// entrywise to `1e−12`.
pub fn diagonal_decompose<T: Real>(
    a: &LatticeMatrix<T>,
    psi: &LatticeMap<T>,
) -> Result<Diagonals<T>> {
    let d = Diagonals::from_matrix(a, psi)?;
    let back = d.reassemble(psi)?;
    let err = back.max_abs_diff(a)?;
    if err > T::lit(1e-12) {
        return Err(Error::Consistency(format!(
            "diagonal reassembly differs by {err}"
        )));
    }
    Ok(d)
}
