use num_complex::Complex;
use serde::Serialize;

use super::{Diagonals, LatticeMatrix};
use crate::error::Result;
use crate::lattice::{lpq_norm, Coords, Exponent, LatticeMap, TruncatedLattice, WeightSpec};
use crate::scalar::Real;

#[derive(Clone, Debug, Serialize)]
pub struct GammaWeight<T> {
    pub gamma: Coords,
    /// `sup_λ |a^γ_λ|`
    pub sup: T,
    /// `φ(γ) = v(γ)·sup_λ |a^γ_λ|`
    pub phi: T,
}

/// `‖A‖_{C_{v,ψ}} = Σ_γ v(γ) sup_λ |a_{ψ(λ)+γ, λ}|` over the stored window.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport<T> {
    pub per_gamma: Vec<GammaWeight<T>>,
    pub total: T,
    /// Part of `total` carried by the outermost shell of stored `γ`.
    pub tail: T,
}

impl<T: Real> ClassReport<T> {
    pub fn from_diagonals(d: &Diagonals<T>, v: &WeightSpec<T>) -> Self {
        let base = d.lattice().base();
        let per_gamma: Vec<GammaWeight<T>> = d
            .sup_norms()
            .into_iter()
            .map(|(gamma, sup)| {
                let phi = v.eval(&base.point(&gamma)) * sup;
                GammaWeight { gamma, sup, phi }
            })
            .collect();
        let total = per_gamma.iter().map(|g| g.phi).sum();
        let shell = |g: &Coords| g.iter().map(|k| k.abs()).max().unwrap_or(0);
        let outer = per_gamma
            .iter()
            .filter(|g| g.sup > T::zero())
            .map(|g| shell(&g.gamma))
            .max()
            .unwrap_or(0);
        let tail = per_gamma
            .iter()
            .filter(|g| shell(&g.gamma) == outer)
            .map(|g| g.phi)
            .sum();
        Self {
            per_gamma,
            total,
            tail,
        }
    }
}

pub fn class_norm<T: Real>(
    a: &LatticeMatrix<T>,
    v: &WeightSpec<T>,
    psi: &LatticeMap<T>,
) -> Result<ClassReport<T>> {
    Ok(ClassReport::from_diagonals(
        &Diagonals::from_matrix(a, psi)?,
        v,
    ))
}

/// `m` tabulated on `Λ_R`, optionally composed with `ψ` (`m∘ψ`).
pub fn weight_table<T: Real>(
    lat: &TruncatedLattice<T>,
    m: &WeightSpec<T>,
    psi: Option<&LatticeMap<T>>,
) -> Vec<T> {
    (0..lat.len())
        .map(|i| {
            let c = psi.map_or_else(|| lat.coords(i), |p| p.target(i).clone());
            m.eval(&lat.base().point(&c))
        })
        .collect()
}

/// `y = Ax` and `‖y‖_{ℓ^{p,q}_{m_out}} / ‖x‖_{ℓ^{p,q}_{m_in}}`.
pub fn apply_matrix<T: Real>(
    a: &LatticeMatrix<T>,
    x: &[Complex<T>],
    p: Exponent,
    q: Exponent,
    m_in: &[T],
    m_out: &[T],
) -> Result<(Vec<Complex<T>>, T)> {
    let y = a.mul_vec(x)?;
    let lat = a.lattice();
    let num = lpq_norm(&y, lat, p, q, Some(m_out))?;
    let den = lpq_norm(x, lat, p, q, Some(m_in))?;
    let ratio = if den > T::zero() {
        num / den
    } else {
        T::zero()
    };
    Ok((y, ratio))
}
