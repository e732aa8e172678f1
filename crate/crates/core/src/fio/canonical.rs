use serde::Serialize;

use super::{Phase, Region};
use crate::error::{Error, Result};
use crate::lattice::{Coords, DomainAnchor, FundamentalDomain, LatticeMap, TruncatedLattice};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonicalMethod {
    ClosedForm,
    Newton,
}

/// `χ(y, η) = (x, ξ)` defined by `y = ∇_ηΦ(x, η)`, `ξ = ∇_xΦ(x, η)`.
#[derive(Clone, Debug)]
pub struct CanonicalMap<T> {
    pub phase: Phase<T>,
    pub method: CanonicalMethod,
    pub max_iter: usize,
    pub tol: T,
}

impl<T: Real> CanonicalMap<T> {
    pub fn new(phase: impl Into<Phase<T>>) -> Self {
        let phase = phase.into();
        let method = if phase.as_quadratic().is_some() {
            CanonicalMethod::ClosedForm
        } else {
            CanonicalMethod::Newton
        };
        Self {
            phase,
            method,
            max_iter: 60,
            tol: T::lit(1e-10),
        }
    }

    /// Forces the Newton path, also for quadratic phases.
    pub fn newton(mut self) -> Self {
        self.method = CanonicalMethod::Newton;
        self
    }

    pub fn apply(&self, y: T, eta: T) -> Result<(T, T)> {
        canonical_transform(self, y, eta)
    }

    /// `|∇_ηΦ(x, η) − y|` at the returned point.
    pub fn residual(&self, y: T, eta: T, x: T) -> T {
        (self.phase.grad_eta(x, eta) - y).abs()
    }

    /// Sampled Lipschitz constant of `χ` over `region` (Euclidean norms).
    pub fn lipschitz_estimate(&self, region: &Region<T>) -> Result<T> {
        let pts = region.grid();
        let imgs: Vec<(T, T)> = pts
            .iter()
            .map(|&(y, e)| self.apply(y, e))
            .collect::<Result<_>>()?;
        let mut best = T::zero();
        let n = region.samples.max(2);
        for i in 0..pts.len() {
            for j in [i + 1, i + n] {
                if j >= pts.len() {
                    continue;
                }
                let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                let dd = ((imgs[i].0 - imgs[j].0).powi(2) + (imgs[i].1 - imgs[j].1).powi(2)).sqrt();
                if d > T::zero() {
                    best = best.max(dd / d);
                }
            }
        }
        Ok(best)
    }
}

/// Solves the defining system. Quadratic phases use the closed form
/// `x = (y − cη + x₀)/b`, `ξ = ax + bη + η₀`; otherwise Newton on
/// `F(x) = ∇_ηΦ(x, η) − y` started from the linearization at `x = 0`.
pub fn canonical_transform<T: Real>(chi: &CanonicalMap<T>, y: T, eta: T) -> Result<(T, T)> {
    let phase = &chi.phase;
    if let (CanonicalMethod::ClosedForm, Some(q)) = (chi.method, phase.as_quadratic()) {
        let x = (y - q.c * eta + q.x0) / q.b;
        return Ok((x, q.grad_x(x, eta)));
    }
    let m0 = phase.mixed(T::zero(), eta);
    let mut x = if m0.abs() > T::lit(1e-12) {
        (y - phase.grad_eta(T::zero(), eta)) / m0
    } else {
        y
    };
    if !x.is_finite() {
        x = y;
    }
    let mut trace = Vec::new();
    for _ in 0..chi.max_iter {
        let r = phase.grad_eta(x, eta) - y;
        trace.push(r.abs().to_f64_lossy());
        let noise = T::lit(64.0) * T::epsilon() * T::one().max(y.abs());
        if r.abs() <= chi.tol.max(noise) {
            return Ok((x, phase.grad_x(x, eta)));
        }
        let jac = phase.mixed(x, eta);
        if jac == T::zero() || !jac.is_finite() {
            break;
        }
        x -= r / jac;
    }
    let iterations = trace.len();
    Err(Error::NonConvergence { iterations, trace })
}

/// Discretization `χ(λ) = r_λ + χ′(λ)` with `χ′(λ) ∈ Λ`, `r_λ ∈ Q`.
#[derive(Clone, Debug)]
pub struct ChiPrime<T> {
    pub map: LatticeMap<T>,
    pub remainders: Vec<Vec<T>>,
    pub images: Vec<Vec<T>>,
    pub fiber_bound: usize,
    /// Fiber bound recomputed on the half-radius section.
    pub fiber_bound_half: usize,
    pub fiber_stable: bool,
}

impl<T: Real> ChiPrime<T> {
    pub fn max_remainder(&self) -> T {
        self.remainders
            .iter()
            .map(|r| r.iter().fold(T::zero(), |m, v| m.max(v.abs())))
            .fold(T::zero(), T::max)
    }
}

/// Lattice part, remainder in `Q` and image of every section point under `χ`.
type Targets<T> = (Vec<Coords>, Vec<Vec<T>>, Vec<Vec<T>>);

fn chi_targets<T: Real>(
    chi: &CanonicalMap<T>,
    lattice: &TruncatedLattice<T>,
    q: &FundamentalDomain<T>,
) -> Result<Targets<T>> {
    let mut targets = Vec::with_capacity(lattice.len());
    let mut rems = Vec::with_capacity(lattice.len());
    let mut imgs = Vec::with_capacity(lattice.len());
    for i in 0..lattice.len() {
        let p = lattice.point(i);
        let (x, xi) = chi.apply(p[0], p[1])?;
        let img = vec![x, xi];
        let (c, r) = q.decompose(&img);
        targets.push(c);
        rems.push(r);
        imgs.push(img);
    }
    Ok((targets, rems, imgs))
}

/// `χ′` on `Λ_R` with remainders in the half-open cell `Q` fixed by `anchor`.
pub fn discretize_chi<T: Real>(
    chi: &CanonicalMap<T>,
    lattice: &TruncatedLattice<T>,
    anchor: DomainAnchor,
) -> Result<ChiPrime<T>> {
    if lattice.d() != 1 {
        return Err(Error::Unsupported(
            "canonical maps are implemented for d = 1".into(),
        ));
    }
    let q = FundamentalDomain::new(*lattice.base(), anchor);
    let (targets, remainders, images) = chi_targets(chi, lattice, &q)?;
    let map = LatticeMap::from_targets(lattice.clone(), targets)?;
    let half = TruncatedLattice::new(*lattice.base(), lattice.radius() / T::lit(2.0))?;
    let (ht, _, _) = chi_targets(chi, &half, &q)?;
    let fiber_bound_half = LatticeMap::from_targets(half, ht)?.fiber_bound();
    let fiber_bound = map.fiber_bound();
    Ok(ChiPrime {
        map,
        remainders,
        images,
        fiber_bound,
        fiber_bound_half,
        fiber_stable: fiber_bound == fiber_bound_half,
    })
}
