use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{class::weight_table, Diagonals, LatticeMatrix};
use crate::error::{Error, Result};
use crate::lattice::{lpq_norm, Coords, Exponent, LatticeMap, WeightSpec};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CompactConsistent,
    NonCompact,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct CompactnessOptions<T: Real> {
    /// Relative tail threshold `θ`.
    pub theta: T,
    /// Significance floor relative to the largest diagonal: `γ` is judged iff
    /// `sup |a^γ| > floor·max_γ′ sup |a^γ′|`.
    pub floor: T,
    /// Radii `R` for the tail profiles, in phase-space units; empty means
    /// quarters of the lattice radius.
    pub radii: Vec<T>,
    /// Weight for the reported `φ(γ)`.
    pub v: WeightSpec<T>,
    /// Shell radius of the tail-operator probe as a fraction of the lattice radius.
    pub probe_fraction: T,
    /// Threshold of the probe ratio.
    pub probe_threshold: T,
    pub probe_trials: usize,
    pub seed: u64,
}

impl<T: Real> Default for CompactnessOptions<T> {
    fn default() -> Self {
        Self {
            theta: T::lit(1e-3),
            floor: T::lit(1e-3),
            radii: Vec::new(),
            v: WeightSpec::one(),
            probe_fraction: T::lit(0.8),
            probe_threshold: T::lit(1e-2),
            probe_trials: 20,
            seed: 0xc0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaTail<T> {
    pub gamma: Coords,
    pub phi: T,
    /// `t_γ(R) = sup_{|λ|_∞ ≥ R} |a^γ_λ|` for every configured radius.
    pub tails: Vec<T>,
    pub pass: bool,
}

/// Operator-norm ratio of `A` restricted to inputs on the outer shell, relative
/// to the largest ratio seen on unrestricted inputs, in a given `ℓ^{p,q}_m`.
#[derive(Clone, Debug, Serialize)]
pub struct ShellProbe<T> {
    pub p: Exponent,
    pub q: Exponent,
    pub shell_radius: T,
    pub ratio: T,
    pub pass: bool,
}

/// Finite-scale proxy for `a^γ ∈ c₀` for every `γ`.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticReport<T> {
    pub radii: Vec<T>,
    pub theta: T,
    pub per_gamma: Vec<GammaTail<T>>,
    /// Number of diagonals above the noise floor.
    pub judged: usize,
    pub verdict: Verdict,
    pub probe: Option<ShellProbe<T>>,
}

impl<T: Real> DiagnosticReport<T> {
    /// Verdict including the shell probe, when present.
    pub fn combined_verdict(&self) -> Verdict {
        match (&self.probe, self.verdict) {
            (Some(p), Verdict::CompactConsistent) if !p.pass => Verdict::Inconclusive,
            (Some(p), Verdict::NonCompact) if p.pass => Verdict::Inconclusive,
            (_, v) => v,
        }
    }

    pub fn with_probe(mut self, probe: ShellProbe<T>) -> Self {
        self.probe = Some(probe);
        self
    }

    /// Largest `t_γ(R_max)/t_γ(0)` over the judged diagonals.
    pub fn worst_ratio(&self) -> T {
        self.per_gamma
            .iter()
            .filter_map(|g| {
                let first = *g.tails.first()?;
                let last = *g.tails.last()?;
                (first > T::zero()).then(|| last / first)
            })
            .fold(T::zero(), T::max)
    }
}

fn default_radii<T: Real>(r: T) -> Vec<T> {
    (0..=4).map(|k| r * T::lit(k as f64 / 4.0)).collect()
}

/// Tail profiles of every stored ψ-diagonal. `γ` passes iff
/// `t_γ(R_max) ≤ θ·t_γ(0)`; the verdict is compact-consistent iff every
/// diagonal above the relative significance floor passes.
pub fn compactness_diagnostic<T: Real>(
    d: &Diagonals<T>,
    opts: &CompactnessOptions<T>,
) -> DiagnosticReport<T> {
    let lat = d.lattice();
    let mut radii = if opts.radii.is_empty() {
        default_radii(lat.radius())
    } else {
        opts.radii.clone()
    };
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if radii.first().is_none_or(|r| *r > T::zero()) {
        radii.insert(0, T::zero());
    }
    let norms: Vec<T> = (0..lat.len())
        .map(|i| lat.norm_inf(&lat.coords(i)))
        .collect();
    let base = lat.base();
    let rows: Vec<(Coords, Vec<Complex<T>>)> =
        d.iter().map(|(g, v)| (g.clone(), v.clone())).collect();
    let per_gamma: Vec<GammaTail<T>> = rows
        .par_iter()
        .map(|(gamma, a)| {
            let mut tails = vec![T::zero(); radii.len()];
            for (z, &nrm) in a.iter().zip(&norms) {
                let m = z.norm();
                for (t, &r) in tails.iter_mut().zip(&radii) {
                    if nrm >= r - T::lit(1e-12) {
                        *t = t.max(m);
                    }
                }
            }
            let first = tails[0];
            let last = *tails.last().expect("radii nonempty");
            let pass = last <= opts.theta * first;
            GammaTail {
                gamma: gamma.clone(),
                phi: opts.v.eval(&base.point(gamma)) * first,
                tails,
                pass,
            }
        })
        .collect();
    let top = per_gamma.iter().fold(T::zero(), |m, g| m.max(g.tails[0]));
    let judged: Vec<&GammaTail<T>> = per_gamma
        .iter()
        .filter(|g| top > T::zero() && g.tails[0] > opts.floor * top)
        .collect();
    let verdict = if judged.iter().all(|g| g.pass) {
        Verdict::CompactConsistent
    } else {
        Verdict::NonCompact
    };
    DiagnosticReport {
        judged: judged.len(),
        radii,
        theta: opts.theta,
        per_gamma,
        verdict,
        probe: None,
    }
}

/// Probe of `‖A P_shell‖` in `ℓ^{p,q}_{m∘ψ} → ℓ^{p,q}_m`, where `P_shell`
/// restricts to `|λ|_∞ ≥ probe_fraction·R`.
pub fn shell_probe<T: Real>(
    a: &LatticeMatrix<T>,
    psi: &LatticeMap<T>,
    p: Exponent,
    q: Exponent,
    m: &WeightSpec<T>,
    opts: &CompactnessOptions<T>,
) -> Result<ShellProbe<T>> {
    let lat = a.lattice();
    let n = lat.len();
    let m_out = weight_table(lat, m, None);
    let m_in = weight_table(lat, m, Some(psi));
    let shell_radius = opts.probe_fraction * lat.radius();
    let shell: Vec<usize> = (0..n)
        .filter(|&i| lat.norm_inf(&lat.coords(i)) >= shell_radius - T::lit(1e-12))
        .collect();
    let zero = Complex::new(T::zero(), T::zero());
    let ratio_of = |x: &[Complex<T>]| -> Result<T> {
        let y = a.mul_vec(x)?;
        let den = lpq_norm(x, lat, p, q, Some(&m_in))?;
        Ok(if den > T::zero() {
            lpq_norm(&y, lat, p, q, Some(&m_out))? / den
        } else {
            T::zero()
        })
    };
    let spike = |i: usize| {
        let mut e = vec![zero; n];
        e[i] = Complex::new(T::one(), T::zero());
        e
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_on = |support: &[usize]| {
        let mut x = vec![zero; n];
        for &i in support {
            x[i] = Complex::new(
                T::lit(rng.random_range(-1.0..1.0)),
                T::lit(rng.random_range(-1.0..1.0)),
            );
        }
        x
    };
    let all: Vec<usize> = (0..n).collect();
    let mut reference = T::zero();
    let mut restricted = T::zero();
    for i in 0..n {
        let r = ratio_of(&spike(i))?;
        reference = reference.max(r);
        if shell.binary_search(&i).is_ok() {
            restricted = restricted.max(r);
        }
    }
    for _ in 0..opts.probe_trials {
        reference = reference.max(ratio_of(&random_on(&all))?);
        restricted = restricted.max(ratio_of(&random_on(&shell))?);
    }
    let ratio = if reference > T::zero() {
        restricted / reference
    } else {
        T::zero()
    };
    Ok(ShellProbe {
        p,
        q,
        shell_radius,
        ratio,
        pass: ratio <= opts.probe_threshold,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionSvals<T> {
    /// Section size: diameter in lattice steps.
    pub n: usize,
    pub points: usize,
    pub svals: Vec<T>,
}

impl<T: Real> SectionSvals<T> {
    pub fn head(&self, k: usize) -> &[T] {
        &self.svals[..k.min(self.svals.len())]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport<T> {
    pub sections: Vec<SectionSvals<T>>,
    pub theta: T,
    /// `θ`-rank `#{k : s_k ≥ θ s₁}` of every section.
    pub ranks: Vec<usize>,
    /// `θ`-rank of the largest section over that of the second largest.
    pub rank_growth: T,
    /// Relative change of `s₁` between the last two sections.
    pub s1_drift: T,
    pub verdict: Verdict,
}

/// Singular values of `D_m A D_{1/(m∘ψ)}` on the sections `{|k|_∞ ≤ ⌊n/2⌋}`.
///
/// A Gabor matrix has numerical rank of the order of the phase-space area its
/// atoms cover, whatever the operator, so the point count of a section says
/// little. The verdict reads the growth of the `θ`-rank instead:
/// compact-consistent iff the `θ`-rank of the largest section exceeds that of
/// the second largest by at most `1 + 5%` and `s₁` moved by at most 10%;
/// non-compact iff the `θ`-rank grows strictly across all sections and by a
/// factor of at least 1.25 over the last step. Otherwise inconclusive.
pub fn section_singular_values<T: Real>(
    a: &LatticeMatrix<T>,
    sizes: &[usize],
    m: &WeightSpec<T>,
    psi: &LatticeMap<T>,
    theta: T,
) -> Result<OracleReport<T>> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(
            "section sizes must be nonempty and increasing".into(),
        ));
    }
    let lat = a.lattice();
    let (tb, fb) = lat.bounds();
    let max_r = tb.min(fb);
    if let Some(&big) = sizes.iter().find(|&&n| (n / 2) as i64 > max_r) {
        return Err(Error::Parameter(format!(
            "section size {big} exceeds the lattice (index radius {max_r})"
        )));
    }
    let m_out = weight_table(lat, m, None);
    let m_in = weight_table(lat, m, Some(psi));
    let sections = sizes
        .par_iter()
        .map(|&n| {
            let idx = lat.section_indices((n / 2) as i64);
            let k = idx.len();
            let mat = DMatrix::from_fn(k, k, |r, c| {
                let (mu, lam) = (idx[r], idx[c]);
                let z = a.get(mu, lam) * (m_out[mu] / m_in[lam]);
                Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
            });
            let mut s: Vec<f64> = mat.singular_values().iter().copied().collect();
            s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
            SectionSvals {
                n,
                points: k,
                svals: s.into_iter().map(T::lit).collect(),
            }
        })
        .collect::<Vec<_>>();
    let last = sections.last().expect("sizes nonempty");
    let s1 = last.svals[0];
    let ranks: Vec<usize> = sections
        .iter()
        .map(|s| {
            let top = s.svals.first().copied().unwrap_or(T::zero());
            s.svals
                .iter()
                .filter(|&&v| top > T::zero() && v >= theta * top)
                .count()
        })
        .collect();
    let (rank_growth, s1_drift) = match sections.len() {
        0 | 1 => (T::one(), T::zero()),
        k => {
            let prev = ranks[k - 2].max(1);
            let growth = T::from_usize_lossy(ranks[k - 1]) / T::from_usize_lossy(prev);
            let p1 = sections[k - 2].svals[0];
            let drift = if s1 > T::zero() {
                (s1 - p1).abs() / s1
            } else {
                T::zero()
            };
            (growth, drift)
        }
    };
    let k = ranks.len();
    let saturated = k >= 2 && ranks[k - 1] <= ranks[k - 2] + 1 + ranks[k - 2] / 20;
    let growing = k >= 2 && ranks.windows(2).all(|w| w[1] > w[0]) && rank_growth >= T::lit(1.25);
    let verdict = if s1 == T::zero() || (saturated && s1_drift <= T::lit(0.1)) {
        Verdict::CompactConsistent
    } else if growing {
        Verdict::NonCompact
    } else {
        Verdict::Inconclusive
    };
    Ok(OracleReport {
        sections,
        theta,
        ranks,
        rank_growth,
        s1_drift,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleHead<T> {
    pub n: usize,
    pub svals_head: Vec<T>,
}

/// Serializable summary `{per_gamma, oracle, verdict}` plus the oracle verdict.
#[derive(Clone, Debug, Serialize)]
pub struct CompactnessVerdict<T> {
    pub per_gamma: Vec<GammaTail<T>>,
    pub oracle: Vec<OracleHead<T>>,
    pub verdict: Verdict,
    pub oracle_verdict: Verdict,
    pub agree: bool,
}

impl<T: Real> CompactnessVerdict<T> {
    pub fn new(diag: &DiagnosticReport<T>, oracle: &OracleReport<T>, head: usize) -> Self {
        let verdict = diag.combined_verdict();
        Self {
            per_gamma: diag.per_gamma.clone(),
            oracle: oracle
                .sections
                .iter()
                .map(|s| OracleHead {
                    n: s.n,
                    svals_head: s.head(head).to_vec(),
                })
                .collect(),
            verdict,
            oracle_verdict: oracle.verdict,
            agree: verdict == oracle.verdict,
        }
    }
}
