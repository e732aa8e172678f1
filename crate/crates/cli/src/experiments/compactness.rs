use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tflab::fio::{discretize_chi, gabor_matrix, CanonicalMap, FioOperator};
use tflab::lattice::{LatticeMap, TruncatedLattice};
use tflab::psdo::PsdoOperator;
use tflab::seqops::{
    compactness_diagnostic, section_singular_values, shell_probe, CompactnessOptions,
    CompactnessVerdict, Diagonals, LatticeMatrix, OracleReport,
};
use tflab::Result;

use super::{lattice, phase, psdo_symbol, symbol, system, weight};
use crate::config::{ExperimentConfig, OperatorConfig};
use crate::report::{num, Recorder};

/// The configured operator as a lattice matrix with its reference map `ψ`.
pub(crate) fn operator_matrix(
    cfg: &ExperimentConfig,
) -> Result<(LatticeMatrix<f64>, LatticeMap<f64>)> {
    let lat = lattice(cfg)?;
    let id = LatticeMap::identity(lat.clone());
    Ok(match &cfg.compactness.operator {
        OperatorConfig::Fio => {
            let ph = phase(&cfg.phase)?;
            let a = gabor_matrix(&FioOperator::new(symbol(cfg)?, ph), &system(cfg)?)?;
            let chi = discretize_chi(&CanonicalMap::new(ph), &lat, cfg.lattice.anchor)?;
            (a, chi.map)
        }
        OperatorConfig::Psdo { form } => {
            let op = PsdoOperator::new(&psdo_symbol(cfg, *form)?, cfg.grid.l, cfg.grid.n)?;
            (gabor_matrix(&op, &system(cfg)?)?, id)
        }
        OperatorConfig::Identity => (LatticeMatrix::identity(lat), id),
        OperatorConfig::DecayingDiagonal { power } => {
            let pts: Vec<Vec<f64>> = lat.points().collect();
            let a = LatticeMatrix::from_fn(lat, |mu, la| {
                if mu == la {
                    let r2: f64 = pts[la].iter().map(|v| v * v).sum();
                    Complex::new((1.0 + r2).powf(-power / 2.0), 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                }
            });
            (a, id)
        }
        OperatorConfig::FiniteRank { rank } => (finite_rank(&lat, *rank, cfg.seed), id),
    })
}

/// `Σ_k (k+1)^{−1} u_k u_k*` with Gaussian profiles `u_k` centred at seeded
/// points of the inner half of the section.
fn finite_rank(lat: &TruncatedLattice<f64>, rank: usize, seed: u64) -> LatticeMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = lat.points().collect();
    let half = lat.radius() / 2.0;
    let profiles: Vec<Vec<Complex<f64>>> = (0..rank)
        .map(|_| {
            let c: Vec<f64> = (0..pts[0].len())
                .map(|_| rng.random_range(-half..=half))
                .collect();
            let tilt = rng.random_range(-1.0..1.0);
            pts.iter()
                .map(|p| {
                    let r2: f64 = p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    Complex::from_polar((-std::f64::consts::PI * r2 / 2.0).exp(), tilt * p[0])
                })
                .collect()
        })
        .collect();
    LatticeMatrix::from_fn(lat.clone(), |mu, la| {
        profiles
            .iter()
            .enumerate()
            .map(|(k, u)| u[mu] * u[la].conj() / (k + 1) as f64)
            .sum()
    })
}

fn svals_rows(label: &str, oracle: &OracleReport<f64>) -> Vec<Vec<String>> {
    oracle
        .sections
        .iter()
        .flat_map(|s| {
            s.svals.iter().enumerate().map(move |(k, v)| {
                vec![
                    label.to_string(),
                    s.n.to_string(),
                    (k + 1).to_string(),
                    num(*v),
                ]
            })
        })
        .collect()
}

/// Diagonal tail diagnostic against the finite-section SVD oracle, with the
/// oracle repeated for every weight and the diagnostic combined with a shell
/// probe for every `(p, q, m)`.
pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<Value> {
    let cc = &cfg.compactness;
    let (a, psi) = operator_matrix(cfg)?;
    let opts = CompactnessOptions {
        theta: cfg.thresholds.theta,
        floor: cfg.thresholds.floor,
        v: weight(cfg.weights.v),
        seed: cfg.seed,
        ..CompactnessOptions::default()
    };
    let diag = compactness_diagnostic(&Diagonals::from_matrix(&a, &psi)?, &opts);
    let mut oracles = Vec::new();
    let mut probes = Vec::new();
    for &s in &cfg.weights.m {
        let m = weight(s);
        oracles.push((
            s,
            section_singular_values(&a, &cc.sections, &m, &psi, opts.theta)?,
        ));
        for &p in &cc.exponents {
            for &q in &cc.exponents {
                let probe = shell_probe(&a, &psi, p, q, &m, &opts)?;
                let combined = diag.clone().with_probe(probe.clone()).combined_verdict();
                probes.push((s, probe, combined));
            }
        }
    }
    let verdict = CompactnessVerdict::new(&diag, &oracles[0].1, cc.head);

    rec.csv(
        "per_gamma.csv",
        &["gamma", "sup", "phi", "tail", "pass"],
        diag.per_gamma.iter().map(|g| {
            let coords: Vec<String> = g.gamma.iter().map(|c| c.to_string()).collect();
            vec![
                coords.join(" "),
                num(g.tails[0]),
                num(g.phi),
                num(*g.tails.last().unwrap_or(&0.0)),
                g.pass.to_string(),
            ]
        }),
    )?;
    let mut rows = Vec::new();
    for (s, o) in &oracles {
        rows.extend(svals_rows(&s.to_string(), o));
    }
    rec.csv("svals.csv", &["m", "n", "k", "s"], rows)?;
    rec.csv(
        "probes.csv",
        &["m", "p", "q", "ratio", "pass", "verdict"],
        probes.iter().map(|(s, pr, v)| {
            vec![
                s.to_string(),
                pr.p.to_string(),
                pr.q.to_string(),
                num(pr.ratio),
                pr.pass.to_string(),
                serde_json::to_value(v)
                    .map(|x| x.as_str().unwrap_or("").to_string())
                    .unwrap_or_default(),
            ]
        }),
    )?;
    if rec.write_bin {
        rec.file("matrix.bin", |w| a.write_bin(w))?;
    }

    let stable_oracle = oracles
        .iter()
        .all(|(_, o)| o.verdict == oracles[0].1.verdict);
    let stable_diag = probes.iter().all(|(_, _, v)| *v == diag.verdict);
    if cc.require_agreement {
        rec.check(
            "diagnostic agrees with oracle",
            [diag.verdict, oracles[0].1.verdict],
            "equal verdicts",
            diag.verdict == oracles[0].1.verdict,
        );
    }
    rec.check(
        "oracle verdict independent of m",
        oracles.iter().map(|(_, o)| o.verdict).collect::<Vec<_>>(),
        "one verdict",
        stable_oracle,
    );
    rec.check(
        "diagnostic verdict independent of (p, q, m)",
        probes.iter().filter(|(_, _, v)| *v != diag.verdict).count(),
        "== 0 changes",
        stable_diag,
    );
    if let Some(expect) = cc.expect {
        rec.check(
            "expected verdict",
            diag.verdict,
            serde_json::to_value(expect)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            diag.verdict == expect,
        );
    }
    Ok(json!({
        "lattice_points": a.dim(),
        "psi_identity": psi.is_identity(),
        "fiber_bound": psi.fiber_bound(),
        "judged_diagonals": diag.judged,
        "diagnostic": {"verdict": diag.verdict, "worst_ratio": diag.worst_ratio(), "radii": diag.radii},
        "oracles": oracles.iter().map(|(s, o)| json!({
            "m": s,
            "verdict": o.verdict,
            "ranks": o.ranks,
            "rank_growth": o.rank_growth,
            "s1_drift": o.s1_drift,
        })).collect::<Vec<_>>(),
        "verdict": verdict,
    }))
}
