use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tflab::fio::{discretize_chi, CanonicalMap, QuadraticPhase};
use tflab::lattice::{lpq_norm, TruncatedLattice};
use tflab::Result;

use super::{lattice, phase, random_vec};
use crate::config::ExperimentConfig;
use crate::report::{num, Recorder};

/// Admissibility of `χ′` for the configured phases, `J_ψ` mixed-norm ratios
/// against their bound, and rejection of the chirp map.
pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<Value> {
    let mc = &cfg.mixed;
    let lat = lattice(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adm_rows = Vec::new();
    let mut j_rows = Vec::new();
    let mut per_phase = Vec::new();
    let mut missed = Vec::new();
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for (i, pc) in mc.phases.iter().enumerate() {
        let ph = phase(pc)?;
        let psi = discretize_chi(&CanonicalMap::new(ph), &lat, cfg.lattice.anchor)?.map;
        match psi.admissibility_decompose(mc.cap) {
            Ok(adm) => {
                adm_rows.push(row(i, &ph, true, adm.k_set.len(), adm.m, adm.m1));
                for &p in &mc.exponents {
                    for &q in &mc.exponents {
                        let bound = adm.j_psi_bound(p, q);
                        let mut top = 0.0f64;
                        for _ in 0..mc.sequences {
                            let x = random_vec(lat.len(), &mut rng);
                            let r = lpq_norm(&psi.apply_j(&x), &lat, p, q, None)?
                                / lpq_norm(&x, &lat, p, q, None)?;
                            top = top.max(r);
                            if r > bound * (1.0 + 1e-12) {
                                violations += 1;
                            }
                        }
                        worst = worst.max(top / bound);
                        j_rows.push(vec![
                            i.to_string(),
                            p.to_string(),
                            q.to_string(),
                            num(top),
                            num(bound),
                        ]);
                    }
                }
                per_phase.push(json!({"phase": ph, "admissible": true, "k": adm.k_set.len(), "m": adm.m, "m1": adm.m1}));
            }
            Err(e) => {
                if ph.a == 0.0 {
                    missed.push(i);
                }
                adm_rows.push(row(i, &ph, false, 0, 0, 0));
                per_phase.push(json!({"phase": ph, "admissible": false, "reason": e.to_string()}));
            }
        }
    }
    let mut counter = Vec::new();
    for &r in &mc.counterexample_radii {
        let big = TruncatedLattice::build(cfg.lattice.alpha, cfg.lattice.beta, 1, r)?;
        let psi = discretize_chi(
            &CanonicalMap::new(QuadraticPhase::chirp()),
            &big,
            cfg.lattice.anchor,
        )?
        .map;
        let outcome = psi.admissibility_decompose(mc.cap);
        counter.push(json!({
            "radius": r,
            "rejected": outcome.is_err(),
            "reason": outcome.err().map(|e| e.to_string()),
        }));
    }
    rec.csv(
        "admissibility.csv",
        &[
            "phase",
            "a",
            "b",
            "c",
            "x0",
            "eta0",
            "admissible",
            "k",
            "m",
            "m1",
        ],
        adm_rows,
    )?;
    rec.csv(
        "jpsi.csv",
        &["phase", "p", "q", "max_ratio", "bound"],
        j_rows,
    )?;

    rec.check(
        "a = 0 phases admissible",
        &missed,
        "no phase index listed",
        missed.is_empty(),
    );
    let not_rejected: Vec<f64> = mc
        .counterexample_radii
        .iter()
        .zip(&counter)
        .filter(|(_, c)| c["rejected"] != json!(true))
        .map(|(r, _)| *r)
        .collect();
    rec.check(
        "chirp map rejected",
        &not_rejected,
        "no radius listed",
        not_rejected.is_empty(),
    );
    rec.check(
        "J_psi ratios within bound",
        violations,
        "== 0 violations",
        violations == 0,
    );
    Ok(json!({
        "cap": mc.cap,
        "phases": per_phase,
        "counterexample": counter,
        "largest_ratio_over_bound": worst,
    }))
}

fn row(i: usize, ph: &QuadraticPhase<f64>, ok: bool, k: usize, m: usize, m1: usize) -> Vec<String> {
    vec![
        i.to_string(),
        num(ph.a),
        num(ph.b),
        num(ph.c),
        num(ph.x0),
        num(ph.eta0),
        ok.to_string(),
        k.to_string(),
        m.to_string(),
        m1.to_string(),
    ]
}
