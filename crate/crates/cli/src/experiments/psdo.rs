use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tflab::fio::gabor_matrix;
use tflab::lattice::{Coords, LatticeMap};
use tflab::psdo::{apply_psdo, convert_form, weyl_gabor_identity_check, PsdoOperator, SymbolForm};
use tflab::seqops::{
    compactness_diagnostic, section_singular_values, CompactnessOptions, Diagonals,
};
use tflab::tf::random_gaussian_mixture;
use tflab::Result;

use super::{psdo_symbol, system, weight};
use crate::config::ExperimentConfig;
use crate::report::{num, Recorder};

/// Weyl–STFT identity on seeded lattice pairs, the Weyl to Kohn–Nirenberg
/// round trip, and the compactness verdict of the Gabor matrix for every
/// configured weight.
pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<Value> {
    let pc = &cfg.psdo;
    let (l, n) = (cfg.grid.l, cfg.grid.n);
    let sys = system(cfg)?;
    let sym = psdo_symbol(cfg, SymbolForm::Weyl)?;
    let lat = sys.lattice().clone();
    let (_, fb) = lat.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs: Vec<(Coords, Coords)> = Vec::with_capacity(pc.pairs);
    while pairs.len() < pc.pairs {
        let la: Coords = (0..2).map(|_| rng.random_range(-fb..=fb)).collect();
        let mu: Coords = (0..2)
            .map(|_| rng.random_range(-pc.max_shift..=pc.max_shift))
            .collect();
        if la.iter().zip(&mu).all(|(a, b)| (a + b).abs() <= fb) {
            pairs.push((la, mu));
        }
    }
    let identity = weyl_gabor_identity_check(&sym, &sys, &pairs)?;

    let conversion = if (l * l - n as f64).abs() < 1e-9 {
        let kn = convert_form(&sym, SymbolForm::Kn, l, n)?;
        let f = random_gaussian_mixture(1, l, n, 3, 2.0, &mut rng)?;
        let a = apply_psdo(&sym, &f)?;
        let b = apply_psdo(&kn, &f)?;
        Some(a.sub(&b)?.norm() / a.norm().max(f64::MIN_POSITIVE))
    } else {
        None
    };

    let a = gabor_matrix(&PsdoOperator::new(&sym, l, n)?, &sys)?;
    let psi = LatticeMap::identity(lat);
    let opts = CompactnessOptions {
        theta: cfg.thresholds.theta,
        floor: cfg.thresholds.floor,
        seed: cfg.seed,
        ..CompactnessOptions::default()
    };
    let diag = compactness_diagnostic(&Diagonals::from_matrix(&a, &psi)?, &opts);
    let mut oracles = Vec::new();
    for &s in &cfg.weights.m {
        oracles.push((
            s,
            section_singular_values(&a, &pc.sections, &weight(s), &psi, opts.theta)?,
        ));
    }
    rec.csv(
        "oracle.csv",
        &["m", "n", "rank", "s1"],
        oracles.iter().flat_map(|(s, o)| {
            o.sections.iter().zip(&o.ranks).map(move |(sec, r)| {
                vec![
                    s.to_string(),
                    sec.n.to_string(),
                    r.to_string(),
                    num(sec.svals[0]),
                ]
            })
        }),
    )?;
    if rec.write_bin {
        rec.file("matrix.bin", |w| a.write_bin(w))?;
    }

    rec.check(
        "pairs compared",
        identity.compared,
        "> 0",
        identity.compared > 0,
    );
    rec.at_most("weyl-stft identity deviation", identity.max_dev, pc.tol);
    if let Some(dev) = conversion {
        rec.at_most("weyl to kohn-nirenberg round trip", dev, pc.conversion_tol);
    }
    let verdicts: Vec<_> = oracles.iter().map(|(_, o)| o.verdict).collect();
    rec.check(
        "oracle verdict independent of m",
        &verdicts,
        "one verdict",
        verdicts.iter().all(|v| *v == verdicts[0]),
    );
    rec.check(
        "diagnostic agrees with oracle",
        [diag.verdict, verdicts[0]],
        "equal verdicts",
        diag.verdict == verdicts[0],
    );
    Ok(json!({
        "identity": identity,
        "conversion_rel_dev": conversion,
        "diagnostic_verdict": diag.verdict,
        "oracles": oracles.iter().map(|(s, o)| json!({
            "m": s,
            "verdict": o.verdict,
            "ranks": o.ranks,
            "rank_growth": o.rank_growth,
        })).collect::<Vec<_>>(),
    }))
}
