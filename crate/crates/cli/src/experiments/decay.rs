use serde_json::{json, Value};

use tflab::fio::{decay_fit, gabor_matrix, CanonicalMap, FioOperator};
use tflab::Result;

use super::{phase, symbol, system};
use crate::config::ExperimentConfig;
use crate::report::{num, Recorder};

/// Gabor matrix of the configured FIO and the envelope of `|M_{μ,λ}|`
/// against `⟨χ(λ) − μ⟩`.
pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<Value> {
    let sys = system(cfg)?;
    let ph = phase(&cfg.phase)?;
    let m = gabor_matrix(&FioOperator::new(symbol(cfg)?, ph), &sys)?;
    let chi = CanonicalMap::new(ph);
    let fit = decay_fit(&m, &chi, cfg.thresholds.noise_floor)?;
    rec.csv(
        "buckets.csv",
        &["lo", "hi", "count", "envelope"],
        fit.buckets
            .iter()
            .map(|b| vec![num(b.lo), num(b.hi), b.count.to_string(), num(b.envelope)]),
    )?;
    let image = |p: &[f64]| {
        chi.apply(p[0], p[1])
            .map_or(vec![f64::NAN; 2], |(x, xi)| vec![x, xi])
    };
    rec.file("matrix.csv", |w| {
        m.write_csv(w, &image, cfg.thresholds.match_threshold)
    })?;
    if rec.write_bin {
        rec.file("matrix.bin", |w| m.write_bin(w))?;
    }
    rec.at_least("fitted decay exponent", fit.s_fit, cfg.decay.min_s);
    rec.check(
        "envelope constant finite",
        fit.c_envelope,
        "finite",
        fit.c_envelope.is_finite(),
    );
    rec.check("envelope monotone", fit.monotone, "true", fit.monotone);
    Ok(json!({
        "lattice_points": sys.lattice().len(),
        "max_abs": m.max_abs(),
        "fit": fit,
    }))
}
