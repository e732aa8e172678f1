use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tflab::tf::random_gaussian_mixture;
use tflab::Result;

use super::system;
use crate::config::ExperimentConfig;
use crate::report::{num, Recorder};

/// Frame bounds, canonical dual window and reconstruction of seeded random
/// signals whose boundary mass is below `frames.max_tail`.
pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<Value> {
    let fc = &cfg.frames;
    let sys = system(cfg)?;
    let bounds = sys.frame_bounds(fc.bound_trials)?;
    let (h, solve) = sys.dual_window()?;
    let dual = sys.with_window(h.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut drawn = 0usize;
    while rows.len() < fc.signals && drawn < 50 * fc.signals {
        drawn += 1;
        let f = random_gaussian_mixture(
            cfg.grid.d, cfg.grid.l, cfg.grid.n, fc.atoms, fc.spread, &mut rng,
        )?;
        let tail = f.tail_indicator();
        if tail > fc.max_tail {
            continue;
        }
        let err = sys.reconstruct(&dual, &f)?.sub(&f)?.norm() / f.norm();
        worst = worst.max(err);
        rows.push(vec![rows.len().to_string(), num(tail), num(err)]);
    }
    let used = rows.len();
    rec.file("dual_window.csv", |w| h.write_csv(w))?;
    if rec.write_bin {
        rec.file("dual_window.bin", |w| h.write_bin(w))?;
    }
    rec.csv("reconstruction.csv", &["signal", "tail", "rel_err"], rows)?;
    rec.check("frame lower bound", bounds.a, "> 0", bounds.a > 0.0);
    rec.check(
        "grid-resolved signals",
        used,
        format!("== {}", fc.signals),
        used == fc.signals,
    );
    rec.at_most("max reconstruction error", worst, fc.tol);
    Ok(json!({
        "frame_bounds": bounds,
        "dual_solve": solve,
        "lattice_points": sys.lattice().len(),
        "distinct_atoms": sys.distinct_atoms(),
        "reconstruction": {"signals": used, "drawn": drawn, "max_rel_err": worst},
    }))
}
