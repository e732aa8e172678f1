use serde_json::{json, Value};

use tflab::fio::{
    compare_moduli, gabor_matrix, gabor_matrix_quadratic_stft, FioOperator, GaussianWindow,
    StftQuadrature,
};
use tflab::Result;

use super::{lattice, phase, symbol, system};
use crate::config::ExperimentConfig;
use crate::report::{num, Recorder};

/// Gabor matrix by quadrature of the operator against its modulus through
/// the short-time Fourier transform of the symbol.
pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<Value> {
    let sys = system(cfg)?;
    let lat = lattice(cfg)?;
    let ph = phase(&cfg.phase)?;
    let sigma = symbol(cfg)?;
    let quad = gabor_matrix(&FioOperator::new(sigma.clone(), ph), &sys)?;
    let rule = StftQuadrature {
        h: cfg.twopath.quadrature_step,
        radius: cfg.twopath.quadrature_radius,
    };
    let stft = gabor_matrix_quadratic_stft(
        &sigma,
        &ph,
        &GaussianWindow::new(cfg.window.width),
        &lat,
        &rule,
    )?;
    let threshold = cfg.thresholds.match_threshold;
    let report = compare_moduli(&quad, &stft, threshold)?;
    let pts: Vec<Vec<f64>> = lat.points().collect();
    let mut rows = Vec::new();
    for (la, pl) in pts.iter().enumerate() {
        for (mu, pm) in pts.iter().enumerate() {
            let (a, b) = (quad.get(mu, la).norm(), stft.get(mu, la).norm());
            if a >= threshold {
                rows.push(vec![
                    num(pl[0]),
                    num(pl[1]),
                    num(pm[0]),
                    num(pm[1]),
                    num(a),
                    num(b),
                    num((a - b).abs() / a),
                ]);
            }
        }
    }
    rec.csv(
        "twopath.csv",
        &[
            "lambda0",
            "lambda1",
            "mu0",
            "mu1",
            "quadrature",
            "stft",
            "rel_dev",
        ],
        rows,
    )?;
    if rec.write_bin {
        rec.file("quadrature.bin", |w| quad.write_bin(w))?;
        rec.file("stft.bin", |w| stft.write_bin(w))?;
    }
    rec.check(
        "entries compared",
        report.compared,
        "> 0",
        report.compared > 0,
    );
    rec.at_most(
        "max relative deviation",
        report.max_rel_dev,
        cfg.twopath.tol,
    );
    Ok(json!({
        "lattice_points": lat.len(),
        "comparison": report,
    }))
}
