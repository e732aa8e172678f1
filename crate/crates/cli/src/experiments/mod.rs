use std::fs::File;
use std::io::BufReader;

use num_complex::Complex;
use serde_json::Value;

use tflab::fio::{QuadraticPhase, Symbol};
use tflab::gabor::GaborSystem;
use tflab::lattice::{TruncatedLattice, WeightSpec};
use tflab::psdo::{PsdoSymbol, SymbolForm};
use tflab::tf::{gaussian, SampledSignal};
use tflab::{Error, Result};

use crate::config::{Experiment, ExperimentConfig, PhaseConfig, SymbolConfig, WindowKind};
use crate::report::Recorder;

mod compactness;
mod decay;
mod frames;
mod mixed;
mod psdo;
mod twopath;

pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<Value> {
    match cfg.experiment {
        Experiment::Frames => frames::run(cfg, rec),
        Experiment::Decay => decay::run(cfg, rec),
        Experiment::Twopath => twopath::run(cfg, rec),
        Experiment::Compactness => compactness::run(cfg, rec),
        Experiment::Psdo => psdo::run(cfg, rec),
        Experiment::Mixed => mixed::run(cfg, rec),
    }
}

pub(crate) fn lattice(cfg: &ExperimentConfig) -> Result<TruncatedLattice<f64>> {
    TruncatedLattice::build(
        cfg.lattice.alpha,
        cfg.lattice.beta,
        cfg.grid.d,
        cfg.lattice.radius,
    )
}

pub(crate) fn window(cfg: &ExperimentConfig) -> Result<SampledSignal<f64>> {
    gaussian(cfg.grid.d, cfg.grid.l, cfg.grid.n, cfg.window.width)
}

pub(crate) fn system(cfg: &ExperimentConfig) -> Result<GaborSystem<f64>> {
    let sys = GaborSystem::new(window(cfg)?, lattice(cfg)?)?;
    match cfg.window.kind {
        WindowKind::Gaussian => Ok(sys),
        WindowKind::TightGaussian => {
            let t = sys.tight_window()?;
            sys.with_window(t)
        }
    }
}

pub(crate) fn phase(p: &PhaseConfig) -> Result<QuadraticPhase<f64>> {
    match *p {
        PhaseConfig::Identity => Ok(QuadraticPhase::standard()),
        PhaseConfig::Chirp => Ok(QuadraticPhase::chirp()),
        PhaseConfig::Quadratic { a, b, c, x0, eta0 } => QuadraticPhase::new(a, b, c, x0, eta0),
    }
}

pub(crate) fn weight(s: f64) -> WeightSpec<f64> {
    if s == 0.0 {
        WeightSpec::one()
    } else {
        WeightSpec::polynomial(s)
    }
}

fn read_sampled(path: &std::path::Path) -> Result<SampledSignal<f64>> {
    let sig = SampledSignal::read_bin(BufReader::new(File::open(path)?))?;
    if sig.d() != 2 {
        return Err(Error::Parameter(format!(
            "sampled symbol {} must be two-dimensional, found d = {}",
            path.display(),
            sig.d()
        )));
    }
    Ok(sig)
}

/// Bilinear interpolation of a sampled symbol, zero outside the grid box.
fn interpolate(sig: SampledSignal<f64>) -> Symbol<f64> {
    Symbol::custom(move |x, eta| {
        let n = sig.n();
        let h = sig.dx();
        let half = (n / 2) as f64;
        let (qx, qe) = (x / h + half, eta / h + half);
        if qx < 0.0 || qe < 0.0 || qx > (n - 1) as f64 || qe > (n - 1) as f64 {
            return Complex::new(0.0, 0.0);
        }
        let (i, j) = (qx.floor() as usize, qe.floor() as usize);
        let (i1, j1) = ((i + 1).min(n - 1), (j + 1).min(n - 1));
        let (fx, fe) = (qx - i as f64, qe - j as f64);
        let at = |a: usize, b: usize| sig.data()[sig.flat_index(&[a, b])];
        at(i, j) * ((1.0 - fx) * (1.0 - fe))
            + at(i1, j) * (fx * (1.0 - fe))
            + at(i, j1) * ((1.0 - fx) * fe)
            + at(i1, j1) * (fx * fe)
    })
}

pub(crate) fn symbol(cfg: &ExperimentConfig) -> Result<Symbol<f64>> {
    Ok(match &cfg.symbol {
        SymbolConfig::One => Symbol::one(),
        SymbolConfig::Constant { re, im } => Symbol::Constant(Complex::new(*re, *im)),
        SymbolConfig::GaussianBump { center, width } => Symbol::Gaussian {
            center: *center,
            width: *width,
        },
        SymbolConfig::CutoffGaussian {
            center,
            width,
            radius,
        } => Symbol::CutoffGaussian {
            center: *center,
            width: *width,
            radius: *radius,
        },
        SymbolConfig::Bump { center, radius } => Symbol::Bump {
            center: *center,
            radius: *radius,
        },
        SymbolConfig::SmoothBox { half_width, ramp } => Symbol::SmoothBox {
            half_width: *half_width,
            ramp: *ramp,
        },
        SymbolConfig::Multiplier { decay } => {
            let s = *decay;
            Symbol::multiplier(move |eta: f64| Complex::new((1.0 + eta * eta).powf(-s / 2.0), 0.0))
        }
        SymbolConfig::Sampled { path } => interpolate(read_sampled(path)?),
    })
}

/// PSDO symbol in the requested form; sampled files stay sampled.
pub(crate) fn psdo_symbol(cfg: &ExperimentConfig, form: SymbolForm) -> Result<PsdoSymbol<f64>> {
    match &cfg.symbol {
        SymbolConfig::Sampled { path } => PsdoSymbol::sampled(form, read_sampled(path)?),
        _ => {
            let s = symbol(cfg)?;
            Ok(match form {
                SymbolForm::Kn => PsdoSymbol::kn(s),
                SymbolForm::Weyl => PsdoSymbol::weyl(s),
            })
        }
    }
}

pub(crate) fn random_vec(n: usize, rng: &mut impl rand::Rng) -> Vec<Complex<f64>> {
    (0..n)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}
