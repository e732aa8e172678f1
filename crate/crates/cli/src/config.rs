use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use tflab::lattice::{DomainAnchor, Exponent};
use tflab::psdo::SymbolForm;
use tflab::seqops::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Frame bounds, canonical dual window and reconstruction.
    Frames,
    /// Gabor matrix of an FIO and its off-diagonal decay fit.
    Decay,
    /// Quadrature against STFT route for the Gabor matrix of an FIO.
    Twopath,
    /// Diagonal tail diagnostic, section SVD oracle and (p, q, m) sweep.
    Compactness,
    /// Weyl–STFT identity and weight independence of compactness for a PSDO.
    Psdo,
    /// Admissibility of lattice maps and `J_ψ` mixed-norm ratios.
    Mixed,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Frames => "frames",
            Self::Decay => "decay",
            Self::Twopath => "twopath",
            Self::Compactness => "compactness",
            Self::Psdo => "psdo",
            Self::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    /// Side length `L` of the periodic box.
    pub l: f64,
    /// Samples per axis; even.
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub alpha: f64,
    pub beta: f64,
    pub radius: f64,
    pub anchor: DomainAnchor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    Gaussian,
    /// Canonical tight window `S^{−1/2}g` of the Gaussian.
    TightGaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub kind: WindowKind,
    pub width: f64,
}

/// `Φ(x, η) = ½a x² + b xη + ½c η² + η₀x − x₀η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseConfig {
    /// `Φ = xη`
    Identity,
    /// `Φ = xη + x²/2`
    Chirp,
    Quadratic {
        a: f64,
        b: f64,
        c: f64,
        x0: f64,
        eta0: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolConfig {
    One,
    Constant {
        re: f64,
        im: f64,
    },
    GaussianBump {
        center: [f64; 2],
        width: f64,
    },
    /// Gaussian times a smooth cutoff; compactly supported.
    CutoffGaussian {
        center: [f64; 2],
        width: f64,
        radius: f64,
    },
    Bump {
        center: [f64; 2],
        radius: f64,
    },
    SmoothBox {
        half_width: f64,
        ramp: f64,
    },
    /// `⟨η⟩^{−decay}`
    Multiplier {
        decay: f64,
    },
    /// Two-dimensional signal in the binary signal format.
    Sampled {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Relative tail threshold of the compactness and `M⁰` tests.
    pub theta: f64,
    /// Diagonal significance floor, relative to the largest diagonal.
    pub floor: f64,
    /// Absolute floor below which matrix entries are ignored by fits.
    pub noise_floor: f64,
    /// Entries below this modulus are not compared or written.
    pub match_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// `s` of the submultiplicative weight `v_s`.
    pub v: f64,
    /// `s` values of the moderate weights swept; 0 is `m ≡ 1`.
    pub m: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write matrices and windows in binary form.
    pub write_bin: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramesConfig {
    pub signals: usize,
    /// Gaussian atoms per random signal.
    pub atoms: usize,
    /// Atom positions and frequencies are drawn from `[−spread, spread]`.
    pub spread: f64,
    pub max_tail: f64,
    pub tol: f64,
    pub bound_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub min_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwopathConfig {
    pub tol: f64,
    pub quadrature_step: f64,
    /// Half-width of the integration box in window widths.
    pub quadrature_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorConfig {
    /// FIO with the configured phase and symbol; `ψ = χ′`.
    Fio,
    /// Pseudodifferential operator of the configured symbol; `ψ = id`.
    Psdo {
        form: SymbolForm,
    },
    Identity,
    /// `diag ⟨λ⟩^{−power}`
    DecayingDiagonal {
        power: f64,
    },
    /// Sum of Gaussian outer products at seeded lattice points.
    FiniteRank {
        rank: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactnessConfig {
    pub operator: OperatorConfig,
    /// Oracle section diameters in lattice steps, increasing.
    pub sections: Vec<usize>,
    pub exponents: Vec<Exponent>,
    pub expect: Option<Verdict>,
    pub require_agreement: bool,
    pub head: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdoConfig {
    pub pairs: usize,
    /// Largest `|μ|_∞` in lattice steps.
    pub max_shift: i64,
    pub tol: f64,
    pub sections: Vec<usize>,
    /// Tolerance of the Weyl to Kohn–Nirenberg round trip; skipped unless `L² = N`.
    pub conversion_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedConfig {
    pub phases: Vec<PhaseConfig>,
    pub cap: usize,
    /// Radii at which the chirp map must be rejected.
    pub counterexample_radii: Vec<f64>,
    pub sequences: usize,
    pub exponents: Vec<Exponent>,
}

/// A complete experiment description. Missing fields in a config file take
/// the defaults of the selected experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "_notes", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
    pub experiment: Experiment,
    pub grid: GridConfig,
    pub lattice: LatticeConfig,
    pub window: WindowConfig,
    pub phase: PhaseConfig,
    pub symbol: SymbolConfig,
    pub thresholds: Thresholds,
    pub weights: WeightsConfig,
    pub output: OutputConfig,
    pub seed: u64,
    /// Worker thread cap; `null` uses every core.
    pub threads: Option<usize>,
    pub frames: FramesConfig,
    pub decay: DecayConfig,
    pub twopath: TwopathConfig,
    pub compactness: CompactnessConfig,
    pub psdo: PsdoConfig,
    pub mixed: MixedConfig,
}

fn exps() -> Vec<Exponent> {
    vec![
        Exponent::Finite(1.0),
        Exponent::Finite(2.0),
        Exponent::Infinity,
    ]
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = Self {
            notes: BTreeMap::new(),
            experiment,
            grid: GridConfig {
                d: 1,
                l: 16.0,
                n: 512,
            },
            lattice: LatticeConfig {
                alpha: 0.5,
                beta: 0.5,
                radius: 5.0,
                anchor: DomainAnchor::Centered,
            },
            window: WindowConfig {
                kind: WindowKind::Gaussian,
                width: 1.0,
            },
            phase: PhaseConfig::Chirp,
            symbol: SymbolConfig::GaussianBump {
                center: [0.0, 0.0],
                width: 1.5,
            },
            thresholds: Thresholds {
                theta: 1e-3,
                floor: 1e-3,
                noise_floor: 1e-12,
                match_threshold: 1e-8,
            },
            weights: WeightsConfig {
                v: 2.0,
                m: vec![0.0, 1.0],
            },
            output: OutputConfig {
                dir: PathBuf::from(format!("out/{}", experiment.name())),
                write_bin: false,
            },
            seed: 1,
            threads: None,
            frames: FramesConfig {
                signals: 20,
                atoms: 4,
                spread: 1.5,
                max_tail: 1e-8,
                tol: 1e-6,
                bound_trials: 2,
            },
            decay: DecayConfig { min_s: 4.0 },
            twopath: TwopathConfig {
                tol: 1e-3,
                quadrature_step: 1.0 / 16.0,
                quadrature_radius: 4.5,
            },
            compactness: CompactnessConfig {
                operator: OperatorConfig::Fio,
                sections: vec![5, 10, 15, 20],
                exponents: exps(),
                expect: Some(Verdict::CompactConsistent),
                require_agreement: true,
                head: 10,
            },
            psdo: PsdoConfig {
                pairs: 200,
                max_shift: 4,
                tol: 1e-3,
                sections: vec![5, 10, 15, 20],
                conversion_tol: 1e-8,
            },
            mixed: MixedConfig {
                phases: vec![
                    PhaseConfig::Identity,
                    PhaseConfig::Quadratic {
                        a: 0.0,
                        b: 2.0,
                        c: 0.5,
                        x0: 0.25,
                        eta0: -0.5,
                    },
                    PhaseConfig::Quadratic {
                        a: 0.0,
                        b: -0.7,
                        c: 1.3,
                        x0: 0.0,
                        eta0: 0.3,
                    },
                ],
                cap: 9,
                counterexample_radii: vec![5.0, 6.0],
                sequences: 100,
                exponents: exps(),
            },
        };
        match experiment {
            Experiment::Frames => {
                // the section wraps the torus exactly once per seam
                cfg.grid = GridConfig {
                    d: 1,
                    l: 10.0,
                    n: 100,
                };
            }
            Experiment::Twopath => {
                cfg.symbol = SymbolConfig::GaussianBump {
                    center: [0.5, -0.25],
                    width: 2.0,
                };
            }
            Experiment::Compactness => {
                cfg.symbol = SymbolConfig::CutoffGaussian {
                    center: [0.0, 0.0],
                    width: 1.0,
                    radius: 5.0,
                };
            }
            Experiment::Psdo => {
                cfg.grid = GridConfig {
                    d: 1,
                    l: 16.0,
                    n: 256,
                };
                cfg.symbol = SymbolConfig::GaussianBump {
                    center: [0.25, -0.5],
                    width: 1.5,
                };
            }
            Experiment::Decay | Experiment::Mixed => {}
        }
        cfg
    }

    /// Defaults with a note per section, as printed by `--emit-defaults`.
    pub fn annotated_defaults(experiment: Experiment) -> Self {
        let mut cfg = Self::defaults(experiment);
        let notes = [
            ("experiment", "frames | decay | twopath | compactness | psdo | mixed"),
            ("grid", "periodic grid: dimension d, side length l, n samples per axis (even)"),
            ("lattice", "alpha Z^d x beta Z^d truncated to |lambda|_inf <= radius; anchor: centered | corner"),
            ("window", "kind: gaussian | tight-gaussian; width w of exp(-pi t^2 / w^2)"),
            ("phase", "preset: identity | chirp | quadratic {a, b, c, x0, eta0}"),
            (
                "symbol",
                "preset: one | constant | gaussian-bump | cutoff-gaussian | bump | smooth-box | multiplier | sampled {path}",
            ),
            ("thresholds", "theta: tail ratio; floor: relative diagonal significance; noise_floor: fit floor; match_threshold: comparison floor"),
            ("weights", "v: s of v_s; m: s values of the swept weights (0 is m = 1)"),
            ("output", "dir: report directory; write_bin: also write binary matrices"),
            ("seed", "seed of every randomized step"),
            ("threads", "worker cap, null for all cores"),
            ("compactness", "operator kind: fio | psdo {form} | identity | decaying-diagonal {power} | finite-rank {rank}; expect: compact-consistent | non-compact | inconclusive | null"),
            ("mixed", "phases checked for admissibility; the chirp map is checked for rejection at counterexample_radii"),
        ];
        cfg.notes = notes
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        cfg
    }

    /// Defaults of `experiment` overlaid with the fields present in `doc`.
    pub fn from_value(experiment: Experiment, doc: Value) -> Result<Self, Vec<String>> {
        let mut base =
            serde_json::to_value(Self::defaults(experiment)).expect("defaults serialize");
        if !doc.is_object() {
            return Err(vec!["config must be a JSON object".into()]);
        }
        merge(&mut base, doc);
        base["experiment"] = Value::String(experiment.name().into());
        let mut cfg: Self = serde_json::from_value(base).map_err(|e| vec![e.to_string()])?;
        cfg.notes.clear();
        let problems = cfg.validate();
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(problems)
        }
    }

    pub fn from_file(experiment: Experiment, path: &Path) -> Result<Self, Vec<String>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
        let doc: Value =
            serde_json::from_str(&text).map_err(|e| vec![format!("{}: {e}", path.display())])?;
        Self::from_value(experiment, doc)
    }

    /// Every violated range or missing file, in field order.
    pub fn validate(&self) -> Vec<String> {
        let mut p = Vec::new();
        let mut need = |ok: bool, msg: &str| {
            if !ok {
                p.push(msg.to_string());
            }
        };
        let g = &self.grid;
        need(g.d >= 1, "grid.d must be at least 1");
        need(g.l.is_finite() && g.l > 0.0, "grid.l must be positive");
        need(
            g.n >= 2 && g.n.is_multiple_of(2),
            "grid.n must be even and at least 2",
        );
        let lat = &self.lattice;
        need(
            lat.alpha.is_finite() && lat.alpha > 0.0,
            "lattice.alpha must be positive",
        );
        need(
            lat.beta.is_finite() && lat.beta > 0.0,
            "lattice.beta must be positive",
        );
        need(
            lat.radius.is_finite() && lat.radius >= 0.0,
            "lattice.radius must be nonnegative",
        );
        need(
            self.window.width.is_finite() && self.window.width > 0.0,
            "window.width must be positive",
        );
        let t = &self.thresholds;
        for (v, name) in [
            (t.theta, "thresholds.theta"),
            (t.floor, "thresholds.floor"),
            (t.noise_floor, "thresholds.noise_floor"),
            (t.match_threshold, "thresholds.match_threshold"),
        ] {
            need(
                v.is_finite() && v > 0.0 && v < 1.0,
                &format!("{name} must lie in (0, 1)"),
            );
        }
        need(self.weights.v >= 0.0, "weights.v must be nonnegative");
        need(
            self.weights.m.iter().all(|s| s.abs() <= self.weights.v),
            "weights.m must satisfy |s| <= weights.v so that every m is v-moderate",
        );
        need(
            !self.weights.m.is_empty(),
            "weights.m must list at least one weight",
        );
        need(self.threads != Some(0), "threads must be positive");
        if let PhaseConfig::Quadratic { a, b, c, x0, eta0 } = &self.phase {
            need(
                [a, b, c, x0, eta0].iter().all(|v| v.is_finite()),
                "phase coefficients must be finite",
            );
            need(*b != 0.0, "phase.b must be nonzero");
        }
        for (i, ph) in self.mixed.phases.iter().enumerate() {
            if let PhaseConfig::Quadratic { b, .. } = ph {
                need(*b != 0.0, &format!("mixed.phases[{i}].b must be nonzero"));
            }
        }
        match &self.symbol {
            SymbolConfig::Sampled { path } => need(
                path.is_file(),
                &format!("symbol file {} does not exist", path.display()),
            ),
            SymbolConfig::GaussianBump { width, .. }
            | SymbolConfig::CutoffGaussian { width, .. } => {
                need(*width > 0.0, "symbol.width must be positive")
            }
            SymbolConfig::Bump { radius, .. } => {
                need(*radius > 0.0, "symbol.radius must be positive")
            }
            SymbolConfig::SmoothBox { half_width, ramp } => need(
                *half_width >= 0.0 && *ramp > 0.0,
                "symbol.half_width must be nonnegative and symbol.ramp positive",
            ),
            _ => {}
        }
        let increasing = |v: &[usize]| !v.is_empty() && v.windows(2).all(|w| w[0] < w[1]);
        need(
            increasing(&self.compactness.sections),
            "compactness.sections must be nonempty and increasing",
        );
        need(
            increasing(&self.psdo.sections),
            "psdo.sections must be nonempty and increasing",
        );
        need(
            !self.compactness.exponents.is_empty(),
            "compactness.exponents must be nonempty",
        );
        need(
            !self.mixed.exponents.is_empty(),
            "mixed.exponents must be nonempty",
        );
        need(self.frames.signals > 0, "frames.signals must be positive");
        need(self.psdo.pairs > 0, "psdo.pairs must be positive");
        need(
            self.twopath.quadrature_step > 0.0,
            "twopath.quadrature_step must be positive",
        );
        need(
            self.twopath.quadrature_radius > 0.0,
            "twopath.quadrature_radius must be positive",
        );
        let one_d = !matches!(self.experiment, Experiment::Frames);
        need(
            !one_d || g.d == 1,
            "this experiment is implemented for grid.d = 1",
        );
        if matches!(self.experiment, Experiment::Twopath) {
            need(
                self.window.kind == WindowKind::Gaussian,
                "twopath needs the gaussian window",
            );
        }
        p
    }

    /// The configuration as hashed and embedded in reports: notes, output
    /// directory and thread cap do not affect results and are left out.
    pub fn canonical(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("object");
        obj.remove("_notes");
        obj.remove("threads");
        if let Some(out) = obj.get_mut("output").and_then(Value::as_object_mut) {
            out.remove("dir");
        }
        v
    }

    /// SHA-256 of the compact canonical JSON.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.canonical()).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Recursive object merge; non-object values replace.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() && !is_tagged(slot, &v) => {
                        merge(slot, v)
                    }
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Tagged enums are replaced as a whole when the tag changes, so fields of
/// the default variant do not leak into another one.
fn is_tagged(base: &Value, over: &Value) -> bool {
    ["preset", "kind"]
        .iter()
        .any(|tag| match (base.get(tag), over.get(tag)) {
            (Some(a), Some(b)) => a != b,
            (Some(_), None) => false,
            _ => false,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_validate_for_every_experiment() {
        for e in [
            Experiment::Frames,
            Experiment::Decay,
            Experiment::Twopath,
            Experiment::Compactness,
            Experiment::Psdo,
            Experiment::Mixed,
        ] {
            assert!(ExperimentConfig::defaults(e).validate().is_empty(), "{e:?}");
        }
    }

    #[test]
    fn partial_documents_overlay_defaults() {
        let cfg = ExperimentConfig::from_value(
            Experiment::Frames,
            json!({"grid": {"n": 120}, "seed": 9}),
        )
        .unwrap();
        assert_eq!(cfg.grid.n, 120);
        assert_eq!(cfg.grid.l, 10.0);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn tag_change_replaces_the_variant() {
        let cfg = ExperimentConfig::from_value(
            Experiment::Compactness,
            json!({"symbol": {"preset": "smooth-box", "half_width": 1.0, "ramp": 0.5}}),
        )
        .unwrap();
        assert_eq!(
            cfg.symbol,
            SymbolConfig::SmoothBox {
                half_width: 1.0,
                ramp: 0.5
            }
        );
    }

    #[test]
    fn invalid_fields_are_all_reported() {
        let errs = ExperimentConfig::from_value(
            Experiment::Frames,
            json!({"grid": {"n": 101}, "lattice": {"alpha": -1.0}, "thresholds": {"theta": 2.0}}),
        )
        .unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_value(Experiment::Frames, json!({"grdi": {}})).is_err());
    }

    #[test]
    fn hash_ignores_output_location_and_threads() {
        let a = ExperimentConfig::defaults(Experiment::Decay);
        let mut b = a.clone();
        b.output.dir = PathBuf::from("elsewhere");
        b.threads = Some(3);
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn annotated_defaults_parse_back() {
        let text =
            serde_json::to_string_pretty(&ExperimentConfig::annotated_defaults(Experiment::Psdo))
                .unwrap();
        let cfg =
            ExperimentConfig::from_value(Experiment::Psdo, serde_json::from_str(&text).unwrap())
                .unwrap();
        assert_eq!(cfg, ExperimentConfig::defaults(Experiment::Psdo));
    }
}
