//! Experiment configuration: a single TOML file plus flag overrides, resolved
//! against per-experiment defaults into a concrete record that is hashed into
//! every output path.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Raw, partial configuration as read from a TOML file. Every field is
/// optional; omitted values fall back to the experiment's defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// number of s-grid nodes for the half-space solver
    pub s_nodes: Option<usize>,
    /// band limit of synthesized fields
    pub mmax: Option<i64>,
    /// number of random trials (sampling experiments)
    pub trials: Option<usize>,
    /// number of evolution steps (conservation experiment)
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    /// flow horizon (gradient-flow experiments)
    pub t_end: Option<f64>,
    /// number of random directions (derivative experiments)
    pub directions: Option<usize>,
    /// amplitude of synthesized non-abelian connections
    pub amplitude: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved configuration. Serialized into `record.json` and hashed
/// (without the output directory) for the run's provenance tag.
#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub experiment: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub seed: u64,
    pub s_nodes: usize,
    pub mmax: i64,
    pub trials: usize,
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub directions: usize,
    pub amplitude: f64,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Per-experiment defaults: grid size, band limits, and sampling volumes are
/// chosen so every experiment completes at desk scale.
fn defaults(experiment: &str) -> Config {
    let tau = 2.0 * std::f64::consts::PI;
    let mut c = Config {
        experiment: experiment.to_string(),
        n: 8,
        length: tau,
        seed: 7,
        s_nodes: 64,
        mmax: 2,
        trials: 100,
        steps: 1000,
        dt: 0.0137,
        t_end: 12.0,
        directions: 5,
        amplitude: 0.05,
        out: PathBuf::from("results"),
    };
    match experiment {
        "bw-norm-equality" | "helicity-equivalence" | "maxwell-conservation" => {
            c.n = 16;
            c.mmax = 5;
        }
        "abelian-duality" => {
            c.n = 16;
            c.mmax = 4;
        }
        "integral-norm-calibration" => {
            c.n = 16;
            c.mmax = 5;
            c.trials = 20;
        }
        "ym-gradient-check" | "ym-hessian-symmetry" | "convexity-probe" => {
            c.s_nodes = 48;
            c.mmax = 1;
        }
        "h-flow-nonabelian" => {
            c.mmax = 1;
        }
        _ => {}
    }
    c
}

/// Flag overrides applied on top of the file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub length: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn resolve(experiment: &str, file: &FileConfig, flags: &Overrides) -> Config {
    let mut c = defaults(experiment);
    macro_rules! take {
        ($field:ident) => {
            if let Some(v) = file.$field {
                c.$field = v;
            }
        };
    }
    take!(n);
    take!(length);
    take!(seed);
    take!(s_nodes);
    take!(mmax);
    take!(trials);
    take!(steps);
    take!(dt);
    take!(t_end);
    take!(directions);
    take!(amplitude);
    if let Some(o) = &file.out {
        c.out = o.clone();
    }
    if let Some(v) = flags.n {
        c.n = v;
    }
    if let Some(v) = flags.length {
        c.length = v;
    }
    if let Some(v) = flags.seed {
        c.seed = v;
    }
    if let Some(o) = &flags.out {
        c.out = o.clone();
    }
    c
}

impl Config {
    /// Short provenance hash of everything that affects the numbers (the
    /// output directory is deliberately excluded).
    pub fn hash(&self) -> String {
        let payload = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(payload.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..12].to_string()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out.join(&self.experiment).join(self.hash())
    }
}
