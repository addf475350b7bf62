use std::path::{Path, PathBuf};

use duhem::presets::{self, Preset};
use duhem::{InputSignal, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Everything a run needs, loadable from JSON. Command-line flags override
/// individual fields after loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    #[serde(default)]
    pub y0: f64,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            input: None,
            y0: 0.0,
            numerics: Numerics::default(),
            output: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub step: f64,
    pub quad_tol: f64,
    pub curve_step: f64,
    pub grid: usize,
    pub lemma_epsilon: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            step: 1e-3,
            quad_tol: duhem::storage::DEFAULT_QUAD_TOL,
            curve_step: duhem::curves::CURVE_STEP,
            grid: 200,
            lemma_epsilon: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Breakpoints {
        points: Vec<(f64, f64)>,
    },
    Ramp {
        from: f64,
        to: f64,
        duration: f64,
    },
    Triangle {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        period: f64,
        cycles: usize,
    },
    Sine {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        period: f64,
        cycles: usize,
        #[serde(default = "default_segments")]
        segments_per_period: usize,
    },
    Random {
        #[serde(default)]
        u0: f64,
        breakpoints: usize,
        radius: f64,
    },
}

fn default_segments() -> usize {
    presets::SEGMENTS_PER_PERIOD
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec::Sine {
            offset: 0.0,
            amplitude: presets::AMPLITUDE,
            period: presets::PERIOD,
            cycles: presets::CYCLES,
            segments_per_period: presets::SEGMENTS_PER_PERIOD,
        }
    }
}

impl InputSpec {
    pub fn build(&self, seed: u64) -> duhem::Result<InputSignal> {
        match *self {
            InputSpec::Breakpoints { ref points } => InputSignal::new(points.clone()),
            InputSpec::Ramp { from, to, duration } => InputSignal::ramp(from, to, duration),
            InputSpec::Triangle {
                offset,
                amplitude,
                period,
                cycles,
            } => InputSignal::triangle(offset, amplitude, period, cycles),
            InputSpec::Sine {
                offset,
                amplitude,
                period,
                cycles,
                segments_per_period,
            } => InputSignal::sine(offset, amplitude, period, cycles, segments_per_period),
            InputSpec::Random {
                u0,
                breakpoints,
                radius,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                InputSignal::random(&mut rng, u0, breakpoints, radius, (1.0, 2.0))
            }
        }
    }

    /// Period of a periodic generator.
    pub fn period(&self) -> Option<f64> {
        match *self {
            InputSpec::Triangle { period, .. } | InputSpec::Sine { period, .. } => Some(period),
            _ => None,
        }
    }
}

impl From<Preset> for RunConfig {
    fn from(p: Preset) -> Self {
        RunConfig {
            model: Some(p.spec()),
            input: Some(InputSpec::default()),
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("no model given (use --model, --preset or a config file)")]
    MissingModel,
    #[error("bad --param `{0}`, expected key=value")]
    BadParam(String),
    #[error("preset {preset} is a {expected} model, not {got}")]
    PresetMismatch {
        preset: &'static str,
        expected: &'static str,
        got: String,
    },
    #[error(transparent)]
    Model(#[from] duhem::Error),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn model_spec(&self) -> Result<&ModelSpec, ConfigError> {
        self.model.as_ref().ok_or(ConfigError::MissingModel)
    }
}

pub fn parse_param(s: &str) -> Result<(String, f64), ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::BadParam(s.into()))?;
    let v: f64 = v.trim().parse().map_err(|_| ConfigError::BadParam(s.into()))?;
    Ok((k.trim().to_string(), v))
}
