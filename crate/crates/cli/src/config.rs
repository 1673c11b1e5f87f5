//! Run configuration: a TOML document with one table per block.
//!
//! ```toml
//! command = "sim2d"          # optional, must match the command line
//!
//! [params]
//! preset = "spotted"         # or give all of w1 w2 w3 w4 a2 c D3 m d1 d2 d3
//! m = 0.01                   # keys given here override the preset
//!
//! [grid]
//! nx = 100
//! ny = 100
//! ```
//!
//! Every key is optional except the parameter set. Defaults depend on the
//! command; the resolved values are echoed to `config.toml` in the run
//! directory and that file reruns the experiment exactly.

use serde::{Deserialize, Serialize};

use foodchain::analysis::{ClassifyOptions, ScenarioKind};
use foodchain::simulate::InitialKind;
use foodchain::Params;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub params: ParamsBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub grid: GridBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub initial: InitialBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub time: TimeBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub solver: SolverBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub experiment: ExperimentBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub scenario: ScenarioBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub classify: ClassifyBlock,
    #[serde(skip_serializing_if = "is_default")]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsBlock {
    pub preset: Option<String>,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub w3: Option<f64>,
    pub w4: Option<f64>,
    pub a2: Option<f64>,
    pub c: Option<f64>,
    #[serde(rename = "D3")]
    pub alt_food: Option<f64>,
    pub m: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d3: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    /// Collocation points (1D).
    pub n: Option<usize>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub dx: Option<f64>,
    pub dy: Option<f64>,
    pub dt: Option<f64>,
}

/// Either one amplitude for all three fields or one per field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Same(f64),
    PerField([f64; 3]),
}

impl Amplitude {
    pub fn expand(self) -> [f64; 3] {
        match self {
            Amplitude::Same(e) => [e; 3],
            Amplitude::PerField(e) => e,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialBlock {
    pub kind: Option<InitialKind>,
    pub eps: Option<Amplitude>,
    pub wavenumber: Option<u32>,
    pub seed: Option<u64>,
    /// State the perturbation is centred on; the interior equilibrium if absent.
    pub base: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeBlock {
    pub t_end: Option<f64>,
    pub snapshot_every: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub simulator: Option<String>,
    pub integrator: Option<String>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub max_steps: Option<u64>,
    pub reaction: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentBlock {
    /// Explicit list of Allee thresholds.
    pub m_values: Option<Vec<f64>>,
    /// Alternative to `m_values`: `m_count` equally spaced values.
    pub m_min: Option<f64>,
    pub m_max: Option<f64>,
    pub m_count: Option<usize>,
    /// `desk` or `full` decay protocol defaults.
    pub protocol: Option<String>,
    /// Largest `k²` of the dispersion table.
    pub k2_max: Option<f64>,
    pub k2_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioBlock {
    pub kind: Option<ScenarioKind>,
    pub initial: Option<[f64; 3]>,
    pub extinction_tol: Option<f64>,
    pub limit_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyBlock {
    pub homogeneous_tol: Option<f64>,
    pub steady_tol: Option<f64>,
}

/// Which field snapshots a 2D run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotFiles {
    Final,
    All,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<String>,
    pub snapshots: Option<SnapshotFiles>,
}

fn is_default<T: Default + PartialEq>(x: &T) -> bool {
    *x == T::default()
}

const PARAM_KEYS: [&str; 11] = ["w1", "w2", "w3", "w4", "a2", "c", "D3", "m", "d1", "d2", "d3"];

/// Parses configuration text; errors carry the offending line.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
        CliError::Config(format!("line {line}: {}", e.message().trim_end()))
    })
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line of `key` inside `[section]`, or of the section header when the key
/// is absent.
pub fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

impl RunConfig {
    /// Builds the parameter set from the preset and explicit keys.
    pub fn resolve_params(&self) -> Result<Params, String> {
        let b = &self.params;
        let base = match &b.preset {
            Some(name) => Some(Params::preset(name, 0.0).ok_or_else(|| {
                format!("params.preset: unknown preset '{name}', expected one of {:?}", foodchain::model::PRESETS)
            })?),
            None => None,
        };
        let given = [b.w1, b.w2, b.w3, b.w4, b.a2, b.c, b.alt_food, b.m, b.d1, b.d2, b.d3];
        let mut values = [0.0; 11];
        for (i, key) in PARAM_KEYS.iter().enumerate() {
            values[i] = match (given[i], base) {
                (Some(x), _) => x,
                (None, Some(p)) => p.named()[i].1,
                (None, None) => {
                    return Err(format!("params.{key}: missing required key (give all parameters or a preset)"));
                }
            };
        }
        let [w1, w2, w3, w4, a2, c, alt_food, m, d1, d2, d3] = values;
        let p = Params { w1, w2, w3, w4, a2, c, alt_food, m, d1, d2, d3 };
        p.validate().map_err(|e| format!("params: {e}"))?;
        Ok(p)
    }

    /// Writes the explicit parameter set back, dropping the preset.
    pub fn set_params(&mut self, p: &Params) {
        self.params = ParamsBlock {
            preset: None,
            w1: Some(p.w1),
            w2: Some(p.w2),
            w3: Some(p.w3),
            w4: Some(p.w4),
            a2: Some(p.a2),
            c: Some(p.c),
            alt_food: Some(p.alt_food),
            m: Some(p.m),
            d1: Some(p.d1),
            d2: Some(p.d2),
            d3: Some(p.d3),
        };
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        let d = ClassifyOptions::default();
        ClassifyOptions {
            homogeneous_tol: self.classify.homogeneous_tol.unwrap_or(d.homogeneous_tol),
            steady_tol: self.classify.steady_tol.unwrap_or(d.steady_tol),
        }
    }

    /// The Allee thresholds of a sweep, if any were given.
    pub fn m_list(&self) -> Result<Option<Vec<f64>>, String> {
        let e = &self.experiment;
        let range = (e.m_min, e.m_max, e.m_count);
        match (&e.m_values, range) {
            (Some(_), (None, None, None)) | (None, (None, None, None)) => Ok(e.m_values.clone()),
            (Some(_), _) => Err("experiment: give either m_values or m_min/m_max/m_count, not both".into()),
            (None, (Some(lo), Some(hi), Some(n))) => {
                if n == 0 || !(lo.is_finite() && hi.is_finite()) || hi < lo {
                    return Err(format!("experiment: invalid range m_min = {lo}, m_max = {hi}, m_count = {n}"));
                }
                Ok(Some(foodchain::analysis::decay::linspace(lo, hi, n)))
            }
            (None, _) => Err("experiment: m_min, m_max and m_count must be given together".into()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }
}
