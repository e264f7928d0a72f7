//! Run configuration: a TOML document with sections `model`, `initdata`,
//! `scheme`, `continuation`, `verify` and `output`, plus two built-in
//! presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{dimension_radius_bound, ModelParams};
use crate::error::{Error, Result};
use crate::initdata::{choose_amplitude_c, make_initial_datum, Family, InitialDatum};
use crate::solver::{CompactWindow, GridPolicy, SchemeConfig};
use crate::verify::Tolerances;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "GRADSING_OUT";

const PRESETS: [(&str, &str); 2] = [
    ("n2-standard", include_str!("../presets/n2-standard.toml")),
    ("n3-weak", include_str!("../presets/n3-weak.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
        .ok_or_else(|| {
            let known: Vec<&str> = preset_names().collect();
            Error::config("preset", format!("unknown preset `{name}` (known: {})", known.join(", ")))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudePolicy {
    /// `1.05 · sup (u* − u0)/ψ` over the datum grid.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Fixed(f64),
    Policy(AmplitudePolicy),
}

impl Default for Amplitude {
    fn default() -> Self {
        Amplitude::Policy(AmplitudePolicy::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: i64,
    /// At least one of `radius` and `lambda`; the missing one is derived.
    pub radius: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(default)]
    pub amplitude: Amplitude,
    /// Lower clamp applied to an automatically chosen amplitude.
    #[serde(default)]
    pub min_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationSection {
    /// Explicit sequence; overrides `eps_start`, `ratio` and `terms`.
    pub eps: Option<Vec<f64>>,
    pub eps_start: f64,
    pub ratio: f64,
    pub terms: usize,
    /// Defaults to `5/λ²`.
    pub horizon: Option<f64>,
    pub grid: GridPolicy,
    /// Defaults to `[0.1R, R] × [0.5, T]`.
    pub window: Option<CompactWindow>,
}

impl Default for ContinuationSection {
    fn default() -> Self {
        Self {
            eps: None,
            eps_start: 0.02,
            ratio: 0.5,
            terms: 4,
            horizon: None,
            grid: GridPolicy::default(),
            window: None,
        }
    }
}

impl ContinuationSection {
    pub fn sequence(&self) -> Result<Vec<f64>> {
        if let Some(eps) = &self.eps {
            return Ok(eps.clone());
        }
        if !(self.eps_start > 0.0) {
            return Err(Error::config("continuation.eps_start", "must be positive"));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::config("continuation.ratio", "must lie in (0, 1)"));
        }
        if self.terms == 0 {
            return Err(Error::config("continuation.terms", "must be at least 1"));
        }
        Ok((0..self.terms)
            .map(|j| self.eps_start * self.ratio.powi(j as i32))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Analytic,
    Initdata,
    Sandwich,
    Monotone,
    Refinement,
    GradientBox,
    Bernstein,
    Pointwise,
    Singularity,
    Decay,
    WeakIdentity,
    Uniqueness,
    Cauchy,
}

/// One level of the weak-identity refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakLevel {
    pub intervals: usize,
    pub dt: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Enabled checks; all when absent.
    pub checks: Option<Vec<CheckKind>>,
    pub tolerances: Tolerances,
    pub bernstein_p: Vec<u32>,
    /// `δ` as a fraction of `R`.
    pub bernstein_delta: f64,
    pub pointwise_p: u32,
    /// Times in units of `1/λ²`.
    pub singularity_times: Vec<f64>,
    /// Factor by which the refined rerun must shrink the sandwich violation.
    pub refinement_factor: f64,
    /// Measured values below this are treated as exact zeros.
    pub rounding_floor: f64,
    pub weak_levels: Vec<WeakLevel>,
    pub flux_eps: Vec<f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            checks: None,
            tolerances: Tolerances::default(),
            bernstein_p: vec![4, 28],
            bernstein_delta: 0.05,
            pointwise_p: 28,
            singularity_times: vec![1.0, 2.0, 5.0],
            refinement_factor: 3.0,
            rounding_floor: 1e-12,
            weak_levels: Vec::new(),
            flux_eps: Vec::new(),
        }
    }
}

impl VerifySection {
    pub fn enabled(&self, kind: CheckKind) -> bool {
        self.checks.as_ref().is_none_or(|list| list.contains(&kind))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Defaults to `$GRADSING_OUT/<name>`, or `out/<name>`.
    pub directory: Option<PathBuf>,
    pub write_fields: bool,
    /// Every k-th stored time goes to the field files (the last is kept).
    pub field_time_stride: usize,
    /// Absolute times of the profile overlays; times beyond `T` are dropped.
    pub profile_times: Vec<f64>,
    /// Radii of the time series, as fractions of `R`.
    pub series_radii: Vec<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            write_fields: true,
            field_time_stride: 1,
            profile_times: vec![0.0, 0.5, 1.0],
            series_radii: vec![0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub model: ModelSection,
    pub initdata: Family,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub continuation: ContinuationSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Sets a dotted key in a TOML table, creating intermediate tables.
fn set_dotted(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::config(key, "empty key"))?;
    let mut table = root;
    for part in parts {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_value(value: &str) -> toml::Value {
    format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml_str(preset_source(name)?)
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        Self::with_overrides(src, &[])
    }

    /// Parses `src` after applying `key=value` overrides with dotted keys
    /// (`scheme.dt_initial=5e-4`).
    pub fn with_overrides(src: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = src.parse().map_err(|e: toml::de::Error| Error::config("<document>", e.to_string()))?;
        for (key, value) in overrides {
            set_dotted(&mut table, key, parse_value(value))?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn output_dir(&self) -> PathBuf {
        if let Some(dir) = &self.output.directory {
            return dir.clone();
        }
        let root = std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("out"), PathBuf::from);
        root.join(&self.name)
    }

    /// Model constants before the amplitude is chosen, with the radius gate
    /// applied.
    pub fn base_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let params = match (m.radius, m.lambda) {
            (Some(r), Some(l)) => ModelParams::new(m.n, r, l, 0.0),
            (Some(r), None) => ModelParams::with_default_lambda(m.n, r, 0.0),
            (None, Some(l)) => ModelParams::with_default_radius(m.n, l, 0.0),
            (None, None) => return Err(Error::config("model", "give `radius`, `lambda` or both")),
        }
        .map_err(|e| Error::config("model", e.to_string()))?;
        if !params.is_admissible() {
            return Err(Error::config(
                "model.radius",
                format!(
                    "R = {} fails the admissibility gate R < min(x1/lambda, sqrt((3/8)(3n-5)(2n-3)^3)) = min({}, {}) for n = {}",
                    params.radius,
                    params.x1 / params.lambda,
                    dimension_radius_bound(params.n)?,
                    params.n
                ),
            ));
        }
        Ok(params)
    }

    /// Validated parameters, datum and derived run settings.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let base = self.base_params()?;
        if matches!(self.initdata, Family::Custom { .. }) {
            return Err(Error::config("initdata.family", "custom data cannot be given in a file"));
        }
        let datum = make_initial_datum(&base, self.initdata.clone())?;
        let amplitude = match self.model.amplitude {
            Amplitude::Fixed(c) => c,
            Amplitude::Policy(AmplitudePolicy::Auto) => choose_amplitude_c(&base, &datum)?.max(self.model.min_amplitude),
        };
        let params = base
            .with_amplitude(amplitude)
            .map_err(|e| Error::config("model.amplitude", e.to_string()))?;
        let horizon = self.continuation.horizon.unwrap_or_else(|| params.default_horizon());
        self.scheme.validate(horizon)?;
        let eps = self.continuation.sequence()?;
        if eps.is_empty() || eps.windows(2).any(|w| !(w[1] < w[0])) || !(eps[0] < params.radius) || !(eps[eps.len() - 1] > 0.0) {
            return Err(Error::config(
                "continuation.eps",
                "sequence must be positive, strictly decreasing and below R",
            ));
        }
        let window = self
            .continuation
            .window
            .unwrap_or_else(|| CompactWindow::standard(params.radius, horizon));
        Ok(ResolvedRun {
            params,
            datum,
            horizon,
            eps,
            window,
        })
    }
}

#[derive(Debug)]
pub struct ResolvedRun {
    pub params: ModelParams,
    pub datum: InitialDatum,
    pub horizon: f64,
    pub eps: Vec<f64>,
    pub window: CompactWindow,
}
