//! Flat `section.key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored; every other line must be a known key.
//! Lists are comma separated. Environment variables named `TOPOLAB_<SECTION>__<KEY>`
//! (or `TOPOLAB_VF_TARGET`) override file values.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use topo_core::filters::{FilterKind, FilterSpec, Mean, Weighting};
use topo_core::{BcPreset, ContinuationSchedule, MaterialLaw, OcSettings};

pub const ENV_PREFIX: &str = "TOPOLAB_";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("environment variable {var}: unknown key `{key}`")]
    UnknownEnvKey { var: String, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialMode {
    Uniform,
    Random,
    File,
}

impl InitialMode {
    pub fn name(self) -> &'static str {
        match self {
            InitialMode::Uniform => "uniform",
            InitialMode::Random => "random",
            InitialMode::File => "file",
        }
    }
}

impl FromStr for InitialMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(InitialMode::Uniform),
            "random" => Ok(InitialMode::Random),
            "file" => Ok(InitialMode::File),
            other => Err(format!(
                "unknown mode `{other}` (expected uniform, random or file)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Csv,
    Pgm,
    Vtk,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Pgm => "pgm",
            OutputFormat::Vtk => "vtk",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "pgm" => Ok(OutputFormat::Pgm),
            "vtk" => Ok(OutputFormat::Vtk),
            other => Err(format!(
                "unknown format `{other}` (expected csv, pgm or vtk)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub preset: BcPreset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialConfig {
    pub e0: f64,
    pub emin: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub kind: FilterKind,
    /// Filter radius in element widths.
    pub r_over_h: f64,
    pub weighting: Weighting,
    pub mean: Mean,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConfig {
    pub p_stages: Vec<f64>,
    pub beta_stages: Vec<f64>,
    pub stage_tol: f64,
    pub stage_max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcConfig {
    pub move_limit: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialGuessConfig {
    pub mode: InitialMode,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub material: MaterialConfig,
    pub vf_target: f64,
    pub filter: FilterConfig,
    pub schedule: ScheduleConfig,
    pub oc: OcConfig,
    pub initial_guess: InitialGuessConfig,
    pub outputs: OutputConfig,
}

/// Every accepted key, in the order the resolved document lists them.
pub const KEYS: &[&str] = &[
    "mesh.nx",
    "mesh.ny",
    "mesh.h",
    "mesh.preset",
    "material.e0",
    "material.emin",
    "material.nu",
    "vf_target",
    "filter.kind",
    "filter.r_over_h",
    "filter.weighting",
    "filter.mean",
    "filter.epsilon",
    "schedule.p_stages",
    "schedule.beta_stages",
    "schedule.stage_tol",
    "schedule.stage_max_iters",
    "oc.move_limit",
    "oc.damping",
    "initial_guess.mode",
    "initial_guess.seed",
    "initial_guess.path",
    "outputs.directory",
    "outputs.formats",
];

/// Raw key/value pairs after syntax checks, before typing and validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    entries: BTreeMap<String, String>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "empty key".into(),
                });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Sets a known key, replacing any previous value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(invalid(key, "unknown key"));
        }
        self.entries
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies `TOPOLAB_*` variables; other variables are ignored.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (var, value) in vars {
            let Some(rest) = var.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = env_key(rest);
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownEnvKey { var, key });
            }
            self.entries.insert(key, value.trim().to_string());
        }
        Ok(())
    }
}

/// `MESH__NX` -> `mesh.nx`, `VF_TARGET` -> `vf_target`.
pub fn env_key(name: &str) -> String {
    name.to_ascii_lowercase().replace("__", ".")
}

/// Environment variable that overrides `key`.
pub fn env_var_for(key: &str) -> String {
    format!(
        "{ENV_PREFIX}{}",
        key.to_ascii_uppercase().replace('.', "__")
    )
}

fn scalar<T: FromStr>(
    doc: &Document,
    key: &'static str,
    default: Option<T>,
) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    match doc.get(key) {
        Some(v) => v.parse().map_err(|e| invalid(key, format!("`{v}`: {e}"))),
        None => default.ok_or(ConfigError::Missing(key)),
    }
}

fn float_list(doc: &Document, key: &'static str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
    match doc.get(key) {
        None => Ok(default.to_vec()),
        Some(v) => v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| invalid(key, format!("`{s}`: {e}")))
            })
            .collect(),
    }
}

pub const DEFAULT_P_STAGES: [f64; 5] = [1.0, 1.5, 2.0, 2.5, 3.0];

/// Parses and validates a document; relative file paths are resolved against the
/// working directory.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_in(text, Path::new("."), std::iter::empty())
}

/// Parses a document, applies environment overrides, validates, and resolves
/// relative paths against `base`.
pub fn parse_config_in<I>(text: &str, base: &Path, env: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut doc = Document::parse(text)?;
    doc.apply_env(env)?;
    RunConfig::from_document(&doc, base)
}

/// Reads a config file; relative paths inside it are taken relative to its directory.
pub fn load_config<I>(path: &Path, env: I) -> Result<RunConfig, crate::CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let text = std::fs::read_to_string(path).map_err(|source| crate::CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    Ok(parse_config_in(&text, base, env)?)
}

impl RunConfig {
    pub fn from_document(doc: &Document, base: &Path) -> Result<Self, ConfigError> {
        let mesh = MeshConfig {
            nx: scalar(doc, "mesh.nx", None)?,
            ny: scalar(doc, "mesh.ny", None)?,
            h: scalar(doc, "mesh.h", Some(1.0))?,
            preset: scalar(doc, "mesh.preset", Some(BcPreset::MbbHalf))?,
        };
        let material = MaterialConfig {
            e0: scalar(doc, "material.e0", Some(1.0))?,
            emin: scalar(doc, "material.emin", Some(1e-9))?,
            nu: scalar(doc, "material.nu", Some(0.3))?,
        };
        let vf_target = scalar(doc, "vf_target", None)?;
        let filter = FilterConfig {
            kind: scalar(doc, "filter.kind", Some(FilterKind::Sensitivity))?,
            r_over_h: scalar(doc, "filter.r_over_h", Some(1.5))?,
            weighting: scalar(doc, "filter.weighting", Some(Weighting::Linear))?,
            mean: scalar(doc, "filter.mean", Some(Mean::Harmonic))?,
            epsilon: scalar(doc, "filter.epsilon", Some(1e-3))?,
        };
        let schedule = ScheduleConfig {
            p_stages: float_list(doc, "schedule.p_stages", &DEFAULT_P_STAGES)?,
            beta_stages: float_list(doc, "schedule.beta_stages", &[])?,
            stage_tol: scalar(doc, "schedule.stage_tol", Some(0.01))?,
            stage_max_iters: scalar(doc, "schedule.stage_max_iters", Some(200))?,
        };
        let defaults = OcSettings::default();
        let oc = OcConfig {
            move_limit: scalar(doc, "oc.move_limit", Some(defaults.move_limit))?,
            damping: scalar(doc, "oc.damping", Some(defaults.damping))?,
        };
        let initial_guess = InitialGuessConfig {
            mode: scalar(doc, "initial_guess.mode", Some(InitialMode::Uniform))?,
            seed: scalar(doc, "initial_guess.seed", Some(0u64))?,
            path: doc
                .get("initial_guess.path")
                .filter(|p| !p.is_empty())
                .map(|p| base.join(p)),
        };
        let formats = match doc.get("outputs.formats") {
            None => vec![OutputFormat::Csv],
            Some(v) => {
                let mut out = Vec::new();
                for s in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let f: OutputFormat = s.parse().map_err(|e| invalid("outputs.formats", e))?;
                    if !out.contains(&f) {
                        out.push(f);
                    }
                }
                out
            }
        };
        let outputs = OutputConfig {
            directory: base.join(doc.get("outputs.directory").unwrap_or("out")),
            formats,
        };
        let config = RunConfig {
            mesh,
            material,
            vf_target,
            filter,
            schedule,
            oc,
            initial_guess,
            outputs,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mesh.nx == 0 {
            return Err(invalid("mesh.nx", "must be positive"));
        }
        if self.mesh.ny == 0 {
            return Err(invalid("mesh.ny", "must be positive"));
        }
        if !(self.mesh.h > 0.0 && self.mesh.h.is_finite()) {
            return Err(invalid("mesh.h", "must be positive"));
        }
        if self.mesh.preset == BcPreset::Custom {
            return Err(invalid(
                "mesh.preset",
                "custom supports cannot be described in a config file",
            ));
        }
        self.material_law(1.0).map_err(|e| invalid("material", e))?;
        if !(self.vf_target > 0.0 && self.vf_target <= 1.0) {
            return Err(invalid("vf_target", "must lie in (0, 1]"));
        }
        if !(self.filter.r_over_h >= 0.0 && self.filter.r_over_h.is_finite()) {
            return Err(invalid("filter.r_over_h", "must be nonnegative"));
        }
        if !(self.filter.epsilon > 0.0) {
            return Err(invalid("filter.epsilon", "must be positive"));
        }
        self.filter_spec()
            .validate()
            .map_err(|e| invalid("filter", e))?;
        if self.schedule.p_stages.is_empty() {
            return Err(invalid("schedule.p_stages", "needs at least one stage"));
        }
        if self.filter.kind == FilterKind::Heaviside && self.schedule.beta_stages.is_empty() {
            return Err(invalid(
                "schedule.beta_stages",
                "required when filter.kind = heaviside",
            ));
        }
        self.continuation_schedule()
            .validate()
            .map_err(|e| invalid("schedule", e))?;
        self.oc_settings()
            .validate()
            .map_err(|e| invalid("oc", e))?;
        if self.initial_guess.mode == InitialMode::File {
            match &self.initial_guess.path {
                None => {
                    return Err(invalid(
                        "initial_guess.path",
                        "required when initial_guess.mode = file",
                    ))
                }
                Some(p) if !p.is_file() => {
                    return Err(invalid(
                        "initial_guess.path",
                        format!("{} does not exist", p.display()),
                    ))
                }
                Some(_) => {}
            }
        }
        if self.outputs.formats.is_empty() {
            return Err(invalid("outputs.formats", "needs at least one format"));
        }
        Ok(())
    }

    pub fn material_law(&self, p: f64) -> topo_core::Result<MaterialLaw> {
        MaterialLaw::new(self.material.e0, self.material.emin, self.material.nu, p)
    }

    pub fn filter_spec(&self) -> FilterSpec {
        FilterSpec::new(self.filter.kind, self.filter.r_over_h * self.mesh.h)
            .with_weighting(self.filter.weighting)
            .with_mean(self.filter.mean, self.filter.epsilon)
    }

    pub fn continuation_schedule(&self) -> ContinuationSchedule {
        let mut s = ContinuationSchedule::stepped(self.schedule.p_stages.clone())
            .with_beta(self.schedule.beta_stages.clone());
        s.stage_convergence_tol = self.schedule.stage_tol;
        s.stage_max_iters = self.schedule.stage_max_iters;
        s
    }

    pub fn oc_settings(&self) -> OcSettings {
        OcSettings {
            move_limit: self.oc.move_limit,
            damping: self.oc.damping,
            ..OcSettings::default()
        }
    }

    /// Document with every key present; parsing it yields this configuration again.
    pub fn to_document(&self) -> Document {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let pairs: [(&str, String); 24] = [
            ("mesh.nx", self.mesh.nx.to_string()),
            ("mesh.ny", self.mesh.ny.to_string()),
            ("mesh.h", self.mesh.h.to_string()),
            ("mesh.preset", self.mesh.preset.to_string()),
            ("material.e0", self.material.e0.to_string()),
            ("material.emin", self.material.emin.to_string()),
            ("material.nu", self.material.nu.to_string()),
            ("vf_target", self.vf_target.to_string()),
            ("filter.kind", self.filter.kind.to_string()),
            ("filter.r_over_h", self.filter.r_over_h.to_string()),
            ("filter.weighting", self.filter.weighting.to_string()),
            ("filter.mean", self.filter.mean.to_string()),
            ("filter.epsilon", self.filter.epsilon.to_string()),
            ("schedule.p_stages", list(&self.schedule.p_stages)),
            ("schedule.beta_stages", list(&self.schedule.beta_stages)),
            ("schedule.stage_tol", self.schedule.stage_tol.to_string()),
            (
                "schedule.stage_max_iters",
                self.schedule.stage_max_iters.to_string(),
            ),
            ("oc.move_limit", self.oc.move_limit.to_string()),
            ("oc.damping", self.oc.damping.to_string()),
            (
                "initial_guess.mode",
                self.initial_guess.mode.name().to_string(),
            ),
            ("initial_guess.seed", self.initial_guess.seed.to_string()),
            (
                "initial_guess.path",
                self.initial_guess
                    .path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ),
            (
                "outputs.directory",
                self.outputs.directory.display().to_string(),
            ),
            (
                "outputs.formats",
                self.outputs
                    .formats
                    .iter()
                    .map(|f| f.name())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        ];
        let mut doc = Document::default();
        for (k, v) in pairs {
            doc.entries.insert(k.to_string(), v);
        }
        doc
    }

    /// Copy of this configuration with one key replaced and everything revalidated.
    pub fn with_value(&self, key: &str, value: &str) -> Result<RunConfig, ConfigError> {
        let mut doc = self.to_document();
        doc.set(key, value)?;
        RunConfig::from_document(&doc, Path::new(""))
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let mut section = "";
        for key in KEYS {
            let Some(value) = self.entries.get(*key) else {
                continue;
            };
            let this = key.split_once('.').map_or("", |(s, _)| s);
            if this != section && !out.is_empty() {
                out.push('\n');
            }
            section = this;
            let _ = writeln!(out, "{key} = {value}");
        }
        f.write_str(&out)
    }
}
