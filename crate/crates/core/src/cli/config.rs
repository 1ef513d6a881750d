use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Amplitudes, Coupling, Frame, TraceKind};
use crate::error::{Error, Result};
use crate::model::{
    read_sample_table, DerivativeMode, Interpolation, PhaseConvention, PulseSpec, Sign,
    SystemModel, TimeFunction,
};

/// Environment variable naming the directory relative output paths live under.
pub const OUTPUT_ROOT_VAR: &str = "RABICHIRP_OUTPUT_ROOT";

/// A time function as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        height: f64,
    },
    #[serde(rename = "sin2")]
    SinSquared {
        start: f64,
        duration: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// Two-column sample file, relative to the config file's directory.
    Table {
        path: PathBuf,
        #[serde(default = "cubic")]
        order: u32,
    },
    Samples {
        times: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "cubic")]
        order: u32,
    },
    /// `kappa * F0 * m(t)`; dipole functions only.
    Induced {
        kappa: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn cubic() -> u32 {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChirpKeyword {
    Design,
}

/// Either `chirp = "design"` or an explicit function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChirpSpec {
    Keyword(ChirpKeyword),
    Function(FunctionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub sign_ab: i64,
    pub omega_ab: FunctionSpec,
    pub mu_aa: FunctionSpec,
    pub mu_bb: FunctionSpec,
    pub mu_ab: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub f0: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub envelope: FunctionSpec,
    pub chirp: ChirpSpec,
    #[serde(default)]
    pub phase_convention: PhaseConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub points_per_period: usize,
    pub design_tol: f64,
    pub design_max_iter: usize,
    pub relaxation: f64,
    pub derivative: DerivativeMode,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: 1e-9,
            points_per_period: crate::transform::DEFAULT_POINTS_PER_PERIOD,
            design_tol: 1e-8,
            design_max_iter: 100,
            relaxation: 1.0,
            derivative: DerivativeMode::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub frames: Vec<TraceKind>,
    pub output_dir: PathBuf,
    /// `[re_1, im_1, re_2, im_2]`.
    pub initial: [f64; 4],
    pub rwa_threshold: f64,
    pub transfer_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_end: Option<f64>,
    pub verify_frame: TraceKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            frames: vec![TraceKind::TauRwa],
            output_dir: PathBuf::from("rabichirp-out"),
            initial: [1.0, 0.0, 0.0, 0.0],
            rwa_threshold: crate::designer::RWA_THRESHOLD,
            transfer_threshold: crate::designer::TRANSFER_THRESHOLD,
            tau_end: None,
            verify_frame: TraceKind::TauRwa,
            samples: None,
        }
    }
}

/// One run, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub pulse: PulseSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub run: RunSection,
}

/// A config resolved into model objects.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: RunConfig,
    pub model: SystemModel,
    /// Carries `omega_ab` as a placeholder chirp when `design` is set.
    pub pulse: PulseSpec,
    pub design: bool,
    pub initial: Amplitudes,
    pub output_dir: PathBuf,
}

impl Setup {
    pub fn verify_coupling(&self) -> Coupling {
        match self.config.run.verify_frame {
            TraceKind::TauFull => Coupling::Full,
            _ => Coupling::Rotating,
        }
    }

    pub fn tau_end(&self) -> f64 {
        self.config.run.tau_end.unwrap_or(PI)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_table(table: &toml::Table) -> Result<Self> {
        Self::from_toml_str(&toml::to_string(table).expect("table serializes"))
    }

    /// Read `path`, apply `key=value` overrides, and validate.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if overrides.is_empty() {
            return Self::from_toml_str(&text);
        }
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| toml_error(&text, &e))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(&table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Apply one `dotted.key=value` override to an already parsed config.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let mut table = toml::Table::try_from(self).expect("config serializes");
        apply_override(&mut table, assignment)?;
        Self::from_table(&table)
    }

    pub fn validate(&self) -> Result<()> {
        if Sign::from_int(self.model.sign_ab).is_err() {
            return Err(Error::config("model.sign_ab", "must be -1 or +1"));
        }
        let p = &self.pulse;
        if !p.f0.is_finite() || p.f0 < 0.0 {
            return Err(Error::config(
                "pulse.f0",
                format!("field amplitude must satisfy F0 > 0, got {}", p.f0),
            ));
        }
        if !(p.t_start >= 0.0) || !p.t_start.is_finite() {
            return Err(Error::config(
                "pulse.t_start",
                format!("must be >= 0, got {}", p.t_start),
            ));
        }
        if !(p.t_end > p.t_start) || !p.t_end.is_finite() {
            return Err(Error::config(
                "pulse.t_end",
                format!("must exceed t_start = {}, got {}", p.t_start, p.t_end),
            ));
        }
        let s = &self.solver;
        positive("solver.tol", s.tol)?;
        positive("solver.design_tol", s.design_tol)?;
        if s.points_per_period < 8 {
            return Err(Error::config(
                "solver.points_per_period",
                "must be at least 8",
            ));
        }
        if s.design_max_iter == 0 {
            return Err(Error::config(
                "solver.design_max_iter",
                "must be at least 1",
            ));
        }
        if !(s.relaxation > 0.0 && s.relaxation <= 1.0) {
            return Err(Error::config("solver.relaxation", "must lie in (0, 1]"));
        }
        let r = &self.run;
        if r.frames.is_empty() {
            return Err(Error::config("run.frames", "select at least one frame"));
        }
        if !(r.rwa_threshold >= 0.0) {
            return Err(Error::config("run.rwa_threshold", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&r.transfer_threshold) {
            return Err(Error::config(
                "run.transfer_threshold",
                "must lie in [0, 1]",
            ));
        }
        if let Some(t) = r.tau_end {
            positive("run.tau_end", t)?;
        }
        if !matches!(r.verify_frame, TraceKind::TauRwa | TraceKind::TauFull) {
            return Err(Error::config(
                "run.verify_frame",
                "must be tau-rwa or tau-full",
            ));
        }
        if r.samples == Some(0) {
            return Err(Error::config("run.samples", "must be at least 1"));
        }
        let norm: f64 = r.initial.iter().map(|x| x * x).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::config(
                "run.initial",
                format!("state must be normalized, |a|^2 + |b|^2 = {norm}"),
            ));
        }
        Ok(())
    }

    /// Resolve function specs (reading sample files relative to `base_dir`)
    /// and build the model and pulse. Relative output directories are placed
    /// under `output_root` when given.
    pub fn build(&self, base_dir: &Path, output_root: Option<&Path>) -> Result<Setup> {
        self.validate()?;
        let p = &self.pulse;
        let envelope = build_function(&p.envelope, "pulse.envelope", base_dir, None)?;
        let induced = Some((p.f0, &envelope));
        let m = &self.model;
        let model = SystemModel::new(
            build_function(&m.omega_ab, "model.omega_ab", base_dir, None)?,
            Sign::from_int(m.sign_ab)?,
            build_function(&m.mu_aa, "model.mu_aa", base_dir, induced)?,
            build_function(&m.mu_bb, "model.mu_bb", base_dir, induced)?,
            build_function(&m.mu_ab, "model.mu_ab", base_dir, induced)?,
        );
        let (design, chirp) = match &p.chirp {
            ChirpSpec::Keyword(ChirpKeyword::Design) => (true, model.omega_ab.clone()),
            ChirpSpec::Function(f) => (false, build_function(f, "pulse.chirp", base_dir, None)?),
        };
        check_model(&model, &envelope, p.t_start, p.t_end)?;
        let pulse = PulseSpec::new(p.f0, envelope, chirp, p.t_start, p.t_end)
            .map_err(|e| Error::config(if design { "pulse" } else { "pulse.chirp" }, bare(e)))?
            .with_phase_convention(p.phase_convention);
        let [r1, i1, r2, i2] = self.run.initial;
        let initial = Amplitudes::new(Complex64::new(r1, i1), Complex64::new(r2, i2), Frame::Lab);
        let output_dir = match output_root {
            Some(root) if self.run.output_dir.is_relative() => root.join(&self.run.output_dir),
            _ => self.run.output_dir.clone(),
        };
        Ok(Setup {
            config: self.clone(),
            model,
            pulse,
            design,
            initial,
            output_dir,
        })
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be > 0, got {v}")))
    }
}

fn bare(e: Error) -> String {
    match e {
        Error::Invalid(m) => m,
        other => other.to_string(),
    }
}

fn build_function(
    spec: &FunctionSpec,
    key: &str,
    base_dir: &Path,
    induced: Option<(f64, &TimeFunction)>,
) -> Result<TimeFunction> {
    let order = |o: u32| {
        Interpolation::from_order(o)
            .map_err(|_| Error::config(format!("{key}.order"), "must be 1 or 3"))
    };
    let f = match spec {
        FunctionSpec::Constant { value } => {
            if !value.is_finite() {
                return Err(Error::config(format!("{key}.value"), "must be finite"));
            }
            TimeFunction::constant(*value)
        }
        FunctionSpec::Gaussian {
            center,
            width,
            height,
        } => TimeFunction::gaussian(*center, *width, *height)
            .map_err(|e| Error::config(key, bare(e)))?,
        FunctionSpec::SinSquared {
            start,
            duration,
            height,
        } => TimeFunction::sin_squared(*start, *duration, *height)
            .map_err(|e| Error::config(key, bare(e)))?,
        FunctionSpec::Table { path, order: o } => {
            let full = if path.is_relative() {
                base_dir.join(path)
            } else {
                path.clone()
            };
            let (t, v) = read_sample_table(&full)
                .map_err(|e| Error::config(format!("{key}.path"), bare(e)))?;
            TimeFunction::tabulated(t, v, order(*o)?)
                .map_err(|e| Error::config(format!("{key}.path"), bare(e)))?
        }
        FunctionSpec::Samples {
            times,
            values,
            order: o,
        } => TimeFunction::tabulated(times.clone(), values.clone(), order(*o)?)
            .map_err(|e| Error::config(key, bare(e)))?,
        FunctionSpec::Induced { kappa } => match induced {
            Some((f0, env)) => TimeFunction::scaled(kappa * f0, env.clone()),
            None => {
                return Err(Error::config(
                    format!("{key}.kind"),
                    "`induced` is only available for dipole functions",
                ))
            }
        },
    };
    Ok(f)
}

const MODEL_PROBES: usize = 2001;

fn check_model(model: &SystemModel, envelope: &TimeFunction, t0: f64, t1: f64) -> Result<()> {
    let fns = [
        ("model.omega_ab", &model.omega_ab),
        ("model.mu_aa", &model.mu_aa),
        ("model.mu_bb", &model.mu_bb),
        ("model.mu_ab", &model.mu_ab),
    ];
    for (key, f) in fns {
        if !f.covers(t0, t1) {
            return Err(Error::config(
                key,
                format!("does not cover the pulse window [{t0}, {t1}]"),
            ));
        }
    }
    for i in 0..MODEL_PROBES {
        let t = t0 + (t1 - t0) * i as f64 / (MODEL_PROBES - 1) as f64;
        let w = model.omega_ab.eval(t)?;
        if !(w > 0.0) {
            return Err(Error::config(
                "model.omega_ab",
                format!("level crossing: omega_ab({t}) = {w} must be > 0"),
            ));
        }
        let m = envelope.eval(t).unwrap_or(0.0);
        let mu = model.mu_ab.eval(t)?;
        if m > 0.0 && mu < 0.0 {
            return Err(Error::config(
                "model.mu_ab",
                format!("mu_ab({t}) = {mu} < 0 under the pulse; absorb the sign into the phase convention"),
            ));
        }
        if m > 0.0 && mu == 0.0 && t > t0 && t < t1 {
            return Err(Error::config(
                "model.mu_ab",
                format!("mu_ab({t}) = 0 inside the pulse support"),
            ));
        }
    }
    Ok(())
}

/// Set `dotted.key` in a TOML table from `key=value`. The value is parsed
/// as TOML and falls back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty key segment"));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(Error::config(key, format!("`{part}` is not a table"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Name the offending key of a TOML error: the backticked field of
/// missing/unknown-field messages, else the `key =` on the error's line
/// under its `[section]`.
fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let mut message = e.message().trim().to_string();
    if message.contains("untagged enum ChirpSpec") {
        message =
            "expected \"design\" or a function table such as { kind = \"constant\", value = 1.0 }"
                .into();
    }
    let section_at = |offset: usize| {
        text[..offset.min(text.len())].lines().rev().find_map(|l| {
            let l = l.trim();
            (l.starts_with('[') && l.ends_with(']'))
                .then(|| l.trim_matches(|c| c == '[' || c == ']').trim().to_string())
        })
    };
    let join = |section: Option<String>, k: &str| match section {
        Some(s) if !s.is_empty() => format!("{s}.{k}"),
        _ => k.to_string(),
    };
    // dotted path of the value the span points into
    let path_at = |start: usize| -> Option<String> {
        let start = start.min(text.len());
        let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
        let line = text[line_start..].lines().next().unwrap_or("");
        let section = section_at(line_start);
        match line.find('=') {
            Some(eq) if !line.trim_start().starts_with('[') && line_start + eq < start => {
                let k = line[..eq].trim();
                Some(join(section, k))
            }
            _ => section_at(start + 1),
        }
    };
    let span = e.span();
    if let Some(field) = message.split('`').nth(1) {
        if message.starts_with("missing field") || message.starts_with("unknown field") {
            let parent = span.as_ref().and_then(|s| {
                let start = s.start.min(text.len());
                let spanned = text[start..s.end.min(text.len())].trim();
                if spanned.starts_with('[') {
                    Some(
                        spanned
                            .trim_matches(|c| c == '[' || c == ']')
                            .trim()
                            .to_string(),
                    )
                } else if spanned.starts_with('{') {
                    path_at(start)
                } else {
                    section_at(start + 1)
                }
            });
            return Error::config(join(parent, field), message.clone());
        }
    }
    if let Some(path) = span.and_then(|s| path_at(s.start)) {
        return Error::config(path, message);
    }
    Error::config("<config>", message)
}
