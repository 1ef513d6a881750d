use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cli::config::{RunConfig, Setup};
use crate::designer::{
    design_chirp, modulation_depth, rwa_validity_metric, verify_on_map, DesignOptions,
    DesignReport, RwaMetric, Transfer, VerifyOptions,
};
use crate::dynamics::{
    integrate_lab, integrate_rabi, integrate_tau_full, integrate_tau_rwa, phase_integrals,
    PropagateOptions, Sampling, Trace, TraceKind,
};
use crate::error::{Error, Result};
use crate::model::PulseSpec;
use crate::transform::{build_tau_map, grid_points_for, TauMap};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Samples per trace when `run.samples` is unset.
pub const DEFAULT_SAMPLES: usize = 2000;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Io { .. } | Error::Invalid(_) => EXIT_CONFIG,
        Error::DesignFailure { .. } => EXIT_NOT_CONVERGED,
        Error::Domain { .. }
        | Error::LevelCrossing { .. }
        | Error::DegenerateCoupling { .. }
        | Error::Orientation { .. }
        | Error::TauAmbiguity { .. }
        | Error::Integration { .. } => EXIT_RUNTIME,
    }
}

/// Exit status plus the `key = value` lines printed on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub lines: Vec<(String, String)>,
}

impl Outcome {
    fn new(code: i32) -> Self {
        Outcome {
            code,
            lines: Vec::new(),
        }
    }

    fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn write_summary(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("summary.txt"), &self.to_text())
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn design_options(setup: &Setup) -> DesignOptions {
    let s = &setup.config.solver;
    DesignOptions {
        tol: s.design_tol,
        max_iter: s.design_max_iter,
        relaxation: s.relaxation,
        points_per_period: s.points_per_period,
        ..Default::default()
    }
}

fn verify_options(setup: &Setup) -> VerifyOptions {
    VerifyOptions {
        tol: setup.config.solver.tol,
        tau_end: setup.tau_end(),
        coupling: setup.verify_coupling(),
        samples: setup.config.run.samples.unwrap_or(DEFAULT_SAMPLES),
        points_per_period: setup.config.solver.points_per_period,
    }
}

fn tau_map(setup: &Setup, pulse: &PulseSpec) -> Result<TauMap> {
    let n = grid_points_for(&setup.model, pulse, setup.config.solver.points_per_period)?;
    build_tau_map(&setup.model, pulse, n)
}

/// Run the chirp designer on `setup` and check the result.
pub fn run_design(setup: &Setup) -> Result<DesignReport> {
    let run = &setup.config.run;
    let design = design_chirp(&setup.model, &setup.pulse, &design_options(setup))?;
    let map = tau_map(setup, &design.pulse)?;
    let rwa_metric = rwa_validity_metric(&setup.model, &design.pulse, &map)?;
    let depth = modulation_depth(&map)?;
    let transfer = if map.tau_max() > 0.0 {
        Some(verify_on_map(&map, setup.initial, &verify_options(setup))?)
    } else {
        None
    };
    Ok(DesignReport {
        design,
        rwa_metric,
        rwa_threshold: run.rwa_threshold,
        modulation_depth: depth,
        transfer,
        transfer_threshold: run.transfer_threshold,
    })
}

fn design_lines(out: &mut Outcome, report: &DesignReport) {
    let d = &report.design;
    out.push("design.converged", d.converged);
    out.push("design.iterations", d.iterations());
    out.push("design.final_change", format!("{:e}", d.final_change()));
    out.push("design.residual_sup", format!("{:e}", d.final_residual()));
}

/// The pulse a run should use: the configured one, or a fresh design
/// together with its report. An unconverged design still returns its report.
pub fn resolve_pulse(setup: &Setup) -> Result<(PulseSpec, Option<DesignReport>)> {
    if !setup.design {
        return Ok((setup.pulse.clone(), None));
    }
    let report = run_design(setup)?;
    Ok((report.design.pulse.clone(), Some(report)))
}

/// [`resolve_pulse`] for commands: writes the design report and gives
/// `None` when the design did not converge.
fn designed_pulse(setup: &Setup, out: &mut Outcome) -> Result<Option<PulseSpec>> {
    let (pulse, report) = resolve_pulse(setup)?;
    let Some(report) = report else {
        return Ok(Some(pulse));
    };
    report.write(&setup.output_dir)?;
    design_lines(out, &report);
    Ok(report.converged().then_some(pulse))
}

/// `design`: write `report.txt` and `chirp.dat`.
pub fn cmd_design(setup: &Setup) -> Result<Outcome> {
    if !setup.design {
        return Err(Error::config(
            "pulse.chirp",
            "the design command needs chirp = \"design\"",
        ));
    }
    let report = run_design(setup)?;
    report.write(&setup.output_dir)?;
    let mut out = Outcome::new(if report.converged() {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    });
    design_lines(&mut out, &report);
    out.push("rwa_metric", format!("{:e}", report.rwa_metric.value));
    out.push("rwa_pass", report.rwa_metric.passes(report.rwa_threshold));
    out.push("modulation_depth", format!("{:e}", report.modulation_depth));
    if let Some(t) = &report.transfer {
        out.push("p_beta_max", format!("{:.12}", t.p_beta_max));
        out.push("tau_at_max", format!("{:.12}", t.tau_at_max));
    }
    out.push("report", "report.txt");
    out.push("chirp", "chirp.dat");
    out.write_summary(&setup.output_dir)?;
    Ok(out)
}

/// Propagate `pulse` in each requested frame. Transformed frames are
/// sampled uniformly in `tau`; the lab frame at the matching times.
pub fn simulate(setup: &Setup, pulse: &PulseSpec, frames: &[TraceKind]) -> Result<Vec<Trace>> {
    let opts = PropagateOptions::with_tol(setup.config.solver.tol)
        .derivative(setup.config.solver.derivative);
    let n = setup.config.run.samples.unwrap_or(DEFAULT_SAMPLES);
    let needs_map = frames.iter().any(|k| *k != TraceKind::Lab);
    let map = if pulse.f0() > 0.0 {
        Some(tau_map(setup, pulse)?)
    } else if needs_map {
        return Err(Error::config(
            "pulse.f0",
            "transformed frames need F0 > 0; select frames = [\"lab\"] for field-free runs",
        ));
    } else {
        None
    };
    let (t0, t1) = pulse.window();
    let mut taus = Vec::new();
    let mut lab_end = t1;
    let mut lab_points = Vec::new();
    if let Some(map) = &map {
        let tau_max = map.tau_max();
        let tau_end = setup.config.run.tau_end.map_or(tau_max, |t| t.min(tau_max));
        taus = (1..=n)
            .map(|i| {
                if i == n {
                    tau_end
                } else {
                    tau_end * i as f64 / n as f64
                }
            })
            .collect();
        if frames.contains(&TraceKind::Lab) {
            for &tau in &taus {
                let t = if tau >= tau_max { t1 } else { map.invert(tau)? };
                if lab_points.last().map_or(t > t0, |&last| t > last) {
                    lab_points.push(t);
                }
            }
            lab_end = *lab_points.last().unwrap_or(&t1);
        }
    }
    let mut traces = Vec::with_capacity(frames.len());
    for &kind in frames {
        let init = setup.initial.in_frame(kind.frame());
        let trace = match (kind, &map) {
            (TraceKind::Lab, None) => integrate_lab(
                &setup.model,
                pulse,
                init,
                (t0, t1),
                &opts.clone().sampled(Sampling::Uniform(n)),
            )?,
            (TraceKind::Lab, Some(map)) => {
                let mut tr = integrate_lab(
                    &setup.model,
                    pulse,
                    init,
                    (t0, lab_end),
                    &opts.clone().sampled(Sampling::At(lab_points.clone())),
                )?;
                tr.attach_tau(map)?;
                tr
            }
            (_, Some(map)) => {
                let span = (0.0, *taus.last().expect("samples >= 1"));
                let sampled = opts.clone().sampled(Sampling::At(taus.clone()));
                match kind {
                    TraceKind::TauFull => integrate_tau_full(map, init, span, &sampled)?,
                    TraceKind::TauRwa => integrate_tau_rwa(map, init, span, &sampled)?,
                    _ => integrate_rabi(map, &phase_integrals(map)?, init, span, &sampled)?,
                }
            }
            (_, None) => unreachable!("map exists whenever a transformed frame is requested"),
        };
        traces.push(trace);
    }
    Ok(traces)
}

pub fn trace_file_name(kind: TraceKind) -> String {
    format!("trace_{}.csv", kind.name())
}

/// `simulate`: write `trace_<frame>.csv` for each selected frame.
pub fn cmd_simulate(setup: &Setup) -> Result<Outcome> {
    let mut out = Outcome::new(EXIT_OK);
    let pulse = match designed_pulse(setup, &mut out)? {
        Some(p) => p,
        None => {
            out.code = EXIT_NOT_CONVERGED;
            out.write_summary(&setup.output_dir)?;
            return Ok(out);
        }
    };
    let traces = simulate(setup, &pulse, &setup.config.run.frames)?;
    ensure_dir(&setup.output_dir)?;
    for trace in &traces {
        let name = trace_file_name(trace.kind);
        trace.write_csv(&setup.output_dir.join(&name))?;
        let key = trace.kind.name();
        let (_, p_beta) = trace.last_state().populations();
        out.push(format!("{key}.file"), name);
        out.push(format!("{key}.samples"), trace.len());
        out.push(format!("{key}.p_beta_end"), format!("{p_beta:.12}"));
        out.push(
            format!("{key}.norm_drift"),
            format!("{:e}", trace.max_norm_drift()),
        );
    }
    out.write_summary(&setup.output_dir)?;
    Ok(out)
}

/// Metric and transfer of a pulse, as checked by `verify`.
#[derive(Debug, Clone)]
pub struct Verification {
    pub metric: RwaMetric,
    pub transfer: Transfer,
    pub modulation_depth: f64,
}

impl Verification {
    pub fn passes(&self, setup: &Setup) -> bool {
        self.transfer.passes(setup.config.run.transfer_threshold)
            && self.metric.passes(setup.config.run.rwa_threshold)
    }
}

pub fn verify(setup: &Setup, pulse: &PulseSpec) -> Result<Verification> {
    let map = tau_map(setup, pulse)?;
    Ok(Verification {
        metric: rwa_validity_metric(&setup.model, pulse, &map)?,
        transfer: verify_on_map(&map, setup.initial, &verify_options(setup))?,
        modulation_depth: modulation_depth(&map)?,
    })
}

/// `verify`: exit 0 when both the transfer and the RWA metric pass.
pub fn cmd_verify(setup: &Setup) -> Result<Outcome> {
    let mut out = Outcome::new(EXIT_OK);
    let pulse = match designed_pulse(setup, &mut out)? {
        Some(p) => p,
        None => {
            out.code = EXIT_NOT_CONVERGED;
            out.write_summary(&setup.output_dir)?;
            return Ok(out);
        }
    };
    let v = verify(setup, &pulse)?;
    let run = &setup.config.run;
    let t = &v.transfer;
    out.push("frame", run.verify_frame.name());
    out.push("p_beta_max", format!("{:.12}", t.p_beta_max));
    out.push("tau_at_max", format!("{:.12}", t.tau_at_max));
    out.push("tau_end", format!("{:.12}", t.tau_end));
    out.push("p_beta_end", format!("{:.12}", t.p_beta_end));
    out.push("rwa_metric", format!("{:e}", v.metric.value));
    out.push("rwa_metric_at", v.metric.at);
    out.push("modulation_depth", format!("{:e}", v.modulation_depth));
    out.push("norm_drift", format!("{:e}", t.norm_drift));
    out.push("transfer_pass", t.passes(run.transfer_threshold));
    out.push("rwa_pass", v.metric.passes(run.rwa_threshold));
    let pass = v.passes(setup);
    out.push("pass", pass);
    if !pass {
        out.code = EXIT_VERIFY_FAILED;
    }
    ensure_dir(&setup.output_dir)?;
    t.trace
        .write_csv(&setup.output_dir.join(trace_file_name(run.verify_frame)))?;
    out.write_summary(&setup.output_dir)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Design,
    Simulate,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Design => "design",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
        }
    }

    pub fn run(self, setup: &Setup) -> Result<Outcome> {
        match self {
            Command::Design => cmd_design(setup),
            Command::Simulate => cmd_simulate(setup),
            Command::Verify => cmd_verify(setup),
        }
    }
}

/// Run `command` and fold errors into an exit status with an `error` line.
pub fn run_to_outcome(command: Command, setup: &Setup) -> Outcome {
    command.run(setup).unwrap_or_else(|e| failure(&e))
}

pub fn failure(err: &Error) -> Outcome {
    let mut out = Outcome::new(exit_code(err));
    out.push("error", err);
    out
}

/// One axis of a sweep: `key=v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl SweepAxis {
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::config(spec, "sweep axis must look like key=v1,v2"))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if values.iter().any(|v| v.is_empty()) {
            return Err(Error::config(key.trim(), "empty value in sweep axis"));
        }
        Ok(SweepAxis {
            key: key.trim().to_string(),
            values,
        })
    }
}

/// Cartesian product of the axes, first axis slowest, as override lists.
pub fn sweep_points(axes: &[SweepAxis]) -> Vec<Vec<String>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(format!("{}={}", axis.key, v));
                    q
                })
            })
            .collect();
    }
    points
}

/// `sweep`: run `command` on every point of the grid in parallel, each in
/// its own `run-NNN` subdirectory of the configured output directory.
pub fn cmd_sweep(
    config: &RunConfig,
    base_dir: &Path,
    output_root: Option<&Path>,
    axes: &[SweepAxis],
    command: Command,
) -> Result<Outcome> {
    if axes.is_empty() {
        return Err(Error::config("vary", "give at least one --vary key=v1,v2"));
    }
    let root = config.build(base_dir, output_root)?.output_dir;
    let points = sweep_points(axes);
    let setups: Vec<Result<Setup>> = points
        .iter()
        .enumerate()
        .map(|(i, overrides)| {
            let mut cfg = config.clone();
            for o in overrides {
                cfg = cfg.with_override(o)?;
            }
            cfg.run.output_dir = root.join(run_dir_name(i));
            cfg.build(base_dir, None)
        })
        .collect();
    let results: Vec<Outcome> = setups
        .par_iter()
        .map(|s| match s {
            Ok(setup) => {
                let out = run_to_outcome(command, setup);
                if out.code != EXIT_OK && out.get("error").is_some() {
                    let _ = out.write_summary(&setup.output_dir);
                }
                out
            }
            Err(e) => failure(e),
        })
        .collect();
    let mut out = Outcome::new(EXIT_OK);
    out.push("command", command.name());
    out.push("runs", points.len());
    for (i, (overrides, r)) in points.iter().zip(&results).enumerate() {
        out.push(format!("run.{i}.dir"), run_dir_name(i).display());
        out.push(format!("run.{i}.set"), overrides.join(" "));
        out.push(format!("run.{i}.exit"), r.code);
        for (k, v) in &r.lines {
            out.push(format!("run.{i}.{k}"), v);
        }
        out.code = out.code.max(r.code);
    }
    out.write_summary(&root)?;
    Ok(out)
}

fn run_dir_name(i: usize) -> PathBuf {
    PathBuf::from(format!("run-{i:03}"))
}
