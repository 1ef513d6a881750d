//! Config-driven command-line front end.

pub mod config;
pub mod pipeline;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, Setup, OUTPUT_ROOT_VAR};
pub use pipeline::{
    exit_code, resolve_pulse, run_design, simulate, verify, Command, Outcome, SweepAxis,
    Verification, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_RUNTIME, EXIT_VERIFY_FAILED,
};

use crate::dynamics::TraceKind;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "rabichirp",
    version,
    about = "Design and check chirped pulses for two-level systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Solve for the chirp and write report.txt and chirp.dat.
    Design(Common),
    /// Propagate the pulse and write one trace CSV per frame.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated frames (lab, tau-full, tau-rwa, rabi-b); sets run.frames.
        #[arg(long, value_delimiter = ',')]
        frames: Vec<String>,
    },
    /// Check transfer and the RWA metric; exit 4 when either falls short.
    Verify(Common),
    /// Run a command over the cartesian product of parameter values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=v1,v2,...`; repeat for more axes.
        #[arg(long = "vary", required = true)]
        vary: Vec<String>,
        /// Command run at every point.
        #[arg(long = "run", default_value = "verify", value_parser = ["design", "simulate", "verify"])]
        run: String,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    pub config: PathBuf,
    /// Override a config key, e.g. `--set pulse.f0=0.02`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Sets run.output_dir.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Root for relative output directories.
    #[arg(long, env = OUTPUT_ROOT_VAR)]
    pub output_root: Option<PathBuf>,
}

impl Common {
    fn overrides(&self, extra: Vec<String>) -> Vec<String> {
        let mut all = self.set.clone();
        if let Some(dir) = &self.output_dir {
            all.push(format!(
                "run.output_dir={}",
                toml_string(&dir.to_string_lossy())
            ));
        }
        all.extend(extra);
        all
    }

    fn load(&self, extra: Vec<String>) -> Result<RunConfig> {
        RunConfig::load(&self.config, &self.overrides(extra))
    }

    fn base_dir(&self) -> &Path {
        match self.config.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        }
    }

    fn setup(&self, extra: Vec<String>) -> Result<Setup> {
        self.load(extra)?
            .build(self.base_dir(), self.output_root.as_deref())
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn frames_override(frames: &[String]) -> Result<Vec<String>> {
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let names = frames
        .iter()
        .map(|f| TraceKind::parse(f).map(|k| toml_string(k.name())))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| crate::Error::config("run.frames", e.to_string()))?;
    Ok(vec![format!("run.frames=[{}]", names.join(", "))])
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        CliCommand::Design(c) => Command::Design.run(&c.setup(Vec::new())?),
        CliCommand::Verify(c) => Command::Verify.run(&c.setup(Vec::new())?),
        CliCommand::Simulate { common, frames } => {
            Command::Simulate.run(&common.setup(frames_override(frames)?)?)
        }
        CliCommand::Sweep { common, vary, run } => {
            let axes = vary
                .iter()
                .map(|v| SweepAxis::parse(v))
                .collect::<Result<Vec<_>>>()?;
            let command = match run.as_str() {
                "design" => Command::Design,
                "simulate" => Command::Simulate,
                _ => Command::Verify,
            };
            let config = common.load(Vec::new())?;
            pipeline::cmd_sweep(
                &config,
                common.base_dir(),
                common.output_root.as_deref(),
                &axes,
                command,
            )
        }
    }
}

/// Run the parsed command line, print the summary, and return the exit status.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(out) => {
            print!("{}", out.to_text());
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}
