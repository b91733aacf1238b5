//! Command-line adapter: parse flags, merge an optional JSON config file on
//! top, run one pipeline stage, write artifacts and the report.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or no
//! candidate is found, 2 for usage, configuration and input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::brouwer::Profile;
use crate::lineworld::{Kind, LineInstance};
use crate::pipeline::{self, CandidateFile, RunConfig};
use crate::report::Report;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "hardnash", version, about = "Build and check end-of-line to equilibrium reductions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a line instance.
    Gen(Common),
    /// Validate an instance file (or a generated one).
    Validate(Common),
    /// Build the code and embedded field.
    Embed(Common),
    /// Check the geometric inequalities of the field.
    Geometry(Common),
    /// Follow the path to an approximate fixed point.
    FpFollow(Common),
    /// Compute and certify the two-player candidate equilibrium.
    Game2pCandidate(Common),
    /// Verify a two-player profile, with negative controls.
    Game2pVerify(Common),
    /// Lift the candidate into the population game.
    GamenpLift(Common),
    /// Verify a population profile as a weak equilibrium.
    GamenpVerify(Common),
    /// Run the two-party protocols and count bits.
    CommRun(Common),
    /// Run every stage.
    All(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value = "EOTL")]
    pub kind: Kind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Index space of the two-party split.
    #[arg(long = "m", default_value_t = crate::commsim::DEFAULT_M)]
    pub m_index: usize,
    #[arg(long, default_value = "demo", value_parser = parse_profile)]
    pub profile: Profile,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub code_target: Option<f64>,
    #[arg(long)]
    pub eps_np: Option<f64>,
    #[arg(long)]
    pub eps_bar: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// JSON config; its keys override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Artifact to read (instance, candidate or profile file).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Where to write the stage's artifact.
    #[arg(long)]
    pub artifact: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_profile(s: &str) -> std::result::Result<Profile, String> {
    match s.to_ascii_lowercase().as_str() {
        "demo" => Ok(Profile::Demo),
        "strict" => Ok(Profile::Strict),
        _ => Err(format!("unknown profile {s:?} (demo or strict)")),
    }
}

impl Common {
    pub fn run_config(&self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            n: self.n,
            kind: self.kind,
            seed: self.seed,
            m_index: self.m_index,
            profile: self.profile,
            h: self.h,
            delta: self.delta,
            eps: self.eps,
            code_target: self.code_target.unwrap_or(d.code_target),
            eps_np: self.eps_np.unwrap_or(d.eps_np),
            eps_bar: self.eps_bar.unwrap_or(d.eps_bar),
            samples: self.samples.unwrap_or(d.samples),
            comm_points: d.comm_points,
        };
        let Some(path) = &self.config else {
            return Ok(cfg);
        };
        let overrides: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let serde_json::Value::Object(over) = overrides else {
            return Err(Error::Malformed("config file must hold a JSON object".into()));
        };
        let mut merged = cfg.to_json();
        if let serde_json::Value::Object(base) = &mut merged {
            base.extend(over);
        }
        Ok(serde_json::from_value(merged)?)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn dispatch(cmd: &Command) -> Result<(Report, Option<PathBuf>)> {
    let (Command::Gen(c)
    | Command::Validate(c)
    | Command::Embed(c)
    | Command::Geometry(c)
    | Command::FpFollow(c)
    | Command::Game2pCandidate(c)
    | Command::Game2pVerify(c)
    | Command::GamenpLift(c)
    | Command::GamenpVerify(c)
    | Command::CommRun(c)
    | Command::All(c)) = cmd;
    let cfg = c.run_config()?;
    let artifact = c.artifact.as_deref();
    let report = match cmd {
        Command::Gen(_) => {
            let (inst, rep) = pipeline::gen(&cfg)?;
            if let Some(p) = artifact {
                write_json(p, &inst.to_file())?;
            }
            rep
        }
        Command::Validate(_) => {
            let inst = match &c.input {
                Some(p) => LineInstance::from_file(&read_json(p)?)?,
                None => cfg.instance()?,
            };
            pipeline::validate(&cfg, &inst)
        }
        Command::Embed(_) => {
            let (field, rep) = pipeline::embed(&cfg)?;
            if let Some(p) = artifact {
                write_json(p, &field.code().to_file())?;
            }
            rep
        }
        Command::Geometry(_) => pipeline::geometry(&cfg)?,
        Command::FpFollow(_) => pipeline::fp_follow(&cfg)?,
        Command::Game2pCandidate(_) => {
            let (file, rep) = pipeline::game2p_candidate(&cfg)?;
            if let Some(p) = artifact {
                write_json(p, &file)?;
            }
            rep
        }
        Command::Game2pVerify(_) => {
            let cand: Option<CandidateFile> = c.input.as_deref().map(read_json).transpose()?;
            pipeline::game2p_verify(&cfg, cand)?
        }
        Command::GamenpLift(_) => {
            let (file, rep) = pipeline::gamenp_lift(&cfg)?;
            if let Some(p) = artifact {
                write_json(p, &file)?;
            }
            rep
        }
        Command::GamenpVerify(_) => {
            let prof = c.input.as_deref().map(read_json).transpose()?;
            pipeline::gamenp_verify(&cfg, prof)?
        }
        Command::CommRun(_) => pipeline::comm_run(&cfg)?,
        Command::All(_) => pipeline::all(&cfg)?,
    };
    Ok((report, c.out.clone()))
}

/// Exit code for an error that aborted a stage.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::NotFound { .. } | Error::BudgetExhausted { .. } | Error::ConstructionFailed { .. } => 1,
        _ => 2,
    }
}

/// Parse `argv`, run, write the report; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok((report, out)) => {
            let mut text = report.to_json();
            text.push('\n');
            let written = match out {
                Some(p) => std::fs::write(&p, text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            for c in report.failures() {
                eprintln!("FAIL {}: measured {} threshold {}", c.name, c.measured, c.threshold);
            }
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}
