//! `chiral`: command-line front end for chiral-core.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use chiral_core::{Error, Result};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::*;
use config::{resolve, Globals, RunConfig};

#[derive(Parser)]
#[command(name = "chiral", version, about = "Frustrated spin chains and chirality walls on the square lattice")]
struct Cli {
    /// JSON config; keys are the long flag names, flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print failures as a JSON object on stderr
    #[arg(long, global = true)]
    error_json: bool,
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a ground-state spin field for a chirality pair
    Groundstate(GroundstateArgs),
    /// Energy and its exact decomposition for a spin field
    Energy(EnergyArgs),
    /// Spin field to chirality pair and vorticity
    Transform(TransformArgs),
    /// Jump set, classes, total variations and limit energy of a mesh potential
    Classify(ClassifyArgs),
    /// Emit a built-in mesh potential
    Mesh(MeshCmdArgs),
    /// Recovery spin field at one (lambda, delta)
    Recover(RecoverArgs),
    /// Recovery energies along a schedule
    Sweep(SweepArgs),
    /// Minimize the lattice energy under frozen boundary layers
    Minimize(MinimizeArgs),
    /// Energy of the optimal one-dimensional profile
    Profile1d(ProfileArgs),
    /// Exact identities and classification checks
    Selftest(SelftestArgs),
}

struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numerical() { 2 } else { 1 }, kind: e.kind().to_string(), message: e.to_string() }
    }
}

fn execute<O, F>(cli: &Cli, name: &str, options: &O, f: F) -> std::result::Result<(), Failure>
where
    O: Serialize + DeserializeOwned,
    F: FnOnce(&RunConfig<O>) -> Result<Output>,
{
    let cfg = resolve(name, cli.config.as_deref(), &cli.globals, options)?;
    if let Some(n) = cfg.globals.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    let out = f(&cfg)?;
    match &cfg.globals.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(Error::from)?;
            for (file, text) in &out.files {
                chiral_core::io::write_text(dir.join(file), text)?;
            }
            chiral_core::io::write_text(dir.join("run_config.json"), &cfg.canonical_json()?)?;
        }
        None => print!("{}", out.files[0].1),
    }
    match out.failure {
        Some((kind, message)) => Err(Failure { code: 2, kind, message }),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Groundstate(o) => execute(&cli, "groundstate", o, groundstate),
        Command::Energy(o) => execute(&cli, "energy", o, energy),
        Command::Transform(o) => execute(&cli, "transform", o, transform_cmd),
        Command::Classify(o) => execute(&cli, "classify", o, classify),
        Command::Mesh(o) => execute(&cli, "mesh", o, mesh),
        Command::Recover(o) => execute(&cli, "recover", o, recover),
        Command::Sweep(o) => execute(&cli, "sweep", o, sweep),
        Command::Minimize(o) => execute(&cli, "minimize", o, minimize),
        Command::Profile1d(o) => execute(&cli, "profile1d", o, profile1d),
        Command::Selftest(o) => execute(&cli, "selftest", o, selftest),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if cli.error_json {
                let v = serde_json::json!({ "error": f.kind, "message": f.message, "exit_code": f.code });
                eprintln!("{v}");
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
