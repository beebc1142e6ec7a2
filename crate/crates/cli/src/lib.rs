//! `mbias`: experiment driver that writes tidy CSV/JSON artifacts.
//!
//! Every subcommand owns a parameter table. Values come from the table
//! defaults, then the `--config` file, then `--key value` pairs given after
//! the subcommand name. Identical parameters and seed give byte-identical
//! outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use config::{describe, parse_overrides, read_config_file, ParamSpec, Params};
use error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK};
use io::OutDir;

#[derive(Debug, Parser)]
#[command(name = "mbias", version, about = "Manifold-bias experiments emitting CSV/JSON artifacts")]
pub struct Cli {
    /// Master seed; required by every stochastic subcommand.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Flat `key = value` parameter file; command-line pairs override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Curvature estimator error analysis on the peaks surface.
    Kappa(Overrides),
    /// Toy diffusion on the three-mode mixture: training, sampling, termination.
    Gmm(Overrides),
    /// Per-point criterion, calibration and detection metrics for a labeled point set.
    Detect(Overrides),
    /// Ridge surface with planted bumps and its differential maps.
    Surface(Overrides),
    /// AUC, AP and calibrated accuracy of a precomputed score column.
    Metrics(Overrides),
    /// Mixture-of-experts combiner over several detector features.
    Moe(Overrides),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Parameter overrides as `--key value` or `--key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    pub params: Vec<String>,
}

impl Sub {
    pub fn name(&self) -> &'static str {
        match self {
            Sub::Kappa(_) => "kappa",
            Sub::Gmm(_) => "gmm",
            Sub::Detect(_) => "detect",
            Sub::Surface(_) => "surface",
            Sub::Metrics(_) => "metrics",
            Sub::Moe(_) => "moe",
        }
    }

    fn overrides(&self) -> &[String] {
        match self {
            Sub::Kappa(o) | Sub::Gmm(o) | Sub::Detect(o) | Sub::Surface(o) | Sub::Metrics(o) | Sub::Moe(o) => &o.params,
        }
    }
}

/// Parameter table and stochasticity of a subcommand.
pub fn table(name: &str) -> (&'static [ParamSpec], bool) {
    match name {
        "kappa" => (commands::kappa::PARAMS, true),
        "gmm" => (commands::gmm::PARAMS, true),
        "detect" => (commands::detect::PARAMS, true),
        "surface" => (commands::surface::PARAMS, true),
        "metrics" => (commands::metrics::PARAMS, false),
        "moe" => (commands::moe::PARAMS, true),
        other => unreachable!("unknown subcommand {other}"),
    }
}

/// Everything a subcommand needs to run.
pub struct Context {
    pub seed: Option<u64>,
    pub params: Params,
    pub out: OutDir,
}

impl Context {
    pub fn seed(&self) -> u64 {
        self.seed.expect("checked before dispatch for stochastic subcommands")
    }
}

/// Keys accepted in every layer besides the subcommand's own table.
const RESERVED: [&str; 3] = ["seed", "out", "config"];

fn split_reserved(layer: Vec<(String, String)>) -> (Vec<(String, String)>, Vec<(String, String)>) {
    layer.into_iter().partition(|(k, _)| !RESERVED.contains(&k.as_str()))
}

fn parse_seed(v: &str) -> CliResult<u64> {
    v.parse().map_err(|e| CliError::Config(format!("seed = {v:?}: {e}")))
}

fn build_context(cli: &Cli) -> CliResult<Context> {
    let name = cli.command.name();
    let (tbl, stochastic) = table(name);
    let (cli_layer, cli_reserved) = split_reserved(parse_overrides(cli.command.overrides())?);
    let mut seed = cli.seed;
    let mut out = cli.out.clone();
    let mut config_path = cli.config.clone();
    for (k, v) in &cli_reserved {
        match k.as_str() {
            "seed" => seed = Some(parse_seed(v)?),
            "out" => out = PathBuf::from(v),
            _ => config_path = Some(PathBuf::from(v)),
        }
    }
    let mut layers = Vec::new();
    if let Some(path) = &config_path {
        let (file_layer, file_reserved) = split_reserved(read_config_file(path)?);
        for (k, v) in &file_reserved {
            match k.as_str() {
                "seed" if seed.is_none() => seed = Some(parse_seed(v)?),
                "seed" => {}
                other => return Err(CliError::Config(format!("key {other:?} is not allowed in a config file"))),
            }
        }
        layers.push(file_layer);
    }
    layers.push(cli_layer);
    let params = Params::resolve(tbl, &layers)?;
    if stochastic && seed.is_none() {
        return Err(CliError::Config(format!("subcommand {name} is stochastic and needs --seed")));
    }
    Ok(Context {
        seed,
        params,
        out: OutDir::create(&out)?,
    })
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let ctx = build_context(cli)?;
    match cli.command {
        Sub::Kappa(_) => commands::kappa::run(&ctx),
        Sub::Gmm(_) => commands::gmm::run(&ctx),
        Sub::Detect(_) => commands::detect::run(&ctx),
        Sub::Surface(_) => commands::surface::run(&ctx),
        Sub::Metrics(_) => commands::metrics::run(&ctx),
        Sub::Moe(_) => commands::moe::run(&ctx),
    }
}

/// Clap command with each subcommand's parameter table appended to its help.
pub fn command() -> clap::Command {
    let mut cmd = Cli::command();
    for name in ["kappa", "gmm", "detect", "surface", "metrics", "moe"] {
        let (tbl, _) = table(name);
        cmd = cmd.mut_subcommand(name, |c| c.after_help(describe(tbl)));
    }
    cmd
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_CONFIG;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("mbias {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
