//! `gaussframe`: verify, reconstruct, correspond, measure and export
//! surfaces with prescribed Gauss map and extrinsic curvature.
//!
//! Every command writes its artifacts and a `manifest.json` into `--out`,
//! prints the manifest to stdout and exits with status 0 when all checks
//! pass, 1 when any check fails and 2 on an error.

mod config;
mod error;
mod pipeline;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::CliResult;
use crate::pipeline::{Direction, Manifest};
use crate::scenario::{Branch, RawSpec, ScenarioSpec};

#[derive(Debug, Parser)]
#[command(
    name = "gaussframe",
    version,
    about = "Surfaces with prescribed Gauss map and extrinsic curvature in unimodular Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the frame and check the integrability conditions.
    Verify(Common),
    /// Integrate the frame in S3 or R3 and measure the result.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Build the K < 0 surface invariant under a one-parameter isometry
        /// group from its profile ODE instead of a Gauss-map scenario.
        #[arg(long)]
        revolution: bool,
    },
    /// Transfer a curvature function between S3 and R3.
    Correspond {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        direction: Direction,
        /// Value of the output curvature at the grid origin.
        #[arg(long, allow_hyphen_values = true)]
        base: Option<f64>,
    },
    /// Measure fundamental forms and extrinsic curvature of a surface sample.
    Oracle(Common),
    /// Write a surface sample as a quad mesh.
    Export(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Builtin: gzbar, pseudosphere, distance-sphere(r), great-sphere.
    #[arg(long)]
    scenario: Option<String>,
    /// Gauss map CSV (x,y,re,im) with its grid in a sidecar .toml.
    #[arg(long)]
    gauss_map: Option<PathBuf>,
    /// r3, s3, berger, psl2, nil3 or sol3.
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    branch: Option<Branch>,
    /// Constant extrinsic curvature.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Curvature CSV (x,y,val) on the scenario grid.
    #[arg(long)]
    k_file: Option<PathBuf>,
    /// Grid step of builtin scenarios.
    #[arg(long)]
    step: Option<f64>,
    /// Mesh format: obj or ply.
    #[arg(long)]
    export: Option<String>,
    /// Ambient coordinate (0-3) used as the stereographic pole.
    #[arg(long)]
    pole: Option<usize>,
    /// TOML file with [tolerances] and [scenario] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "gaussframe-out")]
    out: PathBuf,
}

impl Common {
    fn flags(&self) -> RawSpec {
        RawSpec {
            scenario: self.scenario.clone(),
            gauss_map_file: self.gauss_map.clone(),
            group: self.group.clone(),
            tau: self.tau,
            branch: self.branch,
            k: self.k,
            k_file: self.k_file.clone(),
            step: self.step,
            grid: None,
            export: self.export.clone(),
            pole: self.pole,
        }
    }

    fn load(&self, flat_input: Option<bool>) -> CliResult<(ScenarioSpec, config::Tolerances)> {
        self.load_with(flat_input, RawSpec::default())
    }

    /// `defaults` sit beneath both the config file and the flags.
    fn load_with(&self, flat_input: Option<bool>, defaults: RawSpec) -> CliResult<(ScenarioSpec, config::Tolerances)> {
        let cfg = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let raw = defaults.overlay(cfg.scenario).overlay(self.flags());
        Ok((ScenarioSpec::resolve(&raw, flat_input)?, cfg.tolerances))
    }
}

fn run(cli: Cli) -> CliResult<Manifest> {
    match cli.command {
        Command::Verify(c) => {
            let (spec, tol) = c.load(None)?;
            pipeline::verify(&spec, tol, &c.out)
        }
        Command::Reconstruct { common: c, revolution } => {
            // The swept surface realizes the pseudosphere datum in S3.
            let defaults = RawSpec {
                scenario: revolution.then(|| "pseudosphere".to_string()),
                ..RawSpec::default()
            };
            let (spec, tol) = c.load_with(None, defaults)?;
            pipeline::reconstruct(&spec, tol, &c.out, revolution)
        }
        Command::Correspond { common: c, direction, base } => {
            let (spec, tol) = c.load(Some(direction == Direction::R3ToS3))?;
            pipeline::correspond(&spec, tol, &c.out, direction, base)
        }
        Command::Oracle(c) => {
            let (spec, tol) = c.load(None)?;
            pipeline::oracle(&spec, tol, &c.out)
        }
        Command::Export(c) => {
            let (spec, tol) = c.load(None)?;
            pipeline::export(&spec, tol, &c.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(manifest) => {
            match serde_json::to_string_pretty(&manifest) {
                Ok(text) => println!("{text}"),
                Err(e) => eprintln!("{e}"),
            }
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
