//! Configuration, commands and result files.
//!
//! Every CSV file starts with a `# config_hash=<sha256>` line. The mesh file
//! keeps its header first and carries the hash on a trailing `#` line. JSON
//! files hold the hash in a `config_hash` field.

pub mod config;
pub mod validation;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use serde::Serialize;
use serde_json::json;

pub use config::{parse_config, parse_config_str, GeometryConfig, RunConfig};
pub use validation::{run_validation, Check};

use crate::epsilon_spectrum::{convergence_sweep, merged_csv, merged_spectrum_auto};
use crate::error::{Error, Result};
use crate::fem_assembly::ModeParts;
use crate::limit_spectrum::{limit_eigenvalues, mu0_lower_bound, roots_csv};
use crate::mesh2d::generate_mesh;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Mesh,
    LimitSpectrum,
    EpsSpectrum,
    Converge,
    Validate,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Mesh,
        Command::LimitSpectrum,
        Command::EpsSpectrum,
        Command::Converge,
        Command::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::LimitSpectrum => "limit-spectrum",
            Command::EpsSpectrum => "eps-spectrum",
            Command::Converge => "converge",
            Command::Validate => "validate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown command `{s}`")))
    }
}

/// Files written by a command and whether its checks passed.
#[derive(Debug, Clone, Serialize)]
pub struct CommandOutcome {
    pub command: String,
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

fn hashed_csv(hash: &str, body: &str) -> String {
    format!("# config_hash={hash}\n{body}")
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    info!("wrote {}", path.display());
    files.push(path);
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T, files: &mut Vec<PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, &text, files)
}

/// Runs `command` and writes its files into `config.output_dir`.
pub fn run_command(command: Command, config: &RunConfig) -> Result<CommandOutcome> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let hash = config.hash();
    let mut files = Vec::new();
    let mut passed = true;

    match command {
        Command::Mesh => {
            let mesh = generate_mesh(&config.cell_geometry()?, config.n_div)?;
            let text = format!("{}# config_hash={hash}\n", mesh.to_text());
            write_file(dir, "mesh.txt", &text, &mut files)?;
        }
        Command::LimitSpectrum => {
            let params = config.dispersion_params()?;
            let roots = limit_eigenvalues(&params, config.j_max)?;
            write_file(
                dir,
                "limit_spectrum.csv",
                &hashed_csv(&hash, &roots_csv(&roots)),
                &mut files,
            )?;
            let record = json!({
                "config_hash": hash,
                "version": VERSION,
                "params": params,
                "mu0": mu0_lower_bound(&params)?,
                "roots": roots,
            });
            write_json(dir, "limit_spectrum.json", &record, &mut files)?;
        }
        Command::EpsSpectrum => {
            let eps = config.single_eps();
            let mesh = generate_mesh(&config.cell_geometry()?, config.n_div)?;
            let parts = ModeParts::assemble(&mesh, eps)?;
            let (merged, spectra) = merged_spectrum_auto(
                &parts,
                config.geometry.length,
                config.j_max,
                config.k_total,
                &config.lanczos(),
            )?;
            write_file(
                dir,
                "eps_spectrum.csv",
                &hashed_csv(&hash, &merged_csv(&merged)),
                &mut files,
            )?;
            let modes: Vec<_> = spectra
                .iter()
                .map(|s| json!({"j": s.j, "gamma": s.gamma, "pairs": s.pairs}))
                .collect();
            let record = json!({
                "config_hash": hash,
                "version": VERSION,
                "eps": eps,
                "mesh_hash": mesh.content_hash(),
                "eig_tol": config.eig_tol,
                "merged": merged,
                "modes": modes,
            });
            write_json(dir, "eps_spectrum.json", &record, &mut files)?;
        }
        Command::Converge => {
            let report = convergence_sweep(&config.sweep_settings()?)?;
            write_file(dir, "convergence.csv", &hashed_csv(&hash, &report.to_csv()), &mut files)?;
            let record = json!({
                "config_hash": hash,
                "version": VERSION,
                "eig_tol": config.eig_tol,
                "root_tol": config.root_tol,
                "n_terms": config.n_terms,
                "report": report,
            });
            write_json(dir, "convergence.json", &record, &mut files)?;
        }
        Command::Validate => {
            let checks = run_validation(config)?;
            passed = checks.iter().all(|c| c.passed);
            let record = json!({
                "config_hash": hash,
                "version": VERSION,
                "passed": passed,
                "checks": checks,
            });
            write_json(dir, "validate.json", &record, &mut files)?;
        }
    }
    Ok(CommandOutcome {
        command: command.name().to_string(),
        files,
        passed,
    })
}
