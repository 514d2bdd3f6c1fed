//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigensolve::LanczosOptions;
use crate::epsilon_spectrum::SweepSettings;
use crate::error::{Error, Result};
use crate::limit_spectrum::{DispersionParams, MIN_TERMS};
use crate::mesh2d::{CellGeometry, MIN_DIVISIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub side: f64,
    pub center: [f64; 2],
    pub r: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = CellGeometry::default();
        Self {
            side: g.side,
            center: g.center,
            r: g.radius,
            length: g.height,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub n_div: usize,
    pub eps_list: Vec<f64>,
    /// ε for `eps-spectrum`; the last entry of `eps_list` when absent.
    pub eps: Option<f64>,
    pub j_max: usize,
    pub k_total: usize,
    pub n_terms: usize,
    pub eig_tol: f64,
    pub root_tol: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            n_div: 64,
            eps_list: vec![0.4, 0.2, 0.1, 0.05],
            eps: None,
            j_max: 6,
            k_total: 8,
            n_terms: 500,
            eig_tol: 1e-8,
            root_tol: 1e-10,
            output_dir: PathBuf::from("out"),
            seed: 24_029,
        }
    }
}

fn field_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field_error(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        positive("geometry.side", g.side)?;
        positive("geometry.r", g.r)?;
        positive("geometry.L", g.length)?;
        self.cell_geometry()
            .map_err(|e| field_error("geometry.r", e.to_string()))?;
        if self.n_div < MIN_DIVISIONS {
            return Err(field_error("n_div", format!("must be at least {MIN_DIVISIONS}")));
        }
        if self.eps_list.is_empty() {
            return Err(field_error("eps_list", "must not be empty"));
        }
        for &e in &self.eps_list {
            if !(e > 0.0 && e <= 1.0) {
                return Err(field_error("eps_list", format!("entries must lie in (0, 1], got {e}")));
            }
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(field_error("eps_list", "must be strictly decreasing"));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e <= 1.0) {
                return Err(field_error("eps", format!("must lie in (0, 1], got {e}")));
            }
        }
        if self.j_max == 0 {
            return Err(field_error("j_max", "must be at least 1"));
        }
        if self.k_total == 0 {
            return Err(field_error("k_total", "must be at least 1"));
        }
        if self.n_terms < MIN_TERMS {
            return Err(field_error("n_terms", format!("must be at least {MIN_TERMS}")));
        }
        for (name, tol) in [("eig_tol", self.eig_tol), ("root_tol", self.root_tol)] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(field_error(name, format!("must lie in (0, 1), got {tol}")));
            }
        }
        Ok(())
    }

    pub fn cell_geometry(&self) -> Result<CellGeometry> {
        let g = &self.geometry;
        CellGeometry::new(g.side, g.center, g.r, g.length)
    }

    pub fn dispersion_params(&self) -> Result<DispersionParams> {
        DispersionParams::new(self.cell_geometry()?, self.n_terms)
    }

    pub fn lanczos(&self) -> LanczosOptions {
        LanczosOptions {
            tol: self.eig_tol,
            seed: self.seed,
            ..LanczosOptions::default()
        }
    }

    pub fn sweep_settings(&self) -> Result<SweepSettings> {
        Ok(SweepSettings {
            geometry: self.cell_geometry()?,
            n_div: self.n_div,
            eps_list: self.eps_list.clone(),
            j_max: self.j_max,
            k_total: self.k_total,
            n_terms: self.n_terms,
            lanczos: self.lanczos(),
        })
    }

    /// ε used by `eps-spectrum`.
    pub fn single_eps(&self) -> f64 {
        self.eps
            .unwrap_or_else(|| *self.eps_list.last().expect("validated non-empty"))
    }

    /// SHA-256 of the canonical JSON form, with `output_dir` left out so the
    /// hash only depends on what is computed.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}
