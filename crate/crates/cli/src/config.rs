//! Flat key-value configuration, merged with command-line flags.
//!
//! The file is TOML restricted to top-level scalars and arrays:
//!
//! ```toml
//! gamma0 = 0.333333
//! gamma1 = 0.5
//! n_sites = 500
//! t_max = 500.0
//! integrator = "reference"
//! ```
//!
//! Any flag given on the command line wins over the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every key the config file may carry. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub gamma0: Option<f64>,
    pub gamma1: Option<f64>,
    pub n_sites: Option<usize>,
    pub topology: Option<String>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub integrator: Option<String>,
    pub stride: Option<usize>,
    pub max_site: Option<usize>,
    pub initial: Option<String>,
    pub cutoff: Option<usize>,
    pub s: Option<Vec<f64>>,
    pub sites: Option<Vec<usize>>,
    pub grid_points: Option<usize>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub epsilon: Option<f64>,
    pub delocalized_below: Option<f64>,
    pub checkpoints: Option<Vec<f64>>,
    pub phi0_re: Option<f64>,
    pub phi0_im: Option<f64>,
    pub normalized: Option<bool>,
    pub workers: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            field: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config {
            field: "config".into(),
            message: e.message().to_string(),
        })?;
        for (key, value) in &table {
            if value.is_table() {
                return Err(CliError::Config {
                    field: key.clone(),
                    message: "nested tables are not allowed; the config is flat key = value".into(),
                });
            }
        }
        table.try_into().map_err(|e: toml::de::Error| CliError::Config {
            field: "config".into(),
            message: e.message().to_string(),
        })
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(mut self, flags: &Settings) -> Self {
        overlay!(self, flags;
            gamma0, gamma1, n_sites, topology, dt, t_max, integrator, stride, max_site,
            initial, cutoff, s, sites, grid_points, grid_min, grid_max, epsilon,
            delocalized_below, checkpoints, phi0_re, phi0_im, normalized, workers,
        );
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let s = Settings::from_toml("gamma0 = 0.25\ngamma1 = -0.5\ns = [0.5, 1.0]\nintegrator = \"euler\"\n")
            .unwrap();
        assert_eq!(s.gamma0, Some(0.25));
        assert_eq!(s.s, Some(vec![0.5, 1.0]));
        assert_eq!(s.integrator.as_deref(), Some("euler"));
    }

    #[test]
    fn rejects_unknown_and_nested() {
        assert!(Settings::from_toml("gamma2 = 1.0").is_err());
        let err = Settings::from_toml("[walk]\ngamma0 = 1.0").unwrap_err();
        assert!(err.to_string().contains("walk"), "{err}");
    }

    #[test]
    fn flags_win() {
        let file = Settings {
            gamma0: Some(0.1),
            gamma1: Some(0.2),
            ..Settings::default()
        };
        let flags = Settings {
            gamma0: Some(0.3),
            ..Settings::default()
        };
        let merged = file.overlay(&flags);
        assert_eq!(merged.gamma0, Some(0.3));
        assert_eq!(merged.gamma1, Some(0.2));
    }
}
