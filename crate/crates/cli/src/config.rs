//! TOML configuration: tolerances plus an optional scenario table whose
//! entries are overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scenario::RawSpec;

/// Pass/fail thresholds. Finite-difference residuals must decay at
/// `min_order` between the grid and its halving and stay below
/// `fd_scale * h^2` on the finer grid, unless both values are already below
/// `rounding_floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Closed-form agreement, reality of tangents and exact transfers.
    pub algebraic: f64,
    pub fd_scale: f64,
    pub min_order: f64,
    pub rounding_floor: f64,
    /// Unit-norm drift of the group integrator before renormalization.
    pub drift: f64,
    /// `|K_ext - K|` for surfaces built by the profile ODE, whose accuracy
    /// is set by the RK4 step rather than the grid.
    pub curvature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-10,
            fd_scale: 100.0,
            min_order: 1.8,
            rounding_floor: 1e-11,
            drift: 1e-8,
            curvature: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub tolerances: Tolerances,
    pub scenario: RawSpec,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        // File sources are relative to the config file.
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        };
        rebase(&mut cfg.scenario.gauss_map_file);
        rebase(&mut cfg.scenario.k_file);
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_tables_keep_defaults() {
        let cfg: ConfigFile = toml::from_str("[tolerances]\nfd_scale = 10.0\n[scenario]\nscenario = \"gzbar\"\nk = 1.5\n").unwrap();
        assert_eq!(cfg.tolerances.fd_scale, 10.0);
        assert_eq!(cfg.tolerances.algebraic, Tolerances::default().algebraic);
        assert_eq!(cfg.scenario.k, Some(1.5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigFile>("[tolerances]\nalgebriac = 1.0\n").is_err());
    }
}
