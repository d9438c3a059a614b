//! Run configuration: a TOML file with `[frame]`, `[potential]`,
//! `[integrator]`, `[stamp]` and `[epoch]` sections.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::{PotentialParams, Scheme};
use crate::epoch::{resolution_curves, Propagation, RecoverOptions, DEFAULT_DD_CASES_KPC};
use crate::frames::FrameParams;
use crate::stamp::MIN_ANCHORS;

/// The documented defaults, as a config file.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../data/default_config.toml");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("ParseError at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("UnknownKey: {0}")]
    UnknownKey(String),
    #[error("InvariantViolation: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub dt_myr: f64,
    pub t_end_myr: f64,
    pub scheme: Scheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt_myr: 0.1, t_end_myr: 1000.0, scheme: Scheme::Leapfrog }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StampConfig {
    pub k: usize,
    pub min_sep_kpc: f64,
    pub match_tol_kpc: f64,
}

impl Default for StampConfig {
    fn default() -> Self {
        StampConfig { k: 16, min_sep_kpc: 1.0, match_tol_kpc: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PropagationMode {
    #[default]
    Linear,
    Orbit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpochConfig {
    pub dd_cases_kpc: Vec<f64>,
    pub v_min_kms: f64,
    pub v_max_kms: f64,
    pub n_points: usize,
    pub window_lo_myr: f64,
    pub window_hi_myr: f64,
    pub propagation: PropagationMode,
}

impl Default for EpochConfig {
    fn default() -> Self {
        EpochConfig {
            dd_cases_kpc: DEFAULT_DD_CASES_KPC.to_vec(),
            v_min_kms: 10.0,
            v_max_kms: 1000.0,
            n_points: 100,
            window_lo_myr: -5.0,
            window_hi_myr: 5.0,
            propagation: PropagationMode::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub frame: FrameParams,
    pub potential: PotentialParams,
    pub integrator: IntegratorConfig,
    pub stamp: StampConfig,
    pub epoch: EpochConfig,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Config {
    /// Parses and validates config text. Absent keys take defaults.
    pub fn from_toml_str(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            if message.contains("unknown field") {
                ConfigError::UnknownKey(message)
            } else {
                let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
                ConfigError::ParseError { line, message }
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::InvariantViolation(m));
        self.frame
            .validate()
            .map_err(|e| ConfigError::InvariantViolation(e.to_string()))?;
        self.potential
            .validate(self.frame.r0_kpc)
            .map_err(|e| ConfigError::InvariantViolation(e.to_string()))?;
        let ic = &self.integrator;
        if !(ic.dt_myr.is_finite() && ic.dt_myr > 0.0) {
            return bad(format!("integrator.dt_myr = {} must be positive", ic.dt_myr));
        }
        if !(ic.t_end_myr.is_finite() && ic.t_end_myr >= ic.dt_myr) {
            return bad(format!("integrator.t_end_myr = {} must be at least dt_myr", ic.t_end_myr));
        }
        let sc = &self.stamp;
        if sc.k < MIN_ANCHORS || sc.k > u16::MAX as usize {
            return bad(format!("stamp.k = {} must be in [{MIN_ANCHORS}, 65535]", sc.k));
        }
        if !(sc.min_sep_kpc.is_finite() && sc.min_sep_kpc >= 0.0) {
            return bad(format!("stamp.min_sep_kpc = {} must be non-negative", sc.min_sep_kpc));
        }
        if !(sc.match_tol_kpc.is_finite() && sc.match_tol_kpc > 0.0) {
            return bad(format!("stamp.match_tol_kpc = {} must be positive", sc.match_tol_kpc));
        }
        let ec = &self.epoch;
        resolution_curves(&ec.dd_cases_kpc, ec.v_min_kms, ec.v_max_kms, ec.n_points)
            .map_err(|e| ConfigError::InvariantViolation(format!("epoch: {e}")))?;
        if !(ec.window_lo_myr.is_finite() && ec.window_hi_myr.is_finite() && ec.window_lo_myr < ec.window_hi_myr)
        {
            return bad(format!(
                "epoch window [{}, {}] must be finite with lo < hi",
                ec.window_lo_myr, ec.window_hi_myr
            ));
        }
        Ok(())
    }

    /// An absent path yields the defaults.
    pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                Config::from_toml_str(&text)
            }
        }
    }

    /// The effective configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`Config::to_toml`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn propagation(&self, mode: PropagationMode) -> Propagation {
        match mode {
            PropagationMode::Linear => Propagation::Linear,
            PropagationMode::Orbit => Propagation::Orbit {
                potential: self.potential,
                step_myr: self.integrator.dt_myr,
                scheme: self.integrator.scheme,
            },
        }
    }

    pub fn recover_options(&self) -> RecoverOptions {
        RecoverOptions {
            window_lo_myr: self.epoch.window_lo_myr,
            window_hi_myr: self.epoch.window_hi_myr,
            match_tol_kpc: self.stamp.match_tol_kpc,
            propagation: self.propagation(self.epoch.propagation),
            ..RecoverOptions::default()
        }
    }

    /// Comment lines (without the leading `# `) identifying the tool, the
    /// configuration and the seed, followed by the effective config.
    pub fn header_lines(&self, seed: u64) -> Vec<String> {
        let f = &self.frame;
        let mut lines = vec![
            format!("tool: gstamp {}", env!("CARGO_PKG_VERSION")),
            format!("config_hash: {}", self.hash()),
            format!("seed: {seed}"),
            format!(
                "frame: r0_kpc={} zsun_kpc={} vsun_kms={:?} ngp_ra_deg={} ngp_dec_deg={} lncp_deg={}",
                f.r0_kpc, f.zsun_kpc, f.vsun_kms, f.ngp_ra_deg, f.ngp_dec_deg, f.lncp_deg
            ),
        ];
        lines.extend(
            self.to_toml()
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| format!("config: {l}")),
        );
        lines
    }
}
