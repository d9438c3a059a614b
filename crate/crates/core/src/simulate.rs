//! End-to-end trial: build a stamp from a catalog, let the clusters drift,
//! degrade the recipient's catalog, then recover where and when.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError};
use crate::config::Config;
use crate::epoch::{propagate_catalog, recover_epoch, EpochError, Propagation};
use crate::stamp::{
    build_location_map, decode_stamp, encode_stamp, locate_sender, select_anchors, CodecError,
    LocateError, MapError,
};
use crate::units::YEARS_PER_MYR;

/// Floor applied to perturbed distances, kpc.
const MIN_NOISY_DIST_KPC: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("bad simulation input: {0}")]
    BadInput(String),
    #[error("propagation failed: {0}")]
    Propagate(EpochError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateParams {
    pub dt_myr: f64,
    /// Standard deviation of the Gaussian distance noise, kpc.
    pub noise_kpc: f64,
    pub seed: u64,
}

/// What the recipient obtained; `None` fields mark the stage that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub params: SimulateParams,
    pub k: usize,
    pub stamp_len: usize,
    pub failure: Option<String>,
    pub correspondence_correct: Option<bool>,
    pub dt_est_myr: Option<f64>,
    pub epoch_error_myr: Option<f64>,
    pub bound_myr: Option<f64>,
    pub epoch_residual_kpc: Option<f64>,
    pub sender_error_kpc: Option<f64>,
    pub locate_rms_kpc: Option<f64>,
    pub locate_iterations: Option<usize>,
}

impl SimulationReport {
    pub fn recovered(&self) -> bool {
        self.failure.is_none()
    }

    pub fn epoch_within_bound(&self) -> Option<bool> {
        Some(self.epoch_error_myr? <= self.bound_myr?)
    }

    /// `key: value` lines; absent values print as `NA`.
    pub fn to_text(&self, header: &[String]) -> String {
        fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "NA".into(), |x| x.to_string())
        }
        let mut out = String::new();
        for h in header {
            out.push_str(&format!("# {h}\n"));
        }
        let rows = [
            ("dt_true_myr", self.params.dt_myr.to_string()),
            ("noise_kpc", self.params.noise_kpc.to_string()),
            ("seed", self.params.seed.to_string()),
            ("k", self.k.to_string()),
            ("stamp_bytes", self.stamp_len.to_string()),
            ("status", self.failure.clone().unwrap_or_else(|| "recovered".into())),
            ("correspondence_correct", opt(self.correspondence_correct)),
            ("dt_est_myr", opt(self.dt_est_myr)),
            ("epoch_error_myr", opt(self.epoch_error_myr)),
            ("epoch_bound_myr", opt(self.bound_myr)),
            ("epoch_within_bound", opt(self.epoch_within_bound())),
            ("epoch_residual_kpc", opt(self.epoch_residual_kpc)),
            ("sender_error_kpc", opt(self.sender_error_kpc)),
            ("locate_rms_kpc", opt(self.locate_rms_kpc)),
            ("locate_iterations", opt(self.locate_iterations)),
        ];
        for (k, v) in rows {
            out.push_str(&format!("{k}: {v}\n"));
        }
        out
    }
}

/// Adds distance noise and shuffles the rows, deterministically in `seed`.
/// With positive noise every distance error is set to the noise level.
pub fn degrade_catalog(cat: &Catalog, noise_kpc: f64, seed: u64) -> Result<Catalog, SimulateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recs = cat.records().to_vec();
    if noise_kpc > 0.0 {
        let normal = Normal::new(0.0, noise_kpc).map_err(|e| SimulateError::BadInput(e.to_string()))?;
        for r in recs.iter_mut() {
            r.dist_kpc = (r.dist_kpc + normal.sample(&mut rng)).max(MIN_NOISY_DIST_KPC);
            r.dist_err_kpc = noise_kpc;
        }
    }
    recs.shuffle(&mut rng);
    Ok(Catalog::new(cat.epoch_jyear(), recs, cat.provenance())?)
}

/// Runs one trial against `cat0`, the catalog at the stamp epoch. The
/// sender is the Sun at that epoch. Truth drift uses linear motion.
pub fn simulate(cat0: &Catalog, cfg: &Config, p: &SimulateParams) -> Result<SimulationReport, SimulateError> {
    if !(p.dt_myr.is_finite() && p.noise_kpc.is_finite() && p.noise_kpc >= 0.0) {
        return Err(SimulateError::BadInput(format!(
            "dt = {} Myr, noise = {} kpc",
            p.dt_myr, p.noise_kpc
        )));
    }
    let fp = &cfg.frame;
    let idx = select_anchors(cat0, fp, cfg.stamp.k, cfg.stamp.min_sep_kpc)?;
    let stamp = encode_stamp(&build_location_map(cat0, fp, &idx)?)?;
    let map = decode_stamp(stamp.as_bytes())?;

    let drifted = propagate_catalog(cat0, fp, p.dt_myr, &Propagation::Linear)
        .map_err(SimulateError::Propagate)?;
    let now = degrade_catalog(&drifted, p.noise_kpc, p.seed)?;

    let mut report = SimulationReport {
        params: *p,
        k: map.k(),
        stamp_len: stamp.as_bytes().len(),
        failure: None,
        correspondence_correct: None,
        dt_est_myr: None,
        epoch_error_myr: None,
        bound_myr: None,
        epoch_residual_kpc: None,
        sender_error_kpc: None,
        locate_rms_kpc: None,
        locate_iterations: None,
    };

    let opts = cfg.recover_options();
    let est = match recover_epoch(&map, &now, fp, &opts) {
        Ok(e) => e,
        Err(e) => {
            report.failure = Some(e.to_string());
            if matches!(e, EpochError::MatchFailed(_)) {
                report.correspondence_correct = Some(false);
            }
            return Ok(report);
        }
    };
    let correct = est
        .correspondence
        .pairs
        .iter()
        .all(|&(a, r)| now.records()[r].name == cat0.records()[idx[a]].name);
    report.correspondence_correct = Some(correct);
    report.dt_est_myr = Some(est.dt_myr);
    report.epoch_error_myr = Some((est.dt_myr - p.dt_myr).abs());
    report.bound_myr = Some(est.bound_myr);
    report.epoch_residual_kpc = Some(est.residual_kpc);

    let rewound = match propagate_catalog(&now, fp, -est.dt_myr, &opts.propagation) {
        Ok(c) => c,
        Err(e) => {
            report.failure = Some(e.to_string());
            return Ok(report);
        }
    };
    match locate_sender(&est.correspondence, &map, &rewound, fp) {
        Ok(fix) => {
            report.sender_error_kpc = Some(fix.position.distance(fp.sun_position()));
            report.locate_rms_kpc = Some(fix.rms_residual_kpc);
            report.locate_iterations = Some(fix.iterations);
        }
        Err(e @ (LocateError::Degenerate(_) | LocateError::NoConvergence(_))) => {
            report.failure = Some(e.to_string());
        }
    }
    Ok(report)
}

/// Parses `value` with an optional unit suffix into the base unit: time
/// in Myr (`Myr`, `kyr`, `yr`) or distance in kpc (`kpc`, `pc`).
pub fn parse_quantity(text: &str, base: &str) -> Result<f64, String> {
    let units: &[(&str, f64)] = match base {
        "Myr" => &[("Myr", 1.0), ("kyr", 1e-3), ("yr", 1.0 / YEARS_PER_MYR)],
        "kpc" => &[("kpc", 1.0), ("pc", 1e-3)],
        _ => return Err(format!("unknown base unit {base}")),
    };
    let t = text.trim();
    let (num, scale) = units
        .iter()
        .find_map(|(suffix, s)| t.strip_suffix(suffix).map(|n| (n, *s)))
        .unwrap_or((t, 1.0));
    num.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(|v| v * scale)
        .ok_or_else(|| format!("cannot parse '{text}' as a quantity in {base}"))
}
