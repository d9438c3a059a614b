//! Milky Way potential, orbit integration and the cluster speed distribution.

mod integrator;
mod potential;

use thiserror::Error;

pub use integrator::{
    advance, integrate_many, integrate_orbit, specific_energy, IntegrateError, Scheme, Trajectory,
};
pub use potential::{
    acceleration, circular_velocity, force, potential_value, PotentialError, PotentialParams,
    VCIRC_TOLERANCE_KMS,
};

use crate::catalog::Catalog;
use crate::frames::{to_galactocentric, FrameParams};
use crate::units::K_TANGENTIAL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HistogramError {
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("need at least one bin and a positive upper edge (bins = {bins}, v_max = {v_max})")]
    BadBins { bins: usize, v_max: f64 },
}

/// Histogram of cluster speeds over uniform bins on `[0, v_max]`.
///
/// Two columns are kept: the total galactocentric speed and the
/// heliocentric tangential ("proper motion") speed. Values at or above
/// `v_max` land in the last bin so counts always sum to the catalog size.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityHistogram {
    pub edges_kms: Vec<f64>,
    pub counts_speed: Vec<usize>,
    pub counts_tangential: Vec<usize>,
    /// Per-record galactocentric speeds, in catalog order.
    pub speeds_kms: Vec<f64>,
    /// Per-record heliocentric tangential speeds, in catalog order.
    pub tangential_kms: Vec<f64>,
}

impl VelocityHistogram {
    pub fn total(&self) -> usize {
        self.counts_speed.iter().sum()
    }

    /// CSV body: `v_lo_kms,v_hi_kms,count_speed,count_tangential`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v_lo_kms,v_hi_kms,count_speed,count_tangential\n");
        for i in 0..self.counts_speed.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.edges_kms[i],
                self.edges_kms[i + 1],
                self.counts_speed[i],
                self.counts_tangential[i]
            ));
        }
        out
    }
}

fn bin_of(v: f64, width: f64, bins: usize) -> usize {
    ((v / width).floor().max(0.0) as usize).min(bins - 1)
}

pub fn velocity_distribution(
    cat: &Catalog,
    fp: &FrameParams,
    bins: usize,
    v_max: f64,
) -> Result<VelocityHistogram, HistogramError> {
    if cat.is_empty() {
        return Err(HistogramError::EmptyCatalog);
    }
    if bins == 0 || !(v_max.is_finite() && v_max > 0.0) {
        return Err(HistogramError::BadBins { bins, v_max });
    }
    let width = v_max / bins as f64;
    let edges_kms = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts_speed = vec![0; bins];
    let mut counts_tangential = vec![0; bins];
    let mut speeds_kms = Vec::with_capacity(cat.len());
    let mut tangential_kms = Vec::with_capacity(cat.len());
    for rec in cat.records() {
        let speed = to_galactocentric(rec, fp).vel.norm();
        let vt = K_TANGENTIAL * rec.dist_kpc * rec.pmra_masyr.hypot(rec.pmdec_masyr);
        counts_speed[bin_of(speed, width, bins)] += 1;
        counts_tangential[bin_of(vt, width, bins)] += 1;
        speeds_kms.push(speed);
        tangential_kms.push(vt);
    }
    Ok(VelocityHistogram {
        edges_kms,
        counts_speed,
        counts_tangential,
        speeds_kms,
        tangential_kms,
    })
}
