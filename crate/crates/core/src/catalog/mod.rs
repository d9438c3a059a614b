//! Globular-cluster catalogs: the one source of cluster observables.
//!
//! A [`Catalog`] is immutable once built. Records are validated on
//! construction, so downstream modules can rely on the field invariants
//! documented on [`ClusterRecord`].

mod csvio;
pub mod fetch;
mod synth;
pub mod upstream;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csvio::{parse_catalog, serialize_catalog, CSV_COLUMNS};
pub use synth::synth_catalog;

/// Bundled 164-record kinematic snapshot, canonical CSV.
pub const REFERENCE_SNAPSHOT_CSV: &str = include_str!("../../data/reference_snapshot.csv");

/// Epoch of the bundled snapshot, Julian year.
pub const REFERENCE_EPOCH_JYEAR: f64 = 2023.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("bad number at row {row}, column `{col}`")]
    BadNumber { row: usize, col: String },
    #[error("invariant violation at row {row}: {detail}")]
    InvariantViolation { row: usize, detail: String },
    #[error("duplicate cluster name `{0}`")]
    DuplicateName(String),
    #[error("catalog has no records")]
    Empty,
    #[error("bad record count {0}")]
    BadCount(usize),
    #[error("malformed CSV: {0}")]
    Malformed(String),
}

/// Observables of one globular cluster.
///
/// `pmra_masyr` already includes the cos(dec) factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub name: String,
    pub ra_deg: f64,
    pub dec_deg: f64,
    pub dist_kpc: f64,
    pub dist_err_kpc: f64,
    pub pmra_masyr: f64,
    pub pmdec_masyr: f64,
    pub rv_kms: f64,
    pub mv_abs: f64,
    pub feh_dex: f64,
}

impl ClusterRecord {
    /// Checks the field invariants, returning a description of the first
    /// violation.
    pub fn check(&self) -> Result<(), String> {
        let fields = [
            ("ra_deg", self.ra_deg),
            ("dec_deg", self.dec_deg),
            ("dist_kpc", self.dist_kpc),
            ("dist_err_kpc", self.dist_err_kpc),
            ("pmra_masyr", self.pmra_masyr),
            ("pmdec_masyr", self.pmdec_masyr),
            ("rv_kms", self.rv_kms),
            ("mv_abs", self.mv_abs),
            ("feh_dex", self.feh_dex),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(format!("{name} is not finite"));
        }
        if self.name.trim().is_empty() {
            return Err("empty name".into());
        }
        if !(0.0..360.0).contains(&self.ra_deg) {
            return Err(format!("ra_deg = {} outside [0, 360)", self.ra_deg));
        }
        if !(-90.0..=90.0).contains(&self.dec_deg) {
            return Err(format!("dec_deg = {} outside [-90, 90]", self.dec_deg));
        }
        if self.dist_kpc <= 0.0 {
            return Err(format!("dist_kpc = {} must be positive", self.dist_kpc));
        }
        if self.dist_err_kpc < 0.0 {
            return Err(format!("dist_err_kpc = {} must be non-negative", self.dist_err_kpc));
        }
        if !(-15.0..=0.0).contains(&self.mv_abs) {
            return Err(format!("mv_abs = {} outside [-15, 0]", self.mv_abs));
        }
        if !(-3.5..=0.5).contains(&self.feh_dex) {
            return Err(format!("feh_dex = {} outside [-3.5, 0.5]", self.feh_dex));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    epoch_jyear: f64,
    records: Vec<ClusterRecord>,
    provenance: String,
}

impl Catalog {
    /// Builds a catalog, enforcing record invariants, name uniqueness and
    /// non-emptiness. Row numbers in errors are 1-based record positions.
    pub fn new(
        epoch_jyear: f64,
        records: Vec<ClusterRecord>,
        provenance: impl Into<String>,
    ) -> Result<Self, CatalogError> {
        if records.is_empty() {
            return Err(CatalogError::Empty);
        }
        if !epoch_jyear.is_finite() {
            return Err(CatalogError::InvariantViolation {
                row: 0,
                detail: "epoch is not finite".into(),
            });
        }
        let mut seen = HashSet::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            rec.check()
                .map_err(|detail| CatalogError::InvariantViolation { row: i + 1, detail })?;
            if !seen.insert(rec.name.as_str()) {
                return Err(CatalogError::DuplicateName(rec.name.clone()));
            }
        }
        Ok(Catalog {
            epoch_jyear,
            records,
            provenance: provenance.into(),
        })
    }

    pub fn epoch_jyear(&self) -> f64 {
        self.epoch_jyear
    }

    pub fn records(&self) -> &[ClusterRecord] {
        &self.records
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&ClusterRecord> {
        self.records.get(i)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.records.iter().position(|r| r.name == name)
    }

    pub fn into_records(self) -> Vec<ClusterRecord> {
        self.records
    }
}

/// The bundled reference snapshot.
pub fn reference_snapshot() -> Catalog {
    parse_catalog(REFERENCE_SNAPSHOT_CSV, REFERENCE_EPOCH_JYEAR)
        .expect("bundled reference snapshot is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WarningKind {
    /// Distance error exceeds the distance itself.
    DistErrExceedsDist,
    /// Tangential speed implied by proper motion and distance above 1000 km/s.
    ExtremeTangentialSpeed,
    /// |rv| above 1000 km/s.
    ExtremeRadialVelocity,
    /// Distance error of exactly zero.
    ZeroDistErr,
}

impl fmt::Display for WarningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WarningKind::DistErrExceedsDist => "dist_err_kpc exceeds dist_kpc",
            WarningKind::ExtremeTangentialSpeed => "tangential speed above 1000 km/s",
            WarningKind::ExtremeRadialVelocity => "|rv_kms| above 1000 km/s",
            WarningKind::ZeroDistErr => "dist_err_kpc is zero",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    /// 1-based record position.
    pub row: usize,
    pub name: String,
    pub kind: WarningKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.warnings.is_empty() {
            return writeln!(f, "no warnings");
        }
        for w in &self.warnings {
            writeln!(f, "row {} ({}): {}", w.row, w.name, w.kind)?;
        }
        Ok(())
    }
}

const SPEED_WARN_KMS: f64 = 1000.0;

/// Reports suspicious but admissible records without touching the catalog.
pub fn validate(cat: &Catalog) -> ValidationReport {
    let mut warnings = Vec::new();
    for (i, rec) in cat.records().iter().enumerate() {
        let mut push = |kind| {
            warnings.push(Warning {
                row: i + 1,
                name: rec.name.clone(),
                kind,
            })
        };
        if rec.dist_err_kpc > rec.dist_kpc {
            push(WarningKind::DistErrExceedsDist);
        }
        if rec.dist_err_kpc == 0.0 {
            push(WarningKind::ZeroDistErr);
        }
        let pm = rec.pmra_masyr.hypot(rec.pmdec_masyr);
        if crate::units::K_TANGENTIAL * rec.dist_kpc * pm > SPEED_WARN_KMS {
            push(WarningKind::ExtremeTangentialSpeed);
        }
        if rec.rv_kms.abs() > SPEED_WARN_KMS {
            push(WarningKind::ExtremeRadialVelocity);
        }
    }
    ValidationReport { warnings }
}

#[cfg(test)]
pub(crate) fn test_record(name: &str) -> ClusterRecord {
    ClusterRecord {
        name: name.to_string(),
        ra_deg: 120.0,
        dec_deg: -20.0,
        dist_kpc: 5.0,
        dist_err_kpc: 0.2,
        pmra_masyr: 1.5,
        pmdec_masyr: -2.0,
        rv_kms: 80.0,
        mv_abs: -8.0,
        feh_dex: -1.4,
    }
}
