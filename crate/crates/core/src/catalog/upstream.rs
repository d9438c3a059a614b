//! Conversion of whitespace-delimited upstream tables into a [`Catalog`].
//!
//! The upstream page publishes plain-text tables with one header line of
//! column names. Column names are mapped through [`UpstreamColumns`]. Rows
//! lacking any kinematic field (distance, proper motions, radial velocity)
//! are dropped here, so the record count is a property of the converted
//! snapshot rather than of the parser.

use super::{Catalog, CatalogError, ClusterRecord};

/// Upstream column names for each canonical field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpstreamColumns {
    pub name: String,
    pub ra_deg: String,
    pub dec_deg: String,
    pub dist_kpc: String,
    pub dist_err_kpc: String,
    pub pmra_masyr: String,
    pub pmdec_masyr: String,
    pub rv_kms: String,
    pub mv_abs: String,
    pub feh_dex: String,
}

impl Default for UpstreamColumns {
    fn default() -> Self {
        UpstreamColumns {
            name: "Cluster".into(),
            ra_deg: "RA".into(),
            dec_deg: "DEC".into(),
            dist_kpc: "R_Sun".into(),
            dist_err_kpc: "ERSun".into(),
            pmra_masyr: "PMRA".into(),
            pmdec_masyr: "PMDEC".into(),
            rv_kms: "RV".into(),
            mv_abs: "Mv".into(),
            feh_dex: "FeH".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    pub catalog: Catalog,
    /// Names of rows dropped for missing kinematics.
    pub excluded: Vec<String>,
}

fn missing(tok: &str) -> bool {
    matches!(tok, "" | "-" | "--" | "nan" | "NaN" | "NA" | "null")
}

/// Converts an upstream table. A leading `#` on the header line is ignored;
/// other `#` lines are comments.
pub fn convert_upstream(
    text: &str,
    cols: &UpstreamColumns,
    epoch_jyear: f64,
    provenance: &str,
) -> Result<Conversion, CatalogError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty());
    let header_line = lines
        .next()
        .ok_or_else(|| CatalogError::MissingColumn(cols.name.clone()))?;
    let header: Vec<&str> = header_line.trim_start_matches('#').split_whitespace().collect();
    let find = |c: &String| {
        header
            .iter()
            .position(|h| h == c)
            .ok_or_else(|| CatalogError::MissingColumn(c.clone()))
    };
    let idx = [
        find(&cols.name)?,
        find(&cols.ra_deg)?,
        find(&cols.dec_deg)?,
        find(&cols.dist_kpc)?,
        find(&cols.dist_err_kpc)?,
        find(&cols.pmra_masyr)?,
        find(&cols.pmdec_masyr)?,
        find(&cols.rv_kms)?,
        find(&cols.mv_abs)?,
        find(&cols.feh_dex)?,
    ];
    const KINEMATIC: [usize; 4] = [3, 5, 6, 7];
    const NAMES: [&str; 10] = super::CSV_COLUMNS;

    let mut records = Vec::new();
    let mut excluded = Vec::new();
    for (i, line) in lines.filter(|l| !l.starts_with('#')).enumerate() {
        let row = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let tok = |k: usize| toks.get(idx[k]).copied().unwrap_or("");
        let name = tok(0).to_string();
        if KINEMATIC.iter().any(|&k| missing(tok(k))) {
            excluded.push(name);
            continue;
        }
        let num = |k: usize| -> Result<f64, CatalogError> {
            tok(k)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CatalogError::BadNumber {
                    row,
                    col: NAMES[k].to_string(),
                })
        };
        let rec = ClusterRecord {
            name,
            ra_deg: num(1)?.rem_euclid(360.0),
            dec_deg: num(2)?,
            dist_kpc: num(3)?,
            dist_err_kpc: if missing(tok(4)) { 0.0 } else { num(4)?.abs() },
            pmra_masyr: num(5)?,
            pmdec_masyr: num(6)?,
            rv_kms: num(7)?,
            mv_abs: num(8)?,
            feh_dex: num(9)?,
        };
        rec.check()
            .map_err(|detail| CatalogError::InvariantViolation { row, detail })?;
        records.push(rec);
    }
    Ok(Conversion {
        catalog: Catalog::new(epoch_jyear, records, provenance)?,
        excluded,
    })
}
