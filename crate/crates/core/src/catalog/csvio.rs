use super::{Catalog, CatalogError, ClusterRecord};

/// Canonical column order of the interchange CSV.
pub const CSV_COLUMNS: [&str; 10] = [
    "name",
    "ra_deg",
    "dec_deg",
    "dist_kpc",
    "dist_err_kpc",
    "pmra_masyr",
    "pmdec_masyr",
    "rv_kms",
    "mv_abs",
    "feh_dex",
];

const PROVENANCE_TAG: &str = "# provenance:";
const DEFAULT_PROVENANCE: &str = "csv";

/// Parses canonical catalog CSV. Columns may appear in any order; lines
/// starting with `#` are comments, and a `# provenance: ...` comment sets
/// the provenance tag.
pub fn parse_catalog(text: &str, epoch_jyear: f64) -> Result<Catalog, CatalogError> {
    let provenance = text
        .lines()
        .find_map(|l| l.strip_prefix(PROVENANCE_TAG))
        .map(|p| p.trim().to_string())
        .unwrap_or_else(|| DEFAULT_PROVENANCE.to_string());

    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());

    let headers = rdr
        .headers()
        .map_err(|e| CatalogError::Malformed(e.to_string()))?
        .clone();
    let mut col_idx = [0usize; 10];
    for (slot, name) in col_idx.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CatalogError::MissingColumn(name.to_string()))?;
    }

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| CatalogError::Malformed(e.to_string()))?;
        let num = |k: usize| -> Result<f64, CatalogError> {
            let raw = row.get(col_idx[k]).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CatalogError::BadNumber {
                    row: row_no,
                    col: CSV_COLUMNS[k].to_string(),
                })
        };
        let rec = ClusterRecord {
            name: row.get(col_idx[0]).unwrap_or("").to_string(),
            ra_deg: num(1)?,
            dec_deg: num(2)?,
            dist_kpc: num(3)?,
            dist_err_kpc: num(4)?,
            pmra_masyr: num(5)?,
            pmdec_masyr: num(6)?,
            rv_kms: num(7)?,
            mv_abs: num(8)?,
            feh_dex: num(9)?,
        };
        rec.check()
            .map_err(|detail| CatalogError::InvariantViolation { row: row_no, detail })?;
        records.push(rec);
    }
    Catalog::new(epoch_jyear, records, provenance)
}

/// Writes canonical CSV. Extra comment lines (without the leading `# `)
/// are emitted after the provenance and epoch lines.
pub fn serialize_catalog(cat: &Catalog, comments: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{PROVENANCE_TAG} {}\n", cat.provenance()));
    out.push_str(&format!("# epoch_jyear: {}\n", cat.epoch_jyear()));
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in cat.records() {
        w.write_record([
            r.name.clone(),
            r.ra_deg.to_string(),
            r.dec_deg.to_string(),
            r.dist_kpc.to_string(),
            r.dist_err_kpc.to_string(),
            r.pmra_masyr.to_string(),
            r.pmdec_masyr.to_string(),
            r.rv_kms.to_string(),
            r.mv_abs.to_string(),
            r.feh_dex.to_string(),
        ])
        .expect("in-memory write");
    }
    let body = w.into_inner().expect("in-memory flush");
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    out
}
