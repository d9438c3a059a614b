use super::EpochError;
use crate::units::YR_PER_KPC_PER_KMS;

/// Default spatial-resolution cases, kpc.
pub const DEFAULT_DD_CASES_KPC: [f64; 4] = [0.05, 0.1, 0.25, 0.5];

/// Time for a landmark moving at `v_kms` to cross a distance uncertainty of
/// `dd_kpc`, in years.
pub fn time_resolution(dd_kpc: f64, v_kms: f64) -> Result<f64, EpochError> {
    if !(v_kms.is_finite() && v_kms > 0.0) {
        return Err(EpochError::ZeroVelocity(v_kms));
    }
    if dd_kpc.is_nan() || dd_kpc < 0.0 {
        return Err(EpochError::NegativeDistance(dd_kpc));
    }
    Ok(dd_kpc / v_kms * YR_PER_KPC_PER_KMS)
}

/// Time resolution over a grid: `dt_yr[i][j]` belongs to `dd_kpc[i]` and
/// `v_kms[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionCurve {
    pub dd_kpc: Vec<f64>,
    pub v_kms: Vec<f64>,
    pub dt_yr: Vec<Vec<f64>>,
}

impl ResolutionCurve {
    pub fn at(&self, dd_kpc: f64, v_kms: f64) -> Option<f64> {
        let i = self.dd_kpc.iter().position(|&d| d == dd_kpc)?;
        let j = self.v_kms.iter().position(|&v| v == v_kms)?;
        Some(self.dt_yr[i][j])
    }

    /// CSV with header `dd_kpc,v_kms,dt_yr`, one row per cell, preceded by
    /// `#` comment lines (the conversion factor plus `comments`).
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = format!("# yr_per_kpc_per_kms: {YR_PER_KPC_PER_KMS}\n");
        for c in comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("dd_kpc,v_kms,dt_yr\n");
        for (i, dd) in self.dd_kpc.iter().enumerate() {
            for (j, v) in self.v_kms.iter().enumerate() {
                out.push_str(&format!("{dd},{v},{}\n", self.dt_yr[i][j]));
            }
        }
        out
    }
}

/// Curves for each `dd` case over `n_points` velocities evenly spaced on
/// `[v_min, v_max]`. Cases must be positive and strictly increasing.
pub fn resolution_curves(
    dd_cases_kpc: &[f64],
    v_min_kms: f64,
    v_max_kms: f64,
    n_points: usize,
) -> Result<ResolutionCurve, EpochError> {
    if dd_cases_kpc.is_empty() || n_points == 0 {
        return Err(EpochError::EmptyGrid);
    }
    if dd_cases_kpc.iter().any(|d| !(d.is_finite() && *d > 0.0))
        || dd_cases_kpc.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(EpochError::BadGrid(
            "distance cases must be positive and strictly increasing".into(),
        ));
    }
    let range_ok = v_min_kms.is_finite()
        && v_max_kms.is_finite()
        && v_min_kms > 0.0
        && (v_max_kms > v_min_kms || (n_points == 1 && v_max_kms == v_min_kms));
    if !range_ok {
        return Err(EpochError::BadGrid(format!(
            "velocity range [{v_min_kms}, {v_max_kms}] with {n_points} points"
        )));
    }
    let v_kms: Vec<f64> = if n_points == 1 {
        vec![v_min_kms]
    } else {
        let step = (v_max_kms - v_min_kms) / (n_points - 1) as f64;
        (0..n_points)
            .map(|j| if j + 1 == n_points { v_max_kms } else { v_min_kms + j as f64 * step })
            .collect()
    };
    let dt_yr = dd_cases_kpc
        .iter()
        .map(|&dd| v_kms.iter().map(|&v| time_resolution(dd, v)).collect())
        .collect::<Result<_, _>>()?;
    Ok(ResolutionCurve {
        dd_kpc: dd_cases_kpc.to_vec(),
        v_kms,
        dt_yr,
    })
}

/// Reads the CSV written by [`ResolutionCurve::to_csv`].
pub fn parse_resolution_csv(text: &str) -> Result<ResolutionCurve, EpochError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let bad = |m: String| EpochError::BadGrid(m);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["dd_kpc", "v_kms", "dt_yr"] {
        return Err(bad(format!("unexpected header {headers:?}")));
    }
    let mut cells = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let num = |k: usize| {
            row.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad(format!("bad number in {row:?}")))
        };
        cells.push((num(0)?, num(1)?, num(2)?));
    }
    if cells.is_empty() {
        return Err(EpochError::EmptyGrid);
    }
    let mut dd_kpc: Vec<f64> = Vec::new();
    let mut v_kms: Vec<f64> = Vec::new();
    for &(dd, v, _) in &cells {
        if !dd_kpc.contains(&dd) {
            dd_kpc.push(dd);
        }
        if !v_kms.contains(&v) {
            v_kms.push(v);
        }
    }
    if cells.len() != dd_kpc.len() * v_kms.len() {
        return Err(bad("grid is not rectangular".into()));
    }
    let mut dt_yr = vec![vec![f64::NAN; v_kms.len()]; dd_kpc.len()];
    for (idx, &(dd, v, dt)) in cells.iter().enumerate() {
        let (i, j) = (idx / v_kms.len(), idx % v_kms.len());
        if dd_kpc[i] != dd || v_kms[j] != v {
            return Err(bad("rows are not in grid order".into()));
        }
        dt_yr[i][j] = dt;
    }
    Ok(ResolutionCurve { dd_kpc, v_kms, dt_yr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quoted_anchor_cells() {
        let a = time_resolution(0.5, 500.0).unwrap();
        assert!((a - 9.78e5).abs() / 9.78e5 < 5e-3, "{a}");
        let b = time_resolution(0.1, 300.0).unwrap();
        assert!((b - 3.26e5).abs() / 3.26e5 < 5e-3, "{b}");
        // Two significant figures: 3.3e5.
        assert_eq!(format!("{:.1e}", b), "3.3e5");
    }

    #[test]
    fn zero_error_is_zero_time() {
        assert_eq!(time_resolution(0.0, 123.0).unwrap(), 0.0);
    }

    #[test]
    fn non_positive_velocity() {
        assert_eq!(time_resolution(0.1, 0.0), Err(EpochError::ZeroVelocity(0.0)));
        assert!(time_resolution(0.1, -5.0).is_err());
        assert!(time_resolution(-0.1, 5.0).is_err());
    }

    #[test]
    fn default_curves_structure() {
        let c = resolution_curves(&DEFAULT_DD_CASES_KPC, 10.0, 1000.0, 100).unwrap();
        assert_eq!(c.dd_kpc.len(), 4);
        let cell = c.at(0.5, 500.0).unwrap();
        assert!((cell - 9.78e5).abs() / 9.78e5 < 5e-3);
        for row in &c.dt_yr {
            assert!(row.windows(2).all(|w| w[1] < w[0]));
        }
        for j in 0..c.v_kms.len() {
            assert!(c.dt_yr.windows(2).all(|w| w[1][j] > w[0][j]));
        }
    }

    #[test]
    fn doubling_velocity_halves_time() {
        let a = resolution_curves(&DEFAULT_DD_CASES_KPC, 100.0, 400.0, 7).unwrap();
        let b = resolution_curves(&DEFAULT_DD_CASES_KPC, 200.0, 800.0, 7).unwrap();
        for (ra, rb) in a.dt_yr.iter().zip(&b.dt_yr) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x / y - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = resolution_curves(&DEFAULT_DD_CASES_KPC, 10.0, 1000.0, 100).unwrap();
        let text = c.to_csv(&["seed: 0".into()]);
        assert_eq!(parse_resolution_csv(&text).unwrap(), c);
    }

    #[test]
    fn empty_and_bad_grids() {
        assert_eq!(resolution_curves(&[], 1.0, 2.0, 3), Err(EpochError::EmptyGrid));
        assert_eq!(resolution_curves(&[0.1], 1.0, 2.0, 0), Err(EpochError::EmptyGrid));
        assert!(resolution_curves(&[0.1, 0.1], 1.0, 2.0, 3).is_err());
        assert!(resolution_curves(&[0.1], 0.0, 2.0, 3).is_err());
        assert!(resolution_curves(&[0.1], 3.0, 2.0, 3).is_err());
    }

    proptest! {
        #[test]
        fn homogeneous(dd in 0.0..10.0f64, v in 1.0..2000.0f64, a in 0.01..100.0f64) {
            let x = time_resolution(a * dd, a * v).unwrap();
            let y = time_resolution(dd, v).unwrap();
            prop_assert!((x - y).abs() <= 1e-12 * y.max(1e-300));
        }
    }
}
