use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Catalog, CatalogError, ClusterRecord};
use crate::units::K_TANGENTIAL;

/// Epoch stamped on synthetic catalogs.
pub const SYNTH_EPOCH_JYEAR: f64 = 2023.0;

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

/// Deterministic pseudo-random catalog of `n` valid clusters.
///
/// Ranges: heliocentric distance uniform in 1-40 kpc with a 1-8% error;
/// isotropic sky positions; tangential velocity components uniform in
/// +/-250 km/s and radial velocity uniform in +/-300 km/s; M_V ~ N(-10, 2)
/// clipped to [-15, 0]; [Fe/H] ~ N(-1.5, 0.6) clipped to [-3.5, 0.5].
/// Values are rounded to catalog-like precision.
pub fn synth_catalog(seed: u64, n: usize) -> Result<Catalog, CatalogError> {
    if n == 0 {
        return Err(CatalogError::BadCount(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mv_dist = Normal::new(-10.0, 2.0).expect("valid normal");
    let feh_dist = Normal::new(-1.5, 0.6).expect("valid normal");
    let width = n.to_string().len().max(3);

    let records = (0..n)
        .map(|i| {
            let ra = round_to(rng.gen_range(0.0..360.0), 4) % 360.0;
            let dec = round_to(rng.gen_range(-1.0f64..=1.0).asin().to_degrees(), 4);
            let dist: f64 = round_to(rng.gen_range(1.0..40.0), 3);
            let dist_err = round_to(dist * rng.gen_range(0.01..0.08), 3).max(0.001);
            let vt_ra: f64 = rng.gen_range(-250.0..250.0);
            let vt_dec: f64 = rng.gen_range(-250.0..250.0);
            let rv = round_to(rng.gen_range(-300.0..300.0), 2);
            let mv = round_to(mv_dist.sample(&mut rng), 2).clamp(-15.0, 0.0);
            let feh = round_to(feh_dist.sample(&mut rng), 2).clamp(-3.5, 0.5);
            ClusterRecord {
                name: format!("SYN-{:0width$}", i + 1),
                ra_deg: ra,
                dec_deg: dec,
                dist_kpc: dist,
                dist_err_kpc: dist_err,
                pmra_masyr: round_to(vt_ra / (K_TANGENTIAL * dist), 4),
                pmdec_masyr: round_to(vt_dec / (K_TANGENTIAL * dist), 4),
                rv_kms: rv,
                mv_abs: mv,
                feh_dex: feh,
            }
        })
        .collect();
    Catalog::new(
        SYNTH_EPOCH_JYEAR,
        records,
        format!("synthetic seed={seed} n={n}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::serialize_catalog;

    #[test]
    fn deterministic_bytes() {
        let a = serialize_catalog(&synth_catalog(42, 164).unwrap(), &[]);
        let b = serialize_catalog(&synth_catalog(42, 164).unwrap(), &[]);
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_differ() {
        let a = synth_catalog(42, 164).unwrap();
        let b = synth_catalog(43, 164).unwrap();
        assert_eq!(a.len(), 164);
        assert_ne!(a.records(), b.records());
    }

    #[test]
    fn zero_count() {
        assert_eq!(synth_catalog(1, 0).unwrap_err(), CatalogError::BadCount(0));
    }

    #[test]
    fn ranges_hold() {
        let cat = synth_catalog(7, 2000).unwrap();
        for r in cat.records() {
            assert!((1.0..=40.0).contains(&r.dist_kpc));
            let vt = K_TANGENTIAL * r.dist_kpc;
            assert!((r.pmra_masyr * vt).abs() <= 251.0);
            assert!((r.pmdec_masyr * vt).abs() <= 251.0);
            assert!(r.rv_kms.abs() <= 300.0);
        }
    }
}
