//! Physical constants and unit conversions shared by every module.
//!
//! Positions are in kpc, velocities in km/s, times in Myr (or Julian years
//! where a module says so).

/// Kilometres per kiloparsec.
pub const KM_PER_KPC: f64 = 3.085_677_581e16;

/// Seconds per Julian year.
pub const SECONDS_PER_JULIAN_YEAR: f64 = 3.155_76e7;

/// Kilometres per astronomical unit.
pub const KM_PER_AU: f64 = 1.495_978_707e8;

/// Tangential speed in km/s of 1 mas/yr at 1 kpc (one AU per Julian year).
pub const K_TANGENTIAL: f64 = 4.74047;

/// 1 km/s expressed in kpc/Myr.
pub const KMS_TO_KPC_PER_MYR: f64 = 1.02271e-3;

/// Years needed to cross 1 kpc at 1 km/s.
pub const YR_PER_KPC_PER_KMS: f64 = 9.77792e8;

pub const YEARS_PER_MYR: f64 = 1.0e6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangential_constant_is_one_au_per_year() {
        let k = KM_PER_AU / SECONDS_PER_JULIAN_YEAR;
        assert!((k - K_TANGENTIAL).abs() < 1e-5, "{k}");
    }

    #[test]
    fn kms_to_kpc_per_myr_matches_definition() {
        let derived = 1.0e6 * SECONDS_PER_JULIAN_YEAR / KM_PER_KPC;
        assert!((derived - KMS_TO_KPC_PER_MYR).abs() / derived < 1e-5, "{derived}");
    }

    #[test]
    fn crossing_time_matches_definition() {
        let derived = KM_PER_KPC / SECONDS_PER_JULIAN_YEAR;
        assert!((derived - YR_PER_KPC_PER_KMS).abs() / derived < 1e-5, "{derived}");
        // The two constants describe the same conversion.
        assert!((YR_PER_KPC_PER_KMS * KMS_TO_KPC_PER_MYR / YEARS_PER_MYR - 1.0).abs() < 1e-5);
    }
}
