//! Three-component analytic Milky Way potential: Plummer bulge,
//! Miyamoto-Nagai disk and cored logarithmic halo.
//!
//! Masses enter as G*M in kpc (km/s)^2, so potentials come out in (km/s)^2.
//! The logarithmic halo grows without bound, so the total potential has no
//! zero at infinity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::KMS_TO_KPC_PER_MYR;
use crate::vec3::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("invalid potential parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialParams {
    /// Bulge G*M, kpc (km/s)^2.
    pub bulge_gm: f64,
    pub bulge_softening_kpc: f64,
    /// Disk G*M, kpc (km/s)^2.
    pub disk_gm: f64,
    pub disk_a_kpc: f64,
    pub disk_b_kpc: f64,
    pub halo_v_kms: f64,
    pub halo_core_kpc: f64,
    /// Circular speed the parameters must reproduce at the solar radius.
    pub vcirc_target_kms: f64,
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams {
            bulge_gm: 4.0e4,
            bulge_softening_kpc: 0.25,
            disk_gm: 2.85e5,
            disk_a_kpc: 4.2,
            disk_b_kpc: 0.3,
            halo_v_kms: 200.0,
            halo_core_kpc: 5.0,
            vcirc_target_kms: 240.0,
        }
    }
}

/// Allowed mismatch between the calibrated and target circular speed.
pub const VCIRC_TOLERANCE_KMS: f64 = 5.0;

impl PotentialParams {
    pub fn bulge_only(gm: f64, softening_kpc: f64) -> Self {
        PotentialParams {
            bulge_gm: gm,
            bulge_softening_kpc: softening_kpc,
            disk_gm: 0.0,
            halo_v_kms: 0.0,
            ..PotentialParams::default()
        }
    }

    pub fn halo_only(v_kms: f64, core_kpc: f64) -> Self {
        PotentialParams {
            bulge_gm: 0.0,
            disk_gm: 0.0,
            halo_v_kms: v_kms,
            halo_core_kpc: core_kpc,
            ..PotentialParams::default()
        }
    }

    /// Checks positivity of every scale and the circular-speed calibration
    /// at `r0_kpc`.
    pub fn validate(&self, r0_kpc: f64) -> Result<(), PotentialError> {
        let scales = [
            ("bulge_gm", self.bulge_gm),
            ("bulge_softening_kpc", self.bulge_softening_kpc),
            ("disk_gm", self.disk_gm),
            ("disk_a_kpc", self.disk_a_kpc),
            ("disk_b_kpc", self.disk_b_kpc),
            ("halo_v_kms", self.halo_v_kms),
            ("halo_core_kpc", self.halo_core_kpc),
            ("vcirc_target_kms", self.vcirc_target_kms),
        ];
        for (name, v) in scales {
            if !(v.is_finite() && v > 0.0) {
                return Err(PotentialError::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        let vc = circular_velocity(r0_kpc, self)?;
        if (vc - self.vcirc_target_kms).abs() > VCIRC_TOLERANCE_KMS {
            return Err(PotentialError::InvalidParams(format!(
                "circular speed at r0 = {r0_kpc} kpc is {vc:.2} km/s, target {} +/- {VCIRC_TOLERANCE_KMS}",
                self.vcirc_target_kms
            )));
        }
        Ok(())
    }
}

/// Specific potential energy at `pos`, (km/s)^2.
pub fn potential_value(pos: Vec3, pp: &PotentialParams) -> f64 {
    let r2 = pos.norm_sq();
    let cyl2 = pos.x * pos.x + pos.y * pos.y;
    let bulge = -pp.bulge_gm / (r2 + pp.bulge_softening_kpc.powi(2)).sqrt();
    let zeta = (pos.z * pos.z + pp.disk_b_kpc.powi(2)).sqrt();
    let disk = -pp.disk_gm / (cyl2 + (pp.disk_a_kpc + zeta).powi(2)).sqrt();
    let halo = 0.5 * pp.halo_v_kms.powi(2) * (r2 + pp.halo_core_kpc.powi(2)).ln();
    bulge + disk + halo
}

/// -grad(potential), (km/s)^2 per kpc.
pub fn force(pos: Vec3, pp: &PotentialParams) -> Vec3 {
    let r2 = pos.norm_sq();
    let cyl2 = pos.x * pos.x + pos.y * pos.y;

    let sb = r2 + pp.bulge_softening_kpc.powi(2);
    let bulge = pos * (-pp.bulge_gm / (sb * sb.sqrt()));

    let zeta = (pos.z * pos.z + pp.disk_b_kpc.powi(2)).sqrt();
    let az = pp.disk_a_kpc + zeta;
    let d2 = cyl2 + az * az;
    let k = -pp.disk_gm / (d2 * d2.sqrt());
    let disk = Vec3::new(k * pos.x, k * pos.y, k * pos.z * az / zeta);

    let halo = pos * (-pp.halo_v_kms.powi(2) / (r2 + pp.halo_core_kpc.powi(2)));

    bulge + disk + halo
}

/// Gravitational acceleration in km/s per Myr.
pub fn acceleration(pos: Vec3, pp: &PotentialParams) -> Vec3 {
    force(pos, pp) * KMS_TO_KPC_PER_MYR
}

/// Circular speed in the plane at radius `r_kpc`, km/s.
pub fn circular_velocity(r_kpc: f64, pp: &PotentialParams) -> Result<f64, PotentialError> {
    if !(r_kpc.is_finite() && r_kpc > 0.0) {
        return Err(PotentialError::BadRadius(r_kpc));
    }
    let f = force(Vec3::new(r_kpc, 0.0, 0.0), pp);
    Ok((r_kpc * f.x.abs()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Second, independent transcription of the three terms, written in
    /// cylindrical form.
    fn oracle_potential(x: f64, y: f64, z: f64, p: &PotentialParams) -> f64 {
        let big_r = (x * x + y * y).sqrt();
        let r = (big_r * big_r + z * z).sqrt();
        let plummer = -p.bulge_gm / (r.powi(2) + p.bulge_softening_kpc.powi(2)).sqrt();
        let mn_den = big_r.powi(2)
            + (p.disk_a_kpc + (z.powi(2) + p.disk_b_kpc.powi(2)).sqrt()).powi(2);
        let mn = -p.disk_gm / mn_den.sqrt();
        let log = p.halo_v_kms.powi(2) * (r.powi(2) + p.halo_core_kpc.powi(2)).sqrt().ln();
        plummer + mn + log
    }

    #[test]
    fn finite_at_origin() {
        let v = potential_value(Vec3::ZERO, &PotentialParams::default());
        assert!(v.is_finite());
    }

    #[test]
    fn plummer_closed_form() {
        let pp = PotentialParams::bulge_only(1.0e4, 0.5);
        let v = potential_value(Vec3::new(0.0, 0.5, 0.0), &pp);
        let expected = -1.0e4 / (0.5 * 2f64.sqrt());
        assert!((v - expected).abs() < 1e-9 * expected.abs());
    }

    #[test]
    fn matches_oracle_at_sun_and_elsewhere() {
        let pp = PotentialParams::default();
        for p in [Vec3::new(-8.3, 0.0, 0.0), Vec3::new(3.0, -7.0, 2.5), Vec3::new(0.1, 0.0, -20.0)] {
            let a = potential_value(p, &pp);
            let b = oracle_potential(p.x, p.y, p.z, &pp);
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn acceleration_zero_at_origin() {
        assert_eq!(acceleration(Vec3::ZERO, &PotentialParams::default()), Vec3::ZERO);
    }

    #[test]
    fn attraction_points_inward() {
        let a = acceleration(Vec3::new(-50.0, 0.0, 0.0), &PotentialParams::default());
        assert!(a.x > 0.0);
        assert!(a.y.abs() < 1e-15 && a.z.abs() < 1e-15);
    }

    #[test]
    fn acceleration_matches_finite_difference() {
        let pp = PotentialParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = 1e-4;
        for _ in 0..100 {
            let p = Vec3::new(
                rng.gen_range(-30.0..30.0),
                rng.gen_range(-30.0..30.0),
                rng.gen_range(-10.0..10.0),
            );
            let d = |e: Vec3| {
                (potential_value(p + e * h, &pp) - potential_value(p - e * h, &pp)) / (2.0 * h)
            };
            let grad = Vec3::new(
                d(Vec3::new(1.0, 0.0, 0.0)),
                d(Vec3::new(0.0, 1.0, 0.0)),
                d(Vec3::new(0.0, 0.0, 1.0)),
            );
            let fd = -grad * KMS_TO_KPC_PER_MYR;
            let a = acceleration(p, &pp);
            let rel = (a - fd).norm() / a.norm();
            assert!(rel < 1e-6, "at {p:?}: rel {rel}");
        }
    }

    #[test]
    fn default_calibration() {
        let vc = circular_velocity(8.3, &PotentialParams::default()).unwrap();
        assert!((vc - 240.0).abs() <= 5.0, "{vc}");
        PotentialParams::default().validate(8.3).unwrap();
    }

    #[test]
    fn halo_flat_rotation_curve() {
        let pp = PotentialParams::halo_only(180.0, 3.0);
        let vc = circular_velocity(1.0e5, &pp).unwrap();
        assert!((vc - 180.0).abs() < 1e-3, "{vc}");
    }

    #[test]
    fn bad_radius() {
        let pp = PotentialParams::default();
        assert_eq!(circular_velocity(0.0, &pp), Err(PotentialError::BadRadius(0.0)));
        assert!(circular_velocity(-1.0, &pp).is_err());
    }

    #[test]
    fn validate_rejects_miscalibration() {
        let pp = PotentialParams { halo_v_kms: 100.0, ..PotentialParams::default() };
        assert!(matches!(pp.validate(8.3), Err(PotentialError::InvalidParams(_))));
        let pp = PotentialParams { disk_b_kpc: 0.0, ..PotentialParams::default() };
        assert!(pp.validate(8.3).is_err());
    }
}
