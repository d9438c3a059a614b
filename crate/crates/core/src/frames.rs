//! Equatorial, Galactic and galactocentric frames.
//!
//! The galactocentric frame is right-handed with the Galactic centre at the
//! origin, the Sun at `(-r0, 0, zsun)` and Galactic rotation toward `+y`.
//! Heliocentric Galactic axes point to the centre (`l = 0`), to `l = 90` and
//! to the north Galactic pole.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::ClusterRecord;
use crate::units::K_TANGENTIAL;
use crate::vec3::Vec3;

/// Directions closer than this to the Sun have no defined sky position.
pub const DEGENERATE_DIST_KPC: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("position coincides with the Sun; direction undefined")]
    DegenerateDirection,
    #[error("invalid frame parameters: {0}")]
    InvalidParams(String),
}

/// Solar position and velocity plus the orientation of the Galactic pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameParams {
    pub r0_kpc: f64,
    pub zsun_kpc: f64,
    pub vsun_kms: [f64; 3],
    pub ngp_ra_deg: f64,
    pub ngp_dec_deg: f64,
    pub lncp_deg: f64,
}

impl Default for FrameParams {
    fn default() -> Self {
        FrameParams {
            r0_kpc: 8.3,
            zsun_kpc: 0.02,
            vsun_kms: [11.1, 250.0, 7.3],
            ngp_ra_deg: 192.85948,
            ngp_dec_deg: 27.12825,
            lncp_deg: 122.93192,
        }
    }
}

impl FrameParams {
    pub fn validate(&self) -> Result<(), FrameError> {
        let bad = |m: String| Err(FrameError::InvalidParams(m));
        let all = [
            self.r0_kpc,
            self.zsun_kpc,
            self.ngp_ra_deg,
            self.ngp_dec_deg,
            self.lncp_deg,
            self.vsun_kms[0],
            self.vsun_kms[1],
            self.vsun_kms[2],
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all frame constants must be finite".into());
        }
        if self.r0_kpc <= 0.0 {
            return bad(format!("r0_kpc = {} must be positive", self.r0_kpc));
        }
        if self.zsun_kpc.abs() >= 0.2 {
            return bad(format!("|zsun_kpc| = {} must be below 0.2", self.zsun_kpc.abs()));
        }
        if !(-90.0..=90.0).contains(&self.ngp_dec_deg) {
            return bad(format!("ngp_dec_deg = {} outside [-90, 90]", self.ngp_dec_deg));
        }
        Ok(())
    }

    pub fn sun_position(&self) -> Vec3 {
        Vec3::new(-self.r0_kpc, 0.0, self.zsun_kpc)
    }

    pub fn sun_velocity(&self) -> Vec3 {
        Vec3::from_array(self.vsun_kms)
    }

    /// Rotation taking equatorial Cartesian vectors to Galactic ones.
    pub fn eq_to_gal(&self) -> Rotation {
        let (sa, ca) = self.ngp_ra_deg.to_radians().sin_cos();
        let (sd, cd) = self.ngp_dec_deg.to_radians().sin_cos();
        let (sl, cl) = self.lncp_deg.to_radians().sin_cos();
        // Galactic z axis in equatorial coordinates.
        let z = Vec3::new(cd * ca, cd * sa, sd);
        // Unit vector toward the celestial pole, perpendicular to z; it sits
        // at Galactic longitude lncp.
        let ncp = Vec3::new(0.0, 0.0, 1.0);
        let u = (ncp - z * sd) / cd;
        let w = z.cross(u);
        let x = u * cl - w * sl;
        let y = u * sl + w * cl;
        Rotation { rows: [x, y, z] }
    }
}

/// Proper rotation stored by rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub rows: [Vec3; 3],
}

impl Rotation {
    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.rows[0].dot(v), self.rows[1].dot(v), self.rows[2].dot(v))
    }

    /// Applies the inverse (transpose).
    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        self.rows[0] * v.x + self.rows[1] * v.y + self.rows[2] * v.z
    }
}

/// Galactocentric position (kpc) and velocity (km/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub pos: Vec3,
    pub vel: Vec3,
}

impl PhaseState {
    pub fn new(pos: Vec3, vel: Vec3) -> Self {
        PhaseState { pos, vel }
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.vel.is_finite()
    }
}

fn unit_from_angles(lon_deg: f64, lat_deg: f64) -> Vec3 {
    let (sl, cl) = lon_deg.to_radians().sin_cos();
    let (sb, cb) = lat_deg.to_radians().sin_cos();
    Vec3::new(cb * cl, cb * sl, sb)
}

fn angles_from_unit(v: Vec3) -> (f64, f64) {
    let lon = v.y.atan2(v.x).to_degrees().rem_euclid(360.0);
    let lat = v.z.atan2(v.x.hypot(v.y)).to_degrees();
    // rem_euclid can round up to exactly 360 for tiny negative angles.
    (if lon >= 360.0 { 0.0 } else { lon }, lat)
}

pub fn equatorial_to_galactic(ra_deg: f64, dec_deg: f64, fp: &FrameParams) -> (f64, f64) {
    angles_from_unit(fp.eq_to_gal().apply(unit_from_angles(ra_deg, dec_deg)))
}

pub fn galactic_to_equatorial(l_deg: f64, b_deg: f64, fp: &FrameParams) -> (f64, f64) {
    angles_from_unit(fp.eq_to_gal().apply_inverse(unit_from_angles(l_deg, b_deg)))
}

/// Local equatorial basis at a sky position: (radial, toward +RA, toward +Dec).
fn equatorial_basis(ra_deg: f64, dec_deg: f64) -> (Vec3, Vec3, Vec3) {
    let (sa, ca) = ra_deg.to_radians().sin_cos();
    let (sd, cd) = dec_deg.to_radians().sin_cos();
    (
        Vec3::new(cd * ca, cd * sa, sd),
        Vec3::new(-sa, ca, 0.0),
        Vec3::new(-sd * ca, -sd * sa, cd),
    )
}

/// Galactocentric phase-space state of a catalog record.
pub fn to_galactocentric(rec: &ClusterRecord, fp: &FrameParams) -> PhaseState {
    let rot = fp.eq_to_gal();
    let (r_hat, e_ra, e_dec) = equatorial_basis(rec.ra_deg, rec.dec_deg);
    let rel = rot.apply(r_hat * rec.dist_kpc);
    let vt = K_TANGENTIAL * rec.dist_kpc;
    let v_eq = r_hat * rec.rv_kms + e_ra * (vt * rec.pmra_masyr) + e_dec * (vt * rec.pmdec_masyr);
    PhaseState {
        pos: rel + fp.sun_position(),
        vel: rot.apply(v_eq) + fp.sun_velocity(),
    }
}

/// Heliocentric observables of a galactocentric state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub ra_deg: f64,
    pub dec_deg: f64,
    pub dist_kpc: f64,
    pub pmra_masyr: f64,
    pub pmdec_masyr: f64,
    pub rv_kms: f64,
}

impl Observables {
    /// Copies the kinematic observables onto `template`, keeping its name,
    /// distance error, magnitude and metallicity.
    pub fn apply_to(&self, template: &ClusterRecord) -> ClusterRecord {
        ClusterRecord {
            ra_deg: self.ra_deg,
            dec_deg: self.dec_deg,
            dist_kpc: self.dist_kpc,
            pmra_masyr: self.pmra_masyr,
            pmdec_masyr: self.pmdec_masyr,
            rv_kms: self.rv_kms,
            ..template.clone()
        }
    }
}

pub fn from_galactocentric(st: &PhaseState, fp: &FrameParams) -> Result<Observables, FrameError> {
    let rel = st.pos - fp.sun_position();
    let dist = rel.norm();
    if dist < DEGENERATE_DIST_KPC {
        return Err(FrameError::DegenerateDirection);
    }
    let rot = fp.eq_to_gal();
    let r_eq = rot.apply_inverse(rel / dist);
    let (ra, dec) = angles_from_unit(r_eq);
    let (r_hat, e_ra, e_dec) = equatorial_basis(ra, dec);
    let v_eq = rot.apply_inverse(st.vel - fp.sun_velocity());
    let vt = K_TANGENTIAL * dist;
    Ok(Observables {
        ra_deg: ra,
        dec_deg: dec,
        dist_kpc: dist,
        pmra_masyr: v_eq.dot(e_ra) / vt,
        pmdec_masyr: v_eq.dot(e_dec) / vt,
        rv_kms: v_eq.dot(r_hat),
    })
}
