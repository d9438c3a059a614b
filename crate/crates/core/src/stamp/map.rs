use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::frames::{to_galactocentric, FrameParams};
use crate::vec3::Vec3;

pub const MV_QUANTUM_MAG: f64 = 0.25;
pub const FEH_QUANTUM_DEX: f64 = 0.1;
/// One parsec.
pub const POS_QUANTUM_KPC: f64 = 1e-3;
pub const MIN_ANCHORS: usize = 4;
/// Anchors closer than this to each other make the map degenerate.
pub const MIN_PAIR_SEP_KPC: f64 = 0.5;
/// Smallest allowed ratio of the minor to major spread of anchor positions.
pub(crate) const FLATNESS_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("anchor count k = {k} must lie in [{MIN_ANCHORS}, {available}]")]
    BadK { k: usize, available: usize },
    #[error("only {found} of {wanted} anchors survive the separation constraint")]
    TooFewCandidates { wanted: usize, found: usize },
    #[error("anchor index {0} is out of range or repeated")]
    BadIndex(usize),
    #[error("degenerate anchor geometry: {0}")]
    DegenerateGeometry(String),
}

/// Quantized luminosity and metallicity of an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnchorSignature {
    /// Absolute V magnitude in 0.25 mag quanta.
    pub mv_q: i16,
    /// [Fe/H] in 0.1 dex quanta.
    pub feh_q: i16,
}

impl AnchorSignature {
    pub fn quantize(mv_abs: f64, feh_dex: f64) -> Self {
        AnchorSignature {
            mv_q: (mv_abs / MV_QUANTUM_MAG).round() as i16,
            feh_q: (feh_dex / FEH_QUANTUM_DEX).round() as i16,
        }
    }

    pub fn mv_abs(&self) -> f64 {
        f64::from(self.mv_q) * MV_QUANTUM_MAG
    }

    pub fn feh_dex(&self) -> f64 {
        f64::from(self.feh_q) * FEH_QUANTUM_DEX
    }

    /// Both components within `quanta` of each other.
    pub fn within(&self, other: &AnchorSignature, quanta: i16) -> bool {
        (i32::from(self.mv_q) - i32::from(other.mv_q)).abs() <= i32::from(quanta)
            && (i32::from(self.feh_q) - i32::from(other.feh_q)).abs() <= i32::from(quanta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub signature: AnchorSignature,
    /// Position relative to the sender, kpc, in Galactic-aligned axes.
    pub pos_rel: Vec3,
}

/// The stamp payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationMap {
    pub epoch_jyear: f64,
    pub anchors: Vec<Anchor>,
}

impl LocationMap {
    pub fn k(&self) -> usize {
        self.anchors.len()
    }

    /// Sender-to-anchor distances, kpc.
    pub fn distances(&self) -> Vec<f64> {
        self.anchors.iter().map(|a| a.pos_rel.norm()).collect()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.anchors.iter().map(|a| a.pos_rel).collect()
    }

    /// Checks anchor count, finiteness, pairwise separation and that the
    /// anchors span three dimensions.
    pub fn validate(&self) -> Result<(), MapError> {
        if self.k() < MIN_ANCHORS {
            return Err(MapError::BadK { k: self.k(), available: self.k() });
        }
        if !self.epoch_jyear.is_finite() || self.anchors.iter().any(|a| !a.pos_rel.is_finite()) {
            return Err(MapError::DegenerateGeometry("non-finite value".into()));
        }
        check_geometry(&self.positions())
    }
}

fn quantize_pos(v: Vec3) -> Vec3 {
    let q = |x: f64| (x / POS_QUANTUM_KPC).round() * POS_QUANTUM_KPC;
    Vec3::new(q(v.x), q(v.y), q(v.z))
}

/// Rejects point sets with close pairs or that are collinear or coplanar.
pub fn check_geometry(points: &[Vec3]) -> Result<(), MapError> {
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate().skip(i + 1) {
            let d = a.distance(*b);
            if d <= MIN_PAIR_SEP_KPC {
                return Err(MapError::DegenerateGeometry(format!(
                    "anchors {i} and {j} are {d:.3} kpc apart"
                )));
            }
        }
    }
    let spread = principal_spreads(points);
    if spread[1] <= FLATNESS_TOL * spread[2] {
        return Err(MapError::DegenerateGeometry("anchors are collinear".into()));
    }
    if spread[0] <= FLATNESS_TOL * spread[2] {
        return Err(MapError::DegenerateGeometry("anchors are coplanar".into()));
    }
    Ok(())
}

/// RMS extents of the point cloud along its principal axes, ascending.
pub(crate) fn principal_spreads(points: &[Vec3]) -> [f64; 3] {
    let n = points.len() as f64;
    let c = points.iter().fold(Vec3::ZERO, |acc, p| acc + *p) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = *p - c;
        let d = nalgebra::Vector3::new(d.x, d.y, d.z);
        cov += d * d.transpose();
    }
    cov /= n;
    let mut ev: Vec<f64> = SymmetricEigen::new(cov)
        .eigenvalues
        .iter()
        .map(|e| e.max(0.0).sqrt())
        .collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[1], ev[2]]
}

/// Greedy anchor choice: brightest first (ascending M_V, ties by name),
/// skipping any cluster within `min_sep_kpc` of an already chosen one.
pub fn select_anchors(
    cat: &Catalog,
    fp: &FrameParams,
    k: usize,
    min_sep_kpc: f64,
) -> Result<Vec<usize>, MapError> {
    if k < MIN_ANCHORS || k > cat.len() {
        return Err(MapError::BadK { k, available: cat.len() });
    }
    let recs = cat.records();
    let mut order: Vec<usize> = (0..recs.len()).collect();
    order.sort_by(|&a, &b| {
        recs[a]
            .mv_abs
            .total_cmp(&recs[b].mv_abs)
            .then_with(|| recs[a].name.cmp(&recs[b].name))
    });
    let positions: Vec<Vec3> = recs.iter().map(|r| to_galactocentric(r, fp).pos).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for i in order {
        if chosen
            .iter()
            .all(|&c| positions[c].distance(positions[i]) > min_sep_kpc)
        {
            chosen.push(i);
            if chosen.len() == k {
                return Ok(chosen);
            }
        }
    }
    Err(MapError::TooFewCandidates { wanted: k, found: chosen.len() })
}

/// Builds the sender's map: anchor positions relative to the Sun, quantized
/// to one parsec, with quantized signatures.
pub fn build_location_map(
    cat: &Catalog,
    fp: &FrameParams,
    indices: &[usize],
) -> Result<LocationMap, MapError> {
    let mut seen = vec![false; cat.len()];
    for &i in indices {
        if i >= cat.len() || std::mem::replace(&mut seen[i], true) {
            return Err(MapError::BadIndex(i));
        }
    }
    let sun = fp.sun_position();
    let anchors = indices
        .iter()
        .map(|&i| {
            let rec = &cat.records()[i];
            Anchor {
                signature: AnchorSignature::quantize(rec.mv_abs, rec.feh_dex),
                pos_rel: quantize_pos(to_galactocentric(rec, fp).pos - sun),
            }
        })
        .collect();
    let map = LocationMap {
        epoch_jyear: cat.epoch_jyear(),
        anchors,
    };
    map.validate()?;
    Ok(map)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::catalog::{reference_snapshot, test_record, ClusterRecord};
    use crate::frames::{from_galactocentric, PhaseState};
    use proptest::prelude::*;

    /// Catalog whose clusters sit at `rel` offsets from the Sun.
    pub(crate) fn catalog_at(rel: &[Vec3], fp: &FrameParams) -> Catalog {
        let recs: Vec<ClusterRecord> = rel
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let st = PhaseState::new(fp.sun_position() + *r, Vec3::new(10.0, 200.0, -5.0));
                let mut rec = from_galactocentric(&st, fp).unwrap().apply_to(&test_record(&format!("T{i}")));
                rec.mv_abs = -9.0 + 0.5 * i as f64;
                rec.feh_dex = -2.0 + 0.3 * i as f64;
                rec
            })
            .collect();
        Catalog::new(2023.0, recs, "test").unwrap()
    }

    pub(crate) fn tetrahedron() -> Vec<Vec3> {
        vec![
            Vec3::new(3.0, 3.0, 3.0),
            Vec3::new(3.0, -3.0, -3.0),
            Vec3::new(-3.0, 3.0, -3.0),
            Vec3::new(-3.0, -3.0, 3.0),
        ]
    }

    #[test]
    fn brightest_selected_first() {
        let mut cat = crate::catalog::synth_catalog(9, 50).unwrap().into_records();
        for r in cat.iter_mut() {
            r.mv_abs = r.mv_abs.clamp(-9.0, -5.0);
        }
        cat[17].mv_abs = -14.5;
        let cat = Catalog::new(2023.0, cat, "t").unwrap();
        let idx = select_anchors(&cat, &FrameParams::default(), 4, 1.0).unwrap();
        assert_eq!(idx[0], 17);
    }

    #[test]
    fn ties_broken_by_name() {
        let fp = FrameParams::default();
        let rel = [
            Vec3::new(5.0, 0.0, 0.0),
            Vec3::new(0.0, 5.0, 0.0),
            Vec3::new(0.0, 0.0, 5.0),
            Vec3::new(-5.0, 0.0, 0.0),
            Vec3::new(0.0, -5.0, 0.0),
        ];
        let mut recs = catalog_at(&rel, &fp).into_records();
        for r in recs.iter_mut() {
            r.mv_abs = -8.0;
        }
        recs.reverse();
        let cat = Catalog::new(2023.0, recs, "t").unwrap();
        let idx = select_anchors(&cat, &fp, 4, 1.0).unwrap();
        let names: Vec<&str> = idx.iter().map(|&i| cat.records()[i].name.as_str()).collect();
        assert_eq!(names, ["T0", "T1", "T2", "T3"]);
    }

    #[test]
    fn bad_k() {
        let cat = reference_snapshot();
        let fp = FrameParams::default();
        assert!(matches!(select_anchors(&cat, &fp, 3, 1.0), Err(MapError::BadK { k: 3, .. })));
        assert!(matches!(select_anchors(&cat, &fp, 165, 1.0), Err(MapError::BadK { .. })));
    }

    #[test]
    fn separation_can_exhaust_candidates() {
        let cat = reference_snapshot();
        let err = select_anchors(&cat, &FrameParams::default(), 16, 60.0).unwrap_err();
        assert!(matches!(err, MapError::TooFewCandidates { wanted: 16, .. }));
    }

    #[test]
    fn reference_anchor_selection_is_frozen() {
        let idx = select_anchors(&reference_snapshot(), &FrameParams::default(), 16, 1.0).unwrap();
        assert_eq!(idx, GOLDEN_ANCHORS);
    }

    pub(crate) const GOLDEN_ANCHORS: [usize; 16] =
        [67, 123, 130, 95, 145, 136, 132, 151, 17, 20, 85, 21, 125, 68, 99, 50];

    #[test]
    fn tetrahedron_positions_survive_quantization() {
        let fp = FrameParams::default();
        let rel = tetrahedron();
        let cat = catalog_at(&rel, &fp);
        let map = build_location_map(&cat, &fp, &[0, 1, 2, 3]).unwrap();
        for (a, r) in map.anchors.iter().zip(&rel) {
            assert!((a.pos_rel - *r).norm() <= 0.5e-3 * 3f64.sqrt());
        }
        assert_eq!(map.epoch_jyear, 2023.0);
    }

    #[test]
    fn collinear_is_degenerate() {
        let fp = FrameParams::default();
        let rel: Vec<Vec3> = (1..=4).map(|i| Vec3::new(2.0 * i as f64, 0.0, 0.0)).collect();
        let cat = catalog_at(&rel, &fp);
        assert!(matches!(
            build_location_map(&cat, &fp, &[0, 1, 2, 3]),
            Err(MapError::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn close_pair_is_degenerate() {
        let fp = FrameParams::default();
        let mut rel = tetrahedron();
        rel.push(Vec3::new(3.2, 3.0, 3.0));
        let cat = catalog_at(&rel, &fp);
        assert!(build_location_map(&cat, &fp, &[0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn repeated_index_rejected() {
        let fp = FrameParams::default();
        let cat = catalog_at(&tetrahedron(), &fp);
        assert_eq!(build_location_map(&cat, &fp, &[0, 1, 2, 2]), Err(MapError::BadIndex(2)));
        assert_eq!(build_location_map(&cat, &fp, &[0, 1, 2, 9]), Err(MapError::BadIndex(9)));
    }

    #[test]
    fn golden_map() {
        let cat = reference_snapshot();
        let fp = FrameParams::default();
        let map = build_location_map(&cat, &fp, &GOLDEN_ANCHORS).unwrap();
        assert_eq!(map.k(), 16);
        assert_eq!(map.epoch_jyear, cat.epoch_jyear());
    }

    proptest! {
        #[test]
        fn signature_quantization_error(mv in -15.0..0.0f64, feh in -3.5..0.5f64) {
            let s = AnchorSignature::quantize(mv, feh);
            prop_assert!((s.mv_abs() - mv).abs() <= 0.125 + 1e-12);
            prop_assert!((s.feh_dex() - feh).abs() <= 0.05 + 1e-12);
        }
    }
}
