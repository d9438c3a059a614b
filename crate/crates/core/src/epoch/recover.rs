use serde::{Deserialize, Serialize};

use super::{time_resolution, EpochError, Propagation};
use crate::catalog::Catalog;
use crate::frames::{to_galactocentric, FrameParams, PhaseState};
use crate::optimize::{scan, scan_then_golden, ScanError};
use crate::stamp::{match_anchors, Correspondence, LocationMap};
use crate::units::YEARS_PER_MYR;
use crate::vec3::Vec3;

/// Search settings for [`recover_epoch`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverOptions {
    pub window_lo_myr: f64,
    pub window_hi_myr: f64,
    pub match_tol_kpc: f64,
    pub scan_samples: usize,
    pub width_myr: f64,
    pub propagation: Propagation,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions {
            window_lo_myr: -5.0,
            window_hi_myr: 5.0,
            match_tol_kpc: 1.0,
            scan_samples: 64,
            width_myr: 1e-3,
            propagation: Propagation::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochEstimate {
    /// Elapsed time from stamp to catalog epoch.
    pub dt_myr: f64,
    pub residual_kpc: f64,
    pub bound_myr: f64,
    /// Galactocentric sender position at the stamp epoch implied by the fit.
    pub sender_position: Vec3,
    pub correspondence: Correspondence,
    pub evaluations: usize,
}

/// Misfit between the map geometry and matched clusters rewound by `dt`.
///
/// The sender's position is unknown to the recipient, so each evaluation
/// removes the best-fitting translation: the residual is the RMS spread of
/// `x_i(-dt) - p_i` about its mean.
pub struct EpochObjective<'a> {
    map_pos: Vec<Vec3>,
    now: Vec<PhaseState>,
    propagation: &'a Propagation,
}

impl<'a> EpochObjective<'a> {
    pub fn new(
        map: &LocationMap,
        corr: &Correspondence,
        cat_now: &Catalog,
        fp: &FrameParams,
        propagation: &'a Propagation,
    ) -> Self {
        let (map_pos, now) = corr
            .pairs
            .iter()
            .map(|&(a, r)| {
                (map.anchors[a].pos_rel, to_galactocentric(&cat_now.records()[r], fp))
            })
            .unzip();
        EpochObjective { map_pos, now, propagation }
    }

    fn offsets(&self, dt_myr: f64) -> Result<Vec<Vec3>, EpochError> {
        self.now
            .iter()
            .zip(&self.map_pos)
            .map(|(st, p)| Ok(self.propagation.evolve(st, -dt_myr)?.pos - *p))
            .collect()
    }

    /// Translation-free RMS residual, kpc. Non-finite on integrator failure.
    pub fn misfit(&self, dt_myr: f64) -> f64 {
        match self.offsets(dt_myr) {
            Ok(d) => {
                let c = mean(&d);
                (d.iter().map(|x| (*x - c).norm_sq()).sum::<f64>() / d.len() as f64).sqrt()
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// Sender position at the stamp epoch for a given `dt_myr`.
    pub fn sender_position(&self, dt_myr: f64) -> Result<Vec3, EpochError> {
        Ok(mean(&self.offsets(dt_myr)?))
    }
}

fn mean(v: &[Vec3]) -> Vec3 {
    v.iter().fold(Vec3::ZERO, |a, b| a + *b) * (1.0 / v.len() as f64)
}

/// Conservative bound on the recovered time: the largest per-anchor time
/// for its galactocentric speed to cover its distance error. Years.
pub fn epoch_error_bound(cat: &Catalog, fp: &FrameParams, indices: &[usize]) -> Result<f64, EpochError> {
    indices.iter().try_fold(0.0f64, |acc, &i| {
        let rec = &cat.records()[i];
        let speed = to_galactocentric(rec, fp).vel.norm();
        Ok(acc.max(time_resolution(rec.dist_err_kpc, speed)?))
    })
}

/// Matches the map against `cat_now`, then finds the elapsed time that
/// best aligns the rewound clusters with the map.
pub fn recover_epoch(
    map: &LocationMap,
    cat_now: &Catalog,
    fp: &FrameParams,
    opts: &RecoverOptions,
) -> Result<EpochEstimate, EpochError> {
    let corr = match_anchors(map, cat_now, fp, opts.match_tol_kpc)?;
    let objective = EpochObjective::new(map, &corr, cat_now, fp, &opts.propagation);
    let min = scan_then_golden(
        |dt| objective.misfit(dt),
        opts.window_lo_myr,
        opts.window_hi_myr,
        opts.scan_samples,
        opts.width_myr,
    )
    .map_err(|e| match e {
        ScanError::MinimumAtEdge { .. } => EpochError::WindowTooNarrow(e),
        ScanError::BadWindow => EpochError::BadGrid(e.to_string()),
    })?;
    if !min.fx.is_finite() {
        return Err(EpochError::BadGrid("objective is not finite at the minimum".into()));
    }
    let records: Vec<usize> = corr.pairs.iter().map(|p| p.1).collect();
    let bound_yr = epoch_error_bound(cat_now, fp, &records)?;
    Ok(EpochEstimate {
        dt_myr: min.x,
        residual_kpc: min.fx,
        bound_myr: bound_yr / YEARS_PER_MYR,
        sender_position: objective.sender_position(min.x)?,
        correspondence: corr,
        evaluations: min.evaluations,
    })
}

/// The coarse samples `recover_epoch` would take, for diagnostics.
pub fn coarse_profile(objective: &EpochObjective, opts: &RecoverOptions) -> Vec<(f64, f64)> {
    scan(|dt| objective.misfit(dt), opts.window_lo_myr, opts.window_hi_myr, opts.scan_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{reference_snapshot, test_record, ClusterRecord};
    use crate::frames::from_galactocentric;
    use crate::stamp::{build_location_map, select_anchors};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn record_with_speed(name: &str, dist_err: f64, speed: f64, fp: &FrameParams) -> ClusterRecord {
        let dir = Vec3::new(0.36, 0.48, 0.8);
        let st = PhaseState::new(Vec3::new(1.0, -4.0, 6.0), dir * speed);
        let mut rec = from_galactocentric(&st, fp).unwrap().apply_to(&test_record(name));
        rec.dist_err_kpc = dist_err;
        rec
    }

    #[test]
    fn bound_single_and_max_rule() {
        let fp = FrameParams::default();
        let a = record_with_speed("A", 0.5, 500.0, &fp);
        let b = record_with_speed("B", 0.1, 300.0, &fp);
        let cat = Catalog::new(2023.0, vec![a, b], "t").unwrap();
        let one = epoch_error_bound(&cat, &fp, &[0]).unwrap();
        assert!((one - 9.78e5).abs() / 9.78e5 < 5e-3, "{one}");
        let two = epoch_error_bound(&cat, &fp, &[1, 0]).unwrap();
        assert!((two - one).abs() < 1e-6 * one);
        let small = epoch_error_bound(&cat, &fp, &[1]).unwrap();
        assert!((small - 3.26e5).abs() / 3.26e5 < 5e-3, "{small}");
    }

    #[test]
    fn bound_zero_errors() {
        let fp = FrameParams::default();
        let cat = Catalog::new(2023.0, vec![record_with_speed("A", 0.0, 200.0, &fp)], "t").unwrap();
        assert_eq!(epoch_error_bound(&cat, &fp, &[0]).unwrap(), 0.0);
    }

    fn stamp_from_snapshot() -> (Catalog, LocationMap) {
        let fp = FrameParams::default();
        let cat = reference_snapshot();
        let idx = select_anchors(&cat, &fp, 16, 1.0).unwrap();
        let map = build_location_map(&cat, &fp, &idx).unwrap();
        (cat, map)
    }

    #[test]
    fn noiseless_recovery() {
        let fp = FrameParams::default();
        let (cat0, map) = stamp_from_snapshot();
        let opts = RecoverOptions::default();
        for dt in [0.0, 0.1, 0.5, 1.0] {
            let now = super::super::propagate_catalog(&cat0, &fp, dt, &Propagation::Linear).unwrap();
            let est = recover_epoch(&map, &now, &fp, &opts).unwrap();
            assert!((est.dt_myr - dt).abs() <= 1e-3, "dt {dt}: got {}", est.dt_myr);
            assert!(est.residual_kpc >= 0.0 && est.bound_myr > 0.0);
            assert!(est.sender_position.distance(fp.sun_position()) < 0.01);
        }
    }

    #[test]
    fn truth_beats_every_coarse_sample() {
        let fp = FrameParams::default();
        let (cat0, map) = stamp_from_snapshot();
        let opts = RecoverOptions::default();
        for dt in [0.1, 0.5, 1.0] {
            let now = super::super::propagate_catalog(&cat0, &fp, dt, &Propagation::Linear).unwrap();
            let corr = match_anchors(&map, &now, &fp, opts.match_tol_kpc).unwrap();
            let obj = EpochObjective::new(&map, &corr, &now, &fp, &opts.propagation);
            let at_truth = obj.misfit(dt);
            for (x, fx) in coarse_profile(&obj, &opts) {
                assert!(at_truth <= fx + 1e-12, "dt {dt}: f({x}) = {fx} < {at_truth}");
            }
        }
    }

    #[test]
    fn window_excluding_truth_is_too_narrow() {
        let fp = FrameParams::default();
        let (cat0, map) = stamp_from_snapshot();
        let now = super::super::propagate_catalog(&cat0, &fp, 1.0, &Propagation::Linear).unwrap();
        let opts = RecoverOptions {
            window_lo_myr: -3.0,
            window_hi_myr: -1.0,
            ..RecoverOptions::default()
        };
        assert!(matches!(
            recover_epoch(&map, &now, &fp, &opts),
            Err(EpochError::WindowTooNarrow(_))
        ));
    }

    #[test]
    fn orbit_mode_recovers_orbit_drift() {
        let fp = FrameParams::default();
        let (cat0, map) = stamp_from_snapshot();
        let mode = Propagation::Orbit {
            potential: crate::dynamics::PotentialParams::default(),
            step_myr: 0.1,
            scheme: crate::dynamics::Scheme::Leapfrog,
        };
        let now = super::super::propagate_catalog(&cat0, &fp, 1.5, &mode).unwrap();
        let opts = RecoverOptions { propagation: mode, ..RecoverOptions::default() };
        let est = recover_epoch(&map, &now, &fp, &opts).unwrap();
        assert!((est.dt_myr - 1.5).abs() <= 1e-3, "{}", est.dt_myr);
    }

    /// Fast anchors, line-of-sight distance noise on the present catalog.
    fn noisy_trial(cat0: &Catalog, idx: &[usize], sigma: f64, dt: f64, seed: u64) -> (f64, f64) {
        let fp = FrameParams::default();
        let map = build_location_map(cat0, &fp, idx).unwrap();
        let now = super::super::propagate_catalog(cat0, &fp, dt, &Propagation::Linear).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let recs = now
            .records()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.dist_kpc = (r.dist_kpc + noise.sample(&mut rng)).max(0.05);
                r.dist_err_kpc = sigma;
                r
            })
            .collect();
        let now = Catalog::new(now.epoch_jyear(), recs, "noisy").unwrap();
        let est = recover_epoch(&map, &now, &fp, &RecoverOptions::default()).unwrap();
        let _ = rng.gen::<u8>();
        ((est.dt_myr - dt).abs(), est.bound_myr)
    }

    fn fast_anchors(cat: &Catalog, min_speed: f64) -> Vec<usize> {
        let fp = FrameParams::default();
        let mut idx: Vec<usize> = (0..cat.len())
            .filter(|&i| to_galactocentric(&cat.records()[i], &fp).vel.norm() >= min_speed)
            .collect();
        idx.sort_by(|&a, &b| cat.records()[a].mv_abs.total_cmp(&cat.records()[b].mv_abs));
        idx.truncate(16);
        idx
    }

    #[test]
    fn noisy_fast_anchors_within_bound() {
        let cat0 = reference_snapshot();
        let idx = fast_anchors(&cat0, 300.0);
        assert!(idx.len() >= 8, "{}", idx.len());
        let mut ok = 0;
        for seed in 0..100 {
            let (err, bound) = noisy_trial(&cat0, &idx, 0.1, 0.5, seed);
            assert!(bound > 0.3 && bound < 0.4, "{bound}");
            if err <= bound {
                ok += 1;
            }
        }
        assert!(ok >= 90, "{ok}/100 within bound");
    }

    fn rms_error(cat0: &Catalog, idx: &[usize], sigma: f64) -> f64 {
        let errs: Vec<f64> = (0..40).map(|s| noisy_trial(cat0, idx, sigma, 0.5, 1000 + s).0).collect();
        (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt()
    }

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        num / den
    }

    fn with_scaled_velocities(cat: &Catalog, a: f64) -> Catalog {
        let fp = FrameParams::default();
        let recs = cat
            .records()
            .iter()
            .map(|r| {
                let st = to_galactocentric(r, &fp);
                from_galactocentric(&PhaseState::new(st.pos, st.vel * a), &fp).unwrap().apply_to(r)
            })
            .collect();
        Catalog::new(cat.epoch_jyear(), recs, "scaled").unwrap()
    }

    #[test]
    fn error_scales_with_noise_and_inverse_speed() {
        let cat0 = reference_snapshot();
        let idx = fast_anchors(&cat0, 300.0);
        let sigmas = [0.01, 0.02, 0.05, 0.1];
        let errs: Vec<f64> = sigmas.iter().map(|&s| rms_error(&cat0, &idx, s)).collect();
        let k = slope(&sigmas, &errs);
        assert!((k - 1.0).abs() <= 0.2, "sigma slope {k}: {errs:?}");

        let speeds = [0.5, 1.0, 2.0];
        let errs: Vec<f64> = speeds
            .iter()
            .map(|&a| rms_error(&with_scaled_velocities(&cat0, a), &idx, 0.05))
            .collect();
        let k = slope(&speeds, &errs);
        assert!((k + 1.0).abs() <= 0.2, "speed slope {k}: {errs:?}");
    }
}
