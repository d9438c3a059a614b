//! Trilateration of the sender from map distances and recipient-frame
//! anchor positions.
//!
//! Minimizes sum_i (|x_i - s| - d_i)^2 with damped Gauss-Newton started at
//! the anchor centroid. A step is halved until the cost does not increase,
//! so the cost sequence is monotone.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use super::map::{principal_spreads, FLATNESS_TOL};
use super::matching::Correspondence;
use super::LocationMap;
use crate::catalog::Catalog;
use crate::frames::{to_galactocentric, FrameParams};
use crate::vec3::Vec3;

pub const MAX_ITERATIONS: usize = 100;
pub const STEP_TOL_KPC: f64 = 1e-6;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocateError {
    #[error("degenerate anchor geometry: {0}")]
    Degenerate(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SenderFix {
    /// Estimated sender position in the recipient's galactocentric frame, kpc.
    pub position: Vec3,
    pub rms_residual_kpc: f64,
    pub iterations: usize,
    /// Cost (sum of squared residuals) at the start and after every iteration.
    pub cost_history: Vec<f64>,
}

fn cost(points: &[Vec3], dists: &[f64], s: Vec3) -> f64 {
    points
        .iter()
        .zip(dists)
        .map(|(x, d)| (x.distance(s) - d).powi(2))
        .sum()
}

/// Least-squares position from known points and measured distances.
pub fn locate_points(points: &[Vec3], dists: &[f64]) -> Result<SenderFix, LocateError> {
    assert_eq!(points.len(), dists.len(), "one distance per point");
    if points.len() < 4 {
        return Err(LocateError::Degenerate(format!("{} anchors, need 4", points.len())));
    }
    let spread = principal_spreads(points);
    if spread[0] <= FLATNESS_TOL * spread[2] {
        return Err(LocateError::Degenerate("anchors are coplanar".into()));
    }

    let n = points.len() as f64;
    let mut s = points.iter().fold(Vec3::ZERO, |a, p| a + *p) / n;
    let mut c = cost(points, dists, s);
    let mut history = vec![c];

    for iter in 1..=MAX_ITERATIONS {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (x, d) in points.iter().zip(dists) {
            let diff = s - *x;
            let r = diff.norm().max(1e-12);
            let j = Vector3::new(diff.x, diff.y, diff.z) / r;
            jtj += j * j.transpose();
            jtr += j * (r - d);
        }
        let delta = jtj
            .lu()
            .solve(&(-jtr))
            .ok_or_else(|| LocateError::Degenerate("singular normal equations".into()))?;
        let delta = Vec3::new(delta.x, delta.y, delta.z);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = s + delta * alpha;
            let tc = cost(points, dists, trial);
            if tc <= c {
                accepted = Some((trial, tc));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, next_cost)) = accepted else {
            // No descent along the Gauss-Newton direction: stationary point.
            history.push(c);
            return Ok(finish(s, c, n, iter, history));
        };
        let step = (next - s).norm();
        s = next;
        c = next_cost;
        history.push(c);
        if step < STEP_TOL_KPC {
            return Ok(finish(s, c, n, iter, history));
        }
    }
    Err(LocateError::NoConvergence(MAX_ITERATIONS))
}

fn finish(s: Vec3, c: f64, n: f64, iterations: usize, cost_history: Vec<f64>) -> SenderFix {
    SenderFix {
        position: s,
        rms_residual_kpc: (c / n).sqrt(),
        iterations,
        cost_history,
    }
}

/// Locates the sender using the matched clusters' positions in `cat` and
/// the sender-anchor distances stored in `map`.
pub fn locate_sender(
    corr: &Correspondence,
    map: &LocationMap,
    cat: &Catalog,
    fp: &FrameParams,
) -> Result<SenderFix, LocateError> {
    let mut points = Vec::with_capacity(corr.pairs.len());
    let mut dists = Vec::with_capacity(corr.pairs.len());
    for &(a, r) in &corr.pairs {
        let (Some(anchor), Some(rec)) = (map.anchors.get(a), cat.get(r)) else {
            return Err(LocateError::Degenerate(format!("pair ({a}, {r}) out of range")));
        };
        points.push(to_galactocentric(rec, fp).pos);
        dists.push(anchor.pos_rel.norm());
    }
    locate_points(&points, &dists)
}
