//! Recipient-side identification of map anchors in a catalog.
//!
//! Each anchor's candidates are the catalog clusters whose quantized
//! signature lies within one quantum of the anchor's. Among injective
//! assignments of candidates, the search keeps the one whose inter-anchor
//! distances best reproduce the map's (RMS residual over all pairs).
//! Pairs deviating by more than the tolerance prune a branch.

use thiserror::Error;

use super::map::{AnchorSignature, LocationMap};
use crate::catalog::Catalog;
use crate::frames::{to_galactocentric, FrameParams};
use crate::vec3::Vec3;

/// The runner-up must exceed the best residual by at least this fraction.
pub const AMBIGUITY_MARGIN: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("ambiguous match: best rms {best:.4} kpc vs runner-up {second:.4} kpc")]
    MatchAmbiguous { best: f64, second: f64 },
    #[error("no consistent match: {0}")]
    NoMatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    /// (map anchor index, catalog record index), ordered by anchor index.
    pub pairs: Vec<(usize, usize)>,
    pub rms_residual_kpc: f64,
}

impl Correspondence {
    pub fn record_for(&self, anchor: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == anchor).map(|p| p.1)
    }
}

#[derive(Clone)]
struct Hypothesis {
    sum_sq: f64,
    // Catalog index per anchor.
    assign: Vec<usize>,
}

struct Search<'a> {
    order: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    map_dist: Vec<Vec<f64>>,
    cat_pos: &'a [Vec3],
    tol: f64,
    assign: Vec<Option<usize>>,
    used: Vec<bool>,
    best: Option<Hypothesis>,
    second: Option<Hypothesis>,
}

impl Search<'_> {
    fn bound(&self) -> f64 {
        self.second.as_ref().map_or(f64::INFINITY, |h| h.sum_sq)
    }

    fn offer(&mut self, sum_sq: f64) {
        let assign: Vec<usize> = self.assign.iter().map(|a| a.expect("complete")).collect();
        let h = Hypothesis { sum_sq, assign };
        // Lexicographic assignment order breaks exact ties.
        let better = |a: &Hypothesis, b: &Hypothesis| {
            a.sum_sq < b.sum_sq || (a.sum_sq == b.sum_sq && a.assign < b.assign)
        };
        match &self.best {
            Some(b) if !better(&h, b) => {
                if self.second.as_ref().is_none_or(|s| better(&h, s)) {
                    self.second = Some(h);
                }
            }
            _ => {
                self.second = self.best.take();
                self.best = Some(h);
            }
        }
    }

    fn descend(&mut self, depth: usize, sum_sq: f64) {
        if depth == self.order.len() {
            self.offer(sum_sq);
            return;
        }
        let anchor = self.order[depth];
        for ci in 0..self.candidates[anchor].len() {
            let cand = self.candidates[anchor][ci];
            if self.used[cand] {
                continue;
            }
            let mut added = 0.0;
            let mut ok = true;
            for &prev in &self.order[..depth] {
                let pc = self.assign[prev].expect("assigned above");
                let d = self.cat_pos[cand].distance(self.cat_pos[pc]);
                let r = d - self.map_dist[anchor][prev];
                if r.abs() > self.tol {
                    ok = false;
                    break;
                }
                added += r * r;
            }
            if !ok || sum_sq + added > self.bound() {
                continue;
            }
            self.assign[anchor] = Some(cand);
            self.used[cand] = true;
            self.descend(depth + 1, sum_sq + added);
            self.used[cand] = false;
            self.assign[anchor] = None;
        }
    }
}

pub fn match_anchors(
    map: &LocationMap,
    cat: &Catalog,
    fp: &FrameParams,
    tol_kpc: f64,
) -> Result<Correspondence, MatchError> {
    let k = map.k();
    if k < 2 {
        return Err(MatchError::NoMatch("map has fewer than two anchors".into()));
    }
    if cat.len() < k {
        return Err(MatchError::NoMatch(format!(
            "catalog has {} records, map has {k} anchors",
            cat.len()
        )));
    }
    let cat_pos: Vec<Vec3> = cat.records().iter().map(|r| to_galactocentric(r, fp).pos).collect();
    let cat_sig: Vec<AnchorSignature> = cat
        .records()
        .iter()
        .map(|r| AnchorSignature::quantize(r.mv_abs, r.feh_dex))
        .collect();

    let candidates: Vec<Vec<usize>> = map
        .anchors
        .iter()
        .map(|a| (0..cat.len()).filter(|&j| a.signature.within(&cat_sig[j], 1)).collect())
        .collect();
    if let Some(i) = candidates.iter().position(Vec::is_empty) {
        return Err(MatchError::NoMatch(format!("anchor {i} has no signature-compatible cluster")));
    }

    let pos = map.positions();
    let map_dist: Vec<Vec<f64>> = pos
        .iter()
        .map(|a| pos.iter().map(|b| a.distance(*b)).collect())
        .collect();

    // Most constrained anchors first.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));

    let mut search = Search {
        order,
        candidates,
        map_dist,
        cat_pos: &cat_pos,
        tol: tol_kpc,
        assign: vec![None; k],
        used: vec![false; cat.len()],
        best: None,
        second: None,
    };
    search.descend(0, 0.0);

    let n_pairs = (k * (k - 1) / 2) as f64;
    let best = search
        .best
        .ok_or_else(|| MatchError::NoMatch("no assignment within tolerance".into()))?;
    let best_rms = (best.sum_sq / n_pairs).sqrt();
    if let Some(second) = search.second {
        let second_rms = (second.sum_sq / n_pairs).sqrt();
        if best_rms >= (1.0 - AMBIGUITY_MARGIN) * second_rms {
            return Err(MatchError::MatchAmbiguous { best: best_rms, second: second_rms });
        }
    }
    Ok(Correspondence {
        pairs: best.assign.into_iter().enumerate().collect(),
        rms_residual_kpc: best_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{reference_snapshot, ClusterRecord};
    use crate::stamp::{build_location_map, select_anchors};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn reference_map() -> (Catalog, LocationMap, Vec<usize>) {
        let cat = reference_snapshot();
        let fp = FrameParams::default();
        let idx = select_anchors(&cat, &fp, 16, 1.0).unwrap();
        let map = build_location_map(&cat, &fp, &idx).unwrap();
        (cat, map, idx)
    }

    #[test]
    fn self_match_is_identity() {
        let (cat, map, idx) = reference_map();
        let corr = match_anchors(&map, &cat, &FrameParams::default(), 1.0).unwrap();
        let got: Vec<usize> = corr.pairs.iter().map(|p| p.1).collect();
        assert_eq!(got, idx);
        assert!(corr.rms_residual_kpc < 2e-3, "{}", corr.rms_residual_kpc);
    }

    #[test]
    fn permuted_catalog_gives_inverse_permutation() {
        let (cat, map, idx) = reference_map();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let mut perm: Vec<usize> = (0..cat.len()).collect();
        perm.shuffle(&mut rng);
        // New row r holds old record perm[r].
        let shuffled: Vec<ClusterRecord> = perm.iter().map(|&i| cat.records()[i].clone()).collect();
        let shuffled = Catalog::new(cat.epoch_jyear(), shuffled, "perm").unwrap();
        let corr = match_anchors(&map, &shuffled, &FrameParams::default(), 1.0).unwrap();
        let mut inverse = vec![0; perm.len()];
        for (r, &old) in perm.iter().enumerate() {
            inverse[old] = r;
        }
        for (a, r) in corr.pairs {
            assert_eq!(r, inverse[idx[a]]);
        }
    }

    #[test]
    fn noisy_distances_still_match() {
        let (cat, map, idx) = reference_map();
        let fp = FrameParams::default();
        let sigma = 0.1;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut good = 0;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let recs: Vec<ClusterRecord> = cat
                .records()
                .iter()
                .map(|r| ClusterRecord {
                    dist_kpc: (r.dist_kpc + noise.sample(&mut rng)).max(0.01),
                    ..r.clone()
                })
                .collect();
            let noisy = Catalog::new(cat.epoch_jyear(), recs, "noisy").unwrap();
            if let Ok(corr) = match_anchors(&map, &noisy, &fp, 1.0) {
                let right = corr.pairs.iter().all(|&(a, r)| r == idx[a]);
                if right && corr.rms_residual_kpc <= 3.0 * sigma {
                    good += 1;
                }
            }
        }
        assert!(good >= 95, "{good}/100");
    }

    #[test]
    fn identical_twins_are_ambiguous() {
        let (cat, map, idx) = reference_map();
        // Duplicate an anchor under another name: two equally good hypotheses.
        let mut recs = cat.into_records();
        let mut twin = recs[idx[3]].clone();
        twin.name = "TWIN".into();
        recs.push(twin);
        let cat = Catalog::new(2023.0, recs, "twins").unwrap();
        assert!(matches!(
            match_anchors(&map, &cat, &FrameParams::default(), 1.0),
            Err(MatchError::MatchAmbiguous { .. })
        ));
    }

    #[test]
    fn unknown_signature_is_no_match() {
        let (cat, mut map, _) = reference_map();
        map.anchors[0].signature.feh_q = 100;
        assert!(matches!(
            match_anchors(&map, &cat, &FrameParams::default(), 1.0),
            Err(MatchError::NoMatch(_))
        ));
    }

    #[test]
    fn inconsistent_geometry_is_no_match() {
        let (cat, mut map, _) = reference_map();
        map.anchors[0].pos_rel = map.anchors[0].pos_rel * 1.5;
        assert!(matches!(
            match_anchors(&map, &cat, &FrameParams::default(), 1.0),
            Err(MatchError::NoMatch(_))
        ));
    }
}
