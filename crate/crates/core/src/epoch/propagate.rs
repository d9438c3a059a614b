use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EpochError;
use crate::catalog::{Catalog, ClusterRecord};
use crate::dynamics::{advance, PotentialParams, Scheme};
use crate::frames::{from_galactocentric, to_galactocentric, FrameParams, PhaseState};
use crate::units::{KMS_TO_KPC_PER_MYR, YEARS_PER_MYR};

/// How clusters move between epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Propagation {
    /// Straight-line motion at the present velocity.
    #[default]
    Linear,
    /// Orbit integration in `potential` with steps no longer than `step_myr`.
    Orbit {
        potential: PotentialParams,
        step_myr: f64,
        scheme: Scheme,
    },
}

impl Propagation {
    /// Moves one galactocentric state by `dt_myr` (negative runs backward).
    pub fn evolve(&self, st: &PhaseState, dt_myr: f64) -> Result<PhaseState, EpochError> {
        match self {
            Propagation::Linear => Ok(PhaseState::new(
                st.pos + st.vel * (KMS_TO_KPC_PER_MYR * dt_myr),
                st.vel,
            )),
            Propagation::Orbit { potential, step_myr, scheme } => {
                if dt_myr == 0.0 {
                    return Ok(*st);
                }
                let n = (dt_myr.abs() / step_myr).ceil().max(1.0) as usize;
                Ok(advance(st, potential, dt_myr / n as f64, n, *scheme)?)
            }
        }
    }
}

/// The catalog as it would be observed `dt_myr` later. Names, distance
/// errors, magnitudes and metallicities carry over unchanged.
pub fn propagate_catalog(
    cat: &Catalog,
    fp: &FrameParams,
    dt_myr: f64,
    mode: &Propagation,
) -> Result<Catalog, EpochError> {
    let records = cat
        .records()
        .par_iter()
        .map(|rec| {
            let st = mode.evolve(&to_galactocentric(rec, fp), dt_myr)?;
            Ok(from_galactocentric(&st, fp)?.apply_to(rec))
        })
        .collect::<Result<Vec<ClusterRecord>, EpochError>>()?;
    Ok(Catalog::new(
        cat.epoch_jyear() + dt_myr * YEARS_PER_MYR,
        records,
        cat.provenance(),
    )?)
}
