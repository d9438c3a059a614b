//! Time stamp: the time-resolution model and recovery of the elapsed time
//! from proper-motion drift of the anchor geometry.

mod propagate;
mod recover;
mod resolution;

use thiserror::Error;

pub use propagate::{propagate_catalog, Propagation};
pub use recover::{coarse_profile, epoch_error_bound, recover_epoch, EpochEstimate, EpochObjective, RecoverOptions};
pub use resolution::{
    parse_resolution_csv, resolution_curves, time_resolution, ResolutionCurve, DEFAULT_DD_CASES_KPC,
};

use crate::catalog::CatalogError;
use crate::dynamics::IntegrateError;
use crate::frames::FrameError;
use crate::optimize::ScanError;
use crate::stamp::MatchError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpochError {
    #[error("velocity {0} km/s is not positive; the indicator is unusable")]
    ZeroVelocity(f64),
    #[error("distance error {0} kpc is negative")]
    NegativeDistance(f64),
    #[error("empty resolution grid")]
    EmptyGrid,
    #[error("bad resolution grid: {0}")]
    BadGrid(String),
    #[error("anchor matching failed: {0}")]
    MatchFailed(#[from] MatchError),
    #[error("search window too narrow: {0}")]
    WindowTooNarrow(ScanError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}
