//! Location stamp: anchor selection, the location map, its binary codec,
//! and the recipient side (anchor matching and trilateration).

mod codec;
mod locate;
mod map;
mod matching;

pub use codec::{
    decode_stamp, encode_stamp, CodecError, StampBytes, ANCHOR_BLOCK_LEN, HEADER_LEN, MAGIC,
    TRAILER_LEN, VERSION,
};
pub use locate::{locate_points, locate_sender, LocateError, SenderFix, MAX_ITERATIONS, STEP_TOL_KPC};
pub use map::{
    build_location_map, check_geometry, select_anchors, Anchor, AnchorSignature, LocationMap,
    MapError, FEH_QUANTUM_DEX, MIN_ANCHORS, MIN_PAIR_SEP_KPC, MV_QUANTUM_MAG, POS_QUANTUM_KPC,
};
pub use matching::{match_anchors, Correspondence, MatchError, AMBIGUITY_MARGIN};
