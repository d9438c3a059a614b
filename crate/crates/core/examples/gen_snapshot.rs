//! Regenerates `data/reference_snapshot.csv`.
use gstamp_core::catalog::{serialize_catalog, synth_catalog, Catalog, REFERENCE_EPOCH_JYEAR};

fn main() {
    let synth = synth_catalog(2023, 164).expect("valid count");
    let cat = Catalog::new(
        REFERENCE_EPOCH_JYEAR,
        synth.into_records(),
        "offline stand-in for the 164-cluster full-kinematics set (synth_catalog seed=2023 n=164)",
    )
    .expect("valid catalog");
    print!("{}", serialize_catalog(&cat, &[]));
}
