//! Globular-cluster location and time stamps.
//!
//! A sender describes its position by the sender-relative positions of
//! bright globular clusters, tagged with quantized luminosity and
//! metallicity signatures. Cluster proper motions make that geometry drift,
//! so a recipient holding a present-day catalog can recover both where the
//! stamp was made and how long ago.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod epoch;
pub mod frames;
pub mod optimize;
pub mod simulate;
pub mod stamp;
pub mod units;
pub mod vec3;

pub use vec3::Vec3;
