//! Stamp binary format, version 1. All integers little-endian.
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `MIAB`                            |
//! | 4      | 1    | version (1)                             |
//! | 5      | 2    | anchor count k, u16                     |
//! | 7      | 8    | epoch, Julian year, IEEE-754 f64        |
//! | 15     | 16k  | anchors: mv_q i16, feh_q i16, x y z i32 |
//! | 15+16k | 4    | CRC-32 (IEEE) of all preceding bytes    |
//!
//! Anchor positions are fixed-point parsecs relative to the sender.

use thiserror::Error;

use super::map::{Anchor, AnchorSignature, LocationMap, POS_QUANTUM_KPC};
use crate::vec3::Vec3;

pub const MAGIC: [u8; 4] = *b"MIAB";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 15;
pub const ANCHOR_BLOCK_LEN: usize = 16;
pub const TRAILER_LEN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("BadMagic: stamp does not start with MIAB")]
    BadMagic,
    #[error("UnsupportedVersion: {0}")]
    UnsupportedVersion(u8),
    #[error("ChecksumFail: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumFail { stored: u32, computed: u32 },
    #[error("Truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("TrailingBytes: expected {expected} bytes, have {have}")]
    TrailingBytes { expected: usize, have: usize },
    #[error("OutOfRange: {0}")]
    OutOfRange(String),
}

/// Encoded stamp.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StampBytes(Vec<u8>);

impl StampBytes {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }
}

impl AsRef<[u8]> for StampBytes {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

fn to_fixed(v: f64, axis: &str) -> Result<i32, CodecError> {
    let q = (v / POS_QUANTUM_KPC).round();
    if !(q.is_finite() && q >= f64::from(i32::MIN) && q <= f64::from(i32::MAX)) {
        return Err(CodecError::OutOfRange(format!("{axis} = {v} kpc")));
    }
    Ok(q as i32)
}

pub fn encode_stamp(map: &LocationMap) -> Result<StampBytes, CodecError> {
    let k = u16::try_from(map.k())
        .map_err(|_| CodecError::OutOfRange(format!("{} anchors exceed u16", map.k())))?;
    let mut out = Vec::with_capacity(HEADER_LEN + map.k() * ANCHOR_BLOCK_LEN + TRAILER_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&k.to_le_bytes());
    out.extend_from_slice(&map.epoch_jyear.to_le_bytes());
    for a in &map.anchors {
        out.extend_from_slice(&a.signature.mv_q.to_le_bytes());
        out.extend_from_slice(&a.signature.feh_q.to_le_bytes());
        out.extend_from_slice(&to_fixed(a.pos_rel.x, "x")?.to_le_bytes());
        out.extend_from_slice(&to_fixed(a.pos_rel.y, "y")?.to_le_bytes());
        out.extend_from_slice(&to_fixed(a.pos_rel.z, "z")?.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(StampBytes(out))
}

fn le_i16(b: &[u8]) -> i16 {
    i16::from_le_bytes([b[0], b[1]])
}

fn le_i32(b: &[u8]) -> i32 {
    i32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Decodes a stamp. Geometry is not validated here; the recipient decides
/// what it can use.
pub fn decode_stamp(bytes: &[u8]) -> Result<LocationMap, CodecError> {
    let have = bytes.len();
    let prefix = have.min(MAGIC.len());
    if bytes[..prefix] != MAGIC[..prefix] {
        return Err(CodecError::BadMagic);
    }
    if have < HEADER_LEN {
        return Err(CodecError::Truncated { need: HEADER_LEN, have });
    }
    if bytes[4] != VERSION {
        return Err(CodecError::UnsupportedVersion(bytes[4]));
    }
    let k = usize::from(u16::from_le_bytes([bytes[5], bytes[6]]));
    let need = HEADER_LEN + k * ANCHOR_BLOCK_LEN + TRAILER_LEN;
    if have < need {
        return Err(CodecError::Truncated { need, have });
    }
    if have > need {
        return Err(CodecError::TrailingBytes { expected: need, have });
    }
    let body = &bytes[..need - TRAILER_LEN];
    let stored = u32::from_le_bytes(bytes[need - TRAILER_LEN..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(CodecError::ChecksumFail { stored, computed });
    }
    let epoch_jyear = f64::from_le_bytes(bytes[7..15].try_into().expect("8 bytes"));
    let anchors = body[HEADER_LEN..]
        .chunks_exact(ANCHOR_BLOCK_LEN)
        .map(|b| Anchor {
            signature: AnchorSignature {
                mv_q: le_i16(&b[0..2]),
                feh_q: le_i16(&b[2..4]),
            },
            pos_rel: Vec3::new(
                f64::from(le_i32(&b[4..8])) * POS_QUANTUM_KPC,
                f64::from(le_i32(&b[8..12])) * POS_QUANTUM_KPC,
                f64::from(le_i32(&b[12..16])) * POS_QUANTUM_KPC,
            ),
        })
        .collect();
    Ok(LocationMap { epoch_jyear, anchors })
}
