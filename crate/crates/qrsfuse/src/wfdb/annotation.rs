//! MIT-format annotation files (`.atr`).
//!
//! The stream is a sequence of little-endian 16-bit words. The high 6 bits of
//! a word are the annotation code, the low 10 bits a time delta in samples.
//! Codes 59–63 are pseudo-annotations:
//!
//! - `SKIP` (59): followed by a 4-byte interval (high 16 bits first, each word
//!   little-endian) added to the running time; the skip word's own delta field
//!   is unused.
//! - `NUM` (60), `SUB` (61), `CHN` (62): the delta field is a *value*, not a
//!   time step — time does not advance.
//! - `AUX` (63): the delta field is a byte count of attached text, padded to an
//!   even length.
//!
//! A zero word terminates the stream. Only QRS-class beat codes are surfaced.

use crate::{Error, Result};
use std::path::Path;

pub const CODE_NORMAL: u8 = 1;

const CODE_SKIP: u8 = 59;
const CODE_NUM: u8 = 60;
const CODE_SUB: u8 = 61;
const CODE_CHN: u8 = 62;
const CODE_AUX: u8 = 63;

/// QRS-class beat codes: every annotation that marks a ventricular
/// depolarization, whatever its morphology. Everything else (rhythm changes,
/// waveform boundaries, noise markers, comments) is not a beat.
///
/// name, code
const QRS_CODES: &[(u8, &str)] = &[
    (1, "NORMAL"),
    (2, "LBBB"),
    (3, "RBBB"),
    (4, "ABERR"),
    (5, "PVC"),
    (6, "FUSION"),
    (7, "NPC"),
    (8, "APC"),
    (9, "SVPB"),
    (10, "VESC"),
    (11, "NESC"),
    (12, "PACE"),
    (13, "UNKNOWN"),
    (25, "BBB"),
    (30, "LEARN"),
    (34, "AESC"),
    (35, "SVESC"),
    (38, "PFUS"),
    (41, "RONT"),
];

/// True for annotation codes that mark a QRS complex.
pub fn is_qrs_code(code: u8) -> bool {
    QRS_CODES.iter().any(|&(c, _)| c == code)
}

/// One beat annotation: absolute sample index plus its beat code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeatAnnotation {
    pub sample: usize,
    pub code: u8,
}

fn stream_err(index: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: index,
        msg: format!("annotation word {}: {}", index, msg.into()),
    }
}

/// Decodes an annotation byte stream, returning beat annotations only
/// (non-beat annotations advance time but are dropped).
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<BeatAnnotation>> {
    let mut words = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]));
    let mut beats = Vec::new();
    let mut time: i64 = 0;
    let mut index = 0usize;

    loop {
        let word = match words.next() {
            Some(w) => w,
            // a missing terminator word just ends the stream
            None => break,
        };
        index += 1;
        if word == 0 {
            break;
        }
        let code = (word >> 10) as u8;
        let delta = (word & 0x3FF) as i64;
        match code {
            CODE_SKIP => {
                let hi = words
                    .next()
                    .ok_or_else(|| stream_err(index, "skip interval truncated"))?;
                let lo = words
                    .next()
                    .ok_or_else(|| stream_err(index, "skip interval truncated"))?;
                index += 2;
                let interval = (((hi as u32) << 16) | lo as u32) as i32;
                time += interval as i64;
            }
            CODE_NUM | CODE_SUB | CODE_CHN => {
                // value annotations: no time advance
            }
            CODE_AUX => {
                let mut skip = delta as usize;
                skip += skip % 2; // pad to even
                for _ in 0..skip / 2 {
                    words
                        .next()
                        .ok_or_else(|| stream_err(index, "aux payload truncated"))?;
                    index += 1;
                }
            }
            _ => {
                time += delta;
                if time < 0 {
                    return Err(stream_err(index, format!("negative time {time}")));
                }
                if is_qrs_code(code) {
                    beats.push(BeatAnnotation {
                        sample: time as usize,
                        code,
                    });
                }
            }
        }
    }
    Ok(beats)
}

/// Encodes `(sample, code)` annotations (sorted by sample) as an MIT stream.
/// Used by the synthetic-record writer and by round-trip tests.
pub fn encode_annotations(anns: &[(usize, u8)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(anns.len() * 2 + 2);
    let mut prev = 0usize;
    for &(sample, code) in anns {
        debug_assert!(sample >= prev, "annotations must be sorted");
        let mut delta = sample - prev;
        if delta > 0x3FF {
            // SKIP word carries the whole interval; the beat word then has delta 0
            out.extend_from_slice(&((CODE_SKIP as u16) << 10).to_le_bytes());
            let interval = delta as u32;
            out.extend_from_slice(&((interval >> 16) as u16).to_le_bytes());
            out.extend_from_slice(&(interval as u16).to_le_bytes());
            delta = 0;
        }
        let word = ((code as u16) << 10) | delta as u16;
        out.extend_from_slice(&word.to_le_bytes());
        prev = sample;
    }
    out.extend_from_slice(&0u16.to_le_bytes());
    out
}

/// Reads and decodes an annotation file.
pub fn read_annotations(path: &Path) -> Result<Vec<BeatAnnotation>> {
    parse_annotations(&std::fs::read(path)?)
}
