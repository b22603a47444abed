//! Sample decoders for the two formats the target databases use.
//!
//! Format 212 packs two 12-bit two's-complement samples into three bytes:
//! sample 1 is byte 0 plus the low nibble of byte 1 as its high bits, sample 2
//! is byte 2 plus the high nibble of byte 1. Format 16 is little-endian i16.
//! Samples are frame-interleaved: one sample of each signal, then the next
//! frame.

use crate::{Error, Result};

fn sign_extend_12(v: u16) -> i32 {
    if v & 0x800 != 0 {
        v as i32 - 4096
    } else {
        v as i32
    }
}

/// Decodes a flat stream of `total` 12-bit samples from 212-packed bytes.
fn decode_212_flat(bytes: &[u8], total: usize) -> Result<Vec<i32>> {
    // two samples per 3 bytes; an odd trailing sample occupies 2 bytes
    let needed = total / 2 * 3 + (total % 2) * 2;
    if bytes.len() < needed {
        return Err(Error::TruncatedSignal {
            expected: needed,
            found: bytes.len(),
        });
    }
    let mut out = Vec::with_capacity(total);
    let mut i = 0;
    while out.len() < total {
        let b0 = bytes[i] as u16;
        let b1 = bytes[i + 1] as u16;
        out.push(sign_extend_12(b0 | ((b1 & 0x0F) << 8)));
        if out.len() < total {
            let b2 = bytes[i + 2] as u16;
            out.push(sign_extend_12(b2 | ((b1 & 0xF0) << 4)));
        }
        i += 3;
    }
    Ok(out)
}

/// Packs a flat stream of samples (each in −2048..=2047) into 212 bytes.
///
/// Exists for the synthetic fixtures and round-trip tests; production code
/// only decodes.
pub fn encode_212(samples: &[i32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() / 2 * 3 + 2);
    let mut it = samples.chunks(2);
    for pair in &mut it {
        let a = (pair[0] & 0xFFF) as u16;
        if pair.len() == 2 {
            let b = (pair[1] & 0xFFF) as u16;
            out.push((a & 0xFF) as u8);
            out.push(((a >> 8) as u8 & 0x0F) | (((b >> 8) as u8 & 0x0F) << 4));
            out.push((b & 0xFF) as u8);
        } else {
            out.push((a & 0xFF) as u8);
            out.push((a >> 8) as u8 & 0x0F);
        }
    }
    out
}

fn deinterleave(flat: Vec<i32>, num_signals: usize, num_samples: usize) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::with_capacity(num_samples); num_signals];
    for (i, v) in flat.into_iter().enumerate() {
        out[i % num_signals].push(v);
    }
    out
}

/// Decodes a format-212 signal file into one vector per signal.
pub fn decode_212(bytes: &[u8], num_signals: usize, num_samples: usize) -> Result<Vec<Vec<i32>>> {
    let flat = decode_212_flat(bytes, num_signals * num_samples)?;
    Ok(deinterleave(flat, num_signals, num_samples))
}

/// Decodes a format-16 (little-endian i16) signal file into one vector per signal.
pub fn decode_16(bytes: &[u8], num_signals: usize, num_samples: usize) -> Result<Vec<Vec<i32>>> {
    let total = num_signals * num_samples;
    let needed = total * 2;
    if bytes.len() < needed {
        return Err(Error::TruncatedSignal {
            expected: needed,
            found: bytes.len(),
        });
    }
    let mut flat = Vec::with_capacity(total);
    for ch in bytes[..needed].chunks_exact(2) {
        flat.push(i16::from_le_bytes([ch[0], ch[1]]) as i32);
    }
    Ok(deinterleave(flat, num_signals, num_samples))
}

/// Encodes frame-interleaved samples as format 16. Used by the synthetic
/// record writer.
pub fn encode_16(flat: &[i32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(flat.len() * 2);
    for &v in flat {
        out.extend_from_slice(&(v as i16).to_le_bytes());
    }
    out
}

/// ADC value → millivolts via `(adc − baseline) / gain`.
pub fn to_physical(adc: i32, gain: f64, baseline: i32) -> Result<f64> {
    if gain == 0.0 {
        return Err(Error::InvalidHeader(
            "signal gain is zero; cannot convert to physical units".into(),
        ));
    }
    Ok((adc - baseline) as f64 / gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_known_212_triplets() {
        // 0x01, 0x00, 0x02 -> samples 1 and 2
        assert_eq!(decode_212_flat(&[0x01, 0x00, 0x02], 2).unwrap(), vec![1, 2]);
        // all-ones low sample is -1; second sample 0
        assert_eq!(
            decode_212_flat(&[0xFF, 0x0F, 0x00], 2).unwrap(),
            vec![-1, 0]
        );
        // low nibble of the middle byte extends the first sample,
        // high nibble the second
        assert_eq!(
            decode_212_flat(&[0x00, 0x08, 0x00], 2).unwrap(),
            vec![-2048, 0]
        );
        assert_eq!(
            decode_212_flat(&[0x00, 0x80, 0x00], 2).unwrap(),
            vec![0, -2048]
        );
        // extremes
        assert_eq!(
            decode_212_flat(&[0xFF, 0x77, 0xFF], 2).unwrap(),
            vec![2047, 2047]
        );
    }

    #[test]
    fn odd_sample_count_uses_two_trailing_bytes() {
        assert_eq!(decode_212_flat(&[0x2A, 0x00], 1).unwrap(), vec![42]);
        let e = decode_212_flat(&[0x2A], 1).unwrap_err();
        assert!(matches!(
            e,
            crate::Error::TruncatedSignal {
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn truncation_is_reported_with_sizes() {
        let e = decode_212(&[0u8; 10], 2, 4).unwrap_err();
        match e {
            crate::Error::TruncatedSignal { expected, found } => {
                assert_eq!(expected, 12);
                assert_eq!(found, 10);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn frames_deinterleave_across_signals() {
        // two signals, three frames: s0=1,3,5  s1=2,4,6
        let bytes = encode_212(&[1, 2, 3, 4, 5, 6]);
        let m = decode_212(&bytes, 2, 3).unwrap();
        assert_eq!(m[0], vec![1, 3, 5]);
        assert_eq!(m[1], vec![2, 4, 6]);
    }

    #[test]
    fn format_16_round_trip_and_sign() {
        let flat = vec![0, 1, -1, 32767, -32768, 1234];
        let bytes = encode_16(&flat);
        let m = decode_16(&bytes, 2, 3).unwrap();
        assert_eq!(m[0], vec![0, -1, -32768]);
        assert_eq!(m[1], vec![1, 32767, 1234]);
    }

    #[test]
    fn physical_conversion_and_zero_gain() {
        assert_eq!(to_physical(300, 200.0, 100).unwrap(), 1.0);
        assert!(to_physical(1, 0.0, 0).is_err());
        assert_eq!(to_physical(-1224, 1000.0, -1024).unwrap(), -0.2);
    }

    proptest! {
        /// Any 12-bit sample stream survives encode → decode unchanged.
        #[test]
        fn prop_212_value_round_trip(samples in proptest::collection::vec(-2048i32..=2047, 0..200)) {
            let bytes = encode_212(&samples);
            let back = decode_212_flat(&bytes, samples.len()).unwrap();
            prop_assert_eq!(back, samples);
        }

        /// Even-length payloads also survive decode → encode byte-for-byte.
        #[test]
        fn prop_212_byte_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..100)) {
            let bytes = &bytes[..bytes.len() / 3 * 3];
            let n = bytes.len() / 3 * 2;
            let vals = decode_212_flat(bytes, n).unwrap();
            prop_assert_eq!(encode_212(&vals), bytes);
        }

        #[test]
        fn prop_16_round_trip(samples in proptest::collection::vec(-32768i32..=32767, 0..200)) {
            let bytes = encode_16(&samples);
            if !samples.is_empty() {
                let m = decode_16(&bytes, 1, samples.len()).unwrap();
                prop_assert_eq!(&m[0], &samples);
            }
        }
    }
}
