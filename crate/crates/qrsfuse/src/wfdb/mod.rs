//! Reading PhysioNet/WFDB-style records.
//!
//! Scope: single-segment records whose signals all live in one `.dat` file
//! with a uniform sample format (212 or 16), which covers both target
//! databases. Samples are exposed in physical units (millivolts) via the
//! per-signal gain/baseline from the header.

mod annotation;
mod header;
mod signal;

pub use annotation::{
    encode_annotations, is_qrs_code, parse_annotations, read_annotations, BeatAnnotation,
    CODE_NORMAL,
};
pub use header::{parse_header, RecordHeader, SignalSpec};
pub use signal::{decode_16, decode_212, encode_16, encode_212, to_physical};

use crate::{Error, Result};
use std::path::Path;

/// A fully decoded record: header plus one physical-unit (mV) trace per signal.
#[derive(Debug, Clone)]
pub struct EcgRecord {
    pub header: RecordHeader,
    /// `signals[s][n]` = sample `n` of signal `s`, in millivolts.
    pub signals: Vec<Vec<f64>>,
}

impl EcgRecord {
    pub fn fs(&self) -> f64 {
        self.header.fs
    }

    pub fn num_samples(&self) -> usize {
        self.header.num_samples
    }
}

/// Reads `<base>.hea` + the signal file it names and converts to physical units.
///
/// `base` may be given with or without the `.hea` extension.
pub fn read_record(base: &Path) -> Result<EcgRecord> {
    let hea_path = if base.extension().is_some_and(|e| e == "hea") {
        base.to_path_buf()
    } else {
        base.with_extension("hea")
    };
    let text = std::fs::read_to_string(&hea_path)?;
    let header = parse_header(&text)?;

    let first = &header.signals[0];
    if header
        .signals
        .iter()
        .any(|s| s.file_name != first.file_name)
    {
        return Err(Error::InvalidHeader(
            "multi-file records are not supported".into(),
        ));
    }
    if header.signals.iter().any(|s| s.format != first.format) {
        return Err(Error::InvalidHeader(
            "mixed signal formats in one file are not supported".into(),
        ));
    }

    let dat_path = hea_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&first.file_name);
    let bytes = std::fs::read(&dat_path)?;

    let digital = match first.format {
        212 => decode_212(&bytes, header.num_signals, header.num_samples)?,
        16 => decode_16(&bytes, header.num_signals, header.num_samples)?,
        other => return Err(Error::UnsupportedFormat(other)),
    };

    let mut signals = Vec::with_capacity(header.num_signals);
    for (spec, adc) in header.signals.iter().zip(digital) {
        let mut trace = Vec::with_capacity(adc.len());
        for v in adc {
            trace.push(to_physical(v, spec.gain, spec.baseline)?);
        }
        signals.push(trace);
    }

    Ok(EcgRecord { header, signals })
}
