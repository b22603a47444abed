//! Multi-lead QRS detection for ambulatory ECG.
//!
//! The crate is organized as a pipeline:
//!
//! - [`wfdb`] — read PhysioNet-style records (`.hea` headers, format 212/16
//!   signal files, MIT annotation files) into physical-unit sample matrices.
//! - [`wavelet`] — Daubechies-6 DWT with time-aligned per-band reconstruction.
//! - [`single_lead`] — the per-lead detector: d4+d5 subband energy, an
//!   averaging-comb lowpass, a Hilbert-transform nonlinearity, and an adaptive
//!   threshold with search-back.
//! - [`fusion`] — combines the per-lead detection streams into one beat train
//!   by window agreement over a candidate vector, repairing disagreements by
//!   skipping early outliers and deferring late ones.
//! - [`evaluation`] — beat-by-beat matching against reference annotations and
//!   sensitivity / positive-predictivity reporting.
//! - [`synth`] — deterministic synthetic records and corrupted detection
//!   streams for testing, writable as WFDB format-16 files.

pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod single_lead;
pub mod synth;
pub mod wavelet;
pub mod wfdb;

pub use error::{Error, Result};
