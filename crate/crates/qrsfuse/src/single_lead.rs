//! Single-lead QRS detection.
//!
//! Chain: db6 decomposition → d4+d5 reconstruction → averaging-comb lowpass →
//! Hilbert-transform magnitude → adaptive threshold with search-back →
//! fiducial refinement on the raw signal.

use crate::wavelet::{self, Band};
use crate::{Error, Result};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::collections::VecDeque;

/// Tunables for the per-lead detector. Defaults are the values the pipeline
/// was validated with.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Decomposition depth; must cover the deepest requested band.
    pub levels: usize,
    /// Subbands summed to form the detection signal.
    pub bands: Vec<Band>,
    /// Dead time after an accepted peak.
    pub refractory_ms: f64,
    /// Window used to seed the peak-height estimate.
    pub init_window_s: f64,
    /// Threshold as a fraction of the running peak estimate.
    pub threshold_fraction: f64,
    /// Exponential memory of the peak estimate (weight of the old value).
    pub peak_memory: f64,
    /// A gap longer than this multiple of the mean RR triggers search-back.
    pub searchback_factor: f64,
    /// Search-back re-scans with the threshold scaled by this fraction.
    pub searchback_fraction: f64,
    /// Half-width of the fiducial refinement window on the raw signal.
    pub refine_window_ms: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            levels: 5,
            bands: vec![Band::Detail(4), Band::Detail(5)],
            refractory_ms: 200.0,
            init_window_s: 2.0,
            threshold_fraction: 0.4,
            peak_memory: 0.875,
            searchback_factor: 1.66,
            searchback_fraction: 0.5,
            refine_window_ms: 40.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::Config("levels must be >= 1".into()));
        }
        if self.bands.is_empty() {
            return Err(Error::Config("at least one band is required".into()));
        }
        for b in &self.bands {
            if let Band::Detail(j) = b {
                if *j == 0 || *j > self.levels {
                    return Err(Error::Config(format!(
                        "band {b} outside decomposition depth {}",
                        self.levels
                    )));
                }
            }
        }
        if !(self.refractory_ms > 0.0) {
            return Err(Error::Config("refractory_ms must be positive".into()));
        }
        if !(self.init_window_s > 0.0) {
            return Err(Error::Config("init_window_s must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold_fraction) || self.threshold_fraction == 0.0 {
            return Err(Error::Config("threshold_fraction must be in (0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.peak_memory) {
            return Err(Error::Config("peak_memory must be in [0, 1)".into()));
        }
        if !(self.searchback_factor > 1.0) {
            return Err(Error::Config("searchback_factor must exceed 1".into()));
        }
        if !(0.0..=1.0).contains(&self.searchback_fraction) {
            return Err(Error::Config(
                "searchback_fraction must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Detections of one lead: strictly increasing sample indices, consecutive
/// locations at least one refractory period apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadDetections {
    pub lead: usize,
    pub locations: Vec<usize>,
}

// --- lowpass ----------------------------------------------------------------

/// Impulse response of the averaging-comb lowpass: a 7-wide moving average of
/// a positive arm minus the same arm delayed by 2 and a smaller arm delayed
/// by 4, scaled by 1/8. Nonzero taps sit at lags 1..=11; the DC gain is
/// −0.9625.
fn comb_taps() -> [f64; 12] {
    let mut t = [0.0; 12];
    for n0 in 1..=7 {
        t[n0] += 12.0 / 5.0;
        t[n0 + 2] -= 12.0 / 5.0;
        t[n0 + 4] -= 11.0 / 10.0;
    }
    for v in &mut t {
        *v /= 8.0;
    }
    t
}

/// Causal FIR lowpass over the subband signal; samples before the record are
/// taken as zero.
pub fn comb_lowpass(x: &[f64]) -> Vec<f64> {
    let taps = comb_taps();
    let mut out = vec![0.0; x.len()];
    for (n, out_n) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &t) in taps.iter().enumerate().skip(1) {
            if k > n {
                break;
            }
            acc += t * x[n - k];
        }
        *out_n = acc;
    }
    out
}

// --- Hilbert stage ----------------------------------------------------------

/// FFT block length for long records.
const HILBERT_BLOCK: usize = 1 << 20;

/// Discrete Hilbert transform via the analytic-signal frequency method:
/// keep DC and Nyquist, double positive frequencies, zero negative ones;
/// the transform is the imaginary part of the result.
fn hilbert_fft(x: &[f64], planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, b) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // DC and (for even n) Nyquist stay
        } else if k < half || (n % 2 == 1 && k == half) {
            *b *= 2.0;
        } else {
            *b = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.im * scale).collect()
}

/// Hilbert transform computed in blocks, with `overlap` samples of context on
/// each side of every block; the context halves are discarded. Exact single
/// FFT when the record fits one block.
fn hilbert_blocked(x: &[f64], block: usize, overlap: usize) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::new();
    if n <= block {
        return hilbert_fft(x, &mut planner);
    }
    let core = block - 2 * overlap;
    assert!(core > 0, "block must exceed twice the overlap");
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let end = (start + core).min(n);
        let w_lo = start.saturating_sub(overlap);
        let w_hi = (end + overlap).min(n);
        let h = hilbert_fft(&x[w_lo..w_hi], &mut planner);
        out[start..end].copy_from_slice(&h[start - w_lo..end - w_lo]);
        start = end;
    }
    out
}

/// The detector's nonlinearity: `v²/|v|`, i.e. the magnitude with 0 mapped
/// to 0.
fn nonlinear(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v / v.abs()
    }
}

/// Nonlinearly transformed Hilbert output: `|H(x)|`, the detection envelope.
///
/// `fs` sets the one-second block overlap used for long records.
pub fn hilbert_envelope(x: &[f64], fs: f64) -> Vec<f64> {
    let overlap = (fs.round() as usize).max(1);
    hilbert_blocked(x, HILBERT_BLOCK, overlap)
        .into_iter()
        .map(nonlinear)
        .collect()
}

/// Instantaneous amplitude `|x + i·H(x)|` from the same analytic-signal
/// machinery; unity for a unit sinusoid.
pub fn analytic_envelope(x: &[f64], fs: f64) -> Vec<f64> {
    let overlap = (fs.round() as usize).max(1);
    let h = hilbert_blocked(x, HILBERT_BLOCK, overlap);
    x.iter().zip(h).map(|(&r, im)| r.hypot(im)).collect()
}

// --- adaptive threshold -------------------------------------------------------

fn round_samples(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round() as usize
}

/// True for a local maximum at interior index `i` (plateaus credit their
/// first sample).
fn is_local_max(s: &[f64], i: usize) -> bool {
    i > 0 && i + 1 < s.len() && s[i] > s[i - 1] && s[i] >= s[i + 1]
}

/// Largest qualifying local maximum in `lo..=hi` above `floor`; ties go to
/// the earliest index.
fn best_peak_in(s: &[f64], lo: usize, hi: usize, floor: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut i = lo.max(1);
    while i <= hi && i + 1 < s.len() {
        if is_local_max(s, i) && s[i] > floor && best.is_none_or(|b| s[i] > s[b]) {
            best = Some(i);
        }
        i += 1;
    }
    best
}

/// Peak picking over the envelope: threshold between running noise- and
/// signal-peak estimates, refractory blanking, and search-back over gaps
/// longer than `searchback_factor` mean RR intervals (one recovered peak per
/// gap, found with the threshold halved).
///
/// The signal estimate seeds from the first `init_window_s` seconds and decays
/// with `peak_memory`; local maxima that stay under the threshold feed a noise
/// estimate that keeps the threshold floored above the noise floor (otherwise
/// every marginal acceptance lowers the bar for the next, and the threshold
/// ratchets down into the noise on long records). With no sub-threshold
/// activity the noise estimate stays 0 and the threshold is exactly
/// `threshold_fraction` × signal estimate. Everything is relative to signal
/// scale, so detections are invariant to positive rescaling of the envelope.
pub fn adaptive_threshold(env: &[f64], fs: f64, cfg: &DetectorConfig) -> Vec<usize> {
    let n = env.len();
    if n < 3 {
        return Vec::new();
    }
    let refractory = round_samples(cfg.refractory_ms, fs).max(1);
    let init_n = ((cfg.init_window_s * fs).round() as usize).clamp(1, n);
    let mut signal_est = env[..init_n].iter().copied().fold(0.0, f64::max);
    let mut noise_est = 0.0;
    let threshold = |s: f64, nz: f64| -> f64 { nz + cfg.threshold_fraction * (s - nz) };

    let mut peaks: Vec<usize> = Vec::new();
    let mut rr: VecDeque<usize> = VecDeque::with_capacity(8);
    let mean_rr = |rr: &VecDeque<usize>| -> Option<f64> {
        (!rr.is_empty()).then(|| rr.iter().sum::<usize>() as f64 / rr.len() as f64)
    };

    // accept() duplicated inline because closures can't borrow all the state
    macro_rules! accept {
        ($idx:expr) => {{
            let idx = $idx;
            if let Some(&last) = peaks.last() {
                if rr.len() == 8 {
                    rr.pop_front();
                }
                rr.push_back(idx - last);
            }
            signal_est = (1.0 - cfg.peak_memory) * env[idx] + cfg.peak_memory * signal_est;
            peaks.push(idx);
        }};
    }

    for i in 1..n - 1 {
        if !is_local_max(env, i) {
            continue;
        }
        if env[i] <= threshold(signal_est, noise_est) {
            noise_est = (1.0 - cfg.peak_memory) * env[i] + cfg.peak_memory * noise_est;
            continue;
        }
        if let Some(&last) = peaks.last() {
            if i - last < refractory {
                continue;
            }
            // a long silent gap means a beat was probably missed: re-scan it
            // with a lowered threshold before accepting the current peak
            if let Some(mrr) = mean_rr(&rr) {
                if (i - last) as f64 > cfg.searchback_factor * mrr {
                    let lo = last + refractory;
                    let hi = i.saturating_sub(refractory);
                    let floor = cfg.searchback_fraction * threshold(signal_est, noise_est);
                    if lo <= hi {
                        if let Some(q) = best_peak_in(env, lo, hi, floor) {
                            accept!(q);
                        }
                    }
                }
            }
        }
        accept!(i);
    }

    // the record may end inside a gap; search back once more (no state to
    // update after this, so a plain push suffices)
    if let (Some(&last), Some(mrr)) = (peaks.last(), mean_rr(&rr)) {
        if (n - 1 - last) as f64 > cfg.searchback_factor * mrr {
            let lo = last + refractory;
            let floor = cfg.searchback_fraction * threshold(signal_est, noise_est);
            if lo + 1 < n {
                if let Some(q) = best_peak_in(env, lo, n - 2, floor) {
                    peaks.push(q);
                }
            }
        }
    }

    peaks
}

// --- full per-lead chain ------------------------------------------------------

/// Moves each detection to the largest-magnitude raw-signal sample within
/// ±`window` samples (ties to the earliest), then drops any location that
/// lands within the refractory period of its predecessor so the output
/// invariant survives refinement.
fn refine_fiducials(
    raw: &[f64],
    locations: &[usize],
    window: usize,
    refractory: usize,
) -> Vec<usize> {
    let n = raw.len();
    let mut out: Vec<usize> = Vec::with_capacity(locations.len());
    for &loc in locations {
        let lo = loc.saturating_sub(window);
        let hi = (loc + window).min(n - 1);
        let mut best = lo;
        for i in lo..=hi {
            if raw[i].abs() > raw[best].abs() {
                best = i;
            }
        }
        match out.last() {
            Some(&prev) if best <= prev || best - prev < refractory => {}
            _ => out.push(best),
        }
    }
    out
}

/// Runs the whole single-lead chain on one raw trace (physical units).
pub fn detect_lead(
    signal: &[f64],
    fs: f64,
    lead: usize,
    cfg: &DetectorConfig,
) -> Result<LeadDetections> {
    cfg.validate()?;
    if !(fs > 0.0) {
        return Err(Error::Config("sampling rate must be positive".into()));
    }
    let min_len = (cfg.init_window_s * fs).round() as usize;
    if signal.len() < min_len.max(3) {
        return Err(Error::Config(format!(
            "signal of {} samples is shorter than the {} sample initialization window",
            signal.len(),
            min_len
        )));
    }
    let dec = wavelet::dwt_decompose(signal, cfg.levels)?;
    let subband = dec.reconstruct_sum(&cfg.bands)?;
    let smoothed = comb_lowpass(&subband);
    let env = hilbert_envelope(&smoothed, fs);
    let raw_peaks = adaptive_threshold(&env, fs, cfg);
    let window = round_samples(cfg.refine_window_ms, fs);
    let refractory = round_samples(cfg.refractory_ms, fs).max(1);
    let locations = refine_fiducials(signal, &raw_peaks, window, refractory);
    Ok(LeadDetections { lead, locations })
}

/// Detects every lead of a record, leads in parallel.
pub fn detect_record(
    signals: &[Vec<f64>],
    fs: f64,
    cfg: &DetectorConfig,
) -> Result<Vec<LeadDetections>> {
    signals
        .par_iter()
        .enumerate()
        .map(|(lead, trace)| detect_lead(trace, fs, lead, cfg))
        .collect()
}
