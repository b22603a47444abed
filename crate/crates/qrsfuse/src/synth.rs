//! Deterministic synthetic ECG records and detection streams with ground truth.
//!
//! Everything here is a pure function of [`SynthSpec`]. The generator is the
//! oracle for the desk-scale tests: it knows exactly which beats exist, which
//! per-lead detections were dropped or injected, and guarantees that injected
//! false positives never co-occur on enough leads to form a fusion quorum.
//!
//! Randomness comes from one seeded ChaCha8 generator per concern, split by
//! stream id so that each lead (and each inter-beat interval) can be
//! regenerated independently:
//!
//! * stream `0` — ground-truth RR sequence
//! * stream `1 + lead` — additive waveform noise
//! * stream `0x1000 + lead` — per-lead detection corruption (drops, jitter)
//! * stream `(1 << 32) + interval` — false-positive placement for that
//!   inter-beat interval, shared by all leads so the affected-lead cap holds

use crate::single_lead::LeadDetections;
use crate::wfdb::{
    encode_16, encode_annotations, EcgRecord, RecordHeader, SignalSpec, CODE_NORMAL,
};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

const STREAM_TRUTH: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_CORRUPT: u64 = 0x1000;
const STREAM_FP: u64 = 1 << 32;

/// Written into generated headers; reading converts back at the same gain, so
/// quantized samples round-trip bit-exactly.
const ADC_GAIN: f64 = 200.0;

/// Matches the detector's refractory window: injected false positives keep at
/// least this distance from true beats so they stay separable events.
const REFRACTORY_S: f64 = 0.2;

/// Polarity-mixed per-lead scale factors, cycled for records with more leads.
const LEAD_GAINS: [f64; 12] = [
    1.0, 0.8, 1.2, -0.9, 1.1, 0.7, -1.1, 0.95, 1.05, 0.85, -0.75, 1.15,
];

/// Relative T-wave prominence per lead. Tall T waves show up in a minority
/// of leads, never across the whole set at once — an artifact synchronized on
/// every lead would be indistinguishable from a beat, and rightly fused.
const T_RATIOS: [f64; 12] = [
    1.0, 0.2, 0.15, 1.0, 0.25, 0.2, 1.0, 0.15, 0.2, 1.0, 0.25, 0.15,
];

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub fs: f64,
    pub duration_s: f64,
    pub num_leads: usize,
    pub mean_rr_s: f64,
    /// Uniform RR perturbation half-width; gaps never drop below 300 ms.
    pub rr_jitter_s: f64,
    pub qrs_width_ms: f64,
    /// Scales every lead's amplitude pattern.
    pub amplitude_scale: f64,
    /// T-wave height relative to the QRS peak on the most T-prominent leads
    /// (see [`T_RATIOS`] for the per-lead pattern); 0 disables the wave.
    pub t_wave_amplitude: f64,
    pub noise_rms: f64,
    /// Expected spurious detections per lead per beat interval.
    pub fp_rate: f64,
    /// Per-beat probability that a lead misses the beat.
    pub fn_rate: f64,
    pub detection_jitter_ms: f64,
    /// Upper bound on how many leads share one injected false positive.
    pub max_fp_leads: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            fs: 257.0,
            duration_s: 60.0,
            num_leads: 12,
            mean_rr_s: 0.8,
            rr_jitter_s: 0.04,
            qrs_width_ms: 90.0,
            amplitude_scale: 1.0,
            t_wave_amplitude: 0.0,
            noise_rms: 0.0,
            fp_rate: 0.0,
            fn_rate: 0.0,
            detection_jitter_ms: 0.0,
            max_fp_leads: 4,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fs", self.fs),
            ("duration_s", self.duration_s),
            ("mean_rr_s", self.mean_rr_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let rates = [("fp_rate", self.fp_rate), ("fn_rate", self.fn_rate)];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        for (name, v) in [
            ("rr_jitter_s", self.rr_jitter_s),
            ("detection_jitter_ms", self.detection_jitter_ms),
            ("noise_rms", self.noise_rms),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !(80.0..=100.0).contains(&self.qrs_width_ms) {
            return Err(Error::Config(format!(
                "qrs_width_ms must lie in [80, 100], got {}",
                self.qrs_width_ms
            )));
        }
        if self.num_leads == 0 {
            return Err(Error::Config("num_leads must be at least 1".into()));
        }
        if self.max_fp_leads == 0 {
            return Err(Error::Config("max_fp_leads must be at least 1".into()));
        }
        // jittered detections must stay clear of the false-positive margin
        if self.detection_jitter_ms / 1000.0 >= REFRACTORY_S {
            return Err(Error::Config(format!(
                "detection_jitter_ms must stay below {} ms",
                REFRACTORY_S * 1000.0
            )));
        }
        Ok(())
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// Ground-truth beat samples: first beat at 0.5 s, then mean RR ± uniform
/// jitter with a hard 300 ms floor, stopping early enough that the final
/// QRS-plus-T complex still fits inside the record.
pub fn generate_truth(spec: &SynthSpec) -> Vec<usize> {
    let n = (spec.duration_s * spec.fs).round() as usize;
    let mean = (spec.mean_rr_s * spec.fs).round() as i64;
    let jitter = (spec.rr_jitter_s * spec.fs).round() as i64;
    let min_gap = (0.3 * spec.fs).round() as i64;
    let margin = (0.45 * spec.fs).round() as usize;

    let mut rng = spec.stream(STREAM_TRUTH);
    let mut t = (0.5 * spec.fs).round() as i64;
    let mut out = Vec::new();
    while (t as usize) + margin < n {
        out.push(t as usize);
        t += (mean + rng.random_range(-jitter..=jitter)).max(min_gap);
    }
    out
}

/// Box–Muller standard normal; remembers the paired variate.
struct Gauss {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gauss {
    fn new(rng: ChaCha8Rng) -> Self {
        Self { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.random::<f64>(); // (0, 1]: keeps ln finite
        let u2: f64 = self.rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Synthesizes the record and returns it with its ground truth.
///
/// Each beat is a derivative-of-Gaussian QRS (σ = width/6, unit peak before
/// lead scaling) plus an optional Gaussian T wave 300 ms later. Samples are
/// quantized at the header gain so a written-and-reread copy is bit-identical.
pub fn generate_record(spec: &SynthSpec, name: &str) -> Result<(EcgRecord, Vec<usize>)> {
    spec.validate()?;
    let truth = generate_truth(spec);
    if truth.len() < 5 {
        return Err(Error::Config(format!(
            "record too short: only {} beats fit in {} s",
            truth.len(),
            spec.duration_s
        )));
    }

    let n = (spec.duration_s * spec.fs).round() as usize;
    let sigma = spec.qrs_width_ms / 1000.0 * spec.fs / 6.0;
    let qrs_half = (3.0 * sigma).ceil() as i64;
    let t_offset = (0.3 * spec.fs).round() as i64;
    let t_sigma = 0.05 * spec.fs;
    let t_half = (3.0 * t_sigma).ceil() as i64;

    let mut signals = Vec::with_capacity(spec.num_leads);
    for lead in 0..spec.num_leads {
        let gain = spec.amplitude_scale * LEAD_GAINS[lead % LEAD_GAINS.len()];
        let mut trace = vec![0.0f64; n];
        for &beat in &truth {
            let b = beat as i64;
            for k in -qrs_half..=qrs_half {
                let i = b + k;
                if (0..n as i64).contains(&i) {
                    let z = k as f64 / sigma;
                    trace[i as usize] += gain * -z * ((1.0 - z * z) / 2.0).exp();
                }
            }
            if spec.t_wave_amplitude != 0.0 {
                let height = spec.t_wave_amplitude * T_RATIOS[lead % T_RATIOS.len()];
                let c = b + t_offset;
                for k in -t_half..=t_half {
                    let i = c + k;
                    if (0..n as i64).contains(&i) {
                        let z = k as f64 / t_sigma;
                        trace[i as usize] += gain * height * (-z * z / 2.0).exp();
                    }
                }
            }
        }
        if spec.noise_rms > 0.0 {
            let mut gauss = Gauss::new(spec.stream(STREAM_NOISE + lead as u64));
            for v in &mut trace {
                *v += spec.noise_rms * gauss.next();
            }
        }
        // quantize to the ADC grid the writer will use
        for v in &mut trace {
            let adc = (*v * ADC_GAIN).round().clamp(-32768.0, 32767.0);
            *v = adc / ADC_GAIN;
        }
        signals.push(trace);
    }

    let header = RecordHeader {
        name: name.to_string(),
        num_signals: spec.num_leads,
        fs: spec.fs,
        num_samples: n,
        signals: (0..spec.num_leads)
            .map(|i| SignalSpec {
                file_name: format!("{name}.dat"),
                format: 16,
                gain: ADC_GAIN,
                baseline: 0,
                description: format!("lead_{i}"),
            })
            .collect(),
    };
    Ok((EcgRecord { header, signals }, truth))
}

/// One injected false positive: where it lands and which leads see it.
#[derive(Debug, Clone, PartialEq, Eq)]
struct FpEvent {
    sample: usize,
    leads: Vec<usize>,
}

/// False-positive placement, shared by every lead.
///
/// Each inter-beat interval draws its own RNG stream, so any single lead can
/// reproduce the full plan. Events keep a refractory-plus-jitter margin from
/// the surrounding true beats and from each other, and each strikes at most
/// `max_fp_leads` leads — below any sensible fusion quorum.
fn fp_events(truth: &[usize], spec: &SynthSpec) -> Vec<FpEvent> {
    if spec.fp_rate <= 0.0 || truth.len() < 2 {
        return Vec::new();
    }
    let refr = (REFRACTORY_S * spec.fs).round() as usize;
    let jmax = (spec.detection_jitter_ms / 1000.0 * spec.fs).round() as usize;
    let margin = refr + jmax + 1;
    let poisson_floor = (-spec.fp_rate).exp();

    let mut events = Vec::new();
    for (k, pair) in truth.windows(2).enumerate() {
        let (lo, hi) = (pair[0] + margin, pair[1].saturating_sub(margin));
        if lo > hi {
            continue;
        }
        let mut rng = spec.stream(STREAM_FP + k as u64);
        let mut count = 0usize;
        let mut p: f64 = rng.random();
        while p > poisson_floor {
            count += 1;
            p *= rng.random::<f64>();
        }
        let mut samples: Vec<usize> = (0..count).map(|_| rng.random_range(lo..=hi)).collect();
        samples.sort_unstable();
        let mut last: Option<usize> = None;
        for sample in samples {
            // thin bursts so each lead's stream keeps detector-like spacing
            if last.is_some_and(|prev| sample - prev < refr) {
                continue;
            }
            last = Some(sample);
            let m = rng.random_range(1..=spec.max_fp_leads.min(spec.num_leads));
            let mut pool: Vec<usize> = (0..spec.num_leads).collect();
            for i in 0..m {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            let mut leads = pool[..m].to_vec();
            leads.sort_unstable();
            events.push(FpEvent { sample, leads });
        }
    }
    events
}

/// Per-lead corruption bookkeeping: the oracle side of [`corrupt_all`].
#[derive(Debug, Clone, Default)]
pub struct CorruptionLog {
    /// Indices into the truth vector this lead dropped.
    pub dropped: Vec<usize>,
    /// Locations injected into this lead that match no true beat.
    pub injected: Vec<usize>,
}

/// All leads' corrupted streams plus what happened to every detection.
#[derive(Debug, Clone)]
pub struct CorruptedRecord {
    pub leads: Vec<LeadDetections>,
    pub logs: Vec<CorruptionLog>,
}

fn corrupt_one(
    truth: &[usize],
    spec: &SynthSpec,
    lead: usize,
    events: &[FpEvent],
) -> (Vec<usize>, CorruptionLog) {
    let jmax = (spec.detection_jitter_ms / 1000.0 * spec.fs).round() as i64;
    let mut rng = spec.stream(STREAM_CORRUPT + lead as u64);
    let mut log = CorruptionLog::default();
    let mut locations = Vec::with_capacity(truth.len());
    for (idx, &t) in truth.iter().enumerate() {
        if rng.random_bool(spec.fn_rate) {
            log.dropped.push(idx);
            continue;
        }
        locations.push((t as i64 + rng.random_range(-jmax..=jmax)).max(0) as usize);
    }
    for e in events {
        if e.leads.binary_search(&lead).is_ok() {
            log.injected.push(e.sample);
        }
    }
    locations.extend_from_slice(&log.injected);
    locations.sort_unstable();
    debug_assert!(
        locations.windows(2).all(|w| w[0] < w[1]),
        "margins keep corrupted streams strictly increasing"
    );
    (locations, log)
}

/// Corrupts the truth as seen by one lead: Bernoulli beat drops, uniform
/// jitter, and the lead's share of the shared false-positive plan. Output is
/// identical to the matching row of [`corrupt_all`].
pub fn corrupt_detections(
    truth: &[usize],
    spec: &SynthSpec,
    lead: usize,
) -> Result<LeadDetections> {
    spec.validate()?;
    debug_assert!(truth.windows(2).all(|w| w[0] < w[1]));
    let events = fp_events(truth, spec);
    let (locations, _) = corrupt_one(truth, spec, lead, &events);
    Ok(LeadDetections { lead, locations })
}

/// Corrupts all leads at once and reports the bookkeeping.
pub fn corrupt_all(truth: &[usize], spec: &SynthSpec) -> Result<CorruptedRecord> {
    spec.validate()?;
    debug_assert!(truth.windows(2).all(|w| w[0] < w[1]));
    let events = fp_events(truth, spec);
    let mut leads = Vec::with_capacity(spec.num_leads);
    let mut logs = Vec::with_capacity(spec.num_leads);
    for lead in 0..spec.num_leads {
        let (locations, log) = corrupt_one(truth, spec, lead, &events);
        leads.push(LeadDetections { lead, locations });
        logs.push(log);
    }
    Ok(CorruptedRecord { leads, logs })
}

/// Writes `<dir>/<name>.hea`, `.dat` (format 16) and `.atr` (normal-beat
/// annotations at the truth samples). Returns the extensionless base path.
pub fn write_record(record: &EcgRecord, truth: &[usize], dir: &Path) -> Result<PathBuf> {
    let h = &record.header;
    let base = dir.join(&h.name);

    let mut hea = format!(
        "{} {} {} {}\n",
        h.name,
        h.num_signals,
        format_num(h.fs),
        h.num_samples
    );
    for s in &h.signals {
        hea.push_str(&format!(
            "{} {} {}({})/mV 16 0 0 0 0 {}\n",
            s.file_name,
            s.format,
            format_num(s.gain),
            s.baseline,
            s.description
        ));
    }
    std::fs::write(base.with_extension("hea"), hea)?;

    let mut flat = Vec::with_capacity(h.num_samples * h.num_signals);
    for n in 0..h.num_samples {
        for (trace, s) in record.signals.iter().zip(&h.signals) {
            flat.push((trace[n] * s.gain).round() as i32 + s.baseline);
        }
    }
    std::fs::write(base.with_extension("dat"), encode_16(&flat))?;

    let anns: Vec<(usize, u8)> = truth.iter().map(|&s| (s, CODE_NORMAL)).collect();
    std::fs::write(base.with_extension("atr"), encode_annotations(&anns))?;
    Ok(base)
}

fn format_num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::bxb_match;
    use crate::single_lead::{detect_lead, DetectorConfig};
    use crate::wfdb::{read_annotations, read_record};
    use std::collections::BTreeMap;

    #[test]
    fn same_seed_reproduces_the_record_bit_for_bit() {
        let spec = SynthSpec {
            duration_s: 12.0,
            noise_rms: 0.05,
            t_wave_amplitude: 0.3,
            seed: 99,
            ..SynthSpec::default()
        };
        let (a, ta) = generate_record(&spec, "x").unwrap();
        let (b, tb) = generate_record(&spec, "x").unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a.signals, b.signals);
        let other = generate_record(&SynthSpec { seed: 100, ..spec }, "x").unwrap();
        assert_ne!(a.signals, other.0.signals);
    }

    #[test]
    fn truth_gaps_stay_inside_jitter_band_and_above_floor() {
        let spec = SynthSpec {
            duration_s: 120.0,
            rr_jitter_s: 0.3,
            mean_rr_s: 0.5,
            seed: 7,
            ..SynthSpec::default()
        };
        let truth = generate_truth(&spec);
        assert!(truth.len() > 100);
        assert_eq!(truth[0], (0.5 * spec.fs).round() as usize);
        let mean = (spec.mean_rr_s * spec.fs).round() as usize;
        let jit = (spec.rr_jitter_s * spec.fs).round() as usize;
        let floor = (0.3 * spec.fs).round() as usize;
        for w in truth.windows(2) {
            let gap = w[1] - w[0];
            assert!(gap >= floor, "gap {gap} under 300 ms floor");
            assert!(gap >= (mean - jit).max(floor) && gap <= mean + jit);
        }
    }

    #[test]
    fn zero_rate_corruption_is_the_identity() {
        let spec = SynthSpec::default();
        let truth = generate_truth(&spec);
        for lead in 0..spec.num_leads {
            let d = corrupt_detections(&truth, &spec, lead).unwrap();
            assert_eq!(d.locations, truth);
        }
    }

    #[test]
    fn fn_rate_one_drops_everything() {
        let spec = SynthSpec {
            fn_rate: 1.0,
            ..SynthSpec::default()
        };
        let truth = generate_truth(&spec);
        let d = corrupt_detections(&truth, &spec, 3).unwrap();
        assert!(d.locations.is_empty());
    }

    #[test]
    fn standalone_lead_matches_the_joint_corruption() {
        let spec = SynthSpec {
            fp_rate: 0.5,
            fn_rate: 0.1,
            detection_jitter_ms: 12.0,
            seed: 5,
            ..SynthSpec::default()
        };
        let truth = generate_truth(&spec);
        let joint = corrupt_all(&truth, &spec).unwrap();
        for lead in 0..spec.num_leads {
            let solo = corrupt_detections(&truth, &spec, lead).unwrap();
            assert_eq!(solo.locations, joint.leads[lead].locations);
        }
    }

    #[test]
    fn injected_fps_respect_lead_cap_margins_and_bookkeeping() {
        let spec = SynthSpec {
            duration_s: 300.0,
            fp_rate: 0.9,
            fn_rate: 0.2,
            detection_jitter_ms: 10.0,
            seed: 21,
            ..SynthSpec::default()
        };
        let truth = generate_truth(&spec);
        let out = corrupt_all(&truth, &spec).unwrap();

        let refr = (REFRACTORY_S * spec.fs).round() as usize;
        let jmax = (spec.detection_jitter_ms / 1000.0 * spec.fs).round() as i64;
        let mut by_sample: BTreeMap<usize, usize> = BTreeMap::new();
        let mut total_injected = 0usize;
        for (lead, log) in out.logs.iter().enumerate() {
            // stream = kept truth (jittered) ∪ injected, disjointly
            let kept: Vec<usize> = truth
                .iter()
                .enumerate()
                .filter(|(i, _)| !log.dropped.contains(i))
                .map(|(_, &t)| t)
                .collect();
            assert_eq!(
                out.leads[lead].locations.len(),
                kept.len() + log.injected.len()
            );
            assert!(out.leads[lead].locations.windows(2).all(|w| w[0] < w[1]));
            for (&loc, &t) in out.leads[lead]
                .locations
                .iter()
                .filter(|l| !log.injected.contains(l))
                .zip(kept.iter())
            {
                assert!((loc as i64 - t as i64).abs() <= jmax);
            }
            for &fp in &log.injected {
                *by_sample.entry(fp).or_insert(0) += 1;
                let nearest = truth
                    .iter()
                    .map(|&t| (fp as i64 - t as i64).unsigned_abs() as usize)
                    .min()
                    .unwrap();
                assert!(nearest >= refr, "fp {fp} within refractory of a beat");
            }
            total_injected += log.injected.len();
        }
        assert!(total_injected > 100, "rate 0.9 must actually inject");
        assert!(by_sample.values().all(|&n| n <= spec.max_fp_leads));
        let gaps_ok = by_sample
            .keys()
            .zip(by_sample.keys().skip(1))
            .all(|(a, b)| b - a >= refr || b - a == 0);
        assert!(gaps_ok, "distinct fp events keep refractory spacing");
    }

    #[test]
    fn written_record_reads_back_identically() {
        let spec = SynthSpec {
            duration_s: 10.0,
            noise_rms: 0.08,
            t_wave_amplitude: 0.25,
            num_leads: 3,
            seed: 4,
            ..SynthSpec::default()
        };
        let (rec, truth) = generate_record(&spec, "synth01").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let base = write_record(&rec, &truth, dir.path()).unwrap();

        let back = read_record(&base).unwrap();
        assert_eq!(back.header.fs, spec.fs);
        assert_eq!(back.header.num_signals, 3);
        assert_eq!(back.header.num_samples, rec.header.num_samples);
        assert_eq!(back.signals, rec.signals);

        let anns = read_annotations(&base.with_extension("atr")).unwrap();
        let samples: Vec<usize> = anns.iter().map(|a| a.sample).collect();
        assert_eq!(samples, truth);
        assert!(anns.iter().all(|a| a.code == CODE_NORMAL));
    }

    #[test]
    fn every_lead_of_a_clean_record_is_fully_detectable() {
        let spec = SynthSpec {
            duration_s: 30.0,
            seed: 11,
            ..SynthSpec::default()
        };
        let (rec, truth) = generate_record(&spec, "c").unwrap();
        let tol = (0.150 * spec.fs).round() as usize;
        for (lead, trace) in rec.signals.iter().enumerate() {
            let d = detect_lead(trace, spec.fs, lead, &DetectorConfig::default()).unwrap();
            let m = bxb_match(&truth, &d.locations, tol);
            assert!(
                m.unmatched_ref.is_empty() && m.unmatched_det.is_empty(),
                "lead {lead}: {} missed, {} spurious",
                m.unmatched_ref.len(),
                m.unmatched_det.len()
            );
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        for bad in [
            SynthSpec {
                fp_rate: 1.5,
                ..SynthSpec::default()
            },
            SynthSpec {
                fn_rate: -0.1,
                ..SynthSpec::default()
            },
            SynthSpec {
                qrs_width_ms: 40.0,
                ..SynthSpec::default()
            },
            SynthSpec {
                max_fp_leads: 0,
                ..SynthSpec::default()
            },
            SynthSpec {
                duration_s: 0.0,
                ..SynthSpec::default()
            },
            SynthSpec {
                detection_jitter_ms: 300.0,
                ..SynthSpec::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        assert!(SynthSpec::default().validate().is_ok());
    }

    #[test]
    fn too_short_a_record_is_rejected() {
        let spec = SynthSpec {
            duration_s: 2.0,
            ..SynthSpec::default()
        };
        assert!(generate_record(&spec, "x").is_err());
    }
}
