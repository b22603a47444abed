//! End-to-end runs: synthesize → write WFDB files → read back → per-lead
//! detection → multi-lead fusion → beat-by-beat scoring.

use qrsfuse::evaluation::{bxb_match, default_tolerance_samples};
use qrsfuse::fusion::{fuse_record, FusionConfig};
use qrsfuse::single_lead::{detect_record, DetectorConfig};
use qrsfuse::synth::{corrupt_all, generate_record, generate_truth, write_record, SynthSpec};
use qrsfuse::wfdb::{read_annotations, read_record};

#[test]
fn clean_record_through_files_scores_perfectly() {
    let spec = SynthSpec {
        duration_s: 60.0,
        noise_rms: 0.02,
        seed: 2024,
        ..SynthSpec::default()
    };
    let (rec, truth) = generate_record(&spec, "e2e01").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let base = write_record(&rec, &truth, dir.path()).unwrap();

    let record = read_record(&base).unwrap();
    let reference: Vec<usize> = read_annotations(&base.with_extension("atr"))
        .unwrap()
        .iter()
        .map(|a| a.sample)
        .collect();
    assert_eq!(reference, truth);

    let leads = detect_record(&record.signals, record.fs(), &DetectorConfig::default()).unwrap();
    let fused = fuse_record(&leads, record.fs(), &FusionConfig::default()).unwrap();
    let m = bxb_match(
        &reference,
        &fused.locations(),
        default_tolerance_samples(record.fs()),
    );
    assert_eq!(m.missed(), 0, "missed: {:?}", m.unmatched_ref);
    assert_eq!(m.false_pos(), 0, "spurious: {:?}", m.unmatched_det);
    assert!(m.tp() >= 60, "a minute of 0.8 s beats");
    // every emitted beat should sit close to its annotation, well inside
    // the scoring tolerance
    let worst = m
        .errors_ms(record.fs())
        .into_iter()
        .fold(0.0f64, |a, e| a.max(e.abs()));
    assert!(worst <= 40.0, "worst localization {worst} ms");
}

#[test]
fn tall_t_waves_leave_the_pipeline_clean() {
    // Tall T waves are the classic false-alarm source for beat detectors.
    // The subband decomposition and noise-floor tracking should keep every
    // lead honest, and anything that still slips through must die in fusion.
    let spec = SynthSpec {
        duration_s: 60.0,
        t_wave_amplitude: 0.9,
        noise_rms: 0.03,
        seed: 6,
        ..SynthSpec::default()
    };
    let (rec, truth) = generate_record(&spec, "tallt").unwrap();
    let leads = detect_record(&rec.signals, spec.fs, &DetectorConfig::default()).unwrap();

    let tol = default_tolerance_samples(spec.fs);
    for (i, l) in leads.iter().enumerate() {
        let m = bxb_match(&truth, &l.locations, tol);
        assert_eq!(m.missed(), 0, "lead {i} masked by T waves");
    }

    let fused = fuse_record(&leads, spec.fs, &FusionConfig::default()).unwrap();
    let m = bxb_match(&truth, &fused.locations(), tol);
    assert_eq!(m.missed(), 0, "missed: {:?}", m.unmatched_ref);
    assert_eq!(m.false_pos(), 0, "spurious: {:?}", m.unmatched_det);
}

#[test]
fn corrupted_detection_streams_fuse_back_to_the_truth() {
    // ~1000 beats with spurious detections on up to 4 leads per interval
    // and ±10 ms jitter: fusion must reproduce the truth exactly.
    let spec = SynthSpec {
        duration_s: 810.0,
        fp_rate: 0.1,
        detection_jitter_ms: 10.0,
        seed: 31,
        ..SynthSpec::default()
    };
    let truth = generate_truth(&spec);
    assert!(truth.len() >= 1000);
    let corrupted = corrupt_all(&truth, &spec).unwrap();
    let injected: usize = corrupted.logs.iter().map(|l| l.injected.len()).sum();
    assert!(injected > 200, "rate 0.1 over 12 leads must inject plenty");

    let fused = fuse_record(&corrupted.leads, spec.fs, &FusionConfig::default()).unwrap();
    let m = bxb_match(
        &truth,
        &fused.locations(),
        default_tolerance_samples(spec.fs),
    );
    assert_eq!(m.missed(), 0);
    assert_eq!(m.false_pos(), 0);
    let worst = m
        .errors_ms(spec.fs)
        .into_iter()
        .fold(0.0f64, |a, e| a.max(e.abs()));
    assert!(worst <= 10.0 + 1000.0 / spec.fs, "median of ±10 ms jitter");
}
