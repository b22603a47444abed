//! `qrsfuse` — multi-lead QRS detection from the command line.
//!
//! Subcommands:
//!
//! - `detect` — per-lead detections of one record.
//! - `run`    — full pipeline (detect every lead, fuse) for one record.
//! - `eval`   — run + score against reference annotations, for one record or
//!   a manifest of records; optional Se/+Pr floors for CI gating.
//! - `sweep`  — re-fuse one record at a range of lead quorums and report
//!   sensitivity / positive predictivity per quorum.
//! - `synth`  — write a deterministic synthetic record (WFDB format 16 plus
//!   an annotation file) for testing.
//!
//! Relative record paths resolve against `QRSFUSE_DATA_DIR` when it is set.
//!
//! Exit codes: 0 success, 1 usage (bad flags or configuration), 2 input
//! error (missing or malformed files), 3 quality-gate failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrsfuse::evaluation::{bxb_match, lead_count_sweep, sweep_to_csv, EvalReport, RecordScore};
use qrsfuse::fusion::{fuse_record, FusedBeats, FusionConfig};
use qrsfuse::single_lead::{detect_lead, DetectorConfig, LeadDetections};
use qrsfuse::synth::{generate_record, write_record, SynthSpec};
use qrsfuse::wfdb::{read_annotations, read_record, EcgRecord};
use qrsfuse::{Error, Result};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const DATA_DIR_VAR: &str = "QRSFUSE_DATA_DIR";

#[derive(Parser)]
#[command(
    name = "qrsfuse",
    version,
    about = "Multi-lead ECG QRS detection, fusion and scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect QRS complexes independently in each lead of a record
    Detect(DetectArgs),
    /// Detect in every lead and fuse into a single beat sequence
    Run(RunArgs),
    /// Run the pipeline and score it against reference annotations
    Eval(EvalArgs),
    /// Score one record at every lead quorum in a range
    Sweep(SweepArgs),
    /// Generate a synthetic record with known beat locations
    Synth(SynthArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

/// Detector overrides shared by every signal-consuming subcommand.
#[derive(Args)]
struct DetectorArgs {
    /// Wavelet decomposition depth
    #[arg(long, default_value_t = 5)]
    levels: usize,
    /// Comma-separated subbands summed for detection (d1..dN, a)
    #[arg(long, default_value = "d4,d5")]
    bands: String,
}

impl DetectorArgs {
    fn config(&self) -> Result<DetectorConfig> {
        let bands = self
            .bands
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        let cfg = DetectorConfig {
            levels: self.levels,
            bands,
            ..DetectorConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct FusionArgs {
    /// Leads that must agree before a beat is emitted
    #[arg(long, default_value_t = 6)]
    min_leads: usize,
    /// Agreement window in milliseconds (clinical QRS span)
    #[arg(long, default_value_t = 90.0)]
    delta_ms: f64,
}

impl FusionArgs {
    fn config(&self) -> Result<FusionConfig> {
        let cfg = FusionConfig {
            min_leads: self.min_leads,
            delta_ms: self.delta_ms,
            ..FusionConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Record base path (with or without .hea)
    record: PathBuf,
    /// Lead index to detect (repeatable); default: every lead
    #[arg(long = "lead")]
    leads: Vec<usize>,
    #[command(flatten)]
    detector: DetectorArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Repeat the detection N times and print timing statistics to stderr
    #[arg(long, value_name = "N", num_args = 0..=1, default_missing_value = "5")]
    timing: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// Record base path (with or without .hea)
    record: PathBuf,
    /// Comma-separated subset of leads to use; default: every lead
    #[arg(long, value_delimiter = ',')]
    leads: Option<Vec<usize>>,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    fusion: FusionArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Repeat detection and fusion N times and print timing statistics to stderr
    #[arg(long, value_name = "N", num_args = 0..=1, default_missing_value = "5")]
    timing: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Record base paths
    records: Vec<PathBuf>,
    /// File listing one record base path per line (# comments allowed)
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Reference annotation file extension
    #[arg(long, default_value = "atr")]
    annotation_ext: String,
    /// Match tolerance between detected and reference beats
    #[arg(long, default_value_t = 150.0)]
    tolerance_ms: f64,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    fusion: FusionArgs,
    /// Exit 3 if any record's sensitivity (%) falls below this floor
    #[arg(long)]
    min_se: Option<f64>,
    /// Exit 3 if any record's positive predictivity (%) falls below this floor
    #[arg(long)]
    min_ppr: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    output: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of records processed in parallel; default: one at a time
    /// (leads within a record are always parallel)
    #[arg(long)]
    jobs: Option<usize>,
    /// Repeat each record's detection+fusion N times and print per-record
    /// timing statistics to stderr
    #[arg(long, value_name = "N", num_args = 0..=1, default_missing_value = "5")]
    timing: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Record base path (with or without .hea)
    record: PathBuf,
    /// Reference annotation file extension
    #[arg(long, default_value = "atr")]
    annotation_ext: String,
    /// Match tolerance between detected and reference beats
    #[arg(long, default_value_t = 150.0)]
    tolerance_ms: f64,
    /// Smallest quorum to score
    #[arg(long, default_value_t = 4)]
    from: usize,
    /// Largest quorum to score
    #[arg(long, default_value_t = 11)]
    to: usize,
    /// Agreement window in milliseconds
    #[arg(long, default_value_t = 90.0)]
    delta_ms: f64,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory to write <name>.hea/.dat/.atr into (created if missing)
    dir: PathBuf,
    /// Record name
    #[arg(long, default_value = "synth")]
    name: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampling rate in Hz
    #[arg(long, default_value_t = 257.0)]
    fs: f64,
    /// Number of leads
    #[arg(long, default_value_t = 12)]
    leads: usize,
    #[arg(long, default_value_t = 60.0, conflicts_with = "beats")]
    duration_s: f64,
    /// Target beat count (sets the duration from the mean RR interval)
    #[arg(long)]
    beats: Option<usize>,
    /// Mean RR interval in seconds
    #[arg(long, default_value_t = 0.8)]
    mean_rr_s: f64,
    /// Uniform RR perturbation half-width in seconds
    #[arg(long, default_value_t = 0.04)]
    rr_jitter_s: f64,
    #[arg(long, default_value_t = 90.0)]
    qrs_width_ms: f64,
    /// T-wave height relative to the QRS peak on the most T-prominent leads
    #[arg(long, default_value_t = 0.0)]
    t_wave: f64,
    /// Additive white noise RMS in millivolts
    #[arg(long, default_value_t = 0.0)]
    noise_rms: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too; keep their exit code 0 and
            // remap genuine usage errors from clap's 2 to our 1
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::UnknownBand(_) => 1,
                _ => 2,
            })
        }
    }
}

// --- shared plumbing ---------------------------------------------------------

fn resolve_record(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_VAR) {
        Some(root) => Path::new(&root).join(path),
        None => path.to_path_buf(),
    }
}

fn record_name(base: &Path) -> String {
    base.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| base.display().to_string())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn ms_to_samples(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round() as usize
}

fn timing_runs(requested: Option<usize>) -> Result<Option<usize>> {
    match requested {
        Some(0) => Err(Error::Config("--timing needs at least one run".into())),
        other => Ok(other),
    }
}

/// Runs `f` `runs` times and prints mean/variance/stddev of the wall time.
fn time_stats(label: &str, runs: usize, mut f: impl FnMut()) {
    let times: Vec<f64> = (0..runs)
        .map(|_| {
            let t0 = Instant::now();
            f();
            t0.elapsed().as_secs_f64()
        })
        .collect();
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    eprintln!(
        "{label}: {runs} runs, mean {mean:.6} s, variance {var:.9} s^2, stddev {:.6} s",
        var.sqrt()
    );
}

fn check_leads_in_range(record: &EcgRecord, leads: &[usize]) -> Result<()> {
    let n = record.signals.len();
    for &l in leads {
        if l >= n {
            return Err(Error::Config(format!(
                "lead {l} out of range: record has {n} leads"
            )));
        }
    }
    Ok(())
}

fn check_quorum(min_leads: usize, available: usize) -> Result<()> {
    if min_leads > available {
        return Err(Error::Config(format!(
            "min_leads {min_leads} exceeds the {available} available leads"
        )));
    }
    Ok(())
}

/// Detects the given leads of a record in parallel, keeping original indices.
fn detect_leads(
    record: &EcgRecord,
    leads: &[usize],
    cfg: &DetectorConfig,
) -> Result<Vec<LeadDetections>> {
    leads
        .par_iter()
        .map(|&l| detect_lead(&record.signals[l], record.fs(), l, cfg))
        .collect()
}

fn reference_samples(base: &Path, ext: &str) -> Result<Vec<usize>> {
    let anns = read_annotations(&base.with_extension(ext))?;
    Ok(anns.iter().map(|b| b.sample).collect())
}

// --- detect -------------------------------------------------------------------

fn cmd_detect(a: DetectArgs) -> Result<u8> {
    let timing = timing_runs(a.timing)?;
    let base = resolve_record(&a.record);
    let rec = read_record(&base)?;
    let cfg = a.detector.config()?;
    let chosen: Vec<usize> = if a.leads.is_empty() {
        (0..rec.signals.len()).collect()
    } else {
        a.leads.clone()
    };
    check_leads_in_range(&rec, &chosen)?;

    let dets = detect_leads(&rec, &chosen, &cfg)?;
    if let Some(runs) = timing {
        time_stats("detect", runs, || {
            detect_leads(&rec, &chosen, &cfg).unwrap();
        });
    }

    let fs = rec.fs();
    let text = match a.output {
        Format::Json => {
            let leads: Vec<_> = dets
                .iter()
                .map(|d| serde_json::json!({"lead": d.lead, "samples": d.locations}))
                .collect();
            let v = serde_json::json!({
                "record": record_name(&base),
                "fs": fs,
                "leads": leads,
            });
            format!("{v}\n")
        }
        Format::Csv => {
            let mut s = String::from("lead,sample,time_s\n");
            for d in &dets {
                for &n in &d.locations {
                    let _ = writeln!(s, "{},{},{:.6}", d.lead, n, n as f64 / fs);
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for d in &dets {
                for &n in &d.locations {
                    let _ = writeln!(s, "{} {} {:.6}", d.lead, n, n as f64 / fs);
                }
            }
            s
        }
    };
    emit(&a.out, &text)?;
    Ok(0)
}

// --- run ----------------------------------------------------------------------

fn fused_output(fused: &FusedBeats, record: &str, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", fused.to_json(record)),
        Format::Csv => {
            let mut s = String::from("sample,time_s,case\n");
            for b in &fused.beats {
                let _ = writeln!(
                    s,
                    "{},{:.6},{}",
                    b.location,
                    b.location as f64 / fused.fs,
                    b.case
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for b in &fused.beats {
                let _ = writeln!(
                    s,
                    "{} {:.6} {}",
                    b.location,
                    b.location as f64 / fused.fs,
                    b.case
                );
            }
            s
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<u8> {
    let timing = timing_runs(a.timing)?;
    let base = resolve_record(&a.record);
    let rec = read_record(&base)?;
    let det_cfg = a.detector.config()?;
    let fus_cfg = a.fusion.config()?;
    let chosen: Vec<usize> = match &a.leads {
        Some(subset) => subset.clone(),
        None => (0..rec.signals.len()).collect(),
    };
    check_leads_in_range(&rec, &chosen)?;
    check_quorum(fus_cfg.min_leads, chosen.len())?;

    let dets = detect_leads(&rec, &chosen, &det_cfg)?;
    let fused = fuse_record(&dets, rec.fs(), &fus_cfg)?;
    if let Some(runs) = timing {
        time_stats("detect", runs, || {
            detect_leads(&rec, &chosen, &det_cfg).unwrap();
        });
        time_stats("fuse", runs, || {
            fuse_record(&dets, rec.fs(), &fus_cfg).unwrap();
        });
    }

    emit(&a.out, &fused_output(&fused, &record_name(&base), a.output))?;
    Ok(0)
}

// --- eval ---------------------------------------------------------------------

fn read_manifest(path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(PathBuf::from)
        .collect())
}

fn cmd_eval(a: EvalArgs) -> Result<u8> {
    let timing = timing_runs(a.timing)?;
    let det_cfg = a.detector.config()?;
    let fus_cfg = a.fusion.config()?;
    let mut records = a.records.clone();
    if let Some(m) = &a.manifest {
        records.extend(read_manifest(m)?);
    }

    let eval_one = |path: &PathBuf| -> Result<RecordScore> {
        let base = resolve_record(path);
        let rec = read_record(&base)?;
        let name = record_name(&base);
        let all: Vec<usize> = (0..rec.signals.len()).collect();
        check_quorum(fus_cfg.min_leads, all.len())?;

        let dets = detect_leads(&rec, &all, &det_cfg)?;
        let fused = fuse_record(&dets, rec.fs(), &fus_cfg)?;
        if let Some(runs) = timing {
            time_stats(&name, runs, || {
                let d = detect_leads(&rec, &all, &det_cfg).unwrap();
                fuse_record(&d, rec.fs(), &fus_cfg).unwrap();
            });
        }

        let reference = reference_samples(&base, &a.annotation_ext)?;
        let tol = ms_to_samples(a.tolerance_ms, rec.fs());
        let m = bxb_match(&reference, &fused.locations(), tol);
        Ok(RecordScore::from_match(&name, &m, rec.fs()))
    };

    let rows: Result<Vec<RecordScore>> = match a.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
            pool.install(|| records.par_iter().map(eval_one).collect())
        }
        None => records.iter().map(eval_one).collect(),
    };
    let report = EvalReport::new(rows?);

    let text = match a.output {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    emit(&a.out, &text)?;

    if a.min_se.is_some() || a.min_ppr.is_some() {
        // a record whose metric is undefined (no beats) cannot clear a floor
        let failing: Vec<&str> = report
            .rows()
            .iter()
            .filter(|r| {
                let se_ok = a.min_se.is_none_or(|f| r.se().is_some_and(|v| v >= f));
                let ppr_ok = a.min_ppr.is_none_or(|f| r.ppr().is_some_and(|v| v >= f));
                !(se_ok && ppr_ok)
            })
            .map(|r| r.record.as_str())
            .collect();
        if !failing.is_empty() {
            eprintln!("quality gate failed: {}", failing.join(", "));
            return Ok(3);
        }
    }
    Ok(0)
}

// --- sweep --------------------------------------------------------------------

fn cmd_sweep(a: SweepArgs) -> Result<u8> {
    if a.from == 0 || a.from > a.to {
        return Err(Error::Config(format!(
            "quorum range {}..={} is empty or starts at zero",
            a.from, a.to
        )));
    }
    let base = resolve_record(&a.record);
    let rec = read_record(&base)?;
    check_quorum(a.to, rec.signals.len())?;
    let det_cfg = a.detector.config()?;
    let fus_cfg = FusionConfig {
        delta_ms: a.delta_ms,
        ..FusionConfig::default()
    };
    fus_cfg.validate()?;

    let all: Vec<usize> = (0..rec.signals.len()).collect();
    let dets = detect_leads(&rec, &all, &det_cfg)?;
    let reference = reference_samples(&base, &a.annotation_ext)?;
    let tol = ms_to_samples(a.tolerance_ms, rec.fs());
    let rows = lead_count_sweep(&dets, rec.fs(), &reference, &fus_cfg, tol, a.from..=a.to)?;
    emit(&a.out, &sweep_to_csv(&rows))?;
    Ok(0)
}

// --- synth --------------------------------------------------------------------

fn cmd_synth(a: SynthArgs) -> Result<u8> {
    if a.beats == Some(0) {
        return Err(Error::Config("--beats must be at least 1".into()));
    }
    // first beat at 0.5 s, end margin 0.45 s: this duration targets exactly
    // `beats` beats at the mean RR (jitter can shift the count by one)
    let duration_s = match a.beats {
        Some(n) => 0.5 + (n as f64 - 0.5) * a.mean_rr_s + 0.45,
        None => a.duration_s,
    };
    let spec = SynthSpec {
        fs: a.fs,
        duration_s,
        num_leads: a.leads,
        mean_rr_s: a.mean_rr_s,
        rr_jitter_s: a.rr_jitter_s,
        qrs_width_ms: a.qrs_width_ms,
        t_wave_amplitude: a.t_wave,
        noise_rms: a.noise_rms,
        seed: a.seed,
        ..SynthSpec::default()
    };
    let (rec, truth) = generate_record(&spec, &a.name)?;
    std::fs::create_dir_all(&a.dir)?;
    let base = write_record(&rec, &truth, &a.dir)?;
    println!("{}", base.display());
    Ok(0)
}
