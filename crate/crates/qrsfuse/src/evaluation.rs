//! Beat-by-beat scoring against reference annotations.
//!
//! Detections and references pair when they lie within a fixed tolerance.
//! The matcher is exact: it splits the merged event stream at gaps wider
//! than the tolerance (no pair can straddle such a gap) and solves each
//! cluster by dynamic programming — maximum pair count, then minimum total
//! |error|, then the lexicographically earliest pairing.

use crate::fusion::{fuse_record, FusionConfig};
use crate::single_lead::LeadDetections;
use crate::Result;
use serde_json::json;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

/// Outcome of matching one detection list against one reference list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// (reference_sample, detection_sample), ascending by reference.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_ref: Vec<usize>,
    pub unmatched_det: Vec<usize>,
}

impl MatchResult {
    pub fn tp(&self) -> usize {
        self.pairs.len()
    }
    /// False negatives.
    pub fn missed(&self) -> usize {
        self.unmatched_ref.len()
    }
    /// False positives.
    pub fn false_pos(&self) -> usize {
        self.unmatched_det.len()
    }
    /// Signed per-pair errors, detection minus reference, in samples.
    pub fn errors_samples(&self) -> Vec<i64> {
        self.pairs
            .iter()
            .map(|&(r, d)| d as i64 - r as i64)
            .collect()
    }
    /// Signed per-pair errors in milliseconds.
    pub fn errors_ms(&self, fs: f64) -> Vec<f64> {
        self.errors_samples()
            .iter()
            .map(|&e| e as f64 * 1000.0 / fs)
            .collect()
    }
}

/// The standard 150 ms matching window converted to samples.
pub fn default_tolerance_samples(fs: f64) -> usize {
    (150.0 * fs / 1000.0).round() as usize
}

fn compatible(r: usize, d: usize, tol: usize) -> bool {
    r.abs_diff(d) <= tol
}

/// Exact matching within one cluster: DP over (refs consumed, dets consumed)
/// choosing, per state, pair > skip-detection > skip-reference on ties of
/// (count, total error). That preference yields the lexicographically
/// smallest pair list, which puts equal-distance ties on the earlier
/// reference.
fn match_cluster(refs: &[usize], dets: &[usize], tol: usize) -> Vec<(usize, usize)> {
    let n = refs.len();
    let m = dets.len();
    // value[i][j] = (pairs, -sum_err) achievable from suffixes i.., j..
    let mut value = vec![vec![(0usize, 0i64); m + 1]; n + 1];
    #[derive(Clone, Copy, PartialEq)]
    enum Choice {
        Pair,
        SkipDet,
        SkipRef,
        Done,
    }
    let mut choice = vec![vec![Choice::Done; m + 1]; n + 1];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            if i == n && j == m {
                continue;
            }
            let mut best = (0usize, i64::MIN);
            let mut pick = Choice::Done;
            // order encodes the tie preference: later assignments win ties,
            // so evaluate in reverse priority
            if i < n {
                let v = value[i + 1][j];
                if v >= best {
                    best = v;
                    pick = Choice::SkipRef;
                }
            }
            if j < m {
                let v = value[i][j + 1];
                if v >= best {
                    best = v;
                    pick = Choice::SkipDet;
                }
            }
            if i < n && j < m && compatible(refs[i], dets[j], tol) {
                let sub = value[i + 1][j + 1];
                let v = (sub.0 + 1, sub.1 - refs[i].abs_diff(dets[j]) as i64);
                if v >= best {
                    best = v;
                    pick = Choice::Pair;
                }
            }
            value[i][j] = best;
            choice[i][j] = pick;
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    loop {
        match choice[i][j] {
            Choice::Pair => {
                pairs.push((refs[i], dets[j]));
                i += 1;
                j += 1;
            }
            Choice::SkipDet => j += 1,
            Choice::SkipRef => i += 1,
            Choice::Done => break,
        }
    }
    pairs
}

/// Matches ascending detection samples against ascending reference samples
/// within ± `tolerance_samples` (closed bound). Unpaired references are
/// false negatives, unpaired detections false positives.
pub fn bxb_match(reference: &[usize], detected: &[usize], tolerance_samples: usize) -> MatchResult {
    debug_assert!(reference.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(detected.windows(2).all(|w| w[0] <= w[1]));

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let (mut i0, mut j0) = (0usize, 0usize); // current cluster start
    let (mut i, mut j) = (0usize, 0usize); // next unconsumed event
    let mut prev: Option<usize> = None;
    while i < reference.len() || j < detected.len() {
        let next = match (reference.get(i), detected.get(j)) {
            (Some(&r), Some(&d)) => r.min(d),
            (Some(&r), None) => r,
            (None, Some(&d)) => d,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            if next - p > tolerance_samples {
                // nothing before this gap can pair with anything after it
                pairs.extend(match_cluster(
                    &reference[i0..i],
                    &detected[j0..j],
                    tolerance_samples,
                ));
                i0 = i;
                j0 = j;
            }
        }
        if reference.get(i) == Some(&next) {
            i += 1;
        } else {
            j += 1;
        }
        prev = Some(next);
    }
    pairs.extend(match_cluster(
        &reference[i0..],
        &detected[j0..],
        tolerance_samples,
    ));

    // pairs ascend on both sides (the DP never crosses), so the unmatched
    // remainder falls out of one merge pass per stream
    let subtract = |all: &[usize], used: &[usize]| {
        let mut out = Vec::with_capacity(all.len() - used.len());
        let mut k = 0;
        for &x in all {
            if k < used.len() && used[k] == x {
                k += 1;
            } else {
                out.push(x);
            }
        }
        out
    };
    let used_ref: Vec<usize> = pairs.iter().map(|&(r, _)| r).collect();
    let used_det: Vec<usize> = pairs.iter().map(|&(_, d)| d).collect();
    MatchResult {
        unmatched_ref: subtract(reference, &used_ref),
        unmatched_det: subtract(detected, &used_det),
        pairs,
    }
}

/// Percentage of reference beats found: 100·TP/(TP+FN); `None` when there
/// are no reference beats.
pub fn sensitivity(tp: usize, fn_count: usize) -> Option<f64> {
    let denom = tp + fn_count;
    (denom > 0).then(|| 100.0 * tp as f64 / denom as f64)
}

/// Percentage of detections that are real: 100·TP/(TP+FP); `None` when
/// there are no detections.
pub fn positive_predictivity(tp: usize, fp_count: usize) -> Option<f64> {
    let denom = tp + fp_count;
    (denom > 0).then(|| 100.0 * tp as f64 / denom as f64)
}

// --- reports ---------------------------------------------------------------------

/// Per-record tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordScore {
    pub record: String,
    pub actual: usize,
    pub tp: usize,
    pub missed: usize,
    pub false_pos: usize,
    pub sum_abs_err_ms: f64,
}

impl RecordScore {
    pub fn from_match(record: &str, m: &MatchResult, fs: f64) -> Self {
        RecordScore {
            record: record.to_string(),
            actual: m.tp() + m.missed(),
            tp: m.tp(),
            missed: m.missed(),
            false_pos: m.false_pos(),
            sum_abs_err_ms: m.errors_ms(fs).iter().map(|e| e.abs()).sum(),
        }
    }
    pub fn se(&self) -> Option<f64> {
        sensitivity(self.tp, self.missed)
    }
    pub fn ppr(&self) -> Option<f64> {
        positive_predictivity(self.tp, self.false_pos)
    }
    pub fn mean_abs_err_ms(&self) -> Option<f64> {
        (self.tp > 0).then(|| self.sum_abs_err_ms / self.tp as f64)
    }
}

/// Multi-record evaluation with an aggregate row.
#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    rows: Vec<RecordScore>,
}

impl EvalReport {
    pub fn new(mut rows: Vec<RecordScore>) -> Self {
        rows.sort_by(|a, b| a.record.cmp(&b.record));
        EvalReport { rows }
    }

    pub fn rows(&self) -> &[RecordScore] {
        &self.rows
    }

    /// Column sums labeled "Total".
    pub fn total(&self) -> RecordScore {
        let mut t = RecordScore {
            record: "Total".to_string(),
            actual: 0,
            tp: 0,
            missed: 0,
            false_pos: 0,
            sum_abs_err_ms: 0.0,
        };
        for r in &self.rows {
            t.actual += r.actual;
            t.tp += r.tp;
            t.missed += r.missed;
            t.false_pos += r.false_pos;
            t.sum_abs_err_ms += r.sum_abs_err_ms;
        }
        t
    }

    fn fmt_opt(v: Option<f64>) -> String {
        v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>8} {:>6} {:>6} {:>8} {:>8} {:>9}",
            "Record", "Actual", "TP", "FN", "FP", "Se(%)", "+Pr(%)", "Err(ms)"
        );
        for r in self.rows.iter().chain(std::iter::once(&self.total())) {
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>8} {:>6} {:>6} {:>8} {:>8} {:>9}",
                r.record,
                r.actual,
                r.tp,
                r.missed,
                r.false_pos,
                Self::fmt_opt(r.se()),
                Self::fmt_opt(r.ppr()),
                Self::fmt_opt(r.mean_abs_err_ms()),
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("record,actual,tp,fn,fp,se,ppr,mean_abs_err_ms\n");
        for r in self.rows.iter().chain(std::iter::once(&self.total())) {
            let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.4}"));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.record,
                r.actual,
                r.tp,
                r.missed,
                r.false_pos,
                opt(r.se()),
                opt(r.ppr()),
                opt(r.mean_abs_err_ms()),
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let row = |r: &RecordScore| {
            json!({
                "record": r.record,
                "actual": r.actual,
                "tp": r.tp,
                "fn": r.missed,
                "fp": r.false_pos,
                "se": r.se(),
                "ppr": r.ppr(),
                "mean_abs_err_ms": r.mean_abs_err_ms(),
            })
        };
        json!({
            "records": self.rows.iter().map(row).collect::<Vec<_>>(),
            "total": row(&self.total()),
        })
    }
}

// --- lead-count sweep ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub min_leads: usize,
    pub se: Option<f64>,
    pub ppr: Option<f64>,
}

/// Re-fuses the same per-lead detections at each `min_leads` value and
/// scores the result, reproducing the quorum-sensitivity experiment.
pub fn lead_count_sweep(
    all_leads: &[LeadDetections],
    fs: f64,
    reference: &[usize],
    base: &FusionConfig,
    tolerance_samples: usize,
    range: RangeInclusive<usize>,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for min_leads in range {
        let cfg = FusionConfig {
            min_leads,
            ..base.clone()
        };
        let fused = fuse_record(all_leads, fs, &cfg)?;
        let m = bxb_match(reference, &fused.locations(), tolerance_samples);
        rows.push(SweepRow {
            min_leads,
            se: sensitivity(m.tp(), m.missed()),
            ppr: positive_predictivity(m.tp(), m.false_pos()),
        });
    }
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("min_leads,se,ppr\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.4}"));
        let _ = writeln!(out, "{},{},{}", r.min_leads, opt(r.se), opt(r.ppr));
    }
    out
}
