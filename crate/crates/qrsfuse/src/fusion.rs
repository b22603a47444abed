//! Multi-lead decision fusion.
//!
//! Each lead contributes a strictly increasing stream of detected beat
//! locations. Per cardiac cycle the current per-lead candidates are sorted,
//! the prefix within δ of the earliest (α₁) and the suffix within δ of the
//! latest (α₂) are compared, and disagreement is repaired one entry at a
//! time: when the early window is the minority its earliest candidate is a
//! false positive and that lead advances; otherwise the latest candidate is
//! deferred to the next cycle (deferral is recoverable, so even splits also
//! defer). An agreed group of at least `min_leads` candidates emits its
//! median as the fused beat.

use crate::single_lead::LeadDetections;
use crate::{Error, Result};
use serde_json::json;
use std::fmt;

/// Tunables for fusion.
#[derive(Debug, Clone)]
pub struct FusionConfig {
    /// Agreement window, the clinical QRS time span (80–100 ms).
    pub delta_ms: f64,
    /// Smallest concordant group that may emit a beat.
    pub min_leads: usize,
    /// Slack, in samples, when comparing window elements for identity.
    pub tie_epsilon: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            delta_ms: 90.0,
            min_leads: 6,
            tie_epsilon: 0,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(80.0..=100.0).contains(&self.delta_ms) {
            return Err(Error::Config(format!(
                "delta_ms {} outside the physiological range [80, 100]",
                self.delta_ms
            )));
        }
        if self.min_leads == 0 {
            return Err(Error::Config("min_leads must be at least 1".into()));
        }
        Ok(())
    }
}

/// How a candidate left the pipeline without contributing to a fused beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardReason {
    /// Judged spurious as the early outlier of a repair; its lead advanced.
    FalsePositiveSkipped,
    /// Late outlier set aside for the next cycle; its lead did not advance.
    DeferredToNext,
    /// Member of an agreed group too small to emit.
    BelowMinLeads,
    /// Agreed group whose median would not advance past the previous beat.
    NonMonotone,
    /// Still pending when too few live leads remained.
    RecordEnd,
}

impl DiscardReason {
    fn as_str(self) -> &'static str {
        match self {
            DiscardReason::FalsePositiveSkipped => "false_positive_skipped",
            DiscardReason::DeferredToNext => "deferred_to_next",
            DiscardReason::BelowMinLeads => "below_min_leads",
            DiscardReason::NonMonotone => "non_monotone",
            DiscardReason::RecordEnd => "record_end",
        }
    }
}

/// One logged discard event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discard {
    pub lead: usize,
    pub location: usize,
    pub reason: DiscardReason,
}

/// Repair history of an emitted beat.
///
/// `FullAgreement` and `ReducedAgreement` are clean cycles (the latter with
/// fewer leads than the record offers); the others name which repairs ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionCase {
    FullAgreement,
    ReducedAgreement,
    EarlySkipped,
    LateDeferred,
    Mixed,
}

impl fmt::Display for FusionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FusionCase::FullAgreement => "1",
            FusionCase::ReducedAgreement => "2",
            FusionCase::EarlySkipped => "4i",
            FusionCase::LateDeferred => "4ii",
            FusionCase::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

/// One fused beat with its provenance.
#[derive(Debug, Clone)]
pub struct FusedBeat {
    pub location: usize,
    pub case: FusionCase,
    /// (lead, location) of every agreeing candidate.
    pub contributors: Vec<(usize, usize)>,
    /// Repair events of the cycle that produced this beat.
    pub discarded: Vec<Discard>,
}

/// Fusion output for one record.
#[derive(Debug, Clone)]
pub struct FusedBeats {
    pub fs: f64,
    pub beats: Vec<FusedBeat>,
    /// Discards not attached to any emitted beat: sub-`min_leads` groups,
    /// repairs from cycles that emitted nothing, and candidates left over
    /// when the record ended.
    pub unemitted: Vec<Discard>,
}

impl FusedBeats {
    pub fn locations(&self) -> Vec<usize> {
        self.beats.iter().map(|b| b.location).collect()
    }

    pub fn to_json(&self, record: &str) -> serde_json::Value {
        let beats: Vec<_> = self
            .beats
            .iter()
            .map(|b| {
                json!({
                    "sample": b.location,
                    "time_s": b.location as f64 / self.fs,
                    "case": b.case.to_string(),
                    "leads": b.contributors.iter().map(|&(l, _)| l).collect::<Vec<_>>(),
                    "discarded": b.discarded.iter().map(|d| {
                        json!({"lead": d.lead, "sample": d.location, "reason": d.reason.as_str()})
                    }).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "record": record, "fs": self.fs, "beats": beats })
    }
}

// --- windows ------------------------------------------------------------------

/// The sorted candidate vector of one cycle with its agreement windows:
/// `alpha1` entries lie within [qrs_min, qrs_min+δ], `alpha2` within
/// [qrs_max−δ, qrs_max]; both bounds closed.
#[derive(Debug, Clone)]
pub struct Windows {
    /// (lead, location) ascending by location, ties by lead.
    pub entries: Vec<(usize, usize)>,
    pub qrs_min: usize,
    pub qrs_max: usize,
    /// Length of the α₁ prefix.
    pub alpha1_len: usize,
    /// Start index of the α₂ suffix.
    pub alpha2_start: usize,
}

impl Windows {
    pub fn alpha1(&self) -> &[(usize, usize)] {
        &self.entries[..self.alpha1_len]
    }
    pub fn alpha2(&self) -> &[(usize, usize)] {
        &self.entries[self.alpha2_start..]
    }
}

/// Sorts the candidates and marks the α windows.
pub fn build_windows(candidates: &[(usize, usize)], delta_samples: usize) -> Result<Windows> {
    if candidates.is_empty() {
        return Err(Error::Fusion("no candidates to window".into()));
    }
    let mut entries = candidates.to_vec();
    entries.sort_by_key(|&(lead, loc)| (loc, lead));
    let qrs_min = entries[0].1;
    let qrs_max = entries[entries.len() - 1].1;
    let alpha1_len = entries
        .iter()
        .take_while(|&&(_, loc)| loc <= qrs_min + delta_samples)
        .count();
    let alpha2_start = entries
        .iter()
        .position(|&(_, loc)| loc >= qrs_max.saturating_sub(delta_samples))
        .expect("qrs_max is always in its own window");
    Ok(Windows {
        entries,
        qrs_min,
        qrs_max,
        alpha1_len,
        alpha2_start,
    })
}

/// Relation between the two agreement windows of a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Windows identical and every lead of the record is represented.
    AbsolutelyIdentical,
    /// Windows identical over a reduced vector.
    Identical,
    /// Same cardinality, different elements: both repairs apply.
    EquivalentNotIdentical,
    /// Different cardinality: one repair applies.
    NeitherEquivalentNorIdentical,
}

/// Compares α₁ and α₂ element-wise (locations only, within `tie_epsilon`).
pub fn classify(w: &Windows, l_active: usize, tie_epsilon: usize) -> Classification {
    let a1 = w.alpha1();
    let a2 = w.alpha2();
    if a1.len() == a2.len() {
        let same = a1
            .iter()
            .zip(a2)
            .all(|(&(_, x), &(_, y))| x.abs_diff(y) <= tie_epsilon);
        if same {
            if a1.len() == l_active {
                Classification::AbsolutelyIdentical
            } else {
                Classification::Identical
            }
        } else {
            Classification::EquivalentNotIdentical
        }
    } else {
        Classification::NeitherEquivalentNorIdentical
    }
}

/// Median of an ascending agreed group: the middle element for odd
/// cardinality, the half-up-rounded mean of the middle two for even.
pub fn median_locate(agreed: &[usize]) -> Result<usize> {
    match agreed.len() {
        0 => Err(Error::Fusion("median of an empty group".into())),
        k if k % 2 == 1 => Ok(agreed[k / 2]),
        k => Ok((agreed[k / 2 - 1] + agreed[k / 2] + 1) / 2),
    }
}

// --- fusion loop ---------------------------------------------------------------

struct LeadState<'a> {
    lead: usize,
    locs: &'a [usize],
    cursor: usize,
}

impl LeadState<'_> {
    fn candidate(&self) -> Option<usize> {
        self.locs.get(self.cursor).copied()
    }
}

/// Fuses per-lead detection streams into one beat sequence.
///
/// Cycle loop: candidates of all live leads are windowed and classified;
/// repairs run until the windows agree or fewer than `min_leads` candidates
/// remain. An agreed group of K ≥ `min_leads` emits its median and those
/// leads advance; smaller groups are discarded (cursors advance, nothing
/// emitted). Deferred candidates re-enter the next cycle unchanged. The
/// record ends when fewer than `min_leads` leads still hold candidates.
pub fn fuse_record(
    all_leads: &[LeadDetections],
    fs: f64,
    cfg: &FusionConfig,
) -> Result<FusedBeats> {
    cfg.validate()?;
    if !(fs > 0.0) {
        return Err(Error::Config("sampling rate must be positive".into()));
    }
    let delta = (cfg.delta_ms * fs / 1000.0).round() as usize;
    if delta == 0 {
        return Err(Error::Config(format!(
            "sampling rate {fs} Hz makes the {} ms agreement window shorter than one sample",
            cfg.delta_ms
        )));
    }

    let mut seen = std::collections::HashSet::new();
    for ld in all_leads {
        if !seen.insert(ld.lead) {
            return Err(Error::Fusion(format!("duplicate lead index {}", ld.lead)));
        }
        if ld.locations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Fusion(format!(
                "lead {} locations are not strictly increasing",
                ld.lead
            )));
        }
    }

    let l_active = all_leads.iter().filter(|l| !l.locations.is_empty()).count();
    if l_active < cfg.min_leads {
        return Err(Error::Fusion(format!(
            "{l_active} leads with detections, need at least {}",
            cfg.min_leads
        )));
    }

    let mut states: Vec<LeadState> = all_leads
        .iter()
        .map(|l| LeadState {
            lead: l.lead,
            locs: &l.locations,
            cursor: 0,
        })
        .collect();
    states.sort_by_key(|s| s.lead);

    let mut beats: Vec<FusedBeat> = Vec::new();
    let mut unemitted: Vec<Discard> = Vec::new();
    let mut last_emitted: Option<usize> = None;

    loop {
        let live: Vec<usize> = states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.candidate().is_some())
            .map(|(i, _)| i)
            .collect();
        if live.len() < cfg.min_leads {
            for i in live {
                let s = &states[i];
                for &loc in &s.locs[s.cursor..] {
                    unemitted.push(Discard {
                        lead: s.lead,
                        location: loc,
                        reason: DiscardReason::RecordEnd,
                    });
                }
            }
            break;
        }

        // one cycle
        let mut working: Vec<(usize, usize)> = live
            .iter()
            .map(|&i| (states[i].lead, states[i].candidate().unwrap()))
            .collect();
        working.sort_by_key(|&(lead, loc)| (loc, lead));
        let mut cycle_discards: Vec<Discard> = Vec::new();
        let mut any_skip = false;
        let mut any_defer = false;
        // every repair consumes a detection or shrinks the working set, so
        // this many steps is impossible without a bug
        let budget = live
            .iter()
            .map(|&i| states[i].locs.len() - states[i].cursor)
            .sum::<usize>()
            + states.len()
            + 8;
        let mut steps = 0usize;

        let state_of = |states: &mut Vec<LeadState>, lead: usize| -> usize {
            states
                .iter()
                .position(|s| s.lead == lead)
                .expect("working entries always reference a known lead")
        };

        let agreed: Option<Vec<(usize, usize)>> = loop {
            if working.len() < cfg.min_leads {
                break None;
            }
            let w = build_windows(&working, delta)?;
            working = w.entries.clone();
            match classify(&w, l_active, cfg.tie_epsilon) {
                Classification::AbsolutelyIdentical | Classification::Identical => {
                    break Some(working.clone());
                }
                _ => {
                    steps += 1;
                    assert!(
                        steps <= budget,
                        "repair loop exceeded its progress bound (bug)"
                    );
                    if w.alpha1().len() < w.alpha2().len() {
                        // early minority: the earliest candidate is spurious;
                        // its lead advances and may rejoin this cycle
                        let (lead, loc) = working.remove(0);
                        any_skip = true;
                        cycle_discards.push(Discard {
                            lead,
                            location: loc,
                            reason: DiscardReason::FalsePositiveSkipped,
                        });
                        let si = state_of(&mut states, lead);
                        states[si].cursor += 1;
                        if let Some(next) = states[si].candidate() {
                            working.push((lead, next));
                            working.sort_by_key(|&(lead, loc)| (loc, lead));
                        }
                        // an exhausted lead simply stays retired
                    } else {
                        // late minority — or an even split, where deferral is
                        // the recoverable choice: a deferred beat returns next
                        // cycle, a skipped one is gone. The early side gets
                        // re-examined once the windows are recomputed.
                        let (lead, loc) = working.pop().expect("nonempty while disagreeing");
                        any_defer = true;
                        cycle_discards.push(Discard {
                            lead,
                            location: loc,
                            reason: DiscardReason::DeferredToNext,
                        });
                    }
                }
            }
        };

        match agreed {
            Some(group) => {
                let locs: Vec<usize> = group.iter().map(|&(_, loc)| loc).collect();
                let med = median_locate(&locs)?;
                let monotone = last_emitted.is_none_or(|prev| med > prev);
                for &(lead, _) in &group {
                    let si = state_of(&mut states, lead);
                    states[si].cursor += 1;
                }
                if monotone {
                    let case = match (any_skip, any_defer) {
                        (false, false) if group.len() == l_active => FusionCase::FullAgreement,
                        (false, false) => FusionCase::ReducedAgreement,
                        (true, false) => FusionCase::EarlySkipped,
                        (false, true) => FusionCase::LateDeferred,
                        (true, true) => FusionCase::Mixed,
                    };
                    last_emitted = Some(med);
                    beats.push(FusedBeat {
                        location: med,
                        case,
                        contributors: group,
                        discarded: cycle_discards,
                    });
                } else {
                    // an agreed group that would move time backwards is
                    // dropped whole; emitted locations stay strictly
                    // increasing
                    unemitted.extend(cycle_discards);
                    for (lead, loc) in group {
                        unemitted.push(Discard {
                            lead,
                            location: loc,
                            reason: DiscardReason::NonMonotone,
                        });
                    }
                }
            }
            None => {
                // agreement never formed: consume what is left of the cycle
                unemitted.extend(cycle_discards);
                for (lead, loc) in working {
                    let si = state_of(&mut states, lead);
                    states[si].cursor += 1;
                    unemitted.push(Discard {
                        lead,
                        location: loc,
                        reason: DiscardReason::BelowMinLeads,
                    });
                }
            }
        }
    }

    Ok(FusedBeats {
        fs,
        beats,
        unemitted,
    })
}
