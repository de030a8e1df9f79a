use super::sweep::Sweep;
use super::DeltaRecord;
use crate::error::Result;
use crate::model::{overlap, ratio_passes, sort_events, Event, IntersectionParams, ScoreTimeline};
use crate::scalar::Scalar;

/// Ground-truth intervals of one class in canonical order, with a running
/// maximum of offsets so that overlap queries can skip a sorted prefix.
struct GtIndex<T> {
    spans: Vec<(T, T)>,
    max_offset: Vec<T>,
}

impl<T: Scalar> GtIndex<T> {
    fn new(events: &[Event<T>], class: &str) -> Self {
        let mut events: Vec<Event<T>> = events.iter().filter(|e| e.label == class).cloned().collect();
        sort_events(&mut events);
        let spans: Vec<(T, T)> = events.iter().map(|e| (e.onset, e.offset)).collect();
        let mut max_offset = Vec::with_capacity(spans.len());
        let mut running = T::neg_infinity();
        for &(_, off) in &spans {
            running = running.max(off);
            max_offset.push(running);
        }
        Self { spans, max_offset }
    }

    /// Indices of events with positive overlap with `[on, off)`, ascending.
    fn overlapping(&self, on: T, off: T) -> impl Iterator<Item = usize> + '_ {
        let lo = self.max_offset.partition_point(|&m| m <= on);
        let hi = self.spans.partition_point(|&(s, _)| s < off);
        (lo..hi.max(lo)).filter(move |&i| self.spans[i].1 > on)
    }

    /// Summed intersection of `[on, off)` with all events, in canonical order.
    fn intersection(&self, on: T, off: T) -> T {
        self.overlapping(on, off).fold(T::zero(), |acc, i| acc + overlap(on, off, self.spans[i].0, self.spans[i].1))
    }
}

#[derive(Clone, Default)]
struct DetStatus {
    relevant: bool,
    cross_triggers: Vec<usize>,
}

/// Intersection-based deltas (TP, FP and per-other-class cross-triggers) for one clip and class.
///
/// `ground_truth` holds the clip's events of every class. Cross-trigger deltas
/// are aligned with the timeline's class names with `class` removed.
pub fn intersection_deltas<T: Scalar>(
    timeline: &ScoreTimeline<T>,
    ground_truth: &[Event<T>],
    class: &str,
    params: &IntersectionParams<T>,
) -> Result<Vec<DeltaRecord<T>>> {
    let column = timeline.column(class)?;
    let ts = timeline.timestamps();
    let frame_onsets = &ts[..ts.len() - 1];
    let target = GtIndex::new(ground_truth, class);
    let others: Vec<GtIndex<T>> =
        timeline.class_names().iter().filter(|c| c.as_str() != class).map(|c| GtIndex::new(ground_truth, c)).collect();

    let mut sweep = Sweep::new(column);
    let mut status: Vec<DetStatus> = Vec::with_capacity(column.len());
    let mut gt_tp = vec![false; target.spans.len()];
    let mut records = Vec::new();
    let mut affected = Vec::new();

    while let Some(change) = sweep.next_group() {
        status.resize(sweep.num_ids(), DetStatus::default());
        let mut d_fp = 0i64;
        let mut d_ct = vec![0i64; others.len()];
        affected.clear();

        for &id in &change.removed {
            let st = &status[id as usize];
            if st.relevant {
                let (s, e) = sweep.span(id);
                affected.extend(target.overlapping(ts[s], ts[e + 1]));
            } else {
                d_fp -= 1;
                for &c in &st.cross_triggers {
                    d_ct[c] -= 1;
                }
            }
        }
        for &id in &change.added {
            let (s, e) = sweep.span(id);
            let (on, off) = (ts[s], ts[e + 1]);
            let len = off - on;
            let relevant = ratio_passes(target.intersection(on, off), len, params.rho_dtc);
            let mut cross_triggers = Vec::new();
            if relevant {
                affected.extend(target.overlapping(on, off));
            } else {
                d_fp += 1;
                for (c, other) in others.iter().enumerate() {
                    if ratio_passes(other.intersection(on, off), len, params.rho_cttc) {
                        cross_triggers.push(c);
                        d_ct[c] += 1;
                    }
                }
            }
            status[id as usize] = DetStatus { relevant, cross_triggers };
        }

        affected.sort_unstable();
        affected.dedup();
        let mut d_tp = 0i64;
        for &j in &affected {
            let (g_on, g_off) = target.spans[j];
            let first = frame_onsets[1..].partition_point(|&t| t <= g_on);
            let last = frame_onsets.partition_point(|&t| t < g_off);
            let covered = sweep
                .covering(first..last.max(first))
                .filter(|&(_, _, id)| status[id as usize].relevant)
                .fold(T::zero(), |acc, (s, e, _)| acc + overlap(ts[s], ts[e + 1], g_on, g_off));
            let tp = ratio_passes(covered, g_off - g_on, params.rho_gtc);
            d_tp += tp as i64 - gt_tp[j] as i64;
            gt_tp[j] = tp;
        }

        records.push(DeltaRecord { score: change.score, d_tp, d_fp, d_ct });
    }
    Ok(records)
}
