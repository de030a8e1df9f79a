use std::collections::HashMap;

use super::sweep::{DetId, Sweep};
use super::DeltaRecord;
use crate::error::Result;
use crate::model::{sort_events, CollarParams, Event, ScoreTimeline};
use crate::scalar::Scalar;

/// Collar-based deltas for one clip and class.
///
/// Ground-truth events are matched one-to-one in canonical onset order, each
/// taking the earliest-onset unmatched detection within both collars. After
/// every tie group only the ground truths whose candidate set changed are
/// re-matched, and re-matching stops once the assignment agrees with the
/// previous one for all remaining events.
pub fn collar_deltas<T: Scalar>(
    timeline: &ScoreTimeline<T>,
    ground_truth: &[Event<T>],
    class: &str,
    params: &CollarParams<T>,
) -> Result<Vec<DeltaRecord<T>>> {
    let column = timeline.column(class)?;
    let ts = timeline.timestamps();
    let frame_onsets = &ts[..ts.len() - 1];

    let mut events: Vec<Event<T>> = ground_truth.iter().filter(|e| e.label == class).cloned().collect();
    sort_events(&mut events);
    let gt: Vec<(T, T)> = events.iter().map(|e| (e.onset, e.offset)).collect();
    let gt_onsets: Vec<T> = gt.iter().map(|g| g.0).collect();

    let d = params.onset_collar;
    let slack = |x: T| (x.abs() + d + T::one()) * T::epsilon() * T::of(8.0);
    // ground truths whose onset lies within the onset collar of `onset`
    let gts_near = |onset: T| {
        let lo = gt_onsets.partition_point(|&g| g < onset - d - slack(onset));
        let hi = gt_onsets.partition_point(|&g| g <= onset + d + slack(onset));
        lo..hi
    };

    let mut sweep = Sweep::new(column);
    let mut gt_match: Vec<Option<DetId>> = vec![None; gt.len()];
    let mut owner: Vec<Option<usize>> = Vec::with_capacity(column.len());
    let mut records = Vec::new();

    while let Some(change) = sweep.next_group() {
        owner.resize(sweep.num_ids(), None);
        let d_det = change.added.len() as i64 - change.removed.len() as i64;

        let mut first = usize::MAX;
        let mut last = 0usize;
        for &id in change.removed.iter().chain(&change.added) {
            let r = gts_near(ts[sweep.span(id).0]);
            if !r.is_empty() {
                first = first.min(r.start);
                last = last.max(r.end - 1);
            }
        }

        let mut d_tp = 0i64;
        if first != usize::MAX {
            let first_new = change.added.iter().copied().min().unwrap_or(DetId::MAX);
            let stable = |id: DetId, sweep: &Sweep<'_, T>| sweep.is_alive(id) && id < first_new;
            let mut diff: HashMap<DetId, i32> = HashMap::new();
            let bump = |diff: &mut HashMap<DetId, i32>, id: DetId, by: i32| {
                let v = diff.entry(id).or_insert(0);
                *v += by;
                if *v == 0 {
                    diff.remove(&id);
                }
            };

            for j in first..gt.len() {
                if j > last && diff.is_empty() {
                    break;
                }
                let old = gt_match[j];
                if let Some(o) = old {
                    if sweep.is_alive(o) && owner[o as usize] == Some(j) {
                        owner[o as usize] = None;
                    }
                }

                let (gt_on, gt_off) = gt[j];
                let lo = frame_onsets.partition_point(|&t| t < gt_on - d - slack(gt_on));
                let hi = frame_onsets.partition_point(|&t| t <= gt_on + d + slack(gt_on));
                let new = sweep
                    .starting_in(lo..hi)
                    .find(|&(s, e, id)| {
                        owner[id as usize].is_none_or(|k| k > j) && params.matches(ts[s], ts[e + 1], gt_on, gt_off)
                    })
                    .map(|(_, _, id)| id);

                if let Some(n) = new {
                    owner[n as usize] = Some(j);
                }
                gt_match[j] = new;
                d_tp += new.is_some() as i64 - old.is_some() as i64;
                if let Some(o) = old.filter(|&o| stable(o, &sweep)) {
                    bump(&mut diff, o, -1);
                }
                if let Some(n) = new.filter(|&n| stable(n, &sweep)) {
                    bump(&mut diff, n, 1);
                }
            }
        }

        records.push(DeltaRecord { score: change.score, d_tp, d_fp: d_det - d_tp, d_ct: Vec::new() });
    }
    Ok(records)
}
