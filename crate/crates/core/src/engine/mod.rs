//! Joint computation of intermediate statistics for all thresholds.
//!
//! For every clip and class the engine emits one [`DeltaRecord`] per distinct
//! score: the signed change of the TP/FP/CT counts when the decision threshold
//! falls below that score. Summing the records of all clips in descending
//! score order yields a [`StatisticsCurve`] valid for every threshold.

mod collar;
mod intersection;
mod sweep;

use rayon::prelude::*;

pub use collar::collar_deltas;
pub use intersection::intersection_deltas;

use crate::detection::segmentize;
use crate::error::{Error, Result};
use crate::model::{CollarParams, CurveTotals, Dataset, IntersectionParams, StatisticsCurve};
use crate::scalar::Scalar;

/// Change of the intermediate statistics when the threshold drops below `score`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRecord<T> {
    pub score: T,
    pub d_tp: i64,
    pub d_fp: i64,
    /// Per other class; empty outside intersection mode.
    pub d_ct: Vec<i64>,
}

/// Single-instance deltas: one record per distinct score, counting positive and
/// negative targets at that score.
pub fn segment_deltas<T: Scalar>(pairs: &[(T, bool)]) -> Vec<DeltaRecord<T>> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp_scalar(&a.0));
    let mut out: Vec<DeltaRecord<T>> = Vec::new();
    for (score, target) in sorted {
        match out.last_mut() {
            Some(last) if last.score == score => {}
            _ => out.push(DeltaRecord { score, d_tp: 0, d_fp: 0, d_ct: Vec::new() }),
        }
        let last = out.last_mut().expect("just pushed");
        if target {
            last.d_tp += 1;
        } else {
            last.d_fp += 1;
        }
    }
    out
}

/// Merges per-clip deltas of one class into a cumulative curve.
///
/// Records with equal scores (within or across clips) are aggregated into one row.
pub fn accumulate<T: Scalar>(
    class_name: &str,
    other_classes: Vec<String>,
    deltas: Vec<Vec<DeltaRecord<T>>>,
    totals: CurveTotals<T>,
) -> Result<StatisticsCurve<T>> {
    let mut all: Vec<DeltaRecord<T>> = deltas.into_iter().flatten().collect();
    all.sort_by(|a, b| b.score.total_cmp_scalar(&a.score));

    let n_other = other_classes.len();
    let mut thresholds = Vec::new();
    let mut n_tp = vec![0usize];
    let mut n_fp = vec![0usize];
    let mut n_ct: Vec<Vec<usize>> = vec![vec![0]; n_other];
    let (mut tp, mut fp) = (0i64, 0i64);
    let mut ct = vec![0i64; n_other];

    let mut i = 0;
    while i < all.len() {
        let score = all[i].score;
        while i < all.len() && all[i].score == score {
            let r = &all[i];
            tp += r.d_tp;
            fp += r.d_fp;
            for (c, d) in r.d_ct.iter().enumerate() {
                if c >= n_other {
                    return Err(Error::InvalidParameter(format!(
                        "cross-trigger delta for {} other classes, expected {n_other}",
                        r.d_ct.len()
                    )));
                }
                ct[c] += d;
            }
            i += 1;
        }
        if tp < 0 || fp < 0 || ct.iter().any(|&c| c < 0) {
            return Err(Error::NegativeCumulativeCount { class: class_name.to_string(), score: score.as_f64() });
        }
        thresholds.push(score);
        n_tp.push(tp as usize);
        n_fp.push(fp as usize);
        for (column, &c) in n_ct.iter_mut().zip(&ct) {
            column.push(c as usize);
        }
    }
    Ok(StatisticsCurve { class_name: class_name.to_string(), thresholds, n_tp, n_fp, other_classes, n_ct, totals })
}

fn other_classes<T: Scalar>(dataset: &Dataset<T>, class: &str) -> Vec<String> {
    dataset.class_names().iter().filter(|c| c.as_str() != class).cloned().collect()
}

/// Collar-based statistics curve of every class, in dataset class order.
///
/// Runs on the current rayon pool; the result does not depend on its size.
pub fn collar_curves<T: Scalar>(dataset: &Dataset<T>, params: &CollarParams<T>) -> Result<Vec<StatisticsCurve<T>>> {
    dataset
        .class_names()
        .par_iter()
        .map(|class| {
            let deltas = dataset
                .clips()
                .par_iter()
                .map(|(_, clip)| collar_deltas(&clip.timeline, &clip.ground_truth, class, params))
                .collect::<Result<Vec<_>>>()?;
            let totals = CurveTotals {
                n_gp: dataset.ground_truth_count(class),
                n_gn: None,
                total_duration: dataset.total_duration(),
                other_class_durations: Vec::new(),
            };
            accumulate(class, Vec::new(), deltas, totals)
        })
        .collect()
}

/// Intersection-based statistics curve (with cross-triggers) of every class.
pub fn intersection_curves<T: Scalar>(
    dataset: &Dataset<T>,
    params: &IntersectionParams<T>,
) -> Result<Vec<StatisticsCurve<T>>> {
    dataset
        .class_names()
        .par_iter()
        .map(|class| {
            let deltas = dataset
                .clips()
                .par_iter()
                .map(|(_, clip)| intersection_deltas(&clip.timeline, &clip.ground_truth, class, params))
                .collect::<Result<Vec<_>>>()?;
            let others = other_classes(dataset, class);
            let totals = CurveTotals {
                n_gp: dataset.ground_truth_count(class),
                n_gn: None,
                total_duration: dataset.total_duration(),
                other_class_durations: others.iter().map(|c| dataset.ground_truth_duration(c)).collect(),
            };
            accumulate(class, others, deltas, totals)
        })
        .collect()
}

/// Segment-based statistics curve of every class.
pub fn segment_curves<T: Scalar>(dataset: &Dataset<T>, segment_length: T) -> Result<Vec<StatisticsCurve<T>>> {
    let per_clip = dataset
        .clips()
        .par_iter()
        .map(|(_, clip)| segmentize(&clip.timeline, &clip.ground_truth, segment_length, clip.duration))
        .collect::<Result<Vec<_>>>()?;
    dataset
        .class_names()
        .iter()
        .enumerate()
        .map(|(k, class)| {
            let deltas: Vec<_> = per_clip.iter().map(|segs| segment_deltas(&segs[k])).collect();
            let n_gp = per_clip.iter().map(|segs| segs[k].iter().filter(|s| s.1).count()).sum();
            let n_gn = per_clip.iter().map(|segs| segs[k].iter().filter(|s| !s.1).count()).sum();
            let totals = CurveTotals {
                n_gp,
                n_gn: Some(n_gn),
                total_duration: dataset.total_duration(),
                other_class_durations: Vec::new(),
            };
            accumulate(class, Vec::new(), deltas, totals)
        })
        .collect()
}
