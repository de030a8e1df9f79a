//! Thresholding, run merging, median filtering and segmentation of score timelines.

use crate::error::{Error, Result};
use crate::model::{overlap, Event, ScoreTimeline};
use crate::scalar::Scalar;

/// Maximal runs of consecutive frames with `score > tau`, as inclusive frame ranges.
pub fn positive_runs<T: Scalar>(column: &[T], tau: T) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &s) in column.iter().enumerate() {
        match (s > tau, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                runs.push((a, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        runs.push((a, column.len() - 1));
    }
    runs
}

/// Detected events of `class` at threshold `tau`, sorted by onset and non-overlapping.
pub fn detect_events<T: Scalar>(timeline: &ScoreTimeline<T>, class: &str, tau: T) -> Result<Vec<Event<T>>> {
    let column = timeline.column(class)?;
    let ts = timeline.timestamps();
    Ok(positive_runs(column, tau)
        .into_iter()
        .map(|(a, b)| Event { onset: ts[a], offset: ts[b + 1], label: class.to_string() })
        .collect())
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 {
        return Err(Error::NonPositiveWidth);
    }
    if width.is_multiple_of(2) {
        return Err(Error::EvenWidth(width));
    }
    Ok(())
}

/// Centered sliding median of one sequence with replicate padding.
pub fn median_filter_column<T: Scalar>(values: &[T], width: usize) -> Result<Vec<T>> {
    check_width(width)?;
    let half = width / 2;
    let n = values.len();
    if n == 0 || width == 1 {
        return Ok(values.to_vec());
    }
    let mut window = Vec::with_capacity(width);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        window.clear();
        for j in 0..width {
            let idx = (i + j).saturating_sub(half).min(n - 1);
            window.push(values[idx]);
        }
        let (_, median, _) = window.select_nth_unstable_by(half, |a, b| a.total_cmp_scalar(b));
        out.push(*median);
    }
    Ok(out)
}

/// Median-filters every class column independently; timestamps are unchanged.
pub fn median_filter<T: Scalar>(timeline: &ScoreTimeline<T>, width_frames: usize) -> Result<ScoreTimeline<T>> {
    check_width(width_frames)?;
    let columns =
        timeline.columns().iter().map(|c| median_filter_column(c, width_frames)).collect::<Result<Vec<_>>>()?;
    Ok(timeline.with_columns(columns))
}

/// Splits `[0, duration)` into segments of `segment_length` (last one possibly short) and
/// returns, per class column, `(max overlapping frame score, has overlapping ground truth)`.
pub fn segmentize<T: Scalar>(
    timeline: &ScoreTimeline<T>,
    ground_truth: &[Event<T>],
    segment_length: T,
    duration: T,
) -> Result<Vec<Vec<(T, bool)>>> {
    if !(segment_length > T::zero()) {
        return Err(Error::NonPositiveSegmentLength);
    }
    let ts = timeline.timestamps();
    let mut bounds = Vec::new();
    let mut k = 0usize;
    loop {
        let start = crate::scalar::count::<T>(k) * segment_length;
        if start >= duration {
            break;
        }
        let end = (crate::scalar::count::<T>(k + 1) * segment_length).min(duration);
        bounds.push((start, end));
        k += 1;
    }

    let mut out = Vec::with_capacity(timeline.class_names().len());
    for (class, column) in timeline.class_names().iter().zip(timeline.columns()) {
        let mut segs = Vec::with_capacity(bounds.len());
        for &(start, end) in &bounds {
            // frames i with ts[i] < end and ts[i + 1] > start
            let first = ts[1..].partition_point(|&t| t <= start);
            let last = ts[..ts.len() - 1].partition_point(|&t| t < end);
            let score = column
                .get(first..last.max(first))
                .and_then(|w| w.iter().copied().reduce(T::max))
                .unwrap_or_else(T::zero);
            let target =
                ground_truth.iter().any(|e| &e.label == class && overlap(e.onset, e.offset, start, end) > T::zero());
            segs.push((score, target));
        }
        out.push(segs);
    }
    Ok(out)
}
