//! Brute-force evaluation at explicit thresholds.
//!
//! Every threshold is evaluated from scratch: detections are built with
//! [`detect_events`] and counted by the literal matching rules. Nothing here
//! shares code with the sweep in [`crate::engine`].

use rayon::prelude::*;

use crate::detection::{detect_events, segmentize};
use crate::error::{Error, Result};
use crate::metrics::{effective_fpr, psd_roc, ClassRoc, PsdRoc};
use crate::model::{overlap, ratio_passes, CollarParams, CurveTotals, Dataset, Event, IntersectionParams, PsdsParams};
use crate::scalar::{count, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode<T> {
    Collar(CollarParams<T>),
    Intersection(IntersectionParams<T>),
    Segment { segment_length: T },
}

/// Intermediate statistics at one threshold.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    /// Cross-triggers per other class, in dataset class order with the evaluated class removed.
    pub ct: Vec<usize>,
}

fn sum_overlap<'a, T: Scalar>(on: T, off: T, events: impl Iterator<Item = &'a Event<T>>) -> T {
    events.fold(T::zero(), |acc, g| acc + overlap(on, off, g.onset, g.offset))
}

fn collar_counts<T: Scalar>(detections: &[Event<T>], gt: &[&Event<T>], params: &CollarParams<T>) -> Counts {
    let mut used = vec![false; detections.len()];
    let mut tp = 0;
    for g in gt {
        let hit = detections
            .iter()
            .enumerate()
            .find(|(i, d)| !used[*i] && params.matches(d.onset, d.offset, g.onset, g.offset));
        if let Some((i, _)) = hit {
            used[i] = true;
            tp += 1;
        }
    }
    Counts { tp, fp: detections.len() - tp, ct: Vec::new() }
}

fn intersection_counts<T: Scalar>(
    detections: &[Event<T>],
    clip_gt: &[Event<T>],
    class: &str,
    others: &[String],
    params: &IntersectionParams<T>,
) -> Counts {
    let same = || clip_gt.iter().filter(|g| g.label == class);
    let mut relevant = Vec::new();
    let mut fp = 0;
    let mut ct = vec![0; others.len()];
    for d in detections {
        let len = d.offset - d.onset;
        if ratio_passes(sum_overlap(d.onset, d.offset, same()), len, params.rho_dtc) {
            relevant.push(d);
            continue;
        }
        fp += 1;
        for (c, other) in others.iter().enumerate() {
            let inter = sum_overlap(d.onset, d.offset, clip_gt.iter().filter(|g| &g.label == other));
            if ratio_passes(inter, len, params.rho_cttc) {
                ct[c] += 1;
            }
        }
    }
    let tp = same()
        .filter(|g| {
            let covered = relevant.iter().fold(T::zero(), |acc, d| acc + overlap(d.onset, d.offset, g.onset, g.offset));
            ratio_passes(covered, g.offset - g.onset, params.rho_gtc)
        })
        .count();
    Counts { tp, fp, ct }
}

/// Counts for `class` at threshold `tau` (rule: `score > tau`).
pub fn evaluate_at_threshold<T: Scalar>(
    dataset: &Dataset<T>,
    class: &str,
    tau: T,
    mode: &EvalMode<T>,
) -> Result<Counts> {
    dataset.class_index(class)?;
    let others: Vec<String> = dataset.class_names().iter().filter(|c| c.as_str() != class).cloned().collect();
    let mut total = Counts {
        ct: vec![0; if matches!(mode, EvalMode::Intersection(_)) { others.len() } else { 0 }],
        ..Default::default()
    };
    for clip in dataset.clips().values() {
        let counts = match mode {
            EvalMode::Collar(p) => {
                let detections = detect_events(&clip.timeline, class, tau)?;
                let gt: Vec<&Event<T>> = clip.events_of(class).collect();
                collar_counts(&detections, &gt, p)
            }
            EvalMode::Intersection(p) => {
                let detections = detect_events(&clip.timeline, class, tau)?;
                intersection_counts(&detections, &clip.ground_truth, class, &others, p)
            }
            EvalMode::Segment { segment_length } => {
                let k = clip.timeline.class_index(class)?;
                let segs = segmentize(&clip.timeline, &clip.ground_truth, *segment_length, clip.duration)?;
                let tp = segs[k].iter().filter(|s| s.0 > tau && s.1).count();
                let fp = segs[k].iter().filter(|s| s.0 > tau && !s.1).count();
                Counts { tp, fp, ct: Vec::new() }
            }
        };
        total.tp += counts.tp;
        total.fp += counts.fp;
        for (acc, c) in total.ct.iter_mut().zip(counts.ct) {
            *acc += c;
        }
    }
    Ok(total)
}

/// PSDS from the operating points of an explicit threshold list only.
pub fn approx_psds<T: Scalar>(
    dataset: &Dataset<T>,
    thresholds: &[T],
    intersection: &IntersectionParams<T>,
    params: &PsdsParams<T>,
) -> Result<(T, PsdRoc<T>)> {
    if thresholds.is_empty() {
        return Err(Error::EmptyThresholdList);
    }
    let mode = EvalMode::Intersection(*intersection);
    let mut rocs = Vec::new();
    for class in dataset.class_names() {
        let n_gp = dataset.ground_truth_count(class);
        if n_gp == 0 {
            log::warn!("class `{class}` has no ground truth and is excluded from the PSD-ROC");
            continue;
        }
        let others: Vec<String> = dataset.class_names().iter().filter(|c| *c != class).cloned().collect();
        let totals = CurveTotals {
            n_gp,
            n_gn: None,
            total_duration: dataset.total_duration(),
            other_class_durations: others.iter().map(|c| dataset.ground_truth_duration(c)).collect(),
        };
        let counts = thresholds
            .par_iter()
            .map(|&tau| evaluate_at_threshold(dataset, class, tau, &mode))
            .collect::<Result<Vec<_>>>()?;
        let mut points = Vec::with_capacity(counts.len());
        for c in counts {
            let efpr = effective_fpr(c.fp, &c.ct, &totals, &others, params)?;
            points.push((efpr, count::<T>(c.tp) / count::<T>(n_gp)));
        }
        rocs.push(ClassRoc::from_points(class.clone(), points));
    }
    let roc = psd_roc(&rocs, params)?;
    Ok((roc.psds, roc))
}

/// `count` thresholds evenly spaced over `[lo, hi]`.
pub fn linear_thresholds<T: Scalar>(count_: usize, lo: T, hi: T) -> Vec<T> {
    match count_ {
        0 => Vec::new(),
        1 => vec![lo],
        n => {
            let step = (hi - lo) / count::<T>(n - 1);
            (0..n).map(|i| lo + step * count::<T>(i)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{validate_dataset, ScoreTimeline};

    fn dataset(ts: Vec<f64>, a: Vec<f64>, gt: Vec<Event<f64>>, duration: f64) -> Dataset<f64> {
        let b = vec![0.0; a.len()];
        let t = ScoreTimeline::new(ts, vec![a, b], vec!["A".into(), "B".into()]).unwrap();
        validate_dataset(
            BTreeMap::from([("c".to_string(), t)]),
            BTreeMap::from([("c".to_string(), gt)]),
            BTreeMap::from([("c".to_string(), duration)]),
        )
        .unwrap()
    }

    fn collar() -> Dataset<f64> {
        dataset(
            (0..=10).map(f64::from).collect(),
            vec![0.3, 0.3, 0.5, 0.6, 0.7, 0.6, 0.4, 0.3, 0.3, 0.2],
            vec![Event::new(2.0, 7.0, "A").unwrap()],
            10.0,
        )
    }

    #[test]
    fn collar_state_between_thresholds() {
        let ds = collar();
        let mode = EvalMode::Collar(CollarParams::new(1.0, 0.2).unwrap());
        let c = evaluate_at_threshold(&ds, "A", 0.55, &mode).unwrap();
        assert_eq!((c.tp, c.fp), (1, 0));
        let c = evaluate_at_threshold(&ds, "A", 1.0, &mode).unwrap();
        assert_eq!((c.tp, c.fp), (0, 0));
    }

    #[test]
    fn intersection_state_between_thresholds() {
        let ds = dataset(
            vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            vec![0.2, 0.55, 0.8, 0.4, 0.1],
            vec![Event::new(4.0, 6.0, "A").unwrap(), Event::new(6.0, 8.0, "B").unwrap()],
            10.0,
        );
        let mode = EvalMode::Intersection(IntersectionParams::new(0.5, 0.5, 0.5).unwrap());
        assert_eq!(evaluate_at_threshold(&ds, "A", 0.3, &mode).unwrap(), Counts { tp: 0, fp: 1, ct: vec![0] });
        assert_eq!(evaluate_at_threshold(&ds, "A", 1.0, &mode).unwrap(), Counts { tp: 0, fp: 0, ct: vec![0] });
        let seg = EvalMode::Segment { segment_length: 1.0 };
        assert_eq!(evaluate_at_threshold(&ds, "A", 1.0, &seg).unwrap(), Counts::default());
        assert!(matches!(evaluate_at_threshold(&ds, "Z", 1.0, &seg), Err(Error::UnknownClass(_))));
    }

    #[test]
    fn single_threshold_psds() {
        // 1 h clip, 3 of 5 events detected and 10 false detections: TPR 0.6 up to 10 FP/h
        let frames = 360;
        let ts: Vec<f64> = (0..=frames).map(|i| i as f64 * 10.0).collect();
        let mut a = vec![0.0; frames];
        let mut gt = Vec::new();
        for k in 0..5 {
            let f = 10 + 20 * k;
            gt.push(Event::new(ts[f], ts[f + 1], "A").unwrap());
            if k < 3 {
                a[f] = 0.9;
            }
        }
        for k in 0..10 {
            a[200 + 10 * k] = 0.9;
        }
        let ds = dataset(ts, a, gt, 3600.0);
        let i = IntersectionParams::new(0.5, 0.5, 0.5).unwrap();
        let p = PsdsParams::new(0.0, 0.0, 100.0).unwrap();
        let (value, _) = approx_psds(&ds, &[0.5], &i, &p).unwrap();
        assert!((value - 0.54).abs() < 1e-12, "{value}");
        assert_eq!(approx_psds(&ds, &[], &i, &p).unwrap_err(), Error::EmptyThresholdList);
    }

    #[test]
    fn linear_grid() {
        let g: Vec<f64> = linear_thresholds(50, 0.01, 0.99);
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.01);
        assert!((g[49] - 0.99).abs() < 1e-12);
        assert_eq!(linear_thresholds(1, 0.3, 0.9), vec![0.3]);
    }
}
