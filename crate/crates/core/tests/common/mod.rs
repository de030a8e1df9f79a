#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use sed_curves::{validate_dataset, DatasetF64, Event, ScoreTimeline, StatisticsCurveF64};

pub const CLASSES: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_clips: usize,
    pub max_frames: usize,
    pub max_events: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_clips: 20, max_frames: 60, max_events: 4 }
    }
}

/// Scores are either quantized to eighths (so ties are frequent, also across
/// clips) or uniform. Frame and event boundaries lie on a 1/8 s grid so every
/// overlap is exact in binary floating point.
pub fn random_scores(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let quantized = rng.gen_bool(0.5);
    (0..n).map(|_| if quantized { f64::from(rng.gen_range(0..=8u32)) / 8.0 } else { rng.gen::<f64>() }).collect()
}

pub fn random_timestamps(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let uniform = rng.gen_bool(0.5);
    let hop = [0.125, 0.25, 0.5, 1.0][rng.gen_range(0..4)];
    let mut ts = vec![0.0];
    for _ in 0..n {
        let step = if uniform { hop } else { [0.125, 0.25, 0.5, 1.0][rng.gen_range(0..4)] };
        ts.push(ts.last().unwrap() + step);
    }
    ts
}

pub fn random_dataset(rng: &mut impl Rng, shape: Shape) -> DatasetF64 {
    let names: Vec<String> = CLASSES.iter().map(|c| c.to_string()).collect();
    let mut scores = BTreeMap::new();
    let mut gt = BTreeMap::new();
    let mut durations = BTreeMap::new();
    for c in 0..rng.gen_range(1..=shape.max_clips) {
        let id = format!("clip{c:02}");
        let n = rng.gen_range(1..=shape.max_frames);
        let ts = random_timestamps(rng, n);
        let end = *ts.last().unwrap();
        let duration = end + f64::from(rng.gen_range(0..3u32)) * 0.5;
        let columns = (0..names.len()).map(|_| random_scores(rng, n)).collect();
        scores.insert(id.clone(), ScoreTimeline::new(ts, columns, names.clone()).unwrap());
        let slots = (duration * 8.0) as u32;
        let events = (0..rng.gen_range(0..=shape.max_events))
            .map(|_| {
                let a = rng.gen_range(0..slots);
                let b = rng.gen_range(a + 1..=slots);
                let label = CLASSES[rng.gen_range(0..CLASSES.len())];
                Event::new(f64::from(a) / 8.0, f64::from(b) / 8.0, label).unwrap()
            })
            .collect();
        gt.insert(id.clone(), events);
        durations.insert(id, duration);
    }
    validate_dataset(scores, gt, durations).unwrap()
}

/// Thresholds that visit every row of `curve`: each change point, each
/// interval midpoint, and values above and below all scores.
pub fn probe_thresholds(curve: &StatisticsCurveF64) -> Vec<f64> {
    let t = &curve.thresholds;
    let mut out = vec![2.0, -1.0];
    out.extend(t.iter().copied());
    out.extend(t.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    out
}

/// Like [`random_dataset`], redrawn until every class has at least one event.
pub fn random_annotated_dataset(rng: &mut impl Rng, shape: Shape) -> DatasetF64 {
    loop {
        let ds = random_dataset(rng, shape);
        if CLASSES.iter().all(|c| ds.ground_truth_count(c) > 0) {
            return ds;
        }
    }
}

/// Every representative threshold of every class curve.
pub fn all_representatives(curves: &[StatisticsCurveF64]) -> Vec<f64> {
    let mut out: Vec<f64> =
        curves.iter().flat_map(|c| sed_curves::metrics::representative_thresholds(&c.thresholds)).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.dedup();
    out
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-6.0 * (x - 0.5)).exp())
}

pub fn piecewise(x: f64) -> f64 {
    if x < 0.3 {
        0.5 * x
    } else if x < 0.8 {
        0.15 + 1.5 * (x - 0.3)
    } else {
        0.9 + 0.25 * (x - 0.8)
    }
}
