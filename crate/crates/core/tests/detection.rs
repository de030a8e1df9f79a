mod common;

use common::{random_scores, random_timestamps};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sed_curves::detection::{detect_events, median_filter, median_filter_column, positive_runs};
use sed_curves::ScoreTimelineF64;

fn timeline(seed: u64, max_frames: usize) -> ScoreTimelineF64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_frames);
    let ts = random_timestamps(&mut rng, n);
    let columns = vec![random_scores(&mut rng, n), random_scores(&mut rng, n)];
    ScoreTimelineF64::new(ts, columns, vec!["A".into(), "B".into()]).unwrap()
}

fn midpoints(column: &[f64]) -> Vec<f64> {
    let mut v = column.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    let mut out = vec![v[0] + 1.0, v[v.len() - 1] - 1.0];
    out.extend(v.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn median_filter_commutes_with_thresholding(seed in any::<u64>(), w in 0usize..3) {
        let width = [3, 5, 7][w];
        let t = timeline(seed, 80);
        let column = t.column("A").unwrap();
        let filtered = median_filter_column(column, width).unwrap();
        for tau in midpoints(column) {
            let binary: Vec<f64> = column.iter().map(|&s| if s > tau { 1.0 } else { 0.0 }).collect();
            let binary_filtered = median_filter_column(&binary, width).unwrap();
            prop_assert_eq!(positive_runs(&filtered, tau), positive_runs(&binary_filtered, 0.5));
        }
    }

    #[test]
    fn detections_shrink_as_threshold_rises(seed in any::<u64>()) {
        let t = timeline(seed, 60);
        let taus = midpoints(t.column("A").unwrap());
        for pair in taus.windows(2) {
            let (lo, hi) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            let wide = detect_events(&t, "A", lo).unwrap();
            for e in detect_events(&t, "A", hi).unwrap() {
                prop_assert!(wide.iter().any(|w| w.onset <= e.onset && e.offset <= w.offset));
            }
        }
    }

    #[test]
    fn detections_are_disjoint_runs(seed in any::<u64>(), tau in 0.0f64..1.0) {
        let t = timeline(seed, 60);
        let events = detect_events(&t, "B", tau).unwrap();
        prop_assert!(events.windows(2).all(|w| w[0].offset < w[1].onset));
        let column = t.column("B").unwrap();
        for e in &events {
            let ts = t.timestamps();
            let a = ts.iter().position(|&x| x == e.onset).unwrap();
            let b = ts.iter().position(|&x| x == e.offset).unwrap();
            prop_assert!(column[a..b].iter().all(|&s| s > tau));
        }
    }

    #[test]
    fn median_filter_keeps_shape(seed in any::<u64>()) {
        let t = timeline(seed, 40);
        let f = median_filter(&t, 5).unwrap();
        prop_assert_eq!(f.timestamps(), t.timestamps());
        prop_assert_eq!(f.class_names(), t.class_names());
        prop_assert_eq!(median_filter(&t, 1).unwrap(), t);
    }
}
