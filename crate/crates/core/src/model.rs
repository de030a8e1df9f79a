//! Domain types shared by the detection primitives, the change-point engine,
//! the brute-force oracle and the metrics layer.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Frame-level classification scores of one clip.
///
/// Frame `i` spans `[timestamps[i], timestamps[i + 1])`. Scores are stored
/// column-major: one vector of `M` values per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTimeline<T> {
    timestamps: Vec<T>,
    columns: Vec<Vec<T>>,
    class_names: Vec<String>,
}

impl<T: Scalar> ScoreTimeline<T> {
    pub fn new(timestamps: Vec<T>, columns: Vec<Vec<T>>, class_names: Vec<String>) -> Result<Self> {
        check_class_names(&class_names)?;
        if columns.len() != class_names.len() {
            return Err(Error::InvalidParameter(format!(
                "{} score columns for {} class names",
                columns.len(),
                class_names.len()
            )));
        }
        if timestamps.len() < 2 {
            return Err(Error::EmptyTimeline);
        }
        let frames = timestamps.len() - 1;
        if timestamps.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFiniteScore { context: "timestamps".into() });
        }
        if timestamps[0] < T::zero() || timestamps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneTimestamps { context: "score timeline".into() });
        }
        for (name, column) in class_names.iter().zip(&columns) {
            if column.len() != frames {
                return Err(Error::InvalidParameter(format!(
                    "class `{name}` has {} scores for {frames} frames",
                    column.len()
                )));
            }
            if let Some(i) = column.iter().position(|s| !s.is_finite()) {
                return Err(Error::NonFiniteScore { context: format!("class `{name}`, frame {i}") });
            }
        }
        Ok(Self { timestamps, columns, class_names })
    }

    /// Builds a timeline from row-major scores (`rows[i][k]` is frame `i`, class `k`).
    pub fn from_rows(timestamps: Vec<T>, rows: &[Vec<T>], class_names: Vec<String>) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(rows.len()); class_names.len()];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != class_names.len() {
                return Err(Error::InvalidParameter(format!(
                    "frame {i} has {} scores for {} classes",
                    row.len(),
                    class_names.len()
                )));
            }
            for (column, &s) in columns.iter_mut().zip(row) {
                column.push(s);
            }
        }
        Self::new(timestamps, columns, class_names)
    }

    pub fn timestamps(&self) -> &[T] {
        &self.timestamps
    }

    pub fn num_frames(&self) -> usize {
        self.timestamps.len() - 1
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_index(&self, class: &str) -> Result<usize> {
        self.class_names.iter().position(|c| c == class).ok_or_else(|| Error::UnknownClass(class.to_string()))
    }

    pub fn column(&self, class: &str) -> Result<&[T]> {
        Ok(&self.columns[self.class_index(class)?])
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn end_time(&self) -> T {
        *self.timestamps.last().expect("non-empty timeline")
    }

    /// Applies `f` to every score. `f` must keep scores finite.
    pub fn map_scores(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let columns = self.columns.iter().map(|c| c.iter().map(|&s| f(s)).collect()).collect();
        Self::new(self.timestamps.clone(), columns, self.class_names.clone())
    }

    pub(crate) fn with_columns(&self, columns: Vec<Vec<T>>) -> Self {
        Self { timestamps: self.timestamps.clone(), columns, class_names: self.class_names.clone() }
    }
}

fn check_class_names(names: &[String]) -> Result<()> {
    let unique: BTreeSet<&String> = names.iter().collect();
    if names.is_empty() || unique.len() != names.len() || names.iter().any(|n| n.is_empty()) {
        return Err(Error::BadClassNames(names.to_vec()));
    }
    Ok(())
}

/// A labelled time interval `[onset, offset)`, used for both ground truth and detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<T> {
    pub onset: T,
    pub offset: T,
    pub label: String,
}

impl<T: Scalar> Event<T> {
    pub fn new(onset: T, offset: T, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !onset.is_finite() || !offset.is_finite() {
            return Err(Error::NonFiniteScore { context: format!("event `{label}`") });
        }
        if onset < T::zero() {
            return Err(Error::InvalidParameter(format!("event `{label}` has negative onset")));
        }
        if offset == onset {
            return Err(Error::ZeroLengthEvent { context: format!("event `{label}`"), onset: onset.as_f64() });
        }
        if offset < onset {
            return Err(Error::InvalidParameter(format!("event `{label}` ends before it starts")));
        }
        if label.is_empty() {
            return Err(Error::InvalidParameter("event label is empty".into()));
        }
        Ok(Self { onset, offset, label })
    }

    pub fn length(&self) -> T {
        self.offset - self.onset
    }
}

/// One evaluation clip: scores, sorted ground truth, and authoritative duration.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip<T> {
    pub timeline: ScoreTimeline<T>,
    /// Sorted by `(onset, offset)`, stable with respect to input order.
    pub ground_truth: Vec<Event<T>>,
    pub duration: T,
}

impl<T: Scalar> Clip<T> {
    /// Ground-truth events of one class, in the clip's canonical order.
    pub fn events_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Event<T>> + 'a {
        self.ground_truth.iter().filter(move |e| e.label == class)
    }
}

/// Validated evaluation set, keyed and iterated by clip id.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    clips: BTreeMap<String, Clip<T>>,
    class_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn clips(&self) -> &BTreeMap<String, Clip<T>> {
        &self.clips
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_index(&self, class: &str) -> Result<usize> {
        self.class_names.iter().position(|c| c == class).ok_or_else(|| Error::UnknownClass(class.to_string()))
    }

    pub fn total_duration(&self) -> T {
        self.clips.values().fold(T::zero(), |acc, c| acc + c.duration)
    }

    /// Number of ground-truth events of `class`.
    pub fn ground_truth_count(&self, class: &str) -> usize {
        self.clips.values().map(|c| c.events_of(class).count()).sum()
    }

    /// Summed length of all ground-truth events of `class`.
    pub fn ground_truth_duration(&self, class: &str) -> T {
        self.clips.values().flat_map(|c| c.events_of(class)).fold(T::zero(), |acc, e| acc + e.length())
    }

    /// Decomposes into the three input mappings accepted by [`validate_dataset`].
    #[allow(clippy::type_complexity)]
    pub fn to_parts(
        &self,
    ) -> (BTreeMap<String, ScoreTimeline<T>>, BTreeMap<String, Vec<Event<T>>>, BTreeMap<String, T>) {
        let mut scores = BTreeMap::new();
        let mut gt = BTreeMap::new();
        let mut durations = BTreeMap::new();
        for (id, clip) in &self.clips {
            scores.insert(id.clone(), clip.timeline.clone());
            gt.insert(id.clone(), clip.ground_truth.clone());
            durations.insert(id.clone(), clip.duration);
        }
        (scores, gt, durations)
    }

    /// Applies a score transformation to every clip; ground truth and durations are kept.
    pub fn map_scores(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let mut clips = BTreeMap::new();
        for (id, clip) in &self.clips {
            clips.insert(
                id.clone(),
                Clip {
                    timeline: clip.timeline.map_scores(&f)?,
                    ground_truth: clip.ground_truth.clone(),
                    duration: clip.duration,
                },
            );
        }
        Ok(Self { clips, class_names: self.class_names.clone() })
    }

    pub(crate) fn map_timelines(&self, f: impl Fn(&ScoreTimeline<T>) -> Result<ScoreTimeline<T>>) -> Result<Self> {
        let mut clips = BTreeMap::new();
        for (id, clip) in &self.clips {
            clips.insert(
                id.clone(),
                Clip { timeline: f(&clip.timeline)?, ground_truth: clip.ground_truth.clone(), duration: clip.duration },
            );
        }
        Ok(Self { clips, class_names: self.class_names.clone() })
    }

    /// Every distinct score value of `class` across all clips, descending.
    pub fn distinct_scores(&self, class: &str) -> Result<Vec<T>> {
        let mut all = Vec::new();
        for clip in self.clips.values() {
            all.extend_from_slice(clip.timeline.column(class)?);
        }
        all.sort_by(|a, b| b.total_cmp_scalar(a));
        all.dedup();
        Ok(all)
    }
}

/// Checks and assembles the three per-clip inputs into a [`Dataset`].
///
/// All three mappings must have the same key set. A clip without events
/// needs an explicit (empty) entry in `ground_truth`.
pub fn validate_dataset<T: Scalar>(
    scores: BTreeMap<String, ScoreTimeline<T>>,
    ground_truth: BTreeMap<String, Vec<Event<T>>>,
    durations: BTreeMap<String, T>,
) -> Result<Dataset<T>> {
    let named = [
        ("scores", scores.keys().collect::<BTreeSet<_>>()),
        ("ground truth", ground_truth.keys().collect()),
        ("durations", durations.keys().collect()),
    ];
    for (present_name, present) in &named {
        for (missing_name, other) in &named {
            if let Some(clip) = present.difference(other).next() {
                return Err(Error::MissingClip {
                    clip: (*clip).clone(),
                    present_in: present_name,
                    missing_from: missing_name,
                });
            }
        }
    }

    let mut class_names: Option<Vec<String>> = None;
    let mut clips = BTreeMap::new();
    let mut ground_truth = ground_truth;
    let mut durations = durations;
    for (id, timeline) in scores {
        match &class_names {
            None => class_names = Some(timeline.class_names().to_vec()),
            Some(expected) if expected.as_slice() != timeline.class_names() => {
                return Err(Error::InconsistentClasses {
                    clip: id,
                    expected: expected.clone(),
                    found: timeline.class_names().to_vec(),
                });
            }
            Some(_) => {}
        }
        let duration = durations.remove(&id).expect("key sets checked");
        if !duration.is_finite() || duration <= T::zero() {
            return Err(Error::NonPositiveDuration { clip: id });
        }
        if timeline.end_time() > duration {
            return Err(Error::DurationTooShort {
                clip: id,
                duration: duration.as_f64(),
                last_timestamp: timeline.end_time().as_f64(),
            });
        }
        let mut events = ground_truth.remove(&id).expect("key sets checked");
        for e in &events {
            if timeline.class_index(&e.label).is_err() {
                return Err(Error::UnknownLabel { clip: id, label: e.label.clone() });
            }
            if e.onset == e.offset {
                return Err(Error::ZeroLengthEvent { context: format!("clip `{id}`"), onset: e.onset.as_f64() });
            }
            if e.onset < T::zero() || e.offset > duration || e.offset < e.onset {
                return Err(Error::EventOutOfBounds {
                    clip: id,
                    onset: e.onset.as_f64(),
                    offset: e.offset.as_f64(),
                    duration: duration.as_f64(),
                });
            }
        }
        sort_events(&mut events);
        clips.insert(id, Clip { timeline, ground_truth: events, duration });
    }
    let class_names = class_names.ok_or_else(|| Error::InvalidParameter("dataset has no clips".into()))?;
    Ok(Dataset { clips, class_names })
}

/// Canonical event order: by onset, then offset; stable otherwise.
pub fn sort_events<T: Scalar>(events: &mut [Event<T>]) {
    events.sort_by(|a, b| a.onset.total_cmp_scalar(&b.onset).then(a.offset.total_cmp_scalar(&b.offset)));
}

/// Collar-based matching tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarParams<T> {
    pub onset_collar: T,
    pub offset_collar_rate: T,
    pub offset_collar_min: T,
}

impl<T: Scalar> CollarParams<T> {
    /// Onset collar `onset_collar`, offset collar `max(onset_collar, rate * length)`.
    pub fn new(onset_collar: T, offset_collar_rate: T) -> Result<Self> {
        Self::with_min(onset_collar, offset_collar_rate, onset_collar)
    }

    pub fn with_min(onset_collar: T, offset_collar_rate: T, offset_collar_min: T) -> Result<Self> {
        if !(onset_collar > T::zero()) || !(offset_collar_rate >= T::zero()) || !(offset_collar_min >= T::zero()) {
            return Err(Error::InvalidParameter(
                "collar requires onset_collar > 0, offset_collar_rate >= 0, offset_collar_min >= 0".into(),
            ));
        }
        Ok(Self { onset_collar, offset_collar_rate, offset_collar_min })
    }

    pub fn offset_collar(&self, event_length: T) -> T {
        self.offset_collar_min.max(self.offset_collar_rate * event_length)
    }

    /// Whether detection `[det_on, det_off)` satisfies both collars of ground truth `[gt_on, gt_off)`.
    pub fn matches(&self, det_on: T, det_off: T, gt_on: T, gt_off: T) -> bool {
        (det_on - gt_on).abs() <= self.onset_collar && (det_off - gt_off).abs() <= self.offset_collar(gt_off - gt_on)
    }
}

impl Default for CollarParams<f64> {
    fn default() -> Self {
        Self { onset_collar: 0.2, offset_collar_rate: 0.2, offset_collar_min: 0.2 }
    }
}

/// Intersection-based criteria ratios, each in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionParams<T> {
    pub rho_dtc: T,
    pub rho_gtc: T,
    pub rho_cttc: T,
}

impl<T: Scalar> IntersectionParams<T> {
    pub fn new(rho_dtc: T, rho_gtc: T, rho_cttc: T) -> Result<Self> {
        for (name, v) in [("dtc", rho_dtc), ("gtc", rho_gtc), ("cttc", rho_cttc)] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter(format!("{name} ratio must lie in (0, 1]")));
            }
        }
        Ok(Self { rho_dtc, rho_gtc, rho_cttc })
    }
}

/// `intersection / length >= rho`, evaluated without division.
pub fn ratio_passes<T: Scalar>(intersection: T, length: T, rho: T) -> bool {
    intersection >= rho * length
}

/// Length of the intersection of `[a_on, a_off)` and `[b_on, b_off)`.
pub fn overlap<T: Scalar>(a_on: T, a_off: T, b_on: T, b_off: T) -> T {
    (a_off.min(b_off) - a_on.max(b_on)).max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeUnit {
    Second,
    Minute,
    #[default]
    Hour,
}

impl TimeUnit {
    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::Second => 1.0,
            TimeUnit::Minute => 60.0,
            TimeUnit::Hour => 3600.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::Second => "second",
            TimeUnit::Minute => "minute",
            TimeUnit::Hour => "hour",
        }
    }
}

impl std::str::FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "second" | "s" => Ok(TimeUnit::Second),
            "minute" | "min" => Ok(TimeUnit::Minute),
            "hour" | "h" => Ok(TimeUnit::Hour),
            other => Err(Error::InvalidParameter(format!("unknown unit of time `{other}`"))),
        }
    }
}

/// Parameters of the PSD-ROC summary and its normalized area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdsParams<T> {
    pub alpha_ct: T,
    pub alpha_st: T,
    /// Upper integration bound, in events per `unit_of_time`.
    pub efpr_max: T,
    pub unit_of_time: TimeUnit,
    pub clip_negative_etpr: bool,
}

impl<T: Scalar> PsdsParams<T> {
    pub fn new(alpha_ct: T, alpha_st: T, efpr_max: T) -> Result<Self> {
        let params = Self { alpha_ct, alpha_st, efpr_max, unit_of_time: TimeUnit::Hour, clip_negative_etpr: false };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_ct >= T::zero()) || !(self.alpha_st >= T::zero()) {
            return Err(Error::InvalidParameter("alpha_ct and alpha_st must be non-negative".into()));
        }
        if !(self.efpr_max > T::zero()) || !self.efpr_max.is_finite() {
            return Err(Error::InvalidParameter("efpr_max must be positive".into()));
        }
        Ok(())
    }

    /// Length of one unit of time in seconds.
    pub fn unit_seconds(&self) -> T {
        T::of(self.unit_of_time.seconds())
    }
}

/// Dataset-level normalizers attached to a [`StatisticsCurve`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTotals<T> {
    /// Ground-truth positives of the curve's class.
    pub n_gp: usize,
    /// Ground-truth negatives (segment mode only).
    pub n_gn: Option<usize>,
    /// Total dataset duration in seconds.
    pub total_duration: T,
    /// Summed ground-truth duration of each other class, aligned with `other_classes`.
    pub other_class_durations: Vec<T>,
}

/// Intermediate statistics of one class for every threshold interval.
///
/// Row 0 holds the "no positives" state (`tau >= thresholds[0]`); row `k >= 1`
/// holds the counts for `tau` in `[thresholds[k], thresholds[k - 1])`, with
/// `thresholds[L]` read as minus infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticsCurve<T> {
    pub class_name: String,
    /// Distinct score values, strictly descending.
    pub thresholds: Vec<T>,
    pub n_tp: Vec<usize>,
    pub n_fp: Vec<usize>,
    /// Other classes for cross-trigger counting (intersection mode only).
    pub other_classes: Vec<String>,
    /// `n_ct[c][k]`: cross-triggers against `other_classes[c]` in row `k`.
    pub n_ct: Vec<Vec<usize>>,
    pub totals: CurveTotals<T>,
}

impl<T: Scalar> StatisticsCurve<T> {
    /// Number of rows, `thresholds.len() + 1`.
    pub fn rows(&self) -> usize {
        self.n_tp.len()
    }

    /// `(N_DP, N_FN)` for row `k`.
    pub fn derived_counts(&self, k: usize) -> Result<(usize, usize)> {
        if k >= self.rows() {
            return Err(Error::IndexOutOfRange { index: k, len: self.rows() });
        }
        Ok((self.n_tp[k] + self.n_fp[k], self.totals.n_gp - self.n_tp[k]))
    }

    /// Row index whose threshold interval contains `tau` under the rule `score > tau`.
    pub fn row_for_threshold(&self, tau: T) -> usize {
        self.thresholds.partition_point(|&v| v > tau)
    }

    /// Cross-trigger counts of row `k` for every other class.
    pub fn cross_triggers(&self, k: usize) -> Vec<usize> {
        self.n_ct.iter().map(|c| c[k]).collect()
    }
}
