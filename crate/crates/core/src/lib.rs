//! Exact sound-event-detection evaluation curves for every decision threshold.
//!
//! Per clip and class, [`engine`] turns frame scores into signed changes of the
//! intermediate statistics at each distinct score value; a cumulative sum over
//! those changes gives TP/FP/cross-trigger counts for all thresholds at once.
//! [`metrics`] derives PR/F1 curves, eFPR-TPR envelopes, the PSD-ROC and PSDS
//! from the result, and [`oracle`] re-evaluates single thresholds by brute force.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below name the common double-precision instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detection;
pub mod engine;
mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod oracle;
mod scalar;

pub use engine::{accumulate, collar_curves, intersection_curves, segment_curves, DeltaRecord};
pub use error::{Error, Result};
pub use metrics::{ClassRoc, PrCurve, PsdRoc};
pub use model::{
    validate_dataset, Clip, CollarParams, CurveTotals, Dataset, Event, IntersectionParams, PsdsParams, ScoreTimeline,
    StatisticsCurve, TimeUnit,
};
pub use scalar::Scalar;

pub type ScoreTimelineF64 = ScoreTimeline<f64>;
pub type EventF64 = Event<f64>;
pub type DatasetF64 = Dataset<f64>;
pub type DeltaRecordF64 = DeltaRecord<f64>;
pub type StatisticsCurveF64 = StatisticsCurve<f64>;
pub type PrCurveF64 = PrCurve<f64>;
pub type ClassRocF64 = ClassRoc<f64>;
pub type PsdRocF64 = PsdRoc<f64>;

pub type ScoreTimelineF32 = ScoreTimeline<f32>;
pub type DatasetF32 = Dataset<f32>;
pub type StatisticsCurveF32 = StatisticsCurve<f32>;
