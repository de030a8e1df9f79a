//! PR/F1 curves, eFPR-TPR ROC envelopes, the PSD-ROC and scalar summaries.

use crate::error::{Error, Result};
use crate::model::{CurveTotals, PsdsParams, StatisticsCurve};
use crate::scalar::{count, Scalar};

/// One representative threshold per curve row.
///
/// Row 0 uses the largest score, interior rows the midpoint of their interval,
/// and the last row sits half the smallest score gap below the smallest score.
pub fn representative_thresholds<T: Scalar>(thresholds: &[T]) -> Vec<T> {
    let Some(&top) = thresholds.first() else {
        return vec![T::zero()];
    };
    let half = T::of(0.5);
    let gap = thresholds
        .windows(2)
        .map(|w| w[0] - w[1])
        .filter(|&g| g > T::zero())
        .fold(None, |acc: Option<T>, g| Some(acc.map_or(g, |a| a.min(g))))
        .unwrap_or_else(T::one);
    let mut reps = Vec::with_capacity(thresholds.len() + 1);
    reps.push(top);
    reps.extend(thresholds.windows(2).map(|w| (w[0] + w[1]) * half));
    reps.push(*thresholds.last().expect("non-empty") - gap * half);
    reps
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve<T> {
    pub class_name: String,
    /// Representative threshold of each row.
    pub thresholds: Vec<T>,
    pub precision: Vec<T>,
    pub recall: Vec<T>,
    pub f1: Vec<T>,
}

/// Precision, recall and F1 for every threshold interval, including the no-positives row.
pub fn pr_f1_curve<T: Scalar>(curve: &StatisticsCurve<T>) -> Result<PrCurve<T>> {
    let n_gp = curve.totals.n_gp;
    if n_gp == 0 {
        return Err(Error::NoGroundTruth(curve.class_name.clone()));
    }
    let rows = curve.rows();
    let mut precision = Vec::with_capacity(rows);
    let mut recall = Vec::with_capacity(rows);
    let mut f1 = Vec::with_capacity(rows);
    for k in 0..rows {
        let tp = curve.n_tp[k];
        let dp = tp + curve.n_fp[k];
        let p = if dp == 0 { T::one() } else { count::<T>(tp) / count::<T>(dp) };
        let r = count::<T>(tp) / count::<T>(n_gp);
        let f = if p + r == T::zero() { T::zero() } else { T::of(2.0) * p * r / (p + r) };
        precision.push(p);
        recall.push(r);
        f1.push(f);
    }
    Ok(PrCurve {
        class_name: curve.class_name.clone(),
        thresholds: representative_thresholds(&curve.thresholds),
        precision,
        recall,
        f1,
    })
}

/// `(threshold, f1)` of the row with maximal F1; ties go to the highest threshold.
pub fn best_threshold<T: Scalar>(curve: &PrCurve<T>) -> Result<(T, T)> {
    let mut best: Option<usize> = None;
    for (k, &f) in curve.f1.iter().enumerate() {
        if best.is_none_or(|b| f > curve.f1[b]) {
            best = Some(k);
        }
    }
    let k = best.ok_or(Error::EmptyCurve)?;
    Ok((curve.thresholds[k], curve.f1[k]))
}

/// Effective false-positive rate per unit of time for one operating point.
///
/// `fp / T + alpha_ct * mean_c(ct[c] / T_gt[c])`, scaled to `params.unit_of_time`.
pub fn effective_fpr<T: Scalar>(
    n_fp: usize,
    cross_triggers: &[usize],
    totals: &CurveTotals<T>,
    other_classes: &[String],
    params: &PsdsParams<T>,
) -> Result<T> {
    let unit = params.unit_seconds();
    let mut rate = count::<T>(n_fp) / totals.total_duration;
    if params.alpha_ct > T::zero() && !other_classes.is_empty() {
        let mut ct_sum = T::zero();
        for ((name, &ct), &duration) in other_classes.iter().zip(cross_triggers).zip(&totals.other_class_durations) {
            if duration <= T::zero() {
                return Err(Error::ZeroCrossDuration(name.clone()));
            }
            ct_sum = ct_sum + count::<T>(ct) / duration;
        }
        rate = rate + params.alpha_ct * ct_sum / count::<T>(other_classes.len());
    }
    Ok(rate * unit)
}

/// Operating points of one class and their monotone envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRoc<T> {
    pub class_name: String,
    /// `(efpr, tpr)`, starting with the trivial `(0, 0)`.
    pub operating_points: Vec<(T, T)>,
    /// Distinct efpr values ascending, with the best tpr reached at or below each.
    pub envelope: Vec<(T, T)>,
}

impl<T: Scalar> ClassRoc<T> {
    pub fn from_points(class_name: impl Into<String>, points: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut operating_points = vec![(T::zero(), T::zero())];
        operating_points.extend(points);
        let mut sorted = operating_points.clone();
        sorted.sort_by(|a, b| a.0.total_cmp_scalar(&b.0).then(a.1.total_cmp_scalar(&b.1)));
        let mut envelope: Vec<(T, T)> = Vec::with_capacity(sorted.len());
        let mut best = T::neg_infinity();
        for (e, t) in sorted {
            best = best.max(t);
            match envelope.last_mut() {
                Some(last) if last.0 == e => last.1 = best,
                _ => envelope.push((e, best)),
            }
        }
        Self { class_name: class_name.into(), operating_points, envelope }
    }

    /// Best tpr over operating points with `efpr <= e`.
    pub fn envelope_at(&self, e: T) -> T {
        let idx = self.envelope.partition_point(|&(x, _)| x <= e);
        if idx == 0 {
            T::zero()
        } else {
            self.envelope[idx - 1].1
        }
    }
}

/// eFPR-TPR operating points of an intersection-mode curve.
pub fn class_roc<T: Scalar>(curve: &StatisticsCurve<T>, params: &PsdsParams<T>) -> Result<ClassRoc<T>> {
    let totals = &curve.totals;
    if totals.n_gp == 0 {
        return Err(Error::NoGroundTruth(curve.class_name.clone()));
    }
    if !(totals.total_duration > T::zero()) {
        return Err(Error::InvalidParameter("total duration must be positive".into()));
    }
    let n_gp = count::<T>(totals.n_gp);
    let mut points = Vec::with_capacity(curve.rows());
    for k in 0..curve.rows() {
        let efpr = effective_fpr(curve.n_fp[k], &curve.cross_triggers(k), totals, &curve.other_classes, params)?;
        points.push((efpr, count::<T>(curve.n_tp[k]) / n_gp));
    }
    Ok(ClassRoc::from_points(curve.class_name.clone(), points))
}

/// Summary of class envelopes on a shared eFPR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdRoc<T> {
    pub efpr: Vec<T>,
    pub class_names: Vec<String>,
    /// `class_tpr[c][i]`: envelope of class `c` at `efpr[i]`.
    pub class_tpr: Vec<Vec<T>>,
    pub mu: Vec<T>,
    pub sigma: Vec<T>,
    pub etpr: Vec<T>,
    pub psds: T,
}

/// Mean minus `alpha_st` times the population standard deviation of the class envelopes.
pub fn psd_roc<T: Scalar>(class_rocs: &[ClassRoc<T>], params: &PsdsParams<T>) -> Result<PsdRoc<T>> {
    params.validate()?;
    if class_rocs.is_empty() {
        return Err(Error::NoClasses);
    }
    let mut grid: Vec<T> = class_rocs.iter().flat_map(|r| r.envelope.iter().map(|p| p.0)).collect();
    grid.push(T::zero());
    grid.push(params.efpr_max);
    grid.sort_by(|a, b| a.total_cmp_scalar(b));
    grid.dedup();

    let n = count::<T>(class_rocs.len());
    let class_tpr: Vec<Vec<T>> = class_rocs.iter().map(|r| grid.iter().map(|&e| r.envelope_at(e)).collect()).collect();
    let mut mu = Vec::with_capacity(grid.len());
    let mut sigma = Vec::with_capacity(grid.len());
    let mut etpr = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let m = class_tpr.iter().fold(T::zero(), |acc, c| acc + c[i]) / n;
        let var = class_tpr.iter().fold(T::zero(), |acc, c| acc + (c[i] - m) * (c[i] - m)) / n;
        let s = var.sqrt();
        let mut v = m - params.alpha_st * s;
        if params.clip_negative_etpr {
            v = v.max(T::zero());
        }
        mu.push(m);
        sigma.push(s);
        etpr.push(v);
    }
    let mut roc = PsdRoc {
        efpr: grid,
        class_names: class_rocs.iter().map(|r| r.class_name.clone()).collect(),
        class_tpr,
        mu,
        sigma,
        etpr,
        psds: T::zero(),
    };
    roc.psds = psds(&roc, params);
    Ok(roc)
}

/// Normalized area under the eTPR step function on `[0, efpr_max]`.
pub fn psds<T: Scalar>(roc: &PsdRoc<T>, params: &PsdsParams<T>) -> T {
    let points: Vec<(T, T)> = roc.efpr.iter().copied().zip(roc.etpr.iter().copied()).collect();
    auc(&points, params.efpr_max).expect("grid is ascending") / params.efpr_max
}

/// Area under a left-step function (value held until the next x), truncated at `x_max`.
pub fn auc<T: Scalar>(points: &[(T, T)], x_max: T) -> Result<T> {
    if points.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::UnsortedInput);
    }
    let mut area = T::zero();
    for (i, &(x, y)) in points.iter().enumerate() {
        if x >= x_max {
            break;
        }
        let next = points.get(i + 1).map_or(x_max, |p| p.0.min(x_max));
        area = area + y * (next - x);
    }
    Ok(area)
}

/// Class ROCs of all curves with ground truth, then their PSD-ROC.
///
/// Classes without ground-truth positives are left out of the summary.
pub fn psd_roc_from_curves<T: Scalar>(curves: &[StatisticsCurve<T>], params: &PsdsParams<T>) -> Result<PsdRoc<T>> {
    let mut rocs = Vec::with_capacity(curves.len());
    for curve in curves {
        if curve.totals.n_gp == 0 {
            log::warn!("class `{}` has no ground truth and is excluded from the PSD-ROC", curve.class_name);
            continue;
        }
        rocs.push(class_roc(curve, params)?);
    }
    psd_roc(&rocs, params)
}

/// Segment-mode ROC points `(fpr, tpr)` per row.
pub fn segment_roc<T: Scalar>(curve: &StatisticsCurve<T>) -> Result<Vec<(T, T)>> {
    let n_gp = curve.totals.n_gp;
    let n_gn = curve.totals.n_gn.unwrap_or(0);
    if n_gp == 0 {
        return Err(Error::NoGroundTruth(curve.class_name.clone()));
    }
    if n_gn == 0 {
        return Err(Error::InvalidParameter(format!("class `{}` has no negative segments", curve.class_name)));
    }
    Ok((0..curve.rows())
        .map(|k| (count::<T>(curve.n_fp[k]) / count::<T>(n_gn), count::<T>(curve.n_tp[k]) / count::<T>(n_gp)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeUnit;

    fn curve(n_tp: Vec<usize>, n_fp: Vec<usize>, n_gp: usize) -> StatisticsCurve<f64> {
        StatisticsCurve {
            class_name: "A".into(),
            thresholds: (1..n_tp.len()).map(|k| 1.0 - 0.1 * k as f64).collect(),
            n_tp,
            n_fp,
            other_classes: vec![],
            n_ct: vec![],
            totals: CurveTotals { n_gp, n_gn: None, total_duration: 1800.0, other_class_durations: vec![] },
        }
    }

    fn params(alpha_ct: f64, alpha_st: f64, efpr_max: f64) -> PsdsParams<f64> {
        PsdsParams::new(alpha_ct, alpha_st, efpr_max).unwrap()
    }

    #[test]
    fn pr_examples() {
        let pr = pr_f1_curve(&curve(vec![0, 0, 1, 0], vec![0, 1, 0, 1], 1)).unwrap();
        assert_eq!(pr.precision, vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(pr.recall, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(pr.f1, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(best_threshold(&pr).unwrap(), (pr.thresholds[2], 1.0));

        let pr = pr_f1_curve(&curve(vec![0, 0, 0], vec![0, 0, 0], 2)).unwrap();
        assert!(pr.precision.iter().all(|&p| p == 1.0));
        assert!(pr.recall.iter().all(|&r| r == 0.0));

        let pr = pr_f1_curve(&curve(vec![0, 1, 2], vec![0, 1, 2], 4)).unwrap();
        assert_eq!(&pr.precision[1..], &[0.5, 0.5]);

        assert!(matches!(pr_f1_curve(&curve(vec![0], vec![0], 0)), Err(Error::NoGroundTruth(_))));
    }

    #[test]
    fn best_threshold_prefers_higher_on_ties() {
        let pr = PrCurve {
            class_name: "A".into(),
            thresholds: vec![0.9, 0.7, 0.5],
            precision: vec![1.0; 3],
            recall: vec![0.0; 3],
            f1: vec![0.1, 0.8, 0.8],
        };
        assert_eq!(best_threshold(&pr).unwrap(), (0.7, 0.8));
        let empty = PrCurve { f1: vec![], thresholds: vec![], ..pr };
        assert_eq!(best_threshold(&empty), Err(Error::EmptyCurve));
    }

    #[test]
    fn representatives() {
        assert_eq!(
            representative_thresholds(&[0.7, 0.6, 0.3]),
            vec![0.7, 0.6499999999999999, 0.44999999999999996, 0.25]
        );
        assert_eq!(representative_thresholds(&[0.4]), vec![0.4, -0.09999999999999998]);
    }

    #[test]
    fn class_roc_example() {
        // N_GP = 2, half an hour, (FP, TP) rows (0,1), (1,2), (2,1)
        let c = curve(vec![0, 1, 2, 1], vec![0, 0, 1, 2], 2);
        let roc = class_roc(&c, &params(0.0, 0.0, 100.0)).unwrap();
        assert_eq!(&roc.operating_points[2..], &[(0.0, 0.5), (2.0, 1.0), (4.0, 0.5)]);
        assert_eq!(roc.envelope, vec![(0.0, 0.5), (2.0, 1.0), (4.0, 1.0)]);
        assert_eq!(roc.envelope_at(3.0), 1.0);
        assert_eq!(roc.envelope_at(1.9), 0.5);
    }

    #[test]
    fn cross_trigger_rate_enters_efpr() {
        let totals = CurveTotals { n_gp: 1, n_gn: None, total_duration: 3600.0, other_class_durations: vec![900.0] };
        let e = effective_fpr(0, &[3], &totals, &["B".into()], &params(1.0, 0.0, 100.0)).unwrap();
        assert!((e - 12.0).abs() < 1e-12);
        let zero = CurveTotals { other_class_durations: vec![0.0], ..totals.clone() };
        assert_eq!(
            effective_fpr(0, &[3], &zero, &["B".into()], &params(1.0, 0.0, 100.0)),
            Err(Error::ZeroCrossDuration("B".into()))
        );
        assert_eq!(effective_fpr(0, &[3], &zero, &["B".into()], &params(0.0, 0.0, 100.0)).unwrap(), 0.0);
        let mut p = params(0.0, 0.0, 100.0);
        p.unit_of_time = TimeUnit::Minute;
        assert_eq!(effective_fpr(60, &[], &totals, &[], &p).unwrap(), 1.0);
    }

    #[test]
    fn psd_roc_examples() {
        let one = ClassRoc::from_points("A", [(0.0, 1.0)]);
        let zero = ClassRoc::from_points("B", [(0.0, 0.0)]);
        let r = psd_roc(&[one.clone(), zero.clone()], &params(0.0, 1.0, 100.0)).unwrap();
        assert!(r.etpr.iter().all(|&v| v == 0.0));
        assert!(r.mu.iter().all(|&v| v == 0.5) && r.sigma.iter().all(|&v| v == 0.5));
        let r = psd_roc(&[one.clone(), zero], &params(0.0, 0.0, 100.0)).unwrap();
        assert!(r.etpr.iter().all(|&v| v == 0.5));
        assert_eq!(r.psds, 0.5);

        let single = ClassRoc::from_points("A", [(10.0, 0.6)]);
        let r = psd_roc(std::slice::from_ref(&single), &params(0.0, 3.0, 100.0)).unwrap();
        assert_eq!(r.efpr, vec![0.0, 10.0, 100.0]);
        assert_eq!(r.etpr, vec![0.0, 0.6, 0.6]);
        assert!((r.psds - 0.54).abs() < 1e-12);

        let r = psd_roc(&[one], &params(0.0, 1.0, 100.0)).unwrap();
        assert_eq!(r.psds, 1.0);
        assert_eq!(psd_roc::<f64>(&[], &params(0.0, 1.0, 100.0)), Err(Error::NoClasses));
    }

    #[test]
    fn negative_etpr_clipping() {
        let a = ClassRoc::from_points("A", [(0.0, 1.0)]);
        let b = ClassRoc::from_points("B", [(50.0, 0.2)]);
        let mut p = params(0.0, 2.0, 100.0);
        let raw = psd_roc(&[a.clone(), b.clone()], &p).unwrap();
        assert!(raw.etpr[0] < 0.0);
        p.clip_negative_etpr = true;
        let clipped = psd_roc(&[a, b], &p).unwrap();
        assert!(clipped.etpr.iter().all(|&v| v >= 0.0));
        assert!(clipped.psds >= raw.psds);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[(0.0, 1.0)], 2.0).unwrap(), 2.0);
        assert_eq!(auc(&[(0.0, 0.0), (1.0, 1.0)], 2.0).unwrap(), 1.0);
        assert_eq!(auc::<f64>(&[], 2.0).unwrap(), 0.0);
        assert_eq!(auc(&[(1.0, 0.0), (0.0, 1.0)], 2.0), Err(Error::UnsortedInput));
        assert_eq!(auc(&[(0.0, 1.0), (5.0, 1.0)], 2.0).unwrap(), 2.0);
    }
}
