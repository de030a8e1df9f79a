//! Command-line front end. Machine output goes to files in `--output`;
//! stdout carries a one-line summary and stderr the diagnostics.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::detection::median_filter;
use crate::engine::{collar_curves, intersection_curves, segment_curves};
use crate::error::{Error, Result};
use crate::io::{
    dataset_fingerprint, format_number, load_dataset, write_report, CurveKind, CurveReport, CurveSeries, ReportFormat,
};
use crate::metrics::{auc, best_threshold, pr_f1_curve, psd_roc_from_curves, segment_roc};
use crate::model::{CollarParams, Dataset, IntersectionParams, PsdsParams, StatisticsCurve, TimeUnit};
use crate::oracle::{approx_psds, linear_thresholds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sed-curves", version, about = "Exact threshold-independent SED evaluation curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the dataset and print diagnostics
    Validate(EvalArgs),
    /// Exact PSDS with per-class envelopes (JSON)
    Psds(EvalArgs),
    /// Exact PSD-ROC curve
    PsdRoc(EvalArgs),
    /// Collar- or intersection-based PR/F1 curve per class
    PrCurve(EvalArgs),
    /// F1-optimal threshold per class
    BestThreshold(EvalArgs),
    /// Exact PSDS against a PSDS approximated on a threshold grid
    CompareApprox(EvalArgs),
    /// Segment-based ROC curve per class
    SegmentRoc(EvalArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Collar,
    Intersection,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct EvalArgs {
    /// Directory of per-clip score files `<clip_id>.tsv`
    #[arg(long)]
    scores: PathBuf,
    /// Ground-truth table
    #[arg(long)]
    gt: PathBuf,
    /// Clip durations table
    #[arg(long)]
    durations: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Collar)]
    mode: Mode,
    #[arg(long, default_value_t = 0.7)]
    dtc: f64,
    #[arg(long, default_value_t = 0.7)]
    gtc: f64,
    #[arg(long, default_value_t = 0.3)]
    cttc: f64,
    #[arg(long = "alpha-ct", default_value_t = 0.0)]
    alpha_ct: f64,
    #[arg(long = "alpha-st", default_value_t = 1.0)]
    alpha_st: f64,
    /// Maximum eFPR, events per unit of time
    #[arg(long = "max-efpr", default_value_t = 100.0)]
    max_efpr: f64,
    #[arg(long = "unit-of-time", default_value = "hour")]
    unit_of_time: String,
    #[arg(long = "clip-negative-etpr")]
    clip_negative_etpr: bool,
    /// Onset collar in seconds
    #[arg(long, default_value_t = 0.2)]
    collar: f64,
    #[arg(long = "offset-collar-rate", default_value_t = 0.2)]
    offset_collar_rate: f64,
    /// Minimum offset collar in seconds (defaults to the onset collar)
    #[arg(long = "offset-collar-min")]
    offset_collar_min: Option<f64>,
    #[arg(long = "segment-length", default_value_t = 1.0)]
    segment_length: f64,
    /// Median filter width in frames (odd), applied to scores before evaluation
    #[arg(long = "median-filter")]
    median_filter: Option<usize>,
    /// Threshold grid: `linear:<count>:<lo>:<hi>` or `list:<t1>,<t2>,...`
    #[arg(long, default_value = "linear:50:0.01:0.99")]
    grid: String,
    /// Fixed threshold compared against the tuned one by best-threshold
    #[arg(long = "reference-threshold", default_value_t = 0.5)]
    reference_threshold: f64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Parses and runs one command; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}

enum Failure {
    Usage(String),
    Validation(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

enum Grid {
    Linear { count: usize, lo: f64, hi: f64 },
    List(Vec<f64>),
}

impl Grid {
    fn parse(spec: &str) -> Outcome<Self> {
        let bad = || usage(format!("bad --grid `{spec}`"));
        if let Some(rest) = spec.strip_prefix("linear:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let count = parts[0].parse().map_err(|_| bad())?;
            let lo = parts[1].parse().map_err(|_| bad())?;
            let hi = parts[2].parse().map_err(|_| bad())?;
            Ok(Grid::Linear { count, lo, hi })
        } else if let Some(rest) = spec.strip_prefix("list:") {
            let values = rest.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<_, _>>();
            Ok(Grid::List(values.map_err(|_| bad())?))
        } else {
            Err(bad())
        }
    }

    fn thresholds(&self) -> Vec<f64> {
        match self {
            Grid::Linear { count, lo, hi } => linear_thresholds(*count, *lo, *hi),
            Grid::List(v) => v.clone(),
        }
    }
}

struct Context {
    args: EvalArgs,
    dataset: Dataset<f64>,
    metadata: BTreeMap<String, String>,
}

impl Context {
    fn collar(&self) -> Outcome<CollarParams<f64>> {
        let a = &self.args;
        CollarParams::with_min(a.collar, a.offset_collar_rate, a.offset_collar_min.unwrap_or(a.collar))
            .map_err(|e| usage(e.to_string()))
    }

    fn intersection(&self) -> Outcome<IntersectionParams<f64>> {
        IntersectionParams::new(self.args.dtc, self.args.gtc, self.args.cttc).map_err(|e| usage(e.to_string()))
    }

    fn psds(&self) -> Outcome<PsdsParams<f64>> {
        let a = &self.args;
        let mut p = PsdsParams::new(a.alpha_ct, a.alpha_st, a.max_efpr).map_err(|e| usage(e.to_string()))?;
        p.unit_of_time = a.unit_of_time.parse::<TimeUnit>().map_err(|e| usage(e.to_string()))?;
        p.clip_negative_etpr = a.clip_negative_etpr;
        Ok(p)
    }

    fn report(&self, kind: CurveKind, x_key: &str, value_keys: &[&str]) -> CurveReport {
        let mut r = CurveReport::new(kind, x_key, value_keys);
        r.metadata = self.metadata.clone();
        r
    }

    fn format(&self, default: Format) -> ReportFormat {
        match self.args.format.unwrap_or(default) {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }

    fn write(&self, stem: &str, report: &CurveReport, format: ReportFormat) -> Outcome<PathBuf> {
        let ext = match format {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        };
        let path = self.args.output.join(format!("{stem}.{ext}"));
        write_file(&path, &write_report(report, format))?;
        if format == ReportFormat::Csv {
            let mut meta = CurveReport::new(report.kind, &report.x_key, &[]);
            meta.metadata = report.metadata.clone();
            meta.scalars = report.scalars.clone();
            write_file(&self.args.output.join(format!("{stem}.meta.json")), &write_report(&meta, ReportFormat::Json))?;
        }
        Ok(path)
    }

    fn curves(&self) -> Outcome<Vec<StatisticsCurve<f64>>> {
        Ok(match self.args.mode {
            Mode::Collar => collar_curves(&self.dataset, &self.collar()?)?,
            Mode::Intersection => intersection_curves(&self.dataset, &self.intersection()?)?,
        })
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn metadata(command: &str, a: &EvalArgs, fingerprint: String) -> BTreeMap<String, String> {
    let n = |x: f64| format_number(x);
    let mut m = BTreeMap::new();
    m.insert("command".into(), command.to_string());
    m.insert("dataset_fingerprint".into(), fingerprint);
    m.insert("scores".into(), a.scores.display().to_string());
    m.insert("gt".into(), a.gt.display().to_string());
    m.insert("durations".into(), a.durations.display().to_string());
    m.insert("mode".into(), format!("{:?}", a.mode).to_lowercase());
    m.insert("dtc".into(), n(a.dtc));
    m.insert("gtc".into(), n(a.gtc));
    m.insert("cttc".into(), n(a.cttc));
    m.insert("alpha_ct".into(), n(a.alpha_ct));
    m.insert("alpha_st".into(), n(a.alpha_st));
    m.insert("max_efpr".into(), n(a.max_efpr));
    m.insert("unit_of_time".into(), a.unit_of_time.clone());
    m.insert("clip_negative_etpr".into(), a.clip_negative_etpr.to_string());
    m.insert("collar".into(), n(a.collar));
    m.insert("offset_collar_rate".into(), n(a.offset_collar_rate));
    m.insert("offset_collar_min".into(), n(a.offset_collar_min.unwrap_or(a.collar)));
    m.insert("segment_length".into(), n(a.segment_length));
    m.insert("median_filter".into(), a.median_filter.map_or("none".into(), |w| w.to_string()));
    m.insert("grid".into(), a.grid.clone());
    m.insert("reference_threshold".into(), n(a.reference_threshold));
    m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    m
}

fn prepare(command: &str, args: EvalArgs) -> Outcome<Context> {
    for (flag, path) in [("--scores", &args.scores), ("--gt", &args.gt), ("--durations", &args.durations)] {
        if !path.exists() {
            return Err(usage(format!("{flag} path `{}` does not exist", path.display())));
        }
    }
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if command != "validate" && !args.output.is_dir() {
        fs::create_dir_all(&args.output)
            .map_err(|e| usage(format!("cannot create `{}`: {e}", args.output.display())))?;
    }
    let mut dataset: Dataset<f64> = load_dataset(&args.scores, &args.gt, &args.durations)?;
    if let Some(width) = args.median_filter {
        dataset = dataset.map_timelines(|t| median_filter(t, width)).map_err(|e| usage(e.to_string()))?;
    }
    let metadata = metadata(command, &args, dataset_fingerprint(&dataset));
    Ok(Context { args, dataset, metadata })
}

fn execute(command: Command) -> Outcome<String> {
    let (name, args) = match command {
        Command::Validate(a) => ("validate", a),
        Command::Psds(a) => ("psds", a),
        Command::PsdRoc(a) => ("psd-roc", a),
        Command::PrCurve(a) => ("pr-curve", a),
        Command::BestThreshold(a) => ("best-threshold", a),
        Command::CompareApprox(a) => ("compare-approx", a),
        Command::SegmentRoc(a) => ("segment-roc", a),
    };
    let jobs = args.jobs;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| usage(e.to_string()))?;
    pool.install(|| {
        let ctx = prepare(name, args)?;
        match name {
            "validate" => validate(&ctx),
            "psds" => psds(&ctx),
            "psd-roc" => psd_roc(&ctx),
            "pr-curve" => pr_curve(&ctx),
            "best-threshold" => best(&ctx),
            "compare-approx" => compare_approx(&ctx),
            "segment-roc" => segment(&ctx),
            _ => unreachable!("all commands listed"),
        }
    })
}

fn validate(ctx: &Context) -> Outcome<String> {
    let ds = &ctx.dataset;
    let frames: usize = ds.clips().values().map(|c| c.timeline.num_frames()).sum();
    eprintln!("clips: {}", ds.clips().len());
    eprintln!("classes: {}", ds.class_names().join(", "));
    eprintln!("frames: {frames}");
    eprintln!("total duration: {} s", format_number(ds.total_duration()));
    for class in ds.class_names() {
        eprintln!(
            "  {class}: {} events, {} s",
            ds.ground_truth_count(class),
            format_number(ds.ground_truth_duration(class))
        );
    }
    eprintln!("fingerprint: {}", ctx.metadata["dataset_fingerprint"]);
    Ok(format!("valid: {} clips, {} classes", ds.clips().len(), ds.class_names().len()))
}

fn psds(ctx: &Context) -> Outcome<String> {
    let params = ctx.psds()?;
    let curves = intersection_curves(&ctx.dataset, &ctx.intersection()?)?;
    let roc = psd_roc_from_curves(&curves, &params)?;
    let mut report = ctx.report(CurveKind::PsdRoc, "efpr", &["tpr"]);
    for curve in curves.iter().filter(|c| c.totals.n_gp > 0) {
        let class_roc = crate::metrics::class_roc(curve, &params)?;
        let points = class_roc.envelope.iter().map(|&(e, t)| (e, vec![t])).collect();
        report.series.push(CurveSeries::from_points(&curve.class_name, points));
    }
    report.scalars.insert("psds".into(), roc.psds);
    let path = ctx.write("psds", &report, ReportFormat::Json)?;
    Ok(format!("psds={} -> {}", format_number(roc.psds), path.display()))
}

fn psd_roc(ctx: &Context) -> Outcome<String> {
    let params = ctx.psds()?;
    let curves = intersection_curves(&ctx.dataset, &ctx.intersection()?)?;
    let roc = psd_roc_from_curves(&curves, &params)?;
    let mut keys = vec!["mu_tpr".to_string(), "sigma_tpr".to_string(), "etpr".to_string()];
    keys.extend(roc.class_names.iter().map(|c| format!("envelope[{c}]")));
    let key_refs: Vec<&str> = keys.iter().map(String::as_str).collect();
    let mut report = ctx.report(CurveKind::PsdRoc, "efpr", &key_refs);
    let points = (0..roc.efpr.len())
        .map(|i| {
            let mut v = vec![roc.mu[i], roc.sigma[i], roc.etpr[i]];
            v.extend(roc.class_tpr.iter().map(|c| c[i]));
            (roc.efpr[i], v)
        })
        .collect();
    report.series.push(CurveSeries::from_points("psd_roc", points));
    report.scalars.insert("psds".into(), roc.psds);
    let path = ctx.write("psd_roc", &report, ctx.format(Format::Csv))?;
    Ok(format!("psds={} -> {}", format_number(roc.psds), path.display()))
}

fn pr_curve(ctx: &Context) -> Outcome<String> {
    let curves = ctx.curves()?;
    let mut report = ctx.report(CurveKind::Pr, "threshold", &["precision", "recall", "f1", "n_tp", "n_fp"]);
    for curve in &curves {
        if curve.totals.n_gp == 0 {
            log::warn!("class `{}` has no ground truth; skipped", curve.class_name);
            continue;
        }
        let pr = pr_f1_curve(curve)?;
        let points = (0..pr.thresholds.len())
            .map(|k| {
                (
                    pr.thresholds[k],
                    vec![pr.precision[k], pr.recall[k], pr.f1[k], curve.n_tp[k] as f64, curve.n_fp[k] as f64],
                )
            })
            .collect();
        report.series.push(CurveSeries::from_points(&curve.class_name, points));
    }
    let path = ctx.write("pr_curve", &report, ctx.format(Format::Csv))?;
    Ok(format!("{} classes -> {}", report.series.len(), path.display()))
}

fn best(ctx: &Context) -> Outcome<String> {
    let curves = ctx.curves()?;
    let reference = ctx.args.reference_threshold;
    let mut report = ctx.report(CurveKind::Pr, "threshold", &["f1", "f1_at_reference"]);
    let (mut sum, mut sum_ref, mut n) = (0.0, 0.0, 0usize);
    for curve in &curves {
        if curve.totals.n_gp == 0 {
            log::warn!("class `{}` has no ground truth; skipped", curve.class_name);
            continue;
        }
        let pr = pr_f1_curve(curve)?;
        let (tau, f1) = best_threshold(&pr)?;
        let f1_ref = pr.f1[curve.row_for_threshold(reference)];
        report.series.push(CurveSeries::from_points(&curve.class_name, vec![(tau, vec![f1, f1_ref])]));
        sum += f1;
        sum_ref += f1_ref;
        n += 1;
    }
    if n == 0 {
        return Err(Failure::Validation(Error::NoClasses));
    }
    let macro_f1 = sum / n as f64;
    report.scalars.insert("macro_f1".into(), macro_f1);
    report.scalars.insert("macro_f1_at_reference".into(), sum_ref / n as f64);
    let path = ctx.write("best_threshold", &report, ctx.format(Format::Json))?;
    Ok(format!("macro_f1={} -> {}", format_number(macro_f1), path.display()))
}

fn compare_approx(ctx: &Context) -> Outcome<String> {
    let params = ctx.psds()?;
    let intersection = ctx.intersection()?;
    let grid = Grid::parse(&ctx.args.grid)?.thresholds();
    let curves = intersection_curves(&ctx.dataset, &intersection)?;
    let exact = psd_roc_from_curves(&curves, &params)?;
    let (approx, approx_roc) = approx_psds(&ctx.dataset, &grid, &intersection, &params)?;
    let mut report = ctx.report(CurveKind::PsdRoc, "efpr", &["etpr"]);
    for (name, roc) in [("exact", &exact), ("approx", &approx_roc)] {
        let points = roc.efpr.iter().zip(&roc.etpr).map(|(&e, &t)| (e, vec![t])).collect();
        report.series.push(CurveSeries::from_points(name, points));
    }
    report.scalars.insert("exact_psds".into(), exact.psds);
    report.scalars.insert("approx_psds".into(), approx);
    report.scalars.insert("difference".into(), exact.psds - approx);
    report.scalars.insert("grid_size".into(), grid.len() as f64);
    let path = ctx.write("compare_approx", &report, ctx.format(Format::Json))?;
    Ok(format!("exact={} approx={} -> {}", format_number(exact.psds), format_number(approx), path.display()))
}

fn segment(ctx: &Context) -> Outcome<String> {
    let curves = segment_curves(&ctx.dataset, ctx.args.segment_length)?;
    let mut report = ctx.report(CurveKind::Roc, "fpr", &["tpr", "threshold"]);
    for curve in &curves {
        let roc = match segment_roc(curve) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{e}; skipped");
                continue;
            }
        };
        let reps = crate::metrics::representative_thresholds(&curve.thresholds);
        let area = auc(&roc, 1.0)?;
        report.scalars.insert(format!("auc[{}]", curve.class_name), area);
        let points = roc.iter().zip(reps).map(|(&(f, t), tau)| (f, vec![t, tau])).collect();
        report.series.push(CurveSeries::from_points(&curve.class_name, points));
    }
    let path = ctx.write("segment_roc", &report, ctx.format(Format::Csv))?;
    Ok(format!("{} classes -> {}", report.series.len(), path.display()))
}
