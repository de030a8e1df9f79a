use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

fn run(args: &[&str], scores: &Path, gt: &Path, durations: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sed-curves"))
        .args(args)
        .arg("--scores")
        .arg(scores)
        .arg("--gt")
        .arg(gt)
        .arg("--durations")
        .arg(durations)
        .arg("--output")
        .arg(out)
        .output()
        .unwrap()
}

fn run_toy(args: &[&str], out: &Path) -> Output {
    let t = toy();
    run(args, &t.join("scores"), &t.join("ground_truth.tsv"), &t.join("durations.tsv"), out)
}

#[test]
fn every_command_succeeds_on_the_toy_set() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["validate", "psds", "psd-roc", "pr-curve", "best-threshold", "compare-approx", "segment-roc"] {
        let out = run_toy(&[cmd, "--max-efpr", "2000"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1, "{cmd}");
    }
    for file in
        ["psds.json", "psd_roc.csv", "pr_curve.csv", "best_threshold.json", "compare_approx.json", "segment_roc.csv"]
    {
        assert!(dir.path().join(file).is_file(), "{file}");
    }
}

#[test]
fn toy_pr_curve_has_expected_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_toy(&["pr-curve", "--collar", "1", "--mode", "collar"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("pr_curve.csv")).unwrap();
    assert!(csv.starts_with("series,threshold,precision,recall,f1,n_tp,n_fp\n"));
    // in clip `collar`, detection (2, 7) matches the annotation with a 1 s collar below 0.5
    assert!(csv.contains("A,0.45,0.5,0.5,0.5,1,1\n"), "{csv}");
    assert!(csv.contains("A,0.75,1,0.5,0.666666666667,1,0\n"), "{csv}");
}

#[test]
fn json_format_is_selectable() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_toy(&["psd-roc", "--format", "json", "--max-efpr", "2000"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("psd_roc.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "psd_roc");
    assert!(v["scalars"]["psds"].as_f64().is_some());
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy();
    let out =
        run(&["psds"], &dir.path().join("nope"), &t.join("ground_truth.tsv"), &t.join("durations.tsv"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run_toy(&["psds", "--grid", "cubic"], dir.path());
    assert_eq!(out.status.code(), Some(0), "grid is only read by compare-approx");
    let out = run_toy(&["compare-approx", "--grid", "cubic"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_dataset_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy();
    let gt = dir.path().join("gt.tsv");
    fs::write(&gt, "filename\tonset\toffset\tevent_label\ncollar.wav\t2.0\t70.0\tA\n").unwrap();
    let out = run(&["validate"], &t.join("scores"), &gt, &t.join("durations.tsv"), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("clip `collar`") && msg.contains("(2, 70)"), "{msg}");
}

#[test]
fn psds_report_on_the_toy_set() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["psds", "--dtc", "0.7", "--gtc", "0.7", "--alpha-st", "1", "--max-efpr", "100"];
    assert_eq!(run_toy(&args, dir.path()).status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("psds.json")).unwrap()).unwrap();
    let psds = v["scalars"]["psds"].as_f64().unwrap();
    assert!((-0.5..=1.0).contains(&psds), "{psds}");
    assert_eq!(v["metadata"]["alpha_st"], "1");
    assert!(v["series"]["A"]["efpr"].is_array());
}

#[test]
fn grid_psds_does_not_exceed_exact_without_spread_penalty() {
    let dir = tempfile::tempdir().unwrap();
    for max_efpr in ["100", "2000"] {
        let args = ["compare-approx", "--grid", "linear:50:0.01:0.99", "--alpha-st", "0", "--max-efpr", max_efpr];
        assert_eq!(run_toy(&args, dir.path()).status.code(), Some(0));
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("compare_approx.json")).unwrap()).unwrap();
        let s = &v["scalars"];
        assert!(s["approx_psds"].as_f64().unwrap() <= s["exact_psds"].as_f64().unwrap());
        assert!(s["difference"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn outputs_do_not_depend_on_jobs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["psds", "psd-roc", "pr-curve", "compare-approx", "segment-roc"] {
        for (dir, jobs) in [(&a, "1"), (&b, "4")] {
            assert_eq!(run_toy(&[cmd, "--jobs", jobs, "--max-efpr", "2000"], dir.path()).status.code(), Some(0));
        }
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}
