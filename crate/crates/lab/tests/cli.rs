use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rwqda(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rwqda"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run rwqda")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = rwqda(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SIM: &str =
    "p = 40\ndelta = 0.9\nzeta = 0.1\ntheta = 0.1\nalpha = 0.1\nbeta = 1.2\ngamma = 0.6\n";

#[test]
fn regions_reports_impossible_with_reasons() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "params.txt",
        "p = 1000\ndelta = 0.8\nzeta = 0.6\ntheta = 0.45\nalpha = 0.45\nbeta = 1.8\ngamma = 0.6\n",
    );
    let out = ok(&["regions", "--config", "params.txt"], dir.path());
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("Impossible"));
    assert!(
        out.lines().filter(|l| l.starts_with("  ")).count() >= 1,
        "{out}"
    );
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = rwqda(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = rwqda(&["regions"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.csv", "label,a\n0,1\n1,oops\n");
    let out = rwqda(
        &[
            "fit",
            "--data",
            "bad.csv",
            "--label-column",
            "label",
            "--variant",
            "lda",
            "--out",
            "m.txt",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv:3"));
    let out = rwqda(&["regions", "--config", "missing.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_fit_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "sim.txt", SIM);
    ok(
        &[
            "simulate",
            "--config",
            "sim.txt",
            "--seed",
            "4",
            "--out",
            "train.csv",
            "--truth",
            "truth.txt",
        ],
        d,
    );
    ok(
        &[
            "simulate",
            "--config",
            "sim.txt",
            "--seed",
            "4",
            "--out",
            "again.csv",
        ],
        d,
    );
    assert_eq!(
        std::fs::read(d.join("train.csv")).unwrap(),
        std::fs::read(d.join("again.csv")).unwrap()
    );
    let header = std::fs::read_to_string(d.join("train.csv")).unwrap();
    assert!(header.starts_with("label,x1,x2,"));

    for variant in ["qdaw", "qdafs", "ideal-qda", "algorithm2", "lda"] {
        let model = format!("{variant}.model");
        ok(
            &[
                "fit",
                "--data",
                "train.csv",
                "--label-column",
                "label",
                "--variant",
                variant,
                "--truth",
                "truth.txt",
                "--out",
                &model,
            ],
            d,
        );
        let pred = format!("{variant}.csv");
        ok(
            &[
                "predict",
                "--model",
                &model,
                "--data",
                "train.csv",
                "--ignore",
                "label",
                "--out",
                &pred,
            ],
            d,
        );
        let text = std::fs::read_to_string(d.join(&pred)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("id,score,label"));
        let rows: Vec<&str> = lines.collect();
        assert!(!rows.is_empty());
        for r in rows {
            let f: Vec<&str> = r.split(',').collect();
            assert_eq!(f.len(), 3);
            let score: f64 = f[1].parse().unwrap();
            assert_eq!(f[2], if score > 0.0 { "1" } else { "0" });
        }
    }
    let out = rwqda(
        &[
            "fit",
            "--data",
            "train.csv",
            "--label-column",
            "label",
            "--variant",
            "qdaw",
            "--out",
            "x.model",
        ],
        d,
    );
    assert_eq!(
        out.status.code(),
        Some(1),
        "known-precision rule without --truth"
    );
}

#[test]
fn bench_writes_a_deterministic_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "sim.txt", "p = 20\ndelta = 0.5\nn = 80\nzeta = 0.1\ntheta = 0.1\nalpha = 0.1\nbeta = 1.2\ngamma = 0.6\n");
    ok(
        &[
            "simulate",
            "--config",
            "sim.txt",
            "--seed",
            "2",
            "--out",
            "corpus.csv",
        ],
        d,
    );
    write(
        d,
        "bench.txt",
        "n_splits = 3\nq_grid = 0.5, 1.0\nscreen = 0.1:5\nc_min = -5\nc_max = 5\nt_step = 0.25\n",
    );
    let args = |threads: &'static str, out: &'static str| {
        vec![
            "bench",
            "--config",
            "bench.txt",
            "--data",
            "corpus.csv",
            "--label-column",
            "label",
            "--seed",
            "1",
            "--threads",
            threads,
            "--out",
            out,
        ]
    };
    let summary = ok(&args("1", "r1.csv"), d);
    ok(&args("3", "r3.csv"), d);
    let r1 = std::fs::read_to_string(d.join("r1.csv")).unwrap();
    assert_eq!(r1, std::fs::read_to_string(d.join("r3.csv")).unwrap());
    assert!(r1.starts_with("split,method,q1,q2,delta,L,t,C,train_err,test_err\n"));
    assert_eq!(r1.lines().count(), 1 + 3 * 2);
    assert!(summary.contains("qda not worse than lda"));
}

#[test]
fn phase_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "grid.txt",
        "axis1 = zeta:0.1:0.6:2\naxis2 = theta:0.1:0.4:2\np = 100\ndelta = 0.8\nalpha = 0.2\nbeta = 1.2\n\
         gamma = 0.6\nclassifiers = qdaw, lda\nreps = 2\nn_test = 40\n",
    );
    for t in ["1", "2"] {
        let csv = format!("g{t}.csv");
        let svg = format!("g{t}.svg");
        ok(
            &[
                "phase",
                "--grid",
                "grid.txt",
                "--seed",
                "8",
                "--threads",
                t,
                "--out-csv",
                &csv,
                "--out-svg",
                &svg,
            ],
            d,
        );
    }
    assert_eq!(
        std::fs::read(d.join("g1.csv")).unwrap(),
        std::fs::read(d.join("g2.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(d.join("g1.svg")).unwrap(),
        std::fs::read(d.join("g2.svg")).unwrap()
    );
}
