use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kst")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

const TRAIN_1D: &str = "0.1\n0.3\n0.35\n0.6\n0.9\n";

#[test]
fn fit_then_score_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN_1D);
    let queries = write(dir.path(), "q.csv", "0.2\n0.5\n2.0\n");
    let model = path(dir.path(), "m.kstd");
    let out = kst(&["fit", "--data", &train, "--length-scale", "0.3", "--model", &model]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("squared_exponential"));

    let from_file = kst(&["score", "--data", &queries, "--model", &model]);
    let refit = kst(&["score", "--data", &queries, "--train", &train, "--length-scale", "0.3"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, refit.stdout);
    let text = String::from_utf8(from_file.stdout).unwrap();
    let scores: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(scores.len(), 3);
    assert!(scores[0] > scores[2] && scores[1] > scores[2]);
}

#[test]
fn kde_scoring_path() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN_1D);
    let queries = write(dir.path(), "q.csv", "0.3\n5.0\n");
    let out = kst(&["score", "--method", "kde", "--data", &queries, "--train", &train, "--bandwidth", "0.2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn malformed_csv_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "1,2\nabc,4\n");
    let out = kst(&["fit", "--data", &bad, "--model", &path(dir.path(), "m")]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}

#[test]
fn missing_file_and_bad_flags_exit_two() {
    assert_eq!(code(&kst(&["fit", "--data", "/nonexistent/x.csv", "--model", "/tmp/never"])), 2);
    assert_eq!(code(&kst(&["score", "--no-such-flag"])), 2);
}

#[test]
fn invalid_hyperparameters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN_1D);
    let out = kst(&["fit", "--data", &train, "--alpha", "0", "--model", &path(dir.path(), "m")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn grid_export_over_three_dimensions_is_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", "0,0,0\n1,0,0\n0,1,1\n");
    let out = kst(&["grid-export", "--data", &train, "--length-scale", "1"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn sampling_the_laplacian_is_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN_1D);
    let out = kst(&["sample", "--data", &train, "--kernel", "laplacian", "--length-scale", "0.3", "--n-samples", "5"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN_1D);
    let out = kst(&["fit", "--data", &train, "--sigma0-sq", "1e200", "--length-scale", "0.3", "--model", &path(dir.path(), "m")]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn grid_export_1d_resolution_five() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN_1D);
    let out = kst(&["grid-export", "--data", &train, "--length-scale", "0.3", "--bounds", "0:1", "--resolution", "5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let xs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn grid_export_2d_row_major() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", "0,0\n1,0\n0,1\n0.5,0.5\n");
    let out_path = path(dir.path(), "grid.csv");
    let out = kst(&[
        "grid-export", "--data", &train, "--length-scale", "0.5", "--bounds", "-1:2", "--bounds", "-1:2", "--out", &out_path,
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&out_path).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4096);
    assert_eq!(&rows[0][..2], &[-1.0, -1.0]);
    assert_eq!(rows[1][0], -1.0);
    assert!(rows[1][1] > -1.0);
    assert_eq!(&rows[4095][..2], &[2.0, 2.0]);
}

#[test]
fn sample_is_byte_identical_for_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN_1D);
    let run = |seed: &str, name: &str| {
        let out_path = path(dir.path(), name);
        let grid_path = path(dir.path(), &format!("{name}.grid"));
        let out = kst(&[
            "sample", "--data", &train, "--length-scale", "0.3", "--n-samples", "200", "--seed", seed, "--out", &out_path,
            "--grid-out", &grid_path, "--resolution", "16",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(&out_path).unwrap(), fs::read(&grid_path).unwrap())
    };
    let a = run("7", "a.csv");
    let b = run("7", "b.csv");
    let c = run("8", "c.csv");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
    assert_eq!(String::from_utf8(a.0).unwrap().lines().count(), 201);
}

#[test]
fn fantasy_sampling_is_reproducible() {
    let args = [
        "sample", "--fantasy", "6", "--dim", "2", "--length-scale", "1", "--alpha", "3", "--beta", "0.01", "--n-samples", "5",
        "--burn-in", "20", "--seed", "3",
    ];
    let a = kst(&args);
    let b = kst(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert_eq!(text.lines().nth(1).unwrap(), "0.0,0.0");
}

#[test]
fn synthetic_novelty_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let scores = path(dir.path(), &format!("{tag}.scores"));
        let report = path(dir.path(), &format!("{tag}.report"));
        let grid = path(dir.path(), &format!("{tag}.grid"));
        let out = kst(&[
            "novelty", "--synthetic", "--seed", "4", "--method", "kde", "--out", &scores, "--report", &report, "--grid-out", &grid,
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        [scores, report, grid].map(|p| fs::read(p).unwrap())
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let report = String::from_utf8(a[1].clone()).unwrap();
    let auc: f64 = report.lines().find_map(|l| l.strip_prefix("auc=")).unwrap().parse().unwrap();
    assert!(auc > 0.9, "{report}");
    assert!(!report.contains("time."));
    assert_eq!(String::from_utf8(a[2].clone()).unwrap().lines().count(), 14);
}

#[test]
fn synthetic_reconstruction_single_cell() {
    let out = kst(&["reconstruct", "--synthetic", "--grid", "single", "--sigma0-sq", "0.1", "--seed", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,score,label,prediction"));
    let wrong = text.lines().skip(1).filter(|l| {
        let c: Vec<&str> = l.split(',').collect();
        c[2] != c[3]
    });
    assert!(wrong.count() <= 7);
}

#[test]
fn gridsearch_writes_the_trace() {
    let out = kst(&["gridsearch", "--task", "novelty", "--synthetic", "--method", "kde", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("cell,metric,error"));
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn relnovel_flags_the_top_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let mut bg = String::new();
    let mut tg = String::new();
    for i in 0..40 {
        let x = i as f64 / 40.0;
        bg += &format!("{x},{}\n", 1.0 - x);
        tg += &format!("{},{}\n", x + 0.01, 1.0 - x);
    }
    for i in 0..4 {
        tg += &format!("{},3.0\n", 3.0 + 0.01 * i as f64);
    }
    let bg = write(dir.path(), "bg.csv", &bg);
    let tg = write(dir.path(), "tg.csv", &tg);
    let out = kst(&["relnovel", "--background", &bg, "--target", &tg, "--top-fraction", "0.05", "--length-scale", "0.3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let flagged: Vec<usize> =
        text.lines().skip(1).filter(|l| l.ends_with(",1")).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(flagged.len(), 3);
    assert!(flagged.iter().all(|&i| i >= 40));
}
