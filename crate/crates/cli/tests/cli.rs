use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn unn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unn")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = unn(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_certain_csv(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("certain.csv");
    let mut text = String::from("x0,x1,label\n");
    for i in 0..30 {
        let t = i as f64 * 0.1;
        text.push_str(&format!("{},{},left\n", -2.0 - t, t));
        text.push_str(&format!("{},{},right\n", 2.0 + t, -t));
    }
    fs::write(&path, text).unwrap();
    path
}

const GAUSSIAN_PAIRS: &str = r#"{"label":"blue","pdf":{"type":"gauss","mean":[-2.0],"sigmas":[0.125],"truncation":4.0}}
{"label":"blue","pdf":{"type":"gauss","mean":[-2.0],"sigmas":[0.55],"truncation":4.0}}
{"label":"red","pdf":{"type":"gauss","mean":[1.9],"sigmas":[0.125],"truncation":4.0}}
{"label":"red","pdf":{"type":"gauss","mean":[2.5],"sigmas":[0.15],"truncation":4.0}}
"#;

const BIMODAL: &str = r#"{"label":"red","pdf":{"type":"mixture","atoms":[{"at":[2.0,0.0],"weight":0.5},{"at":[10.0,0.0],"weight":0.5}]}}
{"label":"red","pdf":{"type":"mixture","atoms":[{"at":[0.0,-2.0],"weight":0.5},{"at":[0.0,-10.0],"weight":0.5}]}}
{"label":"red","pdf":{"type":"mixture","atoms":[{"at":[-2.0,0.0],"weight":0.5},{"at":[-10.0,0.0],"weight":0.5}]}}
{"label":"blue","pdf":{"type":"point","at":[0.0,4.0]}}
"#;

#[test]
fn gen_zero_spread_writes_point_masses() {
    let dir = TempDir::new().unwrap();
    let input = write_certain_csv(dir.path());
    let out = dir.path().join("u.jsonl");
    ok(&["gen", "--input", s(&input), "--spread", "0", "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 60);
    assert!(text.lines().all(|l| l.contains(r#""type":"point""#)));
}

#[test]
fn gen_round_trip_keeps_labels_and_dims() {
    let dir = TempDir::new().unwrap();
    let input = write_certain_csv(dir.path());
    for mode in ["mixed", "gaussian"] {
        let out = dir.path().join(format!("{mode}.jsonl"));
        ok(&["gen", "--input", s(&input), "--spread", "0.2", "--mode", mode, "--out", s(&out)]);
        let objects = unn_core::io::read_objects(fs::File::open(&out).unwrap()).unwrap();
        assert_eq!(objects.len(), 60);
        assert!(objects.iter().all(|o| o.dim() == 2));
        assert_eq!(objects.iter().filter(|o| o.label() == Some("left")).count(), 30);
    }
}

#[test]
fn gen_reports_bad_rows() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "x0,label\n1.0,a\nfoo,b\n").unwrap();
    let out = unn(&["gen", "--input", s(&input)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn classify_gaussian_pairs() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("ds.jsonl");
    fs::write(&ds, GAUSSIAN_PAIRS).unwrap();
    let q = dir.path().join("q.csv");
    fs::write(&q, "x0\n0.0\n").unwrap();
    let args = ["classify", "--dataset", s(&ds), "--queries", s(&q), "--n-samples", "100000"];
    let text = ok(&args);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "query_id,label,prob_blue,prob_red,n_q");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "blue");
    let blue: f64 = row[2].parse().unwrap();
    let red: f64 = row[3].parse().unwrap();
    assert!((blue - 0.569).abs() <= 0.015, "{blue}");
    assert!((blue + red - 1.0).abs() <= 1e-6);
    assert_eq!(row[4], "4");
    assert_eq!(text, ok(&args));
}

#[test]
fn classify_empty_queries_writes_header() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("ds.jsonl");
    fs::write(&ds, GAUSSIAN_PAIRS).unwrap();
    let q = dir.path().join("q.jsonl");
    fs::write(&q, "").unwrap();
    assert_eq!(
        ok(&["classify", "--dataset", s(&ds), "--queries", s(&q)]),
        "query_id,label,prob_blue,prob_red,n_q\n"
    );
}

#[test]
fn classify_rejects_dimension_mismatch() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("ds.jsonl");
    fs::write(&ds, GAUSSIAN_PAIRS).unwrap();
    let q = dir.path().join("q.csv");
    fs::write(&q, "x0,x1\n0.0,1.0\n").unwrap();
    let out = unn(&["classify", "--dataset", s(&ds), "--queries", s(&q)]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty() || String::from_utf8_lossy(&out.stdout).lines().count() <= 1);
}

#[test]
fn pivots_do_not_change_output() {
    let dir = TempDir::new().unwrap();
    let input = write_certain_csv(dir.path());
    let ds = dir.path().join("u.jsonl");
    ok(&["gen", "--input", s(&input), "--spread", "0.3", "--out", s(&ds)]);
    let q = dir.path().join("q.csv");
    fs::write(&q, "x0,x1\n0.1,0.0\n-1.0,0.5\n1.5,-0.2\n").unwrap();
    let base = ["classify", "--dataset", s(&ds), "--queries", s(&q), "--k", "2"];
    let plain = ok(&base);
    let mut with_pivots = base.to_vec();
    with_pivots.extend(["--pivots", "8", "--jobs", "1"]);
    assert_eq!(plain, ok(&with_pivots));
}

#[test]
fn compare_bimodal_reds() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("ds.jsonl");
    fs::write(&ds, BIMODAL).unwrap();
    let q = dir.path().join("q.csv");
    fs::write(&q, "x0,x1\n0.0,0.0\n").unwrap();
    let summary = dir.path().join("summary.csv");
    let text = ok(&["compare", "--dataset", s(&ds), "--queries", s(&q), "--summary", s(&summary)]);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[1..5], ["red", "red", "red", "blue"]);
    let acc: f64 = row[5].parse().unwrap();
    assert!((acc - 0.875).abs() <= 0.02);
    let summary = fs::read_to_string(&summary).unwrap();
    for line in summary.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn compare_point_masses_agree() {
    let dir = TempDir::new().unwrap();
    let input = write_certain_csv(dir.path());
    let q = dir.path().join("q.csv");
    fs::write(&q, "x0,x1\n-1.0,0.0\n1.0,0.3\n").unwrap();
    let text = ok(&["compare", "--dataset", s(&input), "--queries", s(&q), "--m-outcomes", "50"]);
    for line in text.lines().skip(1) {
        let row: Vec<&str> = line.split(',').collect();
        assert!(row[1..5].iter().all(|l| *l == row[1]));
        assert_eq!(row[5], "1");
    }
}

#[test]
fn crossval_reports_ten_folds() {
    let dir = TempDir::new().unwrap();
    let input = write_certain_csv(dir.path());
    let args = ["crossval", "--dataset", s(&input), "--seed", "3"];
    let text = ok(&args);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "fold,test_size,accuracy");
    assert_eq!(lines.len(), 1 + 10 + 2);
    assert_eq!(lines[11], "mean,60,1");
    assert_eq!(text, ok(&args));
    let eknn = ok(&["crossval", "--dataset", s(&input), "--method", "eknn", "--m-outcomes", "10"]);
    assert_eq!(eknn.lines().count(), 13);
}

#[test]
fn manet_writes_both_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("manet");
    let args = [
        "manet",
        "--out",
        s(&out),
        "--test-points",
        "50",
        "--power-samples",
        "100",
        "--m-outcomes",
        "20",
        "--grid",
        "5",
        "--n-samples",
        "100",
    ];
    let stdout = ok(&args);
    assert!(stdout.starts_with("unn_accuracy="));
    let grid = fs::read_to_string(out.join("boundary_grid.csv")).unwrap();
    assert_eq!(grid.lines().next().unwrap(), "x,y,prob_red");
    assert_eq!(grid.lines().count(), 26);
    let results = fs::read_to_string(out.join("manet_results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3);
    ok(&args);
    assert_eq!(grid, fs::read_to_string(out.join("boundary_grid.csv")).unwrap());
}
