use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn twedge(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_twedge"));
    cmd.current_dir(dir).args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.env_remove("RUST_BACKTRACE");
    for (k, _) in std::env::vars() {
        if k.starts_with("TWEDGE_") {
            cmd.env_remove(k);
        }
    }
    cmd.output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = twedge(dir, args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Data rows of a CSV file, skipping `#` metadata lines; the header is returned separately.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let j = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[j]).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn invalid_configuration_exits_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["tabulate", "--beta", "3"][..],
        &["tabulate", "--beta", "2", "--m-max", "3"],
        &["tabulate", "--s-min", "-10", "--s-max", "6", "--grid-step", "0.3"],
        &["sample", "--k", "5", "--n", "3"],
        &["compare", "--percentiles", "0.5,0.4"],
        &["tabulate", "--no-such-flag"],
    ] {
        let out = twedge(dir.path(), args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let file = dir.path().join("bad.toml");
    fs::write(&file, "seeed = 3\n").unwrap();
    let out = twedge(dir.path(), &["tabulate", "--config", file.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_guard_exits_3_with_estimate() {
    let dir = TempDir::new().unwrap();
    let out = twedge(dir.path(), &["sample", "--work-budget", "1000"], &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("estimated cost"), "{err}");
    assert!(!dir.path().join("twedge-out/sample.csv").exists());
}

#[test]
fn reruns_are_byte_identical_and_cache_independent() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["tabulate", "--out", "a"]);
    ok(dir.path(), &["tabulate", "--out", "b"]);
    ok(dir.path(), &["tabulate", "--out", "c", "--cache-dir", "fresh"]);
    for name in ["table_beta1.csv", "table_beta2.csv", "table_beta4.csv", "painleve_state.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(name)).unwrap(), "{name}");
        assert_eq!(a, fs::read(dir.path().join("c").join(name)).unwrap(), "{name}");
    }
}

#[test]
fn default_tabulation_covers_the_contract() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["tabulate"]);
    for beta in [1, 2, 4] {
        let path = dir.path().join(format!("twedge-out/table_beta{beta}.csv"));
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# twedge "));
        assert!(text.contains("# config_hash ") && text.contains("# seed 2024"));
        let (header, rows) = read_csv(&path);
        assert_eq!(header, ["s", "F1", "F2", "f1", "f2"]);
        assert_eq!(rows.len(), 1601);
        assert_eq!((rows[0][0], rows[1600][0]), (-10.0, 6.0));
    }
}

#[test]
fn tabulated_interlacing_column() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["tabulate", "--beta", "1,4"]);
    let (h1, r1) = read_csv(&dir.path().join("twedge-out/table_beta1.csv"));
    let (h4, r4) = read_csv(&dir.path().join("twedge-out/table_beta4.csv"));
    let (f1, f4) = (column(&h1, &r1, "F2"), column(&h4, &r4, "F1"));
    let sup = f1.iter().zip(&f4).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(sup <= 1e-6, "{sup}");
}

#[test]
fn environment_sits_between_flags_and_file() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.toml"), "seed = 5\nreplicates = 7\nn = 3\nk = 2\n").unwrap();
    let seed_of = |args: &[&str], env: &[(&str, &str)]| {
        let mut all = vec!["sample", "--config", "run.toml"];
        all.extend(args);
        let out = twedge(dir.path(), &all, env);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let side = json(&dir.path().join("twedge-out/sample.json"));
        (side["seed"].as_u64().unwrap(), side["replicates"].as_u64().unwrap())
    };
    assert_eq!(seed_of(&[], &[]), (5, 7));
    assert_eq!(seed_of(&[], &[("TWEDGE_SEED", "6")]), (6, 7));
    assert_eq!(seed_of(&["--seed", "8"], &[("TWEDGE_SEED", "6")]), (8, 7));
}

#[test]
fn corrupted_cache_is_recomputed_with_notice() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["tabulate", "--beta", "2", "--m-max", "1", "--out", "a"]);
    let cache: Vec<PathBuf> = fs::read_dir(dir.path().join(".twedge-cache")).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!cache.is_empty());
    fs::write(&cache[0], b"not a state").unwrap();
    let mut bytes = fs::read(&cache[cache.len() - 1]).unwrap();
    if cache.len() > 1 {
        bytes[4] = 99;
        fs::write(&cache[cache.len() - 1], &bytes).unwrap();
    }
    let out = ok(dir.path(), &["tabulate", "--beta", "2", "--m-max", "1", "--out", "b"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("notice:") && err.contains("recomputing"), "{err}");
    if cache.len() > 1 {
        assert!(err.contains("cache format version 99"), "{err}");
    }
    let name = "table_beta2.csv";
    assert_eq!(fs::read(dir.path().join("a").join(name)).unwrap(), fs::read(dir.path().join("b").join(name)).unwrap());
    let out = ok(dir.path(), &["tabulate", "--beta", "2", "--m-max", "1", "--out", "c"]);
    assert!(out.stderr.is_empty());
}

#[test]
fn samples_do_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let args = ["sample", "--n", "30", "--replicates", "300", "--model", "dense"];
    let mut runs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = format!("w{threads}");
        let mut all = args.to_vec();
        all.extend(["--out", &out_dir]);
        let out = twedge(dir.path(), &all, &[("RAYON_NUM_THREADS", threads)]);
        assert!(out.status.success());
        runs.push(fs::read(dir.path().join(out_dir).join("sample.csv")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn one_by_one_gaussian_is_normal() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["sample", "--n", "1", "--k", "1", "--replicates", "20000", "--model", "dense"]);
    let (_, rows) = read_csv(&dir.path().join("twedge-out/sample.csv"));
    // (λ - √2)·√2 with λ ~ N(0, 1): mean -2, variance 2.
    let x: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean + 2.0).abs() < 0.05, "{mean}");
    assert!((var / 2.0 - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn densities_normalize_and_order_by_mode() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), &["density", "--beta", "1", "--m-max", "4", "--s-min", "-12", "--s-max", "5", "--grid-step", "0.02"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
    let (header, rows) = read_csv(&dir.path().join("twedge-out/density_beta1.csv"));
    assert_eq!(header, ["s", "f1", "f2", "f3", "f4"]);
    assert_eq!(rows.len(), 851);
    assert_eq!((rows[0][0], rows[850][0]), (-12.0, 5.0));
    let mut modes = Vec::new();
    for m in 1..=4 {
        let f = column(&header, &rows, &format!("f{m}"));
        let mass = 0.02 * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]));
        assert!((mass - 1.0).abs() <= 2e-3, "m = {m}: {mass}");
        let i = (0..f.len()).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
        modes.push(rows[i][0]);
    }
    assert!(modes.windows(2).all(|w| w[0] > w[1]), "{modes:?}");
}

#[test]
fn verify_passes_and_reports_every_failure_when_tightened() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), &["verify"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().count() >= 10 && stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
    let out = twedge(dir.path(), &["verify", "--tolerance-scale", "0.01", "--format", "json"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), json(&dir.path().join("twedge-out/verify.json"))["checks"].as_array().unwrap().len());
    let failed: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert!(failed.iter().any(|l| l.contains("lemma identity residual n = 1")), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("{} verification check(s) failed", failed.len())));
}

#[test]
fn compare_reads_a_saved_batch() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["sample", "--ensemble", "wishart", "--wishart-p", "20", "--wishart-n", "40", "--replicates", "400", "--k", "3"]);
    ok(dir.path(), &["compare", "--batch", "twedge-out/sample.csv", "--format", "json"]);
    let report = json(&dir.path().join("twedge-out/compare.json"));
    let rows = report["proportions"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let p: Vec<f64> = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
    }
    assert_eq!(report["std_errors"].as_array().unwrap().len(), 3);
    let out = twedge(dir.path(), &["compare", "--batch", "twedge-out/sample.csv", "--beta", "2"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_tables_match_csv() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["tabulate", "--beta", "2", "--format", "json"]);
    ok(dir.path(), &["tabulate", "--beta", "2"]);
    let doc = json(&dir.path().join("twedge-out/table_beta2.json"));
    let (header, rows) = read_csv(&dir.path().join("twedge-out/table_beta2.csv"));
    let from_json: Vec<f64> = doc["cdf"][1].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(from_json, column(&header, &rows, "F2"));
    assert_eq!(doc["seed"], 2024);
}
