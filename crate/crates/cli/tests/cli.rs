use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fairstream_core::report::{distance_to_ideal, read_summary};

/// Runs the binary with a whitespace-separated argument line.
fn fairstream(dir: &Path, line: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairstream"))
        .args(line.split_whitespace())
        .current_dir(dir)
        .env_remove("FAIRSTREAM_OUT")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, line: &str) -> String {
    let out = fairstream(dir, line);
    assert!(out.status.success(), "{line}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// A 12-chunk stream of 100 instances per chunk in `dir/s.csv`.
fn small_stream(dir: &Path) -> PathBuf {
    ok(dir, "generate --chunks 12 --n 25 --drifts 0 --seed 5 --out s.csv");
    dir.join("s.csv")
}

#[test]
fn generate_writes_stream_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_stream(dir.path());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("a1,a2,sa,class"));
    assert_eq!(text.lines().count(), 1 + 12 * 100);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["chunk_size"], 100);
    assert_eq!(meta["config"]["spp_schedule"].as_array().unwrap().len(), 12);
}

#[test]
fn run_writes_trace_summary_and_config() {
    let dir = tempfile::tempdir().unwrap();
    small_stream(dir.path());
    let stdout = ok(
        dir.path(),
        "run --data s.csv --classifier knn --strategy m3 --correction massaging --epsilon 0 --seed 7 --out-dir res",
    );
    assert!(stdout.contains("s_knn_m3_massaging"), "{stdout}");
    let res = dir.path().join("res");
    let trace = fs::read_to_string(res.join("s_knn_m3_massaging.trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 11);
    let summary = read_summary(&res.join("s_knn_m3_massaging.summary.json")).unwrap();
    assert_eq!(summary.evaluated_chunks, 11);
    assert!(res.join("s_knn_m3_massaging.config.json").exists());
}

#[test]
fn saved_config_reproduces_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    small_stream(dir.path());
    ok(
        dir.path(),
        "run --data s.csv --classifier ht --strategy m2 --correction reweighting --out-dir a",
    );
    ok(dir.path(), "run --config a/s_ht_m2_reweighting.config.json --out-dir b");
    let read = |d: &str| fs::read(dir.path().join(d).join("s_ht_m2_reweighting.trace.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    small_stream(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_fairstream"))
        .args(["run", "--data", "s.csv", "--classifier", "nb", "--strategy", "b_nosa"])
        .current_dir(dir.path())
        .env("FAIRSTREAM_OUT", "elsewhere")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("elsewhere/s_nb_b_nosa.summary.json").exists());
}

#[test]
fn sweep_matches_individual_runs_and_report_is_sorted() {
    let dir = tempfile::tempdir().unwrap();
    small_stream(dir.path());
    ok(
        dir.path(),
        "sweep --data s.csv --classifiers nb,knn --strategies m1,m4,b_nosa --corrections massaging,reweighting --out-dir sw",
    );
    let sw = dir.path().join("sw");
    let mut summaries: Vec<PathBuf> = fs::read_dir(&sw)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".summary.json"))
        .collect();
    summaries.sort();
    // 2 classifiers x (2 strategies x 2 corrections + 1 baseline).
    assert_eq!(summaries.len(), 10);

    for (classifier, strategy, correction) in [
        ("nb", "m4", "reweighting"),
        ("knn", "b_nosa", "massaging"),
        ("knn", "m1", "massaging"),
    ] {
        let line = format!(
            "run --data s.csv --classifier {classifier} --strategy {strategy} --correction {correction} --out-dir one"
        );
        ok(dir.path(), &line);
        let label = if strategy == "b_nosa" {
            format!("s_{classifier}_{strategy}")
        } else {
            format!("s_{classifier}_{strategy}_{correction}")
        };
        let name = format!("{label}.trace.csv");
        assert_eq!(
            fs::read(sw.join(&name)).unwrap(),
            fs::read(dir.path().join("one").join(&name)).unwrap(),
            "{label}"
        );
    }

    ok(dir.path(), "report sw --out table.csv");
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let labels: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels.len(), 10);
    let mut oracle: Vec<(f64, String)> = summaries
        .iter()
        .map(|p| {
            let s = read_summary(p).unwrap();
            (distance_to_ideal(s.mean_discrimination, s.mean_accuracy), s.label)
        })
        .collect();
    oracle.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(labels[0], oracle[0].1);
    let distances: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(distances.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn invalid_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = fairstream(dir.path(), "run --bogus");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = fairstream(dir.path(), "run --strategy m9");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m9"));

    let out = fairstream(dir.path(), "run --data missing.csv");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
    assert!(out.stdout.is_empty());

    small_stream(dir.path());
    let out = fairstream(dir.path(), "run --data s.csv --chunk 1000");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("full chunk"));
}
