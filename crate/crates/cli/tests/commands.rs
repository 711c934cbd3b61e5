use ckblowup::io::{graph_from_json, graph_to_json};
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckblowup"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn ckblowup")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn haggkvist_file(dir: &TempDir) {
    let out = bin(
        &[
            "generate",
            "--family",
            "haggkvist",
            "--k",
            "3",
            "--m",
            "1",
            "--out",
            "hk.json",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn check_reports_the_extremal_example_below_the_bound() {
    let dir = TempDir::new().unwrap();
    haggkvist_file(&dir);
    let out = bin(&["check", "hk.json"], dir.path());
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["delta_star"], 3);
    assert_eq!(v["n"], 6);
    assert_eq!(v["conjectured_factor_bound"]["holds"], false);
}

#[test]
fn exact_tile_on_the_extremal_example() {
    let dir = TempDir::new().unwrap();
    haggkvist_file(&dir);
    let out = bin(
        &["tile", "hk.json", "--exact", "--out", "tiling.json"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["size"], 5);
    assert_eq!(v["optimal"], true);
    let tiling: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tiling.json")).unwrap())
            .unwrap();
    assert_eq!(tiling["cycles"].as_array().map(Vec::len), Some(5));
}

#[test]
fn swap3_and_constructive_dispatch() {
    let dir = TempDir::new().unwrap();
    let out = bin(
        &[
            "generate", "--family", "random", "--k", "3", "--n", "12", "--deltas", "8,8,8",
            "--seed", "4", "--out", "r.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out = bin(
        &["tile", "r.json", "--swap3", "--trace", "moves.jsonl"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_json(&out)["size"].as_u64().unwrap() >= 11);
    assert!(dir.path().join("moves.jsonl").exists());

    // Constructive refuses below its degree threshold with the precondition code.
    haggkvist_file(&dir);
    let out = bin(
        &[
            "tile",
            "hk.json",
            "--constructive",
            "--epsilon",
            "0.05",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error["));
}

#[test]
fn verify_certifies_b1() {
    let dir = TempDir::new().unwrap();
    let out = bin(&["verify", "--lemma", "B1", "--out", "certs"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout_json(&out)["certified"], true);
    let cert: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certs/B1.json")).unwrap())
            .unwrap();
    assert_eq!(cert["system"], "B1");
}

#[test]
fn verify_fails_on_the_weakened_system() {
    let dir = TempDir::new().unwrap();
    let out = bin(&["verify", "--lemma", "B1-weak"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_json(&out)["feasible_point"].is_object());
}

#[test]
fn generated_files_round_trip_byte_identically() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec![
            "generate", "--family", "complete", "--k", "4", "--n", "3", "--out", "g.json",
        ],
        vec![
            "generate",
            "--family",
            "haggkvist",
            "--k",
            "4",
            "--m",
            "2",
            "--out",
            "g.json",
        ],
        vec![
            "generate", "--family", "cover", "--gamma", "7/9", "--out", "g.json",
        ],
        vec![
            "generate", "--family", "random", "--k", "3", "--n", "7", "--deltas", "4,5,6",
            "--seed", "9", "--out", "g.json",
        ],
    ] {
        let out = bin(&args, dir.path());
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = std::fs::read_to_string(dir.path().join("g.json")).unwrap();
        let g = graph_from_json(&text).unwrap();
        assert_eq!(graph_to_json(&g), text, "{args:?}");
    }
}

#[test]
fn random_family_requires_a_seed() {
    let dir = TempDir::new().unwrap();
    let out = bin(
        &[
            "generate", "--family", "random", "--k", "3", "--n", "5", "--deltas", "3,3,3",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn malformed_json_reports_its_position() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        "{\n  \"format\": \"ckblowup/1\",\n  \"k\": 3,,\n}",
    )
    .unwrap();
    let out = bin(&["check", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("error[input]"), "{err}");
}

#[test]
fn unknown_flags_are_rejected() {
    let dir = TempDir::new().unwrap();
    let out = bin(&["check", "x.json", "--frobnicate"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = TempDir::new().unwrap();
    haggkvist_file(&dir);
    let out = bin(
        &[
            "linking",
            "hk.json",
            "--eta",
            "0.01",
            "--t",
            "5",
            "--budget-ms",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn rates(dir: &Path, from: &str, to: &str, trials: &str) -> Vec<(Vec<usize>, f64)> {
    let out = bin(
        &[
            "experiment",
            "--k",
            "3",
            "--n",
            "9",
            "--from",
            from,
            "--to",
            to,
            "--trials",
            trials,
            "--seed",
            "7",
            "--out",
            "e.csv",
        ],
        dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut r = csv::Reader::from_path(dir.join("e.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "k",
            "n",
            "delta_1",
            "delta_2",
            "delta_3",
            "trials",
            "factor_rate",
            "mean_size",
            "mean_millis"
        ]
    );
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            let deltas = (2..5).map(|i| rec[i].parse().unwrap()).collect();
            (deltas, rec[6].parse().unwrap())
        })
        .collect()
}

#[test]
fn experiment_extreme_rows() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        rates(dir.path(), "9,9,9", "9,9,9", "5"),
        vec![(vec![9, 9, 9], 1.0)]
    );
    assert_eq!(
        rates(dir.path(), "0,0,0", "0,0,0", "5"),
        vec![(vec![0, 0, 0], 0.0)]
    );
}

#[test]
fn experiment_rates_rise_along_each_axis() {
    let dir = TempDir::new().unwrap();
    let rows = rates(dir.path(), "5,5,5", "8,8,8", "20");
    assert_eq!(rows.len(), 64);
    let rate = |d: &[usize]| rows.iter().find(|(x, _)| x == d).unwrap().1;
    // Soft check: sampling noise may break strict monotonicity by a trial or two.
    let mut drops = 0;
    for (d, r) in &rows {
        for axis in 0..3 {
            if d[axis] < 8 {
                let mut up = d.clone();
                up[axis] += 1;
                if rate(&up) + 0.1 < *r {
                    drops += 1;
                }
            }
        }
    }
    assert!(drops <= 3, "{drops} noticeable decreases");
    assert_eq!(rate(&[8, 8, 8]), 1.0);
}

#[test]
fn experiment_refuses_oversized_grids() {
    let dir = TempDir::new().unwrap();
    let out = bin(
        &[
            "experiment",
            "--k",
            "3",
            "--n",
            "9",
            "--from",
            "0,0,0",
            "--to",
            "9,9,9",
            "--trials",
            "100",
            "--seed",
            "1",
            "--max-runs",
            "1000",
            "--out",
            "e.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("100000 tiler runs"));
}

#[test]
fn dot_export_names_every_part() {
    let dir = TempDir::new().unwrap();
    haggkvist_file(&dir);
    let out = bin(&["dot", "hk.json"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.trim_start().starts_with("graph") || text.trim_start().starts_with("strict graph"),
        "{text}"
    );
}
