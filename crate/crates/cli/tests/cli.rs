use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn redblue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redblue")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec(value).unwrap()).unwrap();
    path
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes the (p, ell) gap instance and returns its directory.
fn gengap(tmp: &TempDir, p: usize, ell: usize) -> PathBuf {
    let dir = tmp.path().join(format!("gap-{p}-{ell}"));
    let out = redblue(&["gengap", "--p", &p.to_string(), "--ell", &ell.to_string(), "--out", s(&dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

/// Points on a line with the given roles: 'c' client, 'r' red, 'b' blue.
fn line_instance(points: &[(i64, char)], k_r: usize, k_b: usize) -> Value {
    let matrix: Vec<Vec<i64>> = points.iter().map(|a| points.iter().map(|b| (a.0 - b.0).abs()).collect()).collect();
    let ids = |role: char| -> Vec<usize> { (0..points.len()).filter(|&i| points[i].1 == role).collect() };
    json!({
        "n": points.len(),
        "metric": { "matrix": matrix },
        "clients": ids('c'),
        "red": ids('r'),
        "blue": ids('b'),
        "k_r": k_r,
        "k_b": k_b,
    })
}

#[test]
fn gengap_writes_all_documents() {
    let tmp = TempDir::new().unwrap();
    let dir = gengap(&tmp, 1, 2);
    for name in ["instance.json", "local.json", "global.json", "expected.json"] {
        assert!(dir.join(name).exists(), "{name}");
    }
    let expected = read_json(&dir.join("expected.json"));
    assert_eq!(expected["local_cost"], 11);
    assert_eq!(expected["global_cost"], 3);
    assert_eq!(expected["ratio"], "11/3");

    let out = redblue(&["gengap", "--p", "1", "--ell", "4", "--out", s(&tmp.path().join("v")), "--verify"]);
    assert_eq!(code(&out), 0);
    let report = read_json(&tmp.path().join("v/report.json"));
    assert_eq!(report["local_cost"], 25);
    assert_eq!(report["ratio"], "5");
    assert_eq!(report["local_opt"]["verdict"], "locally-optimal");

    let out = redblue(&["gengap", "--p", "3", "--ell", "4", "--out", s(&tmp.path().join("bad"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_from_designated_solution() {
    let tmp = TempDir::new().unwrap();
    let dir = gengap(&tmp, 1, 2);
    let inst = dir.join("instance.json");
    let local = dir.join("local.json");

    let res = tmp.path().join("p1.json");
    let out = redblue(&["solve", "--instance", s(&inst), "--p", "1", "--initial", s(&local), "--out", s(&res)]);
    assert_eq!(code(&out), 0);
    let doc = read_json(&res);
    assert_eq!(doc["cost"], 11);
    assert_eq!(doc["iterations"], 0);
    assert_eq!(doc["solution"], read_json(&local));

    let out = redblue(&["solve", "--instance", s(&inst), "--p", "2", "--initial", s(&local)]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["cost"].as_i64().unwrap() < 11);
    assert!(doc["iterations"].as_u64().unwrap() >= 1);

    let out = redblue(&["solve", "--instance", s(&inst), "--p", "1", "--rule", "first", "--seed", "4"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn malformed_input_exits_with_input_error() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, b"{\"n\": 2, \"metric\": ").unwrap();
    let out = redblue(&["solve", "--instance", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));

    let out = redblue(&["exact", "--instance", s(&tmp.path().join("missing.json"))]);
    assert_eq!(code(&out), 2);

    let inst = write_json(tmp.path(), "budget.json", &line_instance(&[(0, 'c'), (1, 'r')], 2, 0));
    let out = redblue(&["exact", "--instance", s(&inst)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("k_r"));
}

#[test]
fn exact_costs_and_cap_refusal() {
    let tmp = TempDir::new().unwrap();
    let dir = gengap(&tmp, 1, 2);
    let out = redblue(&["exact", "--instance", s(&dir.join("instance.json"))]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["cost"], 3);

    // One red facility, budget one: the only solution.
    let single = write_json(tmp.path(), "single.json", &line_instance(&[(0, 'c'), (4, 'c'), (3, 'r')], 1, 0));
    let res = tmp.path().join("single-out.json");
    assert_eq!(code(&redblue(&["exact", "--instance", s(&single), "--out", s(&res)])), 0);
    assert_eq!(read_json(&res)["cost"], 4);
    assert_eq!(read_json(&res)["examined"], 1);

    let out = redblue(&["exact", "--instance", s(&dir.join("instance.json")), "--cap", "2"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_reports_optimality_and_witnesses() {
    let tmp = TempDir::new().unwrap();
    let dir = gengap(&tmp, 1, 2);
    let inst = dir.join("instance.json");

    let out = redblue(&["verify", "--instance", s(&inst), "--solution", s(&dir.join("local.json")), "--p", "1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("locally optimal"));

    let out = redblue(&["verify", "--instance", s(&inst), "--solution", s(&dir.join("global.json")), "--p", "1"]);
    assert_eq!(code(&out), 0);

    // Swap one open blue of the optimum for a closed one: the reverse
    // swap restores the strictly cheaper optimum.
    let global = read_json(&dir.join("global.json"));
    let instance = read_json(&inst);
    let open: Vec<u64> = global["B"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let closed =
        instance["blue"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).find(|b| !open.contains(b)).unwrap();
    let mut blue = open.clone();
    blue[0] = closed;
    let perturbed = write_json(tmp.path(), "perturbed.json", &json!({ "R": global["R"], "B": blue }));
    let exact = redblue(&["exact", "--instance", s(&inst)]);
    let opt = serde_json::from_str::<Value>(&stdout(&exact)).unwrap()["cost"].as_i64().unwrap();
    let cost = redblue(&["solve", "--instance", s(&inst), "--initial", s(&perturbed), "--max-iters", "0"]);
    let perturbed_cost = serde_json::from_str::<Value>(&stdout(&cost)).unwrap()["cost"].as_i64().unwrap();
    assert!(perturbed_cost > opt);

    let res = tmp.path().join("verdict.json");
    let out = redblue(&["verify", "--instance", s(&inst), "--solution", s(&perturbed), "--p", "1", "--out", s(&res)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("improving move"));
    let verdict = read_json(&res);
    assert_eq!(verdict["verdict"], "improvable");
    assert!(verdict["delta"].as_i64().unwrap() < 0);
}

#[test]
fn decompose_requires_disjoint_solutions_or_flag() {
    let tmp = TempDir::new().unwrap();
    let inst = write_json(
        tmp.path(),
        "inst.json",
        &line_instance(&[(0, 'c'), (0, 'r'), (10, 'c'), (10, 'b'), (11, 'r'), (12, 'b')], 1, 1),
    );
    let sol = write_json(tmp.path(), "s.json", &json!({ "R": [1], "B": [3] }));
    let other = write_json(tmp.path(), "o.json", &json!({ "R": [1], "B": [5] }));
    let out = redblue(&["decompose", "--instance", s(&inst), "--s", s(&sol), "--o", s(&other)]);
    assert_eq!(code(&out), 2);

    let res = tmp.path().join("dec.json");
    let out = redblue(&[
        "decompose",
        "--instance",
        s(&inst),
        "--s",
        s(&sol),
        "--o",
        s(&other),
        "--disjointify",
        "--out",
        s(&res),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&res);
    assert_eq!(doc["ok"], true);
    assert_eq!(doc["n"], 7);
    assert_eq!(doc["o"]["R"], json!([6]));
}

#[test]
fn decompose_matched_pairs_are_balanced() {
    let tmp = TempDir::new().unwrap();
    let points = [(0, 'c'), (0, 'r'), (1, 'r'), (50, 'c'), (50, 'b'), (51, 'b'), (100, 'c'), (100, 'r'), (101, 'r')];
    let inst = write_json(tmp.path(), "inst.json", &line_instance(&points, 2, 1));
    let sol = write_json(tmp.path(), "s.json", &json!({ "R": [1, 7], "B": [4] }));
    let other = write_json(tmp.path(), "o.json", &json!({ "R": [2, 8], "B": [5] }));
    let out = redblue(&["decompose", "--instance", s(&inst), "--s", s(&sol), "--o", s(&other)]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let groups = doc["decomposition"]["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 3);
    assert!(groups.iter().all(|g| g["class"] == "balanced"), "{groups:?}");
    assert_eq!(doc["decomposition"]["blocks"].as_array().unwrap().len(), 3);
}

#[test]
fn decompose_random_fixtures_pass_all_checks() {
    let tmp = TempDir::new().unwrap();
    for seed in 0..3u64 {
        // Deterministic scattered points from a small LCG.
        let mut x = seed * 7919 + 13;
        let mut next = || {
            x = (x * 1103515245 + 12345) % 2147483648;
            (x % 1000) as i64
        };
        let roles = ['c', 'c', 'c', 'c', 'c', 'r', 'r', 'r', 'r', 'b', 'b', 'b', 'b'];
        let points: Vec<(i64, char)> = roles.iter().map(|&r| (next(), r)).collect();
        let inst = write_json(tmp.path(), "inst.json", &line_instance(&points, 2, 2));
        let sol = write_json(tmp.path(), "s.json", &json!({ "R": [5, 6], "B": [9, 10] }));
        let other = write_json(tmp.path(), "o.json", &json!({ "R": [7, 8], "B": [11, 12] }));
        let out = redblue(&["decompose", "--instance", s(&inst), "--s", s(&sol), "--o", s(&other)]);
        assert_eq!(code(&out), 0, "seed {seed}");
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(doc["decomposition"]["block_report"]["violations"], json!([]));
        assert_eq!(doc["decomposition"]["bounds"]["nearest_violations"], json!([]));
        assert_eq!(doc["decomposition"]["bounds"]["cent_violations"], json!([]));
    }
}

fn read_csv(path: &Path) -> (String, Vec<csv::StringRecord>) {
    let text = fs::read_to_string(path).unwrap();
    let (first, rest) = text.split_once('\n').unwrap();
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["instance", "p", "seed", "local_cost", "opt", "ratio", "iterations", "wall_ms", "error"]
    );
    (first.to_string(), reader.records().map(Result::unwrap).collect())
}

#[test]
fn experiment_on_empty_corpus_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("corpus")).unwrap();
    let spec = write_json(
        tmp.path(),
        "spec.json",
        &json!({ "corpus_dir": "corpus", "p_values": [1], "seeds": [0], "out": "out.csv" }),
    );
    let out = redblue(&["experiment", s(&spec)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (schema, rows) = read_csv(&tmp.path().join("out.csv"));
    assert!(schema.starts_with("# redblue-experiment schema"));
    assert!(rows.is_empty());
}

#[test]
fn experiment_rejects_invalid_specs() {
    let tmp = TempDir::new().unwrap();
    let spec =
        write_json(tmp.path(), "spec.json", &json!({ "gap": [[1, 2]], "p_values": [0], "seeds": [0], "out": "o.csv" }));
    assert_eq!(code(&redblue(&["experiment", s(&spec)])), 2);
    let spec =
        write_json(tmp.path(), "spec2.json", &json!({ "p_values": [1], "seeds": [0], "out": "o.csv", "typo": 1 }));
    assert_eq!(code(&redblue(&["experiment", s(&spec)])), 2);
}

fn closed_form(p: f64, ell: f64) -> f64 {
    let alpha = 2.0 * p * (ell - p);
    let beta = 2.0 * p;
    let global = p * p * (ell + 1.0);
    (alpha * (p + 1.0) + beta * p * ell + global) / global
}

#[test]
fn experiment_gap_ratios_match_closed_form() {
    let tmp = TempDir::new().unwrap();
    let mut gaps: Vec<(usize, usize)> = (2..=20).map(|ell| (1, ell)).collect();
    gaps.extend((4..=8).map(|ell| (2, ell)));
    for (p, gap) in [(1, gaps[..19].to_vec()), (2, gaps[19..].to_vec())] {
        let spec = write_json(
            tmp.path(),
            &format!("spec{p}.json"),
            &json!({ "gap": gap, "p_values": [p], "seeds": [0], "initial": "designated", "out": format!("gap{p}.csv") }),
        );
        let out = redblue(&["experiment", s(&spec)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let (_, rows) = read_csv(&tmp.path().join(format!("gap{p}.csv")));
        assert_eq!(rows.len(), gap.len());
        for (row, &(gp, ell)) in rows.iter().zip(&gap) {
            assert_eq!(&row[0], format!("gap-p{gp}-l{ell}"));
            assert_eq!(&row[6], "0", "designated solution is a local optimum");
            let ratio: f64 = row[5].parse().unwrap();
            assert!((ratio - closed_form(gp as f64, ell as f64)).abs() < 1e-12, "{row:?}");
        }
    }
}

#[test]
fn experiment_records_row_failures_and_continues() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::write(corpus.join("a-broken.json"), b"not json").unwrap();
    fs::write(
        corpus.join("b-line.json"),
        serde_json::to_vec(&line_instance(&[(0, 'c'), (2, 'r'), (5, 'r')], 1, 0)).unwrap(),
    )
    .unwrap();
    let spec = write_json(
        tmp.path(),
        "spec.json",
        &json!({
            "corpus_dir": "corpus",
            "gap": [[3, 20]],
            "p_values": [3],
            "seeds": [0],
            "max_neighborhood": 1000,
            "out": "out.csv",
        }),
    );
    let out = redblue(&["experiment", s(&spec)]);
    assert_eq!(code(&out), 0);
    let (_, rows) = read_csv(&tmp.path().join("out.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][0], "a-broken");
    assert!(!rows[0][8].is_empty());
    assert_eq!(&rows[1][0], "b-line");
    assert_eq!(&rows[1][3], "2");
    assert_eq!(&rows[1][4], "2");
    assert_eq!(&rows[1][5], "1");
    assert_eq!(&rows[2][0], "gap-p3-l20");
    // Optimum certified by the lower bound, search refused by the cap.
    assert_eq!(&rows[2][4], "189");
    assert!(rows[2][8].contains("cap"), "{:?}", rows[2]);
    assert_eq!(&rows[2][5], "");
}

#[test]
fn experiment_is_deterministic_apart_from_wall_time() {
    let tmp = TempDir::new().unwrap();
    let spec = write_json(
        tmp.path(),
        "spec.json",
        &json!({
            "euclidean": { "count": 6, "n_clients": 10, "n_red": 5, "n_blue": 5, "k_r": 2, "k_b": 2, "box_size": 100.0, "seed": 7 },
            "gap": [[1, 4]],
            "p_values": [1, 2],
            "seeds": [0, 1, 2],
            "epsilon": 0.1,
            "out": "a.csv",
        }),
    );
    assert_eq!(code(&redblue(&["experiment", s(&spec)])), 0);
    let b = tmp.path().join("b.csv");
    assert_eq!(code(&redblue(&["experiment", s(&spec), "--out", s(&b)])), 0);
    let strip = |rows: Vec<csv::StringRecord>| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().enumerate().filter(|(i, _)| *i != 7).map(|(_, f)| f.to_string()).collect())
            .collect()
    };
    let (_, a_rows) = read_csv(&tmp.path().join("a.csv"));
    let (_, b_rows) = read_csv(&b);
    assert_eq!(a_rows.len(), 7 * 2 * 3);
    assert_eq!(strip(a_rows.clone()), strip(b_rows));
    // Row order follows the spec: instances, then p, then seeds.
    assert_eq!(&a_rows[0][0], "gap-p1-l4");
    assert_eq!((&a_rows[1][1], &a_rows[1][2]), ("1", "1"));
    assert_eq!((&a_rows[3][1], &a_rows[3][2]), ("2", "0"));
    assert_eq!(&a_rows[6][0], "euclid-7");
}

#[test]
fn experiment_summary_reports_ratio_per_p() {
    let tmp = TempDir::new().unwrap();
    let spec = write_json(
        tmp.path(),
        "spec.json",
        &json!({
            "euclidean": { "count": 100, "n_clients": 12, "n_red": 6, "n_blue": 6, "k_r": 2, "k_b": 2, "box_size": 100.0, "seed": 1000 },
            "p_values": [1, 2],
            "seeds": [0],
            "out": "out.csv",
            "summary": "summary.json",
        }),
    );
    let out = redblue(&["experiment", s(&spec)]);
    assert_eq!(code(&out), 0);
    let summary = read_json(&tmp.path().join("summary.json"));
    assert_eq!(summary["errors"], 0);
    assert_eq!(summary["flagged_p1_above_7"], false);
    let (p1, p2) = (&summary["per_p"]["1"], &summary["per_p"]["2"]);
    assert_eq!(p1["rows"], 100);
    assert!(p1["max_ratio"].as_f64().unwrap() >= 1.0);
    // Recorded rather than asserted: the mean ratio comparison across p.
    println!("mean ratio p=1 {} p=2 {}", p1["mean_ratio"], p2["mean_ratio"]);
}
