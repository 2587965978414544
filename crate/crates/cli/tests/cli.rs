use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn atomnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atomnet"))
        .args(args)
        .env_remove("ATOMNET_SWEEP_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn fraction(v: &Value) -> &str {
    v["fraction"].as_str().expect("rate has a fraction")
}

fn simulate(dir: &Path, name: &str, args: &[&str]) -> String {
    let out = dir.join(name).to_string_lossy().into_owned();
    let mut full = vec!["simulate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &out]);
    let o = atomnet(&full);
    assert!(o.status.success(), "simulate failed: {}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn bounds_matched_network() {
    let o = atomnet(&["bounds", "--h", "3,2,2", "--M", "3", "--K", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_of(&o);
    assert_eq!(fraction(&v["lower_new"]["rate"]), "5/2");
    assert_eq!(v["lower_new"]["c_star"], 0);
    assert_eq!(fraction(&v["upper_new"]["rate"]), "5/2");
    assert_eq!(fraction(&v["lower_baseline"]), "2");
    assert_eq!(fraction(&v["upper_baseline"]), "18/7");
    assert_eq!(v["matched"], true);
    assert_eq!(fraction(&v["capacity"]), "5/2");
}

#[test]
fn bounds_single_path_without_adversary() {
    let o = atomnet(&["bounds", "--h", "1", "--M", "1", "--K", "0", "--format", "json"]);
    let v = json_of(&o);
    for key in ["lower_baseline", "upper_baseline"] {
        assert_eq!(fraction(&v[key]), "1", "{key}");
    }
    assert_eq!(fraction(&v["lower_new"]["rate"]), "1");
    assert_eq!(fraction(&v["upper_new"]["rate"]), "1");
}

#[test]
fn bounds_upper_against_baseline() {
    let o = atomnet(&["bounds", "--h", "4,3,2", "--M", "2", "--K", "5", "--format", "json"]);
    let v = json_of(&o);
    assert_eq!(fraction(&v["upper_new"]["rate"]), "1");
    assert_eq!(fraction(&v["upper_baseline"]), "8/9");
    assert_eq!(v["upper_baseline"]["decimal"].as_f64().unwrap(), 8.0 / 9.0);
}

#[test]
fn bounds_table_and_csv_carry_fraction_and_decimal() {
    let table = stdout(&atomnet(&["bounds", "--h", "3,2,2", "--M", "3", "--K", "1"]));
    assert!(table.contains("5/2") && table.contains("2.500000"), "{table}");
    assert!(table.contains("matched"), "{table}");
    let csv = stdout(&atomnet(&["bounds", "--h", "3,2,2", "--M", "3", "--K", "1", "--format", "csv"]));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("h,M,K,c_star,lower_new,lower_new_decimal"));
    assert!(lines.next().unwrap().contains("18/7,2.571429"));
}

#[test]
fn malformed_h_is_a_usage_error() {
    for h in ["3,x,2", "", "0,1"] {
        let o = atomnet(&["bounds", "--h", h, "--M", "3", "--K", "1"]);
        assert_eq!(o.status.code(), Some(2), "h={h:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn sweep_rows_sorted_and_matched() {
    let o = atomnet(&["sweep", "--h", "3,2,2", "--M", "3", "--K", "0..7"]);
    assert!(o.status.success());
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let matched = headers.iter().position(|c| c == "matched").unwrap();
    let k_col = headers.iter().position(|c| c == "K").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[k_col].parse::<usize>().unwrap(), k);
        assert_eq!(&row[matched], "true");
    }
}

#[test]
fn sweep_over_two_axes() {
    let o = atomnet(&["sweep", "--h", "3,2,2", "--M", "1..4", "--K", "0..2"]);
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let keys: Vec<(usize, usize)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[1].parse().unwrap(), r[2].parse().unwrap())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys.len(), 12);
    assert_eq!(keys, sorted);
}

#[test]
fn schedule_json() {
    let v = json_of(&atomnet(&["schedule", "--h", "3,2,2", "--M", "2", "--c", "1"]));
    assert_eq!(v["round_sizes"], serde_json::json!([3, 1]));
    assert_eq!(v["network_uses"], 4);
    let labels: Vec<Vec<&str>> = v["rounds"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["groups"].as_array().unwrap())
        .map(|g| g.as_array().unwrap().iter().map(|p| p["label"].as_str().unwrap()).collect())
        .collect();
    assert_eq!(labels, [vec!["p1", "p4"], vec!["p2", "p6"], vec!["p3", "p5"], vec!["p7"]]);
}

#[test]
fn simulate_and_verify_two_beam_h322() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json").to_string_lossy().into_owned();
    let args = ["simulate", "--h", "3,2,2", "--M", "2", "--K", "5", "--c", "1", "--seed", "7", "--format", "json"];
    let o = atomnet(&[&args[..], &["--out", &out]].concat());
    assert!(o.status.success());
    let v = json_of(&o);
    assert_eq!(fraction(&v["rate"]), "1/2");
    assert_eq!(v["network_uses"], 4);
    assert_eq!(v["decode_ok"], true);

    let o = atomnet(&["verify", "--transcript", &out, "--K", "5", "--exhaustive", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json_of(&o);
    assert_eq!(v["secure"], true);
    assert_eq!(v["sweep"]["sets_checked"], 98_280);
    assert_eq!(v["sweep"]["level"], "edge");
}

#[test]
fn simulate_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--h", "3,2,2", "--M", "2", "--K", "5", "--c", "1", "--seed", "7"];
    let a = simulate(dir.path(), "a.json", &args);
    let b = simulate(dir.path(), "b.json", &args);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn simulate_default_c_uses_best_round_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(dir.path(), "t.json", &["--h", "2,1,1,1", "--M", "3", "--K", "1"]);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(t["c"], 0);
    let o = atomnet(&["simulate", "--h", "2,1,1,1", "--M", "3", "--K", "1", "--format", "json", "--out",
        &dir.path().join("u.json").to_string_lossy()]);
    assert_eq!(fraction(&json_of(&o)["rate"]), "2");
}

#[test]
fn simulate_without_adversary_on_minimal_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json").to_string_lossy().into_owned();
    let o = atomnet(&["simulate", "--h", "1", "--M", "1", "--K", "0", "--format", "json", "--out", &out]);
    assert_eq!(fraction(&json_of(&o)["rate"]), "1");
    let o = atomnet(&["verify", "--transcript", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SECURE"));
}

#[test]
fn simulate_over_gf256() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(dir.path(), "t.json", &["--h", "3,2,2", "--M", "2", "--K", "5", "--field", "gf256"]);
    let o = atomnet(&["verify", "--transcript", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn stripped_keys_are_reported_insecure() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(dir.path(), "t.json", &["--h", "3,2,2", "--M", "2", "--K", "5", "--c", "1", "--seed", "7"]);
    let mut t: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // zero every key coefficient: message packets then travel in the clear
    for packet in t["packets"].as_array_mut().unwrap() {
        if !packet["message"].is_null() {
            for c in packet["key_coeffs"].as_array_mut().unwrap() {
                *c = Value::from(0);
            }
        }
    }
    let stripped = dir.path().join("stripped.json");
    std::fs::write(&stripped, serde_json::to_string(&t).unwrap()).unwrap();
    let o = atomnet(&["verify", "--transcript", &stripped.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("INSECURE") && text.contains("worst Z"), "{text}");
}

#[test]
fn schema_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(dir.path(), "t.json", &["--h", "2,1", "--M", "2", "--K", "1"]);
    let mut t: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    t["version"] = Value::from(99);
    std::fs::write(&path, t.to_string()).unwrap();
    let o = atomnet(&["verify", "--transcript", &path]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(atomnet(&["verify", "--transcript", &path]).status.code(), Some(2));
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(atomnet(&["verify", "--transcript", &missing.to_string_lossy()]).status.code(), Some(3));
    let unwritable = dir.path().join("no/such/dir/t.json");
    let o = atomnet(&["simulate", "--h", "2,1", "--M", "2", "--K", "1", "--out", &unwritable.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_cap_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(dir.path(), "t.json", &["--h", "3,2,2", "--M", "2", "--K", "5", "--c", "1"]);
    let run = |cap: &str, extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_atomnet"))
            .args([&["verify", "--transcript", path.as_str()][..], extra].concat())
            .env("ATOMNET_SWEEP_CAP", cap)
            .output()
            .unwrap()
    };
    // exhaustive above the cap is refused; auto falls back to path level
    assert_eq!(run("1000", &["--exhaustive"]).status.code(), Some(2));
    let o = run("1000", &["--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_of(&o)["sweep"]["level"], "path");
    assert_eq!(run("lots", &[]).status.code(), Some(2));
}

#[test]
fn oracle_rows() {
    for (h, ell) in [("3,2,2", "3"), ("2,2", "2")] {
        let v = json_of(&atomnet(&["oracle", "--h", h, "--ell", ell, "--format", "json"]));
        assert_eq!((v["formula"].as_u64(), v["bins"].as_u64(), v["oracle"].as_u64()), (Some(2), Some(2), Some(2)));
        assert_eq!(v["agree"], true);
    }
    let o = atomnet(&["oracle", "--h", "3,2,2", "--ell", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_outputs() {
    let v = json_of(&atomnet(&["graph", "--h", "2,1,1,1"]));
    assert_eq!(v["paths"].as_array().unwrap().len(), 5);
    assert_eq!(v["edges"].as_array().unwrap().len(), 20);
    let dot = stdout(&atomnet(&["graph", "--h", "2,1", "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("\"S\""));
}
