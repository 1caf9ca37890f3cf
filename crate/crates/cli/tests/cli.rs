use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn mobeq() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mobeq"));
    cmd.env("RUST_LOG", "info");
    cmd
}

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn run(args: &[&str]) -> Output {
    mobeq().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_bundled_and_file_cities() {
    let o = run(&["validate", "boston"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("8 zones"));

    let file = data("lugano.city.json");
    let controls = data("boston/nominal.controls.json");
    let o = run(&["validate", path_str(&file)]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["validate", "boston", "--controls", path_str(&controls)]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validate_rejects_bad_inputs_with_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("lugano.city.json")).unwrap();
    let bad = dir.path().join("bad.city.json");
    std::fs::write(&bad, text.replacen("\"latitude\"", "\"lattitude\"", 1)).unwrap();
    let o = run(&["validate", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zones[0]"), "{}", stderr(&o));

    let controls = dir.path().join("c.json");
    std::fs::write(&controls, r#"{"tax_rates": [{"mode": 2, "rate": 2}]}"#).unwrap();
    let o = run(&["validate", "boston", "--controls", path_str(&controls)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tax_rates"), "{}", stderr(&o));

    let o = run(&["validate", "atlantis"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_prints_json_and_csv_reports() {
    let controls = data("boston/nominal.controls.json");
    let o = run(&["solve", "boston", "--controls", path_str(&controls)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["nash"]["verdict"], true);
    assert_eq!(report["kpis"]["riders"][0][1], 750.0);

    let o = run(&["solve", "boston", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("zone,mode,share,riders,revenue"));
    assert_eq!(lines.next().unwrap().split(',').take(2).collect::<Vec<_>>(), ["MIT", "walk"]);
    assert!(text.contains("MIT,bus,"));
    assert!(text.contains("\nkpi,value\n"));
    assert!(text.contains("operating_cost_usd.bus,10800"));
    // MIT bus riders pay the flat 2 USD fare.
    assert!(text.lines().any(|l| l.starts_with("MIT,bus,") && l.ends_with(",750,1500")), "{text}");
}

#[test]
fn solve_with_oracle_reports_the_gap_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["solve", "lugano", "--oracle", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("objective gap"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["iteration"], 1);
}

/// `n` zones with demand between every pair, for three populations.
fn dense_city(n: usize) -> Value {
    let zones: Vec<Value> = (0..n)
        .map(|i| json!({"id": i, "name": format!("z{i}"), "latitude": 42.0 + 0.01 * (i / 6) as f64, "longitude": -71.0 + 0.01 * (i % 6) as f64}))
        .collect();
    let mut demand = Vec::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in 0..3 {
                demand.push(json!({"origin": i, "destination": j, "population": k, "count": 2}));
            }
        }
    }
    let size = 2 * n * (n - 1);
    json!({
        "schema_version": "1",
        "name": "dense",
        "zones": zones,
        "populations": (0..3).map(|k| json!({"id": k, "name": format!("p{k}"), "value_of_time": 10, "size": size})).collect::<Vec<_>>(),
        "modes": [{"id": 1, "name": "bus", "speed": 12, "fare": {"per_trip": 2}}],
        "demand": demand,
    })
}

#[test]
fn oracle_refuses_large_cities() {
    let dir = tempfile::tempdir().unwrap();
    let city = dir.path().join("dense.city.json");
    std::fs::write(&city, dense_city(30).to_string()).unwrap();
    let o = run(&["solve", path_str(&city), "--oracle"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("limit"), "{}", stderr(&o));
}

#[test]
fn run_replay_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("s.mobeq");
    let nominal = data("boston/nominal.controls.json");
    let buses = data("boston/doubled_buses.controls.json");
    let o = run(&[
        "run", "boston", "--controls", path_str(&nominal), "--controls", path_str(&buses), "--out", path_str(&session),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = run(&["replay", path_str(&session)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("identical").count(), 2);

    let o = run(&["compare", path_str(&session), "--a", "1", "--b", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("kpi,iteration_1,iteration_2,delta\n"));
    assert!(text.contains("riders.MIT.bus,750,1500,750\n"), "{text}");

    let o = run(&["compare", path_str(&session), "--a", "1", "--b", "2"]);
    assert!(stdout(&o).contains("operating_cost_usd.bus"));

    let o = run(&["compare", path_str(&session), "--a", "1", "--b", "9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn replay_detects_tampered_kpis() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("golden_boston_session.mobeq")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    let co2 = doc["history"][0]["kpis"]["co2"].as_f64().unwrap();
    doc["history"][0]["kpis"]["co2"] = (co2 + 1e-6).into();
    let tampered = dir.path().join("t.mobeq");
    std::fs::write(&tampered, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let o = run(&["replay", path_str(&tampered)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));
    assert!(stdout(&o).contains("co2_kg"));
}

#[test]
fn golden_session_replays_cleanly() {
    let o = run(&["replay", path_str(&data("golden_boston_session.mobeq"))]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn serve_reads_its_port_from_the_environment() {
    let mut child = mobeq()
        .args(["serve"])
        .env("MOBEQ_ADDR", "127.0.0.1")
        .env("MOBEQ_PORT", "0")
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server exited").unwrap();
        if let Some(rest) = line.split("listening on http://").nth(1) {
            break rest.trim().to_string();
        }
    };
    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /api/v1/cities HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"boston\""));
}
