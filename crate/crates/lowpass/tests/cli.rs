use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lowpass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowpass"))
        .args(args)
        .env_remove("LOWPASS_OUT_DIR")
        .output()
        .expect("spawn lowpass")
}

fn json_of(args: &[&str]) -> Value {
    let out = lowpass(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn shannon_verdict_is_yes() {
    let r = json_of(&["verdict", "--filter", "shannon", "--grid", "32"]);
    assert_eq!(r["aggregate"]["low_pass"], "yes");
    assert_eq!(r["aggregate"]["verdict"], "yes");
    assert_eq!(r["per_xi"].as_array().unwrap().len(), 32);
    assert_eq!(r["filter"]["definition"]["kind"], "shannon");
}

#[test]
fn cusp_probe_fails_condition_b() {
    let r = json_of(&["verdict", "--filter", "cusp", "--probe", "0.3333333333", "--grid", "4"]);
    assert_eq!(r["aggregate"]["b_ok"], false);
    let failing: Vec<&str> = r["aggregate"]["failing"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(failing.contains(&"3333333333/10000000000"), "{failing:?}");
    let probe = r["per_xi"].as_array().unwrap().last().unwrap();
    assert_eq!(probe["probe"], true);
    assert_ne!(probe["tightness"], "tight");
    // Exit code does not encode the answer.
    assert_eq!(r["aggregate"]["low_pass"], "inconclusive");
}

#[test]
fn exact_third_is_not_tight() {
    let r = json_of(&["tightness", "--filter", "cusp", "--xi", "1/3", "--eps", "1e-2"]);
    assert_eq!(r["per_xi"][0]["tightness"], "not_tight");
    assert_eq!(r["aggregate"]["verdict"], "not_tight");
}

#[test]
fn quincunx_has_eight_digits() {
    let r = json_of(&["digits", "--matrix", "[[1,1],[-1,1]]"]);
    assert_eq!(r["details"]["digits"].as_array().unwrap().len(), 8);
    assert_eq!(r["details"]["power"], 3);
}

#[test]
fn digits_as_csv() {
    let out = lowpass(&["digits", "--matrix", "[[4]]", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "index,r1\n0,-1\n1,0\n2,1\n3,2\n");
}

#[test]
fn expand_round_trips() {
    let r = json_of(&["expand", "--matrix", "[[1,1],[-1,1]]", "--vector", "[7,-4]"]);
    assert_eq!(r["aggregate"]["verdict"], "pass");
    assert_eq!(r["details"]["reconstructed"], serde_json::json!([7, -4]));
}

#[test]
fn exit_codes() {
    let code = |a: &[&str]| lowpass(a).status.code();
    assert_eq!(code(&["validate", "--filter", "not-a-filter"]), Some(2));
    assert_eq!(code(&["digits", "--matrix", "[[1,2],[2,4]]"]), Some(2));
    assert_eq!(code(&["digits", "--matrix", "[[2,1],[0,3]]"]), Some(2));
    assert_eq!(code(&["digits"]), Some(2));
    assert_eq!(code(&["tightness", "--eps", "2"]), Some(2));
    assert_eq!(code(&["tightness", "--probe", "one third"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["tile", "--matrix", "[[1,1],[-1,1]]", "--depth", "9"]), Some(3));
    assert_eq!(code(&["--help"]), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    assert_eq!(code(&["validate", "--out", file.to_str().unwrap()]), Some(1));
}

#[test]
fn failed_validation_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("flat.json");
    std::fs::write(&f, r#"{"kind": "sampled", "samples": [1.0, 1.0, 1.0, 1.0]}"#).unwrap();
    let r = json_of(&["validate", "--filter", f.to_str().unwrap(), "--grid", "64"]);
    assert_eq!(r["aggregate"]["verdict"], "fail");
    // Scans refuse filters that are not QMF.
    assert_eq!(lowpass(&["tightness", "--filter", f.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let runs: [&[&str]; 2] = [
        &["tightness", "--filter", "d4", "--grid", "8", "--probe", "1/3", "--out", d],
        &["tile-measure", "--matrix", "[[1,1],[-1,1]]", "--samples", "5000", "--trials", "2000", "--seed", "7", "--out", d],
    ];
    for (args, name) in runs.iter().zip(["tightness.json", "tile-measure.json"]) {
        assert_eq!(lowpass(args).status.code(), Some(0));
        let first = std::fs::read(dir.path().join(name)).unwrap();
        assert_eq!(lowpass(args).status.code(), Some(0));
        let second = std::fs::read(dir.path().join(name)).unwrap();
        assert_eq!(first, second, "{name}");
    }
}

#[test]
fn config_round_trips_through_reports() {
    let dir = tempfile::tempdir().unwrap();
    let first = json_of(&["condition-c", "--filter", "haar", "--grid", "6", "--K", "12", "--J-max", "30", "--probe", "2/3"]);
    let cfg_path = dir.path().join("run.json");
    std::fs::write(&cfg_path, serde_json::to_string(&first["config"]).unwrap()).unwrap();
    let second = json_of(&["condition-c", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(first, second);
    assert_eq!(second["config"]["K"], 12);
    assert_eq!(second["config"]["probes"], serde_json::json!(["2/3"]));
    // Flags override the file.
    let third = json_of(&["condition-c", "--config", cfg_path.to_str().unwrap(), "--K", "5"]);
    assert_eq!(third["config"]["K"], 5);
}

#[test]
fn csv_format_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = lowpass(&["tightness", "--filter", "haar", "--grid", "4", "--format", "csv", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let tails = std::fs::read_to_string(dir.path().join("tail_curves.csv")).unwrap();
    assert!(tails.starts_with("xi,n,tail_mass\n"));
    assert_eq!(tails.lines().count(), 1 + 4 * 13);
    let bounds = std::fs::read_to_string(dir.path().join("certified_bounds.csv")).unwrap();
    assert!(bounds.starts_with("xi,level,lower,upper\n"));

    let plots = dir.path().join("plots");
    let report = dir.path().join("tightness.json");
    let out = lowpass(&["plot-data", "--report", report.to_str().unwrap(), "--out", plots.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let phi = std::fs::read_to_string(plots.join("phi_hat.csv")).unwrap();
    assert!(phi.starts_with("x,phi_hat_sq\n"));
    assert_eq!(phi.lines().count(), 802);
    assert!(phi.contains("\n0,1\n"));
    assert_eq!(std::fs::read_to_string(plots.join("tail_curves.csv")).unwrap(), tails);

    // A report with no frequencies gives header-only files.
    let empty = dir.path().join("empty");
    assert_eq!(lowpass(&["validate", "--out", d]).status.code(), Some(0));
    let v = dir.path().join("validate.json");
    let out = lowpass(&["plot-data", "--report", v.to_str().unwrap(), "--out", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for (f, h) in [
        ("tail_curves.csv", "xi,n,tail_mass\n"),
        ("certified_bounds.csv", "xi,level,lower,upper\n"),
        ("phi_hat.csv", "x,phi_hat_sq\n"),
    ] {
        assert_eq!(std::fs::read_to_string(empty.join(f)).unwrap(), h);
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lowpass"))
        .args(["matrix-analyze", "--matrix", "[[2,0],[0,2]]"])
        .env("LOWPASS_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r = read_json(&dir.path().join("matrix-analyze.json"));
    assert_eq!(r["details"]["power"], 2);
    assert_eq!(r["config"]["out"], dir.path().to_str().unwrap());
}

#[test]
fn tile_writes_point_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = lowpass(&["tile", "--matrix", "[[1,1],[-1,1]]", "--depth", "3", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("tile_points.csv")).unwrap();
    assert!(csv.starts_with("x1,x2\n"));
    assert_eq!(csv.lines().count(), 1 + 512);
    assert_eq!(read_json(&dir.path().join("tile.json"))["details"]["points"], 512);
    // Without --out the cloud goes to stdout.
    let out = lowpass(&["tile", "--matrix", "[[4]]", "--depth", "2", "--samples", "10", "--threads", "1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 11);
}

#[test]
fn lattice_filter_checks() {
    let r = json_of(&["md-qmf", "--matrix", "[[1,1],[-1,1]]", "--grid", "8"]);
    assert_eq!(r["aggregate"]["verdict"], "pass");
    let r = json_of(&["md-qmf", "--matrix", "[[1,1],[-1,1]]", "--filter", "haar", "--grid", "8"]);
    assert_eq!(r["aggregate"]["verdict"], "fail");
    let r = json_of(&["md-tightness", "--matrix", "[[2,0],[0,2]]", "--filter", "haar", "--xi", "[0.25,0.5]"]);
    assert_eq!(r["aggregate"]["verdict"], "tight");
    assert_eq!(r["per_xi"][0]["xi"], serde_json::json!([0.25, 0.5]));
}

#[test]
fn scalar_scans_run() {
    let r = json_of(&["dyadic-limits", "--filter", "paluszynski", "--grid", "8"]);
    assert_eq!(r["aggregate"]["c_ok"], "no");
    assert_eq!(r["aggregate"]["l_minus"], 0.0);
    let r = json_of(&["orthonormality", "--filter", "shannon", "--grid", "8"]);
    assert_eq!(r["details"]["max_abs_residual"], 0.0);
    let r = json_of(&["table", "--filter", "haar", "--xi", "1/4", "--N-max", "3", "--K", "2"]);
    assert_eq!(r["details"]["level"], 3);
    assert_eq!(r["details"]["limit_masses"].as_array().unwrap().len(), 5);
    assert_eq!(lowpass(&["table"]).status.code(), Some(2));
}
