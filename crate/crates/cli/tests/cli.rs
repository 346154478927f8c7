//! End-to-end runs of the `wpcrelay` binary.

use std::process::{Command, Output};

fn wpcrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpcrelay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SMALL_SIM: [&str; 6] = [
    "--set",
    "simulation.topology_draws=4",
    "--set",
    "simulation.measure_slots=400",
    "--set",
    "simulation.burn_in_slots=100",
];

#[test]
fn analytic_power_sweep_is_complete_and_monotone() {
    let out = wpcrelay(&["sweep", "--sweep", "power_db=0:60:5"]);
    assert!(out.status.success());
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 13 * 5);
    for scheme in ["RRS", "RCS", "RRSB", "RCSB", "DB"] {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r[1] == scheme)
            .map(|r| r[3].parse().unwrap())
            .collect();
        assert_eq!(v.len(), 13);
        assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{scheme}: {v:?}");
    }
}

#[test]
fn psi_sweep_has_an_interior_optimum() {
    let out = wpcrelay(&[
        "sweep",
        "--sweep",
        "psi=0.01:0.91:0.05",
        "--scheme",
        "rrs,rcs",
        "--set",
        "network.power_db=30",
        "--set",
        "network.lambda=0.5",
    ]);
    assert!(out.status.success());
    let rows = data_rows(&out);
    for scheme in ["RRS", "RCS"] {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r[1] == scheme)
            .map(|r| r[3].parse().unwrap())
            .collect();
        let min = v.iter().copied().fold(f64::MAX, f64::min);
        assert!(v[0] > min && *v.last().unwrap() > min, "{scheme}: {v:?}");
    }
}

#[test]
fn same_seed_gives_identical_bytes_parallel_or_serial() {
    let mut args = vec![
        "sweep",
        "--sweep",
        "power_db=10:30:10",
        "--mode",
        "analytic,simulated",
        "--seed",
        "7",
    ];
    args.extend(SMALL_SIM);
    let a = wpcrelay(&args);
    let b = wpcrelay(&args);
    args.push("--serial");
    let c = wpcrelay(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, c.stdout);
    let mut other = args.clone();
    other[6] = "8";
    assert_ne!(data_rows(&wpcrelay(&other)), data_rows(&a));
}

#[test]
fn header_records_version_units_and_config() {
    let out = wpcrelay(&["outage", "--scheme", "rrs"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(&format!("# wpcrelay {}", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("# units: power_db converts as P = 10^(power_db/10) * noise"));
    assert!(text.contains("#   lambda = 1.0"));
    assert!(text.contains("parameter,scheme,mode,value,stderr,trials,error"));
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[network]\nlambda = 0.5\npower_db = 20.0\n").unwrap();
    let out = dir.path().join("out.csv");
    let st = wpcrelay(&[
        "outage",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--scheme",
        "rcsb",
    ]);
    assert!(st.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("#   lambda = 0.5"));
    assert!(text.lines().last().unwrap().starts_with(",RCSB,analytic,0."));
}

#[test]
fn jsonl_records_parse() {
    let out = wpcrelay(&[
        "outage",
        "--format",
        "jsonl",
        "--scheme",
        "db",
        "--mode",
        "analytic,asymptotic",
    ]);
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0]["header"].is_array());
    assert_eq!(lines[2]["mode"], "asymptotic");
}

#[test]
fn point_errors_are_reported_and_fail_the_exit_code() {
    // RCS asymptote is defined for alpha = 2 only
    let out = wpcrelay(&["outage", "--scheme", "rcs,rrs", "--mode", "asymptotic"]);
    assert!(!out.status.success());
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 2);
    assert!(!rows[0][6].is_empty());
    assert!(rows[1][6].is_empty());
}

#[test]
fn bad_input_is_rejected() {
    assert!(!wpcrelay(&["sweep", "--sweep", "power_db=10:0:5"]).status.success());
    assert!(!wpcrelay(&["outage", "--set", "network.alpha=1.5"]).status.success());
    assert!(!wpcrelay(&["outage", "--scheme", "xyz"]).status.success());
    assert!(!wpcrelay(&["multicell"]).status.success());
}

#[test]
fn multicell_excludes_db_by_default_and_rejects_it_explicitly() {
    let ok = wpcrelay(&["multicell", "--multicell", "0.005"]);
    assert!(ok.status.success());
    assert_eq!(data_rows(&ok).len(), 4);
    let db = wpcrelay(&["multicell", "--multicell", "0.005", "--scheme", "db"]);
    assert!(!db.status.success());
}

#[test]
fn steady_state_reports_both_engines() {
    let mut args = vec!["steady-state", "--scheme", "db", "--mode", "analytic,simulated"];
    args.extend(SMALL_SIM);
    let out = wpcrelay(&args);
    assert!(out.status.success());
    let rows = data_rows(&out);
    assert_eq!(rows[0][0], "DB");
    assert_eq!(rows[1][3], "1.0");
}

#[test]
fn validate_reports_json_and_exit_status() {
    let ok = wpcrelay(&["validate", "--criteria", "5,7"]);
    assert!(ok.status.success());
    let r: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["criteria"].as_array().unwrap().len(), 2);
    assert_eq!(ok.stdout, wpcrelay(&["validate", "--criteria", "5,7"]).stdout);

    let bad = wpcrelay(&["validate", "--criteria", "3", "--corrupt-eta1", "0.9999"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("[FAIL] criterion 3"));
}
