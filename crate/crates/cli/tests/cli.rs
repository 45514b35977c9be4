use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wpc_core::{db_to_linear, oracle, SystemParams};

fn wpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpc"))
        .args(args)
        .output()
        .expect("spawn wpc")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

/// CSV rows after the header, with `#` notes dropped.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<Option<f64>> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name}"));
    rows.iter().map(|r| r[i].parse().ok()).collect()
}

#[test]
fn dt_sweep_rows_and_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = wpc(&[
            "dt-sweep",
            "--from",
            "0.01",
            "--to",
            "0.99",
            "--step",
            "0.01",
            "--slots",
            "10000",
            "--seed",
            "1",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        [
            "alpha",
            "analytic_throughput",
            "analytic_outage",
            "sim_throughput",
            "sim_stderr",
            "sim_outage"
        ]
    );
    assert_eq!(rows.len(), 99);
    let half = rows.iter().find(|r| r[0] == "0.5").unwrap();
    assert!((half[1].parse::<f64>().unwrap() - 0.7213).abs() < 1e-4);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn bad_ranges_and_flags_exit_2() {
    assert_eq!(
        wpc(&["dt-sweep", "--from", "0.6", "--to", "0.4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(wpc(&["dt-sweep", "--step", "0"]).status.code(), Some(2));
    assert_eq!(
        wpc(&["dt-optimize", "--theta", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(wpc(&["dt-optimize", "--bogus"]).status.code(), Some(2));
    assert_eq!(wpc(&["reproduce", "fig9"]).status.code(), Some(2));
    assert_eq!(
        wpc(&["dt-optimize", "--gamma-o", "0.1", "--gamma-o-db", "-10"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_run_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("never.csv");
    let out = wpc(&[
        "dt-sweep",
        "--from",
        "0",
        "--to",
        "0.5",
        "--slots",
        "10",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!p.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn dt_optimize_reports_binding() {
    let v = json(&wpc(&[
        "dt-optimize",
        "--gamma-o-db",
        "-13",
        "--theta",
        "0.05",
    ]));
    assert_eq!(v["alpha_star"], 0.5);
    assert_eq!(v["binding"], "interior");
    let v = json(&wpc(&[
        "dt-optimize",
        "--gamma-o-db",
        "-13",
        "--theta",
        "0.02",
    ]));
    assert!((v["alpha_star"].as_f64().unwrap() - 0.7106).abs() < 1e-4);
    assert_eq!(v["binding"], "outage_constraint");
    let v = json(&wpc(&["dt-optimize", "--gamma-o-db=-5", "--theta", "0.02"]));
    assert_eq!(v["binding"], "outage_constraint");
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["alpha_star", "throughput", "outage", "binding"]);
}

#[test]
fn df_optimize_feasible_preset() {
    let out = wpc(&[
        "df-optimize",
        "--d",
        "0.5",
        "--mu",
        "2",
        "--gamma-o-db",
        "-18",
        "--theta",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(
        keys,
        [
            "kappa_star",
            "z_star",
            "alpha_star",
            "beta_star",
            "throughput",
            "outage",
            "feasible",
            "z_lower",
            "z_upper"
        ]
    );
    for (k, x) in v.as_object().unwrap() {
        if k != "feasible" {
            assert!(x.as_f64().unwrap().is_finite(), "{k}");
        }
    }
    assert_eq!(v["feasible"], true);
    assert!(v["outage"].as_f64().unwrap() <= 0.05 + 1e-9);
    let z = v["z_star"].as_f64().unwrap();
    assert!(v["z_lower"].as_f64().unwrap() <= z && z <= v["z_upper"].as_f64().unwrap());
}

#[test]
fn df_optimize_infeasible_exits_1() {
    let out = wpc(&["df-optimize", "--gamma-o-db", "40", "--theta", "0.001"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["feasible"], false);
}

#[test]
fn df_feasibility_verdict_matches_grid() {
    for (db, theta) in [(0.0, 0.01), (40.0, 0.001), (-18.0, 0.05)] {
        let out = wpc(&[
            "df-optimize",
            "--gamma-o-db",
            &db.to_string(),
            "--theta",
            &theta.to_string(),
        ]);
        let p = SystemParams {
            gamma_o: db_to_linear(db),
            theta,
            ..Default::default()
        };
        let grid = oracle::grid_optimize_df(&p, 500).unwrap();
        assert_eq!(
            json(&out)["feasible"].as_bool().unwrap(),
            grid.feasible,
            "{db} dB"
        );
        assert_eq!(out.status.code(), Some(if grid.feasible { 0 } else { 1 }));
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[params]\ngamma_o_db = -13\ntheta = 0.02\n").unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&wpc(&["dt-optimize", "--config", c]));
    assert!((v["alpha_star"].as_f64().unwrap() - 0.7106).abs() < 1e-4);
    let v = json(&wpc(&["dt-optimize", "--config", c, "--theta", "0.05"]));
    assert_eq!(v["alpha_star"], 0.5);
    std::fs::write(&cfg, "[params]\nthetta = 0.02\n").unwrap();
    assert_eq!(wpc(&["dt-optimize", "--config", c]).status.code(), Some(2));
}

#[test]
fn json_sweep_and_simulate() {
    let out = wpc(&[
        "dt-sweep", "--from", "0.1", "--to", "0.9", "--step", "0.1", "--slots", "100", "--format",
        "json",
    ]);
    assert_eq!(json(&out).as_array().unwrap().len(), 9);
    let v = json(&wpc(&[
        "simulate",
        "--protocol",
        "df",
        "--kappa",
        "1",
        "--z",
        "0.6",
        "--slots",
        "1000",
    ]));
    assert!((v["alpha"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!(v["sr_mean"].as_f64().unwrap() > 0.0);
    let out = wpc(&[
        "simulate",
        "--protocol",
        "df",
        "--alpha",
        "0.5",
        "--z",
        "0.6",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn df_sweep_axes() {
    for (axis, rows) in [("beta", 49), ("z", 99), ("kappa", 50)] {
        let out = wpc(&["df-sweep", "--axis", axis, "--slots", "200"]);
        assert!(
            out.status.success(),
            "{axis}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let (header, r) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
        assert_eq!(header[0], axis);
        assert_eq!(r.len(), rows, "{axis}");
    }
}

fn reproduce(fig: &str, dir: &Path) -> String {
    let out = wpc(&["reproduce", fig, "--out", dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::read_to_string(dir.join(format!("{fig}.csv"))).unwrap()
}

#[test]
fn fig5_tighter_limit_needs_more_harvesting() {
    let dir = tempfile::tempdir().unwrap();
    let (h, r) = csv_rows(&reproduce("fig5", dir.path()));
    let tight = column(&h, &r, "alpha_theta_0.02");
    let loose = column(&h, &r, "alpha_theta_0.05");
    assert_eq!(r.len(), 41);
    assert!(tight
        .iter()
        .zip(&loose)
        .all(|(a, b)| a.unwrap() >= b.unwrap()));
}

#[test]
fn fig6_simulation_tracks_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let (h, r) = csv_rows(&reproduce("fig6", dir.path()));
    let a = column(&h, &r, "analytic_esr");
    let s = column(&h, &r, "sim_esr");
    let e = column(&h, &r, "sim_stderr");
    for i in 0..r.len() {
        let (a, s, e) = (a[i].unwrap(), s[i].unwrap(), e[i].unwrap());
        assert!((a - s).abs() <= 3.0 * e, "row {i}: {a} vs {s} +- {e}");
    }
}

#[test]
fn fig7_carries_warning() {
    let dir = tempfile::tempdir().unwrap();
    let text = reproduce("fig7", dir.path());
    assert!(text
        .lines()
        .next()
        .unwrap()
        .starts_with("# warning: d = 0 is singular"));
    let (h, r) = csv_rows(&text);
    // An empty cell means no z < 1 meets the outage limit.
    let lo: Vec<f64> = column(&h, &r, "z_lower_theta_0.05")
        .into_iter()
        .map(|x| x.unwrap_or(f64::INFINITY))
        .collect();
    let hi = column(&h, &r, "z_upper_theta_0.05");
    assert!(
        lo.windows(2).all(|w| w[0] <= w[1]),
        "lower bound grows with the threshold"
    );
    assert!(
        hi.windows(2).all(|w| w[0] == w[1]),
        "upper bound ignores the threshold"
    );
}

#[test]
fn fig8_relay_advantage() {
    let dir = tempfile::tempdir().unwrap();
    let text = reproduce("fig8", dir.path());
    assert!(text.starts_with("# gamma_o = -18 dB, theta = 0.05"));
    let (h, r) = csv_rows(&text);
    let d = column(&h, &r, "d");
    let dt2 = column(&h, &r, "dt_mu_2");
    let df2 = column(&h, &r, "df_mu_2");
    let dt3 = column(&h, &r, "dt_mu_3");
    let df3 = column(&h, &r, "df_mu_3");
    assert!((0..r.len()).any(|i| df2[i].is_some_and(|x| x > dt2[i].unwrap())));
    let i = d.iter().position(|x| *x == Some(0.8)).unwrap();
    assert!(df3[i].unwrap() - dt3[i].unwrap() > df2[i].unwrap() - dt2[i].unwrap());
}
