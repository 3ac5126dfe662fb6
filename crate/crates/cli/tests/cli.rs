use std::process::{Command, Output};

use serde_json::Value;

fn rig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rig-giant"))
        .args(args)
        .env("RIG_GIANT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn rho_point_two() {
    let v = json(&rig(&["rho", "--beta", "1", "--pmf", "2:1"]));
    assert!((v["prediction"].as_f64().unwrap() - 0.9587).abs() < 1e-4);
    assert!(v["converged"].as_bool().unwrap());
    assert_eq!(v["survival"].as_array().unwrap().len(), 3);
}

#[test]
fn rho_from_file_with_dilution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    std::fs::write(&path, r#"{"pmf":[[0,0.5],[3,0.5]]}"#).unwrap();
    let v = json(&rig(&[
        "rho",
        "--beta",
        "1",
        "--dist",
        path.to_str().unwrap(),
    ]));
    assert!((v["prediction"].as_f64().unwrap() - 0.4927).abs() < 1e-4);
    assert_eq!(v["beta_star"], 2.0);
}

#[test]
fn exit_codes() {
    assert_eq!(
        rig(&["rho", "--beta", "-1", "--pmf", "2:1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rig(&["rho", "--beta", "1", "--pmf", "2:0.5"]).status.code(),
        Some(2)
    );
    assert_eq!(rig(&["rho", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(
        rig(&["experiment", "--config", "/no/such/file.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rig(&["hypergeom", "--a", "5", "--b", "1", "--k", "4"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"distribution":{"family":"point","size":2},"beta":1,"n_values":[50]}"#,
    )
    .unwrap();
    let out = dir.path().join("missing/dir/r.csv");
    let status = rig(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn experiment_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"distribution":{"family":"point","size":2},"beta":1,"n_values":[500,1000],
            "replicates":3,"master_seed":9,"tasks":["components","degrees","multiplicity"]}"#,
    )
    .unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let v = json(&rig(&[
            "experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]));
        assert_eq!(v["summary"].as_array().unwrap().len(), 2);
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files.pop().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("n,m,rep,seed,n1,n1_frac,pred,abs_err,deg_tv,max_fw,wall_ms\n"));

    let out = rig(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "jsonl",
        "--seed",
        "10",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    for line in text.lines() {
        let row: Value = serde_json::from_str(line).unwrap();
        assert!(row["wall_ms"].is_null());
    }
}

#[test]
fn hypergeom_query_and_grid() {
    let v = json(&rig(&[
        "hypergeom",
        "--a",
        "2",
        "--b",
        "3",
        "--h",
        "1",
        "--k",
        "10",
    ]));
    assert_eq!(v["p_hit"]["exact"], "8/15");
    assert_eq!(v["bounds"].as_array().unwrap().len(), 5);
    assert!(v["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .all(|b| b["holds"] == true));

    let v = json(&rig(&["hypergeom", "--k", "15", "--grid"]));
    assert!(v["violations"].as_array().unwrap().is_empty());
    assert!(v["queries"].as_u64().unwrap() > 0);
}

#[test]
fn explore_census_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let flags = dir.path().join("flags.csv");
    let v = json(&rig(&[
        "explore",
        "--n",
        "3000",
        "--beta",
        "1",
        "--pmf",
        "2:1",
        "--omega",
        "log",
        "--seed",
        "2",
        "--flags",
        flags.to_str().unwrap(),
    ]));
    assert_eq!(v["omega"], 9);
    let full = v["b_full"].as_u64().unwrap();
    assert!(v["b_simple"].as_u64().unwrap() <= full);
    assert!(v["b_regular"].as_u64().unwrap() <= full);
    let csv = std::fs::read_to_string(&flags).unwrap();
    assert_eq!(csv.lines().count(), 3001);
    assert_eq!(
        csv.lines().next(),
        Some("vertex,big_full,big_regular,big_simple")
    );

    let v = json(&rig(&[
        "explore", "--n", "100", "--beta", "1", "--pmf", "2:1", "--omega", "5", "--root", "0",
        "--mode", "simple",
    ]));
    assert_eq!(v["record"]["root"], 0);
    assert_eq!(v["record"]["list"][0], 0);
}

#[test]
fn simulate_and_degree() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("g.txt");
    let v = json(&rig(&[
        "simulate",
        "--n",
        "5000",
        "--beta",
        "1",
        "--pmf",
        "2:1",
        "--seed",
        "4",
        "--dump",
        dump.to_str().unwrap(),
    ]));
    assert!((v["n1_frac"].as_f64().unwrap() - 0.9587).abs() < 0.05);
    assert_eq!(
        std::fs::read_to_string(&dump).unwrap().lines().count(),
        5001
    );

    let v = json(&rig(&[
        "degree", "--n", "20000", "--beta", "1", "--pmf", "2:1", "--seed", "4",
    ]));
    assert!(v["tv"].as_f64().unwrap() < 0.03);
    assert_eq!(v["rate"], 2.0);
}
