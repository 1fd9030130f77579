use std::fs;
use std::process::{Command, Output};

fn amgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amgm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gap_accepts_fractions() {
    let v = json(&amgm(&[
        "gap",
        "--alpha",
        "2/3,1/6,1/6",
        "--beta",
        "1/3,1/3,1/3",
        "--x",
        "1,2,1/2",
    ]));
    let gap = v["gap_alpha"].as_f64().unwrap();
    assert!((gap - 1.0 / 12.0).abs() < 1e-14);
    assert_eq!(v["profile"]["argmin_set"], serde_json::json!([1, 2]));
}

#[test]
fn equality_reports_the_left_side() {
    let v = json(&amgm(&[
        "equality",
        "--alpha",
        "2/3,1/6,1/6",
        "--beta",
        "1/3,1/3,1/3",
        "--x",
        "1,2,0.5",
    ]));
    assert_eq!(v["left_equal"], true);
    assert_eq!(v["right_equal"], false);
}

#[test]
fn weights_off_by_rounding_need_renormalize() {
    let args = [
        "gap",
        "--alpha",
        "0.3333333,0.3333333,0.3333333",
        "--beta",
        "1/3,1/3,1/3",
        "--x",
        "1,4,9",
    ];
    let out = amgm(&args);
    assert_eq!(out.status.code(), Some(2));
    let mut args = args.to_vec();
    args.push("--renormalize");
    assert!(amgm(&args).status.success());
}

#[test]
fn bounds_and_young() {
    let v = json(&amgm(&["bounds", "--alpha", "2/3,1/6,1/6", "--x", "1,4,9"]));
    let r = v["ratio"].as_f64().unwrap();
    assert!(v["ratio_lower"].as_f64().unwrap() <= r && r <= v["ratio_upper"].as_f64().unwrap());

    let v = json(&amgm(&[
        "young", "--u", "1", "--v", "2", "--p", "2", "--beta", "0.25",
    ]));
    assert!((v["mid"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn holder_reads_atom_csv() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.csv");
    fs::write(&two, "mass,f,g\n0.5,1,2\n0.5,2,1\n").unwrap();
    let v = json(&amgm(&[
        "holder",
        "--file",
        two.to_str().unwrap(),
        "--p",
        "2",
        "--beta",
        "0.25",
    ]));
    assert!((v["envelope"]["inner"].as_f64().unwrap() - 2.0).abs() < 1e-14);
    assert!((v["angular_distance"].as_f64().unwrap() - 0.632_455_532_033_675_9).abs() < 1e-14);

    let three = dir.path().join("three.csv");
    fs::write(&three, "mass,f,g,h\n1,1,2,3\n1,2,1,1\n").unwrap();
    let path = three.to_str().unwrap();
    assert_eq!(
        amgm(&["holder", "--file", path, "--p", "2"]).status.code(),
        Some(2)
    );
    let v = json(&amgm(&["holder", "--file", path, "--ps", "3,3,3"]));
    // equal exponents pin the envelope at the inner integral
    let e = &v["envelope"];
    for side in ["lower", "upper"] {
        assert!((e[side].as_f64().unwrap() - 8.0).abs() < 1e-12);
    }
}

#[test]
fn jensen_takes_catalog_names() {
    let v = json(&amgm(&[
        "jensen", "--alpha", "1/2,1/2", "--beta", "1/4,3/4", "--x", "-1,3", "--f", "square",
    ]));
    assert!((v["gap_alpha"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    let out = amgm(&[
        "jensen", "--alpha", "1/2,1/2", "--beta", "1/2,1/2", "--x", "1,2", "--f", "cosh",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_emits_one_row_per_draw() {
    let out = amgm(&[
        "sample",
        "--n",
        "4",
        "--trials",
        "5",
        "--seed",
        "3",
        "--sampler",
        "sphere",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "draw,x_1,x_2,x_3,x_4");
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        let sum: f64 = line
            .split(',')
            .skip(1)
            .map(|v| v.parse::<f64>().unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-14);
    }
    assert_eq!(
        text,
        stdout(&amgm(&[
            "sample",
            "--n",
            "4",
            "--trials",
            "5",
            "--seed",
            "3",
            "--sampler",
            "sphere"
        ]))
    );
}

#[test]
fn experiment_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["ratio", "gap", "wratio"] {
        let paths: Vec<_> = (0..2)
            .map(|i| dir.path().join(format!("{kind}{i}.csv")))
            .collect();
        for p in &paths {
            let out = amgm(&[
                "experiment",
                kind,
                "--n",
                "10,200",
                "--trials",
                "150",
                "--seed",
                "99",
                "--scheme",
                "dirichlet_random",
                "--out",
                p.to_str().unwrap(),
            ]);
            assert!(
                out.status.success(),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        let a = fs::read(&paths[0]).unwrap();
        assert_eq!(a, fs::read(&paths[1]).unwrap());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("n,trials,epsilon,lambda,scheme,hit_fraction,"));
        assert_eq!(text.lines().count(), 3);
    }
}

#[test]
fn experiment_weights_file_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.txt");
    fs::write(&w, "# four weights\n0.4\n0.3\n\n0.2\n0.1\n").unwrap();
    let out = amgm(&[
        "experiment",
        "gap",
        "--weights-file",
        w.to_str().unwrap(),
        "--trials",
        "50",
        "--format",
        "json",
    ]);
    let v = json(&out);
    assert_eq!(v[0]["n"], 4);
    assert_eq!(v[0]["scheme"], "explicit");
    assert_eq!(v[0]["bridge_violations"], 0);
}

#[test]
fn experiment_rejects_bad_config() {
    for eps in ["1", "1.5", "-0.1"] {
        let out = amgm(&[
            "experiment",
            "ratio",
            "--n",
            "10",
            "--trials",
            "5",
            "--epsilon",
            eps,
        ]);
        assert_eq!(out.status.code(), Some(2), "epsilon {eps}");
    }
    let out = amgm(&["experiment", "ratio", "--n", "1", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = amgm(&[
        "experiment",
        "ratio",
        "--n",
        "10",
        "--trials",
        "5",
        "--epsilon",
        "0",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn suite_exit_codes() {
    let out = amgm(&["suite", "--trials", "500", "--format", "csv"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("check,instances,violations,worst_margin\n"));

    let out = amgm(&["suite", "--trials", "500", "--inject-bug"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["violations"].as_u64().unwrap() > 0));

    let out = amgm(&["suite", "--trials", "0"]);
    assert!(out.status.success());
}

#[test]
fn selfcheck_passes() {
    let out = amgm(&["selfcheck"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
}
