//! End-to-end runs of the `isoprofile` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn isoprofile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoprofile"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn exit_code_smoke_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (&["profile", "--K", "0", "--N", "2", "--D", "1", "--v-grid", "0.5"], 0),
        (
            &["profile", "--K", "-2", "--N", "3", "--D", "1", "--v-log", "1e-3:0.9:4"],
            0,
        ),
        (
            &[
                "profile",
                "--K",
                "1",
                "--N",
                "2",
                "--D",
                "3.141592653589793",
                "--v-grid",
                "0.25",
            ],
            0,
        ),
        (
            &[
                "density-check",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--a",
                "0.3",
                "--grid-n",
                "20",
            ],
            0,
        ),
        (
            &[
                "density-check",
                "--K",
                "1",
                "--N",
                "2",
                "--D",
                "3",
                "--constant",
                "--grid-n",
                "12",
            ],
            1,
        ),
        (
            &[
                "sharpness",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--a-log",
                "1e-2:1e-4:3",
            ],
            0,
        ),
        (
            &[
                "sharpness",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--a-grid",
                "1e-2",
                "--limit",
                "0.5",
            ],
            1,
        ),
        (
            &[
                "verify", "--K", "0", "--N", "2", "--D", "1", "--trials", "3", "--grid-n", "10",
            ],
            0,
        ),
        (
            &[
                "verify",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--family-a",
                "1e-3",
                "--psi-band",
                "0.05",
            ],
            0,
        ),
        (
            &[
                "verify",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--family-a",
                "1e-3",
                "--psi-band",
                "1e-6",
            ],
            1,
        ),
        (
            &[
                "oracle", "--K", "0", "--N", "2", "--D", "1", "--v-grid", "0.3", "--grid-n", "128",
            ],
            0,
        ),
        // input errors
        (&[], 2),
        (&["frobnicate"], 2),
        (&["profile", "--K", "0", "--N", "2"], 2),
        (&["profile", "--K", "0", "--N", "2", "--D", "1", "--v-log", "1:2"], 2),
        (&["profile", "--K", "0", "--N", "1", "--D", "1", "--v-grid", "0.5"], 2),
        (&["profile", "--K", "0", "--N", "2", "--D", "1", "--v-grid", "1.5"], 2),
        (&["profile", "--K", "2", "--N", "2", "--D", "4", "--v-grid", "0.5"], 2),
        (
            &[
                "profile",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--v-grid",
                "0.5",
                "--tol-quad",
                "-1",
            ],
            2,
        ),
        (
            &[
                "profile", "--K", "0", "--N", "2", "--D", "1", "--v-grid", "0.5", "--format", "xml",
            ],
            2,
        ),
        (
            &[
                "density-check",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--a",
                "0.3",
                "--format",
                "csv",
            ],
            2,
        ),
        (
            &[
                "density-check",
                "--K",
                "0",
                "--N",
                "2",
                "--D",
                "1",
                "--tabulated",
                "/nonexistent.csv",
            ],
            2,
        ),
        (&["sharpness", "--K", "0", "--N", "2", "--D", "1", "--a-grid", "0.9"], 2),
        (&["verify", "--trials", "2"], 2),
        (&["verify", "--decomposition", "/nonexistent.json"], 2),
    ];
    for (args, expected) in cases {
        let out = isoprofile(args);
        assert_eq!(
            out.status.code(),
            Some(*expected),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        if *expected == 2 {
            let err = String::from_utf8_lossy(&out.stderr);
            assert!(err.contains("Usage:"), "{args:?}: {err}");
        }
    }
}

#[test]
fn help_exits_zero() {
    let out = isoprofile(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("density-check"));
}

#[test]
fn profile_csv_contract() {
    let out = isoprofile(&["profile", "--K", "0", "--N", "2", "--D", "1", "--v-log", "1e-6:0.5:20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "K,N,D,v,a,I,I_asym,ratio");
    assert_eq!(lines.len(), 21);
    let last: Vec<f64> = lines[20].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[3], 0.5);
    assert!((last[5] - 2.0 / 3.0).abs() < 1e-9);
    for line in &lines[1..] {
        for field in line.split(',') {
            let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
        }
    }
}

#[test]
fn profile_json_keys() {
    let out = isoprofile(&[
        "profile", "--K", "0", "--N", "2", "--D", "1", "--v-grid", "0.5", "--format", "json",
    ]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = rows[0].as_object().unwrap();
    let keys: Vec<&str> = row.keys().map(String::as_str).collect();
    for k in ["K", "N", "D", "v", "a", "I", "I_asym", "ratio"] {
        assert!(keys.contains(&k));
    }
}

#[test]
fn constant_density_violation_json() {
    let out = isoprofile(&[
        "density-check",
        "--K",
        "1",
        "--N",
        "2",
        "--D",
        "3",
        "--constant",
        "--max-violations",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["passed"], false);
    let v = &rep["violations"][0];
    for k in ["x0", "x1", "t", "lhs", "rhs", "margin"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    assert!(v["margin"].as_f64().unwrap() <= -6.0);
    assert_eq!(rep["violations"].as_array().unwrap().len(), 3);
}

#[test]
fn sharpness_three_ratios() {
    let out = isoprofile(&[
        "sharpness",
        "--K",
        "0",
        "--N",
        "2",
        "--D",
        "1",
        "--a-log",
        "1e-2:1e-4:3",
    ]);
    let text = stdout(&out);
    let ratios: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 3);
    assert!(ratios[2] <= 1.02);
}

#[test]
fn tabulated_density_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let mut csv = String::from("x,h\n");
    for i in 0..=50 {
        csv.push_str(&format!("{},1\n", i as f64 / 50.0));
    }
    fs::write(&path, csv).unwrap();
    let p = path.to_str().unwrap();
    let out = isoprofile(&[
        "density-check",
        "--K",
        "0",
        "--N",
        "2",
        "--D",
        "1",
        "--tabulated",
        p,
        "--grid-n",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["density"], "tabulated-grid");

    fs::write(&path, "x,h\n0,1\n0.5,1\n0.4,1\n").unwrap();
    let out = isoprofile(&["density-check", "--K", "0", "--N", "2", "--D", "1", "--tabulated", p]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decomposition_save_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let dec = dir.path().join("dec.json");
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let d = dec.to_str().unwrap();
    let out = isoprofile(&[
        "verify",
        "--K",
        "-1",
        "--N",
        "2.5",
        "--D",
        "1",
        "--trials",
        "1",
        "--max-needles",
        "4",
        "--seed",
        "9",
        "--save-decomposition",
        d,
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(&fs::read_to_string(&dec).unwrap()).unwrap();
    for k in ["params", "delta", "residual_mass", "needles"] {
        assert!(record.get(k).is_some());
    }
    assert!(record["needles"][0]["density"]["kind"].is_string());

    let out = isoprofile(&["verify", "--decomposition", d, "--out", second.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(&first).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a["runs"][0]["lhs"], b["runs"][0]["lhs"]);
    assert_eq!(a["runs"][0]["rhs"], b["runs"][0]["rhs"]);
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_owned();
    full.extend(["--out", &p]);
    let out = isoprofile(&full);
    assert!(out.status.code().unwrap() <= 1);
    fs::read(path).unwrap()
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let commands: &[&[&str]] = &[
        &["profile", "--K", "-2", "--N", "3", "--D", "1", "--v-log", "1e-5:0.9:12"],
        &[
            "verify", "--K", "0", "--N", "2", "--D", "1", "--trials", "5", "--seed", "42", "--grid-n", "10",
        ],
        &[
            "density-check",
            "--K",
            "1",
            "--N",
            "2",
            "--D",
            "3",
            "--constant",
            "--grid-n",
            "12",
        ],
    ];
    for (i, args) in commands.iter().enumerate() {
        let a = run_to(dir.path(), &format!("{i}a"), args);
        let b = run_to(dir.path(), &format!("{i}b"), args);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
    let s1 = run_to(
        dir.path(),
        "s1",
        &[
            "verify", "--K", "0", "--N", "2", "--D", "1", "--trials", "2", "--seed", "1", "--grid-n", "8",
        ],
    );
    let s2 = run_to(
        dir.path(),
        "s2",
        &[
            "verify", "--K", "0", "--N", "2", "--D", "1", "--trials", "2", "--seed", "2", "--grid-n", "8",
        ],
    );
    assert_ne!(s1, s2);
}
