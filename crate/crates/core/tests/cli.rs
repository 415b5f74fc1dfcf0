use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn varwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn catalog_lists_eleven_mappings() {
    let o = varwave(&["catalog", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ids: Vec<&str> = v["mappings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["id"].as_str().unwrap())
        .collect();
    assert_eq!(
        ids,
        ["M1", "M2", "M3", "Q", "D0", "DPOS", "DNEG", "N1", "N2", "C1", "C2"]
    );
    let text = varwave(&["catalog"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(stdout(&text).contains("DNEG"));
}

#[test]
fn classify_delta_speed() {
    let o = varwave(&["classify", "--c", "(x^2-4)/(t^2-4)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), r#"{"family":"delta","delta":4}"#);
    let o = varwave(&["classify", "--c", "x^2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["family"], "quadratic_x");
    let o = varwave(&["classify", "--c", "x*t + sin(t)"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["family"], "general");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(varwave(&[]).status.code(), Some(2));
    assert_eq!(varwave(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(varwave(&["verify", "--tol", "abc"]).status.code(), Some(2));
    assert_eq!(varwave(&["--help"]).status.code(), Some(0));
}

#[test]
fn validation_errors_exit_one() {
    let cases: [&[&str]; 6] = [
        &[
            "solve",
            "--family",
            "quad17",
            "--F",
            "sin(s",
            "--G",
            "s",
            "--grid",
            "x:1:2:4,t:0:1:4",
        ],
        &[
            "solve",
            "--family",
            "quad17",
            "--F",
            "s",
            "--G",
            "s",
            "--grid",
            "x:-1:1:4,t:0:1:4",
        ],
        &[
            "solve",
            "--family",
            "nope",
            "--F",
            "s",
            "--G",
            "s",
            "--grid",
            "x:1:2:4,t:0:1:4",
        ],
        &["verify", "--tol=-1"],
        &["verify", "--inject", "bogus"],
        &["classify"],
    ];
    for args in cases {
        let o = varwave(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).starts_with("error:"), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn solve_writes_csv_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let o = varwave(&[
        "solve",
        "--family",
        "QUAD17",
        "--F",
        "sin(s)",
        "--G",
        "exp(s)",
        "--grid",
        "x:1:2:3,t:0:1:2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,t,u");
    assert_eq!(lines.len(), 7);
    // u(1, 0) = F(1) + G(1)
    let u: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((u - (1f64.sin() + 1f64.exp())).abs() < 1e-14);
    let header: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("u.csv.json")).unwrap()).unwrap();
    assert_eq!(header["family"], "QUAD17");
    assert_eq!(header["points"], 6);
}

#[test]
fn solve_through_a_mapping() {
    let o = varwave(&[
        "solve",
        "--family",
        "quad17",
        "--F",
        "sin(s)",
        "--G",
        "cos(s)",
        "--mapping",
        "n1",
        "--grid",
        "x:0.5:2:3,T:1:8:3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let header: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(header["mapping"], "N1");
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"family": "quad17", "F": "s", "G": "s", "grid": "x:1:2:2,t:0:1:2"}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let o = varwave(&["solve", "--config", c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // u = x·(2/x) = 2 everywhere; with F = 0, u = 1 − xt
    for line in stdout(&o).lines().skip(1) {
        assert_eq!(line.split(',').nth(2).unwrap(), "2");
    }
    let o = varwave(&["solve", "--config", c, "--F", "0"]);
    let first: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect();
    assert_eq!(first, ["1", "0", "1", "-1"]);
    fs::write(&cfg, r#"{"famly": "quad17"}"#).unwrap();
    assert_eq!(varwave(&["solve", "--config", c]).status.code(), Some(1));
}

#[test]
fn verify_suites_and_defects() {
    let o = varwave(&["verify", "--suite", "roundtrip,integral"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("overall: PASS"));
    let o = varwave(&["verify", "--suite", "integral", "--inject", "kappa", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["defect"], "scale_kappa");
    let o = varwave(&["verify", "--mapping", "q", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS Q"));
}

#[test]
fn verify_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = varwave(&[
            "verify",
            "--suite",
            "solutions,mappings",
            "--trials",
            "3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn ivp_skips_points_outside_determinacy() {
    let o = varwave(&[
        "ivp",
        "--phi",
        "x*sin(1/x)",
        "--psi",
        "x*cos(1/x)",
        "--a",
        "1",
        "--b",
        "4",
        "--grid",
        "x:1:4:7,t:0:0.5:3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let header: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    let outside = header["outside"].as_u64().unwrap();
    assert!(outside > 0);
    assert_eq!(header["points"].as_u64().unwrap() + outside, 21);
    assert_eq!(
        stdout(&o).lines().count() as u64,
        header["points"].as_u64().unwrap() + 1
    );
}

#[test]
fn ivp_from_csv_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let mut csv = String::from("x,phi,psi\n");
    for i in 0..101 {
        let x = 1.0 + i as f64 * 0.02;
        csv.push_str(&format!("{x},{},{}\n", x * (1.0 / x).sin(), x * (1.0 / x).cos()));
    }
    fs::write(&data, csv).unwrap();
    let o = varwave(&[
        "ivp",
        "--data",
        data.to_str().unwrap(),
        "--grid",
        "x:1.2:2.8:3,t:0:0.1:2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // at t = t0 the solution reproduces phi
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[2] - cols[0] * (1.0 / cols[0]).sin()).abs() < 1e-5, "{row}");
    fs::write(&data, "x,phi\n1,2\n").unwrap();
    assert_eq!(
        varwave(&["ivp", "--data", data.to_str().unwrap(), "--grid", "x:1:2:2,t:0:0.1:2"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn compare_reports_second_order() {
    let o = varwave(&["compare", "--family", "quad17"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let header: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    let order = header["order"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&order), "{order}");
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,max_error,l2_error");
    assert_eq!(lines.len(), 4);
    assert_eq!(varwave(&["compare", "--family", "const15"]).status.code(), Some(1));
}
