use std::path::Path;
use std::process::{Command, Output};

fn robin_tri(args: &[&str]) -> Output {
    robin_tri_in(args, None)
}

fn robin_tri_in(args: &[&str], cache_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_robin-tri"));
    cmd.args(args);
    match cache_dir {
        Some(dir) => cmd.env("ROBIN_TRI_CACHE", dir),
        None => cmd.env_remove("ROBIN_TRI_CACHE"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn solve_at_zero_prints_zero_angles_and_neumann_value() {
    let o = robin_tri(&["solve", "--m", "1", "--n", "2", "--sigma", "0"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("(L, M, N) = (0, 0, 0)"), "{s}");
    // 4π²/(27 r²) · 7 with r = 1/(2√3)
    let neumann = 4.0 * std::f64::consts::PI.powi(2) * 12.0 / 27.0 * 7.0;
    let line = s.lines().find(|l| l.starts_with("neumann")).unwrap();
    let v: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!((v - neumann).abs() <= 1e-12 * neumann);
}

#[test]
fn rngaps_csv_matches_gap_bound() {
    let o = robin_tri(&[
        "rngaps", "--sigma", "1", "--side", "1", "--count", "500", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("n,lambda_neumann,lambda_robin,d_n,dbar"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 500);
    let bound = 8.0 * 3f64.sqrt();
    for r in &rows {
        assert!((r[4] - bound).abs() < 1e-12);
        assert!(r[3] > 0.0 && r[3] < bound);
    }
}

#[test]
fn csv_fields_carry_seventeen_digits() {
    let o = robin_tri(&["spectrum", "--count", "20"]);
    assert_eq!(code(&o), 0);
    for line in stdout(&o).lines().skip(1) {
        let value = line.split(',').nth(4).unwrap();
        let mantissa = value.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(mantissa.len(), 17, "{value}");
    }
}

#[test]
fn simplicity_below_threshold_has_no_collisions() {
    let o = robin_tri(&["simplicity", "--sigma-frac", "0.001", "--r2max", "10000"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["collisions"], 0);
    assert_eq!(v["inter_cluster_crossings"], 0);
    assert_eq!(v["simple"], true);
}

#[test]
fn output_independent_of_thread_count() {
    let runs: &[&[&str]] = &[
        &["rngaps", "--count", "3000"],
        &["spectrum", "--count", "2000", "--format", "json"],
        &["spacing", "--count", "2000", "--sigma", "0.5"],
        &["asymptotics", "--mmax", "6", "--points", "4"],
        &[
            "simplicity",
            "--sigma-frac",
            "0.5",
            "--r2max",
            "2000",
            "--format",
            "csv",
        ],
    ];
    for args in runs {
        let one = robin_tri(&[&["--threads", "1"], *args].concat());
        let four = robin_tri(&[&["--threads", "4"], *args].concat());
        assert_eq!(code(&one), 0, "{args:?}");
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["solve", "--m", "1", "--n", "2", "--bogus"],
        &["solve", "--m", "3", "--n", "1"],
        &["solve", "--m", "1", "--n", "2", "--sigma", "-1"],
        &[
            "solve",
            "--m",
            "1",
            "--n",
            "2",
            "--sigma",
            "1",
            "--sigma-frac",
            "0.1",
        ],
        &["solve", "--m", "1", "--n", "2", "--format", "svg"],
        &["--tol", "0", "solve", "--m", "1", "--n", "2"],
        &["--side", "-1", "rngaps"],
        &["--threads", "0", "rngaps"],
        &["spectrum"],
        &["spectrum", "--cutoff", "-5"],
        &["loeschian"],
        &["loeschian", "--limit", "2000000000"],
        &[
            "eigenfunction",
            "--m",
            "2",
            "--n",
            "2",
            "--parity",
            "antisymmetric",
        ],
        &["nosuchcommand"],
    ];
    for args in cases {
        let o = robin_tri(args);
        assert_eq!(
            code(&o),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn usage_error_names_the_flag() {
    let o = robin_tri(&["solve", "--m", "1", "--n", "2", "--sigma", "-1"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--sigma"));
}

#[test]
fn failed_checks_exit_one() {
    // far outside the small-σ regime the remainder bound does not hold
    let o = robin_tri(&[
        "asymptotics",
        "--m",
        "1",
        "--n",
        "1",
        "--sigma-max",
        "3",
        "--points",
        "3",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("m,n,sigma"));
    // the native CRT modulus overflows at K = 9
    let o = robin_tri(&["loeschian", "--certificate", "9"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn certificate_json_shape() {
    let o = robin_tri(&["loeschian", "--certificate", "4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["K"], 4);
    assert_eq!(v["primes"], serde_json::json!([2, 5, 11, 17]));
    let n0 = v["n0"].as_u64().unwrap();
    let window: Vec<u64> = v["window"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(window, (1..=4).map(|j| n0 + j).collect::<Vec<_>>());
    let wide = robin_tri(&["loeschian", "--certificate", "12", "--wide"]);
    assert_eq!(code(&wide), 0);
}

#[test]
fn json_keys_are_sorted() {
    let o = robin_tri(&["solve", "--m", "1", "--n", "2", "--format", "json"]);
    let s = stdout(&o);
    let keys: Vec<&str> = s
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn svg_outputs() {
    let o = robin_tri(&["rngaps", "--count", "600", "--format", "svg"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    assert_eq!(s.matches("<circle").count(), 500);
    let o = robin_tri(&["asymptotics", "--format", "svg", "--plot-sigma-max", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("<polyline").count(), 3);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let o = robin_tri(&[
        "eigenfunction",
        "--m",
        "1",
        "--n",
        "3",
        "--grid",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,y,value\n"));
    // closed lattice with 8 steps per side
    assert_eq!(text.lines().count(), 1 + 9 * 10 / 2);
}

#[test]
fn cached_runs_reproduce_uncached_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--cache", "rngaps", "--count", "800", "--sigma", "0.7"];
    let plain = robin_tri(&args[1..]);
    let first = robin_tri_in(&args, Some(dir.path()));
    let second = robin_tri_in(&args, Some(dir.path()));
    assert_eq!(code(&first), 0);
    assert_eq!(plain.stdout, first.stdout);
    assert_eq!(first.stdout, second.stdout);
    assert!(dir.path().join("solutions.txt").exists());
}
