use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divisor2d"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn delta_single_point() {
    let text = stdout(&["delta", "--pair", "1,2", "--x", "20"]);
    let (h, rows) = csv_rows(&text);
    assert_eq!(h, ["x", "D", "main", "delta"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "28");
    let d: f64 = rows[0][column(&h, "delta")].parse().unwrap();
    assert!((d - 1.632_222_568_928_57).abs() < 1e-12);
    assert!(!text.contains('\r'));
}

#[test]
fn delta_range_is_ascending() {
    let (_, rows) = csv_rows(&stdout(&[
        "delta",
        "--pair",
        "1,1",
        "--x-range",
        "10:1000",
        "--points",
        "3",
    ]));
    assert_eq!(rows.len(), 3);
    let xs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    assert_eq!((xs[0], xs[2]), (10.0, 1000.0));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["delta", "--pair", "2,4", "--x", "3"][..],
        &["delta", "--pair", "1,2"],
        &["meansq", "--pair", "1,1"],
        &["nosuch"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn guard_violations_exit_three() {
    let out = run(&["meansq", "--pair", "1,2", "--T", "1e20"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("guard"));
}

#[test]
fn meansq_schema_and_gap() {
    let (h, rows) = csv_rows(&stdout(&["meansq", "--pair", "1,1", "--T", "1e4,1e5,1e6"]));
    assert_eq!(
        h,
        [
            "a",
            "b",
            "T",
            "integral",
            "ratio",
            "predicted",
            "relative_gap"
        ]
    );
    assert_eq!(rows.len(), 3);
    let gap: f64 = rows[2][column(&h, "relative_gap")].parse().unwrap();
    assert!(gap <= 0.10);
}

#[test]
fn const_both_routes() {
    let text = stdout(&["const", "--pair", "1,1"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    for e in arr {
        let keys: Vec<&str> = e.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(sorted, ["a", "b", "error_bound", "route", "value"]);
        assert!((e["value"].as_f64().unwrap() - 0.654286).abs() < 5e-6);
    }
    let single: serde_json::Value =
        serde_json::from_str(&stdout(&["const", "--pair", "1,2", "--route", "euler"])).unwrap();
    assert_eq!(single["route"], "euler_product");
}

#[test]
fn voronoi_columns() {
    // At the integer x = 100 the series sits at the midpoint of the jump d(100)/2 = 4.5.
    let (h, rows) = csv_rows(&stdout(&[
        "voronoi", "--pair", "1,1", "--x", "100.5", "--z", "10000",
    ]));
    assert_eq!(h, ["x", "z", "delta", "delta_star", "residual"]);
    let r: f64 = rows[0][column(&h, "residual")].parse().unwrap();
    assert!(r.abs() <= 1.0);
    let (h, rows) = csv_rows(&stdout(&[
        "voronoi", "--pair", "1,1", "--x", "100", "--z", "10000",
    ]));
    let r: f64 = rows[0][column(&h, "residual")].parse().unwrap();
    assert!((r - 4.5).abs() <= 1.0);
}

#[test]
fn gtable_rows() {
    let (h, rows) = csv_rows(&stdout(&["gtable", "--pair", "2,3", "--N", "40"]));
    assert_eq!(h, ["n", "g"]);
    assert_eq!(rows.len(), 9);
}

#[test]
fn dioph_sweep_json() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["dioph", "--pair", "1,2"])).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5usize.pow(4) * 5);
    for r in rows {
        assert!(r["count"].as_f64().unwrap() <= 100.0 * r["bound"].as_f64().unwrap());
    }
}

#[test]
fn output_is_deterministic_and_file_matches_stdout() {
    let args = [
        "voronoi",
        "--pair",
        "1,2",
        "--x-range",
        "1e4:2e4",
        "--points",
        "5",
        "--z",
        "1000",
    ];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let path = std::env::temp_dir().join(format!("divisor2d-cli-{}.csv", std::process::id()));
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    assert_eq!(stdout(&with_out), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn json_format_for_tables() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&[
        "gtable", "--pair", "1,1", "--N", "4", "--format", "json",
    ]))
    .unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(v[3]["n"], 4);
}
