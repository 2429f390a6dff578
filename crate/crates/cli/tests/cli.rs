use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pwlfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwlfit"))
        .args(args)
        .output()
        .expect("run pwlfit")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = path(dir, name);
    fs::write(&p, text).unwrap();
    p
}

fn tent(x: f64) -> f64 {
    if x < 40.0 {
        1.0 + 0.5 * x
    } else {
        21.0 - 0.25 * (x - 40.0)
    }
}

fn ramp(x: f64) -> f64 {
    0.1 * x - 2.0
}

/// Two realizable numerical features on an integer grid plus one
/// categorical feature.
fn teacher_json() -> String {
    let samples = |f: fn(f64) -> f64| -> String {
        (0..=100)
            .map(|i| format!("[{}, {}]", i, f(i as f64)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        r#"{{"features": [
            {{"name": "a", "kind": "numerical", "samples": [{}]}},
            {{"name": "b", "kind": "numerical", "samples": [{}]}},
            {{"name": "c", "kind": "categorical", "samples": [[1, 0.5, 2], [2, -0.25, 1], [1, 0.5, 1]]}}
        ]}}"#,
        samples(tent),
        samples(ramp)
    )
}

const EXACT: [&str; 6] = ["--segments", "2", "--samples", "200", "--fx", "identity"];

#[test]
fn fit_line_with_one_segment() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("x,y\n");
    for i in 0..50 {
        let x = i as f64 * 0.25 + 1.0;
        csv.push_str(&format!("{x},{}\n", 2.0 * x - 3.0));
    }
    let input = write(&dir, "line.csv", &csv);
    let out = pwlfit(&["fit", "--input", s(&input), "--segments", "1", "--name", "line"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), r#"PWLCurve("line", [(1, -1), (13.25, 23.5)])"#);
}

#[test]
fn fit_emits_json_to_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pts.csv", "weight,y,x\n1,0,0\n2,1,1\n1,4,2\n3,9,3\n");
    let out_path = path(&dir, "curve.json");
    let out = pwlfit(&["fit", "--input", s(&input), "--segments", "3", "--emit", "json", "--out", s(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["type"], "pwl");
    assert_eq!(json["points"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.csv", "x,y\n0,0\n1,1\n2,0\n");
    let no_y = write(&dir, "no_y.csv", "x,z\n0,0\n1,1\n");
    let bad_num = write(&dir, "bad.csv", "x,y\n0,0\n1,abc\n");
    let one_x = write(&dir, "one.csv", "x,y\n1,0\n1,1\n");

    assert_eq!(pwlfit(&["fit", "--input", s(&good)]).status.code(), Some(0));
    assert_eq!(pwlfit(&[]).status.code(), Some(2));
    assert_eq!(pwlfit(&["fit"]).status.code(), Some(2));
    assert_eq!(pwlfit(&["fit", "--input", s(&good), "--mono", "sideways"]).status.code(), Some(2));
    assert_eq!(pwlfit(&["fit", "--input", s(&good), "--segments", "0"]).status.code(), Some(2));
    assert_eq!(pwlfit(&["fit", "--input", s(&good), "--min-slope", "1", "--max-slope", "0"]).status.code(), Some(2));

    for bad in [&no_y, &bad_num, &one_x, &path(&dir, "missing.csv")] {
        let out = pwlfit(&["fit", "--input", s(bad)]);
        assert_eq!(out.status.code(), Some(3), "{bad:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn distill_then_eval_matches_teacher() {
    let dir = TempDir::new().unwrap();
    let teacher = write(&dir, "teacher.json", &teacher_json());
    let model = path(&dir, "model.json");
    let code = path(&dir, "model.curves");
    let mut args = vec!["distill", "--teacher", s(&teacher), "--out", s(&model), "--emit-code", s(&code)];
    args.extend(EXACT);
    let out = pwlfit(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let literal = fs::read_to_string(&code).unwrap();
    assert!(literal.starts_with("score = sum(["));
    assert!(literal.contains(r#"PWLCurve("a", [(0, 1), (40, 21), (100, 6)])"#), "{literal}");

    let mut csv = String::from("id,a,b,c\n");
    let mut expected = Vec::new();
    for i in 0..40 {
        let (a, b) = (i as f64 * 2.37 + 0.3, 97.0 - i as f64 * 1.9);
        let c = if i % 3 == 0 { 2 } else { 1 };
        csv.push_str(&format!("row{i},{a},{b},{c}\n"));
        expected.push(tent(a) + ramp(b) + if c == 1 { 0.5 } else { -0.25 });
    }
    let features = write(&dir, "features.csv", &csv);
    let scores = path(&dir, "scores.csv");
    let out = pwlfit(&["eval", "--model", s(&model), "--input", s(&features), "--out", s(&scores)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut rdr = csv::Reader::from_path(&scores).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["id", "a", "b", "c", "score"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), expected.len());
    for (i, (row, want)) in rows.iter().zip(&expected).enumerate() {
        assert_eq!(&row[0], format!("row{i}"));
        let got: f64 = row[4].parse().unwrap();
        assert!((got - want).abs() < 1e-6, "row {i}: {got} vs {want}");
    }
}

#[test]
fn eval_reports_missing_columns() {
    let dir = TempDir::new().unwrap();
    let teacher = write(&dir, "teacher.json", &teacher_json());
    let model = path(&dir, "model.json");
    assert!(pwlfit(&["distill", "--teacher", s(&teacher), "--out", s(&model)]).status.success());
    let features = write(&dir, "features.csv", "a,b\n1,2\n");
    let out = pwlfit(&["eval", "--model", s(&model), "--input", s(&features)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`c`"));
}

#[test]
fn distill_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut json = teacher_json();
    // more distinct x than candidates, so quantile sampling kicks in
    let noisy: Vec<String> = (0..3000)
        .map(|i| {
            let x = (i * 7919 % 3000) as f64 / 30.0;
            format!("[{x}, {}, {}]", (x / 7.0).sin() + ((i * 31 % 17) as f64 - 8.0) * 0.01, 1 + i % 3)
        })
        .collect();
    json = json.replacen(
        r#"{"name": "a""#,
        &format!(r#"{{"name": "n", "kind": "numerical", "samples": [{}]}}, {{"name": "a""#, noisy.join(", ")),
        1,
    );
    let teacher = write(&dir, "teacher.json", &json);
    let run = |tag: &str| {
        let model = path(&dir, &format!("model{tag}.json"));
        let code = path(&dir, &format!("model{tag}.curves"));
        let out = pwlfit(&[
            "distill", "--teacher", s(&teacher), "--seed", "7", "--out", s(&model), "--emit-code", s(&code),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(&model).unwrap(), fs::read(&code).unwrap())
    };
    let first = run("1");
    let second = run("2");
    assert_eq!(first, second);
    assert!(String::from_utf8_lossy(&first.1).contains(r#"PWLCurve("n""#));
}

#[test]
fn attribute_realizable_teacher() {
    let dir = TempDir::new().unwrap();
    let teacher = write(&dir, "teacher.json", &teacher_json());
    let mut csv = String::from("a,a:teacher,b,b:teacher,c,c:teacher\n");
    for i in 0..30 {
        let (a, b) = (i as f64 * 3.1, 100.0 - i as f64 * 3.3);
        let (c, ct) = if i % 2 == 0 { (1, 0.5) } else { (2, -0.25) };
        csv.push_str(&format!("{a},{},{b},{},{c},{ct}\n", tent(a), ramp(b)));
    }
    let eval = write(&dir, "eval.csv", &csv);
    let report = path(&dir, "report.csv");
    let mut args = vec!["attribute", "--teacher", s(&teacher), "--eval", s(&eval), "--out", s(&report)];
    args.extend(EXACT);
    let out = pwlfit(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("feature,delta"));
    let rows: Vec<(String, f64)> = lines
        .map(|l| {
            let (f, d) = l.split_once(',').unwrap();
            (f.to_string(), d.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    for (f, d) in &rows {
        assert!((0.0..=1e-8).contains(d), "{f}: {d}");
    }

    let partial = write(&dir, "partial.csv", "a,a:teacher\n1,1.5\n");
    let out = pwlfit(&["attribute", "--teacher", s(&teacher), "--eval", s(&partial)]);
    assert_eq!(out.status.code(), Some(3));
}
