//! End-to-end runs of the `cliffcalc` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const DIAG_1_M2: &str = r#"{"n":1,"d":2,"entries":[[[1,0],[0,0]],[[0,0],[-2,0]]]}"#;
const DIAG_2_M3: &str = r#"{"n":1,"d":2,"entries":[[[2,0],[0,0]],[[0,0],[-3,0]]]}"#;
const E1: &str = r#"{"n":1,"d":1,"entries":[[[0,1]]]}"#;
const NILPOTENT: &str = r#"{"n":1,"d":2,"entries":[[[0,0],[1,0]],[[0,0],[0,0]]]}"#;
const ZERO: &str = r#"{"n":1,"d":1,"entries":[[[0,0]]]}"#;
const S_OVER_SQ: &str = r#"{"type":"builtin","name":"s_over_one_plus_s2_pow","params":{"k":2}}"#;
const MONOMIAL_S: &str = r#"{"type":"builtin","name":"monomial","params":{"k":1}}"#;

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().expect("tempdir"),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).expect("write");
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cliffcalc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn cliffcalc")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

/// Real parts of the diagonal of a result matrix.
fn diag_scalars(m: &Value) -> Vec<f64> {
    let d = m["d"].as_u64().unwrap() as usize;
    (0..d).map(|i| m["entries"][i][i][0].as_f64().unwrap()).collect()
}

fn max_off_diag(m: &Value) -> f64 {
    let d = m["d"].as_u64().unwrap() as usize;
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for (k, c) in m["entries"][i][j].as_array().unwrap().iter().enumerate() {
                if i != j || k != 0 {
                    worst = worst.max(c.as_f64().unwrap().abs());
                }
            }
        }
    }
    worst
}

#[test]
fn spectrum_of_real_diagonal() {
    let w = Work::new();
    w.file("t.json", DIAG_1_M2);
    let o = run(&["spectrum", "t.json"], w.dir.path());
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let spheres: Vec<(f64, f64)> = v["spectrum"]["spheres"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["x"].as_f64().unwrap(), s["y"].as_f64().unwrap()))
        .collect();
    assert_eq!(spheres.len(), 2);
    assert!((spheres[0].0 + 2.0).abs() < 1e-12 && spheres[0].1.abs() < 1e-12);
    assert!((spheres[1].0 - 1.0).abs() < 1e-12 && spheres[1].1.abs() < 1e-12);
    assert_eq!(v["bisectoriality"]["verdict"]["verdict"], "bisectorial");
    assert_eq!(v["manifest"]["command"], "spectrum");
    assert_eq!(v["manifest"]["inputs"][0], "t.json");
}

#[test]
fn spectrum_of_generator_is_not_bisectorial() {
    let w = Work::new();
    w.file("t.json", E1);
    let o = run(&["spectrum", "t.json"], w.dir.path());
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let s = &v["spectrum"]["spheres"][0];
    assert!(s["x"].as_f64().unwrap().abs() < 1e-12);
    assert!((s["y"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["bisectoriality"]["verdict"]["verdict"], "not_bisectorial");
}

#[test]
fn malformed_json_exits_2_with_position() {
    let w = Work::new();
    w.file("t.json", "{\"n\": 1,\n \"d\": ");
    let o = run(&["spectrum", "t.json"], w.dir.path());
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn bad_entry_shape_exits_2() {
    let w = Work::new();
    w.file("t.json", r#"{"n":1,"d":2,"entries":[[[1,0]]]}"#);
    let o = run(&["spectrum", "t.json"], w.dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("entries"));
}

#[test]
fn calc_omega_writes_rational_value() {
    let w = Work::new();
    w.file("t.json", DIAG_2_M3);
    w.file("f.json", S_OVER_SQ);
    let o = run(
        &["calc", "t.json", "f.json", "--mode", "omega", "--out", "r.json"],
        w.dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(w.path("r.json")).unwrap()).unwrap();
    let d = diag_scalars(&v["result"]);
    assert!((d[0] - 2.0 / 25.0).abs() < 1e-9, "{d:?}");
    assert!((d[1] + 3.0 / 100.0).abs() < 1e-9, "{d:?}");
    assert!(max_off_diag(&v["result"]) < 1e-9);
    let q = v["quadrature"].as_array().unwrap();
    assert!(!q.is_empty());
    assert!(q[0]["panels"].as_u64().unwrap() > 0);
    assert!(q[0]["delta"].as_f64().is_some());
    assert!(!q[0]["truncation"].as_array().unwrap().is_empty());
}

#[test]
fn calc_hinfty_identity_echoes_operator() {
    let w = Work::new();
    w.file("t.json", DIAG_2_M3);
    w.file("f.json", MONOMIAL_S);
    let o = run(&["calc", "t.json", "f.json", "--mode", "hinfty"], w.dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let d = diag_scalars(&v["result"]);
    assert!((d[0] - 2.0).abs() < 1e-8 && (d[1] + 3.0).abs() < 1e-8, "{d:?}");
    assert!(max_off_diag(&v["result"]) < 1e-8);
    assert!(v["hinfty"]["regularizer"].as_str().is_some());
}

#[test]
fn calc_omega_rejects_unbounded_function() {
    let w = Work::new();
    w.file("t.json", DIAG_2_M3);
    w.file("f.json", MONOMIAL_S);
    let o = run(&["calc", "t.json", "f.json", "--mode", "omega"], w.dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn calc_rejects_wrong_unit_length() {
    let w = Work::new();
    w.file("t.json", DIAG_2_M3);
    w.file("f.json", S_OVER_SQ);
    let o = run(&["calc", "t.json", "f.json", "--j", "1", "0"], w.dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_all_passes_for_real_diagonal() {
    let w = Work::new();
    w.file("t.json", DIAG_1_M2);
    let o = run(&["verify", "t.json", "--suite", "all", "--seed", "0"], w.dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let checks = v["report"]["checks"].as_array().unwrap();
    assert!(checks.len() > 50);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert_eq!(v["manifest"]["seed"], 0);
}

#[test]
fn verify_nilpotent_is_refused() {
    let w = Work::new();
    w.file("t.json", NILPOTENT);
    let o = run(&["verify", "t.json", "--suite", "all"], w.dir.path());
    assert_eq!(code(&o), 5);
    let v = json(&o);
    assert!(v["report"]["refusal"].as_str().unwrap().contains("not bisectorial"));
}

#[test]
fn verify_unknown_suite_exits_2() {
    let w = Work::new();
    w.file("t.json", DIAG_1_M2);
    let o = run(&["verify", "t.json", "--suite", "bogus"], w.dir.path());
    assert_eq!(code(&o), 2);
}

fn read_profile(bytes: &[u8]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn rayprofile_of_zero_is_one() {
    let w = Work::new();
    w.file("t.json", ZERO);
    let o = run(&["rayprofile", "t.json", "--out", "p.csv"], w.dir.path());
    assert_eq!(code(&o), 0);
    let (header, rows) = read_profile(&std::fs::read(w.path("p.csv")).unwrap());
    assert_eq!(header[0], "t");
    assert!(header.len() > 1);
    // 12 decades at 60 points each, both ends included.
    assert_eq!(rows.len(), 721);
    assert!((rows[0][0] - 1e-6).abs() < 1e-18);
    assert!((rows[720][0] / 1e6 - 1.0).abs() < 1e-12);
    for row in &rows {
        for &v in &row[1..] {
            assert!((v - 1.0).abs() < 1e-12, "{row:?}");
        }
    }
}

#[test]
fn rayprofile_real_diagonal_is_bounded() {
    let w = Work::new();
    w.file("t.json", DIAG_1_M2);
    let o = run(&["rayprofile", "t.json", "--phi", "0.7853981633974483"], w.dir.path());
    assert_eq!(code(&o), 0);
    let (header, rows) = read_profile(&o.stdout);
    let col = header
        .iter()
        .position(|h| h == &format!("psi={:.12}", std::f64::consts::FRAC_PI_2))
        .expect("imaginary-axis column");
    let sup = rows.iter().map(|r| r[col]).fold(0.0, f64::max);
    // Normal operator: |s| / dist(s, spectrum) on the imaginary axis is at most 1.
    assert!(sup <= 1.0 + 1e-9 && sup > 0.9, "{sup}");
}

#[test]
fn rayprofile_nilpotent_grows_like_inverse_t() {
    let w = Work::new();
    w.file("t.json", NILPOTENT);
    let o = run(&["rayprofile", "t.json"], w.dir.path());
    assert_eq!(code(&o), 0);
    let (_, rows) = read_profile(&o.stdout);
    for r in rows.iter().take(60) {
        let t = r[0];
        for &v in &r[1..] {
            // t ||S_L^-1|| = t ||s^-1 + s^-2 N|| ~ 1/t near zero.
            assert!((v * t - 1.0).abs() < 1e-3, "t = {t}, value {v}");
        }
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let w = Work::new();
    w.file("t.json", DIAG_2_M3);
    w.file("f.json", S_OVER_SQ);
    let a = run(&["calc", "t.json", "f.json", "--mode", "extended"], w.dir.path());
    let b = run(&["calc", "t.json", "f.json", "--mode", "extended"], w.dir.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["verify", "t.json", "--suite", "algebra,kernel", "--seed", "3"], w.dir.path());
    let b = run(&["verify", "t.json", "--suite", "algebra,kernel", "--seed", "3"], w.dir.path());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_thread_env_exits_2() {
    let w = Work::new();
    w.file("t.json", ZERO);
    let o = Command::new(env!("CARGO_BIN_EXE_cliffcalc"))
        .args(["spectrum", "t.json"])
        .env("CLIFFCALC_THREADS", "zero")
        .current_dir(w.dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn calc_writes_node_table() {
    let w = Work::new();
    w.file("t.json", DIAG_2_M3);
    w.file("f.json", S_OVER_SQ);
    let o = run(
        &["calc", "t.json", "f.json", "--phi", "0.6", "--nodes", "n.csv"],
        w.dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(w.path("n.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("segment,param,re_s,im_s,re_w,im_w"));
    assert!(lines.count() > 32);
}

#[test]
fn verify_writes_residual_csv() {
    let w = Work::new();
    w.file("t.json", DIAG_1_M2);
    let o = run(
        &["verify", "t.json", "--suite", "kernel,product", "--residuals", "r.csv"],
        w.dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    let mut r = csv::Reader::from_path(w.path("r.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["suite", "name", "residual", "tolerance", "passed"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), report["report"]["checks"].as_array().unwrap().len());
    assert!(rows.iter().all(|row| &row[4] == "true"));
}
