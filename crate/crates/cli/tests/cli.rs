use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn magstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magstat")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const CONFIG: &str = "\
# iron square driven by a uniform current density
mesh = unit_square
n = 4
degree = 1

[material.1]
type = brauer

[source]
type = density
js = 3000
";

#[test]
fn solve_writes_telemetry_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("report.json");
    let fields = dir.path().join("fields.csv");
    fs::write(&cfg, CONFIG).unwrap();
    let o = magstat(&["solve", "--config", p(&cfg), "--out", p(&out), "--field-dump", p(&fields)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["problem"]["elements"], 32);
    assert_eq!(doc["problem"]["space_degree"], 2);
    assert_eq!(doc["report"]["converged"], true);
    assert!(doc["report"]["records"].as_array().unwrap().len() >= 2);

    let csv = fs::read_to_string(&fields).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "element,x,y,bx,by,hx,hy");
    assert!(csv.lines().count() > 32);
}

#[test]
fn solve_with_mesh_file_and_zarantonello() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.msh");
    let fine = dir.path().join("f.msh");
    assert_eq!(code(&magstat(&["mesh", "gen", "--n", "3", "--out", p(&mesh)])), 0);
    assert_eq!(code(&magstat(&["mesh", "refine", "--in", p(&mesh), "--out", p(&fine)])), 0);
    let cfg = dir.path().join("z.cfg");
    fs::write(
        &cfg,
        "[material.1]\ntype = anisotropic\nn11 = 2\nn12 = 0.3\nn22 = 1\n[source]\ntype = density\njs = 1\n[newton]\nsolver = zarantonello\nmax_iter = 200\ntol_increment = 1e-8\n",
    )
    .unwrap();
    let out = dir.path().join("z.json");
    let o = magstat(&["solve", "--config", p(&cfg), "--mesh", p(&fine), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["problem"]["elements"], 72);
    assert_eq!(doc["report"]["method"], "zarantonello");
}

#[test]
fn study_writes_csv_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let tel = dir.path().join("tel");
    let o = magstat(&[
        "study", "--benchmark", "manufactured", "--degree", "1", "--levels", "2", "--csv", p(&csv), "--telemetry", p(&tel),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level,ne,dof,iter,err_b,eoc_b,err_h,eoc_h");
    assert_eq!(lines.len(), 3);
    assert_eq!(fs::read_dir(&tel).unwrap().count(), 2);
}

#[test]
fn material_check_prints_bounds() {
    let o = magstat(&["material-check", "--material", "brauer"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("s_star         2.067"));
    assert!(out.contains("gamma          4.0000000000e2"));
    let o = magstat(&["material-check", "--material", "linear", "--params", "nu=5"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // usage
    assert_eq!(code(&magstat(&["frobnicate"])), 1);
    assert_eq!(code(&magstat(&["material-check", "--material", "unobtainium"])), 1);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "mesh = unit_square\nbogus = 3\n[material.1]\ntype = linear\n").unwrap();
    let out = dir.path().join("o.json");
    assert_eq!(code(&magstat(&["solve", "--config", p(&bad), "--out", p(&out)])), 1);
    // io
    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&magstat(&["solve", "--config", p(&missing), "--out", p(&out)])), 3);
    // solver: iteration budget too small to converge
    let cfg = dir.path().join("short.cfg");
    fs::write(&cfg, format!("{CONFIG}\n[newton]\nmax_iter = 1\n")).unwrap();
    assert_eq!(code(&magstat(&["solve", "--config", p(&cfg), "--out", p(&out)])), 2);
    assert!(out.exists());
    // help is not an error
    assert_eq!(code(&magstat(&["--help"])), 0);
}
