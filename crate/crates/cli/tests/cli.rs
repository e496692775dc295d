use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn cfrecon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfrecon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn annotate_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("patients.annotated");
    let o = cfrecon(&[
        "annotate",
        "--tree",
        p(&data("patients.ptree")),
        "--log",
        p(&data("patients.csv")),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.trim(),
        "->('R':3, X(tau:1, 'L':2):3, *(tau:7, 'A':4):3, X('D':1, 'E':1, 'B':1):3, X(tau:1, 'U':2):3):3"
    );
    let o = cfrecon(&["check", "--tree", p(&out), "--log-size", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "ok");
}

#[test]
fn check_reports_inconsistent_weights() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("bad.ptree");
    fs::write(&tree, "X('a':1, 'b':1):3\n").unwrap();
    let o = cfrecon(&["check", "--tree", p(&tree)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stdout(&o).trim().is_empty());
}

#[test]
fn annotate_rejects_non_fitting_trace() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.variants");
    fs::write(&log, "R,Z;1\n").unwrap();
    let o = cfrecon(&[
        "annotate",
        "--tree",
        p(&data("patients.ptree")),
        "--log",
        p(&log),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("<R,Z>"), "{}", stderr(&o));
}

#[test]
fn annotate_empty_log_gives_zero_weights() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("empty.variants");
    fs::write(&log, "# nothing here\n").unwrap();
    let o = cfrecon(&[
        "annotate",
        "--tree",
        p(&data("patients.ptree")),
        "--log",
        p(&log),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("'R':0"), "{}", stdout(&o));
    assert!(!stdout(&o).contains(":1"));
    assert!(
        stderr(&o).to_lowercase().contains("empty"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn playout_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("loop.ptree");
    fs::write(&tree, "*('a':100, tau:90):10\n").unwrap();
    let orig = dir.path().join("orig.variants");
    fs::write(&orig, "a,a,a,a,a,a,a,a,a,a;10\n").unwrap();
    let out = dir.path().join("plays");
    let o = cfrecon(&[
        "playout",
        "--tree",
        p(&tree),
        "--strategy",
        "D",
        "--variance",
        "0.5",
        "--seed",
        "4",
        "--playouts",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let files: Vec<PathBuf> = (0..3)
        .map(|i| out.join(format!("playout_{i:03}.variants")))
        .collect();
    for f in &files {
        assert!(f.exists(), "{}", f.display());
    }

    let json = dir.path().join("report.json");
    let hist = dir.path().join("hist.csv");
    let mut args = vec![
        "evaluate",
        "--log",
        p(&orig),
        "--json",
        p(&json),
        "--hist",
        p(&hist),
        "--playouts",
    ];
    args.extend(files.iter().map(|f| p(f)));
    let o = cfrecon(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("strategy,playouts,nhi,emd,nmi,af_f1,sf_f1,nf_f1")
    );
    assert!(lines.next().unwrap().starts_with("playouts,3,"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["per_playout"].as_array().unwrap().len(), 3);
    assert!(fs::read_to_string(&hist)
        .unwrap()
        .starts_with("length,count\n"));

    // identical seeds give identical files
    let again = dir.path().join("again");
    cfrecon(&[
        "playout",
        "--tree",
        p(&tree),
        "--strategy",
        "D",
        "--variance",
        "0.5",
        "--seed",
        "4",
        "--playouts",
        "3",
        "--out",
        p(&again),
    ]);
    for i in 0..3 {
        let name = format!("playout_{i:03}.variants");
        assert_eq!(
            fs::read(out.join(&name)).unwrap(),
            fs::read(again.join(&name)).unwrap()
        );
    }
}

#[test]
fn evaluate_signals_solver_cap() {
    let dir = tempfile::tempdir().unwrap();
    let orig = dir.path().join("orig.variants");
    fs::write(&orig, "a;1\nb;1\n").unwrap();
    let o = cfrecon(&[
        "evaluate",
        "--log",
        p(&orig),
        "--emd-cap",
        "1",
        "--playouts",
        p(&orig),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).contains(",NA,"));
}

#[test]
fn lang_lists_the_bounded_language() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("q.ptree");
    fs::write(&tree, "->(+('a', X('b', 'c')), *('d', tau))\n").unwrap();
    let o = cfrecon(&["lang", "--tree", p(&tree), "--unroll", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert!(lines.contains(&"b,a,d,d;1"));

    let o = cfrecon(&["lang", "--tree", p(&tree), "--unroll", "3", "--cap", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn experiment_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data("patients.ptree"), dir.path().join("t.ptree")).unwrap();
    fs::copy(data("patients.csv"), dir.path().join("l.csv")).unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "tree = \"t.ptree\"\nlog = \"l.csv\"\nannotate = true\nplayouts = 4\nseed = 2\nout = \"res\"\n\
         [[strategy]]\nkind = \"B\"\n[[strategy]]\nkind = \"SOTA\"\n",
    )
    .unwrap();
    let o = cfrecon(&["experiment", p(&spec)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("res/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(stdout(&o), summary);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(cfrecon(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cfrecon(&["annotate"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let o = cfrecon(&[
        "playout",
        "--tree",
        p(&data("patients.ptree")),
        "--strategy",
        "D",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(cfrecon(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("broken.ptree");
    fs::write(&tree, "->('a',").unwrap();
    assert_eq!(
        cfrecon(&["lang", "--tree", p(&tree)]).status.code(),
        Some(2)
    );
    let o = cfrecon(&[
        "playout",
        "--tree",
        p(&data("patients.ptree")),
        "--strategy",
        "C",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
