use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
}

fn lvw(reports: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvw"))
        .arg("--reports")
        .arg(reports)
        .args(args)
        .output()
        .expect("lvw runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parse_prints_the_canonical_text() {
    let dir = tempfile::tempdir().unwrap();
    let file = data("corpus/arrow/composite.sc");
    let o = lvw(dir.path(), &["parse", path(&file)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("statechart Composite {"));
    assert!(text.contains("C1 - e -> C2;"));
    let keyword = lvw(dir.path(), &["parse", path(&file), "--render", "keyword"]);
    assert!(stdout(&keyword).contains("from C1 on e goto C2;"));
}

#[test]
fn syntax_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sc");
    std::fs::write(&bad, "statechart X { state A").unwrap();
    let o = lvw(dir.path(), &["parse", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.sc:1:"));
}

#[test]
fn keyword_text_outside_the_selected_variant_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = data("corpus/keyword/blink.sc");
    assert_eq!(
        lvw(dir.path(), &["parse", path(&file), "--select", ""])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lvw(dir.path(), &["parse", path(&file), "--select", "Keyword"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn reduce_applies_the_priority_rule() {
    let dir = tempfile::tempdir().unwrap();
    let file = data("corpus/arrow/composite_conflict.sc");
    let inner = stdout(&lvw(
        dir.path(),
        &["reduce", path(&file), "--priority", "inner"],
    ));
    let outer = stdout(&lvw(
        dir.path(),
        &["reduce", path(&file), "--priority", "outer"],
    ));
    assert!(inner.contains("C1 - e -> C2;") && !inner.contains("C1 - e -> A;"));
    assert!(outer.contains("C1 - e -> A;") && !outer.contains("C1 - e -> C2;"));
}

#[test]
fn sem_counts_machines() {
    let dir = tempfile::tempdir().unwrap();
    let file = data("corpus/arrow/idle.sc");
    let o = lvw(dir.path(), &["sem", path(&file), "--sel", "chaos,open"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Idle: 684 of 684 machines");
}

#[test]
fn refine_writes_evidence_and_sets_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = data("corpus/arrow");
    let ok = lvw(
        dir.path(),
        &[
            "refine",
            "--v1",
            "chaos,open",
            "--v2",
            "stutter,open",
            "--corpus",
            path(&corpus),
        ],
    );
    assert_eq!(ok.status.code(), Some(0));
    let evidence = stdout(&ok)
        .lines()
        .find_map(|l| l.strip_prefix("evidence: ").map(PathBuf::from))
        .unwrap();
    assert!(evidence.starts_with(dir.path()));
    assert!(std::fs::read_to_string(evidence)
        .unwrap()
        .contains("verdict: PASS"));
    let bad = lvw(
        dir.path(),
        &[
            "refine",
            "--v1",
            "stutter,open",
            "--v2",
            "chaos,open",
            "--corpus",
            path(&corpus),
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn config_validation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        lvw(
            dir.path(),
            &["config", "validate", "--select", "GL1,Stutter"]
        )
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        lvw(dir.path(), &["config", "validate", "--select", "GL0,GL1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn featmodel_refine_needs_passing_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let failing = dir.path().join("failing.txt");
    std::fs::write(&failing, "check: x\nverdict: FAIL\n").unwrap();
    let o = lvw(
        dir.path(),
        &[
            "featmodel",
            "refine",
            "--from",
            "Stutter",
            "--to",
            "Chaos",
            "--evidence",
            path(&failing),
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sysmodel_enumerate_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = lvw(dir.path(), &["sysmodel", "enumerate", "--bounds", "1"]);
    assert_eq!(stdout(&o).trim(), "labeled system models: 4");
}

#[test]
fn invalid_system_models_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for f in [
        "sysmodels/invalid/reflexive_sub.smx",
        "sysmodels/invalid/unknown_class.smx",
    ] {
        let o = lvw(dir.path(), &["sysmodel", "check", path(&data(f))]);
        assert_eq!(o.status.code(), Some(2), "{f}");
    }
}
