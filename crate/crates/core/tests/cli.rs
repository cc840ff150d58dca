use std::path::PathBuf;

use lctrs_core::frontend::cli::{run, EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_OK};

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "corpus", &format!("{name}.lctrs")].iter().collect();
    p.to_string_lossy().into_owned()
}

fn lctrs(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("lctrs").chain(args.iter().copied()), &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn prove_compositeness() {
    let file = corpus("compositeness");
    let (code, out, err) = lctrs(&["prove", &file, "--dump-proof"]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert_eq!(out.matches(" proved").count(), 2, "{out}");
    assert!(out.contains("[der-forall]") && out.contains("[circ #2]"), "{out}");
}

#[test]
fn prove_json_schema() {
    let file = corpus("compositeness");
    let (code, out, _) = lctrs(&["prove", &file, "--dump-proof", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let goals = v.as_array().unwrap();
    assert_eq!(goals.len(), 2);
    let tree = &goals[1]["tree"];
    assert_eq!(tree["rule"], "der-forall");
    assert_eq!(tree["children"].as_array().unwrap().len(), 2);
    for key in ["goal", "conditions", "children"] {
        assert!(tree.get(key).is_some(), "{key} missing");
    }
    let cond = &tree["conditions"][0];
    assert!(cond["formula"].is_string() && cond["verdict"].is_string(), "{cond}");
}

#[test]
fn prove_without_circularity_fails() {
    let file = corpus("compositeness_no_circ");
    let (code, out, _) = lctrs(&["prove", &file, "--max-depth", "3"]);
    assert_eq!(code, EXIT_FAILED, "{out}");
    assert!(out.contains("failed") && out.contains("open: loop("), "{out}");
}

#[test]
fn oracle_compositeness_is_valid() {
    let file = corpus("compositeness");
    let (code, out, err) = lctrs(&["oracle", &file, "--bound", "8", "--steps", "20"]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.contains("valid"), "{out}");
}

#[test]
fn oracle_exports_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let edges = dir.path().join("g.txt");
    let file = corpus("compositeness_no_circ");
    let (code, _, _) = lctrs(&[
        "oracle",
        &file,
        "--bound",
        "6",
        "--export-dot",
        dot.to_str().unwrap(),
        "--export-edges",
        edges.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let (code, out, _) = lctrs(&["check-graph", edges.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn check_graph_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("edge 0 1\nedge 1 0\nP 0\n", EXIT_OK),
        ("edge 0 1\nedge 0 2\nP 0\nQ 2\n", EXIT_FAILED),
        ("edge 0 1\nedge 0 2\nfrontier 1\nP 0\nQ 2\n", EXIT_INCONCLUSIVE),
        ("edge 0 x\n", EXIT_INPUT),
    ];
    for (i, (text, want)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("{i}.txt"));
        std::fs::write(&path, text).unwrap();
        let (code, out, err) = lctrs(&["check-graph", path.to_str().unwrap()]);
        assert_eq!(code, *want, "{text}: {out}{err}");
    }
}

#[test]
fn derive_prints_successors() {
    let file = corpus("compositeness");
    let (code, out, err) = lctrs(&["derive", &file, "--term", "loop(n, i) /\\ n > 3"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("rule 2 at top: comp"), "{out}");
    assert!(out.contains("rule 3 at top: loop(n, i + 1)"), "{out}");
    assert!(out.contains("2 derivative(s)"), "{out}");
    let (code, _, err) = lctrs(&["derive", &file, "--term", "loop(m) /\\ true"]);
    assert_eq!(code, EXIT_INPUT, "{err}");
}

#[test]
fn validate_corpus() {
    for name in ["compositeness", "compositeness_no_circ", "sum", "mult", "sum_squares", "gcd_sub", "gcd_div"] {
        let (code, out, err) = lctrs(&["validate", &corpus(name)]);
        assert_eq!(code, EXIT_OK, "{name}: {err}");
        assert!(out.starts_with("ok: "), "{out}");
    }
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lctrs");
    std::fs::write(&bad, "sorts Cfg;\nsymbols\n  c : -> Cfg;\nrules\n  f(x) => c;\n").unwrap();
    let (code, _, err) = lctrs(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("5:5"), "{err}");
    let (code, _, _) = lctrs(&["prove", dir.path().join("missing.lctrs").to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = lctrs(&["frobnicate"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, out, _) = lctrs(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("check-graph"));
}

#[test]
fn missing_solver_is_inconclusive() {
    let file = corpus("compositeness");
    let (code, out, err) = lctrs(&["prove", &file, "--solver", "/nonexistent/z3"]);
    assert_eq!(code, EXIT_INCONCLUSIVE, "{out}{err}");
}
