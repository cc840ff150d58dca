use super::*;
use crate::constraints::tests::{psi, v};
use crate::lctrs::tests::{comp, compositeness, init, looop, psi_i};

pub(crate) const CORPUS: [(&str, &str); 7] = [
    ("compositeness", include_str!("../../corpus/compositeness.lctrs")),
    ("compositeness_no_circ", include_str!("../../corpus/compositeness_no_circ.lctrs")),
    ("sum", include_str!("../../corpus/sum.lctrs")),
    ("mult", include_str!("../../corpus/mult.lctrs")),
    ("sum_squares", include_str!("../../corpus/sum_squares.lctrs")),
    ("gcd_sub", include_str!("../../corpus/gcd_sub.lctrs")),
    ("gcd_div", include_str!("../../corpus/gcd_div.lctrs")),
];

fn compositeness_spec() -> Spec {
    load(CORPUS[0].1).unwrap()
}

#[test]
fn compositeness_rules_match_the_hand_built_system() {
    let spec = compositeness_spec();
    assert_eq!(spec.lctrs.rules(), compositeness().rules());
    assert_eq!(spec.lctrs.signature().symbols(), compositeness().signature().symbols());
}

#[test]
fn compositeness_goals_match() {
    let spec = compositeness_spec();
    let comp_top = ConstrainedTerm::new(comp(), Formula::True);
    assert_eq!(
        spec.goals[0].formula,
        ReachabilityFormula::new(ConstrainedTerm::new(init(v("n")), psi()), comp_top.clone())
    );
    assert_eq!(
        spec.goals[1].formula,
        ReachabilityFormula::new(ConstrainedTerm::new(looop(v("n"), v("i")), psi_i()), comp_top)
    );
    assert_eq!(spec.goals[0].kind, GoalKind::Prove);
    assert_eq!(spec.goals[1].kind, GoalKind::Circ);
    assert_eq!(spec.options.max_depth, Some(10));
    assert_eq!(spec.options.bound, Some(12));
}

#[test]
fn goal_set_merges_duplicates() {
    let src = format!(
        "{}circ init(n) /\\ (exists u : Int. 1 < u /\\ u < n /\\ n mod u = 0) => comp /\\ true split n > 5;",
        CORPUS[0].1
    );
    let spec = load(&src).unwrap();
    assert_eq!(spec.goals.len(), 3);
    let (goals, splits) = spec.goal_set();
    assert_eq!(goals.len(), 2);
    assert_eq!(splits[0].len(), 1);
}

#[test]
fn corpus_parses_validates_and_round_trips() {
    for (name, src) in CORPUS {
        let ast = parse_spec(src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print_spec(&ast);
        assert_eq!(parse_spec(&printed).unwrap(), ast, "{name}");
        assert_eq!(print_spec(&parse_spec(&printed).unwrap()), printed, "{name}");
        load(src).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn empty_file_is_a_parse_error() {
    assert!(matches!(load(""), Err(SpecError::Parse(_))));
}

fn resolution_error(src: &str) -> ResolutionError {
    match load(src) {
        Err(SpecError::Resolution(e)) => e,
        other => panic!("expected a resolution error, got {other:?}"),
    }
}

#[test]
fn unknown_identifiers_are_reported_with_positions() {
    let base = "sorts Cfg;\nsymbols\n  f : Int -> Cfg;\nvars x : Int;\n";
    let e = resolution_error(&format!("{base}rules\n  f(y) => f(x);\n"));
    assert_eq!((e.pos.line, e.pos.col), (6, 5));
    assert!(e.message.contains("`y`"), "{e}");

    let e = resolution_error(&format!("{base}rules\n  g(x) => f(x);\n"));
    assert!(e.message.contains("unknown symbol `g`"), "{e}");

    let e = resolution_error("sorts Cfg;\nsymbols\n  f : Nat -> Cfg;\n");
    assert_eq!((e.pos.line, e.pos.col), (3, 7));
    assert!(e.message.contains("unknown sort"), "{e}");
}

#[test]
fn variable_sort_clash_is_rejected() {
    let e = resolution_error("sorts Cfg;\nvars x : Int, x : Cfg;\n");
    assert_eq!((e.pos.line, e.pos.col), (2, 15));
    let e = resolution_error(
        "sorts Cfg;\nsymbols\n  f : Int -> Cfg;\nvars x : Int;\nrules\n  f(x) => f(x) if exists x : Cfg. true;\n",
    );
    assert!(e.message.contains("declared with sort Int"), "{e}");
}

#[test]
fn ill_sorted_expressions_are_rejected() {
    let base = "sorts Cfg;\nsymbols\n  f : Int -> Cfg;\n  c : -> Cfg;\nvars x : Int;\nrules\n";
    let e = resolution_error(&format!("{base}  f(c) => c;\n"));
    assert!(e.message.contains("no declaration of `f`"), "{e}");
    let e = resolution_error(&format!("{base}  f(x) => c if x + 1;\n"));
    assert!(e.message.contains("expected a formula"), "{e}");
    let e = resolution_error(&format!("{base}  f(x) => c if c = x;\n"));
    assert!(e.message.contains("cannot compare"), "{e}");
    let e = resolution_error(&format!("{base}  c => c if c;\n"));
    assert!(e.message.contains("expected a formula"), "{e}");
    let e = resolution_error(&format!("{base}  x => c;\n"));
    assert!(e.message.contains("constructor application"), "{e}");
}

#[test]
fn unknown_option_is_rejected() {
    let e = resolution_error("sorts Cfg;\nsymbols\n  c : -> Cfg;\noptions\n  depth = 3;\n");
    assert!(e.message.contains("unknown option"), "{e}");
    let e = resolution_error("sorts Cfg;\nsymbols\n  c : -> Cfg;\noptions\n  enable_disj = 3;\n");
    assert!(e.message.contains("boolean"), "{e}");
}

#[test]
fn non_admitted_signature_is_rejected() {
    let r = load("sorts A, B;\nsubsort A < B;\nsubsort B < A;\nsymbols\n  a : -> A;\n");
    assert!(matches!(r, Err(SpecError::Signature(_))), "{r:?}");
}

#[test]
fn standalone_cterm_resolves_against_the_spec() {
    let spec = compositeness_spec();
    let ct = spec.cterm("loop(n, 2) /\\ n > 3").unwrap();
    assert_eq!(ct.term, looop(v("n"), crate::terms::Term::int(2)));
    assert!(spec.cterm("loop(m, 2) /\\ true").is_err());
}

#[test]
fn surface_rendering_of_resolved_formulas_reparses() {
    let spec = compositeness_spec();
    for g in &spec.goals {
        let text = g.formula.lhs.to_string();
        assert_eq!(spec.cterm(&text).unwrap(), g.formula.lhs, "{text}");
    }
}
