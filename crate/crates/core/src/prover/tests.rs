use super::*;
use crate::constraints::tests::{cfg, gt, psi, v};
use crate::lctrs::tests::{b_guard, comp, compositeness, init, looop, psi_i};
use crate::signature::{BuiltinOp, Sort};
use crate::smt::{AssumeSat, Solver, SolverConfig};

fn solver() -> Option<Solver> {
    let s = Solver::new(SolverConfig::resolve(None));
    s.is_available().then_some(s)
}

fn ct(t: Term, f: Formula) -> ConstrainedTerm {
    ConstrainedTerm::new(t, f)
}

fn comp_top() -> ConstrainedTerm {
    ct(comp(), Formula::True)
}

fn goal1() -> ReachabilityFormula {
    ReachabilityFormula::new(ct(init(v("n")), psi()), comp_top())
}

fn goal2() -> ReachabilityFormula {
    ReachabilityFormula::new(ct(looop(v("n"), v("i")), psi_i()), comp_top())
}

fn guarded(f: ReachabilityFormula) -> Goal {
    Goal {
        has_der_ancestor: true,
        depth: 1,
        ..Goal::root(f)
    }
}

fn psi_c() -> Formula {
    Formula::exists(
        vec![Var::int("k")],
        Formula::and([gt(v("k"), Term::int(1)), Formula::eq(v("n"), Term::mul(v("i"), v("k")))]),
    )
}

#[test]
fn axiom_on_false_and_not_on_true() {
    let g = Goal::root(ReachabilityFormula::new(ct(comp(), Formula::False), comp_top()));
    assert_eq!(apply_axiom(&g, &AssumeSat).unwrap().unwrap().kind, NodeKind::Axiom);
    let g = Goal::root(ReachabilityFormula::new(ct(init(v("n")), Formula::True), comp_top()));
    assert!(apply_axiom(&g, &AssumeSat).unwrap().is_none());
}

#[test]
fn axiom_closes_loop_residual() {
    let Some(s) = solver() else { return };
    let psi_c_next = psi_i().apply(&Subst::singleton(Var::int("i"), Term::add(v("i"), Term::int(1))));
    let f = Formula::and([psi_i(), b_guard(), Formula::not(psi_c_next)]);
    let g = Goal::root(ReachabilityFormula::new(
        ct(looop(v("n"), Term::add(v("i"), Term::int(1))), f),
        comp_top(),
    ));
    assert!(apply_axiom(&g, &s).unwrap().is_some());
}

#[test]
fn subs_examples() {
    let sig = compositeness().signature().clone();
    let g = Goal::root(ReachabilityFormula::new(ct(comp(), Formula::and([psi(), psi_c()])), comp_top()));
    let step = apply_subs(&sig, &g, &AssumeSat).unwrap().unwrap();
    assert_eq!(step.children[0].formula.lhs.constraint, Formula::False);
    assert!(step.children[0].after_subs);

    let g = Goal::root(goal1());
    assert!(apply_subs(&sig, &g, &AssumeSat).unwrap().is_none());

    let x = Term::var("x", Sort::int());
    let y = Term::var("y", Sort::int());
    let g = Goal::root(ReachabilityFormula::new(
        ct(x.clone(), gt(x.clone(), Term::int(0))),
        ct(y.clone(), gt(y, Term::int(5))),
    ));
    let step = apply_subs(&sig, &g, &AssumeSat).unwrap().unwrap();
    let residual = &step.children[0].formula.lhs.constraint;
    for k in -10..=10 {
        let sub = Subst::singleton(Var::int("x"), Term::int(k));
        let expect = k > 0 && k <= 5;
        assert_eq!(simplify(&residual.apply(&sub)), if expect { Formula::True } else { Formula::False }, "x={k}");
    }
}

#[test]
fn der_examples() {
    let r = compositeness();
    let mut ctr = FreshCounter::new();
    let step = apply_der(&r, &Goal::root(goal1()), 64, &mut ctr, &AssumeSat).unwrap().unwrap();
    assert_eq!(step.children.len(), 1);
    assert_eq!(step.children[0].formula.lhs, ct(looop(v("n"), Term::int(2)), psi()));
    assert!(step.children[0].has_der_ancestor);
    assert_eq!(step.children[0].depth, 1);

    let g = Goal::root(ReachabilityFormula::new(comp_top(), comp_top()));
    assert!(apply_der(&r, &g, 64, &mut ctr, &AssumeSat).unwrap().is_none());

    if let Some(s) = solver() {
        let step = apply_der(&r, &Goal::root(goal2()), 64, &mut ctr, &s).unwrap().unwrap();
        assert_eq!(step.children.len(), 2);
        assert_eq!(step.children[0].formula.lhs.term, comp());
        assert_eq!(step.children[1].formula.lhs.term, looop(v("n"), Term::add(v("i"), Term::int(1))));
        assert!(apply_der(&r, &Goal::root(goal2()), 1, &mut ctr, &s).unwrap().is_none());
    }
}

#[test]
fn circ_examples() {
    let r = compositeness();
    let sig = r.signature().clone();
    let gs = vec![goal1(), goal2()];
    let mut ctr = FreshCounter::new();
    let g = guarded(ReachabilityFormula::new(ct(looop(v("n"), Term::int(2)), psi()), comp_top()));
    let step = apply_circ(&sig, &g, &gs, 1, &mut ctr, &AssumeSat).unwrap().unwrap();
    assert_eq!(step.circularity_used, Some(1));
    let [covered, rest] = &step.children[..] else { panic!() };
    assert_eq!(covered.formula.lhs.term, comp());
    assert_eq!(rest.formula.lhs.term, looop(v("n"), Term::int(2)));
    assert!(covered.formula.lhs.free_vars().iter().all(|x| x.name.as_ref() == "n"));

    assert!(apply_circ(&sig, &g, &gs, 0, &mut ctr, &AssumeSat).unwrap().is_none());

    let root = Goal::root(g.formula.clone());
    assert_eq!(
        apply_circ(&sig, &root, &gs, 1, &mut ctr, &AssumeSat).unwrap_err(),
        ProverError::GuardednessViolation
    );
}

#[test]
fn circ_ignores_other_targets() {
    let r = compositeness();
    let other = ReachabilityFormula::new(ct(looop(v("n"), v("i")), psi_i()), ct(init(v("n")), Formula::True));
    let g = guarded(ReachabilityFormula::new(ct(looop(v("n"), Term::int(2)), psi()), comp_top()));
    let mut ctr = FreshCounter::new();
    assert!(apply_circ(r.signature(), &g, &[other], 0, &mut ctr, &AssumeSat).unwrap().is_none());
}

#[test]
fn circ_with_shared_variable_keeps_it() {
    let r = compositeness();
    let target = ct(init(v("n")), Formula::True);
    let c = ReachabilityFormula::new(ct(looop(v("n"), v("i")), Formula::True), target.clone());
    let g = guarded(ReachabilityFormula::new(ct(looop(v("m"), Term::int(3)), Formula::True), ct(init(v("m")), Formula::True)));
    let mut ctr = FreshCounter::new();
    let step = apply_circ(r.signature(), &g, &[c], 0, &mut ctr, &AssumeSat).unwrap().unwrap();
    assert_eq!(step.children[0].formula.lhs.term, init(v("m")));
    assert_eq!(step.children[0].formula.lhs.constraint, Formula::True);
    assert_eq!(step.children[1].formula.lhs.constraint, Formula::False);
}

#[test]
fn disj_examples() {
    let Some(s) = solver() else { return };
    let g = Goal::root(goal1());
    let chi = gt(v("n"), Term::int(10));
    let phi = psi();
    let split = (Formula::and([phi.clone(), chi.clone()]), Formula::and([phi.clone(), Formula::not(chi.clone())]));
    assert_eq!(apply_disj(&g, split, &s).unwrap().children.len(), 2);
    assert!(apply_disj(&g, (phi.clone(), phi.clone()), &s).is_ok());
    let bad = (Formula::and([phi.clone(), chi.clone()]), Formula::and([phi, chi]));
    assert!(matches!(apply_disj(&g, bad, &s), Err(ProverError::InvalidSplit(Answer::Invalid))));
}

fn leaf(kind: NodeKind, children: Vec<ProofTree>) -> ProofTree {
    ProofTree {
        kind,
        goal: goal1(),
        side_conditions: vec![],
        children,
        circularity_used: None,
    }
}

#[test]
fn guardedness_audit() {
    let axiom = || leaf(NodeKind::Axiom, vec![]);
    assert!(!check_guarded(&leaf(NodeKind::Circ, vec![axiom(), axiom()])));
    let nested = leaf(
        NodeKind::DerForall,
        vec![leaf(NodeKind::Subs, vec![leaf(NodeKind::Circ, vec![axiom(), axiom()])])],
    );
    assert!(check_guarded(&nested));
}

#[test]
fn false_goal_is_proved_by_axiom() {
    let r = compositeness();
    let g = ReachabilityFormula::new(ct(init(v("n")), Formula::False), comp_top());
    let res = prove(&r, &[g], &[], &SearchConfig::default(), &AssumeSat);
    let GoalOutcome::Proved(t) = &res.goals[0].1 else { panic!("{res:?}") };
    assert_eq!(t.kind, NodeKind::Axiom);
}

fn cfg_depth(d: usize) -> SearchConfig {
    SearchConfig {
        max_der_depth: d,
        ..SearchConfig::default()
    }
}

#[test]
fn compositeness_is_proved() {
    let Some(s) = solver() else { return };
    let r = compositeness();
    let res = prove(&r, &[goal1(), goal2()], &[], &cfg_depth(10), &s);
    assert!(res.all_proved(), "{res:#?}");
    for (_, o) in &res.goals {
        let t = o.tree().unwrap();
        assert!(audit(t, &s.fresh()).unwrap().is_empty());
    }
    let t2 = res.goals[1].1.tree().unwrap();
    assert_eq!(t2.kind, NodeKind::DerForall);
    assert_eq!(t2.children.len(), 2);
    let loop_branch = &t2.children[1];
    assert_eq!(loop_branch.kind, NodeKind::Circ);
    assert_eq!(loop_branch.circularity_used, Some(1));
    assert_eq!(loop_branch.children[1].kind, NodeKind::Axiom);
    let json = t2.to_json();
    assert_eq!(json["rule"], "der-forall");
    assert!(t2.to_text().contains("[circ #2]"));
}

#[test]
fn compositeness_without_loop_circularity_fails() {
    let Some(s) = solver() else { return };
    let r = compositeness();
    let res = prove(&r, &[goal1()], &[], &cfg_depth(6), &s);
    let GoalOutcome::Failed { frontier, partial } = &res.goals[0].1 else { panic!("{res:#?}") };
    assert!(!frontier.is_empty());
    assert_eq!(partial.kind, NodeKind::DerForall);
    assert!(frontier.iter().all(|f| matches!(&f.lhs.term, Term::App(_, _) if f.lhs.term.sort() == cfg())));
}

#[test]
fn search_is_deterministic() {
    let r = compositeness();
    let cfg = cfg_depth(4);
    let a = prove(&r, &[goal1(), goal2()], &[], &cfg, &AssumeSat);
    let b = prove(&r, &[goal1(), goal2()], &[], &cfg, &AssumeSat);
    assert_eq!(a, b);
}

#[test]
fn disj_splits_are_used_only_when_enabled() {
    let r = compositeness();
    let chi = Formula::cmp(BuiltinOp::Le, v("n"), Term::int(0));
    let g = ReachabilityFormula::new(ct(init(v("n")), Formula::True), comp_top());
    let cfg = SearchConfig {
        max_der_depth: 1,
        enable_disj: true,
        ..SearchConfig::default()
    };
    let res = prove(&r, std::slice::from_ref(&g), &[vec![chi.clone()]], &cfg, &AssumeSat);
    let t = res.goals[0].1.tree().unwrap();
    assert!(t.count(NodeKind::Disj) >= 1);
    let off = SearchConfig {
        enable_disj: false,
        ..cfg
    };
    let res = prove(&r, &[g], &[vec![chi]], &off, &AssumeSat);
    assert_eq!(res.goals[0].1.tree().unwrap().count(NodeKind::Disj), 0);
}
