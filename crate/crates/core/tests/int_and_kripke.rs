use std::collections::BTreeSet;

use intgame::int_calculus::{check_int_proof, decide_int, prove_int, IntProof, IntRule, ProveOutcome};
use intgame::kripke::{countermodel, KripkeModel};
use intgame::syntax::{parse_int_formula, parse_int_sequent, Atom, Formula, IntSequent};

fn seq(s: &str) -> IntSequent {
    parse_int_sequent(s).unwrap()
}

fn proved(s: &str) -> IntProof {
    match prove_int(&seq(s)).unwrap() {
        ProveOutcome::Proved(p) => p,
        ProveOutcome::Unprovable { .. } => panic!("expected a proof of {s}"),
    }
}

#[test]
fn axioms_check() {
    let p = IntProof::new(seq("P1 => P1"), IntRule::Axiom, vec![]);
    assert!(check_int_proof(&p).is_ok());
    let p = IntProof::new(seq("$ => P1 & P2"), IntRule::Axiom, vec![]);
    assert!(check_int_proof(&p).is_ok());
}

#[test]
fn right_or_side_mismatch_rejected() {
    let prem = IntProof::new(seq("P1 => P1"), IntRule::Axiom, vec![]);
    let bad = IntProof::new(seq("P1 => P2 | P1"), IntRule::RightChoiceOr(1), vec![prem]);
    let e = check_int_proof(&bad).unwrap_err();
    assert!(e.path.is_empty());
}

#[test]
fn textbook_theorems() {
    for s in [
        "=> (P1 & (P1 o- P2)) o- P2",
        "=> (P1 o- (P2 o- P3)) o- ((P1 o- P2) o- (P1 o- P3))",
        "P1 => P1",
        "P2, P1 => P1 & P2",
        "P1 | P2 => P2 | P1",
        "P1 o- P2, P2 o- P3, P1 => P3",
    ] {
        let p = proved(s);
        assert_eq!(p.conclusion, seq(s));
        check_int_proof(&p).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
}

#[test]
fn peirce_unprovable_with_small_countermodel() {
    let s = seq("=> ((P1 o- P2) o- P1) o- P1");
    assert!(matches!(prove_int(&s).unwrap(), ProveOutcome::Unprovable { .. }));
    let m = countermodel(&s, 3).expect("countermodel");
    assert!(m.n <= 3);
    assert!(!m.forces_sequent(1, &s));
}

#[test]
fn excluded_middle_countermodel_is_two_chain() {
    let m = countermodel(&seq("=> P1 | (P1 o- $)"), 8).unwrap();
    assert_eq!(m.n, 2);
    assert_eq!(m.parent, vec![0, 1]);
    assert_eq!(m.forcing, BTreeSet::from([(2, Atom::P(1))]));
}

#[test]
fn forcing_examples() {
    let m = KripkeModel::new(vec![0, 1], BTreeSet::from([(2, Atom::P(1))])).unwrap();
    let f = |s: &str| parse_int_formula(s).unwrap();
    assert!(!m.forces(1, &Formula::dollar()));
    assert!(m.forces(1, &f("P1 o- P1")));
    assert!(!m.forces(1, &f("P1 | (P1 o- $)")));
    assert!(!m.forces_sequent(1, &seq("P1 => $")));
    assert!(m.equivalent(&f("P2 | P2"), &f("P2")));
    assert!(!m.equivalent(&f("P1"), &f("P2")));
    assert!(countermodel(&seq("P1 => P1"), 6).is_none());
}

fn formulas(c: usize, atoms: &[Formula]) -> Vec<Formula> {
    if c == 0 {
        return atoms.to_vec();
    }
    let mut out = Vec::new();
    for l in 0..c {
        let left = formulas(l, atoms);
        let right = formulas(c - 1 - l, atoms);
        for a in &left {
            for b in &right {
                out.push(Formula::cand(a.clone(), b.clone()));
                out.push(Formula::cor(a.clone(), b.clone()));
                out.push(Formula::wimp(a.clone(), b.clone()));
            }
        }
    }
    out
}

#[test]
fn prover_agrees_with_kripke_small() {
    let atoms = [Formula::p(1), Formula::p(2), Formula::dollar()];
    for c in 0..=3 {
        for f in formulas(c, &atoms) {
            let s = IntSequent::goal(f.clone());
            let provable = decide_int(&s).unwrap();
            let cm = countermodel(&s, 8);
            assert_eq!(provable, cm.is_none(), "{f}");
            if provable && c <= 2 {
                let ProveOutcome::Proved(p) = prove_int(&s).unwrap() else { panic!() };
                check_int_proof(&p).unwrap_or_else(|e| panic!("{f}: {e}"));
            }
        }
    }
}
