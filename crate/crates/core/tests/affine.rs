use intgame::affine::*;
use intgame::game_core::{Interpretation, G};
use intgame::machines::validate;
use intgame::syntax::{
    normalize_negation, parse_ai, parse_ai_sequent, parse_int_formula, parse_int_sequent, AISequent, Formula,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ai(s: &str) -> Formula {
    normalize_negation(&parse_ai(s).unwrap())
}
fn int(s: &str) -> Formula {
    parse_int_formula(s).unwrap()
}

fn relaxed_ok(p: &AIProof) {
    if let Err(e) = check_ai_proof(p, CheckMode::Relaxed) {
        panic!("{e}\n{p}");
    }
}

/// Interpretations with small random atom games; `$` gets a random base.
fn interps(seed: u64, n: usize) -> Vec<Interpretation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Interpretation::random(&mut rng, 4)).collect()
}

fn game_of(p: &AIProof, i: &Interpretation) -> G {
    i.interpret(&sequent_formula(&p.conclusion)).unwrap()
}

fn assert_wins(p: &AIProof, plays: usize, seed: u64) {
    let s = ai_to_strategy(p);
    for (k, i) in interps(seed, 3).iter().enumerate() {
        let g = game_of(p, i);
        let st = validate(s.as_ref(), &g, plays, seed + k as u64, 6);
        assert!(st.all_won(), "{p}\n{:?}", st.first_loss);
    }
}

#[test]
fn axiom_and_rules_check() {
    let p = ax(&ai("P1 & P2"));
    relaxed_ok(&p);
    check_ai_proof(&p, CheckMode::Strict).unwrap();
    let q = derelict(p.clone(), &ai("~P1 | ~P2")).unwrap();
    relaxed_ok(&q);
    // The dereliction acts on the first formula, so the strict reading wants an exchange.
    assert!(check_ai_proof(&q, CheckMode::Strict).is_err());
    check_ai_proof(&derelict(p.clone(), &ai("P1 & P2")).unwrap(), CheckMode::Strict).unwrap();
    // Promotion needs a ?-context.
    assert!(promote(p.clone(), &ai("P1 & P2")).is_err());
    let r = promote(q, &ai("P1 & P2")).unwrap();
    relaxed_ok(&r);
    assert_eq!(r.conclusion, parse_ai_sequent("?(~P1 | ~P2), !(P1 & P2)").unwrap());
}

#[test]
fn checker_reports_first_bad_node() {
    let good = ax(&ai("P1"));
    let bad = AIProof::new(vec![ai("P1"), ai("P2")], AIRule::Axiom, vec![]);
    let p = AIProof::new(vec![ai("~P1"), ai("P1"), ai("P2 /\\ P1")], AIRule::ParAndIntro { n: 2 }, vec![bad, good]);
    match check_ai_proof(&p, CheckMode::Relaxed) {
        Err(AffineError::Check { path, rule, .. }) => {
            assert_eq!(path, vec![0]);
            assert_eq!(rule, "Axiom");
        }
        other => panic!("{other:?}"),
    }
    let bad = AIProof::new(vec![ai("P1"), ai("P2")], AIRule::Axiom, vec![]);
    let p = weaken(bad, &ai("P3"));
    match check_ai_proof(&p, CheckMode::Relaxed) {
        Err(AffineError::Check { path, rule, .. }) => {
            assert_eq!(path, vec![0]);
            assert_eq!(rule, "Axiom");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn strict_mode_needs_exchange() {
    let p = weaken(ax(&ai("P1")), &ai("P2"));
    let moved = reorder(p.clone(), &[ai("P2"), ai("~P1"), ai("P1")]).unwrap();
    relaxed_ok(&moved);
    assert!(check_ai_proof(&moved, CheckMode::Strict).is_err());
    let ex = AIProof::new(vec![ai("~P1"), ai("P2"), ai("P1")], AIRule::Exchange, vec![p.clone()]);
    check_ai_proof(&ex, CheckMode::Strict).unwrap();
    let far = AIProof::new(vec![ai("P2"), ai("P1"), ai("~P1")], AIRule::Exchange, vec![p]);
    assert!(check_ai_proof(&far, CheckMode::Strict).is_err());
    relaxed_ok(&far);
}

#[test]
fn bang_intro_rejects_plain_context() {
    let p = AIProof::new(vec![ai("~P1"), ai("!P1")], AIRule::BangIntro, vec![ax(&ai("P1"))]);
    let e = check_ai_proof(&p, CheckMode::Relaxed).unwrap_err();
    assert!(e.to_string().contains("BangIntro"), "{e}");
}

#[test]
fn json_round_trip() {
    let p = schema_proof(&Schema::CobangChoice { e1: int("P1"), e2: int("P2"), i: 2 }).unwrap();
    let back = AIProof::from_json(&p.to_json()).unwrap();
    assert_eq!(normalize(&back), normalize(&p));
    assert_eq!(back.size(), p.size());
}

fn normalize(p: &AIProof) -> String {
    // Compare by printed form after a JSON trip, which normalizes formulas.
    AIProof::from_json(&p.to_json()).unwrap().to_string()
}

fn sample_schemas() -> Vec<Schema> {
    let seq = |s: &str| parse_int_sequent(s).unwrap();
    vec![
        Schema::AxiomLift { k: ai("P1 | P2") },
        Schema::WeakImpIntro { e: int("P1"), f: int("P2 & P3") },
        Schema::Structural { id: "s-exchange", premise: seq("P1, P2 => P3"), conclusion: seq("P2, P1 => P3") },
        Schema::Structural { id: "s-weakening", premise: seq("P1 => P2"), conclusion: seq("P1, P3 => P2") },
        Schema::Structural { id: "s-weakening", premise: seq("=> P2"), conclusion: seq("P3 => P2") },
        Schema::Structural { id: "s-contraction", premise: seq("P1, P2, P2 => P3"), conclusion: seq("P1, P2 => P3") },
        Schema::Structural { id: "s-right-wimp", premise: seq("P1, P2 => P3"), conclusion: seq("P1 => P2 o- P3") },
        Schema::Structural { id: "s-right-wimp", premise: seq("P2 => P3"), conclusion: seq("=> P2 o- P3") },
        Schema::LeftWeakImp { g: vec![int("P1")], h: vec![int("P2")], e: int("P3"), k1: int("P4"), k2: int("P1 | P2") },
        Schema::LeftWeakImp { g: vec![], h: vec![], e: int("P3"), k1: int("P4"), k2: int("P1") },
        Schema::LeftWeakImp {
            g: vec![int("P1"), int("P2")],
            h: vec![int("P2"), int("P3")],
            e: int("P3"),
            k1: int("P4"),
            k2: int("P1"),
        },
        Schema::LeftChoiceOr { g: vec![int("P1")], e1: int("P2"), e2: int("P3"), k: int("P4") },
        Schema::LeftChoiceOr { g: vec![], e1: int("P2"), e2: int("P3"), k: int("P4") },
        Schema::LeftChoiceOr { g: vec![int("P1"), int("P2")], e1: int("P2"), e2: int("P3"), k: int("P4") },
        Schema::ChoiceOrLift { k1: int("P1"), k2: int("P2"), i: 2 },
        Schema::CobangChoice { e1: int("P1"), e2: int("P2"), i: 1 },
        Schema::RightChoiceAnd { g: vec![int("P3")], k1: int("P1"), k2: int("P2") },
        Schema::RightChoiceAnd { g: vec![], k1: int("P1"), k2: int("P2") },
        Schema::DollarCobang,
        Schema::Distribution { x: ai("P1"), y: ai("P2"), z: ai("P3"), t: ai("P4") },
        Schema::Duplication { p: ai("P1"), q: ai("P2"), n: 3 },
        Schema::Currying { k: int("P1"), g: vec![int("P2"), int("P3")], w: int("P4") },
        Schema::Currying { k: int("P1"), g: vec![int("P2")], w: int("P4") },
        Schema::Currying { k: int("P1"), g: vec![], w: int("P4") },
    ]
}

#[test]
fn schema_proofs_check() {
    for s in sample_schemas() {
        let p = schema_proof(&s).unwrap_or_else(|e| panic!("{}: {e}", s.id()));
        relaxed_ok(&p);
    }
}

#[test]
fn schema_ids_cover_catalog() {
    let ids: std::collections::BTreeSet<&str> = sample_schemas().iter().map(|s| s.id()).collect();
    for id in SCHEMA_IDS {
        assert!(ids.contains(id), "{id}");
    }
}

#[test]
fn structural_schema_rejects_mismatch() {
    let seq = |s: &str| parse_int_sequent(s).unwrap();
    let s = Schema::Structural { id: "s-weakening", premise: seq("P1 => P2"), conclusion: seq("P3 => P2") };
    assert!(matches!(schema_proof(&s), Err(AffineError::Arity { .. })));
}

fn node_conclusions(p: &AIProof) -> Vec<AISequent> {
    p.nodes().iter().map(|n| n.conclusion.clone()).collect()
}

fn assert_steps(p: &AIProof, steps: &[&str]) {
    let concl = node_conclusions(p);
    for s in steps {
        let want = parse_ai_sequent(s).unwrap();
        assert!(concl.iter().any(|c| c.same_multiset(&want)), "missing step {s}\n{p}");
    }
}

#[test]
fn left_weak_imp_golden_steps() {
    // G = P1, H = P2, E = P3, K1 = P4, K2 = P5.
    let p = schema_proof(&Schema::LeftWeakImp {
        g: vec![int("P1")],
        h: vec![int("P2")],
        e: int("P3"),
        k1: int("P4"),
        k2: int("P5"),
    })
    .unwrap();
    assert_steps(
        &p,
        &[
            "~P5, P5",
            "!P2, ?~P2",
            "!P2 /\\ ~P5, ?~P2, P5",
            "?(!P2 /\\ ~P5), ?~P2, P5",
            "?(!P2 /\\ ~P5), ?~P2, !P5",
            "P3, ~P3",
            "P3, ?(!P2 /\\ ~P5), ?~P2, !P5 /\\ ~P3",
            "P3, ?(!P2 /\\ ~P5), ?~P2, ?(!P5 /\\ ~P3)",
            "!P3, ?(!P2 /\\ ~P5), ?~P2, ?(!P5 /\\ ~P3)",
            "!P1, ?~P1",
            "!P1 /\\ !P3, ?(!P2 /\\ ~P5), ?~P1, ?~P2, ?(!P5 /\\ ~P3)",
            "~P4, P4",
            "(!P1 /\\ !P3) /\\ ~P4, ?(!P2 /\\ ~P5), ?~P1, ?~P2, ?(!P5 /\\ ~P3), P4",
            "((!P1 /\\ !P3) /\\ ~P4) \\/ (?(!P2 /\\ ~P5) \\/ ((?~P1 \\/ ?~P2 \\/ ?(!P5 /\\ ~P3)) \\/ P4))",
        ],
    );
}

#[test]
fn left_choice_or_golden_steps() {
    let p =
        schema_proof(&Schema::LeftChoiceOr { g: vec![int("P1")], e1: int("P2"), e2: int("P3"), k: int("P4") }).unwrap();
    assert_steps(
        &p,
        &[
            "!P1 /\\ !P2, ?~P1, ?~P2",
            "(!P1 /\\ !P2) /\\ ~P4, ?~P1, ?~P2, P4",
            "(!P1 /\\ !P2) /\\ ~P4, (!P1 /\\ !P3) /\\ ~P4, ?~P1, ?~P2, P4",
            "(!P1 /\\ !P2) /\\ ~P4, (!P1 /\\ !P3) /\\ ~P4, ?~P1, ?~P3, P4",
            "(!P1 /\\ !P2) /\\ ~P4, (!P1 /\\ !P3) /\\ ~P4, ?~P1, ?~P2 & ?~P3, P4",
            "((!P1 /\\ !P2) /\\ ~P4) \\/ (((!P1 /\\ !P3) /\\ ~P4) \\/ ((?~P1 \\/ (?~P2 & ?~P3)) \\/ P4))",
        ],
    );
}

/// A random formula over `P1..P4` in negation normal form.
fn random_formula(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = Formula::p(rng.gen_range(1..=4));
        return if rng.gen_bool(0.3) { Formula::neg(a) } else { a };
    }
    let kids = |rng: &mut ChaCha8Rng| (0..rng.gen_range(2..=3)).map(|_| random_formula(rng, depth - 1)).collect();
    match rng.gen_range(0..6) {
        0 => Formula::ParAnd(kids(rng)),
        1 => Formula::ParOr(kids(rng)),
        2 => Formula::ChoiceAnd(kids(rng)),
        3 => Formula::ChoiceOr(kids(rng)),
        4 => Formula::bang(random_formula(rng, depth - 1)),
        _ => Formula::cobang(random_formula(rng, depth - 1)),
    }
}

/// A random path that never enters a negation.
fn random_positive_path(rng: &mut ChaCha8Rng, f: &Formula) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = f;
    loop {
        let kids = cur.children();
        if matches!(cur, Formula::Neg(_)) || kids.is_empty() || rng.gen_bool(0.3) {
            return path;
        }
        let i = rng.gen_range(0..kids.len());
        if matches!(kids[i], Formula::Neg(_)) {
            return path;
        }
        path.push(i);
        cur = kids[i];
    }
}

#[test]
fn replacement_proofs_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let h1 = random_formula(&mut rng, 3);
        let occ = random_positive_path(&mut rng, &h1);
        let g1 = h1.at(&occ).unwrap().clone();
        let g2 = random_formula(&mut rng, 2);
        let p = replacement_proof(&g1, &g2, &h1, &occ).unwrap_or_else(|e| panic!("{h1} at {occ:?}: {e}"));
        relaxed_ok(&p);
        let h2 = normalize_negation(&h1.replace_at(&occ, g2.clone()).unwrap());
        let want = AISequent::new(vec![Formula::cobang(Formula::ParAnd(vec![g1.clone(), dual(&g2)])), dual(&h1), h2]);
        assert!(p.conclusion.same_multiset(&want), "{}\n{}", p.conclusion, want);
    }
}

#[test]
fn replacement_rejects_negative_occurrence() {
    let h1 = ai("~P1 /\\ P2");
    // Child 0 is ~P1; its atom sits under a negation.
    assert!(matches!(replacement_proof(&ai("P1"), &ai("P3"), &h1, &[0, 0]), Err(AffineError::NotPositive(_))));
    assert!(matches!(replacement_proof(&ai("P1"), &ai("P3"), &h1, &[5]), Err(AffineError::BadOccurrence(_))));
}

#[test]
fn extracted_axiom_strategies_win() {
    for f in ["P1", "P1 & P2", "P1 | P2", "!P1", "?(P1 /\\ P2)", "P1 -> P2"] {
        assert_wins(&ax(&ai(f)), 40, 11);
    }
}

#[test]
fn extracted_schema_strategies_win() {
    for s in sample_schemas() {
        let p = schema_proof(&s).unwrap();
        assert_wins(&p, 25, 13);
    }
}

#[test]
fn extracted_replacement_strategies_win() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let h1 = random_formula(&mut rng, 2);
        let occ = random_positive_path(&mut rng, &h1);
        let g1 = h1.at(&occ).unwrap().clone();
        let g2 = random_formula(&mut rng, 1);
        let p = replacement_implication(&g1, &g2, &h1, &occ).unwrap();
        relaxed_ok(&p);
        assert_wins(&p, 15, 19);
    }
}

#[test]
fn cut_and_modus_ponens_strategies_win() {
    let e = ai("P1 & P2");
    let p0 = ax(&e);
    let p1 = ax(&dual(&e));
    let c = cut(p0, &e, p1).unwrap();
    relaxed_ok(&c);
    assert_wins(&c, 30, 23);

    // Modus ponens from E and E -> E.
    let f = ai("P1 -> P1");
    let pe = reorder(or_intro(ax(&ai("P1")), &[ai("~P1"), ai("P1")]).unwrap(), std::slice::from_ref(&f)).unwrap();
    let imp = Formula::ParOr(vec![dual(&f), f.clone()]);
    let pef = reorder(or_intro(ax(&f), &[dual(&f), f.clone()]).unwrap(), &[imp]).unwrap();
    let mp = modus_ponens(pe, pef).unwrap();
    relaxed_ok(&mp);
    check_ai_proof(&mp, CheckMode::Strict).unwrap();
    assert_wins(&mp, 30, 29);
}
