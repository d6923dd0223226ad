use intgame::game_core::*;
use intgame::int_calculus::{prove_int, IntProof, IntRule, ProveOutcome};
use intgame::machines::*;
use intgame::soundness::*;
use intgame::syntax::{embed_formula, parse_int_formula, parse_int_sequent, Atom, Formula};

fn int(s: &str) -> Formula {
    parse_int_formula(s).unwrap()
}

fn proof(s: &str) -> IntProof {
    let seq = parse_int_sequent(s).unwrap();
    match prove_int(&seq).unwrap() {
        ProveOutcome::Proved(p) => p,
        other => panic!("{s}: {other:?}"),
    }
}

fn dollar_imp(k: &str) -> Formula {
    Formula::ParOr(vec![Formula::neg(Formula::dollar()), embed_formula(&int(k))])
}

fn first_move(mut s: BoxStrategy) -> Option<Move> {
    s.step()
}

fn idx(v: &[u32]) -> Move {
    Move(v.iter().map(|&i| Seg::Index(i)).collect())
}

#[test]
fn dollar_solution_first_moves() {
    assert_eq!(first_move(dollar_solution(&int("$")).unwrap()), None);
    assert_eq!(first_move(dollar_solution(&int("P3")).unwrap()), Some(idx(&[1, 3])));
    assert_eq!(first_move(dollar_solution(&int("P1 | P2")).unwrap()), Some(idx(&[2, 1])));
    assert_eq!(first_move(dollar_solution(&int("P1 & P2")).unwrap()), None);
}

#[test]
fn dollar_solution_for_dollar_is_copycat() {
    let f = dollar_imp("$");
    for (k, i) in sample_interpretations(1, 4, 2).iter().enumerate() {
        let g = i.interpret(&f).unwrap();
        for seed in 0..10 {
            let play = |mut s: BoxStrategy| {
                let mut adv = RandomAdversary::new(g.clone(), seed + 100 * k as u64, 8);
                arena_run(s.as_mut(), &mut adv, &g, DEFAULT_BUDGET).run
            };
            assert_eq!(play(dollar_solution(&int("$")).unwrap()), play(ccs()));
        }
    }
}

#[test]
fn dollar_solutions_win() {
    for k in ["$", "P1", "P2 | P1", "P1 & P2", "P1 o- P2", "(P1 | P2) & (P2 o- $)", "P1 o- (P2 & P1)"] {
        let s = dollar_solution(&int(k)).unwrap();
        let st = validate_formula(s.as_ref(), &dollar_imp(k), 5, 30, 3);
        assert!(st.all_won(), "{k}: {:?}", st.first_loss);
    }
}

#[test]
fn bang_dollar_solutions_win() {
    for k in ["$", "P1", "P1 & P2", "P1 | (P2 o- P1)"] {
        let s = bang_dollar_solution(&int(k)).unwrap();
        let f = Formula::ParOr(vec![Formula::cobang(Formula::neg(Formula::dollar())), embed_formula(&int(k))]);
        let st = validate_formula(s.as_ref(), &f, 5, 30, 5);
        assert!(st.all_won(), "{k}: {:?}", st.first_loss);
    }
}

fn pand_formula() -> Formula {
    // ?E1 ⊓ ?E2 -> ?(E1 ⊓ E2)
    let (e1, e2) = (Formula::p(1), Formula::p(2));
    Formula::ParOr(vec![
        Formula::neg(Formula::ChoiceAnd(vec![Formula::cobang(e1.clone()), Formula::cobang(e2.clone())])),
        Formula::cobang(Formula::ChoiceAnd(vec![e1, e2])),
    ])
}

#[test]
fn pand_lift_silent_adversary() {
    let f = pand_formula();
    let i = &sample_interpretations(2, 1, 2)[0];
    let g = i.interpret(&f).unwrap();
    let mut s = pand_lift();
    let r = arena_run(s.as_mut(), &mut Idle, &g, DEFAULT_BUDGET);
    assert!(r.run.is_empty());
    assert!(r.quiesced);
}

#[test]
fn pand_lift_mirrors_choice() {
    let mut s = pand_lift();
    s.observe(&Move(vec![Seg::Index(2), Seg::Bits(Bits::empty()), Seg::Index(2)]));
    assert_eq!(s.step(), Some(idx(&[1, 2])));
}

#[test]
fn pand_lift_wins() {
    let s = pand_lift();
    let st = validate_formula(s.as_ref(), &pand_formula(), 10, 40, 8);
    assert!(st.all_won(), "{:?}", st.first_loss);
}

#[test]
fn bridge_strategies() {
    // K over P2, P3 with P0 = P1.
    let atoms = [Atom::P(1), Atom::P(2), Atom::P(3)];
    let (fwd, back) = dedollar_bridge_strategies(&atoms);
    {
        let mut f = fwd.clone();
        f.observe(&idx(&[2, 3]));
        assert_eq!(f.step(), Some(idx(&[1, 3])));
        let mut b = back.clone();
        b.observe(&idx(&[2, 3]));
        assert_eq!(b.step(), Some(idx(&[1, 3])));
        let mut b = back.clone();
        b.observe(&idx(&[2, 7]));
        assert_eq!(b.step(), Some(idx(&[1, 1])));
        let mut b = back.clone();
        b.observe(&idx(&[2, 0]));
        assert_eq!(b.step(), Some(idx(&[1, 1])));
    }
    for circ in sample_interpretations(9, 6, 3) {
        let star = dedollar_star(&atoms, &circ);
        let (g1, g2) = bridge_games(&atoms, &star);
        let st = validate(fwd.as_ref(), &g1, 30, 1, 6);
        assert!(st.all_won(), "{:?}", st.first_loss);
        let st = validate(back.as_ref(), &g2, 30, 2, 6);
        assert!(st.all_won(), "{:?}", st.first_loss);
    }
}

#[test]
fn extraction_rejects_bad_proof() {
    let mut p = proof("P1 => P1");
    p.conclusion = parse_int_sequent("P1 => P2").unwrap();
    assert!(matches!(extract(&p), Err(SoundnessError::Unchecked(_))));
}

#[test]
fn identity_axiom_extraction() {
    let p = proof("P1 => P1");
    let (s, trace) = extract(&p).unwrap();
    assert_eq!(trace.entries.len(), 1);
    assert_eq!(trace.entries[0].case, "Axiom");
    assert_eq!(trace.entries[0].schemas, vec!["s-axiom"]);
    let f = extraction_target(&p.conclusion);
    let st = validate_formula(s.as_ref(), &f, 5, 50, 1);
    assert!(st.all_won(), "{:?}", st.first_loss);
}

#[test]
fn golden_extractions_win() {
    for k in GOLDEN_PROVABLE {
        let p = proof(&format!("=> {k}"));
        let (s, trace) = extract(&p).unwrap();
        assert_eq!(trace.entries.len(), p.size());
        assert!(trace.entries.iter().all(|e| CASES.contains(&e.case)));
        let st = validate_formula(s.as_ref(), &extraction_target(&p.conclusion), 4, 25, 21);
        assert!(st.all_won(), "{k}: {:?}\n{p}", st.first_loss);
    }
}

/// Builds a proof node by node with the given rule over sequents in text.
fn node(concl: &str, rule: IntRule, premises: Vec<IntProof>) -> IntProof {
    IntProof::new(parse_int_sequent(concl).unwrap(), rule, premises)
}

fn hand_proofs() -> Vec<IntProof> {
    let ax = |s: &str| node(s, IntRule::Axiom, vec![]);
    vec![
        // Left ⊔ with a context formula.
        node(
            "P3, P1 | P2 => P3",
            IntRule::LeftChoiceOr,
            vec![
                node("P3, P1 => P3", IntRule::Weakening, vec![ax("P3 => P3")]),
                node("P3, P2 => P3", IntRule::Weakening, vec![ax("P3 => P3")]),
            ],
        ),
        // Left ⊔ with an empty context.
        node(
            "P1 | P2 => P2 | P1",
            IntRule::LeftChoiceOr,
            vec![
                node("P1 => P2 | P1", IntRule::RightChoiceOr(2), vec![ax("P1 => P1")]),
                node("P2 => P2 | P1", IntRule::RightChoiceOr(1), vec![ax("P2 => P2")]),
            ],
        ),
        // Left ⊓ and Right ⊓.
        node(
            "P1 & P2 => P2 & P1",
            IntRule::RightChoiceAnd,
            vec![
                node("P1 & P2 => P2", IntRule::LeftChoiceAnd(2), vec![ax("P2 => P2")]),
                node("P1 & P2 => P1", IntRule::LeftChoiceAnd(1), vec![ax("P1 => P1")]),
            ],
        ),
        // Dollar axiom.
        ax("$ => P1 | P2"),
        // Left o- with H empty and G nonempty.
        node(
            "P3, P1 o- P2 => P2",
            IntRule::LeftWeakImp,
            vec![node("P3, P2 => P2", IntRule::Weakening, vec![ax("P2 => P2")]), node("=> P1", IntRule::Axiom, vec![])],
        ),
    ]
}

#[test]
fn hand_built_proofs_extract_and_win() {
    // The last hand proof is deliberately invalid (`=> P1` is no axiom).
    let proofs = hand_proofs();
    let (valid, invalid) = proofs.split_at(proofs.len() - 1);
    assert!(extract(&invalid[0]).is_err());
    for p in valid {
        intgame::int_calculus::check_int_proof(p).unwrap_or_else(|e| panic!("{e}\n{p}"));
        let (s, _) = extract(p).unwrap();
        let st = validate_formula(s.as_ref(), &extraction_target(&p.conclusion), 4, 30, 31);
        assert!(st.all_won(), "{:?}\n{p}", st.first_loss);
    }
}

#[test]
fn left_choice_or_trace() {
    let p = &hand_proofs()[1];
    let (_, trace) = extract(p).unwrap();
    let root = &trace.entries[0];
    assert_eq!(root.case, "LeftChoiceOr");
    assert_eq!(root.schemas, vec!["s12"]);
    assert_eq!(root.combinators.iter().filter(|c| **c == "pand_lift+replace").count(), 1);
    let j = trace.to_json();
    assert_eq!(j["nodes"][0]["case"], "LeftChoiceOr");
}

#[test]
fn extraction_is_deterministic() {
    let p = proof("=> (P1 & (P1 o- P2)) o- P2");
    let f = extraction_target(&p.conclusion);
    let i = &sample_interpretations(4, 1, 2)[0];
    let g = i.interpret(&f).unwrap();
    let run = || {
        let (mut s, t) = extract(&p).unwrap();
        let mut adv = RandomAdversary::new(g.clone(), 77, 10);
        (arena_run(s.as_mut(), &mut adv, &g, DEFAULT_BUDGET), t)
    };
    assert_eq!(run(), run());
}
