use std::collections::BTreeSet;

use intgame::completeness::*;
use intgame::game_core::*;
use intgame::int_calculus::decide_int;
use intgame::kripke::{countermodel, KripkeModel};
use intgame::machines::Strategy as _;
use intgame::machines::{Idle, DEFAULT_BUDGET};
use intgame::syntax::{parse_ai, parse_int_formula, parse_int_sequent, Atom, Formula, IntSequent};
use proptest::prelude::*;

fn int(s: &str) -> Formula {
    parse_int_formula(s).unwrap()
}

fn example() -> StandardSequent {
    standardize(&int("P1 o- P2")).unwrap().0
}

/// One world forcing nothing.
fn point() -> KripkeModel {
    KripkeModel::new(vec![0], BTreeSet::new()).unwrap()
}

#[test]
fn dedollarize_examples() {
    assert_eq!(dedollarize(&int("P1 | P2")), int("P1 | P2"));
    assert_eq!(dedollarize(&int("$ o- P2")), int("(P1 & P2) o- P2"));
    assert_eq!(dedollarize(&int("$ o- $")), int("P1 o- P1"));
    assert_eq!(dedollarize(&int("$ | P1")), int("(P2 & P1) | P1"));
    assert_eq!(dedollar_atoms(&int("$ | (P1 o- P3)")), vec![Atom::P(2), Atom::P(1), Atom::P(3)]);
}

#[test]
fn standardize_example() {
    let (s, names) = standardize(&int("P1 o- P2")).unwrap();
    assert_eq!(s.to_sequent(), parse_int_sequent("P3 o- (P1 o- (P2 | P2)), (P1 o- P2) o- P3 => P3").unwrap());
    assert_eq!(names.name(&int("P1 o- P2")), Some(Atom::P(3)));
    assert_eq!(names.name(&int("P2")), Some(Atom::P(2)));
    assert!(standardize(&int("$ o- P1")).is_err());
}

#[test]
fn standardize_degenerate_cases() {
    let (s, names) = standardize(&int("P2")).unwrap();
    assert_eq!(s.k(), 0);
    assert_eq!(s.w, Atom::P(2));
    assert!(names.names.is_empty());
    // No implications: the extra second-kind rows use a filler atom.
    let (s, names) = standardize(&int("P1 | P2")).unwrap();
    assert_eq!(s.k(), 3);
    assert_eq!(names.padding, Some(Atom::P(4)));
    assert!(s.second.iter().all(|r| *r == [Atom::P(4); 3]));
}

#[test]
fn desequentize_example() {
    let s = example();
    let want = parse_ai("!(P3 /\\ P1 -> (P2 | P2)) /\\ !((!P1 -> P2) -> P3) -> P3").unwrap();
    assert_eq!(desequentize(&s, 1), want);
    let two = desequentize(&s, 2).to_string();
    assert_eq!(two.matches("!P1").count(), 2, "{two}");
    assert_eq!(desequentize(&standardize(&int("P1")).unwrap().0, 3), Formula::p(1));
}

#[test]
fn elementarize_structure() {
    let s = example();
    for n in 1..=3 {
        let d = desequentize(&s, n);
        let e = elementarize(&d).unwrap();
        assert_eq!(e.skeleton(), d);
        assert_eq!(elementary_formula(&s, n).skeleton(), d);
        if n >= 2 {
            assert_eq!(elementary_formula(&s, n), e);
        }
    }
    assert_eq!(elementarize(&Formula::p(1)).unwrap(), ElemFormula::Exists(Atom::P(1)));
    assert!(elementarize(&int("P1 & P2")).is_err());
}

#[test]
fn first_stage_move() {
    let mut e = Counterstrategy::new(&example(), point());
    let m = e.step().unwrap();
    assert_eq!(m.to_string(), "1.2.e.1.1.1.e.1");
    // Then the second stage grants permission.
    assert_eq!(e.step(), None);
    assert_eq!(e.permissions, 1);
}

#[test]
fn passive_session_is_short_and_lost_by_top() {
    let s = example();
    let r = counterstrategy_session(&point(), &s, &mut Idle, "passive", DEFAULT_BUDGET);
    assert_eq!(r.branch, Some(Branch::Short));
    assert_eq!(r.ledger.live[&MoleculeId::w()].content, Content::Exists(Atom::P(3)));
    assert_eq!(r.verdict, Some(Player::Bottom));
    assert!(r.invariants.all(), "{:?}", r.invariants);
}

#[test]
fn matched_w_goes_long() {
    let k = int("((P1 o- P2) o- P1) o- P1");
    let (s, names) = standardize(&k).unwrap();
    let model = extend_model(&countermodel(&IntSequent::goal(k), 8).unwrap(), &names);
    let mut top = Matcher::new(&s, model.n);
    let r = counterstrategy_session(&model, &s, &mut top, "w-grounder", DEFAULT_BUDGET);
    assert_eq!(r.branch, Some(Branch::Long));
    assert!(r.ledger.matchingly_grounded(&MoleculeId::w()));
    let chain = r.master_chain.clone().unwrap();
    assert!(matches!(r.ledger.supers[chain[0]].id.metatype, Metatype::P(_)));
    assert_eq!(Some(*chain.last().unwrap()), r.ledger.essence(&MoleculeId::w()));
    assert!(r.invariants.all(), "{:?}", r.invariants);
    assert_eq!(r.verdict, Some(Player::Bottom), "{}", r.to_json());
    // Under the all-true interpretation the same run is won by Top.
    let f32 = elementary_formula(&s, model.n);
    let t = CounterInterp { falsified: BTreeSet::new(), provenance: Branch::Long };
    assert_eq!(verify_loss(&f32, &t, &r.arena.run), Ok(Player::Top));
}

#[test]
fn base_of_a_single_match() {
    // P(1) grounded by Bottom, then X grounded by Top with the same content.
    let s = StandardSequent {
        first: vec![[Atom::P(1), Atom::P(2), Atom::P(3), Atom::P(4)]],
        second: vec![[Atom::P(1), Atom::P(5), Atom::P(6)]],
        w: Atom::P(7),
    };
    let mut m = Molecules::new(&s, 1);
    let p = MoleculeId { metatype: Metatype::P(1), j: 1, w: Bits::empty(), u: Bits::empty() };
    let x = MoleculeId::new(Metatype::X, 1, Bits::empty());
    assert!(bases(&m).is_empty());
    m.apply(Player::Bottom, &grounding_move(1, &p, 1)).unwrap();
    m.apply(Player::Top, &grounding_move(1, &x, 1)).unwrap();
    let b = bases(&m);
    assert_eq!(b[m.essence(&x).unwrap()], BTreeSet::from([1]));
    assert!(m.matchingly_grounded(&x));
    let a = chains_and_bases(&m);
    assert_eq!(a.open_chains, vec![vec![0], vec![0, 1]]);
}

#[test]
fn chain_through_matching_q_is_closed() {
    // P(1) -> Q(1) of the same row is not open; P -> X still is.
    let s = StandardSequent {
        first: vec![[Atom::P(1), Atom::P(2), Atom::P(3), Atom::P(4)]],
        second: vec![[Atom::P(1), Atom::P(1), Atom::P(6)]],
        w: Atom::P(7),
    };
    let mut m = Molecules::new(&s, 1);
    let p = MoleculeId { metatype: Metatype::P(1), j: 1, w: Bits::empty(), u: Bits::empty() };
    let q = MoleculeId::new(Metatype::Q(1), 1, Bits::empty());
    m.apply(Player::Bottom, &grounding_move(1, &p, 1)).unwrap();
    m.apply(Player::Top, &grounding_move(1, &q, 1)).unwrap();
    let a = chains_and_bases(&m);
    assert_eq!(a.open_chains, vec![vec![0]]);
    assert!(a.bases[1].is_empty());
}

#[test]
fn splits_clone_records() {
    let s = example();
    let mut m = Molecules::new(&s, 1);
    let x = MoleculeId::new(Metatype::X, 1, Bits::empty());
    m.apply(Player::Top, &grounding_move(1, &x, 5)).unwrap();
    m.apply(Player::Top, &Move(vec![Seg::Index(1), Seg::Index(1), Seg::Split(Bits::empty())])).unwrap();
    let x0 = MoleculeId::new(Metatype::X, 1, Bits::empty().child(false));
    let x1 = MoleculeId::new(Metatype::X, 1, Bits::empty().child(true));
    assert_eq!(m.essence(&x0), Some(0));
    assert_eq!(m.essence(&x1), Some(0));
    assert!(!m.live.contains_key(&x));
    assert_eq!(m.supers.len(), 1);
    // Grounding at the root thread reaches both leaves.
    let y = MoleculeId::new(Metatype::Y, 1, Bits::empty());
    m.apply(Player::Top, &grounding_move(1, &y, 6)).unwrap();
    assert_eq!(m.supers.len(), 3);
    assert!(m.apply(Player::Bottom, &grounding_move(1, &y, 7)).is_err());
}

#[test]
fn hand_built_run_loses_for_top() {
    let s = example();
    let f32 = elementary_formula(&s, 1);
    let p = MoleculeId { metatype: Metatype::P(1), j: 1, w: Bits::empty(), u: Bits::empty() };
    let run = vec![
        LabMove::new(Player::Bottom, grounding_move(1, &p, 1)),
        LabMove::new(Player::Top, grounding_move(1, &MoleculeId::w(), 2)),
    ];
    let ci = CounterInterp { falsified: BTreeSet::from([(Atom::P(3), 2)]), provenance: Branch::Short };
    assert_eq!(verify_loss(&f32, &ci, &run), Ok(Player::Bottom));
    let t = CounterInterp { falsified: BTreeSet::new(), provenance: Branch::Short };
    assert_eq!(verify_loss(&f32, &t, &run), Ok(Player::Top));
}

#[test]
fn merge_projects_slices() {
    let a = CounterInterp { falsified: BTreeSet::from([(Atom::P(1), 1)]), provenance: Branch::Short };
    let b = CounterInterp { falsified: BTreeSet::from([(Atom::P(2), 3)]), provenance: Branch::Long };
    let one = merge_counterinterps(&[("a".into(), a.clone())]);
    for atom in [Atom::P(1), Atom::P(2)] {
        for c in 1..5 {
            assert_eq!(one.truth(atom, c, 1), a.truth(atom, c));
            assert_eq!(one.slice(1)(atom, c), a.truth(atom, c));
        }
    }
    let two = merge_counterinterps(&[("a".into(), a.clone()), ("b".into(), b.clone())]);
    assert!(!two.truth(Atom::P(1), 1, 1) && two.truth(Atom::P(1), 1, 2));
    assert!(two.truth(Atom::P(2), 3, 1) && !two.truth(Atom::P(2), 3, 2));
    assert!(two.truth(Atom::P(2), 3, 3));
}

#[test]
fn standardization_checks_on_small_formulas() {
    for k in ["P1", "P1 o- P2", "P1 | P2", "P1 & P2", "(P1 o- P2) | P2", "(P1 & P2) o- P1"] {
        let k = int(k);
        assert!(standard_entailed(&k).unwrap(), "{k}");
        assert!(standard_unprovable(&k).unwrap(), "{k}");
        assert!(names_provably_equivalent(&k).unwrap(), "{k}");
        let models = names_equivalent_on_models(&k, 3).unwrap();
        assert!(matches!(models, Some(c) if c > 0), "{k}: {models:?}");
    }
}

#[test]
fn extended_countermodel_refutes_the_standard_sequent() {
    for k in ["((P1 o- P2) o- P1) o- P1", "P1 | (P1 o- P2)", "(P1 o- P2) | (P2 o- P1)"] {
        let k = int(k);
        let (s, names) = standardize(&k).unwrap();
        let m = countermodel(&IntSequent::goal(k.clone()), 8).unwrap();
        let e = extend_model(&m, &names);
        let all = (1u64 << e.n) - 1;
        assert!(s.antecedent().iter().all(|g| e.eval(g) == all));
        assert!(!e.forces(1, &Formula::Atom(s.w)));
    }
}

const CORPUS: [&str; 6] = [
    "((P1 o- P2) o- P1) o- P1",
    "P1 | (P1 o- $)",
    "P1 | P2",
    "(P1 o- P2) | (P2 o- P1)",
    "((P1 o- P2) o- P2) o- P1",
    "P1",
];

#[test]
fn pipeline_refutes_corpus() {
    for k in CORPUS {
        let b = pipeline(&int(k), &PipelineConfig::default()).unwrap();
        for s in &b.sessions {
            assert!(!s.undetermined(), "{k} {}", s.adversary);
            assert_eq!(s.verdict, Some(Player::Bottom), "{k}: {}", s.to_json());
            assert!(s.invariants.all(), "{k} {}: {:?}", s.adversary, s.invariants);
        }
        assert_eq!(b.sessions.len(), 7);
        assert!(b.refuted());
        // Each slice of the merged interpretation still defeats its session.
        for (i, s) in b.sessions.iter().enumerate() {
            let g = b.elementary.game(&b.merged.slice(i + 1));
            assert_eq!(winner(&g, &s.arena.run), Ok(Player::Bottom));
        }
    }
}

#[test]
fn pipeline_rejects_provable() {
    assert!(matches!(pipeline(&int("P1 o- P1"), &PipelineConfig::default()), Err(CompletenessError::Provable(_))));
}

#[test]
fn pipeline_is_deterministic() {
    let k = int("((P1 o- P2) o- P1) o- P1");
    let a = pipeline(&k, &PipelineConfig::default()).unwrap().to_json().to_string();
    let b = pipeline(&k, &PipelineConfig::default()).unwrap().to_json().to_string();
    assert_eq!(a, b);
}

fn arb_int(depth: u32) -> BoxedStrategy<Formula> {
    let leaf = (1u32..=2).prop_map(Formula::p);
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::cand(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::cor(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::wimp(a, b)),
        ]
    })
    .boxed()
}

fn shape_counts(k: &Formula) -> (usize, usize, usize) {
    let subs = k.subformulas();
    let count = |f: fn(&Formula) -> bool| subs.iter().filter(|h| f(h)).count();
    (
        count(|h| matches!(h, Formula::WeakImp(..))),
        count(|h| matches!(h, Formula::ChoiceOr(_))),
        count(|h| matches!(h, Formula::ChoiceAnd(_))),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardization_shape(k in arb_int(3)) {
        let (s, _) = standardize(&k).unwrap();
        let (a, d, g) = shape_counts(&k);
        prop_assert_eq!(s.first.len(), a + 3 * d + 3 * g);
        prop_assert_eq!(s.second.len(), a + 3 * d + 3 * g);
        prop_assert!(is_standard(&s.to_sequent()));
        prop_assert_eq!(StandardSequent::from_sequent(&s.to_sequent()), Some(s));
    }

    #[test]
    fn dedollarization_is_dollarless(k in arb_int(3), path_seed in any::<u64>()) {
        // Put $ at some leaf.
        let leaves: Vec<Vec<usize>> = leaf_paths(&k);
        let path = &leaves[(path_seed as usize) % leaves.len()];
        let kd = k.replace_at(path, Formula::dollar()).unwrap();
        let f = dedollarize(&kd);
        prop_assert!(!f.has_dollar());
        prop_assert_eq!(dedollarize(&f), f.clone());
        prop_assert_eq!(decide_int(&IntSequent::goal(kd)).unwrap(), decide_int(&IntSequent::goal(f)).unwrap());
    }

    #[test]
    fn standardization_properties_hold(k in arb_int(2)) {
        prop_assert!(standard_entailed(&k).unwrap());
        prop_assert!(standard_unprovable(&k).unwrap());
        prop_assert!(names_provably_equivalent(&k).unwrap());
    }

    #[test]
    fn names_equivalent_on_small_models(k in arb_int(1)) {
        prop_assert!(names_equivalent_on_models(&k, 3).unwrap().is_some());
    }

    #[test]
    fn chain_enumeration_agrees_with_bases(seed in 0u64..500) {
        let k = int("((P1 o- P2) o- P1) o- P1");
        let s = standardize(&k).unwrap().0;
        let m = countermodel(&IntSequent::goal(k.clone()), 8).unwrap();
        let model = extend_model(&m, &standardize(&k).unwrap().1);
        let cfg = SessionConfig { random_moves: 20, ..SessionConfig::default() };
        let mut adv = Adversary::Random(seed).build(&s, model.n, &cfg);
        let r = counterstrategy_session(&model, &s, adv.as_mut(), "random", DEFAULT_BUDGET);
        let a = chains_and_bases(&r.ledger);
        prop_assert!(!a.truncated);
        let mut from_chains = vec![BTreeSet::new(); r.ledger.supers.len()];
        for c in &a.open_chains {
            let Metatype::P(p) = r.ledger.supers[c[0]].id.metatype else { panic!("origin is not P") };
            from_chains[*c.last().unwrap()].insert(p);
        }
        prop_assert_eq!(from_chains, a.bases);
        prop_assert_eq!(r.verdict, Some(Player::Bottom));
    }
}

fn leaf_paths(f: &Formula) -> Vec<Vec<usize>> {
    let cs = f.children();
    if cs.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, c) in cs.iter().enumerate() {
        for mut p in leaf_paths(c) {
            p.insert(0, i);
            out.push(p);
        }
    }
    out
}

#[test]
fn scripted_arena_golden_transcript() {
    let s = example();
    let g = elementary_formula(&s, 1).game(&all_true());
    let y = MoleculeId::new(Metatype::Y, 1, Bits::empty());
    let x0 = MoleculeId::new(Metatype::X, 1, Bits::empty().child(false));
    let mut top = intgame::machines::Scripted::new(vec![
        Move(vec![Seg::Index(1), Seg::Index(1), Seg::Split(Bits::empty())]),
        grounding_move(1, &y, 1),
        grounding_move(1, &x0, 1),
        grounding_move(1, &MoleculeId::w(), 7),
    ]);
    let mut e = Counterstrategy::new(&s, point());
    let r = intgame::machines::arena_run(&mut top, &mut e, &g, DEFAULT_BUDGET);
    let want = ["B:1.2.e.1.1.1.e.1", "T:1.1.e:", "T:1.1.e.1.2.1", "T:1.1.0.1.1.1", "T:2.7"];
    assert_eq!(transcript(&r.run).trim_end(), want.join("\n"));
    assert!(r.quiesced);
}
