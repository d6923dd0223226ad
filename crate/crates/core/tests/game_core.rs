use std::collections::BTreeMap;
use std::sync::Arc;

use intgame::game_core::*;
use intgame::syntax::{parse_int_formula, Atom};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t() -> G {
    Game::elem(true)
}
fn f() -> G {
    Game::elem(false)
}
fn lm(p: Player, g: &Game, pos: &[LabMove], text: &str) -> LabMove {
    LabMove::new(p, parse_move(g, pos, text).unwrap())
}

#[test]
fn choice_or_only_top_chooses() {
    let g = Game::choice_or(vec![t(), f()]);
    let m = parse_move(&g, &[], "1").unwrap();
    assert!(is_legal(&g, &[], &LabMove::new(Player::Top, m.clone())));
    assert!(!is_legal(&g, &[], &LabMove::new(Player::Bottom, m)));
}

#[test]
fn weak_implication_consequent_moves() {
    let p = Game::choice_or(vec![t(), f()]);
    let g = Game::weak_imp(p.clone(), p);
    assert!(is_legal(&g, &[], &lm(Player::Top, &g, &[], "2.1")));
    assert!(!is_legal(&g, &[], &LabMove::new(Player::Top, Move(vec![Seg::Index(2), Seg::Index(3)]))));
    assert!(!is_legal(&g, &[], &lm(Player::Bottom, &g, &[], "2.1")));
    // The antecedent !P is negated, so Top replicates there.
    assert!(is_legal(&g, &[], &lm(Player::Top, &g, &[], "1.e:")));
    assert!(!is_legal(&g, &[], &lm(Player::Bottom, &g, &[], "1.e:")));
}

#[test]
fn bang_branch_legality_after_split() {
    let g = Game::bang(Game::choice_and(vec![t(), f()]));
    let mut run = vec![lm(Player::Bottom, &g, &[], "e:")];
    let m = lm(Player::Bottom, &g, &run, "0.1");
    assert!(is_legal(&g, &run, &m));
    run.push(m);
    let again = LabMove::new(Player::Bottom, Move(vec![Seg::Bits(Bits(vec![false])), Seg::Index(2)]));
    assert!(!is_legal(&g, &run, &again));
    assert!(is_legal(&g, &run, &lm(Player::Bottom, &g, &run, "1.2")));
    assert!(!is_legal(&g, &run, &LabMove::new(Player::Bottom, Move(vec![Seg::Bits(Bits::empty()), Seg::Index(1)]))));
    assert!(!is_legal(&g, &run, &lm(Player::Bottom, &g, &run, "e:")));
    run.push(lm(Player::Bottom, &g, &run, "1.2"));
    assert_eq!(winner(&g, &run).unwrap(), Player::Bottom);
    assert_eq!(tree_leaves(&run).len(), 2);
}

#[test]
fn basic_winners() {
    assert_eq!(winner(&Game::elem(true), &[]).unwrap(), Player::Top);
    assert_eq!(winner(&Game::elem(false), &[]).unwrap(), Player::Bottom);
    assert_eq!(winner(&Game::choice_or(vec![t(), f()]), &[]).unwrap(), Player::Bottom);
    assert_eq!(winner(&Game::choice_and(vec![f(), f()]), &[]).unwrap(), Player::Top);
    assert_eq!(winner(&Game::neg(Game::choice_or(vec![t()])), &[]).unwrap(), Player::Top);
}

#[test]
fn universal_problem_selects_by_index() {
    let mut atoms = BTreeMap::new();
    atoms.insert(1, f());
    atoms.insert(2, Game::choice_or(vec![f(), t()]));
    let itp = Interpretation::new(atoms, t());
    let d = itp.dollar();
    assert_eq!(winner(&d, &[]).unwrap(), Player::Top);
    let pick = |i: u32| LabMove::new(Player::Bottom, Move(vec![Seg::Index(i)]));
    assert_eq!(winner(&d, &[pick(0)]).unwrap(), Player::Top);
    assert_eq!(winner(&d, &[pick(1)]).unwrap(), Player::Bottom);
    let run = vec![pick(2), LabMove::new(Player::Top, Move(vec![Seg::Index(2)]))];
    assert_eq!(winner(&d, &run).unwrap(), Player::Top);
    assert!(!is_legal(&d, &[], &LabMove::new(Player::Top, Move(vec![Seg::Index(1)]))));
}

#[test]
fn interpret_commutes_with_connectives() {
    let mut atoms = BTreeMap::new();
    atoms.insert(1, t());
    atoms.insert(2, f());
    let itp = Interpretation::new(atoms, t());
    let g = itp.interpret(&parse_int_formula("P1 & P2").unwrap()).unwrap();
    assert!(matches!(&*g, Game::ChoiceAnd(Family::List(v)) if v.len() == 2));
    assert!(itp.interpret(&parse_int_formula("P7").unwrap()).is_err());
}

#[test]
fn illegal_run_rejected_with_index() {
    let g = Game::choice_or(vec![t(), f()]);
    let run = vec![LabMove::new(Player::Bottom, Move(vec![Seg::Index(1)]))];
    let e = winner(&g, &run).unwrap_err();
    assert_eq!(e.index, 0);
}

#[test]
fn move_and_transcript_round_trip() {
    let a = Game::bang(Game::choice_or(vec![t(), f(), t()]));
    let g = Game::par_or(vec![Game::neg(a.clone()), a]);
    let text = "B:2.e:\nT:1.e:\nT:2.01.3\nT:2.1.2\nB:1.1.1\n";
    assert!(parse_transcript(&g, text).is_err(), "01 is not a node yet");
    let text = "B:2.e:\nT:2.0.3\nB:2.1:\nT:2.11.1\nB:1.e.2\n";
    let run = parse_transcript(&g, text).unwrap();
    assert_eq!(transcript(&run), text);
    assert_eq!(run[2].mv.to_string(), "2.1:");
    assert!(is_legal_run(&g, &run));
}

#[test]
fn elementary_base_existential() {
    let table: Arc<dyn Fn(Atom, u64) -> bool + Send + Sync> = Arc::new(|a, c| a == Atom::P(1) && c == 3);
    let g = ElemFormula::Exists(Atom::P(1)).game(&table);
    let pick = |c| vec![LabMove::new(Player::Top, Move(vec![Seg::Constant(c)]))];
    assert_eq!(winner(&g, &pick(3)).unwrap(), Player::Top);
    assert_eq!(winner(&g, &pick(2)).unwrap(), Player::Bottom);
    assert_eq!(winner(&g, &[]).unwrap(), Player::Bottom);
}

/// Plays a random legal run of bounded length.
fn random_run<R: Rng>(g: &Game, rng: &mut R, len: usize) -> Run {
    let b = MoveBounds::default();
    let mut run = Vec::new();
    for _ in 0..len {
        let p = if rng.gen_bool(0.5) { Player::Top } else { Player::Bottom };
        let c = candidate_moves(g, &run, p, &b);
        if c.is_empty() {
            continue;
        }
        let m = c[rng.gen_range(0..c.len())].clone();
        run.push(LabMove::new(p, m));
    }
    run
}

fn wrap<R: Rng>(rng: &mut R, a: G) -> G {
    match rng.gen_range(0..4) {
        0 => Game::bang(a),
        1 => Game::cobang(a),
        2 => Game::arrow(a.clone(), a),
        _ => a,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legality_prefix_closed_and_winner_total(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_game(&mut rng, 2);
        let g = wrap(&mut rng, base);
        let run = random_run(&g, &mut rng, 8);
        prop_assert!(is_legal_run(&g, &run));
        for k in 0..=run.len() {
            prop_assert!(is_legal_run(&g, &run[..k]));
            prop_assert!(winner(&g, &run[..k]).is_ok());
        }
    }

    #[test]
    fn candidate_moves_are_legal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_game(&mut rng, 2);
        let g = wrap(&mut rng, base);
        let run = random_run(&g, &mut rng, 5);
        for p in [Player::Top, Player::Bottom] {
            for m in candidate_moves(&g, &run, p, &MoveBounds::default()) {
                prop_assert!(is_legal(&g, &run, &LabMove::new(p, m)));
            }
        }
    }

    #[test]
    fn negation_flips_winner(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_game(&mut rng, 2);
        let run = random_run(&g, &mut rng, 6);
        let ng = Game::neg(g.clone());
        let flipped = flip_run(&run);
        prop_assert!(is_legal_run(&ng, &flipped));
        prop_assert_eq!(winner(&ng, &flipped).unwrap(), winner(&g, &run).unwrap().flip());
    }
}

/// All legal runs of `g` with at most `max_len` moves and at most `max_splits` splits.
fn all_runs(g: &Game, max_len: usize, max_splits: usize) -> Vec<Run> {
    let b = MoveBounds { max_tree_depth: 2, ..MoveBounds::default() };
    let mut out = vec![];
    let mut stack: Vec<Run> = vec![vec![]];
    while let Some(run) = stack.pop() {
        out.push(run.clone());
        if run.len() == max_len {
            continue;
        }
        let splits = run.iter().filter(|l| matches!(l.mv.segs().last(), Some(Seg::Split(_)))).count();
        for p in [Player::Top, Player::Bottom] {
            for m in candidate_moves(g, &run, p, &b) {
                if matches!(m.segs().last(), Some(Seg::Split(_))) && splits >= max_splits {
                    continue;
                }
                let mut r = run.clone();
                r.push(LabMove::new(p, m));
                stack.push(r);
            }
        }
    }
    out
}

#[test]
fn bang_winner_is_conjunction_over_branches() {
    let a = Game::choice_or(vec![t(), f()]);
    for g in [Game::bang(a.clone()), Game::cobang(a.clone())] {
        let runs = all_runs(&g, 4, 2);
        assert!(runs.len() > 50);
        for run in runs {
            let per: Vec<bool> = tree_leaves(&run)
                .iter()
                .map(|w| winner(&a, &branch_project(&run, w)).unwrap() == Player::Top)
                .collect();
            let expect = if matches!(&*g, Game::Bang(_)) { per.iter().all(|x| *x) } else { per.iter().any(|x| *x) };
            assert_eq!(winner(&g, &run).unwrap() == Player::Top, expect, "{}", transcript(&run));
        }
    }
}

#[test]
fn projection_merge_round_trip() {
    let a = Game::choice_or(vec![Game::choice_and(vec![t(), f()]), f()]);
    let b = Game::choice_and(vec![Game::choice_or(vec![t(), f()]), t()]);
    let left = vec![
        LabMove::new(Player::Top, Move(vec![Seg::Index(1)])),
        LabMove::new(Player::Bottom, Move(vec![Seg::Index(2)])),
    ];
    let right = vec![
        LabMove::new(Player::Bottom, Move(vec![Seg::Index(1)])),
        LabMove::new(Player::Top, Move(vec![Seg::Index(1)])),
    ];
    for ctor in [Game::par_and as fn(Vec<G>) -> G, Game::par_or] {
        let g = ctor(vec![a.clone(), b.clone()]);
        let mut count = 0;
        for mask in 0u32..16 {
            if mask.count_ones() != 2 {
                continue;
            }
            let (mut i, mut j) = (0, 0);
            let mut run = vec![];
            for k in 0..4 {
                if mask >> k & 1 == 1 {
                    run.push(LabMove::new(left[i].player, left[i].mv.prefixed(&[Seg::Index(1)])));
                    i += 1;
                } else {
                    run.push(LabMove::new(right[j].player, right[j].mv.prefixed(&[Seg::Index(2)])));
                    j += 1;
                }
            }
            count += 1;
            assert!(is_legal_run(&g, &run));
            assert_eq!(project_run(&run, &[Seg::Index(1)]), left);
            assert_eq!(project_run(&run, &[Seg::Index(2)]), right);
            let wa = winner(&a, &left).unwrap() == Player::Top;
            let wb = winner(&b, &right).unwrap() == Player::Top;
            let expect = if matches!(&*g, Game::ParAnd(_)) { wa && wb } else { wa || wb };
            assert_eq!(winner(&g, &run).unwrap() == Player::Top, expect);
        }
        assert_eq!(count, 6);
    }
}

#[test]
fn empty_projection() {
    assert!(project_run(&[], &[Seg::Index(1)]).is_empty());
    assert!(branch_project(&[], &Bits::empty()).is_empty());
}
