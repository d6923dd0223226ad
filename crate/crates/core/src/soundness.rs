//! Strategies from Int proofs: the `$` solutions, the `⊓`/`?` exchange
//! strategy, the dedollarization bridges, and proof-driven extraction.

use std::collections::{BTreeMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::affine::{ai_to_strategy, dual, schema_proof, sequent_image, AffineError, Schema};
use crate::game_core::{Game, Interpretation, Move, Seg, G};
use crate::int_calculus::{check_int_proof, CheckError, IntProof, IntRule};
use crate::machines::{
    bang_lift, ccs, compose_mp, replace, validate, AwaitChoice, BoxStrategy, CopyCat, Network, PlayStats, Strategy,
    Thread,
};
use crate::syntax::{embed_formula, Atom, Formula, IntSequent};

/// Provable Int formulas used to validate extraction.
pub const GOLDEN_PROVABLE: [&str; 12] = [
    "P1 o- P1",
    "(P1 & (P1 o- P2)) o- P2",
    "(P1 o- (P2 o- P3)) o- ((P1 o- P2) o- (P1 o- P3))",
    "P1 o- (P2 o- P1)",
    "(P1 & P2) o- (P2 & P1)",
    "(P1 | P2) o- (P2 | P1)",
    "(P1 & P2) o- P1",
    "P1 o- (P1 | P2)",
    "$ o- P1",
    "$ o- $",
    "(P1 | P2) o- ((P1 o- P3) o- ((P2 o- P3) o- P3))",
    "(P1 o- (P2 & P3)) o- ((P1 o- P2) & (P1 o- P3))",
];

#[derive(Debug, Error)]
pub enum SoundnessError {
    #[error("proof does not check: {0}")]
    Unchecked(#[from] CheckError),
    #[error("helper proof failed: {0}")]
    Affine(#[from] AffineError),
}

fn idx(i: usize) -> Seg {
    Seg::Index(i as u32)
}

/// A strategy for `$ -> K`.
pub fn dollar_solution(k: &Formula) -> Result<BoxStrategy, SoundnessError> {
    Ok(match k {
        Formula::Atom(Atom::Dollar) => ccs(),
        Formula::Atom(Atom::P(m)) => {
            let mut n = Network::new(vec![ccs()]);
            n.init(Move(vec![idx(1), Seg::Index(*m)]));
            n.port(0, vec![idx(1)], vec![idx(1)], Thread::Same);
            n.port(0, vec![idx(2)], vec![idx(2)], Thread::Same);
            n.boxed()
        }
        Formula::WeakImp(e, f) => {
            let inner = dollar_solution(f)?;
            let wimp = ai_to_strategy(&schema_proof(&Schema::WeakImpIntro { e: (**e).clone(), f: (**f).clone() })?);
            let fa = embed_formula(f);
            let h1 = Formula::ParOr(vec![dual(&Formula::dollar()), fa.clone()]);
            replace(inner, wimp, &fa, &embed_formula(k), &h1, &[1])?
        }
        Formula::ChoiceOr(v) => {
            let mut n = Network::new(vec![dollar_solution(&v[0])?]);
            n.init(Move(vec![idx(2), idx(1)]));
            n.port(0, vec![idx(1)], vec![idx(1)], Thread::Same);
            n.port(0, vec![idx(2)], vec![idx(2)], Thread::Same);
            n.boxed()
        }
        Formula::ChoiceAnd(v) => {
            let branches = v.iter().map(dollar_solution).collect::<Result<Vec<_>, _>>()?;
            Box::new(AwaitChoice::new(vec![idx(2)], branches))
        }
        _ => unreachable!("not an Int formula: {k}"),
    })
}

/// A strategy for `!$ -> K`.
pub fn bang_dollar_solution(k: &Formula) -> Result<BoxStrategy, SoundnessError> {
    let base = dollar_solution(k)?;
    let lift = ai_to_strategy(&schema_proof(&Schema::DollarCobang)?);
    let nd = dual(&Formula::dollar());
    let h1 = Formula::ParOr(vec![nd.clone(), embed_formula(k)]);
    Ok(replace(base, lift, &nd, &Formula::cobang(nd.clone()), &h1, &[0])?)
}

/// Waits for the adversary's choice `watch.i`, answers with `answer.map(i)`,
/// then copies between `[1]` and `[2]`. Earlier moves are replayed into the
/// copy-cat once the choice is known.
#[derive(Clone)]
pub struct ChoiceRelay {
    watch: Vec<Seg>,
    answer: Vec<Seg>,
    map: BTreeMap<u32, u32>,
    default: Option<u32>,
    buffer: Vec<Move>,
    copy: Option<CopyCat>,
    out: VecDeque<Move>,
}

impl ChoiceRelay {
    pub fn new(watch: Vec<Seg>, answer: Vec<Seg>, map: BTreeMap<u32, u32>, default: Option<u32>) -> Self {
        ChoiceRelay { watch, answer, map, default, buffer: Vec::new(), copy: None, out: VecDeque::new() }
    }
}

impl Strategy for ChoiceRelay {
    fn observe(&mut self, mv: &Move) {
        if let Some(c) = &mut self.copy {
            c.observe(mv);
            return;
        }
        if let Some(rest) = mv.strip(&self.watch) {
            if let [Seg::Index(i)] = rest.segs() {
                if let Some(j) = self.map.get(i).copied().or(self.default) {
                    self.out.push_back(Move([&self.answer[..], &[Seg::Index(j)]].concat()));
                    let mut c = CopyCat::between(vec![idx(1)], vec![idx(2)]);
                    for m in self.buffer.drain(..) {
                        c.observe(&m);
                    }
                    self.copy = Some(c);
                    return;
                }
            }
        }
        self.buffer.push(mv.clone());
    }

    fn step(&mut self) -> Option<Move> {
        if let Some(m) = self.out.pop_front() {
            return Some(m);
        }
        self.copy.as_mut().and_then(|c| c.step())
    }
}

/// A strategy for `?E1 ⊓ ?E2 -> ?(E1 ⊓ E2)`, any `E1`, `E2`.
pub fn pand_lift() -> BoxStrategy {
    let map = BTreeMap::from([(1, 1), (2, 2)]);
    Box::new(ChoiceRelay::new(vec![idx(2), Seg::Bits(Default::default())], vec![idx(1)], map, None))
}

/// The interpretation `*` built from `circ` for the atoms `P0..Pn`: every
/// other atom and the base of `$` become `P0`.
pub fn dedollar_star(atoms: &[Atom], circ: &Interpretation) -> Interpretation {
    let p0 = atoms.first().and_then(|a| a.index()).expect("P0 is a nonlogical atom");
    let g0 = circ.atoms[&p0].clone();
    let table = atoms.iter().filter_map(|a| a.index()).map(|m| (m, circ.atoms[&m].clone())).collect();
    Interpretation { atoms: table, base: g0.clone(), rest: g0 }
}

/// The games `$ -> P0 ⊓ ... ⊓ Pn` and `P0 ⊓ ... ⊓ Pn -> $` under `star`, with
/// the conjunction taken flat.
pub fn bridge_games(atoms: &[Atom], star: &Interpretation) -> (G, G) {
    let conj = Game::choice_and(atoms.iter().map(|a| star.universe_game(a.index().expect("nonlogical"))).collect());
    let d = star.dollar();
    (Game::par_or(vec![Game::neg(d.clone()), conj.clone()]), Game::par_or(vec![Game::neg(conj), d]))
}

/// The two strategies relating `$` and `P0 ⊓ ... ⊓ Pn` under the
/// interpretation of [`dedollar_star`].
pub fn dedollar_bridge_strategies(atoms: &[Atom]) -> (BoxStrategy, BoxStrategy) {
    let num = |a: &Atom| a.index().expect("nonlogical atom");
    // Choice i of the conjunction is atom Q_m, i.e. index m of `$`.
    let fwd: BTreeMap<u32, u32> = atoms.iter().enumerate().map(|(i, a)| (i as u32 + 1, num(a))).collect();
    // Index m of `$` is P_i when Q_m = P_i, and P0 otherwise (including the base).
    let back: BTreeMap<u32, u32> = atoms.iter().enumerate().map(|(i, a)| (num(a), i as u32 + 1)).collect();
    (
        Box::new(ChoiceRelay::new(vec![idx(2)], vec![idx(1)], fwd, None)),
        Box::new(ChoiceRelay::new(vec![idx(2)], vec![idx(1)], back, Some(1))),
    )
}

/// One proof node's part of an extraction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub path: Vec<usize>,
    pub case: &'static str,
    pub conclusion: String,
    pub schemas: Vec<String>,
    pub combinators: Vec<&'static str>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExtractionTrace {
    /// Pre-order.
    pub entries: Vec<TraceEntry>,
}

impl ExtractionTrace {
    pub fn to_json(&self) -> Value {
        json!({ "nodes": self.entries })
    }
}

/// The names of the eleven extraction cases.
pub const CASES: [&str; 11] = [
    "Axiom",
    "DollarAxiom",
    "Exchange",
    "Weakening",
    "Contraction",
    "LeftWeakImp",
    "RightWeakImp",
    "LeftChoiceOr",
    "RightChoiceOr",
    "LeftChoiceAnd",
    "RightChoiceAnd",
];

/// A strategy for the AI image of the proof's conclusion, with its trace.
pub fn extract(p: &IntProof) -> Result<(BoxStrategy, ExtractionTrace), SoundnessError> {
    check_int_proof(p)?;
    let mut trace = ExtractionTrace::default();
    let s = node(p, &mut Vec::new(), &mut trace)?;
    Ok((s, trace))
}

/// Address of antecedent formula `i` among `n` in the sequent image.
fn ante_occ(n: usize, i: usize) -> Vec<usize> {
    if n == 1 {
        vec![0]
    } else {
        vec![0, i]
    }
}

fn succ_occ(n: usize) -> Vec<usize> {
    if n == 0 {
        vec![]
    } else {
        vec![1]
    }
}

fn image(s: &IntSequent) -> Formula {
    let ant: Vec<Formula> = s.antecedent.iter().map(embed_formula).collect();
    sequent_image(&ant, &embed_formula(&s.succedent))
}

fn node(p: &IntProof, path: &mut Vec<usize>, trace: &mut ExtractionTrace) -> Result<BoxStrategy, SoundnessError> {
    let at = trace.entries.len();
    let c = &p.conclusion;
    trace.entries.push(TraceEntry {
        path: path.clone(),
        case: "",
        conclusion: c.to_string(),
        schemas: vec![],
        combinators: vec![],
    });
    let mut premises = Vec::new();
    for (i, q) in p.premises.iter().enumerate() {
        path.push(i);
        premises.push(node(q, path, trace)?);
        path.pop();
    }
    let mut schemas = Vec::new();
    let mut comb = Vec::new();
    let use_schema = |s: Schema, schemas: &mut Vec<String>| -> Result<BoxStrategy, SoundnessError> {
        schemas.push(s.id().to_string());
        Ok(ai_to_strategy(&schema_proof(&s)?))
    };
    let n = c.antecedent.len();
    let mut prem = premises.into_iter();
    let mut next = || prem.next().expect("arity checked");
    let (case, strategy) = match p.rule {
        IntRule::Axiom if c.antecedent[0] == c.succedent => {
            ("Axiom", use_schema(Schema::AxiomLift { k: embed_formula(&c.succedent) }, &mut schemas)?)
        }
        IntRule::Axiom => {
            comb.push("bang_dollar_solution");
            ("DollarAxiom", bang_dollar_solution(&c.succedent)?)
        }
        IntRule::Exchange | IntRule::Weakening | IntRule::Contraction | IntRule::RightWeakImp => {
            let (case, id) = match p.rule {
                IntRule::Exchange => ("Exchange", "s-exchange"),
                IntRule::Weakening => ("Weakening", "s-weakening"),
                IntRule::Contraction => ("Contraction", "s-contraction"),
                _ => ("RightWeakImp", "s-right-wimp"),
            };
            let lift = use_schema(
                Schema::Structural { id, premise: p.premises[0].conclusion.clone(), conclusion: c.clone() },
                &mut schemas,
            )?;
            comb.push("compose_mp");
            (case, compose_mp(next(), lift))
        }
        IntRule::LeftWeakImp => {
            let (s1, s2) = (next(), next());
            let p1 = &p.premises[0].conclusion;
            let p2 = &p.premises[1].conclusion;
            let g = p1.antecedent[..p1.antecedent.len() - 1].to_vec();
            let e = p1.antecedent[p1.antecedent.len() - 1].clone();
            let sch = use_schema(
                Schema::LeftWeakImp {
                    g,
                    h: p2.antecedent.clone(),
                    e,
                    k1: c.succedent.clone(),
                    k2: p2.succedent.clone(),
                },
                &mut schemas,
            )?;
            comb.extend(["bang_lift", "compose_mp", "compose_mp"]);
            ("LeftWeakImp", compose_mp(bang_lift(s2), compose_mp(s1, sch)))
        }
        IntRule::LeftChoiceOr => {
            let (s1, s2) = (next(), next());
            let Formula::ChoiceOr(es) = &c.antecedent[n - 1] else { unreachable!("checked") };
            let g: Vec<Formula> = c.antecedent[..n - 1].to_vec();
            let sch = use_schema(
                Schema::LeftChoiceOr { g: g.clone(), e1: es[0].clone(), e2: es[1].clone(), k: c.succedent.clone() },
                &mut schemas,
            )?;
            let composed = compose_mp(s2, compose_mp(s1, sch));
            let (ne1, ne2) = (dual(&embed_formula(&es[0])), dual(&embed_formula(&es[1])));
            let g1 = Formula::ChoiceAnd(vec![Formula::cobang(ne1.clone()), Formula::cobang(ne2.clone())]);
            let g2 = Formula::cobang(Formula::ChoiceAnd(vec![ne1, ne2]));
            let mut inner: Vec<Formula> = g.iter().map(|x| Formula::cobang(dual(&embed_formula(x)))).collect();
            inner.push(g1.clone());
            let left = if inner.len() == 1 { inner.pop().unwrap() } else { Formula::ParOr(inner) };
            let h1 = Formula::ParOr(vec![left, embed_formula(&c.succedent)]);
            comb.extend(["compose_mp", "compose_mp", "pand_lift+replace"]);
            ("LeftChoiceOr", replace(composed, pand_lift(), &g1, &g2, &h1, &ante_occ(n, n - 1))?)
        }
        IntRule::RightChoiceOr(i) => {
            let Formula::ChoiceOr(ks) = &c.succedent else { unreachable!("checked") };
            let sch =
                use_schema(Schema::ChoiceOrLift { k1: ks[0].clone(), k2: ks[1].clone(), i: i as usize }, &mut schemas)?;
            let h1 = image(&p.premises[0].conclusion);
            let ki = embed_formula(&ks[i as usize - 1]);
            comb.push("replace");
            ("RightChoiceOr", replace(next(), sch, &ki, &embed_formula(&c.succedent), &h1, &succ_occ(n))?)
        }
        IntRule::LeftChoiceAnd(i) => {
            let Formula::ChoiceAnd(es) = &c.antecedent[n - 1] else { unreachable!("checked") };
            let sch =
                use_schema(Schema::CobangChoice { e1: es[0].clone(), e2: es[1].clone(), i: i as usize }, &mut schemas)?;
            let h1 = image(&p.premises[0].conclusion);
            let g1 = Formula::cobang(dual(&embed_formula(&es[i as usize - 1])));
            let g2 = Formula::cobang(dual(&embed_formula(&c.antecedent[n - 1])));
            comb.push("replace");
            ("LeftChoiceAnd", replace(next(), sch, &g1, &g2, &h1, &ante_occ(n, n - 1))?)
        }
        IntRule::RightChoiceAnd => {
            let (s1, s2) = (next(), next());
            let Formula::ChoiceAnd(ks) = &c.succedent else { unreachable!("checked") };
            let sch = use_schema(
                Schema::RightChoiceAnd { g: c.antecedent.clone(), k1: ks[0].clone(), k2: ks[1].clone() },
                &mut schemas,
            )?;
            comb.extend(["compose_mp", "compose_mp"]);
            ("RightChoiceAnd", compose_mp(s2, compose_mp(s1, sch)))
        }
    };
    let e = &mut trace.entries[at];
    e.case = case;
    e.schemas = schemas;
    e.combinators = comb;
    Ok(strategy)
}

/// Seeded interpretations binding `P1..=max_atom`, as used for validation.
pub fn sample_interpretations(seed: u64, count: usize, max_atom: u32) -> Vec<Interpretation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Interpretation::random(&mut rng, max_atom.max(1))).collect()
}

/// Plays `s` on the game of `f` under `interps` sampled interpretations,
/// `plays` random adversaries each, and sums the results.
pub fn validate_formula(s: &dyn Strategy, f: &Formula, interps: usize, plays: usize, seed: u64) -> PlayStats {
    let max_atom = f.atoms().iter().filter_map(|a| a.index()).max().unwrap_or(1);
    let mut total = PlayStats::default();
    for (k, i) in sample_interpretations(seed, interps, max_atom).iter().enumerate() {
        let g = i.interpret(f).expect("all atoms bound");
        let st = validate(s, &g, plays, seed.wrapping_add(k as u64 * 7919), VALIDATION_ADVERSARY_MOVES);
        total.plays += st.plays;
        total.top_wins += st.top_wins;
        total.undetermined += st.undetermined;
        total.illegal_by_top += st.illegal_by_top;
        if total.first_loss.is_none() {
            total.first_loss = st.first_loss;
        }
    }
    total
}

/// Moves a validation adversary may make in one play.
pub const VALIDATION_ADVERSARY_MOVES: usize = 8;

/// The AI formula whose game an extracted strategy plays.
pub fn extraction_target(s: &IntSequent) -> Formula {
    image(s)
}
