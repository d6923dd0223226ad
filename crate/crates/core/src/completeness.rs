//! Refuting unprovable Int-formulas: dedollarization, standardization,
//! desequentization and elementarization, followed by the counterstrategy
//! machine with its molecule ledger, chains and counterinterpretations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::game_core::{winner, Bits, ElemFormula, IllegalRun, LabMove, Move, MoveBounds, Player, Run, Seg};
use crate::int_calculus::{decide_int, ProveError};
use crate::kripke::{countermodel, KripkeModel};
use crate::machines::{arena_run, ArenaResult, BoxStrategy, Idle, RandomAdversary, Strategy, DEFAULT_BUDGET};
use crate::syntax::{fresh_atoms, Atom, Formula, IntSequent};

/// Truth table for ground atoms `A(c)`.
pub type Table = Arc<dyn Fn(Atom, u64) -> bool + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompletenessError {
    #[error("{0} contains $")]
    Dollar(String),
    #[error("not an Int-formula: {0}")]
    NotInt(String),
    #[error("not an elementary formula: {0}")]
    NotElementary(String),
    #[error("{0} is Int-provable")]
    Provable(String),
    #[error("no countermodel with at most {0} worlds")]
    NoCountermodel(usize),
    #[error(transparent)]
    Prover(#[from] ProveError),
    #[error("check failed: {0}")]
    Check(String),
}

// ---------------------------------------------------------------------------
// Dedollarization

/// `P0, P1, ..., Pn`: the least atom absent from `k`, then the nonlogical atoms of `k`.
pub fn dedollar_atoms(k: &Formula) -> Vec<Atom> {
    let atoms: BTreeSet<Atom> = k.atoms().into_iter().filter(|a| *a != Atom::Dollar).collect();
    let mut out = fresh_atoms(1, &atoms);
    out.extend(atoms);
    out
}

/// Replaces `$` by the right-nested `P0 & P1 & ... & Pn`; dollarless input is returned as is.
pub fn dedollarize(k: &Formula) -> Formula {
    if !k.has_dollar() {
        return k.clone();
    }
    let conj = Formula::cand_nested(dedollar_atoms(k).into_iter().map(Formula::Atom).collect());
    substitute_dollar(k, &conj)
}

fn substitute_dollar(f: &Formula, by: &Formula) -> Formula {
    use Formula::*;
    let map = |v: &Vec<Formula>| v.iter().map(|g| substitute_dollar(g, by)).collect::<Vec<_>>();
    match f {
        Atom(crate::syntax::Atom::Dollar) => by.clone(),
        Atom(_) => f.clone(),
        Neg(g) => Formula::neg(substitute_dollar(g, by)),
        Bang(g) => Formula::bang(substitute_dollar(g, by)),
        Cobang(g) => Formula::cobang(substitute_dollar(g, by)),
        ChoiceAnd(v) => ChoiceAnd(map(v)),
        ChoiceOr(v) => ChoiceOr(map(v)),
        ParAnd(v) => ParAnd(map(v)),
        ParOr(v) => ParOr(map(v)),
        WeakImp(a, b) => Formula::wimp(substitute_dollar(a, by), substitute_dollar(b, by)),
    }
}

// ---------------------------------------------------------------------------
// Standardization

/// Atomic names of the subformulas of a formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NamingMap {
    /// Non-atomic subformulas in ascending order with their names.
    pub names: Vec<(Formula, Atom)>,
    /// Filler atom used when there are no `o-` subformulas but other connectives.
    pub padding: Option<Atom>,
}

impl NamingMap {
    /// `H^K`: the atom itself for atoms, the assigned name otherwise.
    pub fn name(&self, h: &Formula) -> Option<Atom> {
        match h {
            Formula::Atom(a) => Some(*a),
            _ => self.names.iter().find(|(g, _)| g == h).map(|(_, a)| *a),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "names": self.names.iter().map(|(h, a)| json!({"formula": h.to_string(), "name": a.to_string()})).collect::<Vec<_>>(),
            "padding": self.padding.map(|a| a.to_string()),
        })
    }
}

/// `X1 o- (Y1 o- (Z1 | T1)), ..., (P1 o- Q1) o- R1, ... => W`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StandardSequent {
    /// Rows `(X, Y, Z, T)`.
    pub first: Vec<[Atom; 4]>,
    /// Rows `(P, Q, R)`.
    pub second: Vec<[Atom; 3]>,
    pub w: Atom,
}

fn first_kind(r: &[Atom; 4]) -> Formula {
    let a = |i: usize| Formula::Atom(r[i]);
    Formula::wimp(a(0), Formula::wimp(a(1), Formula::cor(a(2), a(3))))
}

fn second_kind(r: &[Atom; 3]) -> Formula {
    let a = |i: usize| Formula::Atom(r[i]);
    Formula::wimp(Formula::wimp(a(0), a(1)), a(2))
}

impl StandardSequent {
    pub fn k(&self) -> usize {
        self.first.len()
    }

    pub fn antecedent(&self) -> Vec<Formula> {
        self.first.iter().map(first_kind).chain(self.second.iter().map(second_kind)).collect()
    }

    pub fn to_sequent(&self) -> IntSequent {
        IntSequent::new(self.antecedent(), Formula::Atom(self.w))
    }

    /// Reads a sequent of the standard shape back.
    pub fn from_sequent(s: &IntSequent) -> Option<StandardSequent> {
        let atom = |f: &Formula| match f {
            Formula::Atom(a @ Atom::P(_)) => Some(*a),
            _ => None,
        };
        let w = atom(&s.succedent)?;
        if !s.antecedent.len().is_multiple_of(2) {
            return None;
        }
        let k = s.antecedent.len() / 2;
        let mut first = Vec::with_capacity(k);
        for f in &s.antecedent[..k] {
            let Formula::WeakImp(x, rest) = f else { return None };
            let Formula::WeakImp(y, zt) = rest.as_ref() else { return None };
            let Formula::ChoiceOr(v) = zt.as_ref() else { return None };
            if v.len() != 2 {
                return None;
            }
            first.push([atom(x)?, atom(y)?, atom(&v[0])?, atom(&v[1])?]);
        }
        let mut second = Vec::with_capacity(k);
        for f in &s.antecedent[k..] {
            let Formula::WeakImp(pq, r) = f else { return None };
            let Formula::WeakImp(p, q) = pq.as_ref() else { return None };
            second.push([atom(p)?, atom(q)?, atom(r)?]);
        }
        Some(StandardSequent { first, second, w })
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s: BTreeSet<Atom> = self.first.iter().flatten().chain(self.second.iter().flatten()).copied().collect();
        s.insert(self.w);
        s
    }

    pub fn to_json(&self) -> Value {
        let names = |v: &[Atom]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>();
        json!({
            "k": self.k(),
            "first": self.first.iter().map(|r| names(r)).collect::<Vec<_>>(),
            "second": self.second.iter().map(|r| names(r)).collect::<Vec<_>>(),
            "succedent": self.w.to_string(),
            "sequent": self.to_sequent().to_string(),
        })
    }
}

pub fn is_standard(s: &IntSequent) -> bool {
    StandardSequent::from_sequent(s).is_some()
}

/// The standard sequent of a dollarless Int-formula with its naming map.
pub fn standardize(k: &Formula) -> Result<(StandardSequent, NamingMap), CompletenessError> {
    if !k.is_int() {
        return Err(CompletenessError::NotInt(k.to_string()));
    }
    if k.has_dollar() {
        return Err(CompletenessError::Dollar(k.to_string()));
    }
    let mut subs: Vec<Formula> = k.subformulas().into_iter().filter(|f| !matches!(f, Formula::Atom(_))).collect();
    subs.sort();
    let fresh = fresh_atoms(subs.len() + 1, &k.atoms());
    let mut names = NamingMap { names: subs.iter().cloned().zip(fresh.iter().copied()).collect(), padding: None };
    let nm = |h: &Formula| names.name(h).expect("every subformula is named");
    let (mut first, mut second) = (Vec::new(), Vec::new());
    let (mut imps, mut ors, mut ands) = (Vec::new(), Vec::new(), Vec::new());
    for h in &subs {
        let (c0, c1) = match h {
            Formula::WeakImp(a, b) => (a.as_ref(), b.as_ref()),
            Formula::ChoiceOr(v) | Formula::ChoiceAnd(v) => (&v[0], &v[1]),
            _ => unreachable!("Int-formulas are atoms or binary"),
        };
        let row = (nm(h), nm(c0), nm(c1));
        match h {
            Formula::WeakImp(..) => imps.push(row),
            Formula::ChoiceOr(_) => ors.push(row),
            _ => ands.push(row),
        }
    }
    for &(a, b, c) in &imps {
        first.push([a, b, c, c]);
        second.push([b, c, a]);
    }
    first.extend(ors.iter().map(|&(d, e, _)| [e, e, d, d]));
    first.extend(ors.iter().map(|&(d, _, f)| [f, f, d, d]));
    first.extend(ors.iter().map(|&(d, e, f)| [d, d, e, f]));
    first.extend(ands.iter().map(|&(g, h, _)| [g, g, h, h]));
    first.extend(ands.iter().map(|&(g, _, i)| [g, g, i, i]));
    first.extend(ands.iter().map(|&(g, h, i)| [h, i, g, g]));
    let extra = 3 * (ors.len() + ands.len());
    if extra > 0 {
        let last = match second.last() {
            Some(r) => *r,
            None => {
                let v = fresh[subs.len()];
                names.padding = Some(v);
                [v, v, v]
            }
        };
        second.extend(std::iter::repeat_n(last, extra));
    }
    let w = names.name(k).expect("k is named");
    Ok((StandardSequent { first, second, w }, names))
}

// ---------------------------------------------------------------------------
// Desequentization and elementarization

/// The AI-formula `!(X /\ Y -> Z | T) /\ ... /\ !((!P -> Q) /\ ... -> R) /\ ... -> W`
/// with `n` copies of each `!P -> Q`.
pub fn desequentize(s: &StandardSequent, n: usize) -> Formula {
    assert!(n >= 1, "n must be positive");
    let a = Formula::Atom;
    let mut conj = Vec::with_capacity(2 * s.k());
    for r in &s.first {
        let body = Formula::arrow(Formula::ParAnd(vec![a(r[0]), a(r[1])]), Formula::ChoiceOr(vec![a(r[2]), a(r[3])]));
        conj.push(Formula::bang(body));
    }
    for r in &s.second {
        let mut items: Vec<Formula> = (0..n).map(|_| Formula::arrow(Formula::bang(a(r[0])), a(r[1]))).collect();
        let block = if n == 1 { items.pop().unwrap() } else { Formula::ParAnd(items) };
        conj.push(Formula::bang(Formula::arrow(block, a(r[2]))));
    }
    match conj.len() {
        0 => a(s.w),
        1 => Formula::arrow(conj.pop().unwrap(), a(s.w)),
        _ => Formula::arrow(Formula::ParAnd(conj), a(s.w)),
    }
}

/// Replaces every atom `A` of an elementary AI-formula by `Ex.A(x)`.
pub fn elementarize(f: &Formula) -> Result<ElemFormula, CompletenessError> {
    let map = |v: &Vec<Formula>| v.iter().map(elementarize).collect::<Result<Vec<_>, _>>();
    Ok(match f {
        Formula::Atom(Atom::Dollar) => return Err(CompletenessError::Dollar(f.to_string())),
        Formula::Atom(a) => ElemFormula::Exists(*a),
        Formula::Neg(g) => ElemFormula::Neg(Box::new(elementarize(g)?)),
        Formula::Bang(g) => ElemFormula::Bang(Box::new(elementarize(g)?)),
        Formula::Cobang(g) => ElemFormula::Cobang(Box::new(elementarize(g)?)),
        Formula::ParAnd(v) => ElemFormula::ParAnd(map(v)?),
        Formula::ParOr(v) => ElemFormula::ParOr(map(v)?),
        Formula::ChoiceOr(v) => ElemFormula::ChoiceOr(map(v)?),
        Formula::ChoiceAnd(_) | Formula::WeakImp(..) => return Err(CompletenessError::NotElementary(f.to_string())),
    })
}

/// The elementarized desequentization with uniform move addresses: the outer
/// conjunction and every `!P -> Q` block stay lists even when unary or empty.
pub fn elementary_formula(s: &StandardSequent, n: usize) -> ElemFormula {
    assert!(n >= 1, "n must be positive");
    let e = ElemFormula::Exists;
    let mut conj = Vec::with_capacity(2 * s.k());
    for r in &s.first {
        let body = ElemFormula::arrow(
            ElemFormula::ParAnd(vec![e(r[0]), e(r[1])]),
            ElemFormula::ChoiceOr(vec![e(r[2]), e(r[3])]),
        );
        conj.push(ElemFormula::bang(body));
    }
    for r in &s.second {
        let block =
            ElemFormula::ParAnd((0..n).map(|_| ElemFormula::arrow(ElemFormula::bang(e(r[0])), e(r[1]))).collect());
        conj.push(ElemFormula::bang(ElemFormula::arrow(block, e(r[2]))));
    }
    ElemFormula::arrow(ElemFormula::ParAnd(conj), e(s.w))
}

// ---------------------------------------------------------------------------
// Molecules

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Metatype {
    W,
    X,
    Y,
    ZT,
    Q(u32),
    R,
    P(u32),
}

impl Metatype {
    pub fn code(self) -> u8 {
        match self {
            Metatype::W => 0,
            Metatype::X => 1,
            Metatype::Y => 2,
            Metatype::ZT => 3,
            Metatype::Q(_) => 4,
            Metatype::R => 5,
            Metatype::P(_) => 6,
        }
    }

    /// The `p` index of `Q` and `P` molecules, 0 otherwise.
    pub fn p(self) -> u32 {
        match self {
            Metatype::Q(p) | Metatype::P(p) => p,
            _ => 0,
        }
    }

    pub fn gender(self) -> Gender {
        match self {
            Metatype::W | Metatype::X | Metatype::Y | Metatype::Q(_) => Gender::Positive,
            _ => Gender::Negative,
        }
    }
}

/// Positive molecules are grounded by Top, negative ones by Bottom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Gender {
    Positive,
    Negative,
}

impl Gender {
    pub fn grounder(self) -> Player {
        match self {
            Gender::Positive => Player::Top,
            Gender::Negative => Player::Bottom,
        }
    }
}

/// A molecule: metatype, row index `j` (0 for `W`), thread `w` and inner thread `u` (for `P`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MoleculeId {
    pub metatype: Metatype,
    pub j: u32,
    pub w: Bits,
    pub u: Bits,
}

impl MoleculeId {
    pub fn new(metatype: Metatype, j: u32, w: Bits) -> Self {
        MoleculeId { metatype, j, w, u: Bits::empty() }
    }

    pub fn w() -> Self {
        MoleculeId::new(Metatype::W, 0, Bits::empty())
    }

    fn with_w(&self, w: Bits) -> Self {
        MoleculeId { w, ..self.clone() }
    }

    fn with_u(&self, u: Bits) -> Self {
        MoleculeId { u, ..self.clone() }
    }
}

impl fmt::Display for MoleculeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = self.j;
        match self.metatype {
            Metatype::W => write!(f, "[W]"),
            Metatype::X => write!(f, "[X{j}]^{}", self.w),
            Metatype::Y => write!(f, "[Y{j}]^{}", self.w),
            Metatype::ZT => write!(f, "[Z{j}|T{j}]^{}", self.w),
            Metatype::Q(p) => write!(f, "[Q{j}^{p}]^{}", self.w),
            Metatype::R => write!(f, "[R{j}]^{}", self.w),
            Metatype::P(p) => write!(f, "[P{j}^{p}]_{}^{}", self.u, self.w),
        }
    }
}

/// What a molecule currently is: an undecided choice, an `Ex.A(x)`, or a ground `A(a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Content {
    Disj(Atom, Atom),
    Exists(Atom),
    Ground(Atom, u64),
}

impl fmt::Display for Content {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Content::Disj(a, b) => write!(f, "Ex.{a}(x) | Ex.{b}(x)"),
            Content::Exists(a) => write!(f, "Ex.{a}(x)"),
            Content::Ground(a, c) => write!(f, "{a}({c})"),
        }
    }
}

/// A grounding event, shared by the molecule grounded and its descendants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupermoleculeRecord {
    pub id: MoleculeId,
    pub atom: Atom,
    pub constant: u64,
    pub grounding_time: usize,
    pub gender: Gender,
}

impl SupermoleculeRecord {
    pub fn content(&self) -> (Atom, u64) {
        (self.atom, self.constant)
    }

    /// Ordering key for chain comparison.
    pub fn key(&self) -> (usize, u8, u32, u32, Bits, Bits) {
        let id = &self.id;
        (self.grounding_time, id.metatype.code(), id.j, id.metatype.p(), id.w.clone(), id.u.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id.to_string(),
            "content": format!("{}({})", self.atom, self.constant),
            "grounding_time": self.grounding_time,
            "gender": format!("{:?}", self.gender),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiveMolecule {
    pub content: Content,
    /// Index of the supermolecule record once grounded.
    pub essence: Option<usize>,
}

/// The residual molecules of a position of the elementary game, updated move by move.
#[derive(Clone, Debug)]
pub struct Molecules {
    k: usize,
    n: usize,
    pub live: BTreeMap<MoleculeId, LiveMolecule>,
    pub supers: Vec<SupermoleculeRecord>,
    essence_of: BTreeMap<MoleculeId, usize>,
    used: BTreeSet<u64>,
    time: usize,
}

impl Molecules {
    pub fn new(s: &StandardSequent, n: usize) -> Self {
        let e = Bits::empty();
        let mut live = BTreeMap::new();
        let mut add = |id: MoleculeId, content| {
            live.insert(id, LiveMolecule { content, essence: None });
        };
        add(MoleculeId::w(), Content::Exists(s.w));
        for (j, r) in (1u32..).zip(&s.first) {
            add(MoleculeId::new(Metatype::X, j, e.clone()), Content::Exists(r[0]));
            add(MoleculeId::new(Metatype::Y, j, e.clone()), Content::Exists(r[1]));
            add(MoleculeId::new(Metatype::ZT, j, e.clone()), Content::Disj(r[2], r[3]));
        }
        for (j, r) in (1u32..).zip(&s.second) {
            for p in 1..=n as u32 {
                add(MoleculeId::new(Metatype::P(p), j, e.clone()), Content::Exists(r[0]));
                add(MoleculeId::new(Metatype::Q(p), j, e.clone()), Content::Exists(r[1]));
            }
            add(MoleculeId::new(Metatype::R, j, e.clone()), Content::Exists(r[2]));
        }
        Molecules { k: s.k(), n, live, supers: Vec::new(), essence_of: BTreeMap::new(), used: BTreeSet::new(), time: 0 }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of moves applied.
    pub fn time(&self) -> usize {
        self.time
    }

    /// The least positive constant not yet chosen by any grounding move.
    pub fn fresh_constant(&self) -> u64 {
        (1..).find(|c| !self.used.contains(c)).unwrap()
    }

    /// Record index of the grounding shared by `id`, if it was ever grounded.
    pub fn essence(&self, id: &MoleculeId) -> Option<usize> {
        self.essence_of.get(id).copied()
    }

    /// Grounded with the content of some supermolecule of the opposite gender.
    pub fn matchingly_grounded(&self, id: &MoleculeId) -> bool {
        let Some(r) = self.essence(id).map(|i| &self.supers[i]) else { return false };
        self.supers.iter().any(|s| s.gender != r.gender && s.content() == r.content())
    }

    pub fn leaves(&self, metatype: Metatype, j: u32) -> Vec<MoleculeId> {
        self.live.keys().filter(|id| id.metatype == metatype && id.j == j).cloned().collect()
    }

    /// Interprets one legal move of the elementary game.
    pub fn apply(&mut self, player: Player, mv: &Move) -> Result<(), String> {
        use Seg::{Bits as B, Constant as C, Index as I, Split as S};
        let bad = || format!("unrecognized move {mv}");
        self.time += 1;
        let k = self.k as u32;
        match mv.segs() {
            [I(2), C(a)] => self.ground(player, *a, |id| id.metatype == Metatype::W),
            [I(1), I(i), rest @ ..] if (1..=k).contains(i) => {
                let j = *i;
                let tree = |m: Metatype| matches!(m, Metatype::X | Metatype::Y | Metatype::ZT);
                match rest {
                    [S(v)] => self.split(|id| tree(id.metatype) && id.j == j && id.w == *v, true),
                    [B(v), I(1), I(1), C(a)] => {
                        self.ground(player, *a, |id| id.metatype == Metatype::X && id.j == j && v.is_prefix_of(&id.w))
                    }
                    [B(v), I(1), I(2), C(a)] => {
                        self.ground(player, *a, |id| id.metatype == Metatype::Y && id.j == j && v.is_prefix_of(&id.w))
                    }
                    [B(v), I(2), I(d)] if (1..=2).contains(d) => {
                        self.dedisj(*d, |id| id.metatype == Metatype::ZT && id.j == j && v.is_prefix_of(&id.w))
                    }
                    [B(v), I(2), C(a)] => {
                        self.ground(player, *a, |id| id.metatype == Metatype::ZT && id.j == j && v.is_prefix_of(&id.w))
                    }
                    _ => Err(bad()),
                }
            }
            [I(1), I(i), rest @ ..] if (k + 1..=2 * k).contains(i) => {
                let j = i - k;
                let tree = |m: Metatype| matches!(m, Metatype::Q(_) | Metatype::R | Metatype::P(_));
                match rest {
                    [S(v)] => self.split(|id| tree(id.metatype) && id.j == j && id.w == *v, true),
                    [B(v), I(2), C(a)] => {
                        self.ground(player, *a, |id| id.metatype == Metatype::R && id.j == j && v.is_prefix_of(&id.w))
                    }
                    [B(v), I(1), I(p), I(2), C(a)] => self
                        .ground(player, *a, |id| id.metatype == Metatype::Q(*p) && id.j == j && v.is_prefix_of(&id.w)),
                    [B(v), I(1), I(p), I(1), S(t)] => self.split(
                        |id| id.metatype == Metatype::P(*p) && id.j == j && v.is_prefix_of(&id.w) && id.u == *t,
                        false,
                    ),
                    [B(v), I(1), I(p), I(1), B(t), C(a)] => self.ground(player, *a, |id| {
                        id.metatype == Metatype::P(*p) && id.j == j && v.is_prefix_of(&id.w) && t.is_prefix_of(&id.u)
                    }),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }

    fn targets(&self, f: impl Fn(&MoleculeId) -> bool) -> Vec<MoleculeId> {
        self.live.keys().filter(|id| f(id)).cloned().collect()
    }

    fn ground(&mut self, player: Player, a: u64, f: impl Fn(&MoleculeId) -> bool) -> Result<(), String> {
        let ids = self.targets(f);
        if ids.is_empty() {
            return Err("grounding move addresses no molecule".into());
        }
        for id in ids {
            let gender = id.metatype.gender();
            if gender.grounder() != player {
                return Err(format!("{player} cannot ground {id}"));
            }
            let m = self.live.get_mut(&id).unwrap();
            let Content::Exists(atom) = m.content else {
                return Err(format!("{id} is not ready for grounding"));
            };
            let idx = self.supers.len();
            self.supers.push(SupermoleculeRecord {
                id: id.clone(),
                atom,
                constant: a,
                grounding_time: self.time,
                gender,
            });
            m.content = Content::Ground(atom, a);
            m.essence = Some(idx);
            self.essence_of.insert(id, idx);
        }
        self.used.insert(a);
        Ok(())
    }

    fn dedisj(&mut self, d: u32, f: impl Fn(&MoleculeId) -> bool) -> Result<(), String> {
        let ids = self.targets(f);
        if ids.is_empty() {
            return Err("choice move addresses no molecule".into());
        }
        for id in ids {
            let m = self.live.get_mut(&id).unwrap();
            let Content::Disj(z, t) = m.content else {
                return Err(format!("{id} is already resolved"));
            };
            m.content = Content::Exists(if d == 1 { z } else { t });
        }
        Ok(())
    }

    fn split(&mut self, f: impl Fn(&MoleculeId) -> bool, outer: bool) -> Result<(), String> {
        let ids = self.targets(f);
        if ids.is_empty() {
            return Err("split addresses no leaf".into());
        }
        for id in ids {
            let m = self.live.remove(&id).unwrap();
            for bit in [false, true] {
                let child = if outer { id.with_w(id.w.child(bit)) } else { id.with_u(id.u.child(bit)) };
                if let Some(e) = m.essence {
                    self.essence_of.insert(child.clone(), e);
                }
                self.live.insert(child, m.clone());
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "live": self.live.iter().map(|(id, m)| json!({
                "id": id.to_string(),
                "content": m.content.to_string(),
                "essence": m.essence,
            })).collect::<Vec<_>>(),
            "supermolecules": self.supers.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// The move grounding molecule `id` with constant `a`.
pub fn grounding_move(k: usize, id: &MoleculeId, a: u64) -> Move {
    address(k, id, Seg::Constant(a))
}

/// The move resolving `[Z|T]` molecule `id` to its `d`-th component.
pub fn dedisj_move(k: usize, id: &MoleculeId, d: u32) -> Move {
    address(k, id, Seg::Index(d))
}

fn address(k: usize, id: &MoleculeId, last: Seg) -> Move {
    use Seg::{Bits as B, Index as I};
    let (j, w) = (id.j, B(id.w.clone()));
    let kj = k as u32 + j;
    Move(match id.metatype {
        Metatype::W => vec![I(2), last],
        Metatype::X => vec![I(1), I(j), w, I(1), I(1), last],
        Metatype::Y => vec![I(1), I(j), w, I(1), I(2), last],
        Metatype::ZT => vec![I(1), I(j), w, I(2), last],
        Metatype::R => vec![I(1), I(kj), w, I(2), last],
        Metatype::Q(p) => vec![I(1), I(kj), w, I(1), I(p), I(2), last],
        Metatype::P(p) => vec![I(1), I(kj), w, I(1), I(p), I(1), B(id.u.clone()), last],
    })
}

// ---------------------------------------------------------------------------
// Chains and bases

/// Chains beyond this many are not enumerated.
pub const CHAIN_LIMIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainAnalysis {
    /// Open chains as record indices, origin first.
    pub open_chains: Vec<Vec<usize>>,
    pub truncated: bool,
    /// `Base` per record.
    pub bases: Vec<BTreeSet<u32>>,
}

struct ChainGraph<'a> {
    m: &'a Molecules,
    succ: Vec<Vec<usize>>,
}

impl<'a> ChainGraph<'a> {
    fn new(m: &'a Molecules) -> Self {
        let recs = &m.supers;
        let succ = recs
            .iter()
            .enumerate()
            .map(|(s, rs)| match rs.gender {
                Gender::Negative => (0..recs.len())
                    .filter(|&t| recs[t].gender == Gender::Positive && recs[t].content() == rs.content())
                    .collect(),
                Gender::Positive => (0..recs.len())
                    .filter(|&t| {
                        let id = &recs[t].id;
                        let ess = |mt| m.essence(&MoleculeId::new(mt, id.j, id.w.clone())) == Some(s);
                        match id.metatype {
                            Metatype::ZT => ess(Metatype::X) || ess(Metatype::Y),
                            Metatype::R => (1..=m.n as u32).any(|p| ess(Metatype::Q(p))),
                            _ => false,
                        }
                    })
                    .collect(),
            })
            .collect();
        ChainGraph { m, succ }
    }

    fn origins(&self) -> Vec<usize> {
        (0..self.m.supers.len()).filter(|&i| matches!(self.m.supers[i].id.metatype, Metatype::P(_))).collect()
    }

    /// Whether `node` may appear in an open chain from `origin`.
    fn allowed(&self, origin: usize, node: usize) -> bool {
        let o = &self.m.supers[origin].id;
        let id = &self.m.supers[node].id;
        !(id.metatype == Metatype::Q(o.metatype.p()) && id.j == o.j)
    }

    fn reach(&self, origin: usize) -> Vec<bool> {
        let mut seen = vec![false; self.succ.len()];
        let mut queue = VecDeque::from([origin]);
        seen[origin] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &self.succ[x] {
                if !seen[y] && self.allowed(origin, y) {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Distance from each node to `target` along allowed nodes.
    fn dist_to(&self, origin: usize, target: usize) -> Vec<Option<usize>> {
        let mut pred = vec![Vec::new(); self.succ.len()];
        for (x, ys) in self.succ.iter().enumerate() {
            for &y in ys {
                pred[y].push(x);
            }
        }
        let mut dist = vec![None; self.succ.len()];
        if !self.allowed(origin, target) {
            return dist;
        }
        dist[target] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(y) = queue.pop_front() {
            for &x in &pred[y] {
                if dist[x].is_none() && self.allowed(origin, x) {
                    dist[x] = Some(dist[y].unwrap() + 1);
                    queue.push_back(x);
                }
            }
        }
        dist
    }
}

/// `Base` of every record: the `p` of each origin with an open chain reaching it.
pub fn bases(m: &Molecules) -> Vec<BTreeSet<u32>> {
    let g = ChainGraph::new(m);
    let mut out = vec![BTreeSet::new(); m.supers.len()];
    for o in g.origins() {
        let p = m.supers[o].id.metatype.p();
        for (i, r) in g.reach(o).into_iter().enumerate() {
            if r {
                out[i].insert(p);
            }
        }
    }
    out
}

/// Enumerates open simple chains (up to [`CHAIN_LIMIT`]) and computes bases.
pub fn chains_and_bases(m: &Molecules) -> ChainAnalysis {
    let g = ChainGraph::new(m);
    let mut open_chains = Vec::new();
    let mut truncated = false;
    fn dfs(g: &ChainGraph, origin: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, truncated: &mut bool) {
        if out.len() >= CHAIN_LIMIT {
            *truncated = true;
            return;
        }
        out.push(path.clone());
        let last = *path.last().unwrap();
        for &y in &g.succ[last] {
            if g.allowed(origin, y) && !path.contains(&y) {
                path.push(y);
                dfs(g, origin, path, out, truncated);
                path.pop();
            }
        }
    }
    for o in g.origins() {
        dfs(&g, o, &mut vec![o], &mut open_chains, &mut truncated);
    }
    ChainAnalysis { open_chains, truncated, bases: bases(m) }
}

/// The shortest open chain hitting the grounded `[W]`, least by record keys among those.
pub fn master_chain(m: &Molecules) -> Option<Vec<usize>> {
    let target = m.essence(&MoleculeId::w())?;
    let g = ChainGraph::new(m);
    let key = |i: usize| m.supers[i].key();
    let mut best: Option<(usize, usize, Vec<Option<usize>>)> = None;
    for o in g.origins() {
        let dist = g.dist_to(o, target);
        let Some(d) = dist[o] else { continue };
        let better = match &best {
            None => true,
            Some((bd, bo, _)) => d < *bd || (d == *bd && key(o) < key(*bo)),
        };
        if better {
            best = Some((d, o, dist));
        }
    }
    let (_, o, dist) = best?;
    let mut chain = vec![o];
    let mut cur = o;
    while cur != target {
        let want = dist[cur].unwrap() - 1;
        cur = g.succ[cur]
            .iter()
            .copied()
            .filter(|&y| dist[y] == Some(want))
            .min_by_key(|&y| key(y))
            .expect("distance decreases along some edge");
        chain.push(cur);
    }
    Some(chain)
}

// ---------------------------------------------------------------------------
// Counterinterpretations

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Short,
    Long,
}

/// All ground atoms true except the listed ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterInterp {
    pub falsified: BTreeSet<(Atom, u64)>,
    pub provenance: Branch,
}

impl CounterInterp {
    pub fn truth(&self, a: Atom, c: u64) -> bool {
        !self.falsified.contains(&(a, c))
    }

    pub fn table(&self) -> Table {
        let f = self.falsified.clone();
        Arc::new(move |a, c| !f.contains(&(a, c)))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "default": true,
            "provenance": format!("{:?}", self.provenance).to_lowercase(),
            "false": self.falsified.iter().map(|(a, c)| format!("{a}({c})")).collect::<Vec<_>>(),
        })
    }
}

/// Falsifies the contents of positive live molecules that are grounded but not matchingly.
pub fn short_counterinterp(m: &Molecules) -> CounterInterp {
    let falsified = m
        .live
        .iter()
        .filter(|(id, _)| id.metatype.gender() == Gender::Positive && !m.matchingly_grounded(id))
        .filter_map(|(_, l)| match l.content {
            Content::Ground(a, c) => Some((a, c)),
            _ => None,
        })
        .collect();
    CounterInterp { falsified, provenance: Branch::Short }
}

/// Falsifies the contents along a chain.
pub fn long_counterinterp(m: &Molecules, chain: &[usize]) -> CounterInterp {
    CounterInterp { falsified: chain.iter().map(|&i| m.supers[i].content()).collect(), provenance: Branch::Long }
}

pub fn all_true() -> Table {
    Arc::new(|_, _| true)
}

/// The winner of `run` in the elementary game under `ci`.
pub fn verify_loss(f32: &ElemFormula, ci: &CounterInterp, run: &[LabMove]) -> Result<Player, IllegalRun> {
    winner(&f32.game(&ci.table()), run)
}

/// Counterinterpretations of several sessions, indexed by adversary number `1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedInterp {
    pub slices: Vec<(String, CounterInterp)>,
}

impl MergedInterp {
    /// Truth of `A(a, c)`; indices outside the registry read as true.
    pub fn truth(&self, atom: Atom, a: u64, c: usize) -> bool {
        match c.checked_sub(1).and_then(|i| self.slices.get(i)) {
            Some((_, ci)) => ci.truth(atom, a),
            None => true,
        }
    }

    /// The one-argument table at adversary index `c`.
    pub fn slice(&self, c: usize) -> Table {
        let me = self.clone();
        Arc::new(move |atom, a| me.truth(atom, a, c))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "default": true,
            "slices": self.slices.iter().enumerate().map(|(i, (id, ci))| json!({
                "index": i + 1,
                "adversary": id,
                "interpretation": ci.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn merge_counterinterps(registry: &[(String, CounterInterp)]) -> MergedInterp {
    MergedInterp { slices: registry.to_vec() }
}

// ---------------------------------------------------------------------------
// The counterstrategy

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    First,
    Check,
    Routine2,
    Grant,
    ThirdDedisj,
    ThirdGround,
    Loop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Action {
    Ground(MoleculeId),
    Dedisj(MoleculeId, u32),
}

/// Bottom's machine for the elementary game built from a countermodel.
#[derive(Clone, Debug)]
pub struct Counterstrategy {
    model: KripkeModel,
    pub ledger: Molecules,
    phase: Phase,
    actions: VecDeque<Action>,
    pub run: Run,
    pub second_iterations: usize,
    pub permissions: usize,
    /// Run length when the third stage was entered.
    pub third_at: Option<usize>,
    pub own_constants: Vec<u64>,
    /// Every own move addressed a live leaf.
    pub patient: bool,
    atoms: (Vec<[Atom; 4]>, Vec<[Atom; 3]>),
}

impl Counterstrategy {
    pub fn new(s: &StandardSequent, model: KripkeModel) -> Self {
        Counterstrategy {
            ledger: Molecules::new(s, model.n),
            model,
            phase: Phase::First,
            actions: VecDeque::new(),
            run: Vec::new(),
            second_iterations: 0,
            permissions: 0,
            third_at: None,
            own_constants: Vec::new(),
            patient: true,
            atoms: (s.first.clone(), s.second.clone()),
        }
    }

    pub fn stage_name(&self) -> &'static str {
        match self.phase {
            Phase::First => "first",
            Phase::Check | Phase::Routine2 | Phase::Grant => "second",
            _ => "third",
        }
    }

    fn all_worlds(&self) -> u64 {
        (1..=self.model.n).fold(0, |m, p| m | self.model.accessible(p))
    }

    fn routine1(&self) -> Vec<Action> {
        let l = &self.ledger;
        let bases = bases(l);
        let mut out = Vec::new();
        for j in 1..=l.k as u32 {
            for x in l.leaves(Metatype::X, j) {
                let y = x.clone().with_metatype(Metatype::Y);
                let zt = x.clone().with_metatype(Metatype::ZT);
                if !(l.matchingly_grounded(&x) && l.matchingly_grounded(&y)) {
                    continue;
                }
                if !matches!(l.live.get(&zt).map(|m| m.content), Some(Content::Disj(..))) {
                    continue;
                }
                let mut base = bases[l.essence(&x).unwrap()].clone();
                base.extend(&bases[l.essence(&y).unwrap()]);
                let mask = base.iter().fold(self.all_worlds(), |m, &q| m & self.model.accessible(q as usize));
                let z = Formula::Atom(self.atoms.0[j as usize - 1][2]);
                let d = if self.model.eval(&z) & mask == mask { 1 } else { 2 };
                out.push(Action::Dedisj(zt.clone(), d));
                out.push(Action::Ground(zt));
            }
        }
        out
    }

    fn routine2(&self) -> Vec<Action> {
        let l = &self.ledger;
        let mut out = Vec::new();
        for j in 1..=l.k as u32 {
            for r in l.leaves(Metatype::R, j) {
                let ready = (1..=l.n as u32).all(|p| l.matchingly_grounded(&r.clone().with_metatype(Metatype::Q(p))));
                if ready && matches!(l.live[&r].content, Content::Exists(_)) {
                    out.push(Action::Ground(r));
                }
            }
        }
        out
    }

    /// Whether another round of the second stage would move.
    pub fn at_fixpoint(&self) -> bool {
        !self.ledger.matchingly_grounded(&MoleculeId::w()) && self.routine1().is_empty() && self.routine2().is_empty()
    }

    fn realize(&mut self, a: Action) -> Option<Move> {
        let k = self.ledger.k;
        let (id, mv) = match a {
            Action::Ground(id) => {
                if !matches!(self.ledger.live.get(&id).map(|m| m.content), Some(Content::Exists(_))) {
                    self.patient &= self.ledger.live.contains_key(&id);
                    return None;
                }
                let c = self.ledger.fresh_constant();
                self.own_constants.push(c);
                let mv = grounding_move(k, &id, c);
                (id, mv)
            }
            Action::Dedisj(id, d) => {
                if !matches!(self.ledger.live.get(&id).map(|m| m.content), Some(Content::Disj(..))) {
                    self.patient &= self.ledger.live.contains_key(&id);
                    return None;
                }
                let mv = dedisj_move(k, &id, d);
                (id, mv)
            }
        };
        debug_assert!(self.ledger.live.contains_key(&id));
        self.ledger.apply(Player::Bottom, &mv).expect("own moves are well formed");
        self.run.push(LabMove::new(Player::Bottom, mv.clone()));
        Some(mv)
    }
}

impl MoleculeId {
    fn with_metatype(self, metatype: Metatype) -> Self {
        MoleculeId { metatype, ..self }
    }
}

impl Strategy for Counterstrategy {
    fn observe(&mut self, mv: &Move) {
        // Illegal adversary moves never reach here; the arena ends the session first.
        let _ = self.ledger.apply(Player::Top, mv);
        self.run.push(LabMove::new(Player::Top, mv.clone()));
    }

    fn step(&mut self) -> Option<Move> {
        loop {
            if let Some(a) = self.actions.pop_front() {
                if let Some(m) = self.realize(a) {
                    return Some(m);
                }
                continue;
            }
            match self.phase {
                Phase::First => {
                    let ps = self.ledger.live.keys().filter(|id| matches!(id.metatype, Metatype::P(_)));
                    let mut ps: Vec<MoleculeId> = ps.cloned().collect();
                    ps.sort_by_key(|id| (id.j, id.metatype.p(), id.w.clone(), id.u.clone()));
                    self.actions.extend(ps.into_iter().map(Action::Ground));
                    self.phase = Phase::Check;
                }
                Phase::Check => {
                    if self.ledger.matchingly_grounded(&MoleculeId::w()) {
                        self.third_at = Some(self.run.len());
                        self.phase = Phase::ThirdDedisj;
                    } else {
                        self.second_iterations += 1;
                        let acts = self.routine1();
                        self.actions.extend(acts);
                        self.phase = Phase::Routine2;
                    }
                }
                Phase::Routine2 => {
                    let acts = self.routine2();
                    self.actions.extend(acts);
                    self.phase = Phase::Grant;
                }
                Phase::Grant => {
                    self.permissions += 1;
                    self.phase = Phase::Check;
                    return None;
                }
                Phase::ThirdDedisj => {
                    let zts = self
                        .ledger
                        .live
                        .iter()
                        .filter(|(id, m)| id.metatype == Metatype::ZT && matches!(m.content, Content::Disj(..)));
                    let acts: Vec<Action> = zts.map(|(id, _)| Action::Dedisj(id.clone(), 1)).collect();
                    self.actions.extend(acts);
                    self.phase = Phase::ThirdGround;
                }
                Phase::ThirdGround => {
                    let open = self.ledger.live.iter().filter(|(id, m)| {
                        matches!(id.metatype, Metatype::ZT | Metatype::R) && matches!(m.content, Content::Exists(_))
                    });
                    let acts: Vec<Action> = open.map(|(id, _)| Action::Ground(id.clone())).collect();
                    self.actions.extend(acts);
                    self.phase = Phase::Loop;
                }
                Phase::Loop => return None,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Adversaries

/// Top player grounding positive molecules with contents Bottom has already used,
/// `[W]` first.
#[derive(Clone, Debug)]
pub struct Matcher {
    ledger: Molecules,
}

impl Matcher {
    pub fn new(s: &StandardSequent, n: usize) -> Self {
        Matcher { ledger: Molecules::new(s, n) }
    }
}

impl Strategy for Matcher {
    fn observe(&mut self, mv: &Move) {
        let _ = self.ledger.apply(Player::Bottom, mv);
    }

    fn step(&mut self) -> Option<Move> {
        let l = &self.ledger;
        let negative: BTreeSet<(Atom, u64)> =
            l.supers.iter().filter(|r| r.gender == Gender::Negative).map(|r| r.content()).collect();
        let pick = |id: &MoleculeId| -> Option<u64> {
            let Content::Exists(a) = l.live[id].content else { return None };
            negative.iter().find(|(b, _)| *b == a).map(|(_, c)| *c)
        };
        let w = MoleculeId::w();
        let choice = std::iter::once(w.clone())
            .chain(l.live.keys().filter(|id| id.metatype.gender() == Gender::Positive && **id != w).cloned())
            .find_map(|id| pick(&id).map(|c| (id, c)));
        let (id, c) = choice?;
        let mv = grounding_move(l.k, &id, c);
        self.ledger.apply(Player::Top, &mv).expect("own moves are well formed");
        Some(mv)
    }
}

/// The adversaries a pipeline run plays against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adversary {
    Passive,
    Random(u64),
    WGrounder,
}

impl Adversary {
    pub fn id(&self) -> String {
        match self {
            Adversary::Passive => "passive".into(),
            Adversary::Random(s) => format!("random-{s}"),
            Adversary::WGrounder => "w-grounder".into(),
        }
    }

    pub fn build(&self, s: &StandardSequent, n: usize, cfg: &SessionConfig) -> BoxStrategy {
        match self {
            Adversary::Passive => Box::new(Idle),
            Adversary::Random(seed) => {
                let g = elementary_formula(s, n).game(&all_true());
                Box::new(
                    RandomAdversary::new(g, *seed, cfg.random_moves).with_player(Player::Top).with_bounds(cfg.bounds),
                )
            }
            Adversary::WGrounder => Box::new(Matcher::new(s, n)),
        }
    }
}

/// Passive, five seeded random players and the matcher.
pub fn adversary_suite(seeds: &[u64]) -> Vec<Adversary> {
    let mut v = vec![Adversary::Passive];
    v.extend(seeds.iter().map(|&s| Adversary::Random(s)));
    v.push(Adversary::WGrounder);
    v
}

// ---------------------------------------------------------------------------
// Sessions

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub budget: usize,
    /// Move cap of random adversaries.
    pub random_moves: usize,
    pub bounds: MoveBounds,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { budget: DEFAULT_BUDGET, random_moves: 12, bounds: MoveBounds::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SessionInvariants {
    /// Bottom's constants are pairwise distinct and so are negative contents.
    pub distinct_constants: bool,
    /// Every grounded live molecule carries its essence's content.
    pub descent: bool,
    /// Permissions granted at least once per second-stage iteration.
    pub fairness: bool,
    /// Bottom only addressed live leaves.
    pub patient: bool,
    /// Long branches only.
    pub master_chain: Option<bool>,
    /// Short branches only: the second stage has nothing left to do.
    pub fixpoint: Option<bool>,
}

impl SessionInvariants {
    pub fn all(&self) -> bool {
        self.distinct_constants
            && self.descent
            && self.fairness
            && self.patient
            && self.master_chain != Some(false)
            && self.fixpoint != Some(false)
    }
}

#[derive(Clone, Debug)]
pub struct SessionReport {
    pub adversary: String,
    pub arena: ArenaResult,
    /// `None` when the budget ran out before quiescence.
    pub branch: Option<Branch>,
    pub ledger: Molecules,
    pub second_iterations: usize,
    pub permissions: usize,
    pub master_chain: Option<Vec<usize>>,
    pub counterinterp: Option<CounterInterp>,
    pub verdict: Option<Player>,
    pub invariants: SessionInvariants,
}

impl SessionReport {
    pub fn undetermined(&self) -> bool {
        self.branch.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "adversary": self.adversary,
            "branch": self.branch.map(|b| format!("{b:?}").to_lowercase()).unwrap_or_else(|| "undetermined".into()),
            "quiesced": self.arena.quiesced,
            "steps": self.arena.steps,
            "transcript": self.arena.run.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "illegal": self.arena.illegal.as_ref().map(|m| m.to_string()),
            "second_iterations": self.second_iterations,
            "permissions": self.permissions,
            "molecules": self.ledger.to_json(),
            "master_chain": self.master_chain,
            "counterinterp": self.counterinterp.as_ref().map(|c| c.to_json()),
            "verdict": self.verdict.map(|p| p.to_string()),
            "invariants": serde_json::to_value(&self.invariants).unwrap(),
        })
    }
}

/// Plays the counterstrategy for `model` against `adversary` and evaluates the outcome.
pub fn counterstrategy_session(
    model: &KripkeModel,
    s: &StandardSequent,
    adversary: &mut dyn Strategy,
    adversary_id: &str,
    budget: usize,
) -> SessionReport {
    let f32 = elementary_formula(s, model.n);
    let game = f32.game(&all_true());
    let mut e = Counterstrategy::new(s, model.clone());
    let arena = arena_run(adversary, &mut e, &game, budget);
    let determined = arena.quiesced || arena.illegal.is_some();
    let branch = match (determined, e.third_at) {
        (false, _) => None,
        (true, Some(_)) => Some(Branch::Long),
        (true, None) => Some(Branch::Short),
    };
    let l = &e.ledger;
    let master = match branch {
        Some(Branch::Long) => master_chain(l),
        _ => None,
    };
    let counterinterp = match branch {
        Some(Branch::Short) => Some(short_counterinterp(l)),
        Some(Branch::Long) => master.as_ref().map(|c| long_counterinterp(l, c)),
        None => None,
    };
    let verdict = match (&arena.illegal, &counterinterp) {
        (Some(lm), _) => Some(lm.player.flip()),
        (None, Some(ci)) => verify_loss(&f32, ci, &arena.run).ok(),
        (None, None) => None,
    };
    let own: BTreeSet<u64> = e.own_constants.iter().copied().collect();
    let negatives: Vec<(Atom, u64)> =
        l.supers.iter().filter(|r| r.gender == Gender::Negative).map(|r| r.content()).collect();
    let negative_set: BTreeSet<(Atom, u64)> = negatives.iter().copied().collect();
    let descent = l.live.iter().all(|(_, m)| match (m.content, m.essence) {
        (Content::Ground(a, c), Some(i)) => l.supers[i].content() == (a, c),
        (Content::Ground(..), None) => false,
        (_, e) => e.is_none(),
    });
    let invariants = SessionInvariants {
        distinct_constants: own.len() == e.own_constants.len() && negative_set.len() == negatives.len(),
        descent,
        fairness: e.permissions >= e.second_iterations,
        patient: e.patient,
        master_chain: (branch == Some(Branch::Long)).then(|| master.is_some()),
        fixpoint: (branch == Some(Branch::Short) && arena.illegal.is_none()).then(|| e.at_fixpoint()),
    };
    SessionReport {
        adversary: adversary_id.to_string(),
        arena,
        branch,
        ledger: e.ledger.clone(),
        second_iterations: e.second_iterations,
        permissions: e.permissions,
        master_chain: master,
        counterinterp,
        verdict,
        invariants,
    }
}

// ---------------------------------------------------------------------------
// Lemma checks

fn conj(items: Vec<Formula>) -> Option<Formula> {
    (!items.is_empty()).then(|| Formula::cand_nested(items))
}

/// `Int |- K, G => W` for the standardization of `k`.
pub fn standard_entailed(k: &Formula) -> Result<bool, CompletenessError> {
    let (s, _) = standardize(k)?;
    let mut seq = s.to_sequent();
    seq.antecedent.insert(0, k.clone());
    Ok(decide_int(&seq)?)
}

/// If `Int |/- K` then `Int |/- G => W`. Vacuously true for provable `k`.
pub fn standard_unprovable(k: &Formula) -> Result<bool, CompletenessError> {
    if decide_int(&IntSequent::goal(k.clone()))? {
        return Ok(true);
    }
    let (s, _) = standardize(k)?;
    Ok(!decide_int(&s.to_sequent())?)
}

/// `Int |- G => (H o- H^K) & (H^K o- H) & ...` over the subformulas of `k`, which
/// makes every subformula equivalent to its name in every model of `G`.
pub fn names_provably_equivalent(k: &Formula) -> Result<bool, CompletenessError> {
    let (s, names) = standardize(k)?;
    let eqs: Vec<Formula> = names
        .names
        .iter()
        .map(|(h, a)| {
            Formula::cand(Formula::wimp(h.clone(), Formula::Atom(*a)), Formula::wimp(Formula::Atom(*a), h.clone()))
        })
        .collect();
    let Some(goal) = conj(eqs) else { return Ok(true) };
    Ok(decide_int(&IntSequent::new(s.antecedent(), goal))?)
}

/// Direct check over every model with at most `max_size` worlds forcing the
/// antecedent everywhere: each subformula is equivalent to its name.
/// Returns the number of such models, or `None` on a violation.
pub fn names_equivalent_on_models(k: &Formula, max_size: usize) -> Result<Option<usize>, CompletenessError> {
    let (s, names) = standardize(k)?;
    let base: Vec<Atom> = k.atoms().into_iter().collect();
    let mut named: Vec<Atom> = names.names.iter().map(|(_, a)| *a).collect();
    named.extend(names.padding);
    let ante = s.antecedent();
    let mut count = 0;
    for n in 1..=max_size {
        for parent in frames(n) {
            let model = KripkeModel { n, parent: parent.clone(), forcing: BTreeSet::new() };
            let ups = upsets(&model);
            let all = (1u64 << n) - 1;
            let mut masks: BTreeMap<Atom, u64> = BTreeMap::new();
            let mut ok = true;
            search(&model, &ups, &base, &named, &ante, all, &mut masks, &mut |masks| {
                count += 1;
                let m = with_masks(&model, masks);
                ok &= names.names.iter().all(|(h, a)| m.eval(h) == masks[a]);
            });
            if !ok {
                return Ok(None);
            }
        }
    }
    Ok(Some(count))
}

#[allow(clippy::too_many_arguments)]
fn search(
    model: &KripkeModel,
    ups: &[u64],
    base: &[Atom],
    named: &[Atom],
    ante: &[Formula],
    all: u64,
    masks: &mut BTreeMap<Atom, u64>,
    leaf: &mut dyn FnMut(&BTreeMap<Atom, u64>),
) {
    let depth = masks.len();
    let order = || base.iter().chain(named);
    let Some(&next) = order().nth(depth) else {
        leaf(masks);
        return;
    };
    for &u in ups {
        masks.insert(next, u);
        // Prune on antecedent formulas whose atoms are all assigned.
        let m = with_masks(model, masks);
        let fine = ante
            .iter()
            .filter(|f| f.atoms().contains(&next) && f.atoms().iter().all(|a| masks.contains_key(a)))
            .all(|f| m.eval(f) == all);
        if fine {
            search(model, ups, base, named, ante, all, masks, leaf);
        }
        masks.remove(&next);
    }
}

fn with_masks(model: &KripkeModel, masks: &BTreeMap<Atom, u64>) -> KripkeModel {
    let forcing = masks
        .iter()
        .flat_map(|(a, m)| (1..=model.n).filter(move |w| m >> (w - 1) & 1 == 1).map(move |w| (w, *a)))
        .collect();
    KripkeModel { n: model.n, parent: model.parent.clone(), forcing }
}

/// Parent vectors of all tree frames on `n` worlds with parents numbered below children.
fn frames(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0]];
    for w in 2..=n {
        out = out.into_iter().flat_map(|p| (1..w).map(move |q| [p.clone(), vec![q]].concat())).collect();
    }
    out
}

/// Upward-closed world sets of a frame.
fn upsets(model: &KripkeModel) -> Vec<u64> {
    (0..1u64 << model.n)
        .filter(|&m| (1..=model.n).all(|p| m >> (p - 1) & 1 == 0 || model.accessible(p) & !m == 0))
        .collect()
}

/// Extends a countermodel of `=> F` to the names of the standardization: each
/// name is forced where its subformula is and the padding atom everywhere.
pub fn extend_model(model: &KripkeModel, names: &NamingMap) -> KripkeModel {
    let mut forcing = model.forcing.clone();
    for (h, a) in &names.names {
        let mask = model.eval(h);
        forcing.extend((1..=model.n).filter(|w| mask >> (w - 1) & 1 == 1).map(|w| (w, *a)));
    }
    if let Some(v) = names.padding {
        forcing.extend((1..=model.n).map(|w| (w, v)));
    }
    KripkeModel { n: model.n, parent: model.parent.clone(), forcing }
}

// ---------------------------------------------------------------------------
// Pipeline

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Largest countermodel searched for.
    pub model_bound: usize,
    pub seeds: Vec<u64>,
    pub session: SessionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { model_bound: 8, seeds: vec![1, 2, 3, 4, 5], session: SessionConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineBundle {
    pub k: Formula,
    pub dedollarized: Formula,
    pub standard: StandardSequent,
    pub names: NamingMap,
    pub standard_entailed: bool,
    pub model: KripkeModel,
    pub n: usize,
    pub desequentized: Formula,
    pub elementary: ElemFormula,
    pub sessions: Vec<SessionReport>,
    pub merged: MergedInterp,
}

impl PipelineBundle {
    /// Every session determined, lost by Top, with all invariants intact.
    pub fn refuted(&self) -> bool {
        self.standard_entailed
            && self
                .sessions
                .iter()
                .all(|s| !s.undetermined() && s.verdict == Some(Player::Bottom) && s.invariants.all())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "formula": self.k.to_string(),
            "dedollarized": self.dedollarized.to_string(),
            "standard": self.standard.to_json(),
            "naming": self.names.to_json(),
            "standard_entailed": self.standard_entailed,
            "countermodel": self.model.to_json(),
            "n": self.n,
            "desequentized": self.desequentized.to_string(),
            "elementary": self.elementary.to_string(),
            "sessions": self.sessions.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            "merged": self.merged.to_json(),
            "refuted": self.refuted(),
        })
    }
}

/// Builds the elementary game for an unprovable `k` and refutes it against the adversary suite.
pub fn pipeline(k: &Formula, cfg: &PipelineConfig) -> Result<PipelineBundle, CompletenessError> {
    if !k.is_int() {
        return Err(CompletenessError::NotInt(k.to_string()));
    }
    if decide_int(&IntSequent::goal(k.clone()))? {
        return Err(CompletenessError::Provable(k.to_string()));
    }
    let f = dedollarize(k);
    let (standard, names) = standardize(&f)?;
    if !is_standard(&standard.to_sequent()) {
        return Err(CompletenessError::Check("standardization is not standard".into()));
    }
    let standard_entailed = standard_entailed(&f)?;
    let base = countermodel(&IntSequent::goal(f.clone()), cfg.model_bound)
        .ok_or(CompletenessError::NoCountermodel(cfg.model_bound))?;
    let model = extend_model(&base, &names);
    let seq = standard.to_sequent();
    let all = (1u64 << model.n) - 1;
    if !seq.antecedent.iter().all(|g| model.eval(g) == all) || model.forces(1, &seq.succedent) {
        return Err(CompletenessError::Check("extended model does not refute the standard sequent".into()));
    }
    let n = model.n;
    let desequentized = desequentize(&standard, n);
    let elementary = elementary_formula(&standard, n);
    let sessions: Vec<SessionReport> = adversary_suite(&cfg.seeds)
        .iter()
        .map(|adv| {
            let mut a = adv.build(&standard, n, &cfg.session);
            counterstrategy_session(&model, &standard, a.as_mut(), &adv.id(), cfg.session.budget)
        })
        .collect();
    let registry: Vec<(String, CounterInterp)> =
        sessions.iter().filter_map(|s| s.counterinterp.clone().map(|c| (s.adversary.clone(), c))).collect();
    let merged = merge_counterinterps(&registry);
    Ok(PipelineBundle {
        k: k.clone(),
        dedollarized: f,
        standard,
        names,
        standard_entailed,
        model,
        n,
        desequentized,
        elementary,
        sessions,
        merged,
    })
}
