//! Static games built from the CL operators, runs, legality and winners.
//!
//! A move is a path of segments. Parallel components are addressed by a
//! 1-based index, recurrence threads by a bitstring tree node, and choice
//! moves are a single index or constant; moves inside the chosen component
//! carry no extra prefix.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Atom, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    Top,
    Bottom,
}

impl Player {
    pub fn flip(self) -> Player {
        match self {
            Player::Top => Player::Bottom,
            Player::Bottom => Player::Top,
        }
    }
    pub fn tag(self) -> char {
        match self {
            Player::Top => 'T',
            Player::Bottom => 'B',
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Top => "Top",
            Player::Bottom => "Bottom",
        })
    }
}

/// Finite bitstring; the empty one prints as `e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Bits(pub Vec<bool>);

impl Bits {
    pub fn empty() -> Bits {
        Bits(vec![])
    }
    pub fn child(&self, b: bool) -> Bits {
        let mut v = self.0.clone();
        v.push(b);
        Bits(v)
    }
    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn concat(&self, other: &Bits) -> Bits {
        Bits([self.0.clone(), other.0.clone()].concat())
    }
    pub fn prepend(&self, b: bool) -> Bits {
        let mut v = vec![b];
        v.extend_from_slice(&self.0);
        Bits(v)
    }
    /// Suffix after `prefix`, which must be a prefix of `self`.
    pub fn strip(&self, prefix: &Bits) -> Bits {
        Bits(self.0[prefix.0.len()..].to_vec())
    }
}

/// Length first, then binary order.
impl Ord for Bits {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}
impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = MoveError;
    fn from_str(s: &str) -> Result<Self, MoveError> {
        if s == "e" {
            return Ok(Bits::empty());
        }
        if s.is_empty() || !s.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(MoveError(format!("bad bitstring {s:?}")));
        }
        Ok(Bits(s.bytes().map(|c| c == b'1').collect()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Seg {
    Index(u32),
    Bits(Bits),
    Split(Bits),
    Constant(u64),
}

impl fmt::Display for Seg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seg::Index(i) => write!(f, "{i}"),
            Seg::Bits(w) => write!(f, "{w}"),
            Seg::Split(w) => write!(f, "{w}:"),
            Seg::Constant(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Move(pub Vec<Seg>);

impl Move {
    pub fn new(segs: Vec<Seg>) -> Move {
        Move(segs)
    }
    pub fn segs(&self) -> &[Seg] {
        &self.0
    }
    pub fn prefixed(&self, prefix: &[Seg]) -> Move {
        Move([prefix, &self.0[..]].concat())
    }
    /// The segments after `prefix`, borrowed.
    pub fn rest(&self, prefix: &[Seg]) -> Option<&[Seg]> {
        self.0.strip_prefix(prefix)
    }
    pub fn strip(&self, prefix: &[Seg]) -> Option<Move> {
        self.0.starts_with(prefix).then(|| Move(self.0[prefix.len()..].to_vec()))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabMove {
    pub player: Player,
    pub mv: Move,
}

impl LabMove {
    pub fn new(player: Player, mv: Move) -> Self {
        LabMove { player, mv }
    }
}

impl fmt::Display for LabMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.player.tag(), self.mv)
    }
}

pub type Run = Vec<LabMove>;

pub fn flip_run(run: &[LabMove]) -> Run {
    run.iter().map(|l| LabMove::new(l.player.flip(), l.mv.clone())).collect()
}

/// One `T:<move>` / `B:<move>` line per labeled move.
pub fn transcript(run: &[LabMove]) -> String {
    let mut s = String::new();
    for l in run {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct MoveError(pub String);

pub type G = Arc<Game>;

/// The components a choice operator ranges over.
#[derive(Clone)]
pub enum Family {
    /// Indices `1..=n`.
    List(Vec<G>),
    /// Constants `1, 2, ...`.
    Constants(Arc<dyn Fn(u64) -> G + Send + Sync>),
    /// Index 0 is the base, index `m >= 1` the m-th problem of the universe.
    Universal { base: G, universe: Arc<dyn Fn(u32) -> G + Send + Sync> },
}

impl Family {
    pub fn get(&self, s: &Seg) -> Option<G> {
        match (self, s) {
            (Family::List(v), Seg::Index(i)) if *i >= 1 && (*i as usize) <= v.len() => Some(v[*i as usize - 1].clone()),
            (Family::Constants(f), Seg::Constant(a)) if *a >= 1 => Some(f(*a)),
            (Family::Universal { base, .. }, Seg::Index(0)) => Some(base.clone()),
            (Family::Universal { universe, .. }, Seg::Index(m)) => Some(universe(*m)),
            _ => None,
        }
    }

    fn parse_seg(&self, s: &str) -> Result<Seg, MoveError> {
        let n: u64 = s.parse().map_err(|_| MoveError(format!("expected a number, found {s:?}")))?;
        Ok(match self {
            Family::Constants(_) => Seg::Constant(n),
            _ => Seg::Index(n as u32),
        })
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::List(v) => f.debug_list().entries(v).finish(),
            Family::Constants(_) => f.write_str("<constants>"),
            Family::Universal { base, .. } => write!(f, "<universal base={base:?}>"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Game {
    Elementary(bool),
    Neg(G),
    ParAnd(Vec<G>),
    ParOr(Vec<G>),
    ChoiceAnd(Family),
    ChoiceOr(Family),
    Bang(G),
    Cobang(G),
}

impl Game {
    pub fn elem(b: bool) -> G {
        Arc::new(Game::Elementary(b))
    }
    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: G) -> G {
        Arc::new(Game::Neg(a))
    }
    pub fn par_and(v: Vec<G>) -> G {
        Arc::new(Game::ParAnd(v))
    }
    pub fn par_or(v: Vec<G>) -> G {
        Arc::new(Game::ParOr(v))
    }
    pub fn choice_and(v: Vec<G>) -> G {
        Arc::new(Game::ChoiceAnd(Family::List(v)))
    }
    pub fn choice_or(v: Vec<G>) -> G {
        Arc::new(Game::ChoiceOr(Family::List(v)))
    }
    pub fn bang(a: G) -> G {
        Arc::new(Game::Bang(a))
    }
    pub fn cobang(a: G) -> G {
        Arc::new(Game::Cobang(a))
    }
    pub fn arrow(a: G, b: G) -> G {
        Game::par_or(vec![Game::neg(a), b])
    }
    pub fn weak_imp(a: G, b: G) -> G {
        Game::arrow(Game::bang(a), b)
    }
    pub fn universal(base: G, universe: Arc<dyn Fn(u32) -> G + Send + Sync>) -> G {
        Arc::new(Game::ChoiceAnd(Family::Universal { base, universe }))
    }
}

type View<'a> = (Player, &'a [Seg]);

fn views(run: &[LabMove]) -> Vec<View<'_>> {
    run.iter().map(|l| (l.player, l.mv.segs())).collect()
}

fn project<'a>(pos: &[View<'a>], head: &Seg) -> Vec<View<'a>> {
    pos.iter().filter(|(_, m)| m.first() == Some(head)).map(|(p, m)| (*p, &m[1..])).collect()
}

/// Current leaves of the thread tree of a recurrence position.
fn leaves(pos: &[View]) -> BTreeSet<Bits> {
    let mut t = BTreeSet::from([Bits::empty()]);
    for (_, m) in pos {
        if let [Seg::Split(w)] = m {
            if t.remove(w) {
                t.insert(w.child(false));
                t.insert(w.child(true));
            }
        }
    }
    t
}

/// Moves of a recurrence position that reach leaf `u`.
fn branch<'a>(pos: &[View<'a>], u: &Bits) -> Vec<View<'a>> {
    pos.iter()
        .filter_map(|(p, m)| match m.first() {
            Some(Seg::Bits(w)) if w.is_prefix_of(u) => Some((*p, &m[1..])),
            _ => None,
        })
        .collect()
}

/// Whether `who` may make `mv` at position `pos` (labels relative to `g`).
fn legal_at(g: &Game, pos: &[View], who: Player, mv: &[Seg]) -> bool {
    let Some(head) = mv.first() else { return false };
    match g {
        Game::Elementary(_) => false,
        Game::Neg(a) => {
            let flipped: Vec<View> = pos.iter().map(|(p, m)| (p.flip(), *m)).collect();
            legal_at(a, &flipped, who.flip(), mv)
        }
        Game::ParAnd(v) | Game::ParOr(v) => match head {
            Seg::Index(i) if *i >= 1 && (*i as usize) <= v.len() => {
                legal_at(&v[*i as usize - 1], &project(pos, head), who, &mv[1..])
            }
            _ => false,
        },
        Game::ChoiceAnd(fam) | Game::ChoiceOr(fam) => {
            let chooser = if matches!(g, Game::ChoiceOr(_)) { Player::Top } else { Player::Bottom };
            match pos.first() {
                None => mv.len() == 1 && who == chooser && fam.get(head).is_some(),
                Some((_, c)) => match fam.get(&c[0]) {
                    Some(sub) => legal_at(&sub, &pos[1..], who, mv),
                    None => false,
                },
            }
        }
        Game::Bang(a) | Game::Cobang(a) => {
            let replicator = if matches!(g, Game::Bang(_)) { Player::Bottom } else { Player::Top };
            let tree = leaves(pos);
            match head {
                Seg::Split(w) => mv.len() == 1 && who == replicator && tree.contains(w),
                Seg::Bits(w) => {
                    let below: Vec<&Bits> = tree.iter().filter(|l| w.is_prefix_of(l)).collect();
                    !below.is_empty() && below.iter().all(|u| legal_at(a, &branch(pos, u), who, &mv[1..]))
                }
                _ => false,
            }
        }
    }
}

fn winner_at(g: &Game, run: &[View]) -> Player {
    match g {
        Game::Elementary(b) => {
            if *b {
                Player::Top
            } else {
                Player::Bottom
            }
        }
        Game::Neg(a) => {
            let flipped: Vec<View> = run.iter().map(|(p, m)| (p.flip(), *m)).collect();
            winner_at(a, &flipped).flip()
        }
        Game::ParAnd(v) => {
            let all = v
                .iter()
                .enumerate()
                .all(|(i, c)| winner_at(c, &project(run, &Seg::Index(i as u32 + 1))) == Player::Top);
            if all {
                Player::Top
            } else {
                Player::Bottom
            }
        }
        Game::ParOr(v) => {
            let any = v
                .iter()
                .enumerate()
                .any(|(i, c)| winner_at(c, &project(run, &Seg::Index(i as u32 + 1))) == Player::Top);
            if any {
                Player::Top
            } else {
                Player::Bottom
            }
        }
        Game::ChoiceAnd(fam) | Game::ChoiceOr(fam) => match run.first() {
            None => {
                if matches!(g, Game::ChoiceOr(_)) {
                    Player::Bottom
                } else {
                    Player::Top
                }
            }
            Some((_, c)) => winner_at(&fam.get(&c[0]).expect("legal run"), &run[1..]),
        },
        Game::Bang(a) | Game::Cobang(a) => {
            let tree = leaves(run);
            let mut wins = tree.iter().map(|u| winner_at(a, &branch(run, u)) == Player::Top);
            let top = if matches!(g, Game::Bang(_)) { wins.all(|x| x) } else { wins.any(|x| x) };
            if top {
                Player::Top
            } else {
                Player::Bottom
            }
        }
    }
}

pub fn is_legal(g: &Game, pos: &[LabMove], lm: &LabMove) -> bool {
    legal_at(g, &views(pos), lm.player, lm.mv.segs())
}

/// Length of the longest legal prefix of `run`.
pub fn legal_prefix(g: &Game, run: &[LabMove]) -> usize {
    (0..run.len()).find(|&i| !is_legal(g, &run[..i], &run[i])).unwrap_or(run.len())
}

pub fn is_legal_run(g: &Game, run: &[LabMove]) -> bool {
    legal_prefix(g, run) == run.len()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("illegal run: move {index} ({labmove}) is not legal")]
pub struct IllegalRun {
    pub index: usize,
    pub labmove: String,
}

pub fn winner(g: &Game, run: &[LabMove]) -> Result<Player, IllegalRun> {
    let k = legal_prefix(g, run);
    if k < run.len() {
        return Err(IllegalRun { index: k, labmove: run[k].to_string() });
    }
    Ok(winner_at(g, &views(run)))
}

/// Winner of a run assumed legal.
pub fn winner_unchecked(g: &Game, run: &[LabMove]) -> Player {
    winner_at(g, &views(run))
}

/// Moves of `run` starting with `prefix`, with the prefix removed. Labels are kept.
pub fn project_run(run: &[LabMove], prefix: &[Seg]) -> Run {
    run.iter().filter_map(|l| l.mv.strip(prefix).map(|m| LabMove::new(l.player, m))).collect()
}

/// The moves of a recurrence run that reach leaf `w` (`Ψ^{≼w}`).
pub fn branch_project(run: &[LabMove], w: &Bits) -> Run {
    run.iter()
        .filter_map(|l| match l.mv.segs().first() {
            Some(Seg::Bits(v)) if v.is_prefix_of(w) => Some(LabMove::new(l.player, Move(l.mv.0[1..].to_vec()))),
            _ => None,
        })
        .collect()
}

/// Leaves of the thread tree of a recurrence run.
pub fn tree_leaves(run: &[LabMove]) -> BTreeSet<Bits> {
    leaves(&views(run))
}

/// Parses a dot-joined move against the game and position it is meant for.
pub fn parse_move(g: &Game, pos: &[LabMove], text: &str) -> Result<Move, MoveError> {
    let parts: Vec<&str> = text.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(MoveError(format!("malformed move {text:?}")));
    }
    let mut segs = Vec::new();
    parse_at(g, &views(pos), &parts, &mut segs)?;
    Ok(Move(segs))
}

fn parse_at(g: &Game, pos: &[View], parts: &[&str], out: &mut Vec<Seg>) -> Result<(), MoveError> {
    let Some((&head, rest)) = parts.split_first() else {
        return Err(MoveError("move ends inside a component".into()));
    };
    match g {
        Game::Elementary(_) => Err(MoveError("elementary games have no moves".into())),
        Game::Neg(a) => parse_at(a, pos, parts, out),
        Game::ParAnd(_) | Game::ParOr(_) => {
            let i: u32 = head.parse().map_err(|_| MoveError(format!("expected a component index, found {head:?}")))?;
            let seg = Seg::Index(i);
            let (Game::ParAnd(v) | Game::ParOr(v)) = g else { unreachable!() };
            let sub = v.get((i as usize).wrapping_sub(1)).ok_or_else(|| MoveError(format!("no component {i}")))?;
            let proj = project(pos, &seg);
            out.push(seg);
            parse_at(sub, &proj, rest, out)
        }
        Game::ChoiceAnd(fam) | Game::ChoiceOr(fam) => match pos.first() {
            None => {
                if !rest.is_empty() {
                    return Err(MoveError("a choice move is a single segment".into()));
                }
                out.push(fam.parse_seg(head)?);
                Ok(())
            }
            Some((_, c)) => {
                let sub = fam.get(&c[0]).ok_or_else(|| MoveError("bad position".into()))?;
                parse_at(&sub, &pos[1..], parts, out)
            }
        },
        Game::Bang(a) | Game::Cobang(a) => {
            if let Some(w) = head.strip_suffix(':') {
                if !rest.is_empty() {
                    return Err(MoveError("a split is the last segment".into()));
                }
                out.push(Seg::Split(w.parse()?));
                return Ok(());
            }
            let w: Bits = head.parse()?;
            let tree = leaves(pos);
            let u = tree
                .iter()
                .find(|l| w.is_prefix_of(l))
                .ok_or_else(|| MoveError(format!("{w} is not a node of the thread tree")))?
                .clone();
            out.push(Seg::Bits(w));
            parse_at(a, &branch(pos, &u), rest, out)
        }
    }
}

pub fn parse_transcript(g: &Game, text: &str) -> Result<Run, MoveError> {
    let mut run = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (tag, mv) = line.split_once(':').ok_or_else(|| MoveError(format!("bad transcript line {line:?}")))?;
        let player = match tag {
            "T" => Player::Top,
            "B" => Player::Bottom,
            _ => return Err(MoveError(format!("bad player tag {tag:?}"))),
        };
        let mv = parse_move(g, &run, mv)?;
        run.push(LabMove::new(player, mv));
    }
    Ok(run)
}

/// Bounds for candidate-move generation.
#[derive(Clone, Copy, Debug)]
pub struct MoveBounds {
    pub max_constant: u64,
    pub max_universe_index: u32,
    /// Deepest thread tree node a candidate may address.
    pub max_tree_depth: usize,
}

impl Default for MoveBounds {
    fn default() -> Self {
        MoveBounds { max_constant: 4, max_universe_index: 4, max_tree_depth: 3 }
    }
}

/// A finite sample of the legal moves of `who` at `pos`.
pub fn candidate_moves(g: &Game, pos: &[LabMove], who: Player, b: &MoveBounds) -> Vec<Move> {
    let mut out = Vec::new();
    cands(g, &views(pos), who, b, &mut Vec::new(), &mut out);
    out
}

fn cands(g: &Game, pos: &[View], who: Player, b: &MoveBounds, prefix: &mut Vec<Seg>, out: &mut Vec<Move>) {
    match g {
        Game::Elementary(_) => {}
        Game::Neg(a) => {
            let flipped: Vec<View> = pos.iter().map(|(p, m)| (p.flip(), *m)).collect();
            cands(a, &flipped, who.flip(), b, prefix, out)
        }
        Game::ParAnd(v) | Game::ParOr(v) => {
            for (i, c) in v.iter().enumerate() {
                let seg = Seg::Index(i as u32 + 1);
                let proj = project(pos, &seg);
                prefix.push(seg);
                cands(c, &proj, who, b, prefix, out);
                prefix.pop();
            }
        }
        Game::ChoiceAnd(fam) | Game::ChoiceOr(fam) => {
            let chooser = if matches!(g, Game::ChoiceOr(_)) { Player::Top } else { Player::Bottom };
            match pos.first() {
                None if who == chooser => {
                    let segs: Vec<Seg> = match fam {
                        Family::List(v) => (1..=v.len() as u32).map(Seg::Index).collect(),
                        Family::Constants(_) => (1..=b.max_constant).map(Seg::Constant).collect(),
                        Family::Universal { .. } => (0..=b.max_universe_index).map(Seg::Index).collect(),
                    };
                    for s in segs {
                        out.push(Move([prefix.clone(), vec![s]].concat()));
                    }
                }
                None => {}
                Some((_, c)) => {
                    if let Some(sub) = fam.get(&c[0]) {
                        cands(&sub, &pos[1..], who, b, prefix, out)
                    }
                }
            }
        }
        Game::Bang(a) | Game::Cobang(a) => {
            let replicator = if matches!(g, Game::Bang(_)) { Player::Bottom } else { Player::Top };
            let tree = leaves(pos);
            if who == replicator {
                for w in tree.iter().filter(|w| w.len() < b.max_tree_depth) {
                    out.push(Move([prefix.clone(), vec![Seg::Split(w.clone())]].concat()));
                }
            }
            let mut nodes: BTreeSet<Bits> = BTreeSet::new();
            for l in &tree {
                for k in 0..=l.len() {
                    nodes.insert(Bits(l.0[..k].to_vec()));
                }
            }
            for w in nodes {
                let below: Vec<&Bits> = tree.iter().filter(|l| w.is_prefix_of(l)).collect();
                let first = branch(pos, below[0]);
                let mut sub = Vec::new();
                cands(a, &first, who, b, &mut Vec::new(), &mut sub);
                for m in sub {
                    if below[1..].iter().all(|u| legal_at(a, &branch(pos, u), who, m.segs())) {
                        out.push(Move([prefix.clone(), vec![Seg::Bits(w.clone())], m.0].concat()));
                    }
                }
            }
        }
    }
}

/// An assignment of games to atoms. `$` is the universal problem whose base is
/// `base` and whose m-th problem is the game of `Pm` (or `rest` if unbound).
#[derive(Clone, Debug)]
pub struct Interpretation {
    pub atoms: BTreeMap<u32, G>,
    pub base: G,
    pub rest: G,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpretError {
    #[error("atom {0} is not interpreted")]
    Unbound(Atom),
    #[error("bad interpretation: {0}")]
    Format(String),
}

/// Reads a finite game written as `true`, `false`, `{"neg": g}` or one of
/// `{"cand": [..]}`, `{"cor": [..]}`, `{"pand": [..]}`, `{"por": [..]}`.
pub fn game_from_json(v: &serde_json::Value) -> Result<G, InterpretError> {
    use serde_json::Value;
    let bad = || InterpretError::Format(format!("unrecognized game {v}"));
    match v {
        Value::Bool(b) => Ok(Game::elem(*b)),
        Value::Object(m) if m.len() == 1 => {
            let (k, x) = m.iter().next().unwrap();
            if k == "neg" {
                return Ok(Game::neg(game_from_json(x)?));
            }
            let kids = x.as_array().ok_or_else(bad)?.iter().map(game_from_json).collect::<Result<Vec<_>, _>>()?;
            if kids.len() < 2 {
                return Err(bad());
            }
            match k.as_str() {
                "cand" => Ok(Game::choice_and(kids)),
                "cor" => Ok(Game::choice_or(kids)),
                "pand" => Ok(Game::par_and(kids)),
                "por" => Ok(Game::par_or(kids)),
                _ => Err(bad()),
            }
        }
        _ => Err(bad()),
    }
}

impl Interpretation {
    pub fn new(atoms: BTreeMap<u32, G>, base: G) -> Self {
        Interpretation { atoms, rest: base.clone(), base }
    }

    /// `{"atoms": {"P1": game, ...}, "base": game, "rest": game}`; `base` and
    /// `rest` default to `false`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self, InterpretError> {
        let field = |k: &str| v.get(k).map(game_from_json).transpose();
        let mut atoms = BTreeMap::new();
        if let Some(m) = v.get("atoms") {
            let m = m.as_object().ok_or_else(|| InterpretError::Format("atoms must be an object".into()))?;
            for (name, g) in m {
                let i = name
                    .strip_prefix('P')
                    .and_then(|d| d.parse::<u32>().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| InterpretError::Format(format!("bad atom name {name}")))?;
                atoms.insert(i, game_from_json(g)?);
            }
        }
        let base = field("base")?.unwrap_or_else(|| Game::elem(false));
        let rest = field("rest")?.unwrap_or_else(|| Game::elem(false));
        Ok(Interpretation { atoms, base, rest })
    }

    pub fn universe_game(&self, m: u32) -> G {
        self.atoms.get(&m).cloned().unwrap_or_else(|| self.rest.clone())
    }

    pub fn dollar(&self) -> G {
        let atoms = self.atoms.clone();
        let rest = self.rest.clone();
        Game::universal(self.base.clone(), Arc::new(move |m| atoms.get(&m).cloned().unwrap_or_else(|| rest.clone())))
    }

    pub fn interpret(&self, f: &Formula) -> Result<G, InterpretError> {
        let map = |v: &Vec<Formula>| v.iter().map(|g| self.interpret(g)).collect::<Result<Vec<_>, _>>();
        Ok(match f {
            Formula::Atom(Atom::Dollar) => self.dollar(),
            Formula::Atom(Atom::P(i)) => self.atoms.get(i).cloned().ok_or(InterpretError::Unbound(Atom::P(*i)))?,
            Formula::Neg(g) => Game::neg(self.interpret(g)?),
            Formula::ChoiceAnd(v) => Game::choice_and(map(v)?),
            Formula::ChoiceOr(v) => Game::choice_or(map(v)?),
            Formula::ParAnd(v) => Game::par_and(map(v)?),
            Formula::ParOr(v) => Game::par_or(map(v)?),
            Formula::Bang(g) => Game::bang(self.interpret(g)?),
            Formula::Cobang(g) => Game::cobang(self.interpret(g)?),
            Formula::WeakImp(a, b) => Game::weak_imp(self.interpret(a)?, self.interpret(b)?),
        })
    }

    /// Random finite games for `P1..=Pmax` and for the base.
    pub fn random<R: Rng>(rng: &mut R, max_atom: u32) -> Self {
        let atoms = (1..=max_atom).map(|i| (i, random_game(rng, 2))).collect();
        let base = random_game(rng, 2);
        let rest = random_game(rng, 2);
        Interpretation { atoms, base, rest }
    }
}

/// A random game of depth at most `depth` with at most three components per node.
pub fn random_game<R: Rng>(rng: &mut R, depth: u32) -> G {
    if depth == 0 || rng.gen_bool(0.3) {
        return Game::elem(rng.gen_bool(0.5));
    }
    let n = rng.gen_range(2..=3);
    let kids: Vec<G> = (0..n).map(|_| random_game(rng, depth - 1)).collect();
    match rng.gen_range(0..5) {
        0 => Game::choice_and(kids),
        1 => Game::choice_or(kids),
        2 => Game::par_and(kids),
        3 => Game::par_or(kids),
        _ => Game::neg(Game::choice_or(kids)),
    }
}

/// Formulas over elementary letters `Ȧ`, each atom standing for `⊔x Ȧ(x)`.
/// Unlike [`Formula`], lists may be unary.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElemFormula {
    /// `⊔x Ȧ(x)` for the letter with this atom's name.
    Exists(Atom),
    Neg(Box<ElemFormula>),
    ParAnd(Vec<ElemFormula>),
    ParOr(Vec<ElemFormula>),
    ChoiceOr(Vec<ElemFormula>),
    Bang(Box<ElemFormula>),
    Cobang(Box<ElemFormula>),
}

impl ElemFormula {
    pub fn arrow(a: ElemFormula, b: ElemFormula) -> ElemFormula {
        ElemFormula::ParOr(vec![ElemFormula::Neg(Box::new(a)), b])
    }

    pub fn bang(a: ElemFormula) -> ElemFormula {
        ElemFormula::Bang(Box::new(a))
    }

    /// Game under a truth table for ground atoms; missing entries take `default`.
    pub fn game(&self, table: &Arc<dyn Fn(Atom, u64) -> bool + Send + Sync>) -> G {
        let map = |v: &Vec<ElemFormula>| v.iter().map(|g| g.game(table)).collect::<Vec<_>>();
        match self {
            ElemFormula::Exists(a) => {
                let (a, t) = (*a, table.clone());
                Arc::new(Game::ChoiceOr(Family::Constants(Arc::new(move |c| Game::elem(t(a, c))))))
            }
            ElemFormula::Neg(g) => Game::neg(g.game(table)),
            ElemFormula::ParAnd(v) => Game::par_and(map(v)),
            ElemFormula::ParOr(v) => Game::par_or(map(v)),
            ElemFormula::ChoiceOr(v) => Game::choice_or(map(v)),
            ElemFormula::Bang(g) => Game::bang(g.game(table)),
            ElemFormula::Cobang(g) => Game::cobang(g.game(table)),
        }
    }

    /// Structural image in the AI language (each `⊔x Ȧ(x)` printed as its atom).
    pub fn skeleton(&self) -> Formula {
        let map = |v: &Vec<ElemFormula>| v.iter().map(|g| g.skeleton()).collect::<Vec<_>>();
        let list = |v: Vec<Formula>, f: fn(Vec<Formula>) -> Formula| {
            if v.len() == 1 {
                v.into_iter().next().unwrap()
            } else {
                f(v)
            }
        };
        match self {
            ElemFormula::Exists(a) => Formula::Atom(*a),
            ElemFormula::Neg(g) => Formula::neg(g.skeleton()),
            ElemFormula::ParAnd(v) => list(map(v), Formula::ParAnd),
            ElemFormula::ParOr(v) => list(map(v), Formula::ParOr),
            ElemFormula::ChoiceOr(v) => list(map(v), Formula::ChoiceOr),
            ElemFormula::Bang(g) => Formula::bang(g.skeleton()),
            ElemFormula::Cobang(g) => Formula::cobang(g.skeleton()),
        }
    }
}

impl fmt::Display for ElemFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, v: &Vec<ElemFormula>, sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, g) in v.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{g}")?;
            }
            f.write_str(")")
        };
        match self {
            ElemFormula::Exists(a) => write!(f, "Ex.{a}(x)"),
            ElemFormula::Neg(g) => write!(f, "~{g}"),
            ElemFormula::ParAnd(v) => list(f, v, " /\\ "),
            ElemFormula::ParOr(v) => list(f, v, " \\/ "),
            ElemFormula::ChoiceOr(v) => list(f, v, " | "),
            ElemFormula::Bang(g) => write!(f, "!{g}"),
            ElemFormula::Cobang(g) => write!(f, "?{g}"),
        }
    }
}
