//! Strategies as deterministic programs, the permission-scheduled arena,
//! copy-cat, and the combinators for modus ponens, recurrence lifting and
//! replacement.
//!
//! A strategy always plays Top in its own game. A strategy used as the
//! Bottom side of an arena is a strategy for the negated game; the move
//! addresses coincide because negation adds no prefix.

use std::collections::{BTreeMap, VecDeque};

use dyn_clone::DynClone;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::game_core::{candidate_moves, is_legal, winner, Bits, Game, LabMove, Move, MoveBounds, Player, Run, Seg, G};
use crate::syntax::Formula;

/// How a machine is scheduled. Only EPMs can drive an arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Discipline {
    Epm,
    Hpm,
}

/// A deterministic player. After `step` returns `None` it must keep
/// returning `None` until it observes a move; networks rely on this to
/// skip idle children.
pub trait Strategy: DynClone + Send {
    /// The adversary made `mv`.
    fn observe(&mut self, mv: &Move);
    /// One scheduling opportunity: a move, or `None` to pass.
    fn step(&mut self) -> Option<Move>;
    fn discipline(&self) -> Discipline {
        Discipline::Epm
    }
}

dyn_clone::clone_trait_object!(Strategy);

pub type BoxStrategy = Box<dyn Strategy>;

pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Top,
    Bottom,
    /// The budget ran out before quiescence.
    Undetermined,
}

impl Verdict {
    fn of(p: Player) -> Verdict {
        match p {
            Player::Top => Verdict::Top,
            Player::Bottom => Verdict::Bottom,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArenaResult {
    pub run: Run,
    pub steps: usize,
    pub quiesced: bool,
    pub permission_count: usize,
    pub verdict: Verdict,
    /// The illegal move that ended the session, if any.
    pub illegal: Option<LabMove>,
}

impl ArenaResult {
    pub fn to_json(&self) -> Value {
        json!({
            "run": self.run.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "steps": self.steps,
            "quiesced": self.quiesced,
            "permission_count": self.permission_count,
            "verdict": match self.verdict {
                Verdict::Top => "Top",
                Verdict::Bottom => "Bottom",
                Verdict::Undetermined => "undetermined",
            },
            "illegal": self.illegal.as_ref().map(|l| l.to_string()),
        })
    }
}

/// Runs `top` against the EPM `bottom` on `g`.
///
/// Bottom is stepped; each time it passes, top gets exactly one step. The
/// session ends when a bottom pass is followed by a top pass, when either
/// side moves illegally (the other side wins), or when `budget` steps run out.
pub fn arena_run(top: &mut dyn Strategy, bottom: &mut dyn Strategy, g: &Game, budget: usize) -> ArenaResult {
    let mut run: Run = Vec::new();
    let mut steps = 0;
    let mut permission_count = 0;
    let finish = |run: Run, steps, permission_count, quiesced, verdict, illegal| ArenaResult {
        run,
        steps,
        quiesced,
        permission_count,
        verdict,
        illegal,
    };
    while steps < budget {
        steps += 1;
        match bottom.step() {
            Some(m) => {
                let lm = LabMove::new(Player::Bottom, m);
                if !is_legal(g, &run, &lm) {
                    return finish(run, steps, permission_count, false, Verdict::Top, Some(lm));
                }
                top.observe(&lm.mv);
                run.push(lm);
            }
            None => {
                permission_count += 1;
                steps += 1;
                match top.step() {
                    Some(m) => {
                        let lm = LabMove::new(Player::Top, m);
                        if !is_legal(g, &run, &lm) {
                            return finish(run, steps, permission_count, false, Verdict::Bottom, Some(lm));
                        }
                        bottom.observe(&lm.mv);
                        run.push(lm);
                    }
                    None => {
                        let w = winner(g, &run).expect("arena runs are legal");
                        return finish(run, steps, permission_count, true, Verdict::of(w), None);
                    }
                }
            }
        }
    }
    finish(run, steps, permission_count, false, Verdict::Undetermined, None)
}

/// Never moves.
#[derive(Clone, Debug, Default)]
pub struct Idle;

impl Strategy for Idle {
    fn observe(&mut self, _: &Move) {}
    fn step(&mut self) -> Option<Move> {
        None
    }
}

/// Emits a fixed list of moves, one per step, ignoring the adversary.
#[derive(Clone, Debug)]
pub struct Scripted {
    moves: VecDeque<Move>,
}

impl Scripted {
    pub fn new(moves: Vec<Move>) -> Self {
        Scripted { moves: moves.into() }
    }
}

impl Strategy for Scripted {
    fn observe(&mut self, _: &Move) {}
    fn step(&mut self) -> Option<Move> {
        self.moves.pop_front()
    }
}

/// Copies every adversary move made under one prefix to the other.
#[derive(Clone, Debug)]
pub struct CopyCat {
    a: Vec<Seg>,
    b: Vec<Seg>,
    queue: VecDeque<Move>,
}

impl CopyCat {
    pub fn between(a: Vec<Seg>, b: Vec<Seg>) -> Self {
        CopyCat { a, b, queue: VecDeque::new() }
    }
}

impl Strategy for CopyCat {
    fn observe(&mut self, mv: &Move) {
        if let Some(rest) = mv.rest(&self.a) {
            self.queue.push_back(Move([&self.b[..], rest].concat()));
        } else if let Some(rest) = mv.rest(&self.b) {
            self.queue.push_back(Move([&self.a[..], rest].concat()));
        }
    }
    fn step(&mut self) -> Option<Move> {
        self.queue.pop_front()
    }
}

/// Copy-cat between the antecedent `1` and consequent `2` of `A -> A`.
pub fn ccs() -> BoxStrategy {
    Box::new(CopyCat::between(vec![Seg::Index(1)], vec![Seg::Index(2)]))
}

/// How the moves of a network port are translated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Thread {
    /// Same suffix on both sides.
    Same,
    /// The local recurrence tree is the external subtree rooted at this node.
    Under(Bits),
    /// The local game is thread `e` of an external `?` that is never split.
    Derelict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Link {
    External(Vec<Seg>, Thread),
    /// Connected to the port with this index.
    Wire(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub child: usize,
    pub local: Vec<Seg>,
    pub link: Link,
}

/// Children strategies whose components are routed to external components
/// or wired to each other. External moves with no matching port are ignored.
#[derive(Clone)]
pub struct Network {
    children: Vec<BoxStrategy>,
    /// Children that may have a move to make.
    dirty: Vec<bool>,
    ports: Vec<Port>,
    out: VecDeque<Move>,
}

impl Network {
    pub fn new(children: Vec<BoxStrategy>) -> Self {
        let dirty = vec![true; children.len()];
        Network { children, dirty, ports: Vec::new(), out: VecDeque::new() }
    }

    /// A move emitted before anything else.
    pub fn init(&mut self, mv: Move) -> &mut Self {
        self.out.push_back(mv);
        self
    }

    pub fn port(&mut self, child: usize, local: Vec<Seg>, ext: Vec<Seg>, thread: Thread) -> &mut Self {
        self.ports.push(Port { child, local, link: Link::External(ext, thread) });
        self
    }

    pub fn wire(&mut self, a: (usize, Vec<Seg>), b: (usize, Vec<Seg>)) -> &mut Self {
        let (ia, ib) = (self.ports.len(), self.ports.len() + 1);
        self.ports.push(Port { child: a.0, local: a.1, link: Link::Wire(ib) });
        self.ports.push(Port { child: b.0, local: b.1, link: Link::Wire(ia) });
        self
    }

    pub fn boxed(self) -> BoxStrategy {
        Box::new(self)
    }

    fn route(&mut self, child: usize, mv: Move) {
        let port = self
            .ports
            .iter()
            .filter(|p| p.child == child && mv.segs().starts_with(&p.local))
            .max_by_key(|p| p.local.len());
        let Some(port) = port else {
            debug_assert!(false, "child {child} moved at {mv} outside its ports");
            return;
        };
        let rest = &mv.segs()[port.local.len()..];
        match &port.link {
            Link::External(ext, thread) => {
                if let Some(m) = to_external(ext, thread, rest) {
                    self.out.push_back(m);
                }
            }
            &Link::Wire(q) => {
                let peer = &self.ports[q];
                let m = Move([&peer.local[..], rest].concat());
                let c = peer.child;
                self.children[c].observe(&m);
                self.dirty[c] = true;
            }
        }
    }
}

fn to_external(ext: &[Seg], thread: &Thread, rest: &[Seg]) -> Option<Move> {
    let mut v = Vec::with_capacity(ext.len() + rest.len() + 1);
    v.extend_from_slice(ext);
    match thread {
        Thread::Same => v.extend_from_slice(rest),
        Thread::Under(p) => match rest.first()? {
            Seg::Bits(w) => {
                v.push(Seg::Bits(p.concat(w)));
                v.extend_from_slice(&rest[1..]);
            }
            Seg::Split(w) => v.push(Seg::Split(p.concat(w))),
            _ => return None,
        },
        Thread::Derelict => {
            v.push(Seg::Bits(Bits::empty()));
            v.extend_from_slice(rest);
        }
    }
    Some(Move(v))
}

fn to_local(local: &[Seg], thread: &Thread, rest: &[Seg]) -> Option<Move> {
    let mut v = Vec::with_capacity(local.len() + rest.len() + 1);
    v.extend_from_slice(local);
    match thread {
        Thread::Same => v.extend_from_slice(rest),
        Thread::Under(p) => match rest.first()? {
            Seg::Bits(w) if p.is_prefix_of(w) => {
                v.push(Seg::Bits(w.strip(p)));
                v.extend_from_slice(&rest[1..]);
            }
            Seg::Bits(w) if w.is_prefix_of(p) => {
                v.push(Seg::Bits(Bits::empty()));
                v.extend_from_slice(&rest[1..]);
            }
            Seg::Split(w) if p.is_prefix_of(w) => v.push(Seg::Split(w.strip(p))),
            _ => return None,
        },
        Thread::Derelict => match rest.first()? {
            Seg::Bits(w) if w.is_empty() => v.extend_from_slice(&rest[1..]),
            _ => return None,
        },
    }
    Some(Move(v))
}

impl Strategy for Network {
    fn observe(&mut self, mv: &Move) {
        let mut deliveries = Vec::new();
        for p in &self.ports {
            if let Link::External(ext, thread) = &p.link {
                if let Some(rest) = mv.rest(ext) {
                    if let Some(m) = to_local(&p.local, thread, rest) {
                        deliveries.push((p.child, m));
                    }
                }
            }
        }
        for (c, m) in deliveries {
            self.children[c].observe(&m);
            self.dirty[c] = true;
        }
    }

    fn step(&mut self) -> Option<Move> {
        while self.out.is_empty() {
            let Some(i) = self.dirty.iter().position(|&d| d) else { break };
            self.dirty[i] = false;
            while let Some(m) = self.children[i].step() {
                self.route(i, m);
            }
        }
        self.out.pop_front()
    }
}

/// `f`: a strategy for `B` from strategies for `A` and `A -> B`.
/// The antecedent traffic of `eab` is played against `ea` internally.
pub fn compose_mp(ea: BoxStrategy, eab: BoxStrategy) -> BoxStrategy {
    let mut n = Network::new(vec![ea, eab]);
    n.wire((0, vec![]), (1, vec![Seg::Index(1)]));
    n.port(1, vec![Seg::Index(2)], vec![], Thread::Same);
    n.boxed()
}

/// Waits for the adversary's choice in the `⊓` at `at`, then plays the
/// strategy for the chosen component, replaying what it saw before.
#[derive(Clone)]
pub struct AwaitChoice {
    at: Vec<Seg>,
    branches: Vec<BoxStrategy>,
    buffer: Vec<Move>,
    chosen: Option<BoxStrategy>,
}

impl AwaitChoice {
    /// `branches[j - 1]` answers the choice `j`.
    pub fn new(at: Vec<Seg>, branches: Vec<BoxStrategy>) -> Self {
        AwaitChoice { at, branches, buffer: Vec::new(), chosen: None }
    }
}

impl Strategy for AwaitChoice {
    fn observe(&mut self, mv: &Move) {
        if let Some(s) = &mut self.chosen {
            s.observe(mv);
            return;
        }
        if let Some(rest) = mv.strip(&self.at) {
            if let [Seg::Index(j)] = rest.segs() {
                if *j >= 1 && (*j as usize) <= self.branches.len() {
                    let mut s = self.branches[*j as usize - 1].clone();
                    for m in self.buffer.drain(..) {
                        s.observe(&m);
                    }
                    self.chosen = Some(s);
                    return;
                }
            }
        }
        self.buffer.push(mv.clone());
    }

    fn step(&mut self) -> Option<Move> {
        self.chosen.as_mut().and_then(|s| s.step())
    }
}

#[derive(Clone)]
struct Copy {
    strategy: BoxStrategy,
    dirty: bool,
    /// Per context component: local leaf -> external node.
    regions: Vec<BTreeMap<Bits, Bits>>,
}

/// Runs one copy of a strategy per thread of an external `!E`, following the
/// adversary's replications. Optional `?` context components are shared by
/// all copies: each copy owns a disjoint region of every context tree, and
/// a replication of `!E` is mirrored by replicating every region.
#[derive(Clone)]
pub struct Promotion {
    e_local: Vec<Seg>,
    e_ext: Vec<Seg>,
    /// (local prefix, external prefix) of each `?` context component.
    ctx: Vec<(Vec<Seg>, Vec<Seg>)>,
    copies: BTreeMap<Bits, Copy>,
    out: VecDeque<Move>,
}

impl Promotion {
    pub fn new(inner: BoxStrategy, e_local: Vec<Seg>, e_ext: Vec<Seg>, ctx: Vec<(Vec<Seg>, Vec<Seg>)>) -> Self {
        let root = BTreeMap::from([(Bits::empty(), Bits::empty())]);
        let first = Copy { strategy: inner, dirty: true, regions: vec![root; ctx.len()] };
        Promotion { e_local, e_ext, ctx, copies: BTreeMap::from([(Bits::empty(), first)]), out: VecDeque::new() }
    }

    fn replicate(&mut self, u: &Bits) {
        let Some(c) = self.copies.remove(u) else { return };
        let (mut c0, mut c1) = (c.clone(), c);
        for (k, (_, ext)) in self.ctx.iter().enumerate() {
            for phi in c0.regions[k].values_mut() {
                self.out.push_back(Move([&ext[..], &[Seg::Split(phi.clone())]].concat()));
                *phi = phi.child(false);
            }
            for phi in c1.regions[k].values_mut() {
                *phi = phi.child(true);
            }
        }
        self.copies.insert(u.child(false), c0);
        self.copies.insert(u.child(true), c1);
    }

    fn route(&mut self, u: &Bits, mv: Move) {
        for (k, (local, ext)) in self.ctx.iter().enumerate() {
            let Some(rest) = mv.rest(local) else { continue };
            let regions = &mut self.copies.get_mut(u).expect("live copy").regions[k];
            match rest.first() {
                Some(Seg::Split(l)) => {
                    if let Some(phi) = regions.remove(l) {
                        self.out.push_back(Move([&ext[..], &[Seg::Split(phi.clone())]].concat()));
                        regions.insert(l.child(false), phi.child(false));
                        regions.insert(l.child(true), phi.child(true));
                    }
                }
                Some(Seg::Bits(t)) => {
                    for (l, phi) in regions.iter() {
                        if t.is_prefix_of(l) {
                            let head = [&ext[..], &[Seg::Bits(phi.clone())]].concat();
                            self.out.push_back(Move([&head[..], &rest[1..]].concat()));
                        }
                    }
                }
                _ => {}
            }
            return;
        }
        if let Some(rest) = mv.rest(&self.e_local) {
            let head = [&self.e_ext[..], &[Seg::Bits(u.clone())]].concat();
            self.out.push_back(Move([&head[..], rest].concat()));
        }
    }
}

impl Strategy for Promotion {
    fn observe(&mut self, mv: &Move) {
        for (k, (local, ext)) in self.ctx.iter().enumerate() {
            let Some(rest) = mv.rest(ext) else { continue };
            if let Some(Seg::Bits(v)) = rest.first() {
                for c in self.copies.values_mut() {
                    let hits: Vec<Bits> =
                        c.regions[k].iter().filter(|(_, phi)| v.is_prefix_of(phi)).map(|(l, _)| l.clone()).collect();
                    for l in hits {
                        let head = [&local[..], &[Seg::Bits(l)]].concat();
                        c.strategy.observe(&Move([&head[..], &rest[1..]].concat()));
                        c.dirty = true;
                    }
                }
            }
            return;
        }
        let Some(rest) = mv.rest(&self.e_ext) else { return };
        match rest.first() {
            Some(Seg::Split(u)) => {
                let u = u.clone();
                self.replicate(&u);
            }
            Some(Seg::Bits(v)) => {
                let inner = Move([&self.e_local[..], &rest[1..]].concat());
                for (u, c) in self.copies.iter_mut() {
                    if v.is_prefix_of(u) {
                        c.strategy.observe(&inner);
                        c.dirty = true;
                    }
                }
            }
            _ => {}
        }
    }

    fn step(&mut self) -> Option<Move> {
        if let Some(m) = self.out.pop_front() {
            return Some(m);
        }
        let keys: Vec<Bits> = self.copies.iter().filter(|(_, c)| c.dirty).map(|(u, _)| u.clone()).collect();
        for u in keys {
            self.copies.get_mut(&u).expect("live copy").dirty = false;
            while let Some(m) = self.copies.get_mut(&u).and_then(|c| c.strategy.step()) {
                self.route(&u, m);
            }
        }
        self.out.pop_front()
    }
}

/// `h`: a strategy for `!A` from a strategy for `A`, one copy per thread.
pub fn bang_lift(e: BoxStrategy) -> BoxStrategy {
    Box::new(Promotion::new(e, vec![], vec![], vec![]))
}

/// A strategy for `H2` from one for `H1` and one for `G1 -> G2`, where `H2`
/// is `H1` with the positive occurrence of `G1` at `occ` replaced by `G2`:
/// `f(eH1, f(h(c), B))` with `B` extracted from the replacement proof.
pub fn replace(
    eh1: BoxStrategy,
    c: BoxStrategy,
    g1: &Formula,
    g2: &Formula,
    h1: &Formula,
    occ: &[usize],
) -> Result<BoxStrategy, crate::affine::AffineError> {
    let proof = crate::affine::replacement_implication(g1, g2, h1, occ)?;
    let b = crate::affine::ai_to_strategy(&proof);
    Ok(compose_mp(eh1, compose_mp(bang_lift(c), b)))
}

/// A seeded random Bottom player: moves with probability `p_move` while it
/// has moves left, drawing uniformly from the bounded candidate moves.
#[derive(Clone)]
pub struct RandomAdversary {
    game: G,
    run: Run,
    rng: ChaCha8Rng,
    moves_left: usize,
    p_move: f64,
    bounds: MoveBounds,
    me: Player,
}

impl RandomAdversary {
    pub fn new(game: G, seed: u64, max_moves: usize) -> Self {
        RandomAdversary {
            game,
            run: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            moves_left: max_moves,
            p_move: 0.75,
            bounds: MoveBounds::default(),
            me: Player::Bottom,
        }
    }

    /// Plays as `p` instead of Bottom.
    pub fn with_player(mut self, p: Player) -> Self {
        self.me = p;
        self
    }

    pub fn with_p_move(mut self, p: f64) -> Self {
        self.p_move = p;
        self
    }

    pub fn with_bounds(mut self, b: MoveBounds) -> Self {
        self.bounds = b;
        self
    }
}

impl Strategy for RandomAdversary {
    fn observe(&mut self, mv: &Move) {
        self.run.push(LabMove::new(self.me.flip(), mv.clone()));
    }

    fn step(&mut self) -> Option<Move> {
        if self.moves_left == 0 || !self.rng.gen_bool(self.p_move) {
            return None;
        }
        let cands = candidate_moves(&self.game, &self.run, self.me, &self.bounds);
        if cands.is_empty() {
            return None;
        }
        let m = cands[self.rng.gen_range(0..cands.len())].clone();
        self.moves_left -= 1;
        self.run.push(LabMove::new(self.me, m.clone()));
        Some(m)
    }
}

/// Win statistics of a strategy against random adversaries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PlayStats {
    pub plays: usize,
    pub top_wins: usize,
    pub undetermined: usize,
    pub illegal_by_top: usize,
    /// First lost run, as a transcript.
    pub first_loss: Option<String>,
}

impl PlayStats {
    pub fn all_won(&self) -> bool {
        self.plays > 0 && self.top_wins == self.plays
    }
}

/// Plays `s` against `plays` seeded random adversaries on `g`.
pub fn validate(s: &dyn Strategy, g: &G, plays: usize, seed: u64, max_adv_moves: usize) -> PlayStats {
    let mut st = PlayStats::default();
    for i in 0..plays {
        let mut top = dyn_clone::clone_box(s);
        let mut adv =
            RandomAdversary::new(g.clone(), seed.wrapping_mul(1_000_003).wrapping_add(i as u64), max_adv_moves);
        let r = arena_run(top.as_mut(), &mut adv, g, DEFAULT_BUDGET);
        st.plays += 1;
        match r.verdict {
            Verdict::Top => st.top_wins += 1,
            Verdict::Undetermined => st.undetermined += 1,
            Verdict::Bottom => {
                if r.illegal.is_some() {
                    st.illegal_by_top += 1;
                }
                if st.first_loss.is_none() {
                    let mut t = crate::game_core::transcript(&r.run);
                    if let Some(l) = &r.illegal {
                        t.push_str(&format!("illegal {l}\n"));
                    }
                    st.first_loss = Some(t);
                }
            }
        }
    }
    st
}
