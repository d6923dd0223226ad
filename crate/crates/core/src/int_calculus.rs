//! Gentzen-style Int: proofs, a schema-exact checker and a decision procedure.
//!
//! Search works on antecedents as sets of subformulas of the input; the emitted
//! proof puts back explicit Exchange, Weakening and Contraction steps so that
//! every node matches the sequence-based schemata.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::syntax::{parse_int_sequent, Atom, Formula, IntSequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntRule {
    Axiom,
    Exchange,
    Weakening,
    Contraction,
    LeftWeakImp,
    RightWeakImp,
    LeftChoiceOr,
    RightChoiceOr(u8),
    LeftChoiceAnd(u8),
    RightChoiceAnd,
}

impl IntRule {
    pub fn name(&self) -> &'static str {
        match self {
            IntRule::Axiom => "Axiom",
            IntRule::Exchange => "Exchange",
            IntRule::Weakening => "Weakening",
            IntRule::Contraction => "Contraction",
            IntRule::LeftWeakImp => "LeftWeakImp",
            IntRule::RightWeakImp => "RightWeakImp",
            IntRule::LeftChoiceOr => "LeftChoiceOr",
            IntRule::RightChoiceOr(_) => "RightChoiceOr",
            IntRule::LeftChoiceAnd(_) => "LeftChoiceAnd",
            IntRule::RightChoiceAnd => "RightChoiceAnd",
        }
    }

    pub fn side(&self) -> Option<u8> {
        match self {
            IntRule::RightChoiceOr(i) | IntRule::LeftChoiceAnd(i) => Some(*i),
            _ => None,
        }
    }

    fn from_name(name: &str, side: Option<u8>) -> Option<IntRule> {
        Some(match name {
            "Axiom" => IntRule::Axiom,
            "Exchange" => IntRule::Exchange,
            "Weakening" => IntRule::Weakening,
            "Contraction" => IntRule::Contraction,
            "LeftWeakImp" => IntRule::LeftWeakImp,
            "RightWeakImp" => IntRule::RightWeakImp,
            "LeftChoiceOr" => IntRule::LeftChoiceOr,
            "RightChoiceOr" => IntRule::RightChoiceOr(side?),
            "LeftChoiceAnd" => IntRule::LeftChoiceAnd(side?),
            "RightChoiceAnd" => IntRule::RightChoiceAnd,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntProof {
    pub conclusion: IntSequent,
    pub rule: IntRule,
    pub premises: Vec<IntProof>,
}

impl IntProof {
    pub fn new(conclusion: IntSequent, rule: IntRule, premises: Vec<IntProof>) -> Self {
        IntProof { conclusion, rule, premises }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(|p| p.height()).max().unwrap_or(0)
    }

    /// `{rule, side?, conclusion, children}` with conclusions in concrete syntax.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "rule": self.rule.name(),
            "conclusion": self.conclusion.to_string(),
            "children": self.premises.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        });
        if let Some(i) = self.rule.side() {
            v["side"] = json!(i);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<IntProof, String> {
        let name = v["rule"].as_str().ok_or("missing rule")?;
        let side = v.get("side").and_then(|s| s.as_u64()).map(|s| s as u8);
        let rule = IntRule::from_name(name, side).ok_or_else(|| format!("unknown rule {name}"))?;
        let text = v["conclusion"].as_str().ok_or("missing conclusion")?;
        let conclusion = parse_int_sequent(text).map_err(|e| e.to_string())?;
        let premises = match v.get("children") {
            Some(Value::Array(cs)) => cs.iter().map(IntProof::from_json).collect::<Result<_, _>>()?,
            None | Some(Value::Null) => vec![],
            _ => return Err("children must be an array".into()),
        };
        Ok(IntProof { conclusion, rule, premises })
    }

    fn write_indented(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(self.rule.name());
        if let Some(i) = self.rule.side() {
            out.push_str(&format!("({i})"));
        }
        out.push_str(": ");
        out.push_str(&self.conclusion.to_string());
        out.push('\n');
        for p in &self.premises {
            p.write_indented(depth + 1, out);
        }
    }
}

impl fmt::Display for IntProof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_indented(0, &mut s);
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {path:?} ({rule}): {message}")]
pub struct CheckError {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub rule: &'static str,
    pub message: String,
}

pub fn check_int_proof(p: &IntProof) -> Result<(), CheckError> {
    let mut path = Vec::new();
    check_node(p, &mut path)
}

fn check_node(p: &IntProof, path: &mut Vec<usize>) -> Result<(), CheckError> {
    if let Err(message) = check_schema(p) {
        return Err(CheckError { path: path.clone(), rule: p.rule.name(), message });
    }
    for (i, q) in p.premises.iter().enumerate() {
        path.push(i);
        check_node(q, path)?;
        path.pop();
    }
    Ok(())
}

fn arity(rule: IntRule) -> usize {
    match rule {
        IntRule::Axiom => 0,
        IntRule::LeftWeakImp | IntRule::LeftChoiceOr | IntRule::RightChoiceAnd => 2,
        _ => 1,
    }
}

fn check_schema(p: &IntProof) -> Result<(), String> {
    let c = &p.conclusion;
    if !c.succedent.is_int() || !c.antecedent.iter().all(|g| g.is_int()) {
        return Err("not an Int-sequent".into());
    }
    if p.premises.len() != arity(p.rule) {
        return Err(format!("expected {} premises, found {}", arity(p.rule), p.premises.len()));
    }
    let ca = &c.antecedent;
    let k = &c.succedent;
    let prem = |i: usize| &p.premises[i].conclusion;
    let same_succ = |i: usize| -> Result<(), String> {
        if &prem(i).succedent != k {
            Err(format!("premise {} succedent differs", i + 1))
        } else {
            Ok(())
        }
    };
    match p.rule {
        IntRule::Axiom => match ca.as_slice() {
            [g] if g == k || *g == Formula::dollar() => Ok(()),
            _ => Err("not of the form K => K or $ => K".into()),
        },
        IntRule::Exchange => {
            same_succ(0)?;
            let pa = &prem(0).antecedent;
            if pa.len() != ca.len() {
                return Err("antecedent lengths differ".into());
            }
            let diff: Vec<usize> = (0..ca.len()).filter(|&i| pa[i] != ca[i]).collect();
            match diff.as_slice() {
                [i, j] if *j == i + 1 && pa[*i] == ca[*j] && pa[*j] == ca[*i] => Ok(()),
                _ => Err("not an adjacent swap".into()),
            }
        }
        IntRule::Weakening => {
            same_succ(0)?;
            let pa = &prem(0).antecedent;
            if ca.len() == pa.len() + 1 && ca[..pa.len()] == pa[..] {
                Ok(())
            } else {
                Err("conclusion antecedent is not premise antecedent plus one formula".into())
            }
        }
        IntRule::Contraction => {
            same_succ(0)?;
            let pa = &prem(0).antecedent;
            let n = pa.len();
            if n >= 2 && pa[n - 1] == pa[n - 2] && ca[..] == pa[..n - 1] {
                Ok(())
            } else {
                Err("premise does not end in E, E contracted to the conclusion".into())
            }
        }
        IntRule::RightWeakImp => {
            let Formula::WeakImp(e, kk) = k else {
                return Err("succedent is not E o- K".into());
            };
            let p0 = prem(0);
            let mut expect = ca.clone();
            expect.push((**e).clone());
            if p0.antecedent == expect && p0.succedent == **kk {
                Ok(())
            } else {
                Err("premise is not G, E => K".into())
            }
        }
        IntRule::LeftWeakImp => {
            let Some((last, rest)) = ca.split_last() else {
                return Err("empty antecedent".into());
            };
            let Formula::WeakImp(k2, e) = last else {
                return Err("last antecedent formula is not K2 o- E".into());
            };
            let (p0, p1) = (prem(0), prem(1));
            same_succ(0)?;
            let Some((pe, g)) = p0.antecedent.split_last() else {
                return Err("first premise has empty antecedent".into());
            };
            if pe != &**e {
                return Err("first premise does not end in E".into());
            }
            if p1.succedent != **k2 {
                return Err("second premise succedent is not K2".into());
            }
            let mut expect = g.to_vec();
            expect.extend(p1.antecedent.iter().cloned());
            if rest == expect.as_slice() {
                Ok(())
            } else {
                Err("conclusion antecedent is not G, H, K2 o- E".into())
            }
        }
        IntRule::LeftChoiceOr => {
            let Some((last, rest)) = ca.split_last() else {
                return Err("empty antecedent".into());
            };
            let Formula::ChoiceOr(es) = last else {
                return Err("last antecedent formula is not E1 | E2".into());
            };
            if es.len() != 2 {
                return Err("not binary".into());
            }
            for (i, e) in es.iter().enumerate() {
                same_succ(i)?;
                let mut expect = rest.to_vec();
                expect.push(e.clone());
                if prem(i).antecedent != expect {
                    return Err(format!("premise {} is not G, E{} => K", i + 1, i + 1));
                }
            }
            Ok(())
        }
        IntRule::LeftChoiceAnd(i) => {
            let Some((last, rest)) = ca.split_last() else {
                return Err("empty antecedent".into());
            };
            let Formula::ChoiceAnd(es) = last else {
                return Err("last antecedent formula is not E1 & E2".into());
            };
            if !(i == 1 || i == 2) || es.len() != 2 {
                return Err("bad side index".into());
            }
            same_succ(0)?;
            let mut expect = rest.to_vec();
            expect.push(es[i as usize - 1].clone());
            if prem(0).antecedent == expect {
                Ok(())
            } else {
                Err(format!("premise is not G, E{i} => K"))
            }
        }
        IntRule::RightChoiceOr(i) => {
            let Formula::ChoiceOr(ks) = k else {
                return Err("succedent is not K1 | K2".into());
            };
            if !(i == 1 || i == 2) || ks.len() != 2 {
                return Err("bad side index".into());
            }
            if prem(0).antecedent != *ca {
                return Err("antecedent changed".into());
            }
            if prem(0).succedent != ks[i as usize - 1] {
                return Err(format!("premise succedent is not K{i}"));
            }
            Ok(())
        }
        IntRule::RightChoiceAnd => {
            let Formula::ChoiceAnd(ks) = k else {
                return Err("succedent is not K1 & K2".into());
            };
            if ks.len() != 2 {
                return Err("not binary".into());
            }
            for (i, k) in ks.iter().enumerate() {
                if prem(i).antecedent != *ca || prem(i).succedent != *k {
                    return Err(format!("premise {} is not G => K{}", i + 1, i + 1));
                }
            }
            Ok(())
        }
    }
}

/// Structural glue: turn a proof of `A => K` into one of `target => K`, where
/// every formula of `A` occurs in `target`.
pub fn restructure(p: IntProof, target: &[Formula]) -> IntProof {
    let k = p.conclusion.succedent.clone();
    let mut cur = p.conclusion.antecedent.clone();
    let mut proof = p;
    let step = |proof: IntProof, ante: &Vec<Formula>, rule: IntRule| {
        IntProof::new(IntSequent::new(ante.clone(), k.clone()), rule, vec![proof])
    };
    // drop surplus copies
    let want = |f: &Formula| target.iter().filter(|g| *g == f).count();
    while let Some(f) = cur
        .iter()
        .find(|f| {
            let c = cur.iter().filter(|g| g == f).count();
            c >= 2 && c > want(f)
        })
        .cloned()
    {
        let q = cur.iter().rposition(|g| *g == f).unwrap();
        for i in q..cur.len() - 1 {
            cur.swap(i, i + 1);
            proof = step(proof, &cur, IntRule::Exchange);
        }
        let n = cur.len();
        let r = cur[..n - 1].iter().rposition(|g| *g == f).unwrap();
        for i in r..n - 2 {
            cur.swap(i, i + 1);
            proof = step(proof, &cur, IntRule::Exchange);
        }
        cur.pop();
        proof = step(proof, &cur, IntRule::Contraction);
    }
    // add missing copies
    for f in target {
        let have = cur.iter().filter(|g| *g == f).count();
        if have < want(f) {
            cur.push(f.clone());
            proof = step(proof, &cur, IntRule::Weakening);
        }
    }
    // permute by adjacent swaps
    assert_eq!(cur.len(), target.len(), "restructure: antecedent not covered by target");
    for i in 0..target.len() {
        if cur[i] == target[i] {
            continue;
        }
        let j = (i + 1..cur.len()).find(|&j| cur[j] == target[i]).expect("restructure: missing formula");
        for t in (i..j).rev() {
            cur.swap(t, t + 1);
            proof = step(proof, &cur, IntRule::Exchange);
        }
    }
    proof
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProveError {
    #[error("sequent store bound of {0} antecedent sets exceeded")]
    ResourceLimit(usize),
    #[error("not an Int-sequent")]
    NotInt,
}

/// Result of a definitive search.
#[derive(Debug, Clone)]
pub enum ProveOutcome {
    Proved(IntProof),
    Unprovable { antecedent_sets: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Atom(Atom),
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Set(Box<[u64]>);

impl Set {
    fn empty(n: usize) -> Set {
        Set(vec![0; n.div_ceil(64).max(1)].into_boxed_slice())
    }
    fn has(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn with(&self, i: usize) -> Set {
        let mut s = self.clone();
        s.0[i / 64] |= 1 << (i % 64);
        s
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }
}

#[derive(Clone, Debug)]
enum Shape {
    /// ⊓-formula whose components are not both present.
    Saturate(usize),
    Dollar,
    /// ⊔-formula with neither component present.
    Split(usize),
    /// Pending: decided per goal.
    Base,
    /// `K2 o- E` with `K2` derivable by right rules.
    Jump(usize),
}

struct GammaInfo {
    shape: Shape,
    right: HashMap<usize, bool>,
}

/// Reusable search context for one sequent's subformula closure.
pub struct IntProver {
    nodes: Vec<Node>,
    ids: HashMap<Formula, usize>,
    forms: Vec<Formula>,
    memo: HashMap<Set, GammaInfo>,
    limit: usize,
    dollar: Option<usize>,
}

impl IntProver {
    pub fn new(s: &IntSequent, limit: usize) -> Result<Self, ProveError> {
        if !s.succedent.is_int() || !s.antecedent.iter().all(|g| g.is_int()) {
            return Err(ProveError::NotInt);
        }
        let mut p =
            IntProver { nodes: vec![], ids: HashMap::new(), forms: vec![], memo: HashMap::new(), limit, dollar: None };
        for g in &s.antecedent {
            p.intern(g);
        }
        p.intern(&s.succedent);
        p.dollar = p.ids.get(&Formula::dollar()).copied();
        Ok(p)
    }

    fn intern(&mut self, f: &Formula) -> usize {
        if let Some(&i) = self.ids.get(f) {
            return i;
        }
        let node = match f {
            Formula::Atom(a) => Node::Atom(*a),
            Formula::ChoiceAnd(v) => Node::And(self.intern(&v[0]), self.intern(&v[1])),
            Formula::ChoiceOr(v) => Node::Or(self.intern(&v[0]), self.intern(&v[1])),
            Formula::WeakImp(a, b) => Node::Imp(self.intern(a), self.intern(b)),
            _ => unreachable!("checked by is_int"),
        };
        let i = self.nodes.len();
        self.nodes.push(node);
        self.forms.push(f.clone());
        self.ids.insert(f.clone(), i);
        i
    }

    fn set_of(&self, fs: &[Formula]) -> Set {
        let mut s = Set::empty(self.nodes.len());
        for f in fs {
            s = s.with(self.ids[f]);
        }
        s
    }

    pub fn antecedent_sets(&self) -> usize {
        self.memo.len()
    }

    fn shape(&mut self, g: &Set) -> Result<Shape, ProveError> {
        if let Some(info) = self.memo.get(g) {
            return Ok(info.shape.clone());
        }
        if self.memo.len() >= self.limit {
            return Err(ProveError::ResourceLimit(self.limit));
        }
        let mut shape = None;
        if self.dollar.is_some_and(|d| g.has(d)) {
            shape = Some(Shape::Dollar);
        }
        if shape.is_none() {
            for i in g.iter() {
                if let Node::And(a, b) = self.nodes[i] {
                    if !(g.has(a) && g.has(b)) {
                        shape = Some(Shape::Saturate(i));
                        break;
                    }
                }
            }
        }
        if shape.is_none() {
            for i in g.iter() {
                if let Node::Or(a, b) = self.nodes[i] {
                    if !g.has(a) && !g.has(b) {
                        shape = Some(Shape::Split(i));
                        break;
                    }
                }
            }
        }
        self.memo.insert(g.clone(), GammaInfo { shape: shape.clone().unwrap_or(Shape::Base), right: HashMap::new() });
        if let Some(s) = shape {
            return Ok(s);
        }
        let imps: Vec<(usize, usize, usize)> = g
            .iter()
            .filter_map(|i| match self.nodes[i] {
                Node::Imp(k2, e) if !g.has(e) => Some((i, k2, e)),
                _ => None,
            })
            .collect();
        for (i, k2, _) in imps {
            if self.right(g, k2)? {
                self.memo.get_mut(g).unwrap().shape = Shape::Jump(i);
                return Ok(Shape::Jump(i));
            }
        }
        Ok(Shape::Base)
    }

    /// Full provability of `g => goal`.
    fn prov(&mut self, g: &Set, goal: usize) -> Result<bool, ProveError> {
        match self.shape(g)? {
            Shape::Dollar => Ok(true),
            Shape::Saturate(i) => {
                let Node::And(a, b) = self.nodes[i] else { unreachable!() };
                self.prov(&g.with(a).with(b), goal)
            }
            Shape::Split(i) => {
                let Node::Or(a, b) = self.nodes[i] else { unreachable!() };
                Ok(self.prov(&g.with(a), goal)? && self.prov(&g.with(b), goal)?)
            }
            Shape::Jump(i) => {
                let Node::Imp(_, e) = self.nodes[i] else { unreachable!() };
                self.prov(&g.with(e), goal)
            }
            Shape::Base => self.right(g, goal),
        }
    }

    /// Provability by axioms and right rules at `g` (full search above `g`).
    fn right(&mut self, g: &Set, goal: usize) -> Result<bool, ProveError> {
        if let Some(&r) = self.memo.get(g).and_then(|i| i.right.get(&goal)) {
            return Ok(r);
        }
        let r = if g.has(goal) || self.dollar.is_some_and(|d| g.has(d)) {
            true
        } else {
            match self.nodes[goal] {
                Node::Atom(_) => false,
                Node::And(a, b) => self.right(g, a)? && self.right(g, b)?,
                Node::Or(a, b) => self.right(g, a)? || self.right(g, b)?,
                Node::Imp(a, b) => {
                    if g.has(a) {
                        self.right(g, b)?
                    } else {
                        self.prov(&g.with(a), b)?
                    }
                }
            }
        };
        if let Some(info) = self.memo.get_mut(g) {
            info.right.insert(goal, r);
        }
        Ok(r)
    }

    fn canon(&self, g: &Set) -> Vec<Formula> {
        g.iter().map(|i| self.forms[i].clone()).collect()
    }

    fn seq(&self, ante: Vec<Formula>, goal: usize) -> IntSequent {
        IntSequent::new(ante, self.forms[goal].clone())
    }

    /// Proof of `canon(g) => goal`; requires `prov(g, goal)`.
    fn emit(&mut self, g: &Set, goal: usize) -> Result<IntProof, ProveError> {
        let l = self.canon(g);
        let k = self.forms[goal].clone();
        Ok(match self.shape(g)? {
            Shape::Dollar => {
                let ax = IntProof::new(self.seq(vec![Formula::dollar()], goal), IntRule::Axiom, vec![]);
                restructure(ax, &l)
            }
            Shape::Saturate(i) => {
                let Node::And(a, b) = self.nodes[i] else { unreachable!() };
                let (fa, fb, fab) = (self.forms[a].clone(), self.forms[b].clone(), self.forms[i].clone());
                let sub = self.emit(&g.with(a).with(b), goal)?;
                let t1 = [l.clone(), vec![fb.clone(), fa]].concat();
                let p1 = restructure(sub, &t1);
                let c1 = [l.clone(), vec![fb, fab.clone()]].concat();
                let p1 = IntProof::new(IntSequent::new(c1, k.clone()), IntRule::LeftChoiceAnd(1), vec![p1]);
                let t2 = [l.clone(), vec![fab.clone(), self.forms[b].clone()]].concat();
                let p2 = restructure(p1, &t2);
                let c2 = [l.clone(), vec![fab.clone(), fab]].concat();
                let p2 = IntProof::new(IntSequent::new(c2, k), IntRule::LeftChoiceAnd(2), vec![p2]);
                restructure(p2, &l)
            }
            Shape::Split(i) => {
                let Node::Or(a, b) = self.nodes[i] else { unreachable!() };
                let pa = self.emit(&g.with(a), goal)?;
                let pb = self.emit(&g.with(b), goal)?;
                let pa = restructure(pa, &[l.clone(), vec![self.forms[a].clone()]].concat());
                let pb = restructure(pb, &[l.clone(), vec![self.forms[b].clone()]].concat());
                let c = [l.clone(), vec![self.forms[i].clone()]].concat();
                restructure(IntProof::new(IntSequent::new(c, k), IntRule::LeftChoiceOr, vec![pa, pb]), &l)
            }
            Shape::Jump(i) => {
                let Node::Imp(k2, e) = self.nodes[i] else { unreachable!() };
                let pk2 = self.emit_right(g, k2)?;
                let pe = self.emit(&g.with(e), goal)?;
                let pe = restructure(pe, &[l.clone(), vec![self.forms[e].clone()]].concat());
                let c = [l.clone(), l.clone(), vec![self.forms[i].clone()]].concat();
                restructure(IntProof::new(IntSequent::new(c, k), IntRule::LeftWeakImp, vec![pe, pk2]), &l)
            }
            Shape::Base => self.emit_right(g, goal)?,
        })
    }

    fn emit_right(&mut self, g: &Set, goal: usize) -> Result<IntProof, ProveError> {
        let l = self.canon(g);
        let k = self.forms[goal].clone();
        if g.has(goal) {
            let ax = IntProof::new(self.seq(vec![k.clone()], goal), IntRule::Axiom, vec![]);
            return Ok(restructure(ax, &l));
        }
        if self.dollar.is_some_and(|d| g.has(d)) {
            let ax = IntProof::new(self.seq(vec![Formula::dollar()], goal), IntRule::Axiom, vec![]);
            return Ok(restructure(ax, &l));
        }
        Ok(match self.nodes[goal] {
            Node::Atom(_) => unreachable!("emit on unprovable goal"),
            Node::And(a, b) => {
                let pa = self.emit_right(g, a)?;
                let pb = self.emit_right(g, b)?;
                IntProof::new(IntSequent::new(l, k), IntRule::RightChoiceAnd, vec![pa, pb])
            }
            Node::Or(a, b) => {
                let (side, c) = if self.right(g, a)? { (1, a) } else { (2, b) };
                let pc = self.emit_right(g, c)?;
                IntProof::new(IntSequent::new(l, k), IntRule::RightChoiceOr(side), vec![pc])
            }
            Node::Imp(a, b) => {
                let sub = if g.has(a) { self.emit_right(g, b)? } else { self.emit(&g.with(a), b)? };
                let sub = restructure(sub, &[l.clone(), vec![self.forms[a].clone()]].concat());
                IntProof::new(IntSequent::new(l, k), IntRule::RightWeakImp, vec![sub])
            }
        })
    }
}

/// Default bound on distinct antecedent sets explored per call.
pub const DEFAULT_STORE_BOUND: usize = 2_000_000;

pub fn decide_int(s: &IntSequent) -> Result<bool, ProveError> {
    let mut p = IntProver::new(s, DEFAULT_STORE_BOUND)?;
    let g = p.set_of(&s.antecedent);
    let goal = p.ids[&s.succedent];
    p.prov(&g, goal)
}

pub fn prove_int(s: &IntSequent) -> Result<ProveOutcome, ProveError> {
    prove_int_bounded(s, DEFAULT_STORE_BOUND)
}

pub fn prove_int_bounded(s: &IntSequent, bound: usize) -> Result<ProveOutcome, ProveError> {
    let mut p = IntProver::new(s, bound)?;
    let g = p.set_of(&s.antecedent);
    let goal = p.ids[&s.succedent];
    if !p.prov(&g, goal)? {
        return Ok(ProveOutcome::Unprovable { antecedent_sets: p.antecedent_sets() });
    }
    let proof = p.emit(&g, goal)?;
    Ok(ProveOutcome::Proved(restructure(proof, &s.antecedent)))
}
