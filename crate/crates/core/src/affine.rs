//! The one-sided affine calculus AI: proofs, a strict and a relaxed checker,
//! proof-building helpers, the replacement construction, a catalog of schema
//! proofs, and extraction of strategies from proofs.
//!
//! Formulas are compared after negation normalization, so `~(A /\ B)` and
//! `~A \/ ~B` denote the same formula here.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::game_core::{Bits, Move, Seg};
use crate::machines::{AwaitChoice, BoxStrategy, CopyCat, Network, Promotion, Thread};
use crate::syntax::{embed_formula, normalize_negation, parse_ai_sequent, AISequent, Formula, IntSequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AIRule {
    Axiom,
    Exchange,
    Weakening,
    CobangContraction,
    /// Introduces component `i` (1-based) of an `n`-ary `⊔`.
    ChoiceOrIntro {
        i: usize,
        n: usize,
    },
    ChoiceAndIntro {
        n: usize,
    },
    ParOrIntro {
        n: usize,
    },
    ParAndIntro {
        n: usize,
    },
    CobangIntro,
    BangIntro,
    Cut,
    ModusPonens,
}

impl AIRule {
    pub fn name(&self) -> &'static str {
        match self {
            AIRule::Axiom => "Axiom",
            AIRule::Exchange => "Exchange",
            AIRule::Weakening => "Weakening",
            AIRule::CobangContraction => "CobangContraction",
            AIRule::ChoiceOrIntro { .. } => "ChoiceOrIntro",
            AIRule::ChoiceAndIntro { .. } => "ChoiceAndIntro",
            AIRule::ParOrIntro { .. } => "ParOrIntro",
            AIRule::ParAndIntro { .. } => "ParAndIntro",
            AIRule::CobangIntro => "CobangIntro",
            AIRule::BangIntro => "BangIntro",
            AIRule::Cut => "Cut",
            AIRule::ModusPonens => "ModusPonens",
        }
    }

    /// Cut and modus ponens are admissible rather than primitive.
    pub fn admissible(&self) -> bool {
        matches!(self, AIRule::Cut | AIRule::ModusPonens)
    }

    fn from_json(v: &Value) -> Result<AIRule, String> {
        let name = v["rule"].as_str().ok_or("missing rule")?;
        let num = |k: &str| v.get(k).and_then(|x| x.as_u64()).map(|x| x as usize).ok_or(format!("{name} needs {k}"));
        Ok(match name {
            "Axiom" => AIRule::Axiom,
            "Exchange" => AIRule::Exchange,
            "Weakening" => AIRule::Weakening,
            "CobangContraction" => AIRule::CobangContraction,
            "ChoiceOrIntro" => AIRule::ChoiceOrIntro { i: num("i")?, n: num("n")? },
            "ChoiceAndIntro" => AIRule::ChoiceAndIntro { n: num("n")? },
            "ParOrIntro" => AIRule::ParOrIntro { n: num("n")? },
            "ParAndIntro" => AIRule::ParAndIntro { n: num("n")? },
            "CobangIntro" => AIRule::CobangIntro,
            "BangIntro" => AIRule::BangIntro,
            "Cut" => AIRule::Cut,
            "ModusPonens" => AIRule::ModusPonens,
            _ => return Err(format!("unknown rule {name}")),
        })
    }
}

impl fmt::Display for AIRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AIRule::ChoiceOrIntro { i, n } => write!(f, "ChoiceOrIntro({i},{n})"),
            AIRule::ChoiceAndIntro { n } | AIRule::ParOrIntro { n } | AIRule::ParAndIntro { n } => {
                write!(f, "{}({n})", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AIProof {
    pub conclusion: AISequent,
    pub rule: AIRule,
    pub premises: Vec<AIProof>,
}

impl AIProof {
    pub fn new(conclusion: Vec<Formula>, rule: AIRule, premises: Vec<AIProof>) -> Self {
        AIProof { conclusion: AISequent::new(conclusion), rule, premises }
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.conclusion.formulas
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    /// Pre-order list of the nodes.
    pub fn nodes(&self) -> Vec<&AIProof> {
        let mut out = vec![self];
        for p in &self.premises {
            out.extend(p.nodes());
        }
        out
    }

    /// `{rule, i?, n?, conclusion, children}` with conclusions in AI syntax.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "rule": self.rule.name(),
            "conclusion": self.conclusion.to_string(),
            "children": self.premises.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        });
        match self.rule {
            AIRule::ChoiceOrIntro { i, n } => {
                v["i"] = json!(i);
                v["n"] = json!(n);
            }
            AIRule::ChoiceAndIntro { n } | AIRule::ParOrIntro { n } | AIRule::ParAndIntro { n } => v["n"] = json!(n),
            _ => {}
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<AIProof, String> {
        let rule = AIRule::from_json(v)?;
        let text = v["conclusion"].as_str().ok_or("missing conclusion")?;
        let conclusion = parse_ai_sequent(text).map_err(|e| e.to_string())?;
        let premises = match v.get("children") {
            Some(Value::Array(cs)) => cs.iter().map(AIProof::from_json).collect::<Result<_, _>>()?,
            None | Some(Value::Null) => vec![],
            _ => return Err("children must be an array".into()),
        };
        Ok(AIProof { conclusion, rule, premises })
    }

    fn write_indented(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{}: {}\n", self.rule, self.conclusion));
        for p in &self.premises {
            p.write_indented(depth + 1, out);
        }
    }
}

impl fmt::Display for AIProof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_indented(0, &mut s);
        f.write_str(&s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Sequences: principal formulas last, explicit Exchange steps.
    Strict,
    /// Multisets.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("node {path:?} ({rule}): {message}")]
    Check { path: Vec<usize>, rule: String, message: String },
    #[error("occurrence {0:?} is under a negation")]
    NotPositive(Vec<usize>),
    #[error("no subformula at {0:?}")]
    BadOccurrence(Vec<usize>),
    #[error("unknown schema {0:?}")]
    UnknownSchema(String),
    #[error("schema {id}: {message}")]
    Arity { id: String, message: String },
    #[error("proof construction failed: {0}")]
    Build(String),
}

fn nf(f: &Formula) -> Formula {
    normalize_negation(f)
}

/// Negation-normal `¬f`.
pub fn dual(f: &Formula) -> Formula {
    normalize_negation(&Formula::neg(f.clone()))
}

/// The formula whose game a sequent's strategy plays: the formula itself for
/// one formula, their `∨` otherwise.
pub fn sequent_formula(s: &AISequent) -> Formula {
    match s.formulas.len() {
        1 => s.formulas[0].clone(),
        _ => Formula::ParOr(s.formulas.clone()),
    }
}

pub fn check_ai_proof(p: &AIProof, mode: CheckMode) -> Result<(), AffineError> {
    let mut path = Vec::new();
    check_at(&normalized(p), mode, &mut path)
}

fn normalized(p: &AIProof) -> AIProof {
    AIProof {
        conclusion: AISequent::new(p.formulas().iter().map(nf).collect()),
        rule: p.rule,
        premises: p.premises.iter().map(normalized).collect(),
    }
}

fn check_at(p: &AIProof, mode: CheckMode, path: &mut Vec<usize>) -> Result<(), AffineError> {
    let ok = match mode {
        CheckMode::Strict => strict(p),
        CheckMode::Relaxed => instance(p).map(|_| ()),
    };
    ok.map_err(|message| AffineError::Check { path: path.clone(), rule: p.rule.to_string(), message })?;
    for (i, q) in p.premises.iter().enumerate() {
        path.push(i);
        check_at(q, mode, path)?;
        path.pop();
    }
    Ok(())
}

fn arity(p: &AIProof) -> Result<(), String> {
    let want = match p.rule {
        AIRule::Axiom => 0,
        AIRule::ChoiceAndIntro { n } | AIRule::ParAndIntro { n } => n,
        AIRule::Cut | AIRule::ModusPonens => 2,
        _ => 1,
    };
    if p.premises.len() != want {
        return Err(format!("expected {want} premises, found {}", p.premises.len()));
    }
    match p.rule {
        AIRule::ChoiceOrIntro { i, n } if n < 2 || i < 1 || i > n => Err(format!("bad component {i} of {n}")),
        AIRule::ChoiceAndIntro { n } | AIRule::ParOrIntro { n } | AIRule::ParAndIntro { n } if n < 2 => {
            Err("at least two components".into())
        }
        _ => Ok(()),
    }
}

fn components(f: &Formula, rule: AIRule) -> Option<&Vec<Formula>> {
    match (rule, f) {
        (AIRule::ChoiceOrIntro { n, .. }, Formula::ChoiceOr(v))
        | (AIRule::ChoiceAndIntro { n }, Formula::ChoiceAnd(v))
        | (AIRule::ParOrIntro { n }, Formula::ParOr(v))
        | (AIRule::ParAndIntro { n }, Formula::ParAnd(v))
            if v.len() == n =>
        {
            Some(v)
        }
        _ => None,
    }
}

fn strict(p: &AIProof) -> Result<(), String> {
    arity(p)?;
    let c = p.formulas();
    let prem = |i: usize| p.premises[i].formulas();
    let split_last = |v: &[Formula]| -> Result<(Vec<Formula>, Formula), String> {
        let (l, g) = v.split_last().ok_or("empty sequent")?;
        Ok((g.to_vec(), l.clone()))
    };
    let need = |b: bool, msg: &str| if b { Ok(()) } else { Err(msg.to_string()) };
    match p.rule {
        AIRule::Axiom => need(c.len() == 2 && c[0] == dual(&c[1]), "an axiom is ¬E, E"),
        AIRule::Exchange => {
            let q = prem(0);
            let ok = q.len() == c.len()
                && (0..c.len().saturating_sub(1)).any(|i| {
                    let mut s = q.to_vec();
                    s.swap(i, i + 1);
                    s == c
                });
            need(ok, "conclusion is not an adjacent exchange of the premise")
        }
        AIRule::Weakening => {
            let (g, _) = split_last(c)?;
            need(g == prem(0), "premise must be the conclusion without its last formula")
        }
        AIRule::CobangContraction => {
            let (g, e) = split_last(c)?;
            let mut q = g.clone();
            q.push(e.clone());
            q.push(e.clone());
            need(matches!(e, Formula::Cobang(_)) && q == prem(0), "premise must be G, ?E, ?E")
        }
        AIRule::ChoiceOrIntro { i, .. } => {
            let (g, e) = split_last(c)?;
            let v = components(&e, p.rule).ok_or("principal formula has the wrong shape")?;
            let mut q = g;
            q.push(v[i - 1].clone());
            need(q == prem(0), "premise must be G, E_i")
        }
        AIRule::ChoiceAndIntro { .. } => {
            let (g, e) = split_last(c)?;
            let v = components(&e, p.rule).ok_or("principal formula has the wrong shape")?;
            for (j, vj) in v.iter().enumerate() {
                let mut q = g.clone();
                q.push(vj.clone());
                need(q == prem(j), &format!("premise {} must be G, E_{}", j + 1, j + 1))?;
            }
            Ok(())
        }
        AIRule::ParOrIntro { .. } => {
            let (g, e) = split_last(c)?;
            let v = components(&e, p.rule).ok_or("principal formula has the wrong shape")?;
            let q = [g, v.clone()].concat();
            need(q == prem(0), "premise must be G, E_1, ..., E_n")
        }
        AIRule::ParAndIntro { .. } => {
            let (g, e) = split_last(c)?;
            let v = components(&e, p.rule).ok_or("principal formula has the wrong shape")?;
            let mut ctx = Vec::new();
            for (j, vj) in v.iter().enumerate() {
                let (gj, ej) = split_last(prem(j))?;
                need(&ej == vj, &format!("premise {} must end with E_{}", j + 1, j + 1))?;
                ctx.extend(gj);
            }
            need(ctx == g, "contexts of the premises must concatenate to the conclusion's")
        }
        AIRule::CobangIntro | AIRule::BangIntro => {
            let (g, e) = split_last(c)?;
            let inner = match (&e, p.rule) {
                (Formula::Cobang(x), AIRule::CobangIntro) | (Formula::Bang(x), AIRule::BangIntro) => (**x).clone(),
                _ => return Err("principal formula has the wrong shape".into()),
            };
            if p.rule == AIRule::BangIntro && !g.iter().all(|x| matches!(x, Formula::Cobang(_))) {
                return Err("every context formula of a !-introduction must be ?-prefixed".into());
            }
            let mut q = g;
            q.push(inner);
            need(q == prem(0), "premise must be G, E")
        }
        AIRule::Cut => {
            let (g, e) = split_last(prem(0))?;
            let (ne, h) = prem(1).split_first().ok_or("empty premise")?;
            need(*ne == dual(&e), "second premise must start with the negation of the cut formula")?;
            need([g, h.to_vec()].concat() == c, "conclusion must be G, H")
        }
        AIRule::ModusPonens => instance(p).map(|_| ()),
    }
}

/// How the formulas of a rule application line up.
#[derive(Clone, Debug)]
struct Inst {
    principal: Option<usize>,
    /// Per premise: (premise slot, conclusion slot) of each side formula.
    ctx: Vec<Vec<(usize, usize)>>,
    /// Per premise: premise slots of the active formulas, in rule order.
    active: Vec<Vec<usize>>,
}

/// Distinct premise slots holding `targets`.
fn pick(prem: &[Formula], targets: &[Formula]) -> Option<Vec<usize>> {
    let mut used = vec![false; prem.len()];
    let mut out = Vec::new();
    for t in targets {
        let i = (0..prem.len()).find(|&i| !used[i] && prem[i] == *t)?;
        used[i] = true;
        out.push(i);
    }
    Some(out)
}

/// Matches the premise formulas outside `skip` onto conclusion slots in `avail`.
fn match_side(
    prem: &[Formula],
    skip: &[usize],
    concl: &[Formula],
    avail: &mut Vec<usize>,
) -> Option<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, f) in prem.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        let k = avail.iter().position(|&c| concl[c] == *f)?;
        out.push((i, avail.remove(k)));
    }
    Some(out)
}

/// Relaxed (multiset) reading of a node. Works on normalized proofs.
fn instance(p: &AIProof) -> Result<Inst, String> {
    arity(p)?;
    let c = p.formulas();
    let prem: Vec<&[Formula]> = p.premises.iter().map(|q| q.formulas()).collect();
    let all: Vec<usize> = (0..c.len()).collect();
    let without = |k: usize| -> Vec<usize> { all.iter().copied().filter(|&x| x != k).collect() };
    let single = |principal: Option<usize>, targets: &[Formula], avail: Vec<usize>| -> Option<Inst> {
        let act = pick(prem[0], targets)?;
        let mut avail = avail;
        let ctx = match_side(prem[0], &act, c, &mut avail)?;
        avail.is_empty().then(|| Inst { principal, ctx: vec![ctx], active: vec![act] })
    };
    let fail = |m: &str| Err(m.to_string());
    match p.rule {
        AIRule::Axiom => {
            if c.len() == 2 && c[0] == dual(&c[1]) {
                Ok(Inst { principal: None, ctx: vec![], active: vec![] })
            } else {
                fail("an axiom is ¬E, E")
            }
        }
        AIRule::Exchange => single(None, &[], all.clone()).ok_or("premise and conclusion differ as multisets".into()),
        AIRule::Weakening => {
            (0..c.len()).find_map(|k| single(Some(k), &[], without(k))).ok_or("no weakened formula fits".into())
        }
        AIRule::CobangContraction => (0..c.len())
            .filter(|&k| matches!(c[k], Formula::Cobang(_)))
            .find_map(|k| single(Some(k), &[c[k].clone(), c[k].clone()], without(k)))
            .ok_or("no contracted ?-formula fits".into()),
        AIRule::ChoiceOrIntro { i, .. } => (0..c.len())
            .find_map(|k| {
                let v = components(&c[k], p.rule)?;
                single(Some(k), &[v[i - 1].clone()], without(k))
            })
            .ok_or("no ⊔-formula fits".into()),
        AIRule::ParOrIntro { .. } => (0..c.len())
            .find_map(|k| {
                let v = components(&c[k], p.rule)?;
                single(Some(k), v, without(k))
            })
            .ok_or("no ∨-formula fits".into()),
        AIRule::CobangIntro | AIRule::BangIntro => (0..c.len())
            .find_map(|k| {
                let inner = match (&c[k], p.rule) {
                    (Formula::Cobang(x), AIRule::CobangIntro) | (Formula::Bang(x), AIRule::BangIntro) => (**x).clone(),
                    _ => return None,
                };
                if p.rule == AIRule::BangIntro && !without(k).iter().all(|&j| matches!(c[j], Formula::Cobang(_))) {
                    return None;
                }
                single(Some(k), &[inner], without(k))
            })
            .ok_or(if p.rule == AIRule::BangIntro {
                "no !-formula fits with a ?-prefixed context".into()
            } else {
                "no ?-formula fits".into()
            }),
        AIRule::ChoiceAndIntro { .. } => (0..c.len())
            .find_map(|k| {
                let v = components(&c[k], p.rule)?;
                let mut inst = Inst { principal: Some(k), ctx: vec![], active: vec![] };
                for (j, vj) in v.iter().enumerate() {
                    let act = pick(prem[j], std::slice::from_ref(vj))?;
                    let mut avail = without(k);
                    let ctx = match_side(prem[j], &act, c, &mut avail)?;
                    if !avail.is_empty() {
                        return None;
                    }
                    inst.ctx.push(ctx);
                    inst.active.push(act);
                }
                Some(inst)
            })
            .ok_or("no ⊓-formula fits".into()),
        AIRule::ParAndIntro { .. } => (0..c.len())
            .find_map(|k| {
                let v = components(&c[k], p.rule)?;
                let mut inst = Inst { principal: Some(k), ctx: vec![], active: vec![] };
                let mut avail = without(k);
                for (j, vj) in v.iter().enumerate() {
                    let act = pick(prem[j], std::slice::from_ref(vj))?;
                    inst.ctx.push(match_side(prem[j], &act, c, &mut avail)?);
                    inst.active.push(act);
                }
                avail.is_empty().then_some(inst)
            })
            .ok_or("no ∧-formula fits".into()),
        AIRule::Cut => (0..prem[0].len())
            .find_map(|s0| {
                let ne = dual(&prem[0][s0]);
                let s1 = prem[1].iter().position(|f| *f == ne)?;
                let mut avail = all.clone();
                let c0 = match_side(prem[0], &[s0], c, &mut avail)?;
                let c1 = match_side(prem[1], &[s1], c, &mut avail)?;
                avail.is_empty().then(|| Inst { principal: None, ctx: vec![c0, c1], active: vec![vec![s0], vec![s1]] })
            })
            .ok_or("no cut formula fits".into()),
        AIRule::ModusPonens => {
            let ok = c.len() == 1
                && prem[0].len() == 1
                && prem[1].len() == 1
                && matches!(&prem[1][0], Formula::ParOr(v) if v.len() == 2 && v[0] == dual(&prem[0][0]) && v[1] == c[0]);
            if ok {
                Ok(Inst { principal: Some(0), ctx: vec![vec![], vec![]], active: vec![vec![0], vec![0]] })
            } else {
                fail("modus ponens needs E and E -> F concluding F")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Proof building. Every helper yields a relaxed-valid node whose conclusion is
// the remaining context followed by the principal formula.

fn build_err(m: impl Into<String>) -> AffineError {
    AffineError::Build(m.into())
}

fn remove_one(v: &mut Vec<Formula>, f: &Formula) -> Result<(), AffineError> {
    let k = v.iter().position(|x| x == f).ok_or_else(|| build_err(format!("{f} is not in the sequent")))?;
    v.remove(k);
    Ok(())
}

/// `¬E, E`.
pub fn ax(e: &Formula) -> AIProof {
    let e = nf(e);
    AIProof::new(vec![dual(&e), e], AIRule::Axiom, vec![])
}

pub fn weaken(p: AIProof, e: &Formula) -> AIProof {
    let mut c = p.formulas().to_vec();
    c.push(nf(e));
    AIProof::new(c, AIRule::Weakening, vec![p])
}

/// `G, E` to `G, ?E`.
pub fn derelict(p: AIProof, e: &Formula) -> Result<AIProof, AffineError> {
    let mut c = p.formulas().to_vec();
    remove_one(&mut c, e)?;
    c.push(Formula::cobang(e.clone()));
    Ok(AIProof::new(c, AIRule::CobangIntro, vec![p]))
}

/// `?G, E` to `?G, !E`.
pub fn promote(p: AIProof, e: &Formula) -> Result<AIProof, AffineError> {
    let mut c = p.formulas().to_vec();
    remove_one(&mut c, e)?;
    if let Some(bad) = c.iter().find(|x| !matches!(x, Formula::Cobang(_))) {
        return Err(build_err(format!("context formula {bad} is not ?-prefixed")));
    }
    c.push(Formula::bang(e.clone()));
    Ok(AIProof::new(c, AIRule::BangIntro, vec![p]))
}

/// Merges two copies of the `?`-formula `qe`.
pub fn contract(p: AIProof, qe: &Formula) -> Result<AIProof, AffineError> {
    let mut c = p.formulas().to_vec();
    remove_one(&mut c, qe)?;
    remove_one(&mut c, qe)?;
    c.push(qe.clone());
    Ok(AIProof::new(c, AIRule::CobangContraction, vec![p]))
}

pub fn or_intro(p: AIProof, comps: &[Formula]) -> Result<AIProof, AffineError> {
    let mut c = p.formulas().to_vec();
    for f in comps {
        remove_one(&mut c, f)?;
    }
    c.push(Formula::ParOr(comps.to_vec()));
    Ok(AIProof::new(c, AIRule::ParOrIntro { n: comps.len() }, vec![p]))
}

/// Replaces `comps[i - 1]` by `⊔ comps`.
pub fn cor_intro(p: AIProof, comps: &[Formula], i: usize) -> Result<AIProof, AffineError> {
    let mut c = p.formulas().to_vec();
    remove_one(&mut c, &comps[i - 1])?;
    c.push(Formula::ChoiceOr(comps.to_vec()));
    Ok(AIProof::new(c, AIRule::ChoiceOrIntro { i, n: comps.len() }, vec![p]))
}

/// `∧`-introduction over premises with the given principal formulas.
pub fn and_intro(parts: Vec<(AIProof, Formula)>) -> Result<AIProof, AffineError> {
    let mut c = Vec::new();
    let mut comps = Vec::new();
    let mut prems = Vec::new();
    for (p, e) in parts {
        let mut g = p.formulas().to_vec();
        remove_one(&mut g, &e)?;
        c.extend(g);
        comps.push(e);
        prems.push(p);
    }
    let n = comps.len();
    c.push(Formula::ParAnd(comps));
    Ok(AIProof::new(c, AIRule::ParAndIntro { n }, prems))
}

/// `⊓`-introduction; the premises must share their context.
pub fn cand_intro(parts: Vec<(AIProof, Formula)>) -> Result<AIProof, AffineError> {
    let mut ctx: Option<AISequent> = None;
    let mut comps = Vec::new();
    let mut prems = Vec::new();
    for (p, e) in parts {
        let mut g = p.formulas().to_vec();
        remove_one(&mut g, &e)?;
        let g = AISequent::new(g);
        match &ctx {
            None => ctx = Some(g),
            Some(c0) if c0.same_multiset(&g) => {}
            Some(_) => return Err(build_err("⊓-introduction premises have different contexts")),
        }
        comps.push(e);
        prems.push(p);
    }
    let n = comps.len();
    let mut c = ctx.map(|s| s.formulas).unwrap_or_default();
    c.push(Formula::ChoiceAnd(comps));
    Ok(AIProof::new(c, AIRule::ChoiceAndIntro { n }, prems))
}

/// Cut on `e` (in `p0`) against `¬e` (in `p1`).
pub fn cut(p0: AIProof, e: &Formula, p1: AIProof) -> Result<AIProof, AffineError> {
    let mut g = p0.formulas().to_vec();
    remove_one(&mut g, e)?;
    let mut h = p1.formulas().to_vec();
    remove_one(&mut h, &dual(e))?;
    Ok(AIProof::new([g, h].concat(), AIRule::Cut, vec![p0, p1]))
}

pub fn modus_ponens(pe: AIProof, pef: AIProof) -> Result<AIProof, AffineError> {
    let f = match pef.formulas() {
        [Formula::ParOr(v)] if v.len() == 2 => v[1].clone(),
        _ => return Err(build_err("second premise must be a single implication")),
    };
    Ok(AIProof::new(vec![f], AIRule::ModusPonens, vec![pe, pef]))
}

/// Re-lists the conclusion in the given order (same multiset).
pub fn reorder(mut p: AIProof, order: &[Formula]) -> Result<AIProof, AffineError> {
    let target = AISequent::new(order.to_vec());
    if !p.conclusion.same_multiset(&target) {
        return Err(build_err(format!("cannot reorder {} as {}", p.conclusion, target)));
    }
    p.conclusion = target;
    Ok(p)
}

/// Builds `target` by `∨`-introductions from formulas already present.
pub fn fold(p: AIProof, target: &Formula) -> Result<AIProof, AffineError> {
    if p.formulas().contains(target) {
        return Ok(p);
    }
    let Formula::ParOr(v) = target else {
        return Err(build_err(format!("{target} is neither present nor a ∨-formula")));
    };
    let mut p = p;
    for c in v {
        p = fold(p, c)?;
    }
    or_intro(p, v)
}

/// `∧`-tree of axioms: proves `¬L1, ..., ¬Lm, target`, decomposing `target`
/// along `∧` down to the formulas in `leaves`.
fn conj_axioms(target: &Formula, leaves: &[Formula]) -> Result<AIProof, AffineError> {
    if leaves.contains(target) {
        return Ok(ax(target));
    }
    match target {
        Formula::ParAnd(v) => {
            let parts =
                v.iter().map(|x| Ok((conj_axioms(x, leaves)?, x.clone()))).collect::<Result<Vec<_>, AffineError>>()?;
            and_intro(parts)
        }
        _ => Ok(ax(target)),
    }
}

/// The multiset `fold(target)` will consume, given the formulas present.
fn fold_needs(target: &Formula, present: &[Formula], out: &mut Vec<Formula>) {
    match target {
        Formula::ParOr(v) if !present.contains(target) => {
            for c in v {
                fold_needs(c, present, out);
            }
        }
        _ => out.push(target.clone()),
    }
}

/// A proof of `¬lhs, rhs` from axioms for the `∧`-leaves of `¬lhs`, adjusting
/// the pool by weakening and `?`-contraction and folding `rhs`.
fn implication(lhs: &Formula, rhs: &Formula, leaves: &[Formula]) -> Result<AIProof, AffineError> {
    let nl = dual(lhs);
    let mut p = conj_axioms(&nl, leaves)?;
    let mut have = p.formulas().to_vec();
    remove_one(&mut have, &nl)?;
    let mut need = Vec::new();
    fold_needs(rhs, &have, &mut need);
    let mut missing = Vec::new();
    for f in &need {
        if remove_one(&mut have, f).is_err() {
            missing.push(f.clone());
        }
    }
    for f in have {
        if !matches!(f, Formula::Cobang(_)) {
            return Err(build_err(format!("surplus formula {f} cannot be contracted")));
        }
        p = contract(p, &f)?;
    }
    for f in missing {
        p = weaken(p, &f);
    }
    let p = fold(p, rhs)?;
    reorder(p, &[nl, rhs.clone()])
}

/// `G1..Gn => K` rendered over already embedded formulas.
pub fn sequent_image(ant: &[Formula], k: &Formula) -> Formula {
    let a: Vec<Formula> = ant.iter().map(|g| Formula::cobang(dual(g))).collect();
    match a.len() {
        0 => k.clone(),
        1 => Formula::ParOr(vec![a[0].clone(), k.clone()]),
        _ => Formula::ParOr(vec![Formula::ParOr(a), k.clone()]),
    }
}

/// `∧`-leaves of the negated image of `G => K`: `!G_i` and `¬K`.
fn image_leaves(ant: &[Formula], k: &Formula) -> Vec<Formula> {
    let mut v: Vec<Formula> = ant.iter().map(|g| Formula::bang(g.clone())).collect();
    v.push(dual(k));
    v
}

fn embed_all(v: &[Formula]) -> Vec<Formula> {
    v.iter().map(embed_formula).collect()
}

fn image(s: &IntSequent) -> (Vec<Formula>, Formula, Formula) {
    let ant = embed_all(&s.antecedent);
    let k = embed_formula(&s.succedent);
    let f = sequent_image(&ant, &k);
    (ant, k, f)
}

/// The parameters of a schema instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schema {
    /// `s-axiom`: `!K -> K` (as the sequent `?¬K, K`).
    AxiomLift { k: Formula },
    /// `s-wimp`: `F -> (E o- F)`.
    WeakImpIntro { e: Formula, f: Formula },
    /// `s-exchange`, `s-weakening`, `s-contraction`, `s-right-wimp`:
    /// `S(premise) -> S(conclusion)` for the structural Int rules and Right `o-`.
    Structural { id: &'static str, premise: IntSequent, conclusion: IntSequent },
    /// `s8`, for Left `o-` with `G, E => K1` and `H => K2`.
    LeftWeakImp { g: Vec<Formula>, h: Vec<Formula>, e: Formula, k1: Formula, k2: Formula },
    /// `s12`, for Left `⊔` with `G, E1 => K` and `G, E2 => K`.
    LeftChoiceOr { g: Vec<Formula>, e1: Formula, e2: Formula, k: Formula },
    /// `s-right-or`: `K_i -> K1 ⊔ K2`.
    ChoiceOrLift { k1: Formula, k2: Formula, i: usize },
    /// `s-left-and`: `?¬E_i -> ?(¬E1 ⊔ ¬E2)`.
    CobangChoice { e1: Formula, e2: Formula, i: usize },
    /// `s-right-and`: `(S(G => K1)) -> ((S(G => K2)) -> S(G => K1 ⊓ K2))`.
    RightChoiceAnd { g: Vec<Formula>, k1: Formula, k2: Formula },
    /// `s-dollar`: `¬$ -> ?¬$`.
    DollarCobang,
    /// `s27`: `!X ∧ (!Y ∧ ¬(Z ⊔ T)) -> (!X ∧ !Y) ∧ ¬(Z ⊔ T)` (AI formulas).
    Distribution { x: Formula, y: Formula, z: Formula, t: Formula },
    /// `s28`: `!(!P -> Q) -> !(!P -> Q) ∧ ... ∧ !(!P -> Q)` with `n` copies (AI formulas).
    Duplication { p: Formula, q: Formula, n: usize },
    /// `s24`: `(K o- (G1 o- ... (Gm o- W))) -> (!K -> S(G1..Gm => W))` (Int formulas).
    Currying { k: Formula, g: Vec<Formula>, w: Formula },
}

impl Schema {
    pub fn id(&self) -> &'static str {
        match self {
            Schema::AxiomLift { .. } => "s-axiom",
            Schema::WeakImpIntro { .. } => "s-wimp",
            Schema::Structural { id, .. } => id,
            Schema::LeftWeakImp { .. } => "s8",
            Schema::LeftChoiceOr { .. } => "s12",
            Schema::ChoiceOrLift { .. } => "s-right-or",
            Schema::CobangChoice { .. } => "s-left-and",
            Schema::RightChoiceAnd { .. } => "s-right-and",
            Schema::DollarCobang => "s-dollar",
            Schema::Distribution { .. } => "s27",
            Schema::Duplication { .. } => "s28",
            Schema::Currying { .. } => "s24",
        }
    }
}

pub const SCHEMA_IDS: [&str; 15] = [
    "s-axiom",
    "s-wimp",
    "s-exchange",
    "s-weakening",
    "s-contraction",
    "s-right-wimp",
    "s8",
    "s12",
    "s-right-or",
    "s-left-and",
    "s-right-and",
    "s-dollar",
    "s27",
    "s28",
    "s24",
];

fn arity_err(id: &str, m: impl Into<String>) -> AffineError {
    AffineError::Arity { id: id.to_string(), message: m.into() }
}

fn check_structural(id: &str, p: &IntSequent, c: &IntSequent) -> Result<(), AffineError> {
    let (pa, ca) = (&p.antecedent, &c.antecedent);
    let ok = match id {
        "s-exchange" => {
            p.succedent == c.succedent
                && pa.len() == ca.len()
                && (0..pa.len().saturating_sub(1)).any(|i| {
                    let mut v = pa.clone();
                    v.swap(i, i + 1);
                    &v == ca
                })
        }
        "s-weakening" => p.succedent == c.succedent && ca.len() == pa.len() + 1 && ca[..pa.len()] == pa[..],
        "s-contraction" => {
            p.succedent == c.succedent
                && pa.len() == ca.len() + 1
                && !ca.is_empty()
                && pa[..ca.len()] == ca[..]
                && pa.last() == ca.last()
        }
        "s-right-wimp" => match &c.succedent {
            Formula::WeakImp(e, k) => {
                **k == p.succedent && pa.len() == ca.len() + 1 && pa[..ca.len()] == ca[..] && pa.last() == Some(&**e)
            }
            _ => false,
        },
        _ => return Err(AffineError::UnknownSchema(id.to_string())),
    };
    if ok {
        Ok(())
    } else {
        Err(arity_err(id, format!("{p} and {c} do not fit the schema")))
    }
}

pub fn schema_proof(s: &Schema) -> Result<AIProof, AffineError> {
    let id = s.id();
    match s {
        Schema::AxiomLift { k } => {
            let k = nf(k);
            let nk = dual(&k);
            let p = derelict(ax(&k), &nk)?;
            reorder(p, &[Formula::cobang(nk), k])
        }
        Schema::WeakImpIntro { e, f } => {
            let (e, f) = (embed_formula(e), embed_formula(f));
            implication(&f, &sequent_image(&[e], &f), &[dual(&f)])
        }
        Schema::Structural { id, premise, conclusion } => {
            check_structural(id, premise, conclusion)?;
            let (pa, pk, pf) = image(premise);
            let (_, _, cf) = image(conclusion);
            implication(&pf, &cf, &image_leaves(&pa, &pk))
        }
        Schema::LeftWeakImp { g, h, e, k1, k2 } => left_weak_imp_proof(g, h, e, k1, k2),
        Schema::LeftChoiceOr { g, e1, e2, k } => left_choice_or_proof(g, e1, e2, k),
        Schema::ChoiceOrLift { k1, k2, i } => {
            if !(1..=2).contains(i) {
                return Err(arity_err(id, "i must be 1 or 2"));
            }
            let ks = [embed_formula(k1), embed_formula(k2)];
            let ki = &ks[i - 1];
            let p = cor_intro(ax(ki), &ks, *i)?;
            reorder(p, &[dual(ki), Formula::ChoiceOr(ks.to_vec())])
        }
        Schema::CobangChoice { e1, e2, i } => {
            if !(1..=2).contains(i) {
                return Err(arity_err(id, "i must be 1 or 2"));
            }
            let es = [embed_formula(e1), embed_formula(e2)];
            let ns = [dual(&es[0]), dual(&es[1])];
            let ei = &es[i - 1];
            let or = Formula::ChoiceOr(ns.to_vec());
            let p = cor_intro(ax(ei), &ns, *i)?;
            let p = derelict(p, &or)?;
            let p = promote(p, ei)?;
            reorder(p, &[Formula::bang(ei.clone()), Formula::cobang(or)])
        }
        Schema::RightChoiceAnd { g, k1, k2 } => s_right_and(g, k1, k2),
        Schema::DollarCobang => {
            let nd = dual(&Formula::dollar());
            let p = derelict(ax(&nd), &nd)?;
            reorder(p, &[Formula::dollar(), Formula::cobang(nd)])
        }
        Schema::Distribution { x, y, z, t } => {
            let (x, y, z, t) = (nf(x), nf(y), nf(z), nf(t));
            let bx = Formula::bang(x);
            let by = Formula::bang(y);
            let nzt = dual(&Formula::ChoiceOr(vec![z, t]));
            let lhs = Formula::ParAnd(vec![bx.clone(), Formula::ParAnd(vec![by.clone(), nzt.clone()])]);
            let rhs = Formula::ParAnd(vec![Formula::ParAnd(vec![bx.clone(), by.clone()]), nzt.clone()]);
            implication_rev(&lhs, &rhs, &[bx, by, nzt])
        }
        Schema::Duplication { p, q, n } => {
            if *n == 0 {
                return Err(arity_err(id, "n must be positive"));
            }
            let one = Formula::bang(Formula::ParOr(vec![Formula::cobang(dual(&nf(p))), nf(q)]));
            let rhs = if *n == 1 { one.clone() } else { Formula::ParAnd(vec![one.clone(); *n]) };
            implication_rev(&one, &rhs, std::slice::from_ref(&one))
        }
        Schema::Currying { k, g, w } => {
            let mut lhs = w.clone();
            for gi in g.iter().rev() {
                lhs = Formula::wimp(gi.clone(), lhs);
            }
            let lhs = embed_formula(&Formula::wimp(k.clone(), lhs));
            let (ga, wa) = (embed_all(g), embed_formula(w));
            let ka = embed_formula(k);
            let rhs = Formula::ParOr(vec![Formula::cobang(dual(&ka)), sequent_image(&ga, &wa)]);
            let mut leaves = vec![Formula::bang(ka)];
            leaves.extend(ga.iter().map(|x| Formula::bang(x.clone())));
            leaves.push(dual(&wa));
            implication(&lhs, &rhs, &leaves)
        }
    }
}

/// `¬lhs, rhs` where `rhs` is an `∧`-tree over `leaves` and `¬lhs` a `∨`-tree.
fn implication_rev(lhs: &Formula, rhs: &Formula, leaves: &[Formula]) -> Result<AIProof, AffineError> {
    let mut p = conj_axioms(rhs, leaves)?;
    let nl = dual(lhs);
    let mut have = p.formulas().to_vec();
    remove_one(&mut have, rhs)?;
    let mut need = Vec::new();
    fold_needs(&nl, &have, &mut need);
    for f in &need {
        let _ = remove_one(&mut have, f);
    }
    // Surplus copies are `?`-formulas produced by duplicated axioms.
    for f in have {
        p = contract(p, &f)?;
    }
    let p = fold(p, &nl)?;
    reorder(p, &[nl, rhs.clone()])
}

/// The derivation behind (8), generalized to any lengths of G and H.
fn left_weak_imp_proof(
    g: &[Formula],
    h: &[Formula],
    e: &Formula,
    k1: &Formula,
    k2: &Formula,
) -> Result<AIProof, AffineError> {
    let (g, h) = (embed_all(g), embed_all(h));
    let (e, k1, k2) = (embed_formula(e), embed_formula(k1), embed_formula(k2));
    let bang = |x: &Formula| Formula::bang(x.clone());
    let seq_p1 = sequent_image(&[g.clone(), vec![e.clone()]].concat(), &k1);
    let seq_p2 = sequent_image(&h, &k2);
    let seq_c = sequent_image(&[g.clone(), h.clone(), vec![Formula::wimp(k2.clone(), e.clone())]].concat(), &k1);
    let seq_c = nf(&seq_c);
    let (nk1, nk2, ne) = (dual(&k1), dual(&k2), dual(&e));

    // 1-5: ?(!H ∧ ¬K2), ?¬H, !K2
    let s1 = ax(&k2);
    let n_p2 = dual(&seq_p2);
    let s3 = match h.len() {
        0 => s1,
        1 => and_intro(vec![(ax(&bang(&h[0])), bang(&h[0])), (s1, nk2.clone())])?,
        _ => {
            let hs: Vec<Formula> = h.iter().map(bang).collect();
            let s2 = and_intro(hs.iter().map(|x| (ax(x), x.clone())).collect())?;
            and_intro(vec![(s2, Formula::ParAnd(hs)), (s1, nk2.clone())])?
        }
    };
    let s4 = derelict(s3, &n_p2)?;
    let s5 = promote(s4, &k2)?;
    // 6-9: !E, ?(!K2 ∧ ¬E)
    let s6 = ax(&e);
    let conj = Formula::ParAnd(vec![bang(&k2), ne.clone()]);
    let s7 = and_intro(vec![(s5, bang(&k2)), (s6, ne)])?;
    let s8 = derelict(s7, &conj)?;
    let s9 = promote(s8, &e)?;
    // 10-13: (!G ∧ !E) ∧ ¬K1
    let s11 = if g.is_empty() {
        s9
    } else {
        let mut parts: Vec<(AIProof, Formula)> = g.iter().map(|x| (ax(&bang(x)), bang(x))).collect();
        parts.push((s9, bang(&e)));
        and_intro(parts)?
    };
    let x = match g.len() {
        0 => bang(&e),
        _ => Formula::ParAnd([g.iter().map(bang).collect::<Vec<_>>(), vec![bang(&e)]].concat()),
    };
    let s12 = ax(&k1);
    let s13 = and_intro(vec![(s11, x), (s12, nk1)])?;
    // 14
    let target = Formula::ParOr(vec![dual(&seq_p1), Formula::ParOr(vec![Formula::cobang(n_p2), seq_c])]);
    let p = fold(s13, &target)?;
    reorder(p, &[target])
}

/// The derivation behind (12), generalized to any length of G.
fn left_choice_or_proof(g: &[Formula], e1: &Formula, e2: &Formula, k: &Formula) -> Result<AIProof, AffineError> {
    let g = embed_all(g);
    let (e1, e2, k) = (embed_formula(e1), embed_formula(e2), embed_formula(k));
    let bang = |x: &Formula| Formula::bang(x.clone());
    let seq1 = sequent_image(&[g.clone(), vec![e1.clone()]].concat(), &k);
    let seq2 = sequent_image(&[g.clone(), vec![e2.clone()]].concat(), &k);
    let (n1, n2) = (dual(&seq1), dual(&seq2));
    let half = |ei: &Formula, other: &Formula| -> Result<AIProof, AffineError> {
        let mut parts: Vec<(AIProof, Formula)> = g.iter().map(|x| (ax(&bang(x)), bang(x))).collect();
        parts.push((ax(&bang(ei)), bang(ei)));
        let (s1, x) = if parts.len() == 1 {
            (parts.pop().unwrap().0, bang(ei))
        } else {
            let comps: Vec<Formula> = parts.iter().map(|(_, f)| f.clone()).collect();
            (and_intro(parts)?, Formula::ParAnd(comps))
        };
        let s2 = and_intro(vec![(s1, x), (ax(&k), dual(&k))])?;
        Ok(weaken(s2, other))
    };
    let s3 = half(&e1, &n2)?;
    let s4 = half(&e2, &n1)?;
    let q1 = Formula::cobang(dual(&e1));
    let q2 = Formula::cobang(dual(&e2));
    let s5 = cand_intro(vec![(s3, q1.clone()), (s4, q2.clone())])?;
    let mut inner: Vec<Formula> = g.iter().map(|x| Formula::cobang(dual(x))).collect();
    inner.push(Formula::ChoiceAnd(vec![q1, q2]));
    let left = if inner.len() == 1 { inner.pop().unwrap() } else { Formula::ParOr(inner) };
    let r = Formula::ParOr(vec![left, k]);
    let target = Formula::ParOr(vec![n1, Formula::ParOr(vec![n2, r])]);
    let p = fold(s5, &target)?;
    reorder(p, &[target])
}

fn s_right_and(g: &[Formula], k1: &Formula, k2: &Formula) -> Result<AIProof, AffineError> {
    let g = embed_all(g);
    let (k1, k2) = (embed_formula(k1), embed_formula(k2));
    let (s1, s2) = (sequent_image(&g, &k1), sequent_image(&g, &k2));
    let (n1, n2) = (dual(&s1), dual(&s2));
    let p1 = weaken(conj_axioms(&n1, &image_leaves(&g, &k1))?, &n2);
    let p2 = weaken(conj_axioms(&n2, &image_leaves(&g, &k2))?, &n1);
    let p = cand_intro(vec![(p1, k1.clone()), (p2, k2.clone())])?;
    let sc = sequent_image(&g, &Formula::ChoiceAnd(vec![k1, k2]));
    let rhs = Formula::ParOr(vec![n2, sc]);
    let p = fold(p, &rhs)?;
    reorder(p, &[n1, rhs])
}

/// Checks that `occ` addresses a positive occurrence in `h1`.
fn check_occurrence(h1: &Formula, occ: &[usize]) -> Result<(), AffineError> {
    let mut f = h1;
    for (d, &i) in occ.iter().enumerate() {
        if matches!(f, Formula::Neg(_)) {
            return Err(AffineError::NotPositive(occ.to_vec()));
        }
        f = f.children().get(i).copied().ok_or_else(|| AffineError::BadOccurrence(occ[..=d].to_vec()))?;
    }
    Ok(())
}

/// A proof of `?(G1 ∧ ¬G2), ¬H1, H2`, where `H2` is `H1` with the positive
/// occurrence at `occ` (a child-index path) replaced by `G2`.
pub fn replacement_proof(g1: &Formula, g2: &Formula, h1: &Formula, occ: &[usize]) -> Result<AIProof, AffineError> {
    let (g1, g2, h1) = (nf(g1), nf(g2), nf(h1));
    check_occurrence(&h1, occ)?;
    if h1.at(occ) != Some(&g1) {
        return Err(AffineError::BadOccurrence(occ.to_vec()));
    }
    let h2 = h1.replace_at(occ, g2.clone()).ok_or_else(|| AffineError::BadOccurrence(occ.to_vec()))?;
    let p = replacement(&g1, &g2, &h1, occ)?;
    let key = Formula::cobang(Formula::ParAnd(vec![g1, dual(&g2)]));
    reorder(p, &[key, dual(&h1), h2])
}

/// `?(G1 ∧ ¬G2), H1 -> H2`: the replacement sequent with its last two formulas joined.
pub fn replacement_implication(
    g1: &Formula,
    g2: &Formula,
    h1: &Formula,
    occ: &[usize],
) -> Result<AIProof, AffineError> {
    let p = replacement_proof(g1, g2, h1, occ)?;
    let c = p.formulas().to_vec();
    let p = or_intro(p, &c[1..])?;
    let f = p.formulas().to_vec();
    reorder(p, &[c[0].clone(), f[f.len() - 1].clone()])
}

fn replacement(g1: &Formula, g2: &Formula, h1: &Formula, occ: &[usize]) -> Result<AIProof, AffineError> {
    let Some((&i, rest)) = occ.split_first() else {
        // Case 1.
        let p = and_intro(vec![(ax(g1), g1.clone()), (ax(&dual(g2)), dual(g2))])?;
        return derelict(p, &Formula::ParAnd(vec![g1.clone(), dual(g2)]));
    };
    let sub = &h1.children()[i].clone();
    let e1i = nf(sub);
    let e2i = e1i.replace_at(rest, g2.clone()).ok_or_else(|| AffineError::BadOccurrence(occ.to_vec()))?;
    // (3)/(4): ?(G1 ∧ ¬G2), !(¬E1 ∨ E2)
    let ih = replacement(g1, g2, &e1i, rest)?;
    let (ne1, ne2) = (dual(&e1i), dual(&e2i));
    let imp = Formula::ParOr(vec![ne1.clone(), e2i.clone()]);
    let lemma = promote(or_intro(ih, &[ne1.clone(), e2i.clone()])?, &imp)?;
    let cut_on = Formula::bang(imp);
    let key = Formula::ParAnd(vec![e1i.clone(), ne2.clone()]);
    let base = || and_intro(vec![(ax(&e1i), e1i.clone()), (ax(&ne2), ne2.clone())]);
    let others = |v: &Vec<Formula>| -> Vec<Formula> { v.iter().map(nf).collect() };
    let p = match h1 {
        Formula::Bang(_) => {
            let p = derelict(base()?, &key)?;
            let p = derelict(p, &ne1)?;
            promote(p, &e2i)?
        }
        Formula::Cobang(_) => {
            let p = derelict(base()?, &key)?;
            let p = derelict(p, &e2i)?;
            promote(p, &ne1)?
        }
        Formula::ParAnd(v) => {
            let v1 = others(v);
            let mut v2 = v1.clone();
            v2[i] = e2i.clone();
            let s3 = and_intro(v2.iter().map(|x| (ax(x), x.clone())).collect())?;
            let s5 = and_intro(vec![(ax(&e1i), e1i.clone()), (s3, ne2.clone())])?;
            let s6 = derelict(s5, &key)?;
            let negs: Vec<Formula> = v1.iter().map(dual).collect();
            or_intro(s6, &negs)?
        }
        Formula::ParOr(v) => {
            let v1 = others(v);
            let mut v2 = v1.clone();
            v2[i] = e2i.clone();
            let parts = v1
                .iter()
                .enumerate()
                .map(|(j, x)| Ok(if j == i { (base()?, dual(x)) } else { (ax(&dual(x)), dual(x)) }))
                .collect::<Result<Vec<_>, AffineError>>()?;
            let p = and_intro(parts)?;
            let p = derelict(p, &key)?;
            or_intro(p, &v2)?
        }
        Formula::ChoiceAnd(v) => {
            let v1 = others(v);
            let mut v2 = v1.clone();
            v2[i] = e2i.clone();
            let negs: Vec<Formula> = v1.iter().map(dual).collect();
            let mut parts = Vec::new();
            for (j, x) in v2.iter().enumerate() {
                let p = if j == i {
                    cor_intro(base()?, &negs, i + 1)?
                } else {
                    cor_intro(weaken(ax(x), &key), &negs, j + 1)?
                };
                parts.push((p, x.clone()));
            }
            derelict(cand_intro(parts)?, &key)?
        }
        Formula::ChoiceOr(v) => {
            let v1 = others(v);
            let mut v2 = v1.clone();
            v2[i] = e2i.clone();
            let mut parts = Vec::new();
            for (j, x) in v1.iter().enumerate() {
                let p = if j == i {
                    cor_intro(base()?, &v2, i + 1)?
                } else {
                    cor_intro(weaken(ax(&dual(x)), &key), &v2, j + 1)?
                };
                parts.push((p, dual(x)));
            }
            derelict(cand_intro(parts)?, &key)?
        }
        _ => return Err(AffineError::NotPositive(occ.to_vec())),
    };
    cut(lemma, &cut_on, p)
}

// ---------------------------------------------------------------------------
// Strategy extraction. A node's strategy plays its conclusion with formula k
// at address `k` (1-based).

fn slot(k: usize) -> Vec<Seg> {
    vec![Seg::Index(k as u32 + 1)]
}

fn ctx_ports(n: &mut Network, child: usize, pairs: &[(usize, usize)]) {
    for &(ps, cs) in pairs {
        n.port(child, slot(ps), slot(cs), Thread::Same);
    }
}

fn build(p: &AIProof) -> BoxStrategy {
    let inst = instance(p).expect("extraction needs a checked proof");
    let child = |i: usize| build(&p.premises[i]);
    let pc = inst.principal.unwrap_or(0);
    match p.rule {
        AIRule::Axiom => Box::new(CopyCat::between(slot(0), slot(1))),
        AIRule::Exchange | AIRule::Weakening => {
            let mut n = Network::new(vec![child(0)]);
            ctx_ports(&mut n, 0, &inst.ctx[0]);
            n.boxed()
        }
        AIRule::CobangContraction => {
            let mut n = Network::new(vec![child(0)]);
            n.init(Move([slot(pc), vec![Seg::Split(Bits::empty())]].concat()));
            ctx_ports(&mut n, 0, &inst.ctx[0]);
            let (a, b) = (inst.active[0][0], inst.active[0][1]);
            n.port(0, slot(a), slot(pc), Thread::Under(Bits(vec![false])));
            n.port(0, slot(b), slot(pc), Thread::Under(Bits(vec![true])));
            n.boxed()
        }
        AIRule::ChoiceOrIntro { i, .. } => {
            let mut n = Network::new(vec![child(0)]);
            n.init(Move([slot(pc), vec![Seg::Index(i as u32)]].concat()));
            ctx_ports(&mut n, 0, &inst.ctx[0]);
            n.port(0, slot(inst.active[0][0]), slot(pc), Thread::Same);
            n.boxed()
        }
        AIRule::ChoiceAndIntro { .. } => {
            let branches = (0..p.premises.len())
                .map(|j| {
                    let mut n = Network::new(vec![child(j)]);
                    ctx_ports(&mut n, 0, &inst.ctx[j]);
                    n.port(0, slot(inst.active[j][0]), slot(pc), Thread::Same);
                    n.boxed()
                })
                .collect();
            Box::new(AwaitChoice::new(slot(pc), branches))
        }
        AIRule::ParOrIntro { .. } => {
            let mut n = Network::new(vec![child(0)]);
            ctx_ports(&mut n, 0, &inst.ctx[0]);
            for (j, &a) in inst.active[0].iter().enumerate() {
                n.port(0, slot(a), [slot(pc), vec![Seg::Index(j as u32 + 1)]].concat(), Thread::Same);
            }
            n.boxed()
        }
        AIRule::ParAndIntro { .. } => {
            let mut n = Network::new((0..p.premises.len()).map(child).collect());
            for j in 0..p.premises.len() {
                ctx_ports(&mut n, j, &inst.ctx[j]);
                n.port(j, slot(inst.active[j][0]), [slot(pc), vec![Seg::Index(j as u32 + 1)]].concat(), Thread::Same);
            }
            n.boxed()
        }
        AIRule::CobangIntro => {
            let mut n = Network::new(vec![child(0)]);
            ctx_ports(&mut n, 0, &inst.ctx[0]);
            n.port(0, slot(inst.active[0][0]), slot(pc), Thread::Derelict);
            n.boxed()
        }
        AIRule::BangIntro => {
            let ctx = inst.ctx[0].iter().map(|&(ps, cs)| (slot(ps), slot(cs))).collect();
            Box::new(Promotion::new(child(0), slot(inst.active[0][0]), slot(pc), ctx))
        }
        AIRule::Cut => {
            let mut n = Network::new(vec![child(0), child(1)]);
            ctx_ports(&mut n, 0, &inst.ctx[0]);
            ctx_ports(&mut n, 1, &inst.ctx[1]);
            n.wire((0, slot(inst.active[0][0])), (1, slot(inst.active[1][0])));
            n.boxed()
        }
        AIRule::ModusPonens => {
            let mut n = Network::new(vec![child(0), child(1)]);
            n.wire((0, slot(0)), (1, vec![Seg::Index(1), Seg::Index(1)]));
            n.port(1, vec![Seg::Index(1), Seg::Index(2)], slot(0), Thread::Same);
            n.boxed()
        }
    }
}

/// A strategy for the game of the proof's conclusion, read as one formula
/// (the `∨` of its formulas when there are several).
///
/// Panics if the proof does not pass the relaxed checker.
pub fn ai_to_strategy(p: &AIProof) -> BoxStrategy {
    let p = normalized(p);
    let s = build(&p);
    if p.formulas().len() == 1 {
        let mut n = Network::new(vec![s]);
        n.port(0, slot(0), vec![], Thread::Same);
        n.boxed()
    } else {
        s
    }
}
