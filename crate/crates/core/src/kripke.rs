//! Finite tree-shaped Kripke models for Int, forcing, and bounded countermodel search.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::syntax::{Atom, Formula, IntSequent};

/// Worlds are `1..=n`; `parent[i - 1]` is the parent of world `i` (0 for the root).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeModel {
    pub n: usize,
    pub parent: Vec<usize>,
    pub forcing: BTreeSet<(usize, Atom)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model must have between 1 and 64 worlds")]
    Size,
    #[error("world {0} has an invalid parent")]
    Parent(usize),
    #[error("world {0} forces $")]
    Dollar(usize),
    #[error("forcing of {1} at world {0} is not inherited by its children")]
    Monotone(usize, Atom),
    #[error("{0}")]
    Format(String),
}

impl KripkeModel {
    pub fn new(parent: Vec<usize>, forcing: BTreeSet<(usize, Atom)>) -> Result<Self, ModelError> {
        let m = KripkeModel { n: parent.len(), parent, forcing };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 || self.n > 64 || self.parent.len() != self.n {
            return Err(ModelError::Size);
        }
        if self.parent[0] != 0 {
            return Err(ModelError::Parent(1));
        }
        // parents must precede children so the relation is a tree rooted at 1
        for w in 2..=self.n {
            let p = self.parent[w - 1];
            if p == 0 || p >= w {
                return Err(ModelError::Parent(w));
            }
        }
        for &(w, a) in &self.forcing {
            if w == 0 || w > self.n {
                return Err(ModelError::Format(format!("world {w} out of range")));
            }
            if a == Atom::Dollar {
                return Err(ModelError::Dollar(w));
            }
        }
        for w in 2..=self.n {
            let p = self.parent[w - 1];
            for &(v, a) in self.forcing.range((p, Atom::Dollar)..(p + 1, Atom::Dollar)) {
                debug_assert_eq!(v, p);
                if !self.forcing.contains(&(w, a)) {
                    return Err(ModelError::Monotone(p, a));
                }
            }
        }
        Ok(())
    }

    /// Bitmask of worlds accessible from `p` (including `p`).
    pub fn accessible(&self, p: usize) -> u64 {
        let mut mask = 1u64 << (p - 1);
        for w in p + 1..=self.n {
            if mask >> (self.parent[w - 1] - 1) & 1 == 1 {
                mask |= 1 << (w - 1);
            }
        }
        mask
    }

    fn all(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Bitmask of worlds forcing `f`.
    pub fn eval(&self, f: &Formula) -> u64 {
        match f {
            Formula::Atom(Atom::Dollar) => 0,
            Formula::Atom(a) => self.forcing.iter().filter(|(_, b)| b == a).fold(0, |m, (w, _)| m | 1 << (w - 1)),
            Formula::ChoiceAnd(v) => v.iter().fold(self.all(), |m, g| m & self.eval(g)),
            Formula::ChoiceOr(v) => v.iter().fold(0, |m, g| m | self.eval(g)),
            Formula::WeakImp(e, k) => self.imp_mask(self.eval(e), self.eval(k)),
            other => panic!("not an Int-formula: {other}"),
        }
    }

    fn imp_mask(&self, e: u64, k: u64) -> u64 {
        let bad = e & !k;
        (1..=self.n).filter(|&p| self.accessible(p) & bad == 0).fold(0, |m, p| m | 1 << (p - 1))
    }

    pub fn forces(&self, p: usize, f: &Formula) -> bool {
        self.eval(f) >> (p - 1) & 1 == 1
    }

    pub fn forces_sequent(&self, p: usize, s: &IntSequent) -> bool {
        let ante = s.antecedent.iter().fold(self.all(), |m, g| m & self.eval(g));
        let k = self.eval(&s.succedent);
        self.accessible(p) & ante & !k == 0
    }

    pub fn equivalent(&self, e: &Formula, f: &Formula) -> bool {
        self.eval(e) == self.eval(f)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "parent": self.parent,
            "forcing": self.forcing.iter().map(|(w, a)| json!([w, a.to_string()])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ModelError> {
        let bad = |m: &str| ModelError::Format(m.to_string());
        let parent: Vec<usize> = v["parent"]
            .as_array()
            .ok_or_else(|| bad("missing parent array"))?
            .iter()
            .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| bad("bad parent entry")))
            .collect::<Result<_, _>>()?;
        if let Some(n) = v.get("n").and_then(|n| n.as_u64()) {
            if n as usize != parent.len() {
                return Err(bad("n does not match parent array"));
            }
        }
        let mut forcing = BTreeSet::new();
        for e in v["forcing"].as_array().ok_or_else(|| bad("missing forcing list"))? {
            let w = e[0].as_u64().ok_or_else(|| bad("bad world"))? as usize;
            let a = e[1].as_str().ok_or_else(|| bad("bad atom"))?;
            let atom = match crate::syntax::parse_int_formula(a) {
                Ok(Formula::Atom(x)) => x,
                _ => return Err(bad("bad atom")),
            };
            forcing.insert((w, atom));
        }
        KripkeModel::new(parent, forcing)
    }
}

impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(m: &KripkeModel, w: usize, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let atoms: Vec<String> = m.forcing.iter().filter(|(v, _)| *v == w).map(|(_, a)| a.to_string()).collect();
            writeln!(f, "{}{} {{{}}}", "  ".repeat(depth), w, atoms.join(", "))?;
            for c in w + 1..=m.n {
                if m.parent[c - 1] == w {
                    go(m, c, depth + 1, f)?;
                }
            }
            Ok(())
        }
        go(self, 1, 0, f)
    }
}

/// Rooted tree models up to duplicate-sibling and same-label-chain reduction,
/// listed by size. Every model of size `s` agrees at its root with some type of
/// size at most `s`.
struct Universe {
    labels: u32,
    label: Vec<u32>,
    children: Vec<Vec<u32>>,
    size: Vec<usize>,
    /// `upto[s]` = number of types of size `<= s`.
    upto: Vec<usize>,
}

impl Universe {
    fn new(k: usize) -> Self {
        Universe { labels: 1 << k, label: vec![], children: vec![], size: vec![], upto: vec![0] }
    }

    fn grow_to(&mut self, s: usize) {
        while self.upto.len() <= s {
            let size = self.upto.len();
            let before = self.label.len();
            for l in 0..self.labels {
                let cands: Vec<u32> = (0..before as u32).filter(|&t| self.label[t as usize] & l == l).collect();
                let mut picked = Vec::new();
                self.gen(l, &cands, 0, size - 1, &mut picked);
            }
            self.upto.push(self.label.len());
        }
    }

    fn gen(&mut self, l: u32, cands: &[u32], start: usize, budget: usize, picked: &mut Vec<u32>) {
        if budget == 0 {
            if picked.len() == 1 && self.label[picked[0] as usize] == l {
                return;
            }
            self.label.push(l);
            self.children.push(picked.clone());
            self.size.push(1 + picked.iter().map(|&c| self.size[c as usize]).sum::<usize>());
            return;
        }
        for i in start..cands.len() {
            let c = cands[i];
            let sz = self.size[c as usize];
            if sz <= budget {
                picked.push(c);
                self.gen(l, cands, i + 1, budget - sz, picked);
                picked.pop();
            }
        }
    }
}

fn universe(k: usize, size: usize) -> Arc<Mutex<Universe>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Mutex<Universe>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let u = cache.lock().unwrap().entry(k).or_insert_with(|| Arc::new(Mutex::new(Universe::new(k)))).clone();
    u.lock().unwrap().grow_to(size);
    u
}

enum Sub {
    False,
    Var(u32),
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
}

/// The sequent as a flat formula DAG over atom bits; the last entry is the
/// sequent itself read as `(G1 & ... & Gn) o- K`.
fn compile(s: &IntSequent, atoms: &[Atom]) -> Vec<Sub> {
    let mut subs = Vec::new();
    let mut ids: HashMap<Formula, usize> = HashMap::new();
    fn go(f: &Formula, atoms: &[Atom], subs: &mut Vec<Sub>, ids: &mut HashMap<Formula, usize>) -> usize {
        if let Some(&i) = ids.get(f) {
            return i;
        }
        let node = match f {
            Formula::Atom(Atom::Dollar) => Sub::False,
            Formula::Atom(a) => Sub::Var(atoms.iter().position(|b| b == a).unwrap() as u32),
            Formula::ChoiceAnd(v) => {
                let a = go(&v[0], atoms, subs, ids);
                let b = go(&v[1], atoms, subs, ids);
                Sub::And(a, b)
            }
            Formula::ChoiceOr(v) => {
                let a = go(&v[0], atoms, subs, ids);
                let b = go(&v[1], atoms, subs, ids);
                Sub::Or(a, b)
            }
            Formula::WeakImp(e, k) => {
                let a = go(e, atoms, subs, ids);
                let b = go(k, atoms, subs, ids);
                Sub::Imp(a, b)
            }
            other => panic!("not an Int-formula: {other}"),
        };
        subs.push(node);
        ids.insert(f.clone(), subs.len() - 1);
        subs.len() - 1
    }
    let k = go(&s.succedent, atoms, &mut subs, &mut ids);
    let mut ante: Option<usize> = None;
    for g in &s.antecedent {
        let gi = go(g, atoms, &mut subs, &mut ids);
        ante = Some(match ante {
            None => gi,
            Some(a) => {
                subs.push(Sub::And(a, gi));
                subs.len() - 1
            }
        });
    }
    match ante {
        None => {
            // `K` alone: read as `(K o- K) o- K`, i.e. forced iff K is forced below.
            let t = subs.len();
            subs.push(Sub::Imp(k, k));
            subs.push(Sub::Imp(t, k));
        }
        Some(a) => subs.push(Sub::Imp(a, k)),
    }
    subs
}

/// Size of the smallest countermodel of `s` with at most `max_size` worlds.
pub fn countermodel_size(s: &IntSequent, max_size: usize) -> Option<usize> {
    let atoms: Vec<Atom> = s.atoms().into_iter().filter(|a| *a != Atom::Dollar).collect();
    let subs = compile(s, &atoms);
    let u = universe(atoms.len(), max_size);
    let u = u.lock().unwrap();
    let ntypes = u.upto[max_size];
    // val[f][t]
    let mut val: Vec<Vec<bool>> = vec![Vec::with_capacity(ntypes); subs.len()];
    for t in 0..ntypes {
        for (i, sub) in subs.iter().enumerate() {
            let v = match *sub {
                Sub::False => false,
                Sub::Var(b) => u.label[t] >> b & 1 == 1,
                Sub::And(a, b) => val[a][t] && val[b][t],
                Sub::Or(a, b) => val[a][t] || val[b][t],
                Sub::Imp(a, b) => (!val[a][t] || val[b][t]) && u.children[t].iter().all(|&c| val[i][c as usize]),
            };
            val[i].push(v);
        }
        if !val[subs.len() - 1][t] {
            return Some(u.size[t]);
        }
    }
    None
}

/// Smallest countermodel (then least by parent array and per-world labels) of
/// `s` with at most `max_size` worlds.
pub fn countermodel(s: &IntSequent, max_size: usize) -> Option<KripkeModel> {
    let size = countermodel_size(s, max_size)?;
    let atoms: Vec<Atom> = s.atoms().into_iter().filter(|a| *a != Atom::Dollar).collect();
    let mut parent = vec![0usize];
    let mut found = None;
    frames(size, &mut parent, &mut |parent| {
        let mut labels = vec![0u32; size];
        labelings(parent, atoms.len(), 0, &mut labels, &mut |labels| {
            let mut forcing = BTreeSet::new();
            for (w, &l) in labels.iter().enumerate() {
                for (b, a) in atoms.iter().enumerate() {
                    if l >> b & 1 == 1 {
                        forcing.insert((w + 1, *a));
                    }
                }
            }
            let m = KripkeModel { n: size, parent: parent.to_vec(), forcing };
            if !m.forces_sequent(1, s) {
                found = Some(m);
                return true;
            }
            false
        })
    });
    found
}

/// Trees on `1..=n` numbered in preorder, in lexicographic order of parent arrays.
/// The callback returns true to stop.
fn frames(n: usize, parent: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    let w = parent.len() + 1;
    if w > n {
        return f(parent);
    }
    // in preorder the parent of w is w-1 or one of its ancestors
    let mut path = vec![w - 1];
    while let Some(&x) = path.last() {
        let p = parent[x - 1];
        if p == 0 {
            break;
        }
        path.push(p);
    }
    path.sort();
    for p in path {
        parent.push(p);
        if frames(n, parent, f) {
            return true;
        }
        parent.pop();
    }
    false
}

fn labelings(parent: &[usize], k: usize, w: usize, labels: &mut Vec<u32>, f: &mut dyn FnMut(&[u32]) -> bool) -> bool {
    if w == parent.len() {
        return f(labels);
    }
    let base = if w == 0 { 0 } else { labels[parent[w] - 1] };
    for l in 0..1u32 << k {
        if l & base == base {
            labels[w] = l;
            if labelings(parent, k, w + 1, labels, f) {
                return true;
            }
        }
    }
    false
}

/// Every tree frame of size `n` with every monotone labeling over `atoms`.
pub fn all_models(n: usize, atoms: &[Atom], f: &mut dyn FnMut(&KripkeModel)) {
    let mut parent = vec![0usize];
    frames(n, &mut parent, &mut |parent| {
        let mut labels = vec![0u32; n];
        labelings(parent, atoms.len(), 0, &mut labels, &mut |labels| {
            let mut forcing = BTreeSet::new();
            for (w, &l) in labels.iter().enumerate() {
                for (b, a) in atoms.iter().enumerate() {
                    if l >> b & 1 == 1 {
                        forcing.insert((w + 1, *a));
                    }
                }
            }
            f(&KripkeModel { n, parent: parent.to_vec(), forcing });
            false
        });
        false
    });
}
