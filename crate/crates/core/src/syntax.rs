//! Formulas and sequents of the intuitionistic (Int) and affine (AI) languages.
//!
//! Int formulas are built from atoms with `&`, `|` and `o-`. AI formulas add
//! negation, the parallel connectives and the two recurrences. `o-` and `->`
//! are kept abstract in Int mode and expanded while parsing AI text.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `$` or one of the canonical nonlogical atoms `P1, P2, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    Dollar,
    P(u32),
}

impl Atom {
    pub fn index(self) -> Option<u32> {
        match self {
            Atom::Dollar => None,
            Atom::P(i) => Some(i),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Dollar => write!(f, "$"),
            Atom::P(i) => write!(f, "P{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom(Atom),
    Neg(Box<Formula>),
    ChoiceAnd(Vec<Formula>),
    ChoiceOr(Vec<Formula>),
    ParAnd(Vec<Formula>),
    ParOr(Vec<Formula>),
    Bang(Box<Formula>),
    Cobang(Box<Formula>),
    /// `E o- F`: F is reducible to E with E reusable. Int only.
    WeakImp(Box<Formula>, Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn p(i: u32) -> Formula {
        Atom(self::Atom::P(i))
    }
    pub fn dollar() -> Formula {
        Atom(self::Atom::Dollar)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn neg(f: Formula) -> Formula {
        Neg(Box::new(f))
    }
    pub fn bang(f: Formula) -> Formula {
        Bang(Box::new(f))
    }
    pub fn cobang(f: Formula) -> Formula {
        Cobang(Box::new(f))
    }
    pub fn wimp(e: Formula, f: Formula) -> Formula {
        WeakImp(Box::new(e), Box::new(f))
    }
    /// `E -> F`, i.e. `~E \/ F`.
    pub fn arrow(e: Formula, f: Formula) -> Formula {
        ParOr(vec![Formula::neg(e), f])
    }
    pub fn cand(a: Formula, b: Formula) -> Formula {
        ChoiceAnd(vec![a, b])
    }
    pub fn cor(a: Formula, b: Formula) -> Formula {
        ChoiceOr(vec![a, b])
    }

    /// Right-nested binary `&` over a nonempty list; a single element is returned as is.
    pub fn cand_nested(mut items: Vec<Formula>) -> Formula {
        assert!(!items.is_empty());
        let mut acc = items.pop().unwrap();
        while let Some(f) = items.pop() {
            acc = Formula::cand(f, acc);
        }
        acc
    }

    pub fn atoms(&self) -> BTreeSet<self::Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<self::Atom>) {
        match self {
            Atom(a) => {
                out.insert(*a);
            }
            Neg(f) | Bang(f) | Cobang(f) => f.collect_atoms(out),
            ChoiceAnd(v) | ChoiceOr(v) | ParAnd(v) | ParOr(v) => v.iter().for_each(|f| f.collect_atoms(out)),
            WeakImp(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn has_dollar(&self) -> bool {
        self.atoms().contains(&self::Atom::Dollar)
    }

    /// Number of connective occurrences (each list node counts arity - 1).
    pub fn connectives(&self) -> usize {
        match self {
            Atom(_) => 0,
            Neg(f) | Bang(f) | Cobang(f) => 1 + f.connectives(),
            ChoiceAnd(v) | ChoiceOr(v) | ParAnd(v) | ParOr(v) => {
                v.len().saturating_sub(1) + v.iter().map(|f| f.connectives()).sum::<usize>()
            }
            WeakImp(a, b) => 1 + a.connectives() + b.connectives(),
        }
    }

    /// True for formulas of the Int language: atoms, binary `&`, `|` and `o-`.
    pub fn is_int(&self) -> bool {
        match self {
            Atom(_) => true,
            ChoiceAnd(v) | ChoiceOr(v) => v.len() == 2 && v.iter().all(|f| f.is_int()),
            WeakImp(a, b) => a.is_int() && b.is_int(),
            _ => false,
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Atom(_) => vec![],
            Neg(f) | Bang(f) | Cobang(f) => vec![f],
            ChoiceAnd(v) | ChoiceOr(v) | ParAnd(v) | ParOr(v) => v.iter().collect(),
            WeakImp(a, b) => vec![a, b],
        }
    }

    /// Subformula at a child-index path.
    pub fn at(&self, path: &[usize]) -> Option<&Formula> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at(rest)),
        }
    }

    /// Copy of `self` with the subformula at `path` replaced.
    pub fn replace_at(&self, path: &[usize], new: Formula) -> Option<Formula> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(new);
        };
        let mut out = self.clone();
        {
            let slot: &mut Formula = match &mut out {
                Atom(_) => return None,
                Neg(f) | Bang(f) | Cobang(f) if i == 0 => f,
                ChoiceAnd(v) | ChoiceOr(v) | ParAnd(v) | ParOr(v) if i < v.len() => &mut v[i],
                WeakImp(a, _) if i == 0 => a,
                WeakImp(_, b) if i == 1 => b,
                _ => return None,
            };
            *slot = slot.replace_at(rest, new)?;
        }
        Some(out)
    }

    /// All distinct subformulas, children before parents.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        fn go(f: &Formula, out: &mut Vec<Formula>) {
            for c in f.children() {
                go(c, out);
            }
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        go(self, &mut out);
        out
    }
}

/// `G1, ..., Gn => K` over Int formulas.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntSequent {
    pub antecedent: Vec<Formula>,
    pub succedent: Formula,
}

impl IntSequent {
    pub fn new(antecedent: Vec<Formula>, succedent: Formula) -> Self {
        IntSequent { antecedent, succedent }
    }
    pub fn goal(k: Formula) -> Self {
        IntSequent { antecedent: vec![], succedent: k }
    }
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.succedent.atoms();
        for g in &self.antecedent {
            s.extend(g.atoms());
        }
        s
    }
}

/// One-sided AI sequent. Order matters only to the strict checker.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AISequent {
    pub formulas: Vec<Formula>,
}

impl AISequent {
    pub fn new(formulas: Vec<Formula>) -> Self {
        AISequent { formulas }
    }

    pub fn sorted(&self) -> Vec<Formula> {
        let mut v = self.formulas.clone();
        v.sort();
        v
    }

    pub fn same_multiset(&self, other: &AISequent) -> bool {
        self.sorted() == other.sorted()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Int,
    AI,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedInt {
    Formula(Formula),
    Sequent(IntSequent),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Atom(Atom),
    LParen,
    RParen,
    Amp,
    Bar,
    WeakImp,
    Tilde,
    Wedge,
    Vee,
    Arrow,
    Bang,
    Quest,
    Comma,
    Turnstile,
}

impl Tok {
    fn describe(&self) -> &'static str {
        match self {
            Tok::Atom(_) => "atom",
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::Amp => "'&'",
            Tok::Bar => "'|'",
            Tok::WeakImp => "'o-'",
            Tok::Tilde => "'~'",
            Tok::Wedge => "'/\\'",
            Tok::Vee => "'\\/'",
            Tok::Arrow => "'->'",
            Tok::Bang => "'!'",
            Tok::Quest => "'?'",
            Tok::Comma => "','",
            Tok::Turnstile => "'=>'",
        }
    }
    fn ai_only(&self) -> bool {
        matches!(self, Tok::Tilde | Tok::Wedge | Tok::Vee | Tok::Arrow | Tok::Bang | Tok::Quest)
    }
}

fn err(offset: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError { offset, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &[u8]| b[i..].starts_with(s);
        let tok = if c == b'P' {
            i += 1;
            let d0 = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if i == d0 {
                return Err(err(start, "expected digits after 'P'"));
            }
            let n: u32 = text[d0..i].parse().map_err(|_| err(d0, "atom index out of range"))?;
            if n == 0 {
                return Err(err(d0, "atom indices start at 1"));
            }
            out.push((start, Tok::Atom(Atom::P(n))));
            continue;
        } else if c == b'$' {
            Tok::Atom(Atom::Dollar)
        } else if two(b"o-") {
            i += 1;
            Tok::WeakImp
        } else if two(b"->") {
            i += 1;
            Tok::Arrow
        } else if two(b"=>") {
            i += 1;
            Tok::Turnstile
        } else if two(b"/\\") {
            i += 1;
            Tok::Wedge
        } else if two(b"\\/") {
            i += 1;
            Tok::Vee
        } else {
            match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'&' => Tok::Amp,
                b'|' => Tok::Bar,
                b'~' => Tok::Tilde,
                b'!' => Tok::Bang,
                b'?' => Tok::Quest,
                b',' => Tok::Comma,
                _ => return Err(err(start, format!("unexpected character {:?}", c as char))),
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }
    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn unexpected(&self) -> SyntaxError {
        match self.peek() {
            None => err(self.end, "unexpected end of input"),
            Some(t) => err(self.offset(), format!("unexpected {}", t.describe())),
        }
    }

    // o-  (right associative, loosest)
    fn weakimp(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.arrow()?;
        if self.eat(&Tok::WeakImp) {
            let rhs = self.weakimp()?;
            return Ok(match self.mode {
                Mode::Int => Formula::wimp(lhs, rhs),
                Mode::AI => Formula::arrow(Formula::bang(lhs), rhs),
            });
        }
        Ok(lhs)
    }

    // ->  (right associative)
    fn arrow(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.list(0)?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.arrow()?;
            return Ok(Formula::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    // levels: 0 = \/, 1 = /\, 2 = |, 3 = &
    fn list(&mut self, level: usize) -> Result<Formula, SyntaxError> {
        if level == 4 {
            return self.unary();
        }
        let (tok, build): (Tok, fn(Vec<Formula>) -> Formula) = match level {
            0 => (Tok::Vee, ParOr),
            1 => (Tok::Wedge, ParAnd),
            2 => (Tok::Bar, ChoiceOr),
            _ => (Tok::Amp, ChoiceAnd),
        };
        let mut items = vec![self.list(level + 1)?];
        while self.eat(&tok) {
            items.push(self.list(level + 1)?);
        }
        if items.len() == 1 {
            return Ok(items.pop().unwrap());
        }
        if self.mode == Mode::Int {
            // binary, right nested
            let mut acc = items.pop().unwrap();
            while let Some(f) = items.pop() {
                acc = build(vec![f, acc]);
            }
            return Ok(acc);
        }
        Ok(build(items))
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let off = self.offset();
        match self.peek().cloned() {
            Some(t) if t.ai_only() && self.mode == Mode::Int => {
                Err(err(off, format!("{} is not an Int connective", t.describe())))
            }
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::neg(self.unary()?))
            }
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::bang(self.unary()?))
            }
            Some(Tok::Quest) => {
                self.pos += 1;
                Ok(Formula::cobang(self.unary()?))
            }
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                Ok(Atom(a))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.weakimp()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.unexpected());
                }
                Ok(f)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn check_mode(&self) -> Result<(), SyntaxError> {
        if self.mode == Mode::Int {
            if let Some((o, t)) = self.toks.iter().find(|(_, t)| t.ai_only()) {
                return Err(err(*o, format!("{} is not an Int connective", t.describe())));
            }
        }
        Ok(())
    }
}

fn parser(text: &str, mode: Mode) -> Result<Parser, SyntaxError> {
    let p = Parser { toks: lex(text)?, pos: 0, end: text.len(), mode };
    p.check_mode()?;
    Ok(p)
}

/// Parses an Int formula or an Int sequent (`G1, G2 => K`, `=> K`).
pub fn parse_int(text: &str) -> Result<ParsedInt, SyntaxError> {
    let mut p = parser(text, Mode::Int)?;
    let mut ante = Vec::new();
    let mut sequent = false;
    if p.eat(&Tok::Turnstile) {
        sequent = true;
    } else {
        loop {
            ante.push(p.weakimp()?);
            if p.eat(&Tok::Comma) {
                continue;
            }
            if p.eat(&Tok::Turnstile) {
                sequent = true;
            }
            break;
        }
    }
    if !sequent {
        if ante.len() != 1 || p.peek().is_some() {
            return Err(p.unexpected());
        }
        return Ok(ParsedInt::Formula(ante.pop().unwrap()));
    }
    let succ = p.weakimp()?;
    if p.peek().is_some() {
        return Err(p.unexpected());
    }
    Ok(ParsedInt::Sequent(IntSequent::new(ante, succ)))
}

pub fn parse_int_formula(text: &str) -> Result<Formula, SyntaxError> {
    match parse_int(text)? {
        ParsedInt::Formula(f) => Ok(f),
        ParsedInt::Sequent(_) => Err(err(0, "expected a formula, found a sequent")),
    }
}

/// Sequent form; a bare formula `K` is read as `=> K`.
pub fn parse_int_sequent(text: &str) -> Result<IntSequent, SyntaxError> {
    Ok(match parse_int(text)? {
        ParsedInt::Formula(f) => IntSequent::goal(f),
        ParsedInt::Sequent(s) => s,
    })
}

pub fn parse_ai(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = parser(text, Mode::AI)?;
    let f = p.weakimp()?;
    if p.peek().is_some() {
        return Err(p.unexpected());
    }
    Ok(f)
}

pub fn parse_ai_sequent(text: &str) -> Result<AISequent, SyntaxError> {
    let mut p = parser(text, Mode::AI)?;
    let mut fs = vec![p.weakimp()?];
    while p.eat(&Tok::Comma) {
        fs.push(p.weakimp()?);
    }
    if p.peek().is_some() {
        return Err(p.unexpected());
    }
    Ok(AISequent::new(fs))
}

// Printing. Binding strength, loosest first.
const P_WEAKIMP: u8 = 0;
const P_ARROW: u8 = 1;
const P_VEE: u8 = 2;
const P_WEDGE: u8 = 3;
const P_BAR: u8 = 4;
const P_AMP: u8 = 5;
const P_UNARY: u8 = 6;

fn as_arrow(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        ParOr(v) if v.len() == 2 => match &v[0] {
            Neg(a) => Some((a, &v[1])),
            _ => None,
        },
        _ => None,
    }
}

fn prec(f: &Formula) -> u8 {
    match f {
        Atom(_) | Neg(_) | Bang(_) | Cobang(_) => P_UNARY,
        WeakImp(..) => P_WEAKIMP,
        ParOr(_) if as_arrow(f).is_some() => P_ARROW,
        ParOr(_) => P_VEE,
        ParAnd(_) => P_WEDGE,
        ChoiceOr(_) => P_BAR,
        ChoiceAnd(_) => P_AMP,
    }
}

/// Writes `f`, parenthesized unless its strength is at least `min`
/// (strictly above `min` when `strict`).
fn write_at(f: &Formula, min: u8, strict: bool, out: &mut String) {
    let p = prec(f);
    let paren = if strict { p <= min } else { p < min };
    if paren {
        out.push('(');
    }
    match f {
        Atom(a) => out.push_str(&a.to_string()),
        Neg(g) | Bang(g) | Cobang(g) => {
            out.push(match f {
                Neg(_) => '~',
                Bang(_) => '!',
                _ => '?',
            });
            write_at(g, P_UNARY, false, out);
        }
        WeakImp(a, b) => {
            write_at(a, P_WEAKIMP, true, out);
            out.push_str(" o- ");
            write_at(b, P_WEAKIMP, false, out);
        }
        ParOr(_) if p == P_ARROW => {
            let (a, b) = as_arrow(f).unwrap();
            write_at(a, P_ARROW, true, out);
            out.push_str(" -> ");
            write_at(b, P_ARROW, false, out);
        }
        ChoiceAnd(v) | ChoiceOr(v) | ParAnd(v) | ParOr(v) => {
            let sep = match f {
                ChoiceAnd(_) => " & ",
                ChoiceOr(_) => " | ",
                ParAnd(_) => " /\\ ",
                _ => " \\/ ",
            };
            for (i, g) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_at(g, p, true, out);
            }
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_at(self, P_WEAKIMP, false, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for IntSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ante: Vec<String> = self.antecedent.iter().map(|g| g.to_string()).collect();
        if ante.is_empty() {
            write!(f, "=> {}", self.succedent)
        } else {
            write!(f, "{} => {}", ante.join(", "), self.succedent)
        }
    }
}

impl fmt::Display for AISequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.formulas.iter().map(|g| g.to_string()).collect();
        f.write_str(&v.join(", "))
    }
}

/// Pushes negation down to atoms, expanding `o-` on the way.
pub fn normalize_negation(f: &Formula) -> Formula {
    norm(f, false)
}

fn norm(f: &Formula, negated: bool) -> Formula {
    let map = |v: &Vec<Formula>| v.iter().map(|g| norm(g, negated)).collect::<Vec<_>>();
    match (f, negated) {
        (Atom(_), false) => f.clone(),
        (Atom(_), true) => Formula::neg(f.clone()),
        (Neg(g), _) => norm(g, !negated),
        (ChoiceAnd(v), false) | (ChoiceOr(v), true) => ChoiceAnd(map(v)),
        (ChoiceOr(v), false) | (ChoiceAnd(v), true) => ChoiceOr(map(v)),
        (ParAnd(v), false) | (ParOr(v), true) => ParAnd(map(v)),
        (ParOr(v), false) | (ParAnd(v), true) => ParOr(map(v)),
        (Bang(g), false) | (Cobang(g), true) => Formula::bang(norm(g, negated)),
        (Cobang(g), false) | (Bang(g), true) => Formula::cobang(norm(g, negated)),
        (WeakImp(a, b), false) => ParOr(vec![Formula::cobang(norm(a, true)), norm(b, false)]),
        (WeakImp(a, b), true) => ParAnd(vec![Formula::bang(norm(a, false)), norm(b, true)]),
    }
}

/// Image of an Int formula in the AI language, negation-normalized.
pub fn embed_formula(f: &Formula) -> Formula {
    normalize_negation(f)
}

/// `G1..Gn => K` becomes `K'`, `?~G1' \/ K'` or `(?~G1' \/ ... \/ ?~Gn') \/ K'`.
pub fn embed_sequent(s: &IntSequent) -> Formula {
    let k = embed_formula(&s.succedent);
    let ante: Vec<Formula> =
        s.antecedent.iter().map(|g| Formula::cobang(normalize_negation(&Formula::neg(g.clone())))).collect();
    match ante.len() {
        0 => k,
        1 => ParOr(vec![ante.into_iter().next().unwrap(), k]),
        _ => ParOr(vec![ParOr(ante), k]),
    }
}

/// The `k` index-smallest nonlogical atoms not in `avoid`.
pub fn fresh_atoms(k: usize, avoid: &BTreeSet<Atom>) -> Vec<Atom> {
    (1..).map(Atom::P).filter(|a| !avoid.contains(a)).take(k).collect()
}
