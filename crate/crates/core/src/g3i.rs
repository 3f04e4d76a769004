//! The labelled intuitionistic fragment: formulas, two-sided sequents as vertex
//! labels, the sequent relations of its rules, and the explicit and implicit
//! calculi built from them.
//!
//! Label syntax is `p, q -> r => (p | q), bot` with `->` right associative and
//! binding weakest, then `|`, then `&`.

use std::fmt;

use crate::calculus::{f_op, Calculus};
use crate::gsequent::{Alphabet, Delta, SequentLabel};
use crate::rewriting::{EdgeString, Symbol};
use crate::rules::{EdgeLanguage, Relation, Rule, SequentRelation, StructuralConstraint};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Bot,
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(p: &str) -> Self {
        Formula::Atom(p.to_string())
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    fn is_binary(&self) -> bool {
        matches!(self, Formula::Or(..) | Formula::And(..) | Formula::Imp(..))
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_binary() {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, op, b) = match self {
            Formula::Atom(p) => return f.write_str(p),
            Formula::Bot => return f.write_str("bot"),
            Formula::Or(a, b) => (a, "|", b),
            Formula::And(a, b) => (a, "&", b),
            Formula::Imp(a, b) => (a, "->", b),
        };
        a.fmt_child(f)?;
        write!(f, " {op} ")?;
        b.fmt_child(f)
    }
}

/// `X => Y` with both sides kept sorted, so equal multisets compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequent {
    pub ant: Vec<Formula>,
    pub suc: Vec<Formula>,
}

impl Sequent {
    pub fn new(mut ant: Vec<Formula>, mut suc: Vec<Formula>) -> Self {
        ant.sort();
        suc.sort();
        Sequent { ant, suc }
    }

    pub fn add_ant(&self, f: Formula) -> Self {
        let mut s = self.clone();
        s.ant.push(f);
        s.ant.sort();
        s
    }

    pub fn add_suc(&self, f: Formula) -> Self {
        let mut s = self.clone();
        s.suc.push(f);
        s.suc.sort();
        s
    }

    /// Remove one occurrence from the antecedent.
    pub fn drop_ant(&self, f: &Formula) -> Option<Self> {
        let i = self.ant.iter().position(|x| x == f)?;
        let mut s = self.clone();
        s.ant.remove(i);
        Some(s)
    }

    pub fn drop_suc(&self, f: &Formula) -> Option<Self> {
        let i = self.suc.iter().position(|x| x == f)?;
        let mut s = self.clone();
        s.suc.remove(i);
        Some(s)
    }

    pub fn label(&self) -> SequentLabel {
        SequentLabel(self.to_string())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let (l, r) = text.split_once("=>").ok_or_else(|| format!("`{text}` has no `=>`"))?;
        let side = |s: &str| -> Result<Vec<Formula>, String> {
            let toks = tokenize(s)?;
            if toks.is_empty() {
                return Ok(Vec::new());
            }
            let mut p = Parser { toks, pos: 0 };
            let mut out = vec![p.imp()?];
            while p.eat(&Tok::Comma) {
                out.push(p.imp()?);
            }
            if p.pos != p.toks.len() {
                return Err(format!("trailing input in `{s}`"));
            }
            Ok(out)
        };
        Ok(Sequent::new(side(l)?, side(r)?))
    }

    pub fn from_label(l: &SequentLabel) -> Option<Self> {
        Sequent::parse(l.as_str()).ok()
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Formula]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        match (self.ant.is_empty(), self.suc.is_empty()) {
            (true, true) => write!(f, "=>"),
            (true, false) => write!(f, "=> {}", join(&self.suc)),
            (false, true) => write!(f, "{} =>", join(&self.ant)),
            (false, false) => write!(f, "{} => {}", join(&self.ant), join(&self.suc)),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, String> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let f = p.imp()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input in `{text}`"));
    }
    Ok(f)
}

/// Canonical label text for `ant => suc` given as formula strings.
pub fn sequent(ant: &[&str], suc: &[&str]) -> SequentLabel {
    let parse = |xs: &[&str]| xs.iter().map(|x| parse_formula(x).expect("formula")).collect();
    Sequent::new(parse(ant), parse(suc)).label()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Or,
    And,
    Imp,
    Comma,
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            '|' => {
                out.push(Tok::Or);
                i += 1
            }
            '&' => {
                out.push(Tok::And);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            '-' if cs.get(i + 1) == Some(&'>') => {
                out.push(Tok::Imp);
                i += 2
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(cs[start..i].iter().collect()));
            }
            c => return Err(format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn eat(&mut self, t: &Tok) -> bool {
        if self.toks.get(self.pos) == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn imp(&mut self) -> Result<Formula, String> {
        let a = self.or()?;
        if self.eat(&Tok::Imp) {
            Ok(Formula::imp(a, self.imp()?))
        } else {
            Ok(a)
        }
    }

    fn or(&mut self) -> Result<Formula, String> {
        let mut a = self.and()?;
        while self.eat(&Tok::Or) {
            a = Formula::or(a, self.and()?);
        }
        Ok(a)
    }

    fn and(&mut self) -> Result<Formula, String> {
        let mut a = self.atom()?;
        while self.eat(&Tok::And) {
            a = Formula::and(a, self.atom()?);
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Formula, String> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.imp()?;
                if !self.eat(&Tok::RParen) {
                    return Err("missing `)`".into());
                }
                Ok(f)
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(if s == "bot" { Formula::Bot } else { Formula::Atom(s) })
            }
            other => Err(format!("expected a formula, found {other:?}")),
        }
    }
}

fn parse_all(args: &[&SequentLabel]) -> Option<Vec<Sequent>> {
    args.iter().map(|l| Sequent::from_label(l)).collect()
}

/// `(id)`: some atom on the left at the first vertex is on the right at the second.
pub struct IdRel;

impl SequentRelation for IdRel {
    fn name(&self) -> &str {
        "g3i.id"
    }

    fn holds(&self, args: &[&SequentLabel], _delta: &Delta) -> bool {
        let Some(s) = parse_all(args) else { return false };
        s.len() == 2 && s[0].ant.iter().any(|f| matches!(f, Formula::Atom(_)) && s[1].suc.contains(f))
    }
}

/// `(or_l)`: the premises replace one disjunction on the left by either disjunct.
pub struct OrLeftRel;

fn or_l_rows(s: &Sequent) -> Vec<[Sequent; 2]> {
    let mut rows: Vec<[Sequent; 2]> = Vec::new();
    for f in &s.ant {
        if let Formula::Or(a, b) = f {
            let rest = s.drop_ant(f).unwrap();
            let row = [rest.add_ant((**a).clone()), rest.add_ant((**b).clone())];
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
    }
    rows
}

impl SequentRelation for OrLeftRel {
    fn name(&self) -> &str {
        "g3i.or_l"
    }

    fn holds(&self, args: &[&SequentLabel], _delta: &Delta) -> bool {
        let Some(s) = parse_all(args) else { return false };
        s.len() == 3 && or_l_rows(&s[2]).iter().any(|r| r[0] == s[0] && r[1] == s[1])
    }

    fn synthesize(&self, conclusion: &[&SequentLabel], premises: usize, _delta: &Delta) -> Option<Vec<Vec<SequentLabel>>> {
        let s = parse_all(conclusion)?;
        if premises != 2 || s.len() != 1 {
            return Some(Vec::new());
        }
        Some(or_l_rows(&s[0]).into_iter().map(|[a, b]| vec![a.label(), b.label()]).collect())
    }
}

/// `(imp_r)`: the new vertex holds `phi => psi` for an implication dropped on the right.
pub struct ImpRightRel;

fn imp_r_rows(s: &Sequent) -> Vec<[Sequent; 2]> {
    let mut rows: Vec<[Sequent; 2]> = Vec::new();
    for f in &s.suc {
        if let Formula::Imp(a, b) = f {
            let row = [s.drop_suc(f).unwrap(), Sequent::new(vec![(**a).clone()], vec![(**b).clone()])];
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
    }
    rows
}

impl SequentRelation for ImpRightRel {
    fn name(&self) -> &str {
        "g3i.imp_r"
    }

    fn holds(&self, args: &[&SequentLabel], _delta: &Delta) -> bool {
        let Some(s) = parse_all(args) else { return false };
        s.len() == 3 && imp_r_rows(&s[2]).iter().any(|r| r[0] == s[0] && r[1] == s[1])
    }

    fn synthesize(&self, conclusion: &[&SequentLabel], _premises: usize, _delta: &Delta) -> Option<Vec<Vec<SequentLabel>>> {
        let s = parse_all(conclusion)?;
        Some(s.first().map(imp_r_rows).unwrap_or_default().into_iter().map(|[a, b]| vec![a.label(), b.label()]).collect())
    }
}

/// `(imp_l)`: an implication on the left at `w` sends its antecedent to the right
/// at `u` in one premise and its consequent to the left at `u` in the other.
///
/// When `w` and `u` are the same vertex both updates land on that one sequent, so
/// a premise's `w` sequent may equal its `u` sequent instead of the conclusion's.
pub struct ImpLeftRel;

fn imp_l_rows(s: &Sequent, t: &Sequent) -> Vec<[Sequent; 4]> {
    let mut rows: Vec<[Sequent; 4]> = Vec::new();
    for f in &s.ant {
        if let Formula::Imp(a, b) = f {
            let left = t.add_suc((**a).clone());
            let right = t.add_ant((**b).clone());
            let row = [s.clone(), left.clone(), s.clone(), right.clone()];
            if !rows.contains(&row) {
                rows.push(row);
            }
            if s == t {
                let row = [left.clone(), left, right.clone(), right];
                if !rows.contains(&row) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

impl SequentRelation for ImpLeftRel {
    fn name(&self) -> &str {
        "g3i.imp_l"
    }

    fn holds(&self, args: &[&SequentLabel], _delta: &Delta) -> bool {
        let Some(s) = parse_all(args) else { return false };
        s.len() == 6 && imp_l_rows(&s[4], &s[5]).iter().any(|r| r[..] == s[..4])
    }

    fn synthesize(&self, conclusion: &[&SequentLabel], premises: usize, _delta: &Delta) -> Option<Vec<Vec<SequentLabel>>> {
        let s = parse_all(conclusion)?;
        if premises != 2 || s.len() != 2 {
            return Some(Vec::new());
        }
        Some(imp_l_rows(&s[0], &s[1]).into_iter().map(|r| r.iter().map(Sequent::label).collect()).collect())
    }
}

pub fn relations() -> Vec<Relation> {
    vec![Relation::new(IdRel), Relation::new(OrLeftRel), Relation::new(ImpRightRel), Relation::new(ImpLeftRel)]
}

fn rel(name: &str) -> Relation {
    relations().into_iter().find(|r| r.name() == name).expect("built-in relation")
}

/// `(ref)`: a reflexive loop may be assumed.
pub fn ref_rule() -> Rule {
    Rule::horn_forward("ref", "E", EdgeString::empty())
}

/// `(tra)`: a two-step path may be shortcut.
pub fn tra_rule() -> Rule {
    Rule::horn_forward("tra", "E", EdgeString(vec![Symbol::fwd("E"), Symbol::fwd("E")]))
}

/// The fragment with `id`, `or_l`, `imp_l`, `imp_r`, and in the explicit variant
/// also `ref` and `tra`. The implicit variant absorbs the latter two.
pub fn build_g3i(explicit: bool) -> Calculus {
    let rules = vec![
        Rule::initial("id", StructuralConstraint::single_edge("w", "u", EdgeLanguage::plain("E")), rel("g3i.id")),
        Rule::local("or_l", rel("g3i.or_l"), 2),
        Rule::reachability("imp_l", vec![EdgeLanguage::plain("E"), EdgeLanguage::plain("E")], rel("g3i.imp_l")),
        Rule::expansion("imp_r", rel("g3i.imp_r"), Symbol::fwd("E")),
        ref_rule(),
        tra_rule(),
    ];
    let c = Calculus::new("g3i", Alphabet::new(["E"]), rules).expect("well-formed calculus");
    if explicit {
        c
    } else {
        let mut top = f_op(&c, &["ref".to_string(), "tra".to_string()].into()).expect("Horn rules present");
        top.name = "g3i-implicit".into();
        top
    }
}
