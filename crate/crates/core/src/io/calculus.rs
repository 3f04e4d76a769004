use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::calculus::Calculus;
use crate::gsequent::{Alphabet, Vertex};
use crate::rewriting::{ESystem, EdgeString};
use crate::rules::{ConstraintEdge, EdgeLanguage, Registry, Rule, RuleKind, StructuralConstraint};

use super::{expect_header, is_name, lines, parse_production, parse_symbol, Joined, Line, ParseError};

#[derive(Clone)]
pub struct ParseOptions {
    pub registry: Registry,
    /// Close grammars under converses instead of rejecting them.
    pub auto_close: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { registry: Registry::standard(), auto_close: false }
    }
}

/// Parse with the standard relations; grammars must be converse closed.
pub fn parse_calculus(text: &str) -> Result<Calculus, ParseError> {
    parse_calculus_with(text, &ParseOptions::default()).map(|(c, _)| c)
}

/// Also returns warnings, one per auto-closed grammar.
pub fn parse_calculus_with(text: &str, opts: &ParseOptions) -> Result<(Calculus, Vec<String>), ParseError> {
    let ls = lines(text)?;
    let mut i = expect_header(&ls, "hcalc")?;
    let mut name = None;
    let mut alphabet = None;
    let mut grammars: BTreeMap<String, ESystem> = BTreeMap::new();
    let mut rules: Vec<(usize, Rule)> = Vec::new();
    let mut warnings = Vec::new();

    while i < ls.len() {
        let l = &ls[i];
        i += 1;
        match l.head() {
            "name" => {
                name = Some(l.bare(1, "calculus name")?.to_string());
                l.arity(2)?;
            }
            "alphabet" => {
                let ts: Vec<&str> = l.toks[1..].iter().map(|t| t.text.as_str()).collect();
                if let Some(t) = l.toks[1..].iter().find(|t| parse_symbol(&t.text).map_or(true, |s| s.inverse)) {
                    return Err(l.err(t.col, format!("`{}` is not an edge type", t.text)));
                }
                alphabet = Some(Alphabet::new(ts));
            }
            "grammar" => {
                let g = l.bare(1, "grammar name")?.to_string();
                l.arity(2)?;
                let (prods, next) = block(&ls, i, l, opts.auto_close, |b| {
                    let text: Vec<&str> = b.toks.iter().map(|t| t.text.as_str()).collect();
                    parse_production(&text.join(" ")).map_err(|m| b.err(1, m))
                })?;
                i = next;
                let sys = match ESystem::from_closed(prods.iter().cloned()) {
                    Ok(s) => s,
                    Err(e) if opts.auto_close => {
                        warnings.push(format!("grammar {g} closed under converses ({e})"));
                        ESystem::close_under_converse(prods)
                    }
                    Err(e) => return Err(l.err(1, format!("grammar {g}: {e}"))),
                };
                if grammars.insert(g.clone(), sys).is_some() {
                    return Err(l.err(l.toks[1].col, format!("grammar `{g}` defined twice")));
                }
            }
            "rule" => {
                let (rule, next) = parse_rule(&ls, i, l, &grammars, opts)?;
                i = next;
                rules.push((l.no, rule));
            }
            other => return Err(l.err(1, format!("unknown section `{other}`"))),
        }
    }

    let at_end = ParseError { line: ls.last().map_or(1, |l| l.no), col: 1, msg: String::new() };
    let alphabet = alphabet.ok_or_else(|| ParseError { msg: "missing `alphabet` line".into(), ..at_end.clone() })?;
    if rules.is_empty() {
        return Err(ParseError { msg: "a calculus needs at least one rule".into(), ..at_end });
    }
    for (no, r) in &rules {
        if let Some(t) = r.edge_types().into_iter().find(|t| !alphabet.contains(t)) {
            return Err(ParseError { line: *no, col: 1, msg: format!("rule `{}` uses `{t}` outside the alphabet", r.id) });
        }
    }
    let first = rules[0].0;
    let c = Calculus::new(&name.unwrap_or_else(|| "calculus".into()), alphabet, rules.into_iter().map(|(_, r)| r).collect())
        .map_err(|e| ParseError { line: first, col: 1, msg: e.to_string() })?;
    Ok((c, warnings))
}

/// Lines up to the matching `end`, each mapped by `item`.
fn block<T>(ls: &[Line], mut i: usize, opener: &Line, auto_close: bool, mut item: impl FnMut(&Line) -> Result<T, ParseError>) -> Result<(Vec<T>, usize), ParseError> {
    let mut out = Vec::new();
    loop {
        match ls.get(i) {
            Some(l) if l.head() == "end" => {
                l.arity(1)?;
                return Ok((out, i + 1));
            }
            Some(l) if ["grammar", "rule", "name", "alphabet"].contains(&l.head()) && auto_close => return Ok((out, i)),
            Some(l) if ["grammar", "rule", "name", "alphabet"].contains(&l.head()) => {
                return Err(opener.err(1, format!("block is not closed before line {}", l.no)))
            }
            Some(l) => {
                out.push(item(l)?);
                i += 1;
            }
            None if auto_close => return Ok((out, i)),
            None => return Err(opener.err(1, "block is not closed; add `end`")),
        }
    }
}

fn language(l: &Line, ty: &str, g: &str, grammars: &BTreeMap<String, ESystem>) -> Result<EdgeLanguage, ParseError> {
    let sym = parse_symbol(ty).map_err(|m| l.err(1, m))?;
    if sym.inverse {
        return Err(l.err(1, format!("constraint languages start from an edge type, not `{ty}`")));
    }
    let grammar = match g {
        "none" => ESystem::empty(),
        name => grammars.get(name).cloned().ok_or_else(|| l.err(1, format!("unknown grammar `{name}`")))?,
    };
    Ok(EdgeLanguage::new(grammar, ty))
}

fn parse_rule(ls: &[Line], i: usize, l: &Line, grammars: &BTreeMap<String, ESystem>, opts: &ParseOptions) -> Result<(Rule, usize), ParseError> {
    let id = l.bare(1, "rule id")?;
    if id.contains(char::is_whitespace) {
        return Err(l.err(l.toks[1].col, "rule ids cannot contain spaces"));
    }
    let kind = l.bare(2, "rule kind")?;
    let relation = |k: usize| -> Result<_, ParseError> {
        let name = l.keyed(k, "relation")?;
        opts.registry.get(name).map_err(|e| l.err(l.toks[k].col, e.to_string()))
    };
    match kind {
        "initial" => {
            let rel = relation(3)?;
            l.arity(4)?;
            let mut vertices = Vec::new();
            let mut edges = Vec::new();
            let (_, next) = block(ls, i, l, false, |b| {
                match b.head() {
                    "vertex" => {
                        vertices.push(Vertex::from(b.bare(1, "vertex")?));
                        b.arity(2)
                    }
                    "edge" => {
                        let (src, dst, ty) = (b.bare(1, "source")?, b.bare(2, "target")?, b.bare(3, "edge type")?);
                        let language = language(b, ty, b.keyed(4, "grammar")?, grammars)?;
                        b.arity(5)?;
                        edges.push(ConstraintEdge { src: src.into(), dst: dst.into(), language });
                        Ok(())
                    }
                    other => Err(b.err(1, format!("expected `vertex`, `edge` or `end`, found `{other}`"))),
                }
            })?;
            let constraint = StructuralConstraint::new(vertices, edges).map_err(|e| l.err(1, e.to_string()))?;
            Ok((Rule::initial(id, constraint, rel), next))
        }
        "local" => {
            let rel = relation(3)?;
            let n = l.keyed(4, "premises")?.parse::<usize>().map_err(|_| l.err(l.toks[4].col, "premises must be a number"))?;
            l.arity(5)?;
            Ok((Rule::local(id, rel, n), i))
        }
        "expansion" => {
            let rel = relation(3)?;
            let edge = parse_symbol(l.keyed(4, "edge")?).map_err(|m| l.err(l.toks[4].col, m))?;
            l.arity(5)?;
            Ok((Rule::expansion(id, rel, edge), i))
        }
        "reach" => {
            let rel = relation(3)?;
            l.arity(4)?;
            let (family, next) = block(ls, i, l, false, |b| {
                if b.head() != "lang" {
                    return Err(b.err(1, format!("expected `lang` or `end`, found `{}`", b.head())));
                }
                let lang = language(b, b.bare(1, "edge type")?, b.keyed(2, "grammar")?, grammars)?;
                b.arity(3)?;
                Ok(lang)
            })?;
            Ok((Rule::reachability(id, family, rel), next))
        }
        "horn" => {
            let text: Vec<&str> = l.toks[3..].iter().map(|t| t.text.as_str()).collect();
            let col = l.tok(3, "production")?.col;
            let p = parse_production(&text.join(" ")).map_err(|m| l.err(col, m))?;
            let rule = if p.lhs.inverse {
                Rule::horn_backward(id, p.lhs.base.clone(), p.rhs)
            } else {
                Rule::horn_forward(id, p.lhs.base.clone(), p.rhs)
            };
            Ok((rule, i))
        }
        other => Err(l.err(l.toks[2].col, format!("unknown rule kind `{other}`"))),
    }
}

fn horn_text(edge: &str, path: &EdgeString, backward: bool) -> String {
    let lhs = if backward { format!("inv({edge})") } else { edge.to_string() };
    format!("{lhs} -> {path}")
}

/// Canonical text: grammars named `G1, G2, ...` by first use, rules by id.
pub fn print_calculus(c: &Calculus) -> String {
    let mut names: Vec<ESystem> = Vec::new();
    let mut langs = |ls: Vec<&EdgeLanguage>| {
        for l in ls {
            if !l.grammar.is_empty() && !names.contains(&l.grammar) {
                names.push(l.grammar.clone());
            }
        }
    };
    for r in c.rules() {
        match &r.kind {
            RuleKind::Initial { constraint, .. } => langs(constraint.edges.iter().map(|e| &e.language).collect()),
            RuleKind::Reachability { family, .. } => langs(family.iter().collect()),
            _ => {}
        }
    }
    let gname = |g: &ESystem| match names.iter().position(|x| x == g) {
        Some(i) => format!("G{}", i + 1),
        None => "none".into(),
    };

    let mut out = String::new();
    let alphabet: Vec<_> = c.alphabet().iter().collect();
    assert!(is_name(&c.name), "calculus names are single tokens");
    writeln!(out, "format hcalc 1\nname {}\nalphabet {}", c.name, Joined(&alphabet, " ")).unwrap();
    for (i, g) in names.iter().enumerate() {
        writeln!(out, "\ngrammar G{}", i + 1).unwrap();
        for p in g.productions() {
            writeln!(out, "  {p}").unwrap();
        }
        out.push_str("end\n");
    }
    out.push('\n');
    for r in c.rules() {
        match &r.kind {
            RuleKind::Initial { constraint, relation } => {
                writeln!(out, "rule {} initial relation={}", r.id, relation.name()).unwrap();
                for v in &constraint.vertices {
                    writeln!(out, "  vertex {v}").unwrap();
                }
                for e in &constraint.edges {
                    writeln!(out, "  edge {} {} {} grammar={}", e.src, e.dst, e.language.start, gname(&e.language.grammar)).unwrap();
                }
                out.push_str("end\n");
            }
            RuleKind::Local { relation, premises } => {
                writeln!(out, "rule {} local relation={} premises={premises}", r.id, relation.name()).unwrap();
            }
            RuleKind::Expansion { relation, edge } => {
                writeln!(out, "rule {} expansion relation={} edge={edge}", r.id, relation.name()).unwrap();
            }
            RuleKind::Reachability { family, relation } => {
                writeln!(out, "rule {} reach relation={}", r.id, relation.name()).unwrap();
                for l in family {
                    writeln!(out, "  lang {} grammar={}", l.start, gname(&l.grammar)).unwrap();
                }
                out.push_str("end\n");
            }
            RuleKind::Horn { edge, path, backward } => {
                writeln!(out, "rule {} horn {}", r.id, horn_text(edge.as_str(), path, *backward)).unwrap();
            }
        }
    }
    out
}
