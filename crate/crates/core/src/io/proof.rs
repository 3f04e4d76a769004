use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::gsequent::{EdgeAtom, GSequent, SequentLabel, Vertex};
use crate::proof::{ProofStep, HYP, PW};
use crate::rules::Instantiation;

use super::{expect_header, is_name, lines, parse_symbol, quote, Joined, Line, ParseError};

fn write_body(out: &mut String, g: &GSequent, indent: &str) {
    for (v, l) in g.labels() {
        writeln!(out, "{indent}vertex {v} {}", quote(l.as_str())).unwrap();
    }
    for e in g.edges() {
        writeln!(out, "{indent}edge {} {} {}", e.src, e.ty, e.dst).unwrap();
    }
}

/// Fold one `vertex` or `edge` line into `g`.
fn body_line(l: &Line, g: &mut GSequent) -> Result<(), ParseError> {
    match l.head() {
        "vertex" => {
            let v = l.bare(1, "vertex name")?;
            let t = l.tok(2, "sequent label")?;
            if !t.quoted {
                return Err(l.err(t.col, "sequent labels are quoted"));
            }
            l.arity(3)?;
            if !is_name(v) {
                return Err(l.err(l.toks[1].col, format!("`{v}` is not a vertex name")));
            }
            if g.contains_vertex(&Vertex::from(v)) {
                return Err(l.err(l.toks[1].col, format!("vertex `{v}` listed twice")));
            }
            g.set_label(v.into(), SequentLabel(t.text.clone()));
            Ok(())
        }
        "edge" => {
            let e = EdgeAtom::new(l.bare(1, "source")?, l.bare(2, "edge type")?, l.bare(3, "target")?);
            l.arity(4)?;
            g.add_edge(e).map_err(|err| l.err(1, err.to_string())).map(|_| ())
        }
        other => Err(l.err(1, format!("expected `vertex`, `edge` or `end`, found `{other}`"))),
    }
}

pub fn print_gsequent(g: &GSequent) -> String {
    let mut out = String::from("format hseq 1\n");
    write_body(&mut out, g, "");
    out
}

pub fn parse_gsequent(text: &str) -> Result<GSequent, ParseError> {
    let ls = lines(text)?;
    let start = expect_header(&ls, "hseq")?;
    let mut g = GSequent::new();
    for l in &ls[start..] {
        body_line(l, &mut g)?;
    }
    if g.vertex_count() == 0 {
        return Err(ParseError { line: ls[0].no, col: 1, msg: "a g-sequent needs a vertex".into() });
    }
    Ok(g)
}

fn inst_text(inst: &Instantiation) -> String {
    match inst {
        Instantiation::Initial { embedding } => {
            let pairs: Vec<String> = embedding.iter().map(|(c, v)| format!("{c}={v}")).collect();
            if pairs.is_empty() {
                "init".into()
            } else {
                format!("init {}", pairs.join(" "))
            }
        }
        Instantiation::Local { w } => format!("local w={w}"),
        Instantiation::Expansion { w, u, edge } => format!("expansion w={w} u={u} edge={edge}"),
        Instantiation::Horn { walk } => format!("horn walk={}", Joined(walk, ",")),
        Instantiation::Reachability { w, u } => format!("reach w={w} u={u}"),
        Instantiation::Weakening { edge } => format!("pw src={} type={} dst={}", edge.src, edge.ty, edge.dst),
        Instantiation::Hypothesis => "hyp".into(),
    }
}

/// Steps in preorder, each with its premise count, instantiation and conclusion.
pub fn print_proof(p: &ProofStep) -> String {
    let mut out = String::from("format hproof 1\n");
    for (_, s) in p.steps() {
        writeln!(out, "step {} premises={} {}", s.rule, s.premises.len(), inst_text(&s.inst)).unwrap();
        write_body(&mut out, &s.conclusion, "  ");
        out.push_str("end\n");
    }
    out
}

fn parse_inst(l: &Line) -> Result<Instantiation, ParseError> {
    let kind = l.bare(3, "instantiation kind")?;
    let v = |i: usize, key: &str| -> Result<Vertex, ParseError> { Ok(Vertex::from(l.keyed(i, key)?)) };
    let (inst, n) = match kind {
        "init" => {
            let mut embedding = BTreeMap::new();
            for t in &l.toks[4..] {
                let (c, x) = t.text.split_once('=').filter(|_| !t.quoted).ok_or_else(|| l.err(t.col, "expected `vertex=vertex`"))?;
                embedding.insert(Vertex::from(c), Vertex::from(x));
            }
            (Instantiation::Initial { embedding }, l.toks.len())
        }
        "local" => (Instantiation::Local { w: v(4, "w")? }, 5),
        "expansion" => {
            let edge = parse_symbol(l.keyed(6, "edge")?).map_err(|m| l.err(l.toks[6].col, m))?;
            (Instantiation::Expansion { w: v(4, "w")?, u: v(5, "u")?, edge }, 7)
        }
        "horn" => {
            let walk: Vec<Vertex> = l.keyed(4, "walk")?.split(',').map(Vertex::from).collect();
            if walk.iter().any(|x| x.0.is_empty()) {
                return Err(l.err(l.toks[4].col, "empty vertex in walk"));
            }
            (Instantiation::Horn { walk }, 5)
        }
        "reach" => (Instantiation::Reachability { w: v(4, "w")?, u: v(5, "u")? }, 6),
        "pw" => {
            let edge = EdgeAtom::new(l.keyed(4, "src")?, l.keyed(5, "type")?, l.keyed(6, "dst")?);
            (Instantiation::Weakening { edge }, 7)
        }
        "hyp" => (Instantiation::Hypothesis, 4),
        other => return Err(l.err(l.toks[3].col, format!("unknown instantiation kind `{other}`"))),
    };
    l.arity(n)?;
    Ok(inst)
}

struct Flat {
    rule: String,
    arity: usize,
    inst: Instantiation,
    conclusion: GSequent,
    line: usize,
}

pub fn parse_proof(text: &str) -> Result<ProofStep, ParseError> {
    let ls = lines(text)?;
    let mut i = expect_header(&ls, "hproof")?;
    let mut flat = Vec::new();
    while i < ls.len() {
        let l = &ls[i];
        if l.head() != "step" {
            return Err(l.err(1, format!("expected `step`, found `{}`", l.head())));
        }
        let rule = l.bare(1, "rule id")?.to_string();
        let arity = l.keyed(2, "premises")?.parse::<usize>().map_err(|_| l.err(l.toks[2].col, "premises must be a number"))?;
        let inst = parse_inst(l)?;
        let mut g = GSequent::new();
        i += 1;
        loop {
            match ls.get(i) {
                None => return Err(l.err(1, "step is not closed; add `end`")),
                Some(b) if b.head() == "end" => {
                    b.arity(1)?;
                    i += 1;
                    break;
                }
                Some(b) if b.head() == "step" => return Err(l.err(1, format!("step is not closed before line {}", b.no))),
                Some(b) => {
                    body_line(b, &mut g)?;
                    i += 1;
                }
            }
        }
        if (rule == HYP) != matches!(inst, Instantiation::Hypothesis) || (rule == PW) != matches!(inst, Instantiation::Weakening { .. }) {
            return Err(l.err(l.toks[1].col, format!("rule `{rule}` does not match its instantiation")));
        }
        flat.push(Flat { rule, arity, inst, conclusion: g, line: l.no });
    }
    if flat.is_empty() {
        return Err(ParseError { line: ls[0].no, col: 1, msg: "a proof needs at least one step".into() });
    }
    let mut it = flat.into_iter().peekable();
    let root = build(&mut it)?;
    if let Some(extra) = it.next() {
        return Err(ParseError { line: extra.line, col: 1, msg: "step lies outside the tree".into() });
    }
    Ok(root)
}

fn build(it: &mut std::iter::Peekable<std::vec::IntoIter<Flat>>) -> Result<ProofStep, ParseError> {
    let f = it.next().expect("caller checks for a next step");
    let mut premises = Vec::with_capacity(f.arity);
    for _ in 0..f.arity {
        if it.peek().is_none() {
            return Err(ParseError { line: f.line, col: 1, msg: format!("step expects {} premises", f.arity) });
        }
        premises.push(build(it)?);
    }
    Ok(ProofStep::new(f.conclusion, f.rule, f.inst, premises))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyclic_example, g3i_explicit, id_ref_proof, id_tra_proof, imp_l_ref_proof};
    use crate::proof::validate;

    #[test]
    fn proof_round_trip() {
        for p in [id_ref_proof(), id_tra_proof(), imp_l_ref_proof()] {
            let text = print_proof(&p);
            let back = parse_proof(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(print_proof(&back), text);
            validate(&back, &g3i_explicit()).unwrap();
        }
        let hw = ProofStep::weakening(ProofStep::hypothesis(GSequent::single("w", "A").with_vertex("v", "B")), EdgeAtom::new("w", "a", "v"));
        assert_eq!(parse_proof(&print_proof(&hw)).unwrap(), hw);
    }

    #[test]
    fn proof_text() {
        assert_eq!(
            print_proof(&id_ref_proof()),
            "format hproof 1\n\
             step ref premises=1 horn walk=w\n  vertex w \"p => p\"\nend\n\
             step id premises=0 init u=w w=w\n  vertex w \"p => p\"\n  edge w E w\nend\n"
        );
    }

    #[test]
    fn proof_errors() {
        let err = |t: &str| parse_proof(t).unwrap_err();
        assert!(err("format hproof 1\n").msg.contains("at least one step"));
        let e = err("format hproof 1\nstep r premises=1 local w=w\n  vertex w \"A\"\nend\n");
        assert!(e.msg.contains("expects 1 premises"));
        let e = err("format hproof 1\nstep r premises=0 local w=w\n  vertex w A\nend\n");
        assert_eq!((e.line, e.col), (3, 12));
        let e = err("format hproof 1\nstep r premises=0 local w=w\n  vertex w \"A\"\n  edge w a z\nend\n");
        assert_eq!(e.line, 4);
        let e = err("format hproof 1\nstep r premises=0 bogus\n  vertex w \"A\"\nend\n");
        assert!(e.msg.contains("bogus"));
        let e = err("format hproof 1\nstep hyp premises=0 local w=w\n  vertex w \"A\"\nend\n");
        assert!(e.msg.contains("does not match"));
        let e = err("format hproof 1\nstep r premises=0 hyp\n  vertex w \"A\"\n");
        assert!(e.msg.contains("not closed"));
    }

    #[test]
    fn sequent_round_trip() {
        let g = cyclic_example();
        let text = print_gsequent(&g);
        assert_eq!(parse_gsequent(&text).unwrap(), g);
        assert!(text.starts_with("format hseq 1\nvertex u1 \"S1\"\n"));
        assert!(parse_gsequent("format hseq 1\n").is_err());
        assert!(parse_gsequent("format hseq 1\nvertex w \"A\"\nvertex w \"B\"\n").is_err());
    }
}
