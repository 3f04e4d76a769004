use std::fmt::Write as _;

use crate::calculus::{horn_ids, is_explicit, is_implicit};
use crate::lattice::{CalculusSpace, Direction};

use super::{expect_header, lines, quote, Joined, ParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberInfo {
    pub name: String,
    pub horn: Vec<String>,
    pub implicit: bool,
    pub explicit: bool,
}

/// The printable summary of a space: members, strict order and covering pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceReport {
    pub direction: Direction,
    pub members: Vec<MemberInfo>,
    pub order: Vec<(usize, usize)>,
    pub hasse: Vec<(usize, usize)>,
}

pub fn space_report(s: &CalculusSpace) -> SpaceReport {
    let members = s
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| MemberInfo {
            name: s.member_name(i),
            horn: horn_ids(m).into_iter().collect(),
            implicit: is_implicit(m),
            explicit: is_explicit(m),
        })
        .collect();
    let n = s.len();
    let order = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && s.leq(i, j)).collect();
    SpaceReport { direction: s.direction, members, order, hasse: s.hasse() }
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn print_report(r: &SpaceReport) -> String {
    let mut out = format!("format hspace 1\ndirection {}\n", r.direction);
    for (i, m) in r.members.iter().enumerate() {
        let horn = if m.horn.is_empty() { "-".to_string() } else { Joined(&m.horn, ",").to_string() };
        writeln!(out, "member {i} {} horn={horn} implicit={} explicit={}", quote(&m.name), yn(m.implicit), yn(m.explicit)).unwrap();
    }
    for (a, b) in &r.order {
        writeln!(out, "order {a} {b}").unwrap();
    }
    for (a, b) in &r.hasse {
        writeln!(out, "hasse {a} {b}").unwrap();
    }
    out
}

pub fn parse_report(text: &str) -> Result<SpaceReport, ParseError> {
    let ls = lines(text)?;
    let start = expect_header(&ls, "hspace")?;
    let mut direction = None;
    let mut members = Vec::new();
    let mut order = Vec::new();
    let mut hasse = Vec::new();
    for l in &ls[start..] {
        let num = |i: usize| -> Result<usize, ParseError> {
            l.bare(i, "index")?.parse().map_err(|_| l.err(l.toks[i].col, "expected an index"))
        };
        let flag = |i: usize, key: &str| -> Result<bool, ParseError> {
            match l.keyed(i, key)? {
                "yes" => Ok(true),
                "no" => Ok(false),
                _ => Err(l.err(l.toks[i].col, format!("`{key}` is yes or no"))),
            }
        };
        match l.head() {
            "direction" => {
                direction = Some(match l.bare(1, "direction")? {
                    "upward" => Direction::Upward,
                    "downward" => Direction::Downward,
                    other => return Err(l.err(l.toks[1].col, format!("unknown direction `{other}`"))),
                });
                l.arity(2)?;
            }
            "member" => {
                if num(1)? != members.len() {
                    return Err(l.err(l.toks[1].col, "members are numbered in order"));
                }
                let name = l.tok(2, "member name")?.text.clone();
                let horn = match l.keyed(3, "horn")? {
                    "-" => Vec::new(),
                    s => s.split(',').map(String::from).collect(),
                };
                members.push(MemberInfo { name, horn, implicit: flag(4, "implicit")?, explicit: flag(5, "explicit")? });
                l.arity(6)?;
            }
            "order" | "hasse" => {
                let pair = (num(1)?, num(2)?);
                l.arity(3)?;
                if pair.0 >= members.len() || pair.1 >= members.len() {
                    return Err(l.err(1, "index out of range"));
                }
                if l.head() == "order" { &mut order } else { &mut hasse }.push(pair);
            }
            other => return Err(l.err(1, format!("unknown line `{other}`"))),
        }
    }
    let direction = direction.ok_or_else(|| ParseError { line: ls[0].no, col: 1, msg: "missing `direction`".into() })?;
    Ok(SpaceReport { direction, members, order, hasse })
}
