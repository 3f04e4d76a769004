//! Line-oriented text formats for calculi, proofs, g-sequents and space
//! reports, plus DOT export.
//!
//! Every format starts with `format <kind> <version>`. Blank lines and lines
//! starting with `#` are skipped. Tokens are separated by whitespace; sequent
//! labels are double-quoted with `\"` and `\\` escapes.

mod calculus;
mod dot;
mod proof;
mod report;

use std::fmt;

use thiserror::Error;

use crate::rewriting::{ESystem, EdgeString, Production, Symbol};

pub use calculus::{parse_calculus, parse_calculus_with, print_calculus, ParseOptions};
pub use dot::{gsequent_dot, hasse_dot, proof_dot};
pub use proof::{parse_gsequent, parse_proof, print_gsequent, print_proof};
pub use report::{parse_report, print_report, space_report, MemberInfo, SpaceReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Token {
    pub text: String,
    pub col: usize,
    pub quoted: bool,
}

/// One significant input line, already split into tokens.
#[derive(Clone, Debug)]
pub(crate) struct Line {
    pub no: usize,
    pub toks: Vec<Token>,
}

impl Line {
    pub fn err(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.no, col, msg: msg.into() }
    }

    pub fn head(&self) -> &str {
        &self.toks[0].text
    }

    pub fn tok(&self, i: usize, what: &str) -> Result<&Token, ParseError> {
        self.toks.get(i).ok_or_else(|| {
            let col = self.toks.last().map(|t| t.col + t.text.len()).unwrap_or(1);
            self.err(col, format!("missing {what}"))
        })
    }

    pub fn bare(&self, i: usize, what: &str) -> Result<&str, ParseError> {
        let t = self.tok(i, what)?;
        if t.quoted {
            return Err(self.err(t.col, format!("{what} must not be quoted")));
        }
        Ok(&t.text)
    }

    /// The value of a `key=value` token at position `i`.
    pub fn keyed(&self, i: usize, key: &str) -> Result<&str, ParseError> {
        let t = self.tok(i, &format!("`{key}=`"))?;
        match t.text.split_once('=') {
            Some((k, v)) if k == key && !t.quoted => Ok(v),
            _ => Err(self.err(t.col, format!("expected `{key}=...`, found `{}`", t.text))),
        }
    }

    pub fn arity(&self, n: usize) -> Result<(), ParseError> {
        match self.toks.get(n) {
            Some(t) => Err(self.err(t.col, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }
}

fn tokenize(no: usize, text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let col = i + 1;
        if chars[i] == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(ParseError { line: no, col, msg: "unterminated string".into() }),
                    Some('"') => break,
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(c @ ('"' | '\\')) => s.push(*c),
                            Some('n') => s.push('\n'),
                            _ => return Err(ParseError { line: no, col: i + 1, msg: "bad escape".into() }),
                        }
                        i += 2;
                    }
                    Some(c) => {
                        s.push(*c);
                        i += 1;
                    }
                }
            }
            i += 1;
            toks.push(Token { text: s, col, quoted: true });
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' {
                i += 1;
            }
            toks.push(Token { text: chars[start..i].iter().collect(), col, quoted: false });
        }
    }
    Ok(toks)
}

/// Significant lines of `text`.
pub(crate) fn lines(text: &str) -> Result<Vec<Line>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim_start();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(Line { no: i + 1, toks: tokenize(i + 1, raw)? });
    }
    Ok(out)
}

/// Check the `format <kind> 1` header and return the remaining lines.
pub(crate) fn expect_header(lines: &[Line], kind: &str) -> Result<usize, ParseError> {
    let Some(first) = lines.first() else {
        return Err(ParseError { line: 1, col: 1, msg: format!("empty input, expected `format {kind} 1`") });
    };
    if first.head() != "format" || first.bare(1, "format kind")? != kind {
        return Err(first.err(1, format!("expected `format {kind} 1`")));
    }
    if first.bare(2, "format version")? != "1" {
        return Err(first.err(first.toks[2].col, format!("unsupported version `{}`", first.toks[2].text)));
    }
    first.arity(3)?;
    Ok(1)
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// A bare name usable as a token: no whitespace, quotes, `=` or `,`.
pub(crate) fn is_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || matches!(c, '"' | '=' | ','))
}

/// `a` or `inv(a)`.
pub fn parse_symbol(s: &str) -> Result<Symbol, String> {
    let ok = |b: &str| !b.is_empty() && b.chars().all(|c| c.is_alphanumeric() || c == '_');
    match s.strip_prefix("inv(").and_then(|r| r.strip_suffix(')')) {
        Some(b) if ok(b) => Ok(Symbol::inv(b)),
        None if ok(s) && s != "eps" => Ok(Symbol::fwd(s)),
        _ => Err(format!("`{s}` is not an edge symbol")),
    }
}

/// Whitespace-separated symbols; `eps` alone is the empty string.
pub fn parse_edge_string(s: &str) -> Result<EdgeString, String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts == ["eps"] {
        return Ok(EdgeString::empty());
    }
    if parts.is_empty() {
        return Err("empty right-hand side; write `eps`".into());
    }
    parts.into_iter().map(parse_symbol).collect()
}

/// `lhs -> rhs`.
pub fn parse_production(s: &str) -> Result<Production, String> {
    let (l, r) = s.split_once("->").ok_or_else(|| format!("`{s}` has no `->`"))?;
    let lhs = parse_edge_string(l)?;
    let rhs = parse_edge_string(r)?;
    Production::from_strings(lhs, rhs).map_err(|e| e.to_string())
}

/// Productions separated by `;`. Without `auto_close` the set must already be
/// converse closed.
pub fn parse_grammar_inline(s: &str, auto_close: bool) -> Result<ESystem, String> {
    let prods = s.split(';').map(str::trim).filter(|p| !p.is_empty()).map(parse_production).collect::<Result<Vec<_>, _>>()?;
    if auto_close {
        Ok(ESystem::close_under_converse(prods))
    } else {
        ESystem::from_closed(prods).map_err(|e| e.to_string())
    }
}

pub(crate) struct Joined<'a, T>(pub &'a [T], pub &'a str);

impl<T: fmt::Display> fmt::Display for Joined<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(self.1)?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}
