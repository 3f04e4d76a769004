//! `horncalc`: check proofs, query reachability, saturate g-sequents, compute
//! calculus spaces and translate proofs between their members.
//!
//! Exit status: 0 on success, 1 when a check or query fails, 2 on usage,
//! input or parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use horncalc::calculus::{horn_rules, Calculus};
use horncalc::gsequent::{GSequent, Vertex};
use horncalc::io::{
    gsequent_dot, hasse_dot, parse_calculus_with, parse_grammar_inline, parse_gsequent, parse_proof, print_calculus, print_gsequent,
    print_proof, print_report, proof_dot, space_report, ParseOptions,
};
use horncalc::lattice::{explicate_with, implicate_with, translate_in_space, CalculusSpace, SpaceOptions};
use horncalc::proof::{proof_size, quantity, validate_with, ProofStep, ValidateOptions};
use horncalc::reach::GraphReach;
use horncalc::rules::{CheckOptions, Rule};
use horncalc::transform::invhorn_trace;

#[derive(Parser)]
#[command(name = "horncalc", version, about = "Grammar-constrained sequent calculi over graphs of sequents")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a proof file against a calculus.
    Check(CheckArgs),
    /// Ask whether one vertex reaches another by a walk spelling a word of a grammar language.
    Reach(ReachArgs),
    /// Close a g-sequent under the inverses of Horn rules.
    Saturate(SaturateArgs),
    /// Compute the upward space of a calculus.
    Implicate(SpaceArgs),
    /// Compute the downward space of a calculus.
    Explicate(SpaceArgs),
    /// Translate a proof between two members of a space.
    Transform(TransformArgs),
    /// Write a g-sequent, proof or Hasse diagram as DOT.
    ExportDot(DotArgs),
}

#[derive(Args)]
struct CalcArgs {
    #[arg(long)]
    calculus: PathBuf,
    /// Close grammars under converses instead of rejecting them.
    #[arg(long)]
    auto_close: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    calc: CalcArgs,
    #[arg(long)]
    proof: PathBuf,
    /// Accept open `hyp` leaves.
    #[arg(long)]
    allow_hyp: bool,
    /// Accept path-weakening steps.
    #[arg(long)]
    allow_pw: bool,
    /// Require injective embeddings and distinct reachability endpoints.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ReachArgs {
    #[arg(long)]
    sequent: PathBuf,
    /// Productions separated by `;`, closed under converses.
    #[arg(long, default_value = "")]
    grammar: String,
    #[arg(long)]
    start: String,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
}

#[derive(Args)]
struct SaturateArgs {
    #[command(flatten)]
    calc: CalcArgs,
    #[arg(long)]
    sequent: PathBuf,
    /// Horn rule ids to use; all Horn rules by default.
    #[arg(long, value_delimiter = ',')]
    rules: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print each added edge to standard error.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct Budget {
    /// Refuse calculi with more Horn rules than this.
    #[arg(long, default_value_t = 10)]
    horn_cap: usize,
    /// Wall-clock budget for the space computation.
    #[arg(long)]
    budget_secs: Option<u64>,
}

impl Budget {
    fn options(&self) -> SpaceOptions {
        SpaceOptions { horn_cap: Some(self.horn_cap), deadline: self.budget_secs.map(|s| Instant::now() + Duration::from_secs(s)) }
    }
}

#[derive(Args)]
struct SpaceArgs {
    #[command(flatten)]
    calc: CalcArgs,
    #[command(flatten)]
    budget: Budget,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the Hasse diagram as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write every member as `member_<i>.hcalc` into this directory.
    #[arg(long)]
    emit_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceKind {
    Up,
    Down,
}

#[derive(Args)]
struct TransformArgs {
    /// Origin of the space.
    #[command(flatten)]
    calc: CalcArgs,
    #[arg(long)]
    proof: PathBuf,
    /// Member the proof lives in, by index or name; the origin by default.
    #[arg(long, default_value = "0")]
    source: String,
    /// Member to translate into, by index or name.
    #[arg(long)]
    target: String,
    #[arg(long, value_enum, default_value = "up")]
    space: SpaceKind,
    #[command(flatten)]
    budget: Budget,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the target member's calculus here.
    #[arg(long)]
    target_calculus_out: Option<PathBuf>,
    /// Print the rewrite trace to standard error.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct DotArgs {
    #[arg(long, conflicts_with_all = ["proof", "calculus"])]
    sequent: Option<PathBuf>,
    #[arg(long, conflicts_with = "calculus")]
    proof: Option<PathBuf>,
    /// Draw the Hasse diagram of this calculus's space.
    #[arg(long)]
    calculus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "up")]
    space: SpaceKind,
    #[command(flatten)]
    budget: Budget,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures split by exit status.
enum Failure {
    Verify(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_calculus(a: &CalcArgs) -> anyhow::Result<Calculus> {
    let opts = ParseOptions { auto_close: a.auto_close, ..Default::default() };
    let (c, warnings) = parse_calculus_with(&read(&a.calculus)?, &opts).map_err(|e| anyhow!("{}: {e}", a.calculus.display()))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", a.calculus.display());
    }
    Ok(c)
}

fn load_proof(p: &Path) -> anyhow::Result<ProofStep> {
    parse_proof(&read(p)?).map_err(|e| anyhow!("{}: {e}", p.display()))
}

fn load_sequent(p: &Path) -> anyhow::Result<GSequent> {
    parse_gsequent(&read(p)?).map_err(|e| anyhow!("{}: {e}", p.display()))
}

fn check(a: &CheckArgs) -> Outcome {
    let c = load_calculus(&a.calc)?;
    let p = load_proof(&a.proof)?;
    let opts = ValidateOptions { allow_pw: a.allow_pw, allow_hyp: a.allow_hyp, check: CheckOptions { strict: a.strict } };
    validate_with(&p, &c, opts).map_err(|e| Failure::Verify(anyhow!("invalid: {e}")))?;
    println!("valid: {} steps, height {}, quantity {}, size {}", p.step_count(), p.height(), quantity(&p), proof_size(&p));
    Ok(())
}

fn reach(a: &ReachArgs) -> Outcome {
    let g = load_sequent(&a.sequent)?;
    let grammar = parse_grammar_inline(&a.grammar, true).map_err(|e| anyhow!("--grammar: {e}"))?;
    let (from, to) = (Vertex::from(a.from.as_str()), Vertex::from(a.to.as_str()));
    for v in [&from, &to] {
        if !g.contains_vertex(v) {
            return Err(Failure::Usage(anyhow!("vertex `{v}` is not in the g-sequent")));
        }
    }
    let start = horncalc::io::parse_symbol(&a.start).map_err(|e| anyhow!("--start: {e}"))?;
    let r = GraphReach::new(&g, &grammar);
    match r.witness(&start, &from, &to) {
        Some(w) => {
            println!("yes");
            println!("walk {}", w.walk.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
            println!("word {}", w.string);
            Ok(())
        }
        None => Err(Failure::Verify(anyhow!("no: {from} does not reach {to} from {start}"))),
    }
}

fn pick_horn<'a>(c: &'a Calculus, ids: &[String]) -> anyhow::Result<Vec<&'a Rule>> {
    if ids.is_empty() {
        return Ok(horn_rules(c));
    }
    ids.iter()
        .map(|id| c.rule(id).filter(|r| r.is_horn()).ok_or_else(|| anyhow!("`{id}` is not a Horn rule of the calculus")))
        .collect()
}

fn saturate(a: &SaturateArgs) -> Outcome {
    let c = load_calculus(&a.calc)?;
    let g = load_sequent(&a.sequent)?;
    let rules = pick_horn(&c, &a.rules)?;
    let (sat, steps) = invhorn_trace(&g, &rules);
    if a.trace {
        for s in &steps {
            eprintln!("{} adds {}", s.rule, s.edge);
        }
    }
    write_out(a.out.as_deref(), &print_gsequent(&sat))?;
    Ok(())
}

fn compute_space(c: &Calculus, kind: SpaceKind, budget: &Budget) -> anyhow::Result<CalculusSpace> {
    let opts = budget.options();
    let s = match kind {
        SpaceKind::Up => implicate_with(c, &opts),
        SpaceKind::Down => explicate_with(c, &opts),
    };
    s.map_err(|e| anyhow!("{e}"))
}

fn space(a: &SpaceArgs, kind: SpaceKind) -> Outcome {
    let c = load_calculus(&a.calc)?;
    let s = compute_space(&c, kind, &a.budget)?;
    write_out(a.out.as_deref(), &print_report(&space_report(&s)))?;
    if let Some(d) = &a.dot {
        fs::write(d, hasse_dot(&s)).with_context(|| format!("cannot write {}", d.display()))?;
    }
    if let Some(dir) = &a.emit_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (i, m) in s.members.iter().enumerate() {
            let p = dir.join(format!("member_{i}.hcalc"));
            fs::write(&p, print_calculus(m)).with_context(|| format!("cannot write {}", p.display()))?;
        }
    }
    Ok(())
}

fn member(s: &CalculusSpace, key: &str) -> anyhow::Result<usize> {
    if let Ok(i) = key.parse::<usize>() {
        if i < s.len() {
            return Ok(i);
        }
        bail!("member index {i} out of range (space has {})", s.len());
    }
    (0..s.len()).find(|&i| s.member_name(i) == key).ok_or_else(|| anyhow!("no member named `{key}`"))
}

fn transform(a: &TransformArgs) -> Outcome {
    let c = load_calculus(&a.calc)?;
    let p = load_proof(&a.proof)?;
    let s = compute_space(&c, a.space, &a.budget)?;
    let (from, to) = (member(&s, &a.source)?, member(&s, &a.target)?);
    let (out, trace) = translate_in_space(&p, &s, from, to).map_err(|e| Failure::Verify(anyhow!("{e}")))?;
    if a.trace {
        eprint!("{trace}");
    }
    validate_with(&out, &s.members[to], ValidateOptions::default()).map_err(|e| Failure::Verify(anyhow!("output does not validate: {e}")))?;
    eprintln!(
        "{} -> {}: size {} -> {}, quantity {} -> {}",
        s.member_name(from),
        s.member_name(to),
        proof_size(&p),
        proof_size(&out),
        quantity(&p),
        quantity(&out)
    );
    write_out(a.out.as_deref(), &print_proof(&out))?;
    if let Some(t) = &a.target_calculus_out {
        fs::write(t, print_calculus(&s.members[to])).with_context(|| format!("cannot write {}", t.display()))?;
    }
    Ok(())
}

fn export_dot(a: &DotArgs) -> Outcome {
    let text = if let Some(f) = &a.sequent {
        gsequent_dot(&load_sequent(f)?)
    } else if let Some(f) = &a.proof {
        proof_dot(&load_proof(f)?)
    } else if let Some(f) = &a.calculus {
        let c = load_calculus(&CalcArgs { calculus: f.clone(), auto_close: false })?;
        hasse_dot(&compute_space(&c, a.space, &a.budget)?)
    } else {
        return Err(Failure::Usage(anyhow!("give one of --sequent, --proof or --calculus")));
    };
    write_out(a.out.as_deref(), &text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let res = match &cli.cmd {
        Cmd::Check(a) => check(a),
        Cmd::Reach(a) => reach(a),
        Cmd::Saturate(a) => saturate(a),
        Cmd::Implicate(a) => space(a, SpaceKind::Up),
        Cmd::Explicate(a) => space(a, SpaceKind::Down),
        Cmd::Transform(a) => transform(a),
        Cmd::ExportDot(a) => export_dot(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(e)) => {
            eprintln!("{e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
