//! Command-line front end for the tracelab procedures. Every subcommand
//! reads model documents, runs one decision procedure, prints a JSON report
//! to stdout (see `schema/report.schema.json`) and a one-line summary to
//! stderr. Exit codes: 0 when the question was answered either way, 1 for
//! usage/parse/precondition problems, 2 when an enumeration guard stopped
//! the run, 3 for internal invariant failures.

mod report;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, Stdio};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use report::{Ctx, Outcome};
use tracelab_core::bisim::{
    bisim_space_mdp_mc, bisim_space_two_mdps_with_guard, bisimilar, search_certificate,
    verify_certificate, CertificateVerdict,
};
use tracelab_core::gadgets::{
    gadget_mutual, gadget_nmf, gadget_pa_universality, gadget_qss, gadget_subset_sum, GadgetOutput,
};
use tracelab_core::io::{
    parse_certificate, parse_model, parse_pa, parse_strategy, serialize_certificate,
    serialize_model, ParsedStrategy,
};
use tracelab_core::linalg::{format_rat, parse_rat, RatMatrix};
use tracelab_core::mc_equiv::{mc_equiv_detailed, EquivVerdict};
use tracelab_core::model::{disjoint_union, LabelId, Mdp};
use tracelab_core::oracle::{oracle_mc_equiv, oracle_refines_mc, union_label_names, OracleMode, OracleVerdict};
use tracelab_core::refinement::{refines_mc, RefinesVerdict};
use tracelab_core::restricted::{
    emit_etr, pure_strategy_count, refine_mc_mdp_pm_with_guard, refine_pm_pm_with_guard, PmVerdict,
};
use tracelab_core::semantics::{sub_dis_finite_memory, trace_prob, LocalStrategy, PureStrategy};
use tracelab_core::{Error, Result, DEFAULT_GUARD};

#[derive(Parser)]
#[command(
    name = "tracelab",
    version,
    about = "Exact trace refinement and distribution bisimulation for labelled Markov models"
)]
struct Cli {
    /// Add a clearly marked decimal approximation next to every exact rational.
    #[arg(long, global = true)]
    decimal: bool,

    /// Record wall-clock time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    timings: bool,

    /// Enumeration guard; overrides TRACELAB_GUARD and the built-in default.
    #[arg(long, global = true)]
    guard: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model document and report every structural violation.
    Validate { model: PathBuf },

    /// Trace probability of one word, optionally under a strategy document.
    Tr {
        model: PathBuf,
        /// Word over the model's labels: one character per label, or
        /// comma-separated label names if any name is longer.
        #[arg(long)]
        word: String,
        /// Strategy document (memoryless or finite-memory); required when the
        /// model has nondeterministic choices.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },

    /// Exact trace equivalence of two Markov chains.
    Equiv { mc1: PathBuf, mc2: PathBuf },

    /// Does the MDP trace-refine the Markov chain under unrestricted strategies?
    RefineMdpMc { mdp: PathBuf, mc: PathBuf },

    /// Distribution bisimilarity of the two models' initial distributions.
    Bisim {
        m1: PathBuf,
        m2: PathBuf,
        /// Space construction; defaults to mdp-mc when the second model is a
        /// Markov chain and mdp-mdp otherwise.
        #[arg(long, value_enum)]
        mode: Option<BisimMode>,
    },

    /// Check a non-bisimilarity certificate against two models.
    VerifyCert {
        m1: PathBuf,
        m2: PathBuf,
        cert: PathBuf,
    },

    /// Refinement under pure memoryless strategies (exhaustive, guarded).
    RefinePm {
        left: PathBuf,
        right: PathBuf,
        /// Question shape; defaults to mc-mdp when the left model is a Markov
        /// chain and mdp-mdp otherwise.
        #[arg(long, value_enum)]
        mode: Option<PmMode>,
    },

    /// Emit the nonlinear-real-arithmetic system for memoryless refinement.
    EmitEtr {
        mc: PathBuf,
        mdp: PathBuf,
        /// Write the SMT-LIB script here instead of embedding it in the report.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Shell command to run on the script (fed via stdin); its output is
        /// scanned for a sat/unsat verdict.
        #[arg(long)]
        solver_cmd: Option<String>,
    },

    /// Build a reduction gadget and write or embed the resulting models.
    #[command(subcommand)]
    Gadget(GadgetCommand),

    /// Bounded word-table oracle: scans every word up to a depth and reports
    /// the first violation. Finding none refutes nothing beyond that depth.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum BisimMode {
    MdpMc,
    MdpMdp,
}

#[derive(Clone, Copy, ValueEnum)]
enum PmMode {
    McMdp,
    MdpMdp,
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Subset sum as an MC-vs-MDP refinement under pure memoryless strategies.
    SubsetSum {
        /// Comma-separated positive values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
        #[arg(long)]
        target: u64,
        /// Write `<prefix>-left.json` / `<prefix>-right.json` instead of
        /// embedding the models in the report.
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },

    /// One-round quantified subset sum as an MDP-vs-MDP memoryless refinement.
    Qss {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<u64>,
        #[arg(long)]
        target: u64,
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },

    /// Stochastic-matrix factorization as a memoryless refinement.
    Nmf {
        /// JSON file with {"rows": [["p/q", ...], ...]}, row-stochastic.
        matrix: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },

    /// Probabilistic-automaton universality as an unrestricted refinement.
    PaUniversal {
        automaton: PathBuf,
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },

    /// Mutual refinement of two MDPs as a single one-sided refinement.
    Mutual {
        m1: PathBuf,
        m2: PathBuf,
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Scan words up to the depth for a refinement counterexample.
    Refine {
        mdp: PathBuf,
        mc: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Scan words up to the depth for an equivalence counterexample.
    Equiv {
        mc1: PathBuf,
        mc2: PathBuf,
        #[arg(long)]
        depth: usize,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are answers, not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let guard = match resolve_guard(cli.guard) {
        Ok(g) => g,
        Err(msg) => {
            eprintln!("tracelab: {msg}");
            std::process::exit(1);
        }
    };
    let ctx = Ctx::new(cli.decimal, cli.timings, guard);
    std::process::exit(run(&ctx, cli.command));
}

fn resolve_guard(flag: Option<u64>) -> std::result::Result<u64, String> {
    if let Some(g) = flag {
        return Ok(g);
    }
    match std::env::var("TRACELAB_GUARD") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("TRACELAB_GUARD must be an unsigned integer, got {s:?}")),
        Err(_) => Ok(DEFAULT_GUARD),
    }
}

fn run(ctx: &Ctx, command: Command) -> i32 {
    match command {
        Command::Validate { model } => {
            let params = json!({ "model": path_str(&model) });
            let out = cmd_validate(&model);
            ctx.emit("validate", params, out)
        }
        Command::Tr { model, word, strategy } => {
            let params = json!({
                "model": path_str(&model),
                "word": word,
                "strategy": strategy.as_deref().map(path_str),
            });
            let out = cmd_tr(ctx, &model, &word, strategy.as_deref());
            ctx.emit("tr", params, out)
        }
        Command::Equiv { mc1, mc2 } => {
            let params = json!({ "mc1": path_str(&mc1), "mc2": path_str(&mc2) });
            let out = cmd_equiv(ctx, &mc1, &mc2);
            ctx.emit("equiv", params, out)
        }
        Command::RefineMdpMc { mdp, mc } => {
            let params = json!({ "mdp": path_str(&mdp), "mc": path_str(&mc) });
            let out = cmd_refine_mdp_mc(ctx, &mdp, &mc);
            ctx.emit("refine-mdp-mc", params, out)
        }
        Command::Bisim { m1, m2, mode } => {
            let params = json!({
                "m1": path_str(&m1),
                "m2": path_str(&m2),
                "mode": mode.map(|m| mode_name(m).to_string()),
            });
            let out = cmd_bisim(ctx, &m1, &m2, mode);
            ctx.emit("bisim", params, out)
        }
        Command::VerifyCert { m1, m2, cert } => {
            let params = json!({
                "m1": path_str(&m1),
                "m2": path_str(&m2),
                "cert": path_str(&cert),
            });
            let out = cmd_verify_cert(ctx, &m1, &m2, &cert);
            ctx.emit("verify-cert", params, out)
        }
        Command::RefinePm { left, right, mode } => {
            let params = json!({
                "left": path_str(&left),
                "right": path_str(&right),
                "mode": mode.map(|m| pm_mode_name(m).to_string()),
            });
            let out = cmd_refine_pm(ctx, &left, &right, mode);
            ctx.emit("refine-pm", params, out)
        }
        Command::EmitEtr { mc, mdp, out, solver_cmd } => {
            let params = json!({
                "mc": path_str(&mc),
                "mdp": path_str(&mdp),
                "out": out.as_deref().map(path_str),
                "solver_cmd": solver_cmd,
            });
            let res = cmd_emit_etr(&mc, &mdp, out.as_deref(), params["solver_cmd"].as_str());
            ctx.emit("emit-etr", params, res)
        }
        Command::Gadget(g) => run_gadget(ctx, g),
        Command::Oracle(o) => run_oracle(ctx, o),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn mode_name(m: BisimMode) -> &'static str {
    match m {
        BisimMode::MdpMc => "mdp-mc",
        BisimMode::MdpMdp => "mdp-mdp",
    }
}

fn pm_mode_name(m: PmMode) -> &'static str {
    match m {
        PmMode::McMdp => "mc-mdp",
        PmMode::MdpMdp => "mdp-mdp",
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Mdp> {
    parse_model(&read(path)?)
}

/// Parses a word against a model's label names: comma-separated names when a
/// comma is present, one character per label otherwise.
fn parse_word(m: &Mdp, word: &str) -> Result<Vec<LabelId>> {
    let tokens: Vec<String> = if word.contains(',') {
        word.split(',').filter(|t| !t.is_empty()).map(str::to_string).collect()
    } else {
        word.chars().map(|c| c.to_string()).collect()
    };
    tokens
        .iter()
        .map(|t| {
            m.label_index(t)
                .ok_or_else(|| Error::Parse(format!("unknown label {t:?} in word")))
        })
        .collect()
}

/// Renders a word over the given label names, mirroring `parse_word`.
fn render_word(names: &[String], w: &[LabelId]) -> String {
    let sep = if names.iter().all(|n| n.chars().count() == 1) { "" } else { "," };
    w.iter().map(|a| names[a.0].as_str()).collect::<Vec<_>>().join(sep)
}

fn model_value(m: &Mdp) -> Value {
    serde_json::from_str(&serialize_model(m)).expect("serialized model is valid JSON")
}

// ---------------------------------------------------------------------------
// plain subcommands
// ---------------------------------------------------------------------------

fn cmd_validate(model: &Path) -> Result<Outcome> {
    match parse_model(&read(model)?) {
        Ok(m) => Ok(Outcome::new(
            json!({
                "valid": true,
                "states": m.n_states(),
                "labels": m.n_labels(),
                "moves": m.move_count(),
                "is_mc": m.is_mc(),
            }),
            Value::Null,
            format!(
                "valid ({} states, {} labels, {} moves{})",
                m.n_states(),
                m.n_labels(),
                m.move_count(),
                if m.is_mc() { ", Markov chain" } else { "" }
            ),
        )),
        Err(Error::Validation(violations)) => Ok(Outcome::new(
            json!({ "valid": false, "violations": violations }),
            Value::Null,
            format!("invalid ({} violations)", violations.len()),
        )),
        Err(e) => Err(e),
    }
}

fn cmd_tr(ctx: &Ctx, model: &Path, word: &str, strategy: Option<&Path>) -> Result<Outcome> {
    let m = load_model(model)?;
    let w = parse_word(&m, word)?;
    let prob = match strategy {
        None if m.is_mc() => trace_prob(&m, &LocalStrategy::uniform(&m), &w),
        None => {
            return Err(Error::Precondition(
                "the model has nondeterministic choices; pass --strategy".into(),
            ))
        }
        Some(path) => match parse_strategy(&read(path)?, &m)? {
            ParsedStrategy::Memoryless(alpha) => trace_prob(&m, &alpha, &w),
            ParsedStrategy::FiniteMemory(fm) => sub_dis_finite_memory(&m, &fm, &w)?.norm(),
        },
    };
    let rendered = render_word(m.labels(), &w);
    Ok(Outcome::new(
        json!({ "word": rendered, "probability": ctx.rational(&prob) }),
        Value::Null,
        format!("Tr({rendered:?}) = {}", format_rat(&prob)),
    ))
}

fn cmd_equiv(ctx: &Ctx, mc1: &Path, mc2: &Path) -> Result<Outcome> {
    let c1 = load_model(mc1)?;
    let c2 = load_model(mc2)?;
    let names = union_label_names(&c1, &c2);
    let outcome = mc_equiv_detailed(&c1, &c2)?;
    match outcome.verdict {
        EquivVerdict::Equivalent => Ok(Outcome::new(
            json!({ "equivalent": true, "closure_insertions": outcome.insertions }),
            Value::Null,
            "trace equivalent".to_string(),
        )),
        EquivVerdict::Distinguished { word, lhs, rhs } => {
            let rendered = render_word(&names, &word);
            let summary = format!(
                "distinguished by {rendered:?}: {} vs {}",
                format_rat(&lhs),
                format_rat(&rhs)
            );
            Ok(Outcome::new(
                json!({ "equivalent": false, "closure_insertions": outcome.insertions }),
                json!({
                    "word": rendered,
                    "lhs": ctx.rational(&lhs),
                    "rhs": ctx.rational(&rhs),
                }),
                summary,
            ))
        }
    }
}

fn cmd_refine_mdp_mc(ctx: &Ctx, mdp: &Path, mc: &Path) -> Result<Outcome> {
    let d = load_model(mdp)?;
    let c = load_model(mc)?;
    match refines_mc(&d, &c)? {
        RefinesVerdict::Refines => Ok(Outcome::new(
            json!({ "refines": true }),
            Value::Null,
            "every strategy of the MDP induces the chain's trace function".to_string(),
        )),
        RefinesVerdict::Fails(w) => {
            let rendered = render_word(&w.label_names, &w.word);
            let summary = format!(
                "fails on {rendered:?}: MDP reaches {}, chain has {}",
                format_rat(&w.mdp_prob),
                format_rat(&w.mc_prob)
            );
            let schedule: Vec<String> =
                w.strategies.iter().map(|s| s.describe(&d)).collect();
            Ok(Outcome::new(
                json!({ "refines": false }),
                json!({
                    "word": rendered,
                    "mdp_probability": ctx.rational(&w.mdp_prob),
                    "mc_probability": ctx.rational(&w.mc_prob),
                    "schedule": schedule,
                }),
                summary,
            ))
        }
    }
}

fn cmd_bisim(ctx: &Ctx, m1: &Path, m2: &Path, mode: Option<BisimMode>) -> Result<Outcome> {
    let a = load_model(m1)?;
    let b = load_model(m2)?;
    let mode = mode.unwrap_or(if b.is_mc() { BisimMode::MdpMc } else { BisimMode::MdpMdp });
    let union = disjoint_union(&a, &b);
    let mu1 = union.embed_left(a.initial());
    let mu2 = union.embed_right(b.initial());
    let space = match mode {
        BisimMode::MdpMc => bisim_space_mdp_mc(&a, &b)?,
        BisimMode::MdpMdp => bisim_space_two_mdps_with_guard(&union.model, ctx.guard)?,
    };
    let related = bisimilar(&space, &mu1, &mu2)?;
    let verdict = json!({
        "bisimilar": related,
        "mode": mode_name(mode),
        "space_dimension": space.dimension(),
        "productive_sweeps": space.stabilized_at,
    });
    if related {
        return Ok(Outcome::new(verdict, Value::Null, "bisimilar".to_string()));
    }
    let witness = match search_certificate(
        &union.model,
        &mu1,
        &mu2,
        union.model.n_states(),
        ctx.guard,
    )? {
        Some(cert) => {
            let doc: Value = serde_json::from_str(&serialize_certificate(&cert, &union.model))
                .expect("serialized certificate is valid JSON");
            json!({ "certificate": doc })
        }
        None => Value::Null,
    };
    Ok(Outcome::new(verdict, witness, "not bisimilar".to_string()))
}

fn cmd_verify_cert(ctx: &Ctx, m1: &Path, m2: &Path, cert: &Path) -> Result<Outcome> {
    let a = load_model(m1)?;
    let b = load_model(m2)?;
    let union = disjoint_union(&a, &b);
    let parsed = parse_certificate(&read(cert)?, &union.model)?;
    let mu1 = union.embed_left(a.initial());
    let mu2 = union.embed_right(b.initial());
    match verify_certificate(&union.model, &mu1, &mu2, &parsed)? {
        CertificateVerdict::Accept { lhs, rhs } => Ok(Outcome::new(
            json!({
                "accepted": true,
                "lhs": ctx.rational(&lhs),
                "rhs": ctx.rational(&rhs),
            }),
            Value::Null,
            format!(
                "accepted: the final chain vector separates {} from {}",
                format_rat(&lhs),
                format_rat(&rhs)
            ),
        )),
        CertificateVerdict::Reject { reason } => Ok(Outcome::new(
            json!({ "accepted": false, "reason": reason }),
            Value::Null,
            format!("rejected: {reason}"),
        )),
    }
}

fn strategy_value(p: &PureStrategy) -> Value {
    json!({ "choices": p.0 })
}

fn cmd_refine_pm(ctx: &Ctx, left: &Path, right: &Path, mode: Option<PmMode>) -> Result<Outcome> {
    let l = load_model(left)?;
    let r = load_model(right)?;
    let mode = mode.unwrap_or(if l.is_mc() { PmMode::McMdp } else { PmMode::MdpMdp });
    let verdict = match mode {
        PmMode::McMdp => refine_mc_mdp_pm_with_guard(&l, &r, ctx.guard)?,
        PmMode::MdpMdp => refine_pm_pm_with_guard(&l, &r, ctx.guard)?,
    };
    let considered = json!({
        "left": pure_strategy_count(&l).to_string(),
        "right": pure_strategy_count(&r).to_string(),
    });
    match verdict {
        PmVerdict::Yes { witness } => Ok(Outcome::new(
            json!({
                "refines": true,
                "mode": pm_mode_name(mode),
                "pure_strategies": considered,
            }),
            witness.map_or(Value::Null, |p| json!({ "strategy": strategy_value(&p) })),
            "refines under pure memoryless strategies".to_string(),
        )),
        PmVerdict::No { universal_witness } => Ok(Outcome::new(
            json!({
                "refines": false,
                "mode": pm_mode_name(mode),
                "pure_strategies": considered,
            }),
            universal_witness
                .map_or(Value::Null, |p| json!({ "unanswerable_strategy": strategy_value(&p) })),
            "does not refine under pure memoryless strategies".to_string(),
        )),
    }
}

fn cmd_emit_etr(
    mc: &Path,
    mdp: &Path,
    out: Option<&Path>,
    solver_cmd: Option<&str>,
) -> Result<Outcome> {
    let c = load_model(mc)?;
    let d = load_model(mdp)?;
    let (inst, script) = emit_etr(&c, &d)?;
    let script_field = match out {
        Some(path) => {
            write_file(path, &script)?;
            json!({ "script_path": path_str(path) })
        }
        None => json!({ "script": script }),
    };
    let solver = match solver_cmd {
        Some(cmd) => run_solver(cmd, &script)?,
        None => Value::Null,
    };
    let mut verdict = json!({
        "variables": inst.variables.len(),
        "assertions": inst.constraints.len(),
        "solver": solver,
    });
    verdict
        .as_object_mut()
        .expect("verdict is an object")
        .extend(script_field.as_object().expect("script field is an object").clone());
    let summary = format!(
        "emitted {} variables and {} assertions{}",
        inst.variables.len(),
        inst.constraints.len(),
        match verdict["solver"].get("verdict").and_then(Value::as_str) {
            Some(v) => format!("; solver says {v}"),
            None => String::new(),
        }
    );
    Ok(Outcome::new(verdict, Value::Null, summary))
}

/// Feeds the script to `sh -c <cmd>` on stdin and scans the output for a
/// sat/unsat token.
fn run_solver(cmd: &str, script: &str) -> Result<Value> {
    let mut child = Process::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Parse(format!("cannot start solver command: {e}")))?;
    // A command that exits without reading stdin (EPIPE) is fine; it may
    // still print a verdict.
    if let Err(e) = child.stdin.take().expect("stdin was piped").write_all(script.as_bytes()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(Error::Parse(format!("cannot feed solver command: {e}")));
        }
    }
    let output = child
        .wait_with_output()
        .map_err(|e| Error::Parse(format!("solver command failed: {e}")))?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    let verdict = stdout
        .split_whitespace()
        .find(|t| *t == "sat" || *t == "unsat" || *t == "unknown")
        .unwrap_or("unknown");
    Ok(json!({
        "command": cmd,
        "exit_code": output.status.code(),
        "verdict": verdict,
    }))
}

// ---------------------------------------------------------------------------
// gadgets
// ---------------------------------------------------------------------------

fn run_gadget(ctx: &Ctx, g: GadgetCommand) -> i32 {
    match g {
        GadgetCommand::SubsetSum { values, target, out_prefix } => {
            let params = json!({
                "values": values,
                "target": target,
                "out_prefix": out_prefix.as_deref().map(path_str),
            });
            let out = gadget_subset_sum(&values, target)
                .and_then(|g| gadget_outcome(g, out_prefix.as_deref()));
            ctx.emit("gadget subset-sum", params, out)
        }
        GadgetCommand::Qss { s, t, target, out_prefix } => {
            let params = json!({
                "s": s,
                "t": t,
                "target": target,
                "out_prefix": out_prefix.as_deref().map(path_str),
            });
            let out =
                gadget_qss(&s, &t, target).and_then(|g| gadget_outcome(g, out_prefix.as_deref()));
            ctx.emit("gadget qss", params, out)
        }
        GadgetCommand::Nmf { matrix, rank, out_prefix } => {
            let params = json!({
                "matrix": path_str(&matrix),
                "rank": rank,
                "out_prefix": out_prefix.as_deref().map(path_str),
            });
            let out = read(&matrix)
                .and_then(|text| parse_matrix(&text))
                .and_then(|m| gadget_nmf(&m, rank))
                .and_then(|g| gadget_outcome(g, out_prefix.as_deref()));
            ctx.emit("gadget nmf", params, out)
        }
        GadgetCommand::PaUniversal { automaton, out_prefix } => {
            let params = json!({
                "automaton": path_str(&automaton),
                "out_prefix": out_prefix.as_deref().map(path_str),
            });
            let out = read(&automaton)
                .and_then(|text| parse_pa(&text))
                .and_then(|pa| gadget_pa_universality(&pa))
                .and_then(|g| gadget_outcome(g, out_prefix.as_deref()));
            ctx.emit("gadget pa-universal", params, out)
        }
        GadgetCommand::Mutual { m1, m2, out_prefix } => {
            let params = json!({
                "m1": path_str(&m1),
                "m2": path_str(&m2),
                "out_prefix": out_prefix.as_deref().map(path_str),
            });
            let out = cmd_gadget_mutual(&m1, &m2, out_prefix.as_deref());
            ctx.emit("gadget mutual", params, out)
        }
    }
}

/// Parses a rational matrix document: {"rows": [["p/q", ...], ...]}.
fn parse_matrix(text: &str) -> Result<RatMatrix> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix document: {e}")))?;
    let rows = doc
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("matrix document needs a \"rows\" array".into()))?;
    if rows.is_empty() {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let width = rows[0].as_array().map(Vec::len).unwrap_or(0);
    if width == 0 {
        return Err(Error::Parse("matrix rows must be non-empty arrays".into()));
    }
    let mut out = RatMatrix::zeros(rows.len(), width);
    for (i, row) in rows.iter().enumerate() {
        let entries = row
            .as_array()
            .filter(|r| r.len() == width)
            .ok_or_else(|| Error::Parse(format!("row {i} is not an array of width {width}")))?;
        for (j, entry) in entries.iter().enumerate() {
            let s = entry
                .as_str()
                .ok_or_else(|| Error::Parse(format!("entry ({i},{j}) is not a string")))?;
            out.set(i, j, parse_rat(s)?);
        }
    }
    Ok(out)
}

/// Writes or embeds the two models of a gadget and assembles the verdict.
fn models_field(left: &Mdp, right: &Mdp, out_prefix: Option<&Path>) -> Result<Value> {
    match out_prefix {
        Some(prefix) => {
            let left_path = format!("{}-left.json", prefix.display());
            let right_path = format!("{}-right.json", prefix.display());
            write_file(Path::new(&left_path), &serialize_model(left))?;
            write_file(Path::new(&right_path), &serialize_model(right))?;
            Ok(json!({ "files": { "left": left_path, "right": right_path } }))
        }
        None => Ok(json!({ "models": { "left": model_value(left), "right": model_value(right) } })),
    }
}

fn gadget_outcome(g: GadgetOutput, out_prefix: Option<&Path>) -> Result<Outcome> {
    let mut verdict = json!({
        "question": g.question,
        "expected_semantics": g.expected_semantics,
    });
    let models = models_field(&g.left, &g.right, out_prefix)?;
    verdict
        .as_object_mut()
        .expect("verdict is an object")
        .extend(models.as_object().expect("models field is an object").clone());
    let summary = format!(
        "built a {}-state vs {}-state instance",
        g.left.n_states(),
        g.right.n_states()
    );
    Ok(Outcome::new(verdict, Value::Null, summary))
}

fn cmd_gadget_mutual(m1: &Path, m2: &Path, out_prefix: Option<&Path>) -> Result<Outcome> {
    let d = load_model(m1)?;
    let e = load_model(m2)?;
    let (d_plus_e, e2) = gadget_mutual(&d, &e)?;
    let mut verdict = json!({
        "question": "does the left coupled model refine the right one? equivalently: \
                     does the first input trace-refine the second?",
        "expected_semantics": {
            "kind": "mutual-coupling",
            "yes_iff": "the first input model trace-refines the second",
            "refinement": "left ⊑ right (unrestricted strategies)",
        },
    });
    let models = models_field(&d_plus_e, &e2, out_prefix)?;
    verdict
        .as_object_mut()
        .expect("verdict is an object")
        .extend(models.as_object().expect("models field is an object").clone());
    let summary = format!(
        "built a {}-state vs {}-state coupled pair",
        d_plus_e.n_states(),
        e2.n_states()
    );
    Ok(Outcome::new(verdict, Value::Null, summary))
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

fn run_oracle(ctx: &Ctx, o: OracleCommand) -> i32 {
    match o {
        OracleCommand::Refine { mdp, mc, depth } => {
            let params = json!({ "mdp": path_str(&mdp), "mc": path_str(&mc), "depth": depth });
            let out = (|| {
                let d = load_model(&mdp)?;
                let c = load_model(&mc)?;
                let names = union_label_names(&d, &c);
                oracle_outcome(ctx, oracle_refines_mc(&d, &c, depth)?, &names)
            })();
            ctx.emit("oracle refine", params, out)
        }
        OracleCommand::Equiv { mc1, mc2, depth } => {
            let params = json!({ "mc1": path_str(&mc1), "mc2": path_str(&mc2), "depth": depth });
            let out = (|| {
                let c1 = load_model(&mc1)?;
                let c2 = load_model(&mc2)?;
                let names = union_label_names(&c1, &c2);
                oracle_outcome(ctx, oracle_mc_equiv(&c1, &c2, depth)?, &names)
            })();
            ctx.emit("oracle equiv", params, out)
        }
    }
}

fn oracle_outcome(ctx: &Ctx, verdict: OracleVerdict, names: &[String]) -> Result<Outcome> {
    match verdict {
        OracleVerdict::NoCounterexampleUpTo { depth } => Ok(Outcome::new(
            json!({ "counterexample_found": false, "depth_scanned": depth }),
            Value::Null,
            format!("no counterexample up to depth {depth} (refutes nothing beyond it)"),
        )),
        OracleVerdict::Counterexample { word, achieved, required, mode } => {
            let rendered = render_word(names, &word);
            let optimization = match mode {
                OracleMode::Max => "max",
                OracleMode::Min => "min",
            };
            let summary = format!(
                "counterexample {rendered:?}: {} achieves {}, required {}",
                optimization,
                format_rat(&achieved),
                format_rat(&required)
            );
            Ok(Outcome::new(
                json!({ "counterexample_found": true }),
                json!({
                    "word": rendered,
                    "achieved": ctx.rational(&achieved),
                    "required": ctx.rational(&required),
                    "optimization": optimization,
                }),
                summary,
            ))
        }
    }
}
