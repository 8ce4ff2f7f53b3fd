//! The report envelope shared by every subcommand: a deterministic JSON
//! document on stdout, a one-line summary on stderr, and the exit-code
//! mapping for errors. Key order is alphabetical (serde_json's default map),
//! so identical invocations produce byte-identical output; wall-clock timing
//! is only filled in under the opt-in `--timings` flag for that reason.

use num::ToPrimitive;
use serde_json::{json, Value};
use std::time::Instant;
use tracelab_core::linalg::{format_rat, Rat};
use tracelab_core::Error;

/// Per-invocation rendering context.
pub struct Ctx {
    pub decimal: bool,
    pub timings: bool,
    pub guard: u64,
    started: Instant,
}

/// What a successful subcommand hands back for printing.
pub struct Outcome {
    pub verdict: Value,
    pub witness: Value,
    pub summary: String,
}

impl Outcome {
    pub fn new(verdict: Value, witness: Value, summary: impl Into<String>) -> Outcome {
        Outcome { verdict, witness, summary: summary.into() }
    }
}

impl Ctx {
    pub fn new(decimal: bool, timings: bool, guard: u64) -> Ctx {
        Ctx { decimal, timings, guard, started: Instant::now() }
    }

    /// Renders a probability: an exact rational string, or with `--decimal`
    /// an object pairing the exact value with a marked approximation.
    pub fn rational(&self, r: &Rat) -> Value {
        if self.decimal {
            json!({ "exact": format_rat(r), "approximate": r.to_f64() })
        } else {
            Value::String(format_rat(r))
        }
    }

    /// Prints the report and summary, returning the process exit code.
    pub fn emit(&self, command: &str, parameters: Value, result: Result<Outcome, Error>) -> i32 {
        let (verdict, witness, error, summary, code) = match result {
            Ok(o) => (o.verdict, o.witness, Value::Null, o.summary, 0),
            Err(e) => {
                let summary = format!("error: {e}");
                (Value::Null, Value::Null, error_value(&e), summary, exit_code(&e))
            }
        };
        let wall = if self.timings {
            json!(self.started.elapsed().as_millis() as u64)
        } else {
            Value::Null
        };
        let report = json!({
            "tool": "tracelab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "parameters": parameters,
            "verdict": verdict,
            "witness": witness,
            "timings": { "wall_ms": wall },
            "error": error,
        });
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        eprintln!("tracelab {command}: {summary}");
        code
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::Precondition(_) => 1,
        Error::GuardExceeded { .. } => 2,
        Error::Internal(_) => 3,
    }
}

fn error_value(e: &Error) -> Value {
    match e {
        Error::Parse(_) => json!({ "kind": "parse", "message": e.to_string() }),
        Error::Validation(violations) => json!({
            "kind": "validation",
            "message": "the model violates structural invariants",
            "violations": violations,
        }),
        Error::Precondition(_) => json!({ "kind": "precondition", "message": e.to_string() }),
        // u128/u64 rendered as strings so no JSON consumer truncates them.
        Error::GuardExceeded { required, limit } => json!({
            "kind": "guard-exceeded",
            "message": e.to_string(),
            "required": required.to_string(),
            "limit": limit.to_string(),
        }),
        Error::Internal(_) => json!({ "kind": "internal", "message": e.to_string() }),
    }
}
