//! Minimal SMT-LIB 2 syntax checking for the scripts this crate emits.
//!
//! This is deliberately not a solver and not a complete reader of the
//! standard. It tokenizes, builds s-expressions, and checks the command and
//! term fragment produced by [`crate::restricted::render_smtlib`]: constant
//! declarations over `Real`/`Int`/`Bool`, assertions over the arithmetic and
//! boolean operators, and `check-sat`. Tests use it to certify emitted
//! scripts are well-formed without shelling out to an external solver.

use std::collections::BTreeSet;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

/// What a validated script contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptSummary {
    pub logic: Option<String>,
    pub declarations: usize,
    pub assertions: usize,
    pub has_check_sat: bool,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' | ')' => {
                tokens.push(c.to_string());
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '"' | '|' => {
                return Err(err(format!(
                    "token starting with {c:?} is outside this checker's fragment"
                )));
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                }
                tokens.push(atom);
            }
        }
    }
    Ok(tokens)
}

fn parse_all(tokens: &[String]) -> Result<Vec<SExpr>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<SExpr>> = Vec::new();
    for tok in tokens {
        match tok.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let list = stack.pop().ok_or_else(|| err("unmatched `)`"))?;
                let expr = SExpr::List(list);
                match stack.last_mut() {
                    Some(parent) => parent.push(expr),
                    None => out.push(expr),
                }
            }
            _ => {
                let expr = SExpr::Atom(tok.clone());
                match stack.last_mut() {
                    Some(parent) => parent.push(expr),
                    None => out.push(expr),
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err(err("unclosed `(`"));
    }
    Ok(out)
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit())
}

fn is_decimal(s: &str) -> bool {
    match s.split_once('.') {
        Some((int, frac)) => is_numeral(int) && is_numeral(frac),
        None => false,
    }
}

/// Operator table: name → (min arity, max arity).
fn op_arity(op: &str) -> Option<(usize, usize)> {
    Some(match op {
        "+" | "*" => (2, usize::MAX),
        "-" => (1, 2),
        "/" => (2, 2),
        "=" | "<=" | "<" | ">=" | ">" => (2, usize::MAX),
        "and" | "or" => (2, usize::MAX),
        "not" => (1, 1),
        _ => return None,
    })
}

fn check_term(term: &SExpr, declared: &BTreeSet<&str>) -> Result<()> {
    match term {
        SExpr::Atom(a) => {
            if is_numeral(a) || is_decimal(a) || a == "true" || a == "false" {
                return Ok(());
            }
            if declared.contains(a.as_str()) {
                return Ok(());
            }
            Err(err(format!("undeclared symbol {a:?} in assertion")))
        }
        SExpr::List(items) => {
            let (head, args) = match items.split_first() {
                Some((SExpr::Atom(op), rest)) => (op, rest),
                Some((SExpr::List(_), _)) => {
                    return Err(err("term application head must be a symbol"))
                }
                None => return Err(err("empty term `()`")),
            };
            let (min, max) = op_arity(head)
                .ok_or_else(|| err(format!("unknown operator {head:?} in assertion")))?;
            if args.len() < min || args.len() > max {
                return Err(err(format!(
                    "operator {head:?} applied to {} arguments",
                    args.len()
                )));
            }
            for arg in args {
                check_term(arg, declared)?;
            }
            Ok(())
        }
    }
}

fn atom(expr: &SExpr) -> Result<&str> {
    match expr {
        SExpr::Atom(a) => Ok(a),
        SExpr::List(_) => Err(err("expected a symbol, found a list")),
    }
}

/// Checks that `text` is a well-formed script in the emitted fragment and
/// returns what it contains.
pub fn validate_script(text: &str) -> Result<ScriptSummary> {
    let commands = parse_all(&tokenize(text)?)?;
    let mut summary = ScriptSummary {
        logic: None,
        declarations: 0,
        assertions: 0,
        has_check_sat: false,
    };
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    for cmd in &commands {
        let items = match cmd {
            SExpr::List(items) => items,
            SExpr::Atom(a) => return Err(err(format!("stray atom {a:?} at top level"))),
        };
        let (head, args) = match items.split_first() {
            Some((SExpr::Atom(h), rest)) => (h.as_str(), rest),
            _ => return Err(err("command must start with a symbol")),
        };
        match head {
            "set-logic" => {
                if args.len() != 1 {
                    return Err(err("set-logic takes exactly one argument"));
                }
                summary.logic = Some(atom(&args[0])?.to_string());
            }
            "set-info" | "set-option" => {
                // Metadata; contents are not interpreted.
            }
            "declare-const" => {
                if args.len() != 2 {
                    return Err(err("declare-const takes a name and a sort"));
                }
                let name = atom(&args[0])?;
                let sort = atom(&args[1])?;
                if !matches!(sort, "Real" | "Int" | "Bool") {
                    return Err(err(format!("unsupported sort {sort:?}")));
                }
                if op_arity(name).is_some() || is_numeral(name) {
                    return Err(err(format!("illegal constant name {name:?}")));
                }
                if !declared.insert(name) {
                    return Err(err(format!("constant {name:?} declared twice")));
                }
                summary.declarations += 1;
            }
            "declare-fun" => {
                if args.len() != 3 {
                    return Err(err("declare-fun takes a name, arguments, and a sort"));
                }
                match &args[1] {
                    SExpr::List(params) if params.is_empty() => {}
                    _ => {
                        return Err(err(
                            "declare-fun with parameters is outside this checker's fragment",
                        ))
                    }
                }
                let name = atom(&args[0])?;
                if !declared.insert(name) {
                    return Err(err(format!("constant {name:?} declared twice")));
                }
                summary.declarations += 1;
            }
            "assert" => {
                if args.len() != 1 {
                    return Err(err("assert takes exactly one term"));
                }
                check_term(&args[0], &declared)?;
                summary.assertions += 1;
            }
            "check-sat" => {
                if !args.is_empty() {
                    return Err(err("check-sat takes no arguments"));
                }
                summary.has_check_sat = true;
            }
            "get-model" | "exit" => {
                if !args.is_empty() {
                    return Err(err(format!("{head} takes no arguments")));
                }
            }
            other => return Err(err(format!("unsupported command {other:?}"))),
        }
    }
    Ok(summary)
}
