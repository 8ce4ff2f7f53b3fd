//! JSON wire format for models, strategies, probabilistic automata, and
//! certificates.
//!
//! Documents are single JSON objects designed to be edited by hand: states
//! and labels are referenced by name, probabilities are rational strings
//! (`"1/3"`, `"2"`), and serialization is canonical — sorted state/label
//! order, lowest-terms rationals, LF line endings — so structurally equal
//! models produce byte-identical documents.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bisim::Certificate;
use crate::gadgets::ProbabilisticAutomaton;
use crate::linalg::{format_rat, parse_rat, Rat, RatMatrix};
use crate::model::{LabelId, Mdp, Move, StateId, SubDist};
use crate::semantics::{FiniteMemoryStrategy, MemorylessStrategy};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    format_version: u32,
    kind: String,
    labels: Vec<String>,
    states: Vec<String>,
    initial: BTreeMap<String, String>,
    moves: BTreeMap<String, Vec<Vec<RawEntry>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    label: String,
    target: String,
    prob: String,
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
}

/// Parses a model document. Syntax errors carry line/column positions;
/// semantic problems name the state/move/entry they occur in. The document's
/// `kind` is checked against the parsed structure (`"mc"` requires exactly
/// one move per state).
pub fn parse_model(text: &str) -> Result<Mdp> {
    let raw: RawModel = serde_json::from_str(text).map_err(json_err)?;
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    if raw.kind != "mc" && raw.kind != "mdp" {
        return Err(Error::Parse(format!(
            "unknown kind {:?} (expected \"mc\" or \"mdp\")",
            raw.kind
        )));
    }

    let state_index = |name: &str| -> Result<StateId> {
        raw.states
            .iter()
            .position(|s| s == name)
            .map(StateId)
            .ok_or_else(|| Error::Parse(format!("unknown state {name:?}")))
    };
    let label_index = |name: &str| -> Result<LabelId> {
        raw.labels
            .iter()
            .position(|l| l == name)
            .map(LabelId)
            .ok_or_else(|| Error::Parse(format!("unknown label {name:?}")))
    };

    let mut initial = SubDist::zeros(raw.states.len());
    for (name, prob) in &raw.initial {
        let q = state_index(name)?;
        let p = parse_rat(prob)
            .map_err(|e| Error::Parse(format!("initial weight of {name:?}: {e}")))?;
        if p.is_negative() || p > Rat::one() {
            return Err(Error::Parse(format!(
                "initial weight of {name:?}: probability {} outside [0,1]",
                format_rat(&p)
            )));
        }
        initial.set(q, p);
    }

    for name in raw.moves.keys() {
        state_index(name)?;
    }
    let mut moves: Vec<Vec<Move>> = Vec::with_capacity(raw.states.len());
    for (qi, name) in raw.states.iter().enumerate() {
        let move_lists = raw
            .moves
            .get(name)
            .ok_or_else(|| Error::Parse(format!("state {name:?} has no move list")))?;
        let mut built = Vec::with_capacity(move_lists.len());
        for (mi, entries) in move_lists.iter().enumerate() {
            let mut raw_entries = Vec::with_capacity(entries.len());
            for e in entries {
                let a = label_index(&e.label)
                    .map_err(|err| Error::Parse(format!("state {name:?} move {mi}: {err}")))?;
                let t = state_index(&e.target)
                    .map_err(|err| Error::Parse(format!("state {name:?} move {mi}: {err}")))?;
                let p = parse_rat(&e.prob).map_err(|err| {
                    Error::Parse(format!("state {name:?} move {mi}: {err}"))
                })?;
                if p.is_negative() || p > Rat::one() {
                    return Err(Error::Parse(format!(
                        "state {name:?} move {mi} entry ({:?}, {:?}): probability {} outside [0,1]",
                        e.label,
                        e.target,
                        format_rat(&p)
                    )));
                }
                raw_entries.push((a, t, p));
            }
            built.push(Move::from_entries(raw_entries));
        }
        let _ = qi;
        built.shrink_to_fit();
        moves.push(built);
    }

    let model = Mdp::new(raw.labels, raw.states, initial, moves)?;
    if raw.kind == "mc" && !model.is_mc() {
        return Err(Error::Validation(vec![
            "document kind is \"mc\" but some state has more than one move".to_string(),
        ]));
    }
    Ok(model)
}

/// Serializes a model to its canonical document: states and labels sorted by
/// name, sorted map keys, lowest-terms rationals, a trailing newline, LF only.
pub fn serialize_model(m: &Mdp) -> String {
    let mut label_order: Vec<usize> = (0..m.n_labels()).collect();
    label_order.sort_by(|&i, &j| m.labels()[i].cmp(&m.labels()[j]));
    let mut state_order: Vec<usize> = (0..m.n_states()).collect();
    state_order.sort_by(|&i, &j| m.states()[i].cmp(&m.states()[j]));

    let labels: Vec<String> = label_order.iter().map(|&i| m.labels()[i].clone()).collect();
    let states: Vec<String> = state_order.iter().map(|&i| m.states()[i].clone()).collect();

    let mut initial = BTreeMap::new();
    for q in m.initial().support() {
        initial.insert(m.state_name(q).to_string(), format_rat(m.initial().get(q)));
    }

    let mut moves = BTreeMap::new();
    for q in m.state_ids() {
        let lists: Vec<Vec<RawEntry>> = m
            .moves(q)
            .iter()
            .map(|mv| {
                let mut entries: Vec<RawEntry> = mv
                    .entries()
                    .iter()
                    .map(|(a, t, p)| RawEntry {
                        label: m.label_name(*a).to_string(),
                        target: m.state_name(*t).to_string(),
                        prob: format_rat(p),
                    })
                    .collect();
                entries.sort_by(|x, y| (&x.label, &x.target).cmp(&(&y.label, &y.target)));
                entries
            })
            .collect();
        moves.insert(m.state_name(q).to_string(), lists);
    }

    let raw = RawModel {
        format_version: FORMAT_VERSION,
        kind: if m.is_mc() { "mc" } else { "mdp" }.to_string(),
        labels,
        states,
        initial,
        moves,
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("model serialization");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    format_version: u32,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    choices: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    memories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_memory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<Vec<RawOutput>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    update: Option<Vec<RawUpdate>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    memory: String,
    /// `null` is a wildcard covering every state without an explicit entry.
    state: Option<String>,
    choice: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUpdate {
    memory: String,
    label: String,
    /// `null` is a wildcard covering every successor state without an
    /// explicit entry.
    target: Option<String>,
    next: String,
}

/// A parsed strategy document.
pub enum ParsedStrategy {
    Memoryless(MemorylessStrategy),
    FiniteMemory(FiniteMemoryStrategy),
}

/// Parses a strategy document against a model. Memoryless documents list a
/// weight vector per state (aligned with the state's move list); finite-memory
/// documents give a memory set with output and update rules, where `null`
/// state/target fields act as wildcards. The result is validated for
/// totality and distribution sums.
pub fn parse_strategy(text: &str, m: &Mdp) -> Result<ParsedStrategy> {
    let raw: RawStrategy = serde_json::from_str(text).map_err(json_err)?;
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    match raw.kind.as_str() {
        "memoryless" => {
            let choices = raw
                .choices
                .ok_or_else(|| Error::Parse("memoryless strategy needs \"choices\"".into()))?;
            for name in choices.keys() {
                if m.state_index(name).is_none() {
                    return Err(Error::Parse(format!("unknown state {name:?}")));
                }
            }
            let mut weights = Vec::with_capacity(m.n_states());
            for q in m.state_ids() {
                let name = m.state_name(q);
                let row = choices
                    .get(name)
                    .ok_or_else(|| Error::Parse(format!("state {name:?} has no choice row")))?;
                let parsed: Result<Vec<Rat>> = row
                    .iter()
                    .map(|s| {
                        parse_rat(s)
                            .map_err(|e| Error::Parse(format!("choice at {name:?}: {e}")))
                    })
                    .collect();
                weights.push(parsed?);
            }
            Ok(ParsedStrategy::Memoryless(MemorylessStrategy::from_weights(m, weights)?))
        }
        "finite-memory" => {
            let memories = raw
                .memories
                .ok_or_else(|| Error::Parse("finite-memory strategy needs \"memories\"".into()))?;
            let mem_index = |name: &str| -> Result<usize> {
                memories
                    .iter()
                    .position(|x| x == name)
                    .ok_or_else(|| Error::Parse(format!("unknown memory {name:?}")))
            };
            let initial = mem_index(
                raw.initial_memory
                    .as_deref()
                    .ok_or_else(|| Error::Parse("finite-memory strategy needs \"initial_memory\"".into()))?,
            )?;
            let outputs = raw
                .output
                .ok_or_else(|| Error::Parse("finite-memory strategy needs \"output\"".into()))?;
            let updates = raw
                .update
                .ok_or_else(|| Error::Parse("finite-memory strategy needs \"update\"".into()))?;

            let n_mem = memories.len();
            let mut out_specific: BTreeMap<(usize, usize), Vec<Rat>> = BTreeMap::new();
            let mut out_wild: BTreeMap<usize, Vec<Rat>> = BTreeMap::new();
            for o in &outputs {
                let mem = mem_index(&o.memory)?;
                let parsed: Result<Vec<Rat>> = o
                    .choice
                    .iter()
                    .map(|s| parse_rat(s))
                    .collect();
                let parsed = parsed?;
                match &o.state {
                    Some(name) => {
                        let q = m
                            .state_index(name)
                            .ok_or_else(|| Error::Parse(format!("unknown state {name:?}")))?;
                        out_specific.insert((mem, q.0), parsed);
                    }
                    None => {
                        out_wild.insert(mem, parsed);
                    }
                }
            }
            let mut up_specific: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
            let mut up_wild: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for u in &updates {
                let mem = mem_index(&u.memory)?;
                let a = m
                    .label_index(&u.label)
                    .ok_or_else(|| Error::Parse(format!("unknown label {:?}", u.label)))?;
                let next = mem_index(&u.next)?;
                match &u.target {
                    Some(name) => {
                        let q = m
                            .state_index(name)
                            .ok_or_else(|| Error::Parse(format!("unknown state {name:?}")))?;
                        up_specific.insert((mem, a.0, q.0), next);
                    }
                    None => {
                        up_wild.insert((mem, a.0), next);
                    }
                }
            }

            let mut output = vec![Vec::new(); n_mem];
            for (mem, rows) in output.iter_mut().enumerate() {
                for q in m.state_ids() {
                    let row = out_specific
                        .get(&(mem, q.0))
                        .or_else(|| out_wild.get(&mem))
                        .ok_or_else(|| {
                            Error::Parse(format!(
                                "no output rule for (memory {:?}, state {:?})",
                                memories[mem],
                                m.state_name(q)
                            ))
                        })?;
                    rows.push(row.clone());
                }
            }
            let mut update = vec![vec![Vec::new(); m.n_labels()]; n_mem];
            for (mem, by_label) in update.iter_mut().enumerate() {
                for (lab, row) in by_label.iter_mut().enumerate() {
                    for q in m.state_ids() {
                        let next = up_specific
                            .get(&(mem, lab, q.0))
                            .or_else(|| up_wild.get(&(mem, lab)))
                            .ok_or_else(|| {
                                Error::Parse(format!(
                                    "no update rule for (memory {:?}, label {:?})",
                                    memories[mem],
                                    m.labels()[lab]
                                ))
                            })?;
                        row.push(*next);
                    }
                }
            }

            let s = FiniteMemoryStrategy { memories, initial, update, output };
            s.validate(m)?;
            Ok(ParsedStrategy::FiniteMemory(s))
        }
        other => Err(Error::Parse(format!(
            "unknown strategy kind {other:?} (expected \"memoryless\" or \"finite-memory\")"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Probabilistic automata
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPa {
    format_version: u32,
    letters: Vec<String>,
    states: Vec<String>,
    initial: BTreeMap<String, String>,
    accepting: Vec<String>,
    delta: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
}

/// Parses a probabilistic-automaton document: per-letter row-stochastic
/// transition maps, an initial distribution, and an accepting state set.
pub fn parse_pa(text: &str) -> Result<ProbabilisticAutomaton> {
    let raw: RawPa = serde_json::from_str(text).map_err(json_err)?;
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let n = raw.states.len();
    if n == 0 {
        return Err(Error::Parse("automaton has no states".into()));
    }
    let state_index = |name: &str| -> Result<usize> {
        raw.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::Parse(format!("unknown state {name:?}")))
    };

    let mut initial = vec![Rat::zero(); n];
    for (name, prob) in &raw.initial {
        let q = state_index(name)?;
        initial[q] = parse_rat(prob)
            .map_err(|e| Error::Parse(format!("initial weight of {name:?}: {e}")))?;
    }
    if initial.iter().any(|p| p.is_negative())
        || !initial.iter().fold(Rat::zero(), |acc, p| acc + p).is_one()
    {
        return Err(Error::Parse("initial weights are not a distribution".into()));
    }

    let mut accepting = vec![false; n];
    for name in &raw.accepting {
        accepting[state_index(name)?] = true;
    }

    let mut delta = Vec::with_capacity(raw.letters.len());
    for letter in &raw.letters {
        let rows = raw
            .delta
            .get(letter)
            .ok_or_else(|| Error::Parse(format!("letter {letter:?} has no transition map")))?;
        let mut mat = RatMatrix::zeros(n, n);
        for (from, tos) in rows {
            let i = state_index(from)?;
            for (to, prob) in tos {
                let j = state_index(to)?;
                let p = parse_rat(prob).map_err(|e| {
                    Error::Parse(format!("transition {from:?} --{letter}--> {to:?}: {e}"))
                })?;
                mat.set(i, j, p);
            }
        }
        if !mat.is_row_stochastic() {
            return Err(Error::Parse(format!(
                "letter {letter:?} transition matrix is not row-stochastic"
            )));
        }
        delta.push(mat);
    }
    for letter in raw.delta.keys() {
        if !raw.letters.contains(letter) {
            return Err(Error::Parse(format!("delta references unknown letter {letter:?}")));
        }
    }

    Ok(ProbabilisticAutomaton {
        letters: raw.letters,
        states: raw.states,
        initial,
        accepting,
        delta,
    })
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    format_version: u32,
    k: usize,
    back_refs: Vec<usize>,
    labels: Vec<String>,
    strategies: Vec<BTreeMap<String, usize>>,
}

/// Parses a non-bisimilarity certificate against the disjoint-union model it
/// is meant to be verified over. Strategy maps must cover every union state.
pub fn parse_certificate(text: &str, union: &Mdp) -> Result<Certificate> {
    let raw: RawCertificate = serde_json::from_str(text).map_err(json_err)?;
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let mut labels = Vec::with_capacity(raw.labels.len());
    for name in &raw.labels {
        labels.push(
            union
                .label_index(name)
                .ok_or_else(|| Error::Parse(format!("unknown label {name:?}")))?,
        );
    }
    let mut strategies = Vec::with_capacity(raw.strategies.len());
    for (idx, map) in raw.strategies.iter().enumerate() {
        for name in map.keys() {
            if union.state_index(name).is_none() {
                return Err(Error::Parse(format!(
                    "certificate strategy {idx} references unknown state {name:?}"
                )));
            }
        }
        let mut choice = Vec::with_capacity(union.n_states());
        for q in union.state_ids() {
            let name = union.state_name(q);
            let mv = map.get(name).ok_or_else(|| {
                Error::Parse(format!(
                    "certificate strategy {idx} has no choice for state {name:?}"
                ))
            })?;
            choice.push(*mv);
        }
        let pure = crate::semantics::PureStrategy(choice);
        pure.validate(union)?;
        strategies.push(pure);
    }
    Ok(Certificate { k: raw.k, back_refs: raw.back_refs, labels, strategies })
}

/// Serializes a certificate over a union model to its JSON document.
pub fn serialize_certificate(cert: &Certificate, union: &Mdp) -> String {
    let raw = RawCertificate {
        format_version: FORMAT_VERSION,
        k: cert.k,
        back_refs: cert.back_refs.clone(),
        labels: cert.labels.iter().map(|a| union.label_name(*a).to_string()).collect(),
        strategies: cert
            .strategies
            .iter()
            .map(|s| {
                union
                    .state_ids()
                    .map(|q| (union.state_name(q).to_string(), s.chosen(q)))
                    .collect()
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("certificate serialization");
    text.push('\n');
    text
}
