//! Bounded-depth brute-force cross-checks for the refinement deciders.
//!
//! Rather than enumerating strategies, each word is scored by backward
//! induction: `v_ε = 𝟏` and `v_{a·u}[q] = opt_m Σ_{q′} m(a,q′)·v_u[q′]`,
//! optimizing per state and step. Linearity and nonnegativity make the
//! stepwise optimum equal the optimum over all strategies, so the bound is
//! exact and the cost is exponential only in the word length.
//!
//! Words are enumerated shortest-first. Within one length the enumeration
//! prepends letters: for each suffix of the previous level (in order), each
//! letter in label order is prepended — the order in which backward induction
//! naturally extends value vectors. Each level is scanned twice, first for
//! maximum-value violations, then for minimum-value ones; the first violation
//! encountered is returned.
//!
//! These checkers can only refute: `NoCounterexampleUpTo` is a statement
//! about the words searched, never a refinement verdict.

use crate::linalg::{Rat, RatVector};
use crate::model::{LabelId, Mdp, StateId};
use crate::semantics::{TraceBasedTable, Word};
use crate::{Error, Result};
use num::{One, Zero};

/// Which extremal strategy value a counterexample separates from the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Max,
    Min,
}

/// Outcome of a bounded word search. A `Counterexample` word is spelled in
/// the combined label space of the two models compared (left model's labels
/// first, as listed by [`union_label_names`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    NoCounterexampleUpTo { depth: usize },
    Counterexample { word: Word, achieved: Rat, required: Rat, mode: OracleMode },
}

/// The merged label list two models are compared over: the left model's
/// labels in order, then the right model's remaining ones in its order.
pub fn union_label_names(m: &Mdp, c: &Mdp) -> Vec<String> {
    let mut names = m.labels().to_vec();
    for l in c.labels() {
        if !names.contains(l) {
            names.push(l.clone());
        }
    }
    names
}

fn check_word(m: &Mdp, w: &[LabelId]) -> Result<()> {
    for a in w {
        if a.0 >= m.n_labels() {
            return Err(Error::Precondition(format!(
                "label index {} out of range for a model with {} labels",
                a.0,
                m.n_labels()
            )));
        }
    }
    Ok(())
}

/// One backward-induction step: per-state optimal value of emitting `a` and
/// continuing with `v`. A label the model lacks (`None`) scores zero.
fn opt_step(m: &Mdp, a: Option<LabelId>, v: &RatVector, maximize: bool) -> RatVector {
    let mut out = RatVector::zeros(m.n_states());
    let Some(a) = a else { return out };
    for q in m.state_ids() {
        let mut best: Option<Rat> = None;
        for mv in m.moves(q) {
            let mut val = Rat::zero();
            for (lab, q2, p) in mv.entries() {
                if *lab == a {
                    val += p * v.get(q2.0);
                }
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    if maximize {
                        val > *b
                    } else {
                        val < *b
                    }
                }
            };
            if better {
                best = Some(val);
            }
        }
        out.set(q.0, best.expect("validated models give every state a move"));
    }
    out
}

fn trace_value(m: &Mdp, w: &[LabelId], maximize: bool) -> Result<Rat> {
    check_word(m, w)?;
    let mut v = RatVector::ones(m.n_states());
    for &a in w.iter().rev() {
        v = opt_step(m, Some(a), &v, maximize);
    }
    Ok(m.initial().to_vector().dot(&v))
}

/// Largest trace probability of `w` over all strategies for `m`.
pub fn max_trace_prob(m: &Mdp, w: &[LabelId]) -> Result<Rat> {
    trace_value(m, w, true)
}

/// Smallest trace probability of `w` over all strategies for `m`.
pub fn min_trace_prob(m: &Mdp, w: &[LabelId]) -> Result<Rat> {
    trace_value(m, w, false)
}

/// [`max_trace_prob`] together with a trace-based table attaining it: each
/// prefix/state entry commits to a move whose backward value is maximal.
pub fn max_trace_table(m: &Mdp, w: &[LabelId]) -> Result<(Rat, TraceBasedTable)> {
    check_word(m, w)?;
    let mut v = RatVector::ones(m.n_states());
    let mut choices: Vec<Vec<usize>> = vec![Vec::new(); w.len()];
    for t in (0..w.len()).rev() {
        let mut next = RatVector::zeros(m.n_states());
        for q in m.state_ids() {
            let mut best: Option<(Rat, usize)> = None;
            for (i, mv) in m.moves(q).iter().enumerate() {
                let mut val = Rat::zero();
                for (lab, q2, p) in mv.entries() {
                    if *lab == w[t] {
                        val += p * v.get(q2.0);
                    }
                }
                if best.as_ref().map_or(true, |(b, _)| val > *b) {
                    best = Some((val, i));
                }
            }
            let (val, idx) = best.expect("validated models give every state a move");
            choices[t].push(idx);
            next.set(q.0, val);
        }
        v = next;
    }
    let total = m.initial().to_vector().dot(&v);

    let mut table = TraceBasedTable::new(w.len());
    for (t, per_state) in choices.iter().enumerate() {
        for (qi, &mi) in per_state.iter().enumerate() {
            let mut weights = vec![Rat::zero(); m.moves(StateId(qi)).len()];
            weights[mi] = Rat::one();
            table.set_entry(w[..t].to_vec(), StateId(qi), weights);
        }
    }
    Ok((total, table))
}

struct Level {
    word: Vec<usize>,
    vmax: RatVector,
    vmin: RatVector,
    vc: RatVector,
}

fn to_word(indices: &[usize]) -> Word {
    indices.iter().map(|&k| LabelId(k)).collect()
}

/// Exhaustive word scan comparing `m`'s extremal values against the chain
/// `c`'s trace probability, over the combined label space.
fn scan(m: &Mdp, c: &Mdp, depth: usize) -> Result<OracleVerdict> {
    let names = union_label_names(m, c);
    let m_of: Vec<Option<LabelId>> = names.iter().map(|n| m.label_index(n)).collect();
    let c_of: Vec<Option<LabelId>> = names.iter().map(|n| c.label_index(n)).collect();
    let mu_m = m.initial().to_vector();
    let mu_c = c.initial().to_vector();

    let mut level = vec![Level {
        word: Vec::new(),
        vmax: RatVector::ones(m.n_states()),
        vmin: RatVector::ones(m.n_states()),
        vc: RatVector::ones(c.n_states()),
    }];
    for d in 0..=depth {
        for entry in &level {
            let achieved = mu_m.dot(&entry.vmax);
            let required = mu_c.dot(&entry.vc);
            if achieved != required {
                return Ok(OracleVerdict::Counterexample {
                    word: to_word(&entry.word),
                    achieved,
                    required,
                    mode: OracleMode::Max,
                });
            }
        }
        for entry in &level {
            let achieved = mu_m.dot(&entry.vmin);
            let required = mu_c.dot(&entry.vc);
            if achieved != required {
                return Ok(OracleVerdict::Counterexample {
                    word: to_word(&entry.word),
                    achieved,
                    required,
                    mode: OracleMode::Min,
                });
            }
        }
        if d == depth {
            break;
        }
        let mut next = Vec::with_capacity(level.len() * names.len());
        for entry in &level {
            for (k, (ma, ca)) in m_of.iter().zip(&c_of).enumerate() {
                let mut word = Vec::with_capacity(entry.word.len() + 1);
                word.push(k);
                word.extend_from_slice(&entry.word);
                next.push(Level {
                    word,
                    vmax: opt_step(m, *ma, &entry.vmax, true),
                    vmin: opt_step(m, *ma, &entry.vmin, false),
                    vc: opt_step(c, *ca, &entry.vc, true),
                });
            }
        }
        level = next;
    }
    Ok(OracleVerdict::NoCounterexampleUpTo { depth })
}

/// Searches all words of length ≤ `depth` for one whose maximal or minimal
/// trace probability in `m` differs from the chain `c`'s trace probability.
/// Refinement into a chain forces every strategy to match it exactly, so any
/// such word refutes `m ⊑ c`.
pub fn oracle_refines_mc(m: &Mdp, c: &Mdp, depth: usize) -> Result<OracleVerdict> {
    if !c.is_mc() {
        return Err(Error::Precondition(
            "refinement oracle target must be a Markov chain".into(),
        ));
    }
    scan(m, c, depth)
}

/// Searches all words of length ≤ `depth` for one where the two chains'
/// trace probabilities differ.
pub fn oracle_mc_equiv(c1: &Mdp, c2: &Mdp, depth: usize) -> Result<OracleVerdict> {
    if !c1.is_mc() || !c2.is_mc() {
        return Err(Error::Precondition(
            "equivalence oracle takes two Markov chains".into(),
        ));
    }
    scan(c1, c2, depth)
}
