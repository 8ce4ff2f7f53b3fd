//! Step semantics: strategies, transition matrices, sub-distributions along
//! words, trace probabilities, strategy flattening, and induced chains.
//!
//! The central objects are the per-label transition matrices Δ_α(a) induced
//! by a local strategy α: stepping a sub-distribution μ on label `a` is the
//! row-vector product μ·Δ_α(a), and the probability of emitting a word is the
//! total mass left after stepping through all of its labels.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::linalg::{Rat, RatMatrix};
use crate::model::{LabelId, Mdp, Move, StateId, SubDist};
use crate::{Error, Result};

/// A finite word over a model's alphabet.
pub type Word = Vec<LabelId>;

/// Renders a word using label names; single-character alphabets concatenate,
/// anything else joins with dots.
pub fn format_word(m: &Mdp, w: &[LabelId]) -> String {
    if w.is_empty() {
        return "ε".to_string();
    }
    let names: Vec<&str> = w.iter().map(|a| m.label_name(*a)).collect();
    if names.iter().all(|n| n.chars().count() == 1) {
        names.concat()
    } else {
        names.join(".")
    }
}

/// Per-state distribution over that state's moves (dense: one weight vector
/// per state, aligned with the model's move lists).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LocalStrategy {
    weights: Vec<Vec<Rat>>,
}

/// A memoryless strategy plays the same local strategy after every history.
pub type MemorylessStrategy = LocalStrategy;

impl LocalStrategy {
    pub fn uniform(m: &Mdp) -> LocalStrategy {
        let weights = m
            .state_ids()
            .map(|q| {
                let k = m.moves(q).len();
                vec![Rat::new(1.into(), (k as i64).into()); k]
            })
            .collect();
        LocalStrategy { weights }
    }

    pub fn from_weights(m: &Mdp, weights: Vec<Vec<Rat>>) -> Result<LocalStrategy> {
        if weights.len() != m.n_states() {
            return Err(Error::Precondition(format!(
                "strategy covers {} states, model has {}",
                weights.len(),
                m.n_states()
            )));
        }
        for q in m.state_ids() {
            let w = &weights[q.0];
            if w.len() != m.moves(q).len() {
                return Err(Error::Precondition(format!(
                    "strategy at state {:?} weights {} moves, state has {}",
                    m.state_name(q),
                    w.len(),
                    m.moves(q).len()
                )));
            }
            if w.iter().any(num::Signed::is_negative) {
                return Err(Error::Precondition(format!(
                    "strategy at state {:?} has a negative weight",
                    m.state_name(q)
                )));
            }
            if !w.iter().fold(Rat::zero(), |acc, x| acc + x).is_one() {
                return Err(Error::Precondition(format!(
                    "strategy weights at state {:?} do not sum to 1",
                    m.state_name(q)
                )));
            }
        }
        Ok(LocalStrategy { weights })
    }

    pub fn weights(&self, q: StateId) -> &[Rat] {
        &self.weights[q.0]
    }

    pub fn is_pure(&self) -> bool {
        self.weights
            .iter()
            .all(|w| w.iter().filter(|x| !x.is_zero()).count() == 1)
    }
}

/// A pure memoryless strategy: one move index per state.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct PureStrategy(pub Vec<usize>);

impl PureStrategy {
    pub fn validate(&self, m: &Mdp) -> Result<()> {
        if self.0.len() != m.n_states() {
            return Err(Error::Precondition(format!(
                "pure strategy covers {} states, model has {}",
                self.0.len(),
                m.n_states()
            )));
        }
        for q in m.state_ids() {
            if self.0[q.0] >= m.moves(q).len() {
                return Err(Error::Precondition(format!(
                    "pure strategy picks move {} at state {:?}, which has {} moves",
                    self.0[q.0],
                    m.state_name(q),
                    m.moves(q).len()
                )));
            }
        }
        Ok(())
    }

    pub fn to_local(&self, m: &Mdp) -> LocalStrategy {
        let weights = m
            .state_ids()
            .map(|q| {
                let mut w = vec![Rat::zero(); m.moves(q).len()];
                w[self.0[q.0]] = Rat::one();
                w
            })
            .collect();
        LocalStrategy { weights }
    }

    pub fn chosen(&self, q: StateId) -> usize {
        self.0[q.0]
    }
}

/// A finite-memory strategy: a memory set with an initial element, an update
/// function fed the emitted label and the successor state, and a per
/// (memory, state) output distribution over moves.
#[derive(Clone, Debug)]
pub struct FiniteMemoryStrategy {
    pub memories: Vec<String>,
    pub initial: usize,
    /// `update[mem][label][state]` = memory after emitting `label` and
    /// landing in `state`.
    pub update: Vec<Vec<Vec<usize>>>,
    /// `output[mem][state]` = weights over `moves(state)`.
    pub output: Vec<Vec<Vec<Rat>>>,
}

impl FiniteMemoryStrategy {
    pub fn validate(&self, m: &Mdp) -> Result<()> {
        let n_mem = self.memories.len();
        if n_mem == 0 {
            return Err(Error::Precondition("strategy has no memory states".into()));
        }
        if self.initial >= n_mem {
            return Err(Error::Precondition("initial memory out of range".into()));
        }
        if self.update.len() != n_mem || self.output.len() != n_mem {
            return Err(Error::Precondition(
                "update/output tables do not cover the memory set".into(),
            ));
        }
        for mem in 0..n_mem {
            if self.update[mem].len() != m.n_labels() {
                return Err(Error::Precondition(format!(
                    "update table at memory {:?} does not cover the alphabet",
                    self.memories[mem]
                )));
            }
            for row in &self.update[mem] {
                if row.len() != m.n_states() || row.iter().any(|&t| t >= n_mem) {
                    return Err(Error::Precondition(format!(
                        "update table at memory {:?} is not total",
                        self.memories[mem]
                    )));
                }
            }
            if self.output[mem].len() != m.n_states() {
                return Err(Error::Precondition(format!(
                    "output table at memory {:?} does not cover the state set",
                    self.memories[mem]
                )));
            }
            for q in m.state_ids() {
                let w = &self.output[mem][q.0];
                if w.len() != m.moves(q).len()
                    || w.iter().any(num::Signed::is_negative)
                    || !w.iter().fold(Rat::zero(), |acc, x| acc + x).is_one()
                {
                    return Err(Error::Precondition(format!(
                        "output at (memory {:?}, state {:?}) is not a distribution over the moves",
                        self.memories[mem],
                        m.state_name(q)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A trace-based strategy restricted to histories shorter than `depth`,
/// stored as explicit (word, state) rows. Lookups outside the stored domain
/// fall back to the uniform distribution over the state's moves.
#[derive(Clone, Debug, Default)]
pub struct TraceBasedTable {
    pub depth: usize,
    entries: BTreeMap<(Word, usize), Vec<Rat>>,
}

impl TraceBasedTable {
    pub fn new(depth: usize) -> TraceBasedTable {
        TraceBasedTable { depth, entries: BTreeMap::new() }
    }

    pub fn set_entry(&mut self, w: Word, q: StateId, weights: Vec<Rat>) {
        self.entries.insert((w, q.0), weights);
    }

    pub fn entry(&self, m: &Mdp, w: &[LabelId], q: StateId) -> Vec<Rat> {
        if let Some(e) = self.entries.get(&(w.to_vec(), q.0)) {
            return e.clone();
        }
        let k = m.moves(q).len();
        vec![Rat::new(1.into(), (k as i64).into()); k]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Word, usize), &Vec<Rat>)> {
        self.entries.iter()
    }
}

/// Anything that yields a local strategy for each history prefix.
pub trait TraceStrategy {
    fn local_at(&self, m: &Mdp, prefix: &[LabelId]) -> LocalStrategy;
}

impl TraceStrategy for LocalStrategy {
    fn local_at(&self, _m: &Mdp, _prefix: &[LabelId]) -> LocalStrategy {
        self.clone()
    }
}

impl TraceStrategy for TraceBasedTable {
    fn local_at(&self, m: &Mdp, prefix: &[LabelId]) -> LocalStrategy {
        let weights = m.state_ids().map(|q| self.entry(m, prefix, q)).collect();
        LocalStrategy { weights }
    }
}

/// The matrix Δ_α(a) with Δ[q][q′] = Σ_mv α(q)(mv) · mv(a, q′).
pub fn transition_matrix(m: &Mdp, alpha: &LocalStrategy, a: LabelId) -> RatMatrix {
    let n = m.n_states();
    let mut delta = RatMatrix::zeros(n, n);
    for q in m.state_ids() {
        for (mi, mv) in m.moves(q).iter().enumerate() {
            let w = &alpha.weights(q)[mi];
            if w.is_zero() {
                continue;
            }
            for (lab, t, p) in mv.entries() {
                if *lab == a {
                    delta.add_to(q.0, t.0, &(w * p));
                }
            }
        }
    }
    delta
}

/// One step: μ · Δ_α(a).
pub fn succ(mu: &SubDist, m: &Mdp, alpha: &LocalStrategy, a: LabelId) -> SubDist {
    let mut out = SubDist::zeros(m.n_states());
    for q in mu.support() {
        let mass = mu.get(q);
        for (mi, mv) in m.moves(q).iter().enumerate() {
            let w = &alpha.weights(q)[mi];
            if w.is_zero() {
                continue;
            }
            for (lab, t, p) in mv.entries() {
                if *lab == a {
                    let cur = out.get(*t).clone();
                    out.set(*t, cur + mass * w * p);
                }
            }
        }
    }
    out
}

/// Sub-distribution after emitting `w` from the initial distribution under
/// the given (trace-based) strategy.
pub fn sub_dis<S: TraceStrategy + ?Sized>(m: &Mdp, sigma: &S, w: &[LabelId]) -> SubDist {
    let mut mu = m.initial().clone();
    for i in 0..w.len() {
        let alpha = sigma.local_at(m, &w[..i]);
        mu = succ(&mu, m, &alpha, w[i]);
    }
    mu
}

/// Probability of emitting `w`: the norm of [`sub_dis`].
pub fn trace_prob<S: TraceStrategy + ?Sized>(m: &Mdp, sigma: &S, w: &[LabelId]) -> Rat {
    sub_dis(m, sigma, w).norm()
}

/// Unrolls a finite-memory strategy into an explicit trace-based table
/// covering every history shorter than `depth` that has positive probability;
/// the remaining rows are left to the table's uniform fallback.
pub fn flatten(m: &Mdp, s: &FiniteMemoryStrategy, depth: usize) -> Result<TraceBasedTable> {
    s.validate(m)?;
    let n_mem = s.memories.len();
    let n = m.n_states();
    let mut table = TraceBasedTable::new(depth);

    // Joint weight over (memory, state) after each word.
    let mut layer: BTreeMap<Word, Vec<Vec<Rat>>> = BTreeMap::new();
    let mut init = vec![vec![Rat::zero(); n]; n_mem];
    for q in m.initial().support() {
        init[s.initial][q.0] = m.initial().get(q).clone();
    }
    layer.insert(Vec::new(), init);

    for _len in 0..depth {
        let mut next: BTreeMap<Word, Vec<Vec<Rat>>> = BTreeMap::new();
        for (w, joint) in &layer {
            // Record the averaged output at each state with positive mass.
            for q in m.state_ids() {
                let total = joint
                    .iter()
                    .fold(Rat::zero(), |acc, row| acc + &row[q.0]);
                if total.is_zero() {
                    continue;
                }
                let k = m.moves(q).len();
                let mut weights = vec![Rat::zero(); k];
                for mem in 0..n_mem {
                    let mass = &joint[mem][q.0];
                    if mass.is_zero() {
                        continue;
                    }
                    let frac = mass / &total;
                    for mi in 0..k {
                        weights[mi] += &frac * &s.output[mem][q.0][mi];
                    }
                }
                table.set_entry(w.clone(), q, weights);
            }
            // Push the joint forward along every label.
            for a in m.label_ids() {
                let mut stepped = vec![vec![Rat::zero(); n]; n_mem];
                let mut any = false;
                for mem in 0..n_mem {
                    for q in m.state_ids() {
                        let mass = &joint[mem][q.0];
                        if mass.is_zero() {
                            continue;
                        }
                        for (mi, mv) in m.moves(q).iter().enumerate() {
                            let wgt = &s.output[mem][q.0][mi];
                            if wgt.is_zero() {
                                continue;
                            }
                            for (lab, t, p) in mv.entries() {
                                if *lab == a {
                                    let mem2 = s.update[mem][a.0][t.0];
                                    stepped[mem2][t.0] += mass * wgt * p;
                                    any = true;
                                }
                            }
                        }
                    }
                }
                if any {
                    let mut w2 = w.clone();
                    w2.push(a);
                    next.insert(w2, stepped);
                }
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    Ok(table)
}

/// Direct evaluation of a finite-memory strategy: the sub-distribution over
/// states after emitting `w`, marginalising out the memory.
pub fn sub_dis_finite_memory(m: &Mdp, s: &FiniteMemoryStrategy, w: &[LabelId]) -> Result<SubDist> {
    s.validate(m)?;
    let table = flatten(m, s, w.len())?;
    Ok(sub_dis(m, &table, w))
}

/// Fixes a memoryless strategy, collapsing each state's moves into one
/// mixture move; the result is a Markov chain over the same states.
pub fn induced_mc(m: &Mdp, alpha: &MemorylessStrategy) -> Result<Mdp> {
    if alpha.weights.len() != m.n_states() {
        return Err(Error::Precondition(
            "strategy does not cover the model's states".into(),
        ));
    }
    let moves = m
        .state_ids()
        .map(|q| {
            let mut entries = Vec::new();
            for (mi, mv) in m.moves(q).iter().enumerate() {
                let w = &alpha.weights(q)[mi];
                if w.is_zero() {
                    continue;
                }
                for (a, t, p) in mv.entries() {
                    entries.push((*a, *t, w * p));
                }
            }
            vec![Move::from_entries(entries)]
        })
        .collect();
    let mc = Mdp::new(
        m.labels().to_vec(),
        m.states().to_vec(),
        m.initial().clone(),
        moves,
    )?;
    debug_assert!(mc.is_mc());
    Ok(mc)
}

/// A finite path: a state sequence together with the move indices taken and
/// labels emitted, and its probability under a fixed strategy.
#[derive(Clone, Debug)]
pub struct Path {
    pub states: Vec<StateId>,
    pub moves: Vec<usize>,
    pub labels: Word,
    pub prob: Rat,
}

/// Enumerates every positive-probability path emitting `w` under `sigma`.
/// Exponential in `|w|`; intended as an independent cross-check of the
/// matrix-product semantics.
pub fn enumerate_paths<S: TraceStrategy + ?Sized>(m: &Mdp, sigma: &S, w: &[LabelId]) -> Vec<Path> {
    let mut out = Vec::new();
    let mut stack: Vec<Path> = m
        .initial()
        .support()
        .map(|q| Path {
            states: vec![q],
            moves: Vec::new(),
            labels: Vec::new(),
            prob: m.initial().get(q).clone(),
        })
        .collect();
    while let Some(path) = stack.pop() {
        if path.labels.len() == w.len() {
            out.push(path);
            continue;
        }
        let a = w[path.labels.len()];
        let alpha = sigma.local_at(m, &path.labels);
        let q = *path.states.last().unwrap();
        for (mi, mv) in m.moves(q).iter().enumerate() {
            let wgt = &alpha.weights(q)[mi];
            if wgt.is_zero() {
                continue;
            }
            for (lab, t, p) in mv.entries() {
                if *lab != a {
                    continue;
                }
                let mut ext = path.clone();
                ext.states.push(*t);
                ext.moves.push(mi);
                ext.labels.push(a);
                ext.prob = &ext.prob * wgt * p;
                stack.push(ext);
            }
        }
    }
    out
}

/// [`sub_dis`] recomputed by explicit path enumeration.
pub fn sub_dis_by_paths<S: TraceStrategy + ?Sized>(m: &Mdp, sigma: &S, w: &[LabelId]) -> SubDist {
    let mut out = SubDist::zeros(m.n_states());
    for path in enumerate_paths(m, sigma, w) {
        let q = *path.states.last().unwrap();
        let cur = out.get(q).clone();
        out.set(q, cur + path.prob);
    }
    out
}
