//! Trace equivalence of labelled Markov chains.
//!
//! Two chains are trace-equivalent iff every finite word has the same trace
//! probability in both. Deciding this never requires enumerating words: the
//! vectors `u_w[q] = Pr_q(w)` satisfy `u_ε = 1` and `u_{a·w} = Δ(a)·u_w`, and
//! they span a subspace of dimension at most `|Q₁| + |Q₂|` over the disjoint
//! union. Closing `{1}` backward under every per-label matrix and testing the
//! initial-distribution difference against the discovered spanning vectors
//! decides equivalence in polynomial time, and the first violation found in
//! discovery order is a shortest distinguishing word.

use std::collections::VecDeque;

use num::Zero;

use crate::linalg::{Basis, Rat, RatMatrix, RatVector};
use crate::model::{disjoint_union, Mdp};
use crate::semantics::{format_word, transition_matrix, LocalStrategy, Word};
use crate::{Error, Result};

/// Outcome of a trace-equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivVerdict {
    Equivalent,
    /// A shortest word whose trace probabilities differ, with both values.
    Distinguished { word: Word, lhs: Rat, rhs: Rat },
}

/// Statistics exposed alongside the verdict: how many spanning vectors the
/// backward closure inserted (bounded by the union state count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McEquivOutcome {
    pub verdict: EquivVerdict,
    pub insertions: usize,
}

/// Decides trace equivalence of two Markov chains. Words in a
/// `Distinguished` verdict are over the union label set (left model's label
/// order first). Both arguments must be Markov chains.
pub fn mc_equiv(c: &Mdp, d: &Mdp) -> Result<EquivVerdict> {
    Ok(mc_equiv_detailed(c, d)?.verdict)
}

/// As [`mc_equiv`], additionally reporting the number of basis insertions.
pub fn mc_equiv_detailed(c: &Mdp, d: &Mdp) -> Result<McEquivOutcome> {
    if !c.is_mc() || !d.is_mc() {
        return Err(Error::Precondition(
            "trace-equivalence check requires Markov chains on both sides".into(),
        ));
    }
    let union = disjoint_union(c, d);
    let m = &union.model;
    let n = m.n_states();
    let alpha = LocalStrategy::uniform(m);
    let deltas: Vec<RatMatrix> =
        m.label_ids().map(|a| transition_matrix(m, &alpha, a)).collect();

    // diff · u_w = Tr_C(w) − Tr_D(w).
    let diff = union
        .embed_left(c.initial())
        .to_vector()
        .sub(&union.embed_right(d.initial()).to_vector());

    let mut basis: Basis = Basis::new(n);
    let mut originals: Vec<(Word, RatVector)> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let ones = RatVector::ones(n);
    basis.insert(ones.clone(), None);
    originals.push((Vec::new(), ones));
    queue.push_back(0);

    while let Some(idx) = queue.pop_front() {
        let (word, vec) = originals[idx].clone();
        for (ai, delta) in deltas.iter().enumerate() {
            let child = delta.mul_vec(&vec);
            if basis.insert(child.clone(), None) {
                let mut w = Vec::with_capacity(word.len() + 1);
                w.push(crate::model::LabelId(ai));
                w.extend_from_slice(&word);
                originals.push((w, child));
                queue.push_back(originals.len() - 1);
            }
        }
    }
    debug_assert!(originals.len() <= n);

    for (word, vec) in &originals {
        let s = diff.dot(vec);
        if !s.is_zero() {
            let lhs = union.embed_left(c.initial()).to_vector().dot(vec);
            let rhs = union.embed_right(d.initial()).to_vector().dot(vec);
            return Ok(McEquivOutcome {
                verdict: EquivVerdict::Distinguished { word: word.clone(), lhs, rhs },
                insertions: originals.len(),
            });
        }
    }
    Ok(McEquivOutcome { verdict: EquivVerdict::Equivalent, insertions: originals.len() })
}

impl EquivVerdict {
    /// Human-readable rendering with label names taken from `m` (any model
    /// sharing the union label space).
    pub fn describe(&self, m: &Mdp) -> String {
        match self {
            EquivVerdict::Equivalent => "equivalent".to_string(),
            EquivVerdict::Distinguished { word, lhs, rhs } => format!(
                "distinguished by {} ({} vs {})",
                format_word(m, word),
                crate::linalg::format_rat(lhs),
                crate::linalg::format_rat(rhs)
            ),
        }
    }
}
