//! Trace refinement of an MDP against a Markov chain.
//!
//! An MDP `D` refines a chain `C` when every strategy for `D` produces
//! exactly the trace function of `C`. Quantifying over all strategies is
//! avoided by a change of alphabet: it suffices to track a finite basis `Σ`
//! of memoryless strategies — the uniform strategy plus, for every state `q`
//! and every move `m` at `q`, the uniform strategy perturbed at `q` to play
//! `m` — and to build chains `D′`, `C′` over composite labels `(σ, a)` whose
//! transition matrices are `(1/|Σ|)·Δ_σ(a)`. Then `D ⊑ C` iff `D′` and `C′`
//! are trace-equivalent, which [`crate::mc_equiv`] decides exactly. A
//! distinguishing word over composite labels decodes into a per-step
//! schedule of basis strategies together with an ordinary label word.

use num::Zero;

use crate::linalg::{rat_int, Rat};
use crate::mc_equiv::{mc_equiv, EquivVerdict};
use crate::model::{LabelId, Mdp, Move, StateId};
use crate::semantics::{LocalStrategy, MemorylessStrategy, TraceBasedTable, Word};
use crate::{Error, Result};

/// Names one strategy in the basis `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StrategyId {
    /// The uniform strategy.
    Base,
    /// Uniform everywhere except `state`, which deterministically plays the
    /// move with index `mv`.
    Perturb { state: StateId, mv: usize },
}

impl StrategyId {
    pub fn describe(&self, m: &Mdp) -> String {
        match self {
            StrategyId::Base => "base".to_string(),
            StrategyId::Perturb { state, mv } => {
                format!("{}[{}]", m.state_name(*state), mv)
            }
        }
    }
}

/// The strategy basis of a model: the uniform strategy followed by one
/// perturbation per (state, move) pair, in state-then-move order. Entries
/// are kept even when a perturbation coincides with the uniform strategy
/// (single-move states), so `len() == 1 + Σ_q |moves(q)|` always holds.
#[derive(Debug, Clone)]
pub struct StrategyBasis {
    pub ids: Vec<StrategyId>,
    pub strategies: Vec<MemorylessStrategy>,
}

impl StrategyBasis {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Builds the strategy basis of `m`.
pub fn strategy_basis(m: &Mdp) -> StrategyBasis {
    let uniform = LocalStrategy::uniform(m);
    let mut ids = vec![StrategyId::Base];
    let mut strategies = vec![uniform.clone()];
    for q in m.state_ids() {
        for mv in 0..m.moves(q).len() {
            let mut weights: Vec<Vec<Rat>> =
                m.state_ids().map(|p| uniform.weights(p).to_vec()).collect();
            let row = &mut weights[q.0];
            for w in row.iter_mut() {
                *w = Rat::zero();
            }
            row[mv] = rat_int(1);
            ids.push(StrategyId::Perturb { state: q, mv });
            strategies.push(
                MemorylessStrategy::from_weights(m, weights).expect("perturbed basis strategy"),
            );
        }
    }
    StrategyBasis { ids, strategies }
}

/// The two chains produced by the alphabet lift, plus everything needed to
/// decode words over the composite alphabet.
#[derive(Debug, Clone)]
pub struct LiftedPair {
    /// The MDP side, lifted to a chain over composite labels.
    pub left: Mdp,
    /// The chain side over the same composite labels.
    pub right: Mdp,
    /// Basis over the MDP argument; composite labels enumerate exactly this.
    pub sigma: StrategyBasis,
    /// Base label names shared by the composite alphabet: the MDP's labels
    /// first, then any chain-only labels.
    pub base_label_names: Vec<String>,
}

impl LiftedPair {
    /// Splits a composite label index into (basis-strategy index, base label).
    pub fn decode(&self, lifted: LabelId) -> (usize, LabelId) {
        let n = self.base_label_names.len();
        (lifted.0 / n, LabelId(lifted.0 % n))
    }
}

fn lift_one(
    m: &Mdp,
    locals: &[MemorylessStrategy],
    label_map: &[usize],
    lifted_names: &[String],
    n_base: usize,
) -> Result<Mdp> {
    let sigma_count = rat_int(locals.len() as i64);
    let mut moves = Vec::with_capacity(m.n_states());
    for q in m.state_ids() {
        let mut entries = Vec::new();
        for (s, alpha) in locals.iter().enumerate() {
            for (k, mv) in m.moves(q).iter().enumerate() {
                let w = &alpha.weights(q)[k];
                if w.is_zero() {
                    continue;
                }
                for (a, t, p) in mv.entries() {
                    let lifted = LabelId(s * n_base + label_map[a.0]);
                    entries.push((lifted, *t, w * p / &sigma_count));
                }
            }
        }
        moves.push(vec![Move::from_entries(entries)]);
    }
    Mdp::new(
        lifted_names.to_vec(),
        m.states().to_vec(),
        m.initial().clone(),
        moves,
    )
}

/// Lifts an MDP/chain pair onto the composite alphabet `Σ(d) × labels`.
/// Both outputs are chains sharing one label set; `c` must be a chain.
pub fn lift(d: &Mdp, c: &Mdp) -> Result<LiftedPair> {
    if !c.is_mc() {
        return Err(Error::Precondition(
            "refinement target must be a Markov chain".into(),
        ));
    }
    let sigma = strategy_basis(d);

    let mut base_label_names: Vec<String> = d.labels().to_vec();
    let d_map: Vec<usize> = (0..d.n_labels()).collect();
    let mut c_map = Vec::with_capacity(c.n_labels());
    for name in c.labels() {
        match base_label_names.iter().position(|x| x == name) {
            Some(i) => c_map.push(i),
            None => {
                base_label_names.push(name.clone());
                c_map.push(base_label_names.len() - 1);
            }
        }
    }
    let n_base = base_label_names.len();

    let mut lifted_names = Vec::with_capacity(sigma.len() * n_base);
    for id in &sigma.ids {
        for a in &base_label_names {
            lifted_names.push(format!("{}:{}", id.describe(d), a));
        }
    }

    let left = lift_one(d, &sigma.strategies, &d_map, &lifted_names, n_base)?;
    let trivial = vec![LocalStrategy::uniform(c); sigma.len()];
    let right = lift_one(c, &trivial, &c_map, &lifted_names, n_base)?;
    Ok(LiftedPair { left, right, sigma, base_label_names })
}

/// A refutation of refinement: at each step the scheduler plays one basis
/// strategy, and the resulting word has different trace probabilities in the
/// MDP (under that schedule) and the chain.
#[derive(Debug, Clone)]
pub struct RefinementWitness {
    /// Basis strategy applied at each step (over the MDP argument).
    pub strategies: Vec<StrategyId>,
    /// The label word, as indices into `label_names`.
    pub word: Word,
    /// Shared label-name space: MDP labels first, then chain-only labels.
    pub label_names: Vec<String>,
    /// Trace probability of `word` in the MDP under the schedule.
    pub mdp_prob: Rat,
    /// Trace probability of `word` in the chain.
    pub mc_prob: Rat,
}

impl RefinementWitness {
    /// Rebuilds the schedule as a step-indexed strategy table for `d`, usable
    /// with [`crate::semantics::trace_prob`] to re-check `mdp_prob`.
    pub fn schedule_table(&self, d: &Mdp, sigma: &StrategyBasis) -> TraceBasedTable {
        let mut table = TraceBasedTable::new(self.word.len());
        for (i, id) in self.strategies.iter().enumerate() {
            let idx = sigma.ids.iter().position(|x| x == id).expect("witness strategy in basis");
            let alpha = &sigma.strategies[idx];
            let prefix: Word = self.word[..i].to_vec();
            for q in d.state_ids() {
                table.set_entry(prefix.clone(), q, alpha.weights(q).to_vec());
            }
        }
        table
    }
}

/// Outcome of a refinement check.
#[derive(Debug, Clone)]
pub enum RefinesVerdict {
    Refines,
    Fails(RefinementWitness),
}

impl RefinesVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, RefinesVerdict::Refines)
    }
}

/// Decides whether MDP `d` trace-refines chain `c`: whether every strategy
/// for `d` induces exactly the trace function of `c`. On failure the witness
/// carries a shortest composite word, decoded into a per-step schedule.
pub fn refines_mc(d: &Mdp, c: &Mdp) -> Result<RefinesVerdict> {
    let pair = lift(d, c)?;
    match mc_equiv(&pair.left, &pair.right)? {
        EquivVerdict::Equivalent => Ok(RefinesVerdict::Refines),
        EquivVerdict::Distinguished { word, lhs, rhs } => {
            let mut strategies = Vec::with_capacity(word.len());
            let mut base_word = Vec::with_capacity(word.len());
            for lifted in &word {
                let (s, a) = pair.decode(*lifted);
                strategies.push(pair.sigma.ids[s]);
                base_word.push(a);
            }
            // Undo the 1/|Σ| damping: each step scales both sides equally.
            let mut scale = rat_int(1);
            let sigma_count = rat_int(pair.sigma.len() as i64);
            for _ in 0..word.len() {
                scale *= &sigma_count;
            }
            Ok(RefinesVerdict::Fails(RefinementWitness {
                strategies,
                word: base_word,
                label_names: pair.base_label_names,
                mdp_prob: lhs * &scale,
                mc_prob: rhs * &scale,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{noisy_choice_mdp, noisy_commit_mc};
    use crate::linalg::rat;
    use crate::semantics::trace_prob;

    #[test]
    fn basis_counts_moves_with_duplicates() {
        let d = noisy_choice_mdp();
        let sigma = strategy_basis(&d);
        assert_eq!(sigma.len(), 4); // uniform + 1 start move + 2 commit moves
        assert_eq!(sigma.ids[0], StrategyId::Base);
        assert_eq!(sigma.ids[3], StrategyId::Perturb { state: StateId(1), mv: 1 });
        assert_eq!(sigma.strategies[3].weights(StateId(1)), &[rat(0, 1), rat(1, 1)]);
    }

    #[test]
    fn lift_produces_chains_with_damped_entries() {
        let d = noisy_choice_mdp();
        let c = noisy_commit_mc();
        let pair = lift(&d, &c).unwrap();
        assert!(pair.left.is_mc());
        assert!(pair.right.is_mc());
        assert_eq!(pair.left.n_labels(), 16);
        assert_eq!(pair.left.n_labels(), pair.right.n_labels());

        // Under the uniform basis strategy, label a keeps the start state in
        // place with probability (1/|Σ|)·(1/4) = 1/16 on both sides.
        let lifted_a = pair.left.label_index("base:a").unwrap();
        let start = pair.left.state_index("start").unwrap();
        assert_eq!(pair.left.moves(start)[0].prob(lifted_a, start), rat(1, 16));
        let start_c = pair.right.state_index("start").unwrap();
        assert_eq!(pair.right.moves(start_c)[0].prob(lifted_a, start_c), rat(1, 16));
    }

    #[test]
    fn choice_mdp_does_not_refine_commit_chain() {
        let d = noisy_choice_mdp();
        let c = noisy_commit_mc();
        match refines_mc(&d, &c).unwrap() {
            RefinesVerdict::Fails(w) => {
                assert_eq!(w.word.len(), 2);
                assert_ne!(w.mdp_prob, w.mc_prob);
                // Re-evaluate both sides through the plain trace semantics.
                let sigma = strategy_basis(&d);
                let table = w.schedule_table(&d, &sigma);
                assert_eq!(trace_prob(&d, &table, &w.word), w.mdp_prob);
                let c_word: Word = w
                    .word
                    .iter()
                    .map(|a| c.label_index(&w.label_names[a.0]).unwrap())
                    .collect();
                let uniq = LocalStrategy::uniform(&c);
                assert_eq!(trace_prob(&c, &uniq, &c_word), w.mc_prob);
            }
            RefinesVerdict::Refines => panic!("expected a refutation"),
        }
    }

    #[test]
    fn chain_refines_itself_and_duplicated_moves_still_refine() {
        let c = noisy_commit_mc();
        assert!(refines_mc(&c, &c).unwrap().holds());

        // Duplicate the start move: a genuine MDP whose choices are all
        // equivalent, so refinement still holds.
        let labels = c.labels().to_vec();
        let states = c.states().to_vec();
        let mut moves: Vec<Vec<Move>> =
            c.state_ids().map(|q| c.moves(q).to_vec()).collect();
        let dup = moves[0][0].clone();
        moves[0].push(dup);
        let d = Mdp::new(labels, states, c.initial().clone(), moves).unwrap();
        assert!(!d.is_mc());
        assert_eq!(strategy_basis(&d).len(), 5);
        assert!(refines_mc(&d, &c).unwrap().holds());
    }
}
