//! Labelled Markov decision processes over exact rationals.
//!
//! A model is a set of states, a full initial distribution, a label alphabet,
//! and per state a nonempty list of *moves*; a move is a distribution over
//! (label, successor) pairs. A Markov chain is not a separate type: it is an
//! MDP in which every state has exactly one move (see [`Mdp::is_mc`]).

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};

use crate::linalg::{format_rat, Rat, RatVector};
use crate::{Error, Result};

/// Index of a state in a model (petgraph-style; display names live in a side
/// table on [`Mdp`]).
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub usize);

/// Index of a label in a model's alphabet.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LabelId(pub usize);

/// A distribution over (label, successor) pairs. Entries are kept sorted by
/// (label, state) with zero-probability entries dropped, so the support is
/// exactly the stored key set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Move {
    entries: Vec<(LabelId, StateId, Rat)>,
}

impl Move {
    /// Builds a move from raw entries: duplicates of the same (label, state)
    /// pair are accumulated, zeros dropped, and the result sorted.
    pub fn from_entries(raw: Vec<(LabelId, StateId, Rat)>) -> Move {
        let mut acc: BTreeMap<(LabelId, StateId), Rat> = BTreeMap::new();
        for (a, q, p) in raw {
            *acc.entry((a, q)).or_insert_with(Rat::zero) += p;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|((a, q), p)| (a, q, p))
            .collect();
        Move { entries }
    }

    pub fn dirac(a: LabelId, q: StateId) -> Move {
        Move { entries: vec![(a, q, Rat::one())] }
    }

    pub fn entries(&self) -> &[(LabelId, StateId, Rat)] {
        &self.entries
    }

    pub fn prob(&self, a: LabelId, q: StateId) -> Rat {
        match self.entries.binary_search_by(|(ea, eq, _)| (*ea, *eq).cmp(&(a, q))) {
            Ok(i) => self.entries[i].2.clone(),
            Err(_) => Rat::zero(),
        }
    }

    pub fn mass(&self) -> Rat {
        self.entries.iter().fold(Rat::zero(), |acc, (_, _, p)| acc + p)
    }
}

/// A sub-distribution over states, stored densely.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubDist {
    weights: Vec<Rat>,
}

impl SubDist {
    pub fn zeros(n: usize) -> SubDist {
        SubDist { weights: vec![Rat::zero(); n] }
    }

    pub fn dirac(n: usize, q: StateId) -> SubDist {
        let mut d = SubDist::zeros(n);
        d.weights[q.0] = Rat::one();
        d
    }

    pub fn from_weights(weights: Vec<Rat>) -> SubDist {
        SubDist { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, q: StateId) -> &Rat {
        &self.weights[q.0]
    }

    pub fn set(&mut self, q: StateId, v: Rat) {
        self.weights[q.0] = v;
    }

    /// Total mass.
    pub fn norm(&self) -> Rat {
        self.weights.iter().fold(Rat::zero(), |acc, w| acc + w)
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, _)| StateId(i))
    }

    pub fn is_subdistribution(&self) -> bool {
        self.weights.iter().all(|w| !w.is_negative()) && self.norm() <= Rat::one()
    }

    pub fn is_distribution(&self) -> bool {
        self.weights.iter().all(|w| !w.is_negative()) && self.norm().is_one()
    }

    pub fn to_vector(&self) -> RatVector {
        RatVector::from_vec(self.weights.clone())
    }

    pub fn from_vector(v: &RatVector) -> SubDist {
        SubDist { weights: v.iter().cloned().collect() }
    }
}

impl std::fmt::Display for SubDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (i, w) in self.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}: {}", i, format_rat(w))?;
        }
        write!(f, "}}")
    }
}

/// A labelled MDP. Construction goes through [`Mdp::new`], which validates
/// the invariants; all later operations may assume them.
#[derive(Clone, PartialEq, Debug)]
pub struct Mdp {
    labels: Vec<String>,
    states: Vec<String>,
    initial: SubDist,
    moves: Vec<Vec<Move>>,
}

impl Mdp {
    pub fn new(
        labels: Vec<String>,
        states: Vec<String>,
        initial: SubDist,
        moves: Vec<Vec<Move>>,
    ) -> Result<Mdp> {
        let m = Mdp { labels, states, initial, moves };
        let violations = m.validate();
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Checks every structural invariant; an empty list means the model is
    /// valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.labels.is_empty() {
            out.push("label set is empty".to_string());
        }
        if self.states.is_empty() {
            out.push("state set is empty".to_string());
        }
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                out.push(format!("duplicate state name {s:?}"));
            }
        }
        let mut seen = BTreeSet::new();
        for l in &self.labels {
            if !seen.insert(l) {
                out.push(format!("duplicate label name {l:?}"));
            }
        }
        if self.initial.dim() != self.states.len() {
            out.push(format!(
                "initial distribution has dimension {}, expected {}",
                self.initial.dim(),
                self.states.len()
            ));
            return out;
        }
        for q in self.initial.support() {
            if self.initial.get(q).is_negative() {
                out.push(format!(
                    "initial weight of state {:?} is negative",
                    self.states[q.0]
                ));
            }
        }
        if !self.initial.norm().is_one() {
            out.push(format!(
                "initial distribution sums to {}, expected 1",
                format_rat(&self.initial.norm())
            ));
        }
        if self.moves.len() != self.states.len() {
            out.push(format!(
                "move table covers {} states, expected {}",
                self.moves.len(),
                self.states.len()
            ));
            return out;
        }
        for (qi, ms) in self.moves.iter().enumerate() {
            let name = &self.states[qi];
            if ms.is_empty() {
                out.push(format!("state {name:?} has no moves"));
            }
            for (mi, mv) in ms.iter().enumerate() {
                for (a, q, p) in mv.entries() {
                    if a.0 >= self.labels.len() {
                        out.push(format!(
                            "state {name:?} move {mi} references label index {} out of range",
                            a.0
                        ));
                    }
                    if q.0 >= self.states.len() {
                        out.push(format!(
                            "state {name:?} move {mi} has dangling target index {}",
                            q.0
                        ));
                    }
                    if p.is_negative() || p > &Rat::one() {
                        out.push(format!(
                            "state {name:?} move {mi} has probability {} outside [0,1]",
                            format_rat(p)
                        ));
                    }
                }
                if !mv.mass().is_one() {
                    out.push(format!(
                        "state {name:?} move {mi} sums to {}, expected 1",
                        format_rat(&mv.mass())
                    ));
                }
            }
        }
        out
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn label_ids(&self) -> impl Iterator<Item = LabelId> {
        (0..self.labels.len()).map(LabelId)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.0]
    }

    pub fn label_name(&self, a: LabelId) -> &str {
        &self.labels[a.0]
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    pub fn label_index(&self, name: &str) -> Option<LabelId> {
        self.labels.iter().position(|l| l == name).map(LabelId)
    }

    pub fn initial(&self) -> &SubDist {
        &self.initial
    }

    pub fn moves(&self, q: StateId) -> &[Move] {
        &self.moves[q.0]
    }

    /// Total number of moves across all states.
    pub fn move_count(&self) -> usize {
        self.moves.iter().map(|ms| ms.len()).sum()
    }

    /// True when every state has exactly one available move.
    pub fn is_mc(&self) -> bool {
        self.moves.iter().all(|ms| ms.len() == 1)
    }

    /// All (label, successor) pairs reachable from `q` in one step, across
    /// every move.
    pub fn post_set(&self, q: StateId) -> BTreeSet<(LabelId, StateId)> {
        let mut out = BTreeSet::new();
        for mv in &self.moves[q.0] {
            for (a, t, _) in mv.entries() {
                out.insert((*a, *t));
            }
        }
        out
    }

    /// Name-based structural equality: same label and state name sets, and
    /// identical initial weights and move lists under the name correspondence
    /// (move order within a state is significant).
    pub fn same_structure(&self, other: &Mdp) -> bool {
        if self.states.len() != other.states.len() || self.labels.len() != other.labels.len() {
            return false;
        }
        let mut state_map = Vec::with_capacity(self.states.len());
        for s in &self.states {
            match other.state_index(s) {
                Some(q) => state_map.push(q),
                None => return false,
            }
        }
        let mut label_map = Vec::with_capacity(self.labels.len());
        for l in &self.labels {
            match other.label_index(l) {
                Some(a) => label_map.push(a),
                None => return false,
            }
        }
        for q in self.state_ids() {
            if self.initial.get(q) != other.initial.get(state_map[q.0]) {
                return false;
            }
            let ours = self.moves(q);
            let theirs = other.moves(state_map[q.0]);
            if ours.len() != theirs.len() {
                return false;
            }
            for (mv, other_mv) in ours.iter().zip(theirs) {
                let mapped = Move::from_entries(
                    mv.entries()
                        .iter()
                        .map(|(a, t, p)| (label_map[a.0], state_map[t.0], p.clone()))
                        .collect(),
                );
                if &mapped != other_mv {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of [`disjoint_union`]: the combined model plus the embeddings of
/// the two operands' states into it.
#[derive(Clone, Debug)]
pub struct DisjointUnion {
    pub model: Mdp,
    pub left: Vec<StateId>,
    pub right: Vec<StateId>,
    pub left_labels: Vec<LabelId>,
    pub right_labels: Vec<LabelId>,
}

impl DisjointUnion {
    /// Embeds a sub-distribution over the left operand's states into the
    /// union's state space.
    pub fn embed_left(&self, d: &SubDist) -> SubDist {
        let mut out = SubDist::zeros(self.model.n_states());
        for q in d.support() {
            out.set(self.left[q.0], d.get(q).clone());
        }
        out
    }

    pub fn embed_right(&self, d: &SubDist) -> SubDist {
        let mut out = SubDist::zeros(self.model.n_states());
        for q in d.support() {
            out.set(self.right[q.0], d.get(q).clone());
        }
        out
    }
}

/// Places two models side by side over the merged alphabet. Left state names
/// are kept; right names that clash get a `#2` (`#3`, ...) suffix. The union
/// carries the left model's initial distribution (callers that need a
/// different one pass explicit sub-distributions).
pub fn disjoint_union(d: &Mdp, e: &Mdp) -> DisjointUnion {
    let mut labels = d.labels.clone();
    let mut right_labels = Vec::with_capacity(e.labels.len());
    for l in &e.labels {
        match labels.iter().position(|x| x == l) {
            Some(i) => right_labels.push(LabelId(i)),
            None => {
                labels.push(l.clone());
                right_labels.push(LabelId(labels.len() - 1));
            }
        }
    }
    let left_labels: Vec<LabelId> = (0..d.labels.len()).map(LabelId).collect();

    let mut states = d.states.clone();
    let left: Vec<StateId> = (0..d.states.len()).map(StateId).collect();
    let mut right = Vec::with_capacity(e.states.len());
    for s in &e.states {
        let mut name = s.clone();
        let mut k = 2;
        while states.contains(&name) {
            name = format!("{s}#{k}");
            k += 1;
        }
        states.push(name);
        right.push(StateId(states.len() - 1));
    }

    let n = states.len();
    let mut initial = SubDist::zeros(n);
    for q in d.initial.support() {
        initial.set(left[q.0], d.initial.get(q).clone());
    }

    let mut moves: Vec<Vec<Move>> = Vec::with_capacity(n);
    for q in d.state_ids() {
        moves.push(
            d.moves(q)
                .iter()
                .map(|mv| {
                    Move::from_entries(
                        mv.entries()
                            .iter()
                            .map(|(a, t, p)| (left_labels[a.0], left[t.0], p.clone()))
                            .collect(),
                    )
                })
                .collect(),
        );
    }
    for q in e.state_ids() {
        moves.push(
            e.moves(q)
                .iter()
                .map(|mv| {
                    Move::from_entries(
                        mv.entries()
                            .iter()
                            .map(|(a, t, p)| (right_labels[a.0], right[t.0], p.clone()))
                            .collect(),
                    )
                })
                .collect(),
        );
    }

    let model = Mdp { labels, states, initial, moves };
    debug_assert!(model.validate().is_empty());
    DisjointUnion { model, left, right, left_labels, right_labels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn two_state() -> Mdp {
        // s0 --a(1/2)--> s0 | --b(1/2)--> s1 ; s1 --b(1)--> s1
        Mdp::new(
            vec!["a".into(), "b".into()],
            vec!["s0".into(), "s1".into()],
            SubDist::dirac(2, StateId(0)),
            vec![
                vec![Move::from_entries(vec![
                    (LabelId(0), StateId(0), rat(1, 2)),
                    (LabelId(1), StateId(1), rat(1, 2)),
                ])],
                vec![Move::dirac(LabelId(1), StateId(1))],
            ],
        )
        .unwrap()
    }

    #[test]
    fn move_accumulates_duplicates_and_drops_zeros() {
        let mv = Move::from_entries(vec![
            (LabelId(0), StateId(0), rat(1, 3)),
            (LabelId(0), StateId(0), rat(1, 3)),
            (LabelId(0), StateId(0), rat(2, 6)),
            (LabelId(1), StateId(0), rat(0, 1)),
        ]);
        assert_eq!(mv.entries().len(), 1);
        assert!(mv.mass().is_one());
    }

    #[test]
    fn validation_reports_bad_sum_and_dangling_target() {
        let m = Mdp {
            labels: vec!["a".into()],
            states: vec!["q".into()],
            initial: SubDist::dirac(1, StateId(0)),
            moves: vec![vec![Move::from_entries(vec![(LabelId(0), StateId(3), rat(1, 2))])]],
        };
        let violations = m.validate();
        assert!(violations.iter().any(|v| v.contains("dangling")));
        assert!(violations.iter().any(|v| v.contains("sums to")));
    }

    #[test]
    fn mc_predicate() {
        let m = two_state();
        assert!(m.is_mc());
    }

    #[test]
    fn union_keeps_structure_and_renames_clashes() {
        let m = two_state();
        let u = disjoint_union(&m, &m);
        assert_eq!(u.model.n_states(), 4);
        assert_eq!(u.model.states()[2], "s0#2");
        assert!(u.model.validate().is_empty());
        // The left embedding is the identity here.
        assert_eq!(u.left, vec![StateId(0), StateId(1)]);
        // Right block mirrors the same transition structure.
        let q = u.right[0];
        assert_eq!(u.model.moves(q)[0].prob(LabelId(1), u.right[1]), rat(1, 2));
    }

    #[test]
    fn post_set_collects_all_moves() {
        let m = two_state();
        let post = m.post_set(StateId(0));
        assert!(post.contains(&(LabelId(0), StateId(0))));
        assert!(post.contains(&(LabelId(1), StateId(1))));
        assert_eq!(post.len(), 2);
    }

    #[test]
    fn same_structure_is_name_based() {
        let m = two_state();
        // Same chain with the state order flipped.
        let flipped = Mdp::new(
            vec!["a".into(), "b".into()],
            vec!["s1".into(), "s0".into()],
            SubDist::dirac(2, StateId(1)),
            vec![
                vec![Move::dirac(LabelId(1), StateId(0))],
                vec![Move::from_entries(vec![
                    (LabelId(0), StateId(1), rat(1, 2)),
                    (LabelId(1), StateId(0), rat(1, 2)),
                ])],
            ],
        )
        .unwrap();
        assert!(m.same_structure(&flipped));
        assert!(flipped.same_structure(&m));
    }
}
