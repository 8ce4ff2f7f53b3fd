//! Instance generators tying hard problems to refinement questions.
//!
//! Each constructor takes an instance of a source problem (probabilistic-
//! automaton universality, subset sum, its one-round quantified variant,
//! nonnegative matrix factorization) and emits a pair of models whose
//! refinement answer mirrors the instance, plus metadata describing the
//! correspondence. The mutual-refinement construction returns its two models
//! directly since its question is two-directional.

use serde_json::json;

use crate::linalg::{format_rat, Rat, RatMatrix, RatVector};
use crate::model::{LabelId, Mdp, Move, StateId, SubDist};
use crate::semantics::MemorylessStrategy;
use crate::{Error, Result};
use num::{BigInt, One, Signed, Zero};

/// A probabilistic automaton: per-letter row-stochastic transition matrices,
/// an initial distribution, and an accepting state set.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilisticAutomaton {
    pub letters: Vec<String>,
    pub states: Vec<String>,
    pub initial: Vec<Rat>,
    pub accepting: Vec<bool>,
    pub delta: Vec<RatMatrix>,
}

impl ProbabilisticAutomaton {
    /// Checks every structural invariant; an empty list means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.states.len();
        if n == 0 {
            out.push("automaton has no states".to_string());
        }
        if self.letters.is_empty() {
            out.push("automaton has no letters".to_string());
        }
        if self.initial.len() != n {
            out.push(format!(
                "initial distribution has dimension {}, expected {n}",
                self.initial.len()
            ));
        } else if self.initial.iter().any(|p| p.is_negative())
            || !self.initial.iter().fold(Rat::zero(), |acc, p| acc + p).is_one()
        {
            out.push("initial weights are not a distribution".to_string());
        }
        if self.accepting.len() != n {
            out.push(format!(
                "accepting flags cover {} states, expected {n}",
                self.accepting.len()
            ));
        }
        if self.delta.len() != self.letters.len() {
            out.push(format!(
                "{} transition matrices for {} letters",
                self.delta.len(),
                self.letters.len()
            ));
        }
        for (letter, mat) in self.letters.iter().zip(&self.delta) {
            if mat.rows() != n || mat.cols() != n {
                out.push(format!("letter {letter:?} matrix is not {n}x{n}"));
            } else if !mat.is_row_stochastic() {
                out.push(format!("letter {letter:?} matrix is not row-stochastic"));
            }
        }
        out
    }
}

/// State distribution after reading `w` (letters as indices).
pub fn pa_dis(pa: &ProbabilisticAutomaton, w: &[usize]) -> Result<SubDist> {
    let mut dis = RatVector::from_vec(pa.initial.clone());
    for &letter in w {
        let mat = pa.delta.get(letter).ok_or_else(|| {
            Error::Precondition(format!("letter index {letter} out of range"))
        })?;
        dis = mat.vec_mul(&dis);
    }
    Ok(SubDist::from_vector(&dis))
}

/// Acceptance probability of `w`: the mass [`pa_dis`] puts on accepting states.
pub fn pa_accept(pa: &ProbabilisticAutomaton, w: &[usize]) -> Result<Rat> {
    let dis = pa_dis(pa, w)?;
    let mut total = Rat::zero();
    for (q, accept) in pa.accepting.iter().enumerate() {
        if *accept {
            total += dis.get(StateId(q));
        }
    }
    Ok(total)
}

/// A generated instance: the refinement question `left ⊑ right` (under the
/// strategy class named in `question`) mirrors the source problem.
#[derive(Clone, Debug)]
pub struct GadgetOutput {
    pub left: Mdp,
    pub right: Mdp,
    pub question: String,
    pub expected_semantics: serde_json::Value,
}

fn fresh_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|s| s == &name) {
        name.push('_');
    }
    name
}

fn rat_from_u64(v: u64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Encodes universality of a probabilistic automaton over {a,b} into
/// `left ⊑ right` for unrestricted strategies.
///
/// The right model simulates the automaton with probability ¼ per letter and
/// otherwise exits: accepting states may commit to a `c`-exit or a `d`-exit
/// (each carrying the remaining ½), non-accepting states can only take the
/// `d`-exit. The left chain demands every exit split ¼/¼ between `c` and `d`,
/// which a strategy can arrange iff every word is accepted with probability
/// at least ½.
pub fn gadget_pa_universality(pa: &ProbabilisticAutomaton) -> Result<GadgetOutput> {
    let violations = pa.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    if pa.letters != ["a", "b"] {
        return Err(Error::Precondition(format!(
            "universality gadget expects letters [\"a\", \"b\"], got {:?}",
            pa.letters
        )));
    }

    let n = pa.states.len();
    let mut states = pa.states.clone();
    let exit_c = fresh_name(&states, "exit_c");
    states.push(exit_c);
    let exit_d = fresh_name(&states, "exit_d");
    states.push(exit_d);
    let (qc, qd) = (StateId(n), StateId(n + 1));
    let labels: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
    let quarter = crate::linalg::rat(1, 4);
    let half = crate::linalg::rat(1, 2);

    let mut moves: Vec<Vec<Move>> = Vec::with_capacity(n + 2);
    for q in 0..n {
        // Both exits share the automaton-simulation entries.
        let mut simulate = Vec::new();
        for (letter, mat) in pa.delta.iter().enumerate() {
            for target in 0..n {
                let p = mat.get(q, target);
                if !p.is_zero() {
                    simulate.push((LabelId(letter), StateId(target), &quarter * p));
                }
            }
        }
        let mut to_d = simulate.clone();
        to_d.push((LabelId(3), qd, half.clone()));
        if pa.accepting[q] {
            let mut to_c = simulate;
            to_c.push((LabelId(2), qc, half.clone()));
            moves.push(vec![Move::from_entries(to_c), Move::from_entries(to_d)]);
        } else {
            moves.push(vec![Move::from_entries(to_d)]);
        }
    }
    moves.push(vec![Move::dirac(LabelId(2), qc)]);
    moves.push(vec![Move::dirac(LabelId(3), qd)]);

    let mut initial = SubDist::zeros(n + 2);
    for (q, p) in pa.initial.iter().enumerate() {
        initial.set(StateId(q), p.clone());
    }

    let right = Mdp::new(labels, states, initial, moves)?;
    Ok(GadgetOutput {
        left: crate::fixtures::noisy_commit_mc(),
        right,
        question: "is the automaton universal, i.e. does it accept every word over {a,b} \
                   with probability at least 1/2? equivalently: left ⊑ right"
            .to_string(),
        expected_semantics: json!({
            "kind": "pa-universality",
            "automaton_states": pa.states,
            "yes_iff": "every word over {a,b} is accepted with probability >= 1/2",
            "refinement": "left ⊑ right (unrestricted strategies)",
        }),
    })
}

/// Encodes subset sum into `left ⊑ right` for pure memoryless strategies:
/// the right model's initial mass on `s_i` is `s_i/P`, and committing `s_i`
/// to its `b`-exit adds exactly that much to the probability of `ab…`,
/// which the left chain fixes at `N/P`.
pub fn gadget_subset_sum(values: &[u64], target: u64) -> Result<GadgetOutput> {
    if values.is_empty() {
        return Err(Error::Precondition("subset-sum instance has no values".into()));
    }
    if values.contains(&0) {
        return Err(Error::Precondition("subset-sum values must be positive".into()));
    }
    let total: u128 = values.iter().map(|&v| v as u128).sum();
    if target as u128 > total {
        return Err(Error::Precondition(format!(
            "target {target} exceeds the total {total}, the branch probability would leave [0,1]"
        )));
    }
    let p = Rat::from_integer(BigInt::from(total));
    let ratio = rat_from_u64(target) / &p;

    let labels: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let left = Mdp::new(
        labels.clone(),
        ["q0", "qb", "qc"].map(String::from).to_vec(),
        SubDist::dirac(3, StateId(0)),
        vec![
            vec![Move::from_entries(vec![
                (LabelId(0), StateId(1), ratio.clone()),
                (LabelId(0), StateId(2), Rat::one() - &ratio),
            ])],
            vec![Move::dirac(LabelId(1), StateId(1))],
            vec![Move::dirac(LabelId(2), StateId(2))],
        ],
    )?;

    let n = values.len();
    let mut states: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    states.push("u_b".into());
    states.push("u_c".into());
    let (ub, uc) = (StateId(n), StateId(n + 1));
    let mut initial = SubDist::zeros(n + 2);
    for (i, &v) in values.iter().enumerate() {
        initial.set(StateId(i), rat_from_u64(v) / &p);
    }
    let mut moves: Vec<Vec<Move>> = (0..n)
        .map(|_| vec![Move::dirac(LabelId(0), ub), Move::dirac(LabelId(0), uc)])
        .collect();
    moves.push(vec![Move::dirac(LabelId(1), ub)]);
    moves.push(vec![Move::dirac(LabelId(2), uc)]);
    let right = Mdp::new(labels, states, initial, moves)?;

    Ok(GadgetOutput {
        left,
        right,
        question: format!(
            "does some subset of {values:?} sum to {target}? equivalently: left ⊑ right \
             under pure memoryless strategies"
        ),
        expected_semantics: json!({
            "kind": "subset-sum",
            "values": values,
            "target": target,
            "yes_iff": "some subset of values sums to target",
            "refinement": "left ⊑ right (pure memoryless strategies)",
        }),
    })
}

/// Builds one side of the quantified gadget: the subset states with their
/// two exits, plus the forced states `{prefix}_r` (to the `b`-sink) and
/// `{prefix}_y` (to the `c`-sink) carrying the balancing masses.
fn qss_side(prefix: &str, values: &[u64], x: &Rat, y: &Rat) -> Result<Mdp> {
    let n = values.len();
    let mut states: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
    states.push(format!("{prefix}_r"));
    states.push(format!("{prefix}_y"));
    states.push(format!("{prefix}_b"));
    states.push(format!("{prefix}_c"));
    let (sb, sc) = (StateId(n + 2), StateId(n + 3));

    let half = crate::linalg::rat(1, 2);
    let sum: u128 = values.iter().map(|&v| v as u128).sum();
    let mut initial = SubDist::zeros(n + 4);
    for (i, &v) in values.iter().enumerate() {
        initial.set(StateId(i), &half * x * rat_from_u64(v));
    }
    let weighted = x * Rat::from_integer(BigInt::from(sum));
    initial.set(StateId(n), Rat::one() - &half * (&weighted + y));
    initial.set(StateId(n + 1), &half * y);

    let mut moves: Vec<Vec<Move>> = (0..n)
        .map(|_| vec![Move::dirac(LabelId(0), sb), Move::dirac(LabelId(0), sc)])
        .collect();
    moves.push(vec![Move::dirac(LabelId(0), sb)]);
    moves.push(vec![Move::dirac(LabelId(0), sc)]);
    moves.push(vec![Move::dirac(LabelId(1), sb)]);
    moves.push(vec![Move::dirac(LabelId(2), sc)]);

    Mdp::new(
        ["a", "b", "c"].map(String::from).to_vec(),
        states,
        initial,
        moves,
    )
}

/// Encodes the one-round quantified subset-sum game into `left ⊑ right` for
/// pure memoryless strategies: the universal player's subset choice on the
/// left must be answered by an existential subset choice on the right making
/// the `ab…` probabilities agree, which happens exactly when the chosen sums
/// complete `target`.
pub fn gadget_qss(s: &[u64], t: &[u64], target: u64) -> Result<GadgetOutput> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::Precondition("quantified subset-sum needs both value sets".into()));
    }
    if s.contains(&0) || t.contains(&0) {
        return Err(Error::Precondition("quantified subset-sum values must be positive".into()));
    }
    let p: u128 = s.iter().map(|&v| v as u128).sum();
    let r: u128 = t.iter().map(|&v| v as u128).sum();
    // A fixed small scale keeps every derived mass rational and inside [0,1].
    let x = Rat::new(BigInt::one(), BigInt::from(p + r + target as u128 + 1));
    // Balance y1 + x·target = y2 + x·R with the smaller side pinned to zero.
    let (y1, y2) = if r >= target as u128 {
        (&x * Rat::from_integer(BigInt::from(r - target as u128)), Rat::zero())
    } else {
        (Rat::zero(), &x * Rat::from_integer(BigInt::from(target as u128 - r)))
    };

    let left = qss_side("s", s, &x, &y1)?;
    let right = qss_side("t", t, &x, &y2)?;
    Ok(GadgetOutput {
        left,
        right,
        question: format!(
            "does every subset S of {s:?} admit a subset T of {t:?} with sum(S)+sum(T) = \
             {target}? equivalently: left ⊑ right under pure memoryless strategies"
        ),
        expected_semantics: json!({
            "kind": "quantified-subset-sum",
            "s": s,
            "t": t,
            "target": target,
            "x": format_rat(&x),
            "y1": format_rat(&y1),
            "y2": format_rat(&y2),
            "yes_iff": "for every subset S of s there is a subset T of t with sum(S)+sum(T) = target",
            "refinement": "left ⊑ right (pure memoryless strategies)",
        }),
    })
}

/// Encodes nonnegative matrix factorization of a stochastic `matrix` with
/// inner dimension `rank` into `left ⊑ right` for memoryless strategies.
/// The left chain emits `a_i` uniformly then `b_j` with probability
/// `matrix[i,j]`; the right model routes each `a_i` through one of `rank`
/// middle states, so its memoryless strategies realize exactly the products
/// `A·W` of stochastic factors.
pub fn gadget_nmf(matrix: &RatMatrix, rank: usize) -> Result<GadgetOutput> {
    let (n, m) = (matrix.rows(), matrix.cols());
    if n == 0 || m == 0 {
        return Err(Error::Precondition("matrix must be nonempty".into()));
    }
    if rank == 0 {
        return Err(Error::Precondition("rank must be at least 1".into()));
    }
    for i in 0..n {
        let mut row_sum = Rat::zero();
        for j in 0..m {
            let v = matrix.get(i, j);
            if v.is_negative() {
                return Err(Error::Precondition(format!(
                    "matrix entry ({i},{j}) is negative"
                )));
            }
            row_sum += v;
        }
        if !row_sum.is_one() {
            return Err(Error::Precondition(format!(
                "matrix row {i} sums to {}, expected 1",
                format_rat(&row_sum)
            )));
        }
    }

    let mut labels: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    labels.extend((1..=m).map(|j| format!("b{j}")));
    labels.push("c".into());
    let b_label = |j: usize| LabelId(n + j);
    let c_label = LabelId(n + m);
    let nth = Rat::new(BigInt::one(), BigInt::from(n as u64));

    // Left chain: q_in --(a_i, 1/n)--> q_i --(b_j, M[i,j])--> q_fi --c-loop.
    let mut states: Vec<String> = vec!["q_in".into()];
    states.extend((1..=n).map(|i| format!("q{i}")));
    states.push("q_fi".into());
    let q_fi = StateId(n + 1);
    let mut moves: Vec<Vec<Move>> = Vec::with_capacity(n + 2);
    moves.push(vec![Move::from_entries(
        (0..n).map(|i| (LabelId(i), StateId(i + 1), nth.clone())).collect(),
    )]);
    for i in 0..n {
        moves.push(vec![Move::from_entries(
            (0..m).map(|j| (b_label(j), q_fi, matrix.get(i, j).clone())).collect(),
        )]);
    }
    moves.push(vec![Move::dirac(c_label, q_fi)]);
    let left = Mdp::new(
        labels.clone(),
        states,
        SubDist::dirac(n + 2, StateId(0)),
        moves,
    )?;

    // Right model: p_i --(a_i)--> some ℓ_k --(b_j)--> p_fi --c-loop.
    let mut states: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    states.extend((1..=rank).map(|k| format!("l{k}")));
    states.push("p_fi".into());
    let p_fi = StateId(n + rank);
    let mut initial = SubDist::zeros(n + rank + 1);
    for i in 0..n {
        initial.set(StateId(i), nth.clone());
    }
    let mut moves: Vec<Vec<Move>> = Vec::with_capacity(n + rank + 1);
    for i in 0..n {
        moves.push(
            (0..rank)
                .map(|k| Move::dirac(LabelId(i), StateId(n + k)))
                .collect(),
        );
    }
    for _k in 0..rank {
        moves.push((0..m).map(|j| Move::dirac(b_label(j), p_fi)).collect());
    }
    moves.push(vec![Move::dirac(c_label, p_fi)]);
    let right = Mdp::new(labels, states, initial, moves)?;

    Ok(GadgetOutput {
        left,
        right,
        question: format!(
            "does the matrix factor as A·W with stochastic A ({n}x{rank}) and W \
             ({rank}x{m})? equivalently: left ⊑ right under memoryless strategies"
        ),
        expected_semantics: json!({
            "kind": "nonnegative-matrix-factorization",
            "rows": n,
            "cols": m,
            "rank": rank,
            "matrix": (0..n)
                .map(|i| (0..m).map(|j| format_rat(matrix.get(i, j))).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "yes_iff": "matrix = A·W with row-stochastic nonnegative factors of the given rank",
            "refinement": "left ⊑ right (memoryless strategies)",
        }),
    })
}

/// The memoryless strategy of a [`gadget_nmf`] right model realizing the
/// factorization `A·W`: state `p_i` mixes its moves by row `i` of `A`,
/// middle state `ℓ_k` by row `k` of `W`.
pub fn nmf_factor_strategy(
    right: &Mdp,
    a: &RatMatrix,
    w: &RatMatrix,
) -> Result<MemorylessStrategy> {
    let (n, rank, m) = (a.rows(), a.cols(), w.cols());
    if w.rows() != rank || right.n_states() != n + rank + 1 {
        return Err(Error::Precondition(format!(
            "factor shapes {}x{rank} and {}x{m} do not fit a model with {} states",
            n,
            w.rows(),
            right.n_states()
        )));
    }
    let mut weights: Vec<Vec<Rat>> = Vec::with_capacity(n + rank + 1);
    for i in 0..n {
        weights.push((0..rank).map(|k| a.get(i, k).clone()).collect());
    }
    for k in 0..rank {
        weights.push((0..m).map(|j| w.get(k, j).clone()).collect());
    }
    weights.push(vec![Rat::one()]);
    MemorylessStrategy::from_weights(right, weights)
}

/// The two models of the mutual-refinement reduction: `d_plus_e` prepends a
/// fresh choice state that commits (via a fresh label `#`) to either
/// operand's initial distribution, `e2` prepends the forced `#`-step to `e`.
/// Then `d ⊑ e` iff both `e2 ⊑ d_plus_e` (which always holds) and
/// `d_plus_e ⊑ e2`.
pub fn gadget_mutual(d: &Mdp, e: &Mdp) -> Result<(Mdp, Mdp)> {
    let d_set: std::collections::BTreeSet<&str> = d.labels().iter().map(|s| s.as_str()).collect();
    let e_set: std::collections::BTreeSet<&str> = e.labels().iter().map(|s| s.as_str()).collect();
    if d_set != e_set {
        return Err(Error::Precondition(format!(
            "label sets differ: {:?} vs {:?}",
            d.labels(),
            e.labels()
        )));
    }
    if d_set.contains("#") {
        return Err(Error::Precondition(
            "label \"#\" is reserved for the start marker but already present".into(),
        ));
    }

    let union = crate::model::disjoint_union(d, e);
    let mut labels = union.model.labels().to_vec();
    let hash = LabelId(labels.len());
    labels.push("#".into());
    let mut states = union.model.states().to_vec();
    let p0_name = fresh_name(&states, "p0");
    states.push(p0_name);
    let p0 = StateId(states.len() - 1);
    let mut moves: Vec<Vec<Move>> = union.model.state_ids().map(|q| union.model.moves(q).to_vec()).collect();
    let move_d = Move::from_entries(
        d.initial()
            .support()
            .map(|q| (hash, union.left[q.0], d.initial().get(q).clone()))
            .collect(),
    );
    let move_e = Move::from_entries(
        e.initial()
            .support()
            .map(|q| (hash, union.right[q.0], e.initial().get(q).clone()))
            .collect(),
    );
    moves.push(vec![move_d, move_e]);
    let initial = SubDist::dirac(states.len(), p0);
    let d_plus_e = Mdp::new(labels, states, initial, moves)?;

    let mut labels = e.labels().to_vec();
    let hash = LabelId(labels.len());
    labels.push("#".into());
    let mut states = e.states().to_vec();
    let q0_name = fresh_name(&states, "q0");
    states.push(q0_name);
    let q0 = StateId(states.len() - 1);
    let mut moves: Vec<Vec<Move>> = e.state_ids().map(|q| e.moves(q).to_vec()).collect();
    moves.push(vec![Move::from_entries(
        e.initial()
            .support()
            .map(|q| (hash, q, e.initial().get(q).clone()))
            .collect(),
    )]);
    let initial = SubDist::dirac(states.len(), q0);
    let e2 = Mdp::new(labels, states, initial, moves)?;

    Ok((d_plus_e, e2))
}
