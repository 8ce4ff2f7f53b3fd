//! Refinement under restricted strategy classes.
//!
//! Two families live here. For *pure memoryless* strategies the problems are
//! finite: we enumerate move choices directly, guarded against blow-up.
//! For *randomized memoryless* strategies the refinement question
//! `mc ⊑ mdp` is not decided internally at all; instead it is compiled to an
//! existential formula over the reals ([`emit_etr`]) whose satisfying
//! assignments are exactly the witnessing strategies (together with an
//! invariant subspace certifying trace equality). The formula is rendered as
//! an SMT-LIB `QF_NRA` script for an external solver.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::linalg::{Basis, Rat, RatMatrix, RatVector, Relation};
use crate::mc_equiv::{mc_equiv, EquivVerdict};
use crate::model::{LabelId, Mdp, StateId};
use crate::semantics::{induced_mc, MemorylessStrategy, PureStrategy};
use crate::{Error, Result, DEFAULT_GUARD};

/// Outcome of a pure-memoryless refinement check.
///
/// `Yes` carries a witnessing strategy when the question is existential
/// (`refine_mc_mdp_pm`); `No` carries the unanswerable left-hand strategy
/// when the question is universal (`refine_pm_pm`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PmVerdict {
    Yes { witness: Option<PureStrategy> },
    No { universal_witness: Option<PureStrategy> },
}

impl PmVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, PmVerdict::Yes { .. })
    }
}

/// Number of pure memoryless strategies of `m` (product of move counts),
/// saturating at `u128::MAX`.
pub fn pure_strategy_count(m: &Mdp) -> u128 {
    let mut count: u128 = 1;
    for q in m.state_ids() {
        count = count.saturating_mul(m.moves(q).len() as u128);
    }
    count
}

/// Calls `f` for every pure memoryless strategy of `m`, in odometer order
/// (last state varies fastest). Stops early when `f` returns `Some(_)`.
fn scan_pure_strategies<T>(
    m: &Mdp,
    mut f: impl FnMut(&PureStrategy) -> Result<Option<T>>,
) -> Result<Option<T>> {
    let n = m.n_states();
    let mut choice = vec![0usize; n];
    loop {
        let strat = PureStrategy(choice.clone());
        if let Some(out) = f(&strat)? {
            return Ok(Some(out));
        }
        // Advance the odometer; done once every digit has wrapped.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < m.moves(StateId(pos)).len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Decides `c ⊑ d` where `d` may only use pure memoryless strategies:
/// holds iff some pure choice of moves makes the induced MC of `d`
/// trace-equivalent to `c`.
pub fn refine_mc_mdp_pm(c: &Mdp, d: &Mdp) -> Result<PmVerdict> {
    refine_mc_mdp_pm_with_guard(c, d, DEFAULT_GUARD)
}

pub fn refine_mc_mdp_pm_with_guard(c: &Mdp, d: &Mdp, guard: u64) -> Result<PmVerdict> {
    if !c.is_mc() {
        return Err(Error::Precondition(
            "pure-memoryless refinement of this form needs an MC on the left".into(),
        ));
    }
    let required = pure_strategy_count(d);
    if required > guard as u128 {
        return Err(Error::GuardExceeded { required, limit: guard });
    }
    let hit = scan_pure_strategies(d, |alpha| {
        let induced = induced_mc(d, &alpha.to_local(d))?;
        match mc_equiv(c, &induced)? {
            EquivVerdict::Equivalent => Ok(Some(alpha.clone())),
            EquivVerdict::Distinguished { .. } => Ok(None),
        }
    })?;
    Ok(match hit {
        Some(alpha) => PmVerdict::Yes { witness: Some(alpha) },
        None => PmVerdict::No { universal_witness: None },
    })
}

/// Decides `d ⊑ e` where both sides are restricted to pure memoryless
/// strategies: for every pure choice of `d` there must be a pure choice of
/// `e` inducing a trace-equivalent MC.
pub fn refine_pm_pm(d: &Mdp, e: &Mdp) -> Result<PmVerdict> {
    refine_pm_pm_with_guard(d, e, DEFAULT_GUARD)
}

pub fn refine_pm_pm_with_guard(d: &Mdp, e: &Mdp, guard: u64) -> Result<PmVerdict> {
    let count_d = pure_strategy_count(d);
    let count_e = pure_strategy_count(e);
    let required = count_d.saturating_mul(count_e);
    if required > guard as u128 {
        return Err(Error::GuardExceeded { required, limit: guard });
    }
    // The right-hand induced MCs are reused across every left-hand strategy.
    let mut answers = Vec::new();
    scan_pure_strategies(e, |beta| {
        answers.push(induced_mc(e, &beta.to_local(e))?);
        Ok(None::<()>)
    })?;
    let unanswered = scan_pure_strategies(d, |alpha| {
        let induced = induced_mc(d, &alpha.to_local(d))?;
        for candidate in &answers {
            if let EquivVerdict::Equivalent = mc_equiv(&induced, candidate)? {
                return Ok(None);
            }
        }
        Ok(Some(alpha.clone()))
    })?;
    Ok(match unanswered {
        Some(alpha) => PmVerdict::No { universal_witness: Some(alpha) },
        None => PmVerdict::Yes { witness: None },
    })
}

/// One polynomial constraint `Σ coef·Π vars ⋈ bound` with each product over
/// at most two variables (the encoding is quadratic).
#[derive(Clone, Debug)]
pub struct EtrConstraint {
    pub name: String,
    /// Terms as (coefficient, variable indices into [`EtrInstance::variables`]);
    /// an empty index list is a constant term.
    pub terms: Vec<(Rat, Vec<usize>)>,
    pub relation: Relation,
    pub bound: Rat,
}

/// An existential real-arithmetic instance: satisfiable iff the MC is
/// trace-refined by the MDP under some randomized memoryless strategy.
#[derive(Clone, Debug)]
pub struct EtrInstance {
    pub variables: Vec<String>,
    pub constraints: Vec<EtrConstraint>,
}

fn x_name(i: usize, k: usize) -> String {
    format!("x_{i}_{k}")
}

fn f_name(i: usize, j: usize) -> String {
    format!("f_{i}_{j}")
}

fn m_name(a: usize, i: usize, j: usize) -> String {
    format!("m_{a}_{i}_{j}")
}

/// Variable layout shared by [`emit_etr`] and [`known_assignment`]: all
/// `x_{i}_{k}` (strategy weights of `d`, state-major), then `f_{i}_{j}`
/// (an invariant-subspace matrix over the disjoint union, `c`'s states
/// first), then `m_{a}_{i}_{j}` (one mixing matrix per label).
struct EtrLayout {
    n_c: usize,
    n_u: usize,
    x_base: Vec<usize>,
    f_start: usize,
    m_start: usize,
}

impl EtrLayout {
    fn new(c: &Mdp, d: &Mdp) -> EtrLayout {
        let mut x_base = Vec::with_capacity(d.n_states());
        let mut next = 0;
        for q in d.state_ids() {
            x_base.push(next);
            next += d.moves(q).len();
        }
        let n_u = c.n_states() + d.n_states();
        EtrLayout {
            n_c: c.n_states(),
            n_u,
            x_base,
            f_start: next,
            m_start: next + n_u * n_u,
        }
    }

    fn x(&self, i: usize, k: usize) -> usize {
        self.x_base[i] + k
    }

    fn f(&self, i: usize, j: usize) -> usize {
        self.f_start + i * self.n_u + j
    }

    fn m(&self, a: usize, i: usize, j: usize) -> usize {
        self.m_start + (a * self.n_u + i) * self.n_u + j
    }
}

/// Compiles `c ⊑ d` (randomized memoryless strategies for `d`) into a
/// quadratic existential instance plus its SMT-LIB rendering.
///
/// Writing `Δ̄(a)` for the union transition matrix of label `a` — `c`'s
/// fixed rows on top, `d`'s strategy-weighted rows below — the constraints
/// state that some matrix `F` has first row `(μ₀, −μ₀′)`, all row sums zero,
/// and satisfies `F·Δ̄(a) = M(a)·F` for every label. The row space of such an
/// `F` contains every word's signed sub-distribution, so all trace-probability
/// gaps vanish; conversely the forward closure of the first row provides `F`
/// whenever the strategy witnesses refinement.
pub fn emit_etr(c: &Mdp, d: &Mdp) -> Result<(EtrInstance, String)> {
    if !c.is_mc() {
        return Err(Error::Precondition(
            "the real-arithmetic emission needs an MC on the left".into(),
        ));
    }
    let c_set: std::collections::BTreeSet<&str> = c.labels().iter().map(|s| s.as_str()).collect();
    let d_set: std::collections::BTreeSet<&str> = d.labels().iter().map(|s| s.as_str()).collect();
    if c_set != d_set {
        return Err(Error::Precondition(format!(
            "label sets differ: left has {:?}, right has {:?}",
            c.labels(),
            d.labels()
        )));
    }
    // Union label order follows the left operand; map to d's local ids.
    let d_label: Vec<LabelId> = c
        .labels()
        .iter()
        .map(|name| d.label_index(name).expect("label sets checked equal"))
        .collect();

    let layout = EtrLayout::new(c, d);
    let (n_c, n_u) = (layout.n_c, layout.n_u);

    let mut variables = Vec::new();
    for i in 0..d.n_states() {
        for k in 0..d.moves(StateId(i)).len() {
            variables.push(x_name(i, k));
        }
    }
    for i in 0..n_u {
        for j in 0..n_u {
            variables.push(f_name(i, j));
        }
    }
    for a in 0..c.n_labels() {
        for i in 0..n_u {
            for j in 0..n_u {
                variables.push(m_name(a, i, j));
            }
        }
    }

    let mut constraints = Vec::new();
    // Strategy weights form a distribution at every state of d.
    for i in 0..d.n_states() {
        let terms = (0..d.moves(StateId(i)).len())
            .map(|k| (Rat::one(), vec![layout.x(i, k)]))
            .collect();
        constraints.push(EtrConstraint {
            name: format!("x_row_{i}"),
            terms,
            relation: Relation::Eq,
            bound: Rat::one(),
        });
    }
    for i in 0..d.n_states() {
        for k in 0..d.moves(StateId(i)).len() {
            constraints.push(EtrConstraint {
                name: format!("x_{i}_{k}_nonneg"),
                terms: vec![(-Rat::one(), vec![layout.x(i, k)])],
                relation: Relation::Le,
                bound: Rat::zero(),
            });
            constraints.push(EtrConstraint {
                name: format!("x_{i}_{k}_le_one"),
                terms: vec![(Rat::one(), vec![layout.x(i, k)])],
                relation: Relation::Le,
                bound: Rat::one(),
            });
        }
    }
    // First row of F pinned to the signed pair of initial distributions.
    for j in 0..n_u {
        let value = if j < n_c {
            c.initial().get(StateId(j)).clone()
        } else {
            -d.initial().get(StateId(j - n_c)).clone()
        };
        constraints.push(EtrConstraint {
            name: format!("f_init_{j}"),
            terms: vec![(Rat::one(), vec![layout.f(0, j)])],
            relation: Relation::Eq,
            bound: value,
        });
    }
    // Every row of F is orthogonal to the all-ones vector.
    for i in 0..n_u {
        let terms = (0..n_u).map(|j| (Rat::one(), vec![layout.f(i, j)])).collect();
        constraints.push(EtrConstraint {
            name: format!("f_row_sum_{i}"),
            terms,
            relation: Relation::Eq,
            bound: Rat::zero(),
        });
    }
    // Commutation F·Δ̄(a) = M(a)·F, entry by entry.
    for a in 0..c.n_labels() {
        for i in 0..n_u {
            for j in 0..n_u {
                let mut terms: Vec<(Rat, Vec<usize>)> = Vec::new();
                // (F·Δ̄(a))[i,j]: fixed MC rows contribute linear terms,
                // strategy-weighted rows contribute x·f products.
                for k in 0..n_u {
                    if k < n_c {
                        let w = c.moves(StateId(k))[0].prob(LabelId(a), StateId(j));
                        if !w.is_zero() && j < n_c {
                            terms.push((w, vec![layout.f(i, k)]));
                        }
                    } else if j >= n_c {
                        let q = k - n_c;
                        for (mv_idx, mv) in d.moves(StateId(q)).iter().enumerate() {
                            let w = mv.prob(d_label[a], StateId(j - n_c));
                            if !w.is_zero() {
                                terms.push((w, vec![layout.f(i, k), layout.x(q, mv_idx)]));
                            }
                        }
                    }
                }
                for k in 0..n_u {
                    terms.push((-Rat::one(), vec![layout.m(a, i, k), layout.f(k, j)]));
                }
                constraints.push(EtrConstraint {
                    name: format!("commute_{a}_{i}_{j}"),
                    terms,
                    relation: Relation::Eq,
                    bound: Rat::zero(),
                });
            }
        }
    }

    let instance = EtrInstance { variables, constraints };
    let script = render_smtlib(&instance);
    Ok((instance, script))
}

fn rat_to_smt(r: &Rat) -> String {
    let abs = r.abs();
    let body = if abs.denom().is_one() {
        abs.numer().to_string()
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn term_to_smt(coef: &Rat, vars: &[usize], names: &[String]) -> String {
    let mut parts: Vec<String> = Vec::new();
    if !coef.is_one() || vars.is_empty() {
        parts.push(rat_to_smt(coef));
    }
    for &v in vars {
        parts.push(names[v].clone());
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(* {})", parts.join(" "))
    }
}

/// Renders an instance as an SMT-LIB 2 `QF_NRA` script, one assertion per
/// constraint, each preceded by a comment naming it.
pub fn render_smtlib(inst: &EtrInstance) -> String {
    let mut out = String::new();
    out.push_str("(set-logic QF_NRA)\n");
    for v in &inst.variables {
        out.push_str(&format!("(declare-const {v} Real)\n"));
    }
    for con in &inst.constraints {
        let sum = match con.terms.len() {
            0 => "0".to_string(),
            1 => term_to_smt(&con.terms[0].0, &con.terms[0].1, &inst.variables),
            _ => {
                let parts: Vec<String> = con
                    .terms
                    .iter()
                    .map(|(c, vs)| term_to_smt(c, vs, &inst.variables))
                    .collect();
                format!("(+ {})", parts.join(" "))
            }
        };
        let op = match con.relation {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "=",
        };
        out.push_str(&format!("; {}\n", con.name));
        out.push_str(&format!("(assert ({op} {sum} {}))\n", rat_to_smt(&con.bound)));
    }
    out.push_str("(check-sat)\n");
    out
}

/// Evaluates every constraint of `inst` under `assignment`; errors if any
/// declared variable has no value.
pub fn check_assignment(inst: &EtrInstance, assignment: &BTreeMap<String, Rat>) -> Result<bool> {
    let mut values = Vec::with_capacity(inst.variables.len());
    for name in &inst.variables {
        match assignment.get(name) {
            Some(v) => values.push(v.clone()),
            None => {
                return Err(Error::Precondition(format!(
                    "assignment is missing variable {name:?}"
                )))
            }
        }
    }
    for con in &inst.constraints {
        let mut lhs = Rat::zero();
        for (coef, vars) in &con.terms {
            let mut prod = coef.clone();
            for &v in vars {
                prod *= &values[v];
            }
            lhs += prod;
        }
        let ok = match con.relation {
            Relation::Le => lhs <= con.bound,
            Relation::Lt => lhs < con.bound,
            Relation::Eq => lhs == con.bound,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Builds the satisfying assignment corresponding to a known witnessing
/// memoryless strategy: `x` copies the strategy weights, `F`'s rows are the
/// forward closure of `(μ₀, −μ₀′)` under the union transition matrices
/// (first row literal, padded with zero rows), and each `M(a)` is solved
/// exactly from the commutation equation.
///
/// When `alpha` does not witness refinement the returned assignment is still
/// well-formed but fails [`check_assignment`] on a row-sum constraint.
pub fn known_assignment(
    c: &Mdp,
    d: &Mdp,
    alpha: &MemorylessStrategy,
) -> Result<BTreeMap<String, Rat>> {
    let (inst_check, _) = emit_etr(c, d)?; // reuses the precondition checks
    let n_c = c.n_states();
    let n_u = n_c + d.n_states();

    let mut out = BTreeMap::new();
    for i in 0..d.n_states() {
        for (k, w) in alpha.weights(StateId(i)).iter().enumerate() {
            out.insert(x_name(i, k), w.clone());
        }
    }

    // Union transition matrix per label, with d's rows already mixed by alpha.
    let induced = induced_mc(d, alpha)?;
    let d_label: Vec<LabelId> = c
        .labels()
        .iter()
        .map(|name| d.label_index(name).expect("label sets checked equal"))
        .collect();
    let mut deltas = Vec::with_capacity(c.n_labels());
    for a in 0..c.n_labels() {
        let mut delta = RatMatrix::zeros(n_u, n_u);
        for i in 0..n_c {
            for j in 0..n_c {
                delta.set(i, j, c.moves(StateId(i))[0].prob(LabelId(a), StateId(j)));
            }
        }
        for i in 0..d.n_states() {
            for j in 0..d.n_states() {
                let w = induced.moves(StateId(i))[0].prob(d_label[a], StateId(j));
                delta.set(n_c + i, n_c + j, w);
            }
        }
        deltas.push(delta);
    }

    let mut row0 = RatVector::zeros(n_u);
    for j in 0..n_c {
        row0.set(j, c.initial().get(StateId(j)).clone());
    }
    for j in 0..d.n_states() {
        row0.set(n_c + j, -d.initial().get(StateId(j)).clone());
    }

    let mut rows = vec![row0.clone()];
    let mut span: Basis = Basis::new(n_u);
    span.insert(row0, None);
    let mut next = 0;
    while next < rows.len() {
        for delta in &deltas {
            let image = delta.vec_mul(&rows[next]);
            if span.insert(image.clone(), None) {
                rows.push(image);
            }
        }
        next += 1;
    }
    while rows.len() < n_u {
        rows.push(RatVector::zeros(n_u));
    }

    for (i, row) in rows.iter().enumerate() {
        for j in 0..n_u {
            out.insert(f_name(i, j), row.get(j).clone());
        }
    }

    // M(a) row i solves Fᵀ·m = (row_i·Δ̄(a))ᵀ; solvable because the closure
    // rows are closed under every Δ̄(a) and the padding rows map to zero.
    let f_transpose = RatMatrix::from_cols(&rows);
    for (a, delta) in deltas.iter().enumerate() {
        for i in 0..n_u {
            let rhs = delta.vec_mul(&rows[i]);
            let m_row = crate::linalg::solve(&f_transpose, &rhs).ok_or_else(|| {
                Error::Internal("closure row left the solved span".into())
            })?;
            for j in 0..n_u {
                out.insert(m_name(a, i, j), m_row.get(j).clone());
            }
        }
    }

    debug_assert_eq!(out.len(), inst_check.variables.len());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{noisy_choice_mdp, noisy_commit_mc};
    use crate::model::{Move, SubDist};
    use crate::semantics::LocalStrategy;

    /// The committed-chain MC with every move listed twice, making each of
    /// its 8 pure strategies induce the same chain.
    fn duplicated_commit() -> Mdp {
        let base = noisy_commit_mc();
        let moves = base
            .state_ids()
            .map(|q| {
                let mv = base.moves(q)[0].clone();
                vec![mv.clone(), mv]
            })
            .collect();
        Mdp::new(
            base.labels().to_vec(),
            base.states().to_vec(),
            base.initial().clone(),
            moves,
        )
        .unwrap()
    }

    #[test]
    fn strategy_counts_and_guard() {
        assert_eq!(pure_strategy_count(&noisy_choice_mdp()), 2);
        assert_eq!(pure_strategy_count(&duplicated_commit()), 8);
        let err = refine_mc_mdp_pm_with_guard(&noisy_commit_mc(), &duplicated_commit(), 7)
            .unwrap_err();
        match err {
            Error::GuardExceeded { required, limit } => {
                assert_eq!((required, limit), (8, 7));
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn pure_witness_found_among_duplicated_moves() {
        let c = noisy_commit_mc();
        let d = duplicated_commit();
        match refine_mc_mdp_pm(&c, &d).unwrap() {
            PmVerdict::Yes { witness: Some(alpha) } => {
                let induced = induced_mc(&d, &alpha.to_local(&d)).unwrap();
                assert_eq!(mc_equiv(&c, &induced).unwrap(), EquivVerdict::Equivalent);
            }
            other => panic!("expected a witnessed yes, got {other:?}"),
        }
    }

    #[test]
    fn committed_choice_has_no_pure_witness() {
        let verdict = refine_mc_mdp_pm(&noisy_commit_mc(), &noisy_choice_mdp()).unwrap();
        assert_eq!(verdict, PmVerdict::No { universal_witness: None });
    }

    #[test]
    fn pm_pm_self_refinement_and_failure() {
        let d = noisy_choice_mdp();
        assert_eq!(refine_pm_pm(&d, &d).unwrap(), PmVerdict::Yes { witness: None });

        // The chain cannot answer either committed choice of the MDP.
        let c = noisy_commit_mc();
        match refine_pm_pm(&d, &c).unwrap() {
            PmVerdict::No { universal_witness: Some(alpha) } => {
                assert_eq!(alpha.0, vec![0, 0]);
            }
            other => panic!("expected a universal witness, got {other:?}"),
        }
        // Nor can the MDP's pure choices reproduce the chain.
        assert!(!refine_pm_pm(&c, &d).unwrap().holds());
    }

    #[test]
    fn etr_counts_match_closed_forms() {
        // 3 MC states + 3 MDP states, 6 moves, 4 labels.
        let (inst, script) = emit_etr(&noisy_commit_mc(), &duplicated_commit()).unwrap();
        assert_eq!(inst.variables.len(), 6 + 36 + 4 * 36);
        assert_eq!(inst.constraints.len(), 3 + 2 * 6 + 2 * 6 + 4 * 36);
        assert_eq!(script.matches("(assert ").count(), inst.constraints.len());
        assert_eq!(script.matches("(declare-const ").count(), inst.variables.len());
        assert!(script.starts_with("(set-logic QF_NRA)\n"));
        assert!(script.ends_with("(check-sat)\n"));

        // 3 + 2 states, 3 moves.
        let (inst, _) = emit_etr(&noisy_commit_mc(), &noisy_choice_mdp()).unwrap();
        assert_eq!(inst.variables.len(), 3 + 25 + 4 * 25);
        assert_eq!(inst.constraints.len(), 2 + 2 * 3 + 2 * 5 + 4 * 25);
    }

    #[test]
    fn etr_needs_matching_label_sets() {
        let c = noisy_commit_mc();
        let skewed = Mdp::new(
            vec!["a".into()],
            vec!["q".into()],
            SubDist::dirac(1, StateId(0)),
            vec![vec![Move::dirac(LabelId(0), StateId(0))]],
        )
        .unwrap();
        assert!(matches!(emit_etr(&c, &skewed), Err(Error::Precondition(_))));
    }

    #[test]
    fn known_assignment_satisfies_instance() {
        let c = noisy_commit_mc();
        let d = duplicated_commit();
        let (inst, _) = emit_etr(&c, &d).unwrap();
        let alpha = PureStrategy(vec![1, 0, 1]).to_local(&d);
        let solution = known_assignment(&c, &d, &alpha).unwrap();
        assert!(check_assignment(&inst, &solution).unwrap());

        // A mixed witness works too.
        let half = crate::linalg::rat(1, 2);
        let mixed = LocalStrategy::from_weights(
            &d,
            vec![
                vec![half.clone(), half.clone()],
                vec![half.clone(), half.clone()],
                vec![half.clone(), half],
            ],
        )
        .unwrap();
        let solution = known_assignment(&c, &d, &mixed).unwrap();
        assert!(check_assignment(&inst, &solution).unwrap());
    }

    #[test]
    fn known_assignment_exposes_non_witness() {
        let c = noisy_commit_mc();
        let d = noisy_choice_mdp();
        let (inst, _) = emit_etr(&c, &d).unwrap();
        let alpha = PureStrategy(vec![0, 0]).to_local(&d);
        let solution = known_assignment(&c, &d, &alpha).unwrap();
        assert!(!check_assignment(&inst, &solution).unwrap());
    }

    #[test]
    fn check_assignment_requires_every_variable() {
        let c = noisy_commit_mc();
        let d = duplicated_commit();
        let (inst, _) = emit_etr(&c, &d).unwrap();
        let alpha = PureStrategy(vec![0, 0, 0]).to_local(&d);
        let mut solution = known_assignment(&c, &d, &alpha).unwrap();
        solution.remove("f_0_0");
        assert!(matches!(
            check_assignment(&inst, &solution),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rendering_is_deterministic() {
        let (_, s1) = emit_etr(&noisy_commit_mc(), &noisy_choice_mdp()).unwrap();
        let (_, s2) = emit_etr(&noisy_commit_mc(), &noisy_choice_mdp()).unwrap();
        assert_eq!(s1, s2);
    }
}
