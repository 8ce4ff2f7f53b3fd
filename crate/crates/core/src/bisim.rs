//! Distribution bisimulation: extremal strategies, bisimulation vector
//! spaces, and non-bisimilarity certificates.
//!
//! Everything here works over a single model (usually a disjoint union) and
//! a current subspace of ℝ^Q given by a column matrix `B`. Distributions and
//! strategies are compared through *points*
//! `p(μ, α) = (μ·Δ_α(a₁)·B | … | μ·Δ_α(a_{|L|})·B)`, vectors in ℝ^{|L|·k}
//! whose per-label blocks record where one strategy step sends the
//! distribution, projected onto the subspace.
//!
//! A pure strategy is *extremal* when a single direction vector makes its
//! point strictly dominant at every state over all moves with a different
//! point — an exact LP feasibility question. Closing `span{𝟏}` under the
//! transition matrices of extremal strategies yields the space `V` whose
//! orthogonality test decides distribution bisimilarity of two initial
//! distributions; against a Markov chain the closure may instead use the
//! small strategy basis of [`crate::refinement`], which keeps that case
//! polynomial. Non-bisimilarity admits short certificates: chains of vectors
//! grown from `𝟏` by extremal transition matrices, ending in a vector on
//! which the two initial distributions disagree. Certificates are verified
//! by recomputation and can be found exhaustively at desk scale.

use std::collections::BTreeSet;

use num::Zero;

use crate::linalg::{
    format_rat, lp_feasible, rat_int, Basis, LinearConstraintSystem, Rat, RatMatrix, RatVector,
    Relation,
};
use crate::model::{disjoint_union, LabelId, Mdp, Move, StateId, SubDist};
use crate::refinement::{strategy_basis, StrategyId};
use crate::semantics::{transition_matrix, LocalStrategy, PureStrategy};
use crate::{Error, Result, DEFAULT_GUARD};

/// A vector in direction space ℝ^{|L|·k}: `k`-wide blocks in canonical label
/// order. Both strategy points and LP direction witnesses live here.
pub type DirectionPoint = RatVector;

/// The point of a single move: `p(d_q, α_{q,m})` for the state `q` owning the
/// move, i.e. the per-label blocks `m(a,·)·B`. Depends only on the move, not
/// on `q` itself.
pub fn move_point(m: &Mdp, b: &RatMatrix, mv: &Move) -> DirectionPoint {
    debug_assert_eq!(b.rows(), m.n_states());
    let k = b.cols();
    let mut blocks = vec![RatVector::zeros(k); m.n_labels()];
    for (a, t, p) in mv.entries() {
        blocks[a.0].add_scaled(p, &b.row_vec(t.0));
    }
    RatVector::concat(&blocks)
}

/// The point `p(μ, α)`: concatenated blocks `μ·Δ_α(a)·B` in label order.
pub fn point(m: &Mdp, b: &RatMatrix, mu: &SubDist, alpha: &LocalStrategy) -> Result<DirectionPoint> {
    if b.rows() != m.n_states() || mu.dim() != m.n_states() {
        return Err(Error::Precondition(format!(
            "point: B has {} rows and μ has dimension {}, model has {} states",
            b.rows(),
            mu.dim(),
            m.n_states()
        )));
    }
    let mut acc = RatVector::zeros(m.n_labels() * b.cols());
    for q in m.state_ids() {
        let w = mu.get(q);
        if w.is_zero() {
            continue;
        }
        for (kk, mv) in m.moves(q).iter().enumerate() {
            let c = w * &alpha.weights(q)[kk];
            if c.is_zero() {
                continue;
            }
            acc.add_scaled(&c, &move_point(m, b, mv));
        }
    }
    Ok(acc)
}

/// The moves at `q` whose points equal the point of `α̂`'s chosen move
/// (always including the chosen move itself).
pub fn eqmoves(m: &Mdp, b: &RatMatrix, pure: &PureStrategy, q: StateId) -> BTreeSet<usize> {
    let chosen = move_point(m, b, &m.moves(q)[pure.chosen(q)]);
    m.moves(q)
        .iter()
        .enumerate()
        .filter(|(_, mv)| move_point(m, b, mv) == chosen)
        .map(|(k, _)| k)
        .collect()
}

/// Decides whether the pure strategy is extremal with respect to the
/// subspace spanned by `B`'s columns: whether some direction `v` satisfies
/// `p(d_q, α_{q,m})·v + 1 ≤ p(d_q, α̂)·v` for every state `q` and every move
/// `m ∉ eqmoves(q)`. Returns the witnessing direction when feasible. The
/// unit slack loses nothing: the constraint system is homogeneous, so any
/// strictly dominating direction scales to slack one.
pub fn is_extremal(m: &Mdp, b: &RatMatrix, pure: &PureStrategy) -> Result<Option<RatVector>> {
    let dim = m.n_labels() * b.cols();
    let mut sys = LinearConstraintSystem::new(dim);
    for q in m.state_ids() {
        let points: Vec<DirectionPoint> =
            m.moves(q).iter().map(|mv| move_point(m, b, mv)).collect();
        let chosen = &points[pure.chosen(q)];
        for p in &points {
            if p == chosen {
                continue;
            }
            // p·v ≤ chosen·v − 1
            sys.push(p.sub(chosen), Relation::Le, rat_int(-1));
        }
    }
    lp_feasible(&sys)
}

/// Enumerates the extremal pure strategies with respect to `B`, deduplicated
/// by per-state point profile: at each state only one move per distinct point
/// is considered, since the point profile determines both extremality and the
/// action of the strategy's transition matrices on `B`'s column space.
pub fn extremal_strategies(m: &Mdp, b: &RatMatrix) -> Result<Vec<PureStrategy>> {
    extremal_strategies_with_guard(m, b, DEFAULT_GUARD)
}

/// As [`extremal_strategies`] with an explicit enumeration guard: the
/// deduplicated candidate count must not exceed `guard`.
pub fn extremal_strategies_with_guard(
    m: &Mdp,
    b: &RatMatrix,
    guard: u64,
) -> Result<Vec<PureStrategy>> {
    let mut reps: Vec<Vec<usize>> = Vec::with_capacity(m.n_states());
    for q in m.state_ids() {
        let mut seen: Vec<DirectionPoint> = Vec::new();
        let mut state_reps = Vec::new();
        for (k, mv) in m.moves(q).iter().enumerate() {
            let p = move_point(m, b, mv);
            if !seen.contains(&p) {
                seen.push(p);
                state_reps.push(k);
            }
        }
        reps.push(state_reps);
    }

    let mut candidates: u128 = 1;
    for r in &reps {
        candidates = candidates.saturating_mul(r.len() as u128);
    }
    if candidates > u128::from(guard) {
        return Err(Error::GuardExceeded { required: candidates, limit: guard });
    }

    let mut out = Vec::new();
    let mut odometer = vec![0usize; m.n_states()];
    loop {
        let choice: Vec<usize> =
            odometer.iter().enumerate().map(|(qi, &r)| reps[qi][r]).collect();
        let pure = PureStrategy(choice);
        if is_extremal(m, b, &pure)?.is_some() {
            out.push(pure);
        }
        // Advance, last state fastest.
        let mut pos = m.n_states();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < reps[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// How one closure step was generated: which strategy's transition matrix was
/// applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AppliedStrategy {
    /// A pure strategy from the extremal enumeration (chosen move per state).
    Pure(Vec<usize>),
    /// A strategy-basis element from the MDP-vs-chain closure.
    Basis(StrategyId),
}

/// The bisimulation vector space `V ⊆ ℝ^Q`: the smallest space containing
/// `𝟏` and closed under the relevant transition matrices.
#[derive(Clone, Debug)]
pub struct BisimSpace {
    /// Echelon basis of `V`.
    pub basis: Basis,
    /// The spanning vectors as generated, parallel to `provenance`.
    pub vectors: Vec<RatVector>,
    /// Per vector, the generating `(strategy, label)` applications, outermost
    /// first: `v = Δ_{s₁}(a₁)·Δ_{s₂}(a₂)·…·𝟏`.
    pub provenance: Vec<Vec<(AppliedStrategy, LabelId)>>,
    /// Number of productive closure sweeps; one further sweep adds nothing.
    pub stabilized_at: usize,
}

impl BisimSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

fn close_space<F>(u: &Mdp, mut generators: F) -> Result<BisimSpace>
where
    F: FnMut(&Basis) -> Result<Vec<(AppliedStrategy, LocalStrategy)>>,
{
    let n = u.n_states();
    let mut basis: Basis = Basis::new(n);
    let mut vectors = vec![RatVector::ones(n)];
    let mut provenance: Vec<Vec<(AppliedStrategy, LabelId)>> = vec![Vec::new()];
    basis.insert(vectors[0].clone(), None);

    let mut stabilized_at = 0;
    for sweep in 1.. {
        let gens = generators(&basis)?;
        let snapshot = vectors.len();
        let mut added = false;
        for (id, alpha) in &gens {
            for a in u.label_ids() {
                let delta = transition_matrix(u, alpha, a);
                for i in 0..snapshot {
                    let child = delta.mul_vec(&vectors[i]);
                    if basis.insert(child.clone(), None) {
                        let mut chain = vec![(id.clone(), a)];
                        chain.extend(provenance[i].iter().cloned());
                        vectors.push(child);
                        provenance.push(chain);
                        added = true;
                    }
                }
            }
        }
        if !added {
            break;
        }
        stabilized_at = sweep;
    }
    debug_assert!(stabilized_at + 1 <= n.max(1));
    Ok(BisimSpace { basis, vectors, provenance, stabilized_at })
}

/// The bisimulation space for two general MDPs, computed on their disjoint
/// union: close `span{𝟏}` under `Δ_{α̂}(a)` for every strategy `α̂` extremal
/// with respect to the current space. The extremal set is recomputed each
/// sweep, since extremality depends on the growing space.
pub fn bisim_space_two_mdps(u: &Mdp) -> Result<BisimSpace> {
    bisim_space_two_mdps_with_guard(u, DEFAULT_GUARD)
}

/// As [`bisim_space_two_mdps`] with an explicit enumeration guard.
pub fn bisim_space_two_mdps_with_guard(u: &Mdp, guard: u64) -> Result<BisimSpace> {
    close_space(u, |basis| {
        let b = basis.column_matrix();
        let extremals = extremal_strategies_with_guard(u, &b, guard)?;
        Ok(extremals
            .into_iter()
            .map(|p| {
                let local = p.to_local(u);
                (AppliedStrategy::Pure(p.0), local)
            })
            .collect())
    })
}

/// The MDP-versus-chain space: forms the disjoint union and closes `span{𝟏}`
/// under `Δ_α(a)` for `α` in the union's strategy basis. Polynomial — no
/// extremal enumeration is involved.
pub fn bisim_space_mdp_mc(mdp: &Mdp, mc: &Mdp) -> Result<BisimSpace> {
    if !mc.is_mc() {
        return Err(Error::Precondition(
            "bisim_space_mdp_mc: second argument must be a Markov chain".into(),
        ));
    }
    let union = disjoint_union(mdp, mc);
    let u = &union.model;
    let sigma = strategy_basis(u);
    let gens: Vec<(AppliedStrategy, LocalStrategy)> = sigma
        .ids
        .iter()
        .zip(&sigma.strategies)
        .map(|(id, s)| (AppliedStrategy::Basis(*id), s.clone()))
        .collect();
    close_space(u, |_| Ok(gens.clone()))
}

/// Bisimilarity of two subdistributions over the space's model: true iff
/// `(μ1 − μ2)` is orthogonal to every vector of `V`.
pub fn bisimilar(space: &BisimSpace, mu1: &SubDist, mu2: &SubDist) -> Result<bool> {
    if mu1.dim() != space.basis.dim() || mu2.dim() != space.basis.dim() {
        return Err(Error::Precondition(format!(
            "bisimilar: distributions have dimensions {} and {}, space expects {}",
            mu1.dim(),
            mu2.dim(),
            space.basis.dim()
        )));
    }
    let diff = mu1.to_vector().sub(&mu2.to_vector());
    Ok(space.basis.rows().iter().all(|v| diff.dot(v).is_zero()))
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// A non-bisimilarity certificate: a chain `b₀ = 𝟏`,
/// `b_j = Δ_{α̂_j}(a_j)·b_{i_j}` with `i_j < j` and each `α̂_j` extremal with
/// respect to `span(b₀…b_{j−1})`, whose final vector separates the two
/// initial distributions. The `b_j` are recomputed during verification, never
/// stored. All three lists have length `k − 1`.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// Number of chain vectors, `1 ≤ k ≤ |Q|`.
    pub k: usize,
    pub back_refs: Vec<usize>,
    pub labels: Vec<LabelId>,
    pub strategies: Vec<PureStrategy>,
}

/// Verification outcome. `Reject` names the first failing check.
#[derive(Clone, Debug)]
pub enum CertificateVerdict {
    Accept { lhs: Rat, rhs: Rat },
    Reject { reason: String },
}

impl CertificateVerdict {
    pub fn accepted(&self) -> bool {
        matches!(self, CertificateVerdict::Accept { .. })
    }
}

/// Verifies a certificate against a (union) model and the two embedded
/// initial distributions. Structural violations (index bounds, size limits)
/// are errors; a well-formed certificate failing an extremality check or the
/// final inequality is rejected with the first failing check named.
pub fn verify_certificate(
    u: &Mdp,
    mu_d: &SubDist,
    mu_e: &SubDist,
    cert: &Certificate,
) -> Result<CertificateVerdict> {
    let n = u.n_states();
    if cert.k == 0 || cert.k > n {
        return Err(Error::Precondition(format!(
            "certificate size k = {} outside 1..={n}",
            cert.k
        )));
    }
    let steps = cert.k - 1;
    if cert.back_refs.len() != steps || cert.labels.len() != steps || cert.strategies.len() != steps
    {
        return Err(Error::Precondition(format!(
            "certificate lists must all have length k − 1 = {steps}"
        )));
    }
    for (t, &i) in cert.back_refs.iter().enumerate() {
        if i > t {
            return Err(Error::Precondition(format!(
                "back-reference {i} at step {} must point to an earlier vector",
                t + 1
            )));
        }
    }
    for a in &cert.labels {
        if a.0 >= u.n_labels() {
            return Err(Error::Precondition(format!("label index {} out of range", a.0)));
        }
    }
    for s in &cert.strategies {
        s.validate(u)?;
    }
    if mu_d.dim() != n || mu_e.dim() != n {
        return Err(Error::Precondition(
            "certificate distributions must match the model dimension".into(),
        ));
    }

    let mut vectors = vec![RatVector::ones(n)];
    let mut basis: Basis = Basis::new(n);
    basis.insert(vectors[0].clone(), None);
    for t in 0..steps {
        let b = basis.column_matrix();
        if is_extremal(u, &b, &cert.strategies[t])?.is_none() {
            return Ok(CertificateVerdict::Reject {
                reason: format!(
                    "strategy at step {} is not extremal with respect to span(b_0..b_{})",
                    t + 1,
                    t
                ),
            });
        }
        let local = cert.strategies[t].to_local(u);
        let delta = transition_matrix(u, &local, cert.labels[t]);
        let next = delta.mul_vec(&vectors[cert.back_refs[t]]);
        basis.insert(next.clone(), None);
        vectors.push(next);
    }
    let last = &vectors[cert.k - 1];
    let lhs = mu_d.to_vector().dot(last);
    let rhs = mu_e.to_vector().dot(last);
    if lhs == rhs {
        return Ok(CertificateVerdict::Reject {
            reason: format!(
                "initial distributions agree on the final vector (both give {})",
                format_rat(&lhs)
            ),
        });
    }
    Ok(CertificateVerdict::Accept { lhs, rhs })
}

struct CertSearch<'a> {
    u: &'a Mdp,
    diff: RatVector,
    max_k: usize,
    guard: u64,
    nodes: u64,
    visited: BTreeSet<Vec<Vec<Rat>>>,
    vectors: Vec<RatVector>,
    steps: Vec<(usize, LabelId, PureStrategy)>,
}

impl CertSearch<'_> {
    fn accept(&self, back: usize, a: LabelId, pure: &PureStrategy) -> Certificate {
        let mut back_refs: Vec<usize> = self.steps.iter().map(|s| s.0).collect();
        let mut labels: Vec<LabelId> = self.steps.iter().map(|s| s.1).collect();
        let mut strategies: Vec<PureStrategy> =
            self.steps.iter().map(|s| s.2.clone()).collect();
        back_refs.push(back);
        labels.push(a);
        strategies.push(pure.clone());
        Certificate { k: self.vectors.len() + 1, back_refs, labels, strategies }
    }

    fn dfs(&mut self, basis: &Basis) -> Result<Option<Certificate>> {
        self.nodes += 1;
        if self.nodes > self.guard {
            return Err(Error::GuardExceeded {
                required: u128::from(self.nodes),
                limit: self.guard,
            });
        }
        let signature: Vec<Vec<Rat>> = basis
            .canonical_rows()
            .iter()
            .map(|r| r.as_slice().to_vec())
            .collect();
        if !self.visited.insert(signature) {
            return Ok(None);
        }
        if self.vectors.len() >= self.max_k {
            return Ok(None);
        }
        let b = basis.column_matrix();
        let extremals = extremal_strategies_with_guard(self.u, &b, self.guard)?;
        for pure in &extremals {
            let local = pure.to_local(self.u);
            for a in self.u.label_ids() {
                let delta = transition_matrix(self.u, &local, a);
                for i in 0..self.vectors.len() {
                    let child = delta.mul_vec(&self.vectors[i]);
                    if basis.contains(&child) {
                        // In-span children cannot separate: the difference
                        // vector is orthogonal to the whole current span.
                        continue;
                    }
                    if !self.diff.dot(&child).is_zero() {
                        return Ok(Some(self.accept(i, a, pure)));
                    }
                    let mut grown = basis.clone();
                    grown.insert(child.clone(), None);
                    self.vectors.push(child);
                    self.steps.push((i, a, pure.clone()));
                    let found = self.dfs(&grown)?;
                    self.vectors.pop();
                    self.steps.pop();
                    if found.is_some() {
                        return Ok(found);
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Exhaustively searches for an accepted certificate with at most `max_k`
/// chain vectors, using the same deduplicated extremal enumeration as the
/// space construction. Returns the first certificate found in deterministic
/// order, or `None` when every candidate is rejected. Intended for desk-scale
/// models; `guard` bounds both the number of explored chains and each
/// extremal enumeration.
pub fn search_certificate(
    u: &Mdp,
    mu_d: &SubDist,
    mu_e: &SubDist,
    max_k: usize,
    guard: u64,
) -> Result<Option<Certificate>> {
    let n = u.n_states();
    if mu_d.dim() != n || mu_e.dim() != n {
        return Err(Error::Precondition(
            "certificate search distributions must match the model dimension".into(),
        ));
    }
    if max_k == 0 {
        return Ok(None);
    }
    let diff = mu_d.to_vector().sub(&mu_e.to_vector());
    let ones = RatVector::ones(n);
    if !diff.dot(&ones).is_zero() {
        return Ok(Some(Certificate {
            k: 1,
            back_refs: Vec::new(),
            labels: Vec::new(),
            strategies: Vec::new(),
        }));
    }
    let mut basis: Basis = Basis::new(n);
    basis.insert(ones.clone(), None);
    let mut search = CertSearch {
        u,
        diff,
        max_k: max_k.min(n),
        guard,
        nodes: 0,
        visited: BTreeSet::new(),
        vectors: vec![ones],
        steps: Vec::new(),
    };
    search.dfs(&basis)
}
