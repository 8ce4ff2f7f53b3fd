//! Acceptance suite: one test per shipped guarantee, each printing a single
//! summary line on success. Run with
//! `cargo test -p tracelab-core --test acceptance -- --nocapture`
//! to see the per-criterion lines alongside the harness verdicts; the test
//! names carry the criterion numbers so the default output reads the same way.
//!
//! Randomised criteria use fixed seeds so every run checks the same instances.

use num::{BigInt, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracelab_core::bisim::{
    bisim_space_mdp_mc, bisim_space_two_mdps, bisimilar, is_extremal, move_point,
    search_certificate, verify_certificate,
};
use tracelab_core::fixtures;
use tracelab_core::gadgets::{
    gadget_nmf, gadget_pa_universality, gadget_qss, gadget_subset_sum, nmf_factor_strategy,
    pa_dis, ProbabilisticAutomaton,
};
use tracelab_core::linalg::{Rat, RatMatrix, RatVector};
use tracelab_core::mc_equiv::{mc_equiv, mc_equiv_detailed, EquivVerdict};
use tracelab_core::model::{disjoint_union, LabelId, Mdp, Move, StateId, SubDist};
use tracelab_core::oracle::{oracle_refines_mc, OracleVerdict};
use tracelab_core::refinement::refines_mc;
use tracelab_core::restricted::{
    check_assignment, emit_etr, known_assignment, refine_mc_mdp_pm_with_guard,
    refine_pm_pm_with_guard,
};
use tracelab_core::semantics::{
    flatten, induced_mc, sub_dis, sub_dis_by_paths, succ, trace_prob, LocalStrategy, PureStrategy,
};
use tracelab_core::smtlib::validate_script;

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn rat_pow(base: &Rat, n: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..n {
        out = &out * base;
    }
    out
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn report(criterion: usize, detail: &str) {
    println!("criterion {criterion:02}: pass ({detail})");
}

/// All words of exactly `len` letters over an alphabet of `n_letters`,
/// enumerated most-significant-letter first.
fn words_of(n_letters: usize, len: usize) -> Vec<Vec<usize>> {
    let total = (n_letters as u64).pow(len as u32);
    (0..total)
        .map(|mut idx| {
            let mut w = vec![0usize; len];
            for slot in (0..len).rev() {
                w[slot] = (idx % n_letters as u64) as usize;
                idx /= n_letters as u64;
            }
            w
        })
        .collect()
}

fn to_label_ids(w: &[usize]) -> Vec<LabelId> {
    w.iter().map(|&a| LabelId(a)).collect()
}

/// A random distribution over `k` slots with small positive weights.
fn rand_dist(rng: &mut ChaCha8Rng, k: usize) -> Vec<Rat> {
    let weights: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
    let total: u32 = weights.iter().sum();
    weights.iter().map(|&w| rat(w as i64, total as i64)).collect()
}

fn rand_move(rng: &mut ChaCha8Rng, n_labels: usize, n_states: usize) -> Move {
    let mut grid: Vec<(usize, usize)> = (0..n_labels)
        .flat_map(|a| (0..n_states).map(move |q| (a, q)))
        .collect();
    grid.shuffle(rng);
    let size = rng.gen_range(1..=3.min(grid.len()));
    let weights = rand_dist(rng, size);
    Move::from_entries(
        grid[..size]
            .iter()
            .zip(weights)
            .map(|(&(a, q), w)| (LabelId(a), StateId(q), w))
            .collect(),
    )
}

/// A random MDP with `n_labels` labels drawn from {a, b, c}, at most
/// `max_states` states and at most `max_moves` moves per state.
fn rand_mdp(rng: &mut ChaCha8Rng, max_states: usize, n_labels: usize, max_moves: usize) -> Mdp {
    let n = rng.gen_range(1..=max_states);
    let labels: Vec<String> = ["a", "b", "c"][..n_labels]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let initial = if rng.gen_bool(0.5) {
        SubDist::dirac(n, StateId(0))
    } else {
        SubDist::from_weights(rand_dist(rng, n))
    };
    let moves: Vec<Vec<Move>> = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=max_moves);
            (0..k).map(|_| rand_move(rng, n_labels, n)).collect()
        })
        .collect();
    Mdp::new(labels, states, initial, moves).expect("random model is structurally valid")
}

fn rand_mc(rng: &mut ChaCha8Rng, max_states: usize, n_labels: usize) -> Mdp {
    rand_mdp(rng, max_states, n_labels, 1)
}

fn rand_local(rng: &mut ChaCha8Rng, m: &Mdp) -> LocalStrategy {
    let rows: Vec<Vec<Rat>> = m
        .state_ids()
        .map(|q| rand_dist(rng, m.moves(q).len()))
        .collect();
    LocalStrategy::from_weights(m, rows).expect("random rows are distributions")
}

/// Every pure strategy of `m`, enumerated odometer-style.
fn all_pure_strategies(m: &Mdp) -> Vec<PureStrategy> {
    let counts: Vec<usize> = m.state_ids().map(|q| m.moves(q).len()).collect();
    let mut current = vec![0usize; counts.len()];
    let mut out = vec![PureStrategy(current.clone())];
    'outer: loop {
        for i in (0..counts.len()).rev() {
            current[i] += 1;
            if current[i] < counts[i] {
                out.push(PureStrategy(current.clone()));
                continue 'outer;
            }
            current[i] = 0;
        }
        return out;
    }
}

/// The 200-instance set shared by the refinement/bisimilarity criteria: a mix
/// of independent (MDP, MC) draws and constructions guaranteed to refine
/// (duplicated moves plus an optional unreachable decoration state).
fn refinement_instance_set() -> Vec<(Mdp, Mdp)> {
    let mut rng = rng(0xACCE_0003);
    let mut out = Vec::with_capacity(200);
    for i in 0..200 {
        let n_labels = rng.gen_range(1..=3);
        if i % 3 == 0 {
            let c = rand_mc(&mut rng, 4, n_labels);
            let n = c.n_states();
            let mut states: Vec<String> = c.states().to_vec();
            let mut weights: Vec<Rat> =
                c.state_ids().map(|q| c.initial().get(q).clone()).collect();
            let decorate = n < 4 && rng.gen_bool(0.5);
            if decorate {
                states.push("spare".into());
                weights.push(Rat::zero());
            }
            let total = states.len();
            let mut moves: Vec<Vec<Move>> = c
                .state_ids()
                .map(|q| {
                    let copies = rng.gen_range(2..=3);
                    vec![c.moves(q)[0].clone(); copies]
                })
                .collect();
            if decorate {
                let k = rng.gen_range(1..=3);
                moves.push((0..k).map(|_| rand_move(&mut rng, n_labels, total)).collect());
            }
            let d = Mdp::new(
                c.labels().to_vec(),
                states,
                SubDist::from_weights(weights),
                moves,
            )
            .expect("duplicated model is structurally valid");
            out.push((d, c));
        } else {
            let d = rand_mdp(&mut rng, 4, n_labels, 3);
            let c = rand_mc(&mut rng, 4, n_labels);
            out.push((d, c));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// criterion 1: the commit chain's trace table in closed form
// ---------------------------------------------------------------------------

/// Expected trace probability of the four-letter commit chain: words in
/// (a+b)ⁿ get 1/4ⁿ, words in (a+b)ⁿc⁺ or (a+b)ⁿd⁺ get 1/4ⁿ⁺¹, all else 0.
fn expected_commit_prob(w: &[usize]) -> Rat {
    let quarter = rat(1, 4);
    let n = w.iter().take_while(|&&x| x <= 1).count();
    let rest = &w[n..];
    if rest.is_empty() {
        return rat_pow(&quarter, n);
    }
    let first = rest[0];
    if (first == 2 || first == 3) && rest.iter().all(|&x| x == first) {
        rat_pow(&quarter, n + 1)
    } else {
        Rat::zero()
    }
}

#[test]
fn criterion_01_commit_chain_trace_table() {
    let c = fixtures::noisy_commit_mc();
    let alpha = LocalStrategy::uniform(&c);
    let mut checked = 0usize;
    for len in 0..=6 {
        for w in words_of(4, len) {
            let got = trace_prob(&c, &alpha, &to_label_ids(&w));
            let want = expected_commit_prob(&w);
            assert_eq!(
                got, want,
                "criterion 01: trace probability of word {w:?} is {got}, expected {want}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 5461);
    report(1, "5461 words up to length 6, all exact");
}

// ---------------------------------------------------------------------------
// criterion 2: the two-memory last-label strategy reproduces the chain
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_last_label_flattening_matches_the_chain() {
    let d = fixtures::noisy_choice_mdp();
    let c = fixtures::noisy_commit_mc();
    assert_eq!(d.labels(), c.labels());
    let sched = fixtures::last_label_strategy(&d);
    let table = flatten(&d, &sched, 8).expect("flattening the two-memory strategy");
    let unif_c = LocalStrategy::uniform(&c);

    // Walk the word tree carrying both subdistributions; once both are zero
    // every extension stays zero on both sides, so the subtree is settled.
    let mut live = 0usize;
    let mut stack = vec![(Vec::<LabelId>::new(), d.initial().clone(), c.initial().clone())];
    while let Some((w, vd, vc)) = stack.pop() {
        assert_eq!(
            vd.norm(),
            vc.norm(),
            "criterion 02: trace probabilities differ on word {w:?}"
        );
        live += 1;
        if w.len() == 8 || (vd.norm().is_zero() && vc.norm().is_zero()) {
            continue;
        }
        let rows: Vec<Vec<Rat>> = d.state_ids().map(|q| table.entry(&d, &w, q)).collect();
        let alpha = LocalStrategy::from_weights(&d, rows).expect("table rows are distributions");
        for a in d.label_ids() {
            let mut w2 = w.clone();
            w2.push(a);
            stack.push((w2, succ(&vd, &d, &alpha, a), succ(&vc, &c, &unif_c, a)));
        }
    }

    // Spot-check the word-tree walk against the standalone evaluator.
    for w in [
        vec![0, 1, 0, 1],
        vec![0, 0, 2, 2, 2],
        vec![1, 3, 3],
        vec![2, 0],
        vec![3, 3, 3, 3, 3, 3, 3, 3],
    ] {
        let ids = to_label_ids(&w);
        assert_eq!(trace_prob(&d, &table, &ids), trace_prob(&c, &unif_c, &ids));
    }
    report(
        2,
        &format!("all words up to length 8 agree; {live} live prefixes visited"),
    );
}

// ---------------------------------------------------------------------------
// criterion 3: the refinement decision agrees with the bounded trace oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_refinement_decision_agrees_with_bounded_oracle() {
    let instances = refinement_instance_set();
    let (mut holds, mut fails) = (0usize, 0usize);
    for (idx, (d, c)) in instances.iter().enumerate() {
        let verdict = refines_mc(d, c).expect("refinement decision");
        if verdict.holds() {
            holds += 1;
            match oracle_refines_mc(d, c, 6).expect("oracle scan") {
                OracleVerdict::NoCounterexampleUpTo { depth } => assert_eq!(depth, 6),
                OracleVerdict::Counterexample { word, .. } => panic!(
                    "criterion 03: instance {idx} refines, yet the oracle refutes it on {word:?}"
                ),
            }
        } else {
            fails += 1;
            let bound = d.n_states() + c.n_states();
            match oracle_refines_mc(d, c, bound).expect("oracle scan") {
                OracleVerdict::Counterexample { word, .. } => assert!(word.len() <= bound),
                OracleVerdict::NoCounterexampleUpTo { .. } => panic!(
                    "criterion 03: instance {idx} fails refinement, but the oracle finds no \
                     counterexample up to depth {bound}"
                ),
            }
        }
    }
    report(
        3,
        &format!("200 instances, {holds} refine / {fails} refuted, zero disagreements"),
    );
}

// ---------------------------------------------------------------------------
// criterion 4: refinement coincides with distribution bisimilarity
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_refinement_equals_distribution_bisimilarity() {
    let instances = refinement_instance_set();
    let mut agreements = 0usize;
    for (d, c) in &instances {
        let refined = refines_mc(d, c).expect("refinement decision").holds();
        let space = bisim_space_mdp_mc(d, c).expect("bisimulation space");
        let union = disjoint_union(d, c);
        let mu_d = union.embed_left(d.initial());
        let mu_c = union.embed_right(c.initial());
        let bisim = bisimilar(&space, &mu_d, &mu_c).expect("bisimilarity test");
        assert_eq!(
            refined, bisim,
            "criterion 04: refinement and bisimilarity disagree on a {}-state / {}-state pair",
            d.n_states(),
            c.n_states()
        );
        agreements += 1;
    }
    report(4, &format!("{agreements} instances, verdicts identical"));
}

// ---------------------------------------------------------------------------
// criterion 5: certificate search accepts exactly the non-bisimilar pairs
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_certificate_search_matches_space_test() {
    let mut rng = rng(0xACCE_0005);
    let (mut separated, mut bisimilar_pairs) = (0usize, 0usize);
    for i in 0..50 {
        let n_labels = rng.gen_range(1..=2);
        let d = rand_mdp(&mut rng, 2, n_labels, 3);
        let e = match i % 5 {
            0 => d.clone(),
            1 => {
                let moves: Vec<Vec<Move>> = d
                    .state_ids()
                    .map(|q| {
                        let mut ms = d.moves(q).to_vec();
                        ms.extend(d.moves(q).to_vec());
                        ms
                    })
                    .collect();
                Mdp::new(
                    d.labels().to_vec(),
                    d.states().to_vec(),
                    d.initial().clone(),
                    moves,
                )
                .expect("doubled model is structurally valid")
            }
            _ => rand_mdp(&mut rng, 2, n_labels, 3),
        };
        let union = disjoint_union(&d, &e);
        let mu_d = union.embed_left(d.initial());
        let mu_e = union.embed_right(e.initial());
        let space = bisim_space_two_mdps(&union.model).expect("bisimulation space");
        let related = bisimilar(&space, &mu_d, &mu_e).expect("bisimilarity test");
        let found = search_certificate(&union.model, &mu_d, &mu_e, union.model.n_states(), 500_000)
            .expect("certificate search");
        assert_eq!(
            found.is_some(),
            !related,
            "criterion 05: certificate search and space test disagree on pair {i}"
        );
        match found {
            Some(cert) => {
                separated += 1;
                let verdict = verify_certificate(&union.model, &mu_d, &mu_e, &cert)
                    .expect("verifying a searched certificate");
                assert!(
                    verdict.accepted(),
                    "criterion 05: searched certificate for pair {i} fails verification"
                );
            }
            None => bisimilar_pairs += 1,
        }
    }
    report(
        5,
        &format!("50 pairs, {separated} certified apart / {bisimilar_pairs} bisimilar, zero disagreements"),
    );
}

// ---------------------------------------------------------------------------
// criterion 6: extremality transfers to widened direction spaces
// ---------------------------------------------------------------------------

fn rand_direction_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RatMatrix {
    let mut b = RatMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            b.set(i, j, rat(rng.gen_range(-32..=32), rng.gen_range(1..=16)));
        }
    }
    b
}

/// Re-checks an extremality witness by hand: every move whose point differs
/// from the chosen one must score strictly below it, under the returned
/// direction and under its positive rescalings.
fn check_witness_direction(m: &Mdp, b: &RatMatrix, pure: &PureStrategy, v: &RatVector) {
    for q in m.state_ids() {
        let chosen = move_point(m, b, &m.moves(q)[pure.chosen(q)]);
        for mv in m.moves(q) {
            let pt = move_point(m, b, mv);
            if pt == chosen {
                continue;
            }
            let gap = pt.sub(&chosen);
            for lambda in [rat(1, 1), rat(2, 1), rat(5, 1)] {
                let score = gap.dot(&v.scale(&lambda));
                assert!(
                    score < Rat::zero(),
                    "criterion 06: witness direction scaled by {lambda} fails to separate"
                );
            }
        }
    }
}

#[test]
fn criterion_06_extremality_transfers_to_widened_directions() {
    let mut rng = rng(0xACCE_0006);
    let mut transfers = 0usize;
    for _ in 0..100 {
        let n_labels = rng.gen_range(1..=2);
        let m = rand_mdp(&mut rng, 3, n_labels, 3);
        let n = m.n_states();
        let k1 = rng.gen_range(1..=2);
        let extra = rng.gen_range(1..=2);
        let b1 = rand_direction_matrix(&mut rng, n, k1);
        let widening = rand_direction_matrix(&mut rng, n, extra);
        let mut b2 = RatMatrix::zeros(n, k1 + extra);
        for i in 0..n {
            for j in 0..k1 {
                b2.set(i, j, b1.get(i, j).clone());
            }
            for j in 0..extra {
                b2.set(i, k1 + j, widening.get(i, j).clone());
            }
        }
        for pure in all_pure_strategies(&m) {
            let Some(v1) = is_extremal(&m, &b1, &pure).expect("extremality test") else {
                continue;
            };
            check_witness_direction(&m, &b1, &pure, &v1);
            let v2 = is_extremal(&m, &b2, &pure)
                .expect("extremality test")
                .unwrap_or_else(|| {
                    panic!(
                        "criterion 06: a strategy extremal for {k1} directions loses extremality \
                         when the direction space widens to {}",
                        k1 + extra
                    )
                });
            check_witness_direction(&m, &b2, &pure, &v2);
            transfers += 1;
        }
    }
    assert!(transfers >= 100, "criterion 06: only {transfers} transfers exercised");
    report(
        6,
        &format!("100 triples, {transfers} extremal strategies transferred, all witnesses scale"),
    );
}

// ---------------------------------------------------------------------------
// criterion 7: subset-sum gadget against direct enumeration
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_subset_sum_gadget_end_to_end() {
    let mut rng = rng(0xACCE_0007);
    let (mut yes, mut no) = (0usize, 0usize);
    for _ in 0..100 {
        let n = rng.gen_range(1..=10);
        let values: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=50)).collect();
        let total: u64 = values.iter().sum();
        let target = if rng.gen_bool(0.6) {
            values
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .sum::<u64>()
        } else {
            rng.gen_range(0..=total)
        };
        let direct = (0..1u32 << n).any(|mask| {
            let sum: u64 = values
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .sum();
            sum == target
        });
        let g = gadget_subset_sum(&values, target).expect("subset-sum gadget");
        let verdict = refine_mc_mdp_pm_with_guard(&g.left, &g.right, 1 << 20)
            .expect("pure-memoryless refinement");
        assert_eq!(
            verdict.holds(),
            direct,
            "criterion 07: gadget and enumeration disagree on values {values:?}, target {target}"
        );
        if direct {
            yes += 1;
        } else {
            no += 1;
        }
    }
    report(7, &format!("100 instances, {yes} solvable / {no} not, 100% agreement"));
}

// ---------------------------------------------------------------------------
// criterion 8: one-round quantified subset-sum against the game table
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_qss_gadget_end_to_end() {
    let mut rng = rng(0xACCE_0008);
    let (mut yes, mut no) = (0usize, 0usize);
    for i in 0..25 {
        let (s, t, target) = if i % 3 == 0 {
            // Guaranteed answerable: {1,2,4,8} realizes every sum in 0..=15,
            // so any residual target - sum(S) within that range has a reply.
            let s_len = rng.gen_range(1..=4);
            let s: Vec<u64> = (0..s_len).map(|_| rng.gen_range(1..=3)).collect();
            let p: u64 = s.iter().sum();
            let target = rng.gen_range(p..=15);
            (s, vec![1, 2, 4, 8], target)
        } else {
            let (s_len, t_len) = if i < 20 {
                (rng.gen_range(1..=4), rng.gen_range(1..=4))
            } else {
                (rng.gen_range(5..=6), rng.gen_range(5..=6))
            };
            let s: Vec<u64> = (0..s_len).map(|_| rng.gen_range(1..=9)).collect();
            let t: Vec<u64> = (0..t_len).map(|_| rng.gen_range(1..=9)).collect();
            let target = if rng.gen_bool(0.6) {
                s.iter().filter(|_| rng.gen_bool(0.5)).sum::<u64>()
                    + t.iter().filter(|_| rng.gen_bool(0.5)).sum::<u64>()
            } else {
                rng.gen_range(0..=s.iter().sum::<u64>() + t.iter().sum::<u64>())
            };
            (s, t, target)
        };
        let (s_len, t_len) = (s.len(), t.len());
        let direct = (0..1u32 << s_len).all(|smask| {
            let s_sum: u64 = s
                .iter()
                .enumerate()
                .filter(|(k, _)| smask >> k & 1 == 1)
                .map(|(_, &v)| v)
                .sum();
            (0..1u32 << t_len).any(|tmask| {
                let t_sum: u64 = t
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| tmask >> k & 1 == 1)
                    .map(|(_, &v)| v)
                    .sum();
                s_sum + t_sum == target
            })
        });
        let g = gadget_qss(&s, &t, target).expect("quantified subset-sum gadget");
        let verdict = refine_pm_pm_with_guard(&g.left, &g.right, 1 << 20)
            .expect("pure-memoryless refinement");
        assert_eq!(
            verdict.holds(),
            direct,
            "criterion 08: gadget and game table disagree on s {s:?}, t {t:?}, target {target}"
        );
        if direct {
            yes += 1;
        } else {
            no += 1;
        }
    }
    report(8, &format!("25 instances, {yes} universally answerable / {no} not, 100% agreement"));
}

// ---------------------------------------------------------------------------
// criterion 9: factorizations turn the NMF gadget into an equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_nmf_gadget_positive_direction() {
    let mut rng = rng(0xACCE_0009);
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=2);
        let mut a = RatMatrix::zeros(n, r);
        for i in 0..n {
            for (k, w) in rand_dist(&mut rng, r).into_iter().enumerate() {
                a.set(i, k, w);
            }
        }
        let mut w = RatMatrix::zeros(r, m);
        for k in 0..r {
            for (j, x) in rand_dist(&mut rng, m).into_iter().enumerate() {
                w.set(k, j, x);
            }
        }
        let product = a.mul(&w);
        let g = gadget_nmf(&product, r).expect("factorization gadget");
        let alpha = nmf_factor_strategy(&g.right, &a, &w).expect("factor strategy");
        let induced = induced_mc(&g.right, &alpha).expect("inducing the factored chain");
        let verdict = mc_equiv(&g.left, &induced).expect("chain equivalence");
        assert!(
            matches!(verdict, EquivVerdict::Equivalent),
            "criterion 09: a known {n}x{m} rank-{r} factorization fails to reproduce the chain"
        );
    }
    report(9, "20 stochastic products, every factor strategy reproduces the chain");
}

// ---------------------------------------------------------------------------
// criterion 10: the automaton-simulation invariant of the universality gadget
// ---------------------------------------------------------------------------

fn rand_pa(rng: &mut ChaCha8Rng) -> ProbabilisticAutomaton {
    let n = rng.gen_range(1..=3);
    let states: Vec<String> = (0..n).map(|i| format!("z{i}")).collect();
    let delta = (0..2)
        .map(|_| {
            let mut mat = RatMatrix::zeros(n, n);
            for i in 0..n {
                for (j, w) in rand_dist(rng, n).into_iter().enumerate() {
                    mat.set(i, j, w);
                }
            }
            mat
        })
        .collect();
    ProbabilisticAutomaton {
        letters: vec!["a".into(), "b".into()],
        states,
        initial: rand_dist(rng, n),
        accepting: (0..n).map(|_| rng.gen_bool(0.5)).collect(),
        delta,
    }
}

#[test]
fn criterion_10_pa_gadget_invariant() {
    let mut rng = rng(0xACCE_0010);
    let mut checked = 0usize;
    for _ in 0..20 {
        let pa = rand_pa(&mut rng);
        let n = pa.states.len();
        let g = gadget_pa_universality(&pa).expect("universality gadget");
        for _ in 0..5 {
            let choices: Vec<usize> = g
                .right
                .state_ids()
                .map(|q| {
                    if q.0 < n && pa.accepting[q.0] {
                        rng.gen_range(0..=1)
                    } else {
                        0
                    }
                })
                .collect();
            let alpha = PureStrategy(choices).to_local(&g.right);
            for len in 0..=5 {
                for w in words_of(2, len) {
                    let reached = sub_dis(&g.right, &alpha, &to_label_ids(&w));
                    let expected = pa_dis(&pa, &w).expect("automaton forward pass");
                    let scale = rat_pow(&rat(1, 4), len);
                    for i in 0..n {
                        assert_eq!(
                            reached.get(StateId(i)),
                            &(&scale * expected.get(StateId(i))),
                            "criterion 10: simulation mass differs on word {w:?}, state {i}"
                        );
                    }
                    for i in n..g.right.n_states() {
                        assert!(
                            reached.get(StateId(i)).is_zero(),
                            "criterion 10: exit state carries mass on word {w:?}"
                        );
                    }
                    checked += 1;
                }
            }
        }
    }
    report(
        10,
        &format!("20 automata x 5 strategies, {checked} word checks, exact scaling throughout"),
    );
}

// ---------------------------------------------------------------------------
// criterion 11: constraint emission shapes and known-witness satisfaction
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_etr_emission_counts_and_witness() {
    let mut rng = rng(0xACCE_0011);
    for _ in 0..20 {
        let n_labels = rng.gen_range(1..=2);
        let d = rand_mdp(&mut rng, 3, n_labels, 3);
        let alpha = rand_local(&mut rng, &d);
        let c = induced_mc(&d, &alpha).expect("inducing the witness chain");
        let (inst, script) = emit_etr(&c, &d).expect("constraint emission");

        let n_u = c.n_states() + d.n_states();
        let sum_moves: usize = d.state_ids().map(|q| d.moves(q).len()).sum();
        let n_l = d.n_labels();
        assert_eq!(
            inst.variables.len(),
            sum_moves + n_u * n_u + n_l * n_u * n_u,
            "criterion 11: variable count deviates from the closed form"
        );
        assert_eq!(
            inst.constraints.len(),
            d.n_states() + 2 * sum_moves + 2 * n_u + n_l * n_u * n_u,
            "criterion 11: assertion count deviates from the closed form"
        );

        let assignment = known_assignment(&c, &d, &alpha).expect("witness assignment");
        assert!(
            check_assignment(&inst, &assignment).expect("witness evaluation"),
            "criterion 11: the inducing strategy fails its own constraint system"
        );

        let summary = validate_script(&script).expect("emitted script parses");
        assert!(summary.has_check_sat);
        assert_eq!(summary.logic.as_deref(), Some("QF_NRA"));
        assert_eq!(summary.declarations, inst.variables.len());
    }
    report(11, "20 instances, counts match closed forms, witnesses satisfy, scripts validate");
}

// ---------------------------------------------------------------------------
// criterion 12: matrix semantics vs path semantics, and mass conservation
// ---------------------------------------------------------------------------

#[test]
fn criterion_12_semantics_cross_implementation() {
    let mut rng = rng(0xACCE_0012);
    let mut words_checked = 0usize;
    for _ in 0..100 {
        let n_labels = rng.gen_range(1..=3);
        let m = rand_mdp(&mut rng, 4, n_labels, 3);
        let alpha = rand_local(&mut rng, &m);
        for len in 0..=4 {
            for w in words_of(n_labels, len) {
                let ids = to_label_ids(&w);
                let by_matrix = sub_dis(&m, &alpha, &ids);
                let by_paths = sub_dis_by_paths(&m, &alpha, &ids);
                assert_eq!(
                    by_matrix.to_vector(),
                    by_paths.to_vector(),
                    "criterion 12: the two evaluators disagree on word {w:?}"
                );
                words_checked += 1;
            }
        }
    }

    let mut triples = 0usize;
    for _ in 0..1000 {
        let n_labels = rng.gen_range(1..=3);
        let m = rand_mdp(&mut rng, 4, n_labels, 3);
        let alpha = rand_local(&mut rng, &m);
        let scale = rat(rng.gen_range(0..=4), 4);
        let mu = SubDist::from_weights(
            rand_dist(&mut rng, m.n_states())
                .into_iter()
                .map(|w| &w * &scale)
                .collect(),
        );
        let spread: Rat = m
            .label_ids()
            .map(|a| succ(&mu, &m, &alpha, a).norm())
            .fold(Rat::zero(), |acc, x| &acc + &x);
        assert_eq!(
            spread,
            mu.norm(),
            "criterion 12: one-step mass is not conserved"
        );
        triples += 1;
    }
    report(
        12,
        &format!("{words_checked} words cross-checked, {triples} conservation triples"),
    );
}

// ---------------------------------------------------------------------------
// criterion 13: fixpoint and closure bounds are hard limits
// ---------------------------------------------------------------------------

#[test]
fn criterion_13_fixpoint_bounds() {
    let mut rng = rng(0xACCE_0013);

    let mut spaces = 0usize;
    for _ in 0..30 {
        let n_labels = rng.gen_range(1..=3);
        let d = rand_mdp(&mut rng, 4, n_labels, 3);
        let c = rand_mc(&mut rng, 4, n_labels);
        let n_u = d.n_states() + c.n_states();
        let space = bisim_space_mdp_mc(&d, &c).expect("bisimulation space");
        assert!(
            space.stabilized_at + 1 <= n_u,
            "criterion 13: a {n_u}-state space took {} productive sweeps",
            space.stabilized_at
        );
        spaces += 1;
    }
    for _ in 0..20 {
        let n_labels = rng.gen_range(1..=2);
        let d = rand_mdp(&mut rng, 2, n_labels, 3);
        let e = rand_mdp(&mut rng, 2, n_labels, 3);
        let union = disjoint_union(&d, &e);
        let n_u = union.model.n_states();
        let space = bisim_space_two_mdps(&union.model).expect("bisimulation space");
        assert!(
            space.stabilized_at + 1 <= n_u,
            "criterion 13: a {n_u}-state space took {} productive sweeps",
            space.stabilized_at
        );
        spaces += 1;
    }
    let fixture_space =
        bisim_space_mdp_mc(&fixtures::noisy_choice_mdp(), &fixtures::noisy_commit_mc())
            .expect("fixture space");
    assert!(fixture_space.stabilized_at + 1 <= 10);
    spaces += 1;

    let mut closures = 0usize;
    for i in 0..100 {
        let n_labels = rng.gen_range(1..=3);
        let c1 = rand_mc(&mut rng, 4, n_labels);
        let c2 = if i % 4 == 0 { c1.clone() } else { rand_mc(&mut rng, 4, n_labels) };
        let outcome = mc_equiv_detailed(&c1, &c2).expect("chain equivalence");
        assert!(
            outcome.insertions <= c1.n_states() + c2.n_states(),
            "criterion 13: closure inserted {} vectors for a {}+{}-state pair",
            outcome.insertions,
            c1.n_states(),
            c2.n_states()
        );
        closures += 1;
    }
    report(
        13,
        &format!("{spaces} spaces within the sweep bound, {closures} closures within the insertion bound"),
    );
}
