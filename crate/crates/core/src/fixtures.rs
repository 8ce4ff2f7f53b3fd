//! Small reference models used across tests, docs, and gadget construction.

use crate::linalg::rat;
use crate::model::{LabelId, Mdp, Move, StateId, SubDist};

/// Three-state chain over {a, b, c, d}: the start state emits `a` or `b`
/// (probability 1/4 each) and stays, or commits with probability 1/4 each to
/// a `c`-loop or a `d`-loop. Word probabilities are 1/4ⁿ on (a|b)ⁿ and
/// 1/4ⁿ⁺¹ on (a|b)ⁿ followed by a run of `c`s or of `d`s, zero otherwise.
pub fn noisy_commit_mc() -> Mdp {
    let (a, b, c, d) = (LabelId(0), LabelId(1), LabelId(2), LabelId(3));
    let (start, cloop, dloop) = (StateId(0), StateId(1), StateId(2));
    Mdp::new(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec!["start".into(), "cloop".into(), "dloop".into()],
        SubDist::dirac(3, start),
        vec![
            vec![Move::from_entries(vec![
                (a, start, rat(1, 4)),
                (b, start, rat(1, 4)),
                (c, cloop, rat(1, 4)),
                (d, dloop, rat(1, 4)),
            ])],
            vec![Move::dirac(c, cloop)],
            vec![Move::dirac(d, dloop)],
        ],
    )
    .expect("reference chain is valid")
}

/// Two-state MDP over {a, b, c, d}: the start state has a single move that
/// emits `a`/`b` and stays or emits `c`/`d` and enters the commit state
/// (probability 1/4 each); the commit state freely chooses between a pure
/// `c`-move and a pure `d`-move, both self-loops.
///
/// Under memoryless strategies it cannot reproduce [`noisy_commit_mc`] (the
/// commit state must keep emitting whichever letter brought it there), but a
/// two-memory strategy that remembers the last emitted label can.
pub fn noisy_choice_mdp() -> Mdp {
    let (a, b, c, d) = (LabelId(0), LabelId(1), LabelId(2), LabelId(3));
    let (start, commit) = (StateId(0), StateId(1));
    Mdp::new(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec!["start".into(), "commit".into()],
        SubDist::dirac(2, start),
        vec![
            vec![Move::from_entries(vec![
                (a, start, rat(1, 4)),
                (b, start, rat(1, 4)),
                (c, commit, rat(1, 4)),
                (d, commit, rat(1, 4)),
            ])],
            vec![Move::dirac(c, commit), Move::dirac(d, commit)],
        ],
    )
    .expect("reference MDP is valid")
}

/// The two-memory "repeat the last label" strategy for [`noisy_choice_mdp`]:
/// memory tracks whether the last emitted label was `c` or `d`, and the
/// commit state replays it. With this strategy the MDP's trace function
/// equals the reference chain's.
pub fn last_label_strategy(m: &Mdp) -> crate::semantics::FiniteMemoryStrategy {
    use crate::linalg::Rat;
    use num::{One, Zero};

    let c = m.label_index("c").expect("label c");
    let d = m.label_index("d").expect("label d");
    let n = m.n_states();
    // Memory 0: last label was c (also the initial memory); memory 1: d.
    let mut update = vec![vec![vec![0usize; n]; m.n_labels()]; 2];
    for mem in 0..2 {
        for lab in m.label_ids() {
            let next = if lab == c {
                0
            } else if lab == d {
                1
            } else {
                mem
            };
            update[mem][lab.0] = vec![next; n];
        }
    }
    let output = (0..2)
        .map(|mem| {
            let wanted = if mem == 0 { c } else { d };
            m.state_ids()
                .map(|q| {
                    let moves = m.moves(q);
                    if moves.len() == 1 {
                        return vec![Rat::one()];
                    }
                    let pick = moves
                        .iter()
                        .position(|mv| mv.entries().iter().all(|(lab, _, _)| *lab == wanted))
                        .expect("commit state has a pure move per exit label");
                    let mut w = vec![Rat::zero(); moves.len()];
                    w[pick] = Rat::one();
                    w
                })
                .collect()
        })
        .collect();
    crate::semantics::FiniteMemoryStrategy {
        memories: vec!["after-c".into(), "after-d".into()],
        initial: 0,
        update,
        output,
    }
}
