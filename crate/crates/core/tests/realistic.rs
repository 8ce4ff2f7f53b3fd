//! Scenario tests driving the library the way a user would: documents in,
//! verdicts out, certificates re-verified, gadget witnesses replayed.

use tracelab_core::bisim::{
    bisim_space_mdp_mc, bisimilar, search_certificate, verify_certificate, CertificateVerdict,
};
use tracelab_core::fixtures::{last_label_strategy, noisy_choice_mdp, noisy_commit_mc};
use tracelab_core::gadgets::gadget_subset_sum;
use tracelab_core::io::{parse_certificate, parse_model, serialize_certificate, serialize_model};
use tracelab_core::linalg::parse_rat;
use tracelab_core::mc_equiv::{mc_equiv, EquivVerdict};
use tracelab_core::model::{disjoint_union, LabelId};
use tracelab_core::refinement::{refines_mc, RefinesVerdict};
use tracelab_core::restricted::{
    check_assignment, emit_etr, known_assignment, refine_mc_mdp_pm, PmVerdict,
};
use tracelab_core::semantics::{
    induced_mc, sub_dis_finite_memory, trace_prob, LocalStrategy, MemorylessStrategy,
};

#[test]
fn model_documents_round_trip() {
    for m in [noisy_commit_mc(), noisy_choice_mdp()] {
        let text = serialize_model(&m);
        let back = parse_model(&text).expect("own serialization parses");
        assert!(m.same_structure(&back));
        assert_eq!(serialize_model(&back), text, "serialization is a fixpoint");
    }
}

#[test]
fn memory_recovers_what_memoryless_scheduling_loses() {
    let d = noisy_choice_mdp();
    let c = noisy_commit_mc();

    // Unrestricted refinement fails, and the witness really separates.
    let witness = match refines_mc(&d, &c).unwrap() {
        RefinesVerdict::Fails(w) => w,
        RefinesVerdict::Refines => panic!("the choice MDP must not refine the chain"),
    };
    assert_ne!(witness.mdp_prob, witness.mc_prob);
    assert_eq!(witness.strategies.len(), witness.word.len());

    // Yet remembering the last label reproduces the chain exactly.
    let sigma = last_label_strategy(&d);
    let alpha = LocalStrategy::uniform(&c);
    // Every word over the shared labels up to length 4.
    let mut words: Vec<Vec<LabelId>> = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &frontier {
            for a in 0..c.n_labels() {
                let mut w2 = w.clone();
                w2.push(LabelId(a));
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    for w in &words {
        let via_memory = sub_dis_finite_memory(&d, &sigma, w).unwrap().norm();
        assert_eq!(via_memory, trace_prob(&c, &alpha, w), "word {w:?}");
    }
}

#[test]
fn certificates_survive_the_wire_and_reject_tampering() {
    let d = noisy_choice_mdp();
    let c = noisy_commit_mc();
    let union = disjoint_union(&d, &c);
    let mu_d = union.embed_left(d.initial());
    let mu_c = union.embed_right(c.initial());

    let space = bisim_space_mdp_mc(&d, &c).unwrap();
    assert!(!bisimilar(&space, &mu_d, &mu_c).unwrap());

    let cert = search_certificate(&union.model, &mu_d, &mu_c, union.model.n_states(), 100_000)
        .unwrap()
        .expect("non-bisimilar pair has a certificate");
    let text = serialize_certificate(&cert, &union.model);
    let parsed = parse_certificate(&text, &union.model).unwrap();
    match verify_certificate(&union.model, &mu_d, &mu_c, &parsed).unwrap() {
        CertificateVerdict::Accept { lhs, rhs } => assert_ne!(lhs, rhs),
        CertificateVerdict::Reject { reason } => panic!("own certificate rejected: {reason}"),
    }

    // Swapping the sides must not verify: the separation is directional only
    // in its values, so the verdict may still accept, but tampering with the
    // label chain must be caught.
    if let Some(first) = parsed.labels.first().copied() {
        let mut tampered = parsed.clone();
        let other = (0..union.model.n_labels())
            .map(LabelId)
            .find(|a| *a != first)
            .expect("the union has several labels");
        tampered.labels[0] = other;
        let verdict = verify_certificate(&union.model, &mu_d, &mu_c, &tampered);
        let caught = match verdict {
            Ok(CertificateVerdict::Reject { .. }) => true,
            Ok(CertificateVerdict::Accept { lhs, rhs }) => lhs != rhs,
            Err(_) => true,
        };
        assert!(caught, "tampered certificate neither rejected nor separating");
    }
}

#[test]
fn subset_sum_witness_replays_as_a_chain() {
    // 12 = 5 + 7 is solvable; the witness strategy induces a chain that is
    // trace-equivalent to the demand side.
    let yes = gadget_subset_sum(&[3, 5, 7], 12).unwrap();
    match refine_mc_mdp_pm(&yes.left, &yes.right).unwrap() {
        PmVerdict::Yes { witness } => {
            let pure = witness.expect("solvable instances carry a strategy");
            let induced = induced_mc(&yes.right, &pure.to_local(&yes.right)).unwrap();
            assert_eq!(mc_equiv(&yes.left, &induced).unwrap(), EquivVerdict::Equivalent);
        }
        PmVerdict::No { .. } => panic!("12 is a subset sum of {{3, 5, 7}}"),
    }

    // 4 is not: {3, 5, 7} offers only 0, 3, 5, 7, 8, 10, 12, 15.
    let no = gadget_subset_sum(&[3, 5, 7], 4).unwrap();
    assert!(matches!(refine_mc_mdp_pm(&no.left, &no.right).unwrap(), PmVerdict::No { .. }));
}

#[test]
fn etr_assignment_matches_a_known_memoryless_witness() {
    // Make the target chain the MDP's own behaviour under a fixed strategy,
    // so that strategy is a known witness for the emitted system.
    let d = noisy_choice_mdp();
    let half = parse_rat("1/2").unwrap();
    let weights = d
        .state_ids()
        .map(|q| {
            let k = d.moves(q).len();
            if k == 1 { vec![parse_rat("1").unwrap()] } else { vec![half.clone(); k] }
        })
        .collect();
    let alpha = MemorylessStrategy::from_weights(&d, weights).unwrap();
    let c = induced_mc(&d, &alpha).unwrap();

    let (inst, script) = emit_etr(&c, &d).unwrap();
    assert!(script.contains("(set-logic QF_NRA)") && script.contains("(check-sat)"));
    let assignment = known_assignment(&c, &d, &alpha).unwrap();
    assert!(check_assignment(&inst, &assignment).unwrap());
}
