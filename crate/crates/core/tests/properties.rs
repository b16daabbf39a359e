use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use qsdc_core::capacity::analyze;
use qsdc_core::protocol::{encoded_state, measurement_pairs, outcome_distribution};
use qsdc_core::qsim::{apply_single_qubit, bell_probabilities, bell_project, make_ghz};
use qsdc_core::swap::{bell_product_expansion, reconstruct};
use qsdc_core::{
    build_decoder, scheme_file, standard_scheme, BellOutcome, EncodingScheme, EveModel, Message,
    OperatorTuple, PauliOp, Protocol, StateVector64, TrialSeed,
};

const TOL: f64 = 1e-9;

fn random_state(min_qubits: usize, max_qubits: usize) -> impl Strategy<Value = StateVector64> {
    (min_qubits..=max_qubits).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
            .prop_filter("non-zero", |v| {
                v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3
            })
            .prop_map(|v| {
                let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
                let amps = v
                    .into_iter()
                    .map(|(a, b)| Complex64::new(a / norm, b / norm))
                    .collect();
                StateVector64::from_amplitudes(amps).unwrap()
            })
    })
}

fn pauli() -> impl Strategy<Value = PauliOp> {
    prop::sample::select(PauliOp::ALL.to_vec())
}

fn distinct_pair(n: usize) -> impl Strategy<Value = (usize, usize)> {
    (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n))
}

fn random_ops(parties: usize) -> impl Strategy<Value = OperatorTuple> {
    (pauli(), prop::collection::vec(any::<bool>(), parties - 1)).prop_map(|(leader, flips)| {
        let followers = flips
            .into_iter()
            .map(|f| if f { PauliOp::X } else { PauliOp::I })
            .collect();
        OperatorTuple::new(leader, followers).unwrap()
    })
}

fn random_scheme() -> impl Strategy<Value = EncodingScheme> {
    (2usize..=6).prop_flat_map(|parties| {
        (
            Just(PauliOp::ALL.to_vec()).prop_shuffle(),
            prop::collection::vec(any::<bool>(), parties - 1),
        )
            .prop_map(move |(leader, swaps)| {
                let followers = swaps
                    .into_iter()
                    .map(|s| {
                        if s {
                            [PauliOp::X, PauliOp::I]
                        } else {
                            [PauliOp::I, PauliOp::X]
                        }
                    })
                    .collect();
                EncodingScheme::new(
                    parties,
                    [leader[0], leader[1], leader[2], leader[3]],
                    followers,
                )
                .unwrap()
            })
    })
}

fn large_protocol(parties: usize) -> &'static Protocol {
    static CACHE: [OnceLock<Protocol>; 2] = [OnceLock::new(), OnceLock::new()];
    CACHE[parties - 5].get_or_init(|| Protocol::new(standard_scheme(parties).unwrap()).unwrap())
}

/// Random perfect pairing of `n` qubits (n even).
fn random_pairing(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|q| q.chunks(2).map(|c| (c[0], c[1])).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paulis_preserve_norm(state in random_state(1, 6), op in pauli(), q in 0usize..6) {
        let q = q % state.num_qubits();
        let out = apply_single_qubit(&state, q, op).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn paulis_square_to_identity_up_to_phase(state in random_state(1, 6), op in pauli(), q in 0usize..6) {
        let q = q % state.num_qubits();
        let twice = apply_single_qubit(&apply_single_qubit(&state, q, op).unwrap(), q, op).unwrap();
        prop_assert!(twice.approx_eq_up_to_phase(&state));
    }

    #[test]
    fn bell_probabilities_are_complete(
        (state, (qa, qb)) in random_state(2, 7).prop_flat_map(|s| {
            let n = s.num_qubits();
            (Just(s), distinct_pair(n))
        })
    ) {
        let probs = bell_probabilities(&state, qa, qb).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < TOL);
        for (b, p) in BellOutcome::ALL.iter().zip(probs) {
            let proj = bell_project(&state, qa, qb, *b).unwrap();
            prop_assert!((proj.probability - p).abs() < TOL);
            if let Some(c) = proj.collapsed {
                prop_assert!((c.norm_sqr() - 1.0).abs() < TOL);
            }
        }
    }

    #[test]
    fn disjoint_measurements_commute(state in random_state(4, 6), seed in any::<u64>()) {
        let n = state.num_qubits();
        let mut order: Vec<usize> = (0..n).collect();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (x >> 33) as usize % (i + 1));
        }
        let (a, b) = ((order[0], order[1]), (order[2], order[3]));
        let joint = |first: (usize, usize), second: (usize, usize)| {
            let mut out = BTreeMap::new();
            for o1 in BellOutcome::ALL {
                let p1 = bell_project(&state, first.0, first.1, o1).unwrap();
                for o2 in BellOutcome::ALL {
                    let p = match &p1.collapsed {
                        Some(s) => p1.probability * bell_project(s, second.0, second.1, o2).unwrap().probability,
                        None => 0.0,
                    };
                    out.insert((o1, o2), p);
                }
            }
            out
        };
        let ab = joint(a, b);
        let ba = joint(b, a);
        for ((o1, o2), p) in &ab {
            prop_assert!((p - ba[&(*o2, *o1)]).abs() < 1e-6);
        }
    }

    #[test]
    fn expansion_reconstructs_random_states(
        (state, pairs) in prop_oneof![Just(2usize), Just(4), Just(6)]
            .prop_flat_map(|n| (random_state(n, n), random_pairing(n)))
    ) {
        let terms = bell_product_expansion(&state, &pairs).unwrap();
        let parseval: f64 = terms.iter().map(|t| t.coefficient.norm_sqr()).sum();
        prop_assert!((parseval - 1.0).abs() < 1e-6);
        let back = reconstruct(&terms, &pairs, state.num_qubits()).unwrap();
        prop_assert!(back.max_deviation(&state) < 1e-6);
    }

    #[test]
    fn encoded_expansion_reconstructs_exactly(ops in (2usize..=6).prop_flat_map(random_ops)) {
        let state = encoded_state::<f64>(&ops).unwrap();
        let pairs = measurement_pairs(ops.parties());
        let terms = bell_product_expansion(&state, &pairs).unwrap();
        prop_assert_eq!(terms.len(), 1 << (ops.parties() + 1));
        let back = reconstruct(&terms, &pairs, state.num_qubits()).unwrap();
        prop_assert!(back.max_deviation(&state) < TOL);
    }

    #[test]
    fn scheme_text_roundtrip(scheme in random_scheme()) {
        let text = scheme_file::to_text(&scheme);
        prop_assert_eq!(scheme_file::parse(&text).unwrap(), scheme);
    }

    #[test]
    fn leader_maps_accepted_iff_bijective(map in prop::array::uniform4(pauli())) {
        let distinct = (0..4).all(|i| (i + 1..4).all(|j| map[i] != map[j]));
        let result = EncodingScheme::new(2, map, vec![[PauliOp::I, PauliOp::X]]);
        prop_assert_eq!(result.is_ok(), distinct);
    }

    #[test]
    fn follower_maps_accepted_iff_bijective(map in prop::array::uniform2(pauli())) {
        let ok = map[0] != map[1] && map.iter().all(|op| op.is_follower_op());
        let result = EncodingScheme::new(2, [PauliOp::I, PauliOp::X, PauliOp::IY, PauliOp::Z], vec![map]);
        prop_assert_eq!(result.is_ok(), ok);
    }

    #[test]
    fn sessions_decode_large_registers(
        (parties, index) in (5usize..=6).prop_flat_map(|m| (Just(m), 0usize..1 << (m + 1))),
        seed in any::<u64>(),
        trial in any::<u64>(),
    ) {
        let msg = Message::from_index(parties, index).unwrap();
        let t = large_protocol(parties)
            .run_session::<f64>(&msg, TrialSeed::new(seed, trial))
            .unwrap();
        prop_assert_eq!(t.decoded, msg);
        prop_assert!((t.joint_probability - 0.5f64.powi(parties as i32 + 1)).abs() < TOL);
    }

    #[test]
    fn sessions_decode_under_random_schemes(scheme in random_scheme(), seed in any::<u64>()) {
        prop_assume!(scheme.parties() <= 4);
        let protocol = Protocol::new(scheme).unwrap();
        let t = protocol.run_trial::<f64>(TrialSeed::new(seed, 0)).unwrap();
        prop_assert_eq!(t.decoded, t.message);
    }
}

#[test]
fn every_message_decodes_for_small_registers() {
    for parties in 2..=4 {
        let protocol = Protocol::new(standard_scheme(parties).unwrap()).unwrap();
        for msg in Message::all(parties).unwrap() {
            for trial in 0..8 {
                let t = protocol
                    .run_session::<f64>(&msg, TrialSeed::new(11, trial))
                    .unwrap();
                assert_eq!(t.decoded, msg);
            }
        }
    }
}

#[test]
fn support_is_uniform_for_every_tuple() {
    for parties in 2..=4 {
        let p = 0.5f64.powi(parties as i32 + 1);
        for ops in OperatorTuple::all(parties).unwrap() {
            let dist = outcome_distribution::<f64>(&ops).unwrap();
            assert_eq!(dist.len(), 1 << (parties + 1));
            assert!(dist.values().all(|&q| (q - p).abs() < TOL), "{ops}");
        }
    }
}

#[test]
fn decoder_covers_every_record() {
    for parties in 2..=4 {
        let table = build_decoder(&standard_scheme(parties).unwrap()).unwrap();
        assert_eq!(table.len(), 1 << (2 * (parties + 1)));
    }
}

#[test]
fn single_precision_sanity() {
    let ghz = make_ghz::<f32>(3).unwrap();
    assert!((ghz.norm_sqr() - 1.0).abs() < 1e-5);
    let report = analyze::<f32>(&standard_scheme(2).unwrap(), EveModel::Public).unwrap();
    assert!((report.secret_capacity_bits - 2.0).abs() < 1e-4);
    assert!((report.diana_info_bits - 3.0).abs() < 1e-4);
    let protocol = Protocol::new(standard_scheme(3).unwrap()).unwrap();
    let t = protocol.run_trial::<f32>(TrialSeed::new(5, 1)).unwrap();
    assert_eq!(t.decoded, t.message);
}
