mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qccc::circuits::{Backend, TableauState};
use qccc::linalg::random_state;
use qccc::locc::{as_channel, enumerate_branches, for_each_branch, run_forced, run_sampled, teleport, teleport_branch, Channel, EnumerateOptions, Protocol};
use qccc::protocols::{ghz_protocol, toric_code_protocol, w_protocol};
use qccc::statevector::{Entry, EntryKey, PureState, QuditRegister};
use qccc::C64;

fn small_protocols() -> Vec<Protocol> {
    vec![
        ghz_protocol(2).unwrap().0,
        ghz_protocol(5).unwrap().0,
        w_protocol(3).unwrap().0,
        w_protocol(4).unwrap().0,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_run_is_one_of_the_enumerated_branches(which in 0usize..4, seed in any::<u64>()) {
        let p = &small_protocols()[which];
        let input = PureState::zeros(p.initial.clone());
        let (out, rec) = run_sampled(p, &input, seed).unwrap();
        // the same seed reproduces the run
        let (again, rec2) = run_sampled(p, &input, seed).unwrap();
        prop_assert_eq!(&rec, &rec2);
        prop_assert!((out.fidelity(&again).unwrap() - 1.0).abs() < 1e-12);
        let mut found = false;
        for_each_branch(p, &input, EnumerateOptions::default(), |r, st| {
            if r.bits() == rec.bits() {
                found = true;
                assert!((st.fidelity(&out)? - 1.0).abs() < 1e-12);
                assert!((r.probability() - rec.probability()).abs() < 1e-12);
            }
            Ok(())
        })
        .unwrap();
        prop_assert!(found);
        let (forced, _) = run_forced(p, &input, &rec.bits()).unwrap();
        prop_assert!((forced.fidelity(&out).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn branch_probabilities_sum_to_one() {
    for p in small_protocols() {
        let e = enumerate_branches(&p, &PureState::zeros(p.initial.clone()), None, EnumerateOptions::default()).unwrap();
        assert!((e.verdict.total_probability - 1.0).abs() < 1e-9, "{}", p.name);
        assert!(e.verdict.is_deterministic());
        assert!(e.verdict.branches.iter().all(|b| b.post_correction_fidelity >= 1.0 - 1e-9));
    }
    let (p, _) = toric_code_protocol(4).unwrap();
    let e = enumerate_branches(&p, &TableauState::zeros(&p.initial).unwrap(), None, EnumerateOptions::default()).unwrap();
    assert!((e.verdict.total_probability - 1.0).abs() < 1e-9);
}

#[test]
fn a_protocol_without_corrections_is_not_deterministic() {
    let (mut p, t) = ghz_protocol(4).unwrap();
    for r in &mut p.rounds {
        r.correction = None;
    }
    let target = t.dense().unwrap();
    let e = enumerate_branches(&p, &PureState::zeros(p.initial.clone()), Some(&target), EnumerateOptions::default()).unwrap();
    assert!(!e.verdict.is_deterministic());
    assert!(!e.verdict.certified());
    assert_eq!(e.verdict.target_matched, Some(false));
}

#[test]
fn branch_cap_is_an_error() {
    let (p, _) = ghz_protocol(6).unwrap();
    let opts = EnumerateOptions { max_branches: 8, ..EnumerateOptions::default() };
    let r = enumerate_branches(&p, &PureState::zeros(p.initial.clone()), None, opts);
    assert!(matches!(r, Err(qccc::Error::BranchCap(_))));
}

fn bell_setup(d: usize, psi: &[C64]) -> PureState {
    let reg = QuditRegister::new(vec![
        Entry::new(EntryKey::sys(0), d),
        Entry::new(EntryKey::anc(0, 0), d),
        Entry::new(EntryKey::anc(1, 0), d),
    ])
    .unwrap();
    let mut amps = vec![C64::new(0.0, 0.0); d * d * d];
    for (j, &p) in psi.iter().enumerate() {
        for k in 0..d {
            amps[j * d * d + k * d + k] = p / (d as f64).sqrt();
        }
    }
    PureState::from_amplitudes(reg, amps).unwrap()
}

#[test]
fn teleportation_returns_the_input_on_every_branch() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for trial in 0..50 {
        let d = 2 + trial % 3;
        let psi: Vec<C64> = random_state(d, &mut rng).iter().copied().collect();
        let s = bell_setup(d, &psi);
        for a in 0..d {
            for b in 0..d {
                let out = teleport_branch(&s, EntryKey::sys(0), EntryKey::anc(0, 0), EntryKey::anc(1, 0), a, b).unwrap();
                let got = out.materialize(&[EntryKey::anc(1, 0)]).unwrap();
                assert!((common::inner(&got, &psi).norm_sqr() - 1.0).abs() < 1e-12, "trial {trial} a={a} b={b}");
            }
        }
        let out = teleport(&s, EntryKey::sys(0), EntryKey::anc(0, 0), EntryKey::anc(1, 0), &mut rng).unwrap();
        let got = out.materialize(&[EntryKey::anc(1, 0)]).unwrap();
        assert!((common::inner(&got, &psi).norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn channels_compose() {
    let (p, t) = ghz_protocol(3).unwrap();
    let input = PureState::zeros(p.initial.clone());
    let out = Channel::identity().then(as_channel(&p)).apply(&input).unwrap();
    assert!(out.is_pure());
    assert!((out.total_probability() - 1.0).abs() < 1e-9);
    assert!(out.trace_norm_distance(&t.dense().unwrap()).unwrap() < 1e-9);
    // without corrections the output is a classical mixture
    let mut bare = p.clone();
    bare.rounds[0].correction = None;
    let mixed = as_channel(&bare).apply(&input).unwrap();
    assert!(!mixed.is_pure());
    assert!(mixed.trace_norm_distance(&t.dense().unwrap()).unwrap() > 0.1);
}
