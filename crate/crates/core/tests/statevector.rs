mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qccc::gates::{pauli, CliffordGate};
use qccc::linalg::{random_state, random_unitary, CMat, I};
use qccc::statevector::{Entry, EntryKey, Measure, PureState, QuditRegister, RegionOperator};
use qccc::C64;

fn mixed_register(dims: &[usize]) -> QuditRegister {
    QuditRegister::new(
        dims.iter()
            .enumerate()
            .map(|(k, &d)| Entry::new(if k % 3 == 2 { EntryKey::anc(k, 0) } else { EntryKey::sys(k) }, d))
            .collect(),
    )
    .unwrap()
}

fn random_on(reg: QuditRegister, rng: &mut ChaCha8Rng) -> PureState {
    let v = random_state(reg.total_dim() as usize, rng);
    PureState::from_amplitudes(reg, v.iter().copied().collect()).unwrap()
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..4, 2..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measurement_probabilities_sum_to_one(dims in dims_strategy(), seed in any::<u64>(), pick in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = random_on(mixed_register(&dims), &mut rng);
        let key = st.keys()[pick % dims.len()];
        let d = st.register().dim_of(&key).unwrap();
        let basis = random_unitary(d, &mut rng);
        for b in [None, Some(&basis)] {
            let p = st.probabilities(&key, b).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(p.iter().all(|&x| x >= -1e-15));
        }
        // forcing each outcome gives the Born probability and a normalized state
        let p = st.probabilities(&key, Some(&basis)).unwrap();
        for (k, &pk) in p.iter().enumerate() {
            if pk < 1e-9 {
                continue;
            }
            let mut s = st.clone();
            let (o, q) = s.measure_local(&key, Some(&basis), Measure::Force(k)).unwrap();
            prop_assert_eq!(o, k);
            prop_assert!((q - pk).abs() < 1e-10);
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn max_entropy_is_symmetric(dims in dims_strategy(), seed in any::<u64>(), mask in 1u32..63) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = random_on(mixed_register(&dims), &mut rng);
        let keys = st.keys();
        let a: Vec<EntryKey> = keys.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, e)| *e).collect();
        prop_assume!(!a.is_empty() && a.len() < keys.len());
        let ac: Vec<EntryKey> = keys.iter().filter(|k| !a.contains(k)).copied().collect();
        let sa = st.max_entropy(&a, 1e-10).unwrap();
        let sb = st.max_entropy(&ac, 1e-10).unwrap();
        prop_assert!((sa - sb).abs() < 1e-12);
    }

    #[test]
    fn hermitian_expectations_are_real(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = random_on(mixed_register(&dims), &mut rng);
        let keys = st.keys();
        let j = rng.gen_range(0..keys.len() - 1);
        let support = vec![keys[j], keys[j + 1]];
        let d = dims[j] * dims[j + 1];
        let u = random_unitary(d, &mut rng);
        let h = &u + u.adjoint();
        let e = st.expectation(&RegionOperator::new(support, h)).unwrap();
        prop_assert!(e.im.abs() < 1e-10);
    }
}

#[test]
fn norm_survives_a_thousand_gates() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dims in [vec![2; 6], vec![3, 2, 3, 2, 3]] {
        let mut st = random_on(mixed_register(&dims), &mut rng);
        let keys = st.keys();
        for _ in 0..1000 {
            let j = rng.gen_range(0..keys.len() - 1);
            let u = random_unitary(dims[j] * dims[j + 1], &mut rng);
            st.apply_matrix(&[keys[j], keys[j + 1]], &u).unwrap();
        }
        assert!((st.norm() - 1.0).abs() < 1e-10, "{}", st.norm());
    }
}

#[test]
fn init_product_examples() {
    let zero = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let st = PureState::init_product(QuditRegister::uniform(3, 2), vec![zero.clone(); 3]).unwrap();
    let a = st.amplitudes().unwrap();
    assert_eq!(a[0], C64::new(1.0, 0.0));
    assert!(a[1..].iter().all(|x| x.norm() == 0.0));

    let reg = QuditRegister::new(vec![Entry::new(EntryKey::sys(0), 2), Entry::new(EntryKey::sys(1), 3)]).unwrap();
    let two = vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let st = PureState::init_product(reg.clone(), vec![zero.clone(), two]).unwrap();
    assert_eq!(st.amplitudes().unwrap()[2], C64::new(1.0, 0.0));
    assert!(PureState::init_product(reg, vec![zero.clone(), zero]).is_err());
}

#[test]
fn quarter_rotation_on_three_qubits() {
    let x = pauli('X').unwrap();
    let xxx = qccc::linalg::kron_all(&[x.clone(), x.clone(), x]);
    let u = (CMat::identity(8, 8) + xxx * I) * C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut st = PureState::zeros(QuditRegister::uniform(3, 2));
    let keys = st.keys();
    st.apply_operator(&RegionOperator::new(keys, u), true).unwrap();
    let a = st.amplitudes().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (|000> + i|111>)/sqrt 2
    assert!((a[0] - C64::new(h, 0.0)).norm() < 1e-12);
    assert!((a[7] - C64::new(0.0, h)).norm() < 1e-12);
    assert!(a[1..7].iter().all(|z| z.norm() < 1e-12));
    // a non-unitary operator is refused when checked
    let bad = RegionOperator::single(EntryKey::sys(0), CMat::identity(2, 2) * C64::new(2.0, 0.0));
    assert!(st.apply_operator(&bad, true).is_err());
}

fn ghz(n: usize) -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = vec![C64::new(0.0, 0.0); 1 << n];
    a[0] = C64::new(h, 0.0);
    a[(1 << n) - 1] = C64::new(h, 0.0);
    PureState::from_amplitudes(QuditRegister::uniform(n, 2), a).unwrap()
}

#[test]
fn ghz_expectations_and_entropy() {
    let g = ghz(4);
    let z = |s: usize| (EntryKey::sys(s), pauli('Z').unwrap());
    assert!((g.expectation(&RegionOperator::product(vec![z(0), z(2)])).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(g.expectation(&RegionOperator::product(vec![z(0)])).unwrap().norm() < 1e-12);
    let g6 = ghz(6);
    let a: Vec<EntryKey> = (0..3).map(EntryKey::sys).collect();
    assert!((g6.max_entropy(&a, 1e-10).unwrap() - 1.0).abs() < 1e-12);
    let prod = PureState::zeros(QuditRegister::uniform(4, 2));
    assert_eq!(prod.max_entropy(&a, 1e-10).unwrap(), 0.0);
    assert!(g6.max_entropy(&[], 1e-10).is_err());
    assert!(g6.max_entropy(&g6.keys(), 1e-10).is_err());
}

#[test]
fn three_bell_pairs_across_a_cut() {
    let mut st = PureState::zeros(QuditRegister::uniform(6, 2));
    for k in 0..3 {
        st.apply_matrix(&[EntryKey::sys(k)], &CliffordGate::H.matrix()).unwrap();
        st.apply_matrix(&[EntryKey::sys(k), EntryKey::sys(k + 3)], &CliffordGate::Cnot.matrix()).unwrap();
    }
    let a: Vec<EntryKey> = (0..3).map(EntryKey::sys).collect();
    assert!((st.max_entropy(&a, 1e-10).unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn measurement_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::from_amplitudes(QuditRegister::uniform(1, 2), vec![C64::new(h, 0.0); 2]).unwrap();
    let mut s = plus.clone();
    let (o, p) = s.measure_local(&EntryKey::sys(0), None, Measure::Force(0)).unwrap();
    assert_eq!(o, 0);
    assert!((p - 0.5).abs() < 1e-12);
    assert!((s.amplitudes().unwrap()[0].norm() - 1.0).abs() < 1e-12);

    let mut b = ghz(2);
    let (o, p) = b.measure_local(&EntryKey::sys(0), None, Measure::Force(1)).unwrap();
    assert_eq!(o, 1);
    assert!((p - 0.5).abs() < 1e-12);
    assert!((b.amplitudes().unwrap()[3].norm() - 1.0).abs() < 1e-12);

    let mut zero = PureState::zeros(QuditRegister::uniform(1, 2));
    assert!(zero.clone().measure_local(&EntryKey::sys(0), None, Measure::Force(1)).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (o, p) = zero.measure_local(&EntryKey::sys(0), None, Measure::Sample(&mut rng)).unwrap();
    assert_eq!((o, p), (0, 1.0));

    let skew = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    assert!(plus.probabilities(&EntryKey::sys(0), Some(&skew)).is_err());
}

#[test]
fn fidelity_ignores_global_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a = common::random_qubits(4, &mut rng);
    let phased = PureState::from_amplitudes(
        a.register().clone(),
        a.amplitudes().unwrap().iter().map(|x| x * C64::from_polar(1.0, 1.3)).collect(),
    )
    .unwrap();
    assert!((a.fidelity(&phased).unwrap() - 1.0).abs() < 1e-12);
    assert!(a.global_phase_equal(&phased, 1e-10).unwrap());
    let b = common::random_qubits(4, &mut rng);
    assert!(!a.global_phase_equal(&b, 1e-10).unwrap());
}

#[test]
fn dense_capacity_is_enforced() {
    let reg = QuditRegister::uniform(40, 2);
    assert!(matches!(PureState::from_amplitudes(reg.clone(), vec![]), Err(qccc::Error::Capacity { .. })));
    // parked qudits cost nothing until they are entangled
    let mut st = PureState::zeros(reg);
    let keys = st.keys();
    st.apply_matrix(&keys[..2], &CliffordGate::Cnot.matrix()).unwrap();
    let all_h = keys.iter().try_for_each(|k| st.apply_matrix(&[*k], &CliffordGate::H.matrix()));
    assert!(matches!(all_h, Err(qccc::Error::Capacity { .. })));
}
