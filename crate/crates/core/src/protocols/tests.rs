use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::circuits::Backend;
use crate::linalg::{c, r, ONE, ZERO};
use crate::locc::{enumerate_branches, run_forced, run_sampled, EnumerateOptions, Protocol};
use crate::stabilizer::PauliString;
use crate::statevector::EntryKey;
use crate::C64;

fn certify_dense(p: &Protocol, target: &Target) -> crate::locc::Verdict {
    let input = PureState::zeros(p.initial.clone());
    let t = target.dense().unwrap();
    let e = enumerate_branches(p, &input, Some(&t), EnumerateOptions::default()).unwrap();
    assert!((e.verdict.total_probability - 1.0).abs() < 1e-9, "{}", e.verdict.total_probability);
    assert!(e.verdict.certified(), "{}: min fidelity {}", p.name, e.verdict.min_fidelity);
    assert!(e.verdict.min_fidelity >= 1.0 - 1e-9);
    e.verdict
}

#[test]
fn ghz_small_rings_all_branches() {
    for n in [2, 3, 4] {
        let (p, t) = ghz_protocol(n).unwrap();
        // two sites need a single Bell pair
        assert_eq!(p.depth(), if n == 2 { 1 } else { 2 });
        let v = certify_dense(&p, &t);
        assert_eq!(v.n_branches, 1 << (n - 1));
        for b in &v.branches {
            assert!((b.branch_probability - 1.0 / (1 << (n - 1)) as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn ghz_all_zero_record_needs_no_correction() {
    let (p, _) = ghz_protocol(3).unwrap();
    let input = PureState::zeros(p.initial.clone());
    let (out, _) = run_forced(&p, &input, &[0, 0]).unwrap();
    // the same record with the correction stripped
    let mut bare = p.clone();
    bare.rounds[0].correction = None;
    let (out2, _) = run_forced(&bare, &input, &[0, 0]).unwrap();
    let g = ghz_state(3).unwrap();
    assert!((out.fidelity(&g).unwrap() - 1.0).abs() < 1e-12);
    assert!((out2.fidelity(&g).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn ghz_eight_sites_dense_and_tableau() {
    let (p, t) = ghz_protocol(8).unwrap();
    assert_eq!(certify_dense(&p, &t).n_branches, 128);
    let input = TableauState::zeros(&p.initial).unwrap();
    let target = t.tableau().unwrap();
    let e = enumerate_branches(&p, &input, Some(&target), EnumerateOptions::default()).unwrap();
    assert_eq!(e.verdict.n_branches, 128);
    assert!(e.verdict.certified());
    let expected = ghz_tableau(8).unwrap();
    assert!(e.representative.tableau_in_order(expected.keys()).unwrap().states_equal(expected.tableau()).unwrap());
}

#[test]
fn ghz_large_tableau_sampled() {
    let (p, t) = ghz_protocol(64).unwrap();
    let input = TableauState::zeros(&p.initial).unwrap();
    let target = t.tableau().unwrap();
    for seed in 0..5 {
        let (out, rec) = run_sampled(&p, &input, seed).unwrap();
        assert_eq!(rec.outcomes.len(), 63);
        assert!((out.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn w_z_sequence_closed_form() {
    for n in 2..10 {
        let z = w_z_sequence(n);
        for (k, zk) in z.iter().enumerate() {
            assert!((zk - 1.0 / ((n - k) as f64).sqrt()).abs() < 1e-12, "n={n} k={k}");
        }
    }
    let z4 = w_z_sequence(4);
    let want = [0.5, 1.0 / 3f64.sqrt(), 1.0 / 2f64.sqrt(), 1.0];
    for (a, b) in z4.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn w_rotation_is_unitary_and_splits_amplitude() {
    let z = 0.3;
    let m = w_rotation(z);
    assert!(crate::linalg::is_unitary(&m, 1e-12));
    assert_eq!(m[(0, 0)], ONE);
    assert_eq!(m[(3, 3)], ONE);
    assert!((m[(1, 1)].re - z).abs() < 1e-15);
    assert!((m[(2, 1)].re - (1.0 - z * z).sqrt()).abs() < 1e-15);
}

#[test]
fn w_two_sites_is_bell_like() {
    let w = w_state(2).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let want = PureState::from_amplitudes(crate::statevector::QuditRegister::uniform(2, 2), vec![ZERO, r(h), r(h), ZERO]).unwrap();
    assert!((w.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn w_rings_all_branches() {
    for n in 2..=6 {
        let (p, t) = w_protocol(n).unwrap();
        assert_eq!(p.depth(), if n == 2 { 1 } else { 2 });
        let v = certify_dense(&p, &t);
        assert_eq!(v.n_branches, 1 << (2 * n));
    }
}

#[test]
fn w_sampled_four_sites() {
    let (p, t) = w_protocol(4).unwrap();
    let input = PureState::zeros(p.initial.clone());
    let target = t.dense().unwrap();
    for seed in 0..8 {
        let (out, _) = run_sampled(&p, &input, seed).unwrap();
        assert!((out.fidelity(&target).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn w_has_no_tableau_target() {
    let (_, t) = w_protocol(3).unwrap();
    assert!(matches!(t.tableau(), Err(crate::Error::NonClifford(_))));
}

fn bell() -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![r(h), ZERO, ZERO, r(h)]
}

#[test]
fn rg_single_term_product_bond() {
    let spec = RGFixedPointSpec::new(vec![ONE], vec![ONE, ZERO, ZERO, ZERO], 2, 2, 3).unwrap();
    let (p, t) = rg_fixed_point_protocol(&spec).unwrap();
    assert_eq!(p.depth(), 4);
    certify_dense(&p, &t);
    let out = t.dense().unwrap();
    for k in out.keys() {
        assert!(out.is_product_across(&[k]).unwrap());
    }
}

#[test]
fn rg_single_term_bell_ring() {
    let spec = RGFixedPointSpec::new(vec![ONE], bell(), 2, 2, 3).unwrap();
    let (p, t) = rg_fixed_point_protocol(&spec).unwrap();
    certify_dense(&p, &t);
    let st = t.dense().unwrap();
    // R_n and L_{n+1} form a Bell pair
    for n in 0..3 {
        let pair = [EntryKey::sys_k(n, 2), EntryKey::sys_k((n + 1) % 3, 1)];
        assert!(st.is_product_across(&pair).unwrap());
        assert!((st.max_entropy(&pair[..1], 1e-10).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn rg_two_terms() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for n in [2, 3] {
        let spec = RGFixedPointSpec::new(vec![r(h), r(h)], bell(), 2, 2, n).unwrap();
        let (p, t) = rg_fixed_point_protocol(&spec).unwrap();
        assert_eq!(p.depth(), if n == 2 { 3 } else { 4 });
        certify_dense(&p, &t);
    }
}

#[test]
fn rg_terms_in_a_larger_center() {
    // B = 2 inside qutrit centers and an unequal, complex superposition
    let a = vec![c(0.6, 0.0), c(0.0, 0.8)];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let psi: Vec<C64> = crate::linalg::random_state(4, &mut rng).iter().copied().collect();
    let spec = RGFixedPointSpec::new(a, psi, 2, 3, 3).unwrap();
    let (p, t) = rg_fixed_point_protocol(&spec).unwrap();
    certify_dense(&p, &t);
}

#[test]
fn rg_conditioned_bond_states() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = vec![ZERO, r(h), r(-h), ZERO];
    let spec = RGFixedPointSpec::new(vec![r(0.8), c(0.0, 0.6)], bell(), 2, 2, 3)
        .unwrap()
        .with_term_bond_states(vec![bell(), singlet])
        .unwrap();
    let (p, t) = rg_fixed_point_protocol(&spec).unwrap();
    certify_dense(&p, &t);
    let json = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<RGFixedPointSpec>(&json).unwrap(), spec);
}

#[test]
fn rg_spec_validation() {
    assert!(RGFixedPointSpec::new(vec![r(0.5)], bell(), 2, 2, 3).is_err());
    assert!(RGFixedPointSpec::new(vec![ONE], vec![r(0.6); 4], 2, 2, 3).is_err());
    assert!(RGFixedPointSpec::new(vec![ONE], bell(), 3, 2, 3).is_err());
    assert!(RGFixedPointSpec::new(vec![r(0.6), r(0.8), ZERO], bell(), 2, 2, 3).is_err());
    let spec = RGFixedPointSpec::new(vec![r(0.6), r(0.8)], bell(), 2, 2, 3).unwrap();
    let json = serde_json::to_string(&spec).unwrap();
    let back: RGFixedPointSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);
    assert!(serde_json::from_str::<RGFixedPointSpec>(r#"{"alphas":[[2,0]],"bond_state":[[1,0],[0,0],[0,0],[0,0]],"bond_dim":2,"n":2}"#).is_err());
}

#[test]
fn subspace_arithmetic() {
    let s = subspace_shift(3, 2, 1);
    assert_eq!(s[(1, 0)], ONE);
    assert_eq!(s[(0, 1)], ONE);
    assert_eq!(s[(2, 2)], ONE);
    let cs = subspace_csum(3, 2, 1);
    assert!(crate::linalg::is_unitary(&cs, 1e-12));
    // |1,1> -> |1,0>, |2,1> fixed
    assert_eq!(cs[(3, 4)], ONE);
    assert_eq!(cs[(7, 7)], ONE);
}

#[test]
fn toric_layout_invariants() {
    for n in [4, 6, 8] {
        let l = ToricCodeLayout::new(n).unwrap();
        assert_eq!(l.a.len(), n * n / 2);
        for q in 0..n * n {
            assert_eq!(l.plaquettes_of(q).len(), 2);
        }
        for wave in l.waves() {
            let mut seen = std::collections::HashSet::new();
            for i in wave {
                for q in l.a[i].qubits {
                    assert!(seen.insert(q), "wave plaquettes overlap");
                }
            }
        }
        for i in 0..l.a.len() {
            assert_eq!(l.neighbors(i).len(), 4);
        }
    }
    assert!(ToricCodeLayout::new(5).is_err());
    assert!(ToricCodeLayout::new(2).is_err());
}

fn satisfies(l: &ToricCodeLayout, k: &[i8], z: &[usize]) -> bool {
    let mut zs = PauliString::identity(l.num_qubits());
    for &q in z {
        zs.set_op(q, 'Z').unwrap();
    }
    (0..l.a.len()).all(|i| {
        let xp = PauliString::on(l.num_qubits(), &l.a[i].qubits, 'X').unwrap();
        xp.commutes(&zs) == (k[i] == 1)
    })
}

#[test]
fn toric_correction_examples() {
    let l = ToricCodeLayout::new(4).unwrap();
    let mut k = vec![1i8; 8];
    assert!(find_tc_correction(&l, &k).unwrap().is_empty());
    let j = l.neighbors(0)[0];
    k[0] = -1;
    k[j] = -1;
    assert_eq!(find_tc_correction(&l, &k).unwrap(), vec![l.shared_qubit(0, j).unwrap()]);
    // corner (0,0) and corner (2,2) are at distance 2
    let far = l.a.iter().position(|p| p.corner == (2, 2)).unwrap();
    let mut k = vec![1i8; 8];
    k[0] = -1;
    k[far] = -1;
    let z = find_tc_correction(&l, &k).unwrap();
    assert_eq!(z.len(), 2);
    assert!(satisfies(&l, &k, &z));
    k[1] = -1;
    assert!(find_tc_correction(&l, &k).is_err());
}

#[test]
fn toric_correction_random_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [4, 6, 8] {
        let l = ToricCodeLayout::new(n).unwrap();
        for _ in 0..50 {
            let mut k: Vec<i8> = (0..l.a.len()).map(|_| if rng.gen_bool(0.5) { -1 } else { 1 }).collect();
            if k.iter().filter(|&&x| x == -1).count() % 2 == 1 {
                k[0] = -k[0];
            }
            let z = find_tc_correction(&l, &k).unwrap();
            assert!(satisfies(&l, &k, &z));
        }
    }
}

#[test]
fn toric_depth_and_tableau_enumeration() {
    let (p, t) = toric_code_protocol(4).unwrap();
    assert_eq!(p.depth(), 16);
    assert_eq!(p.num_measurements(), 8);
    let input = TableauState::zeros(&p.initial).unwrap();
    let target = t.tableau().unwrap();
    let e = enumerate_branches(&p, &input, Some(&target), EnumerateOptions::default()).unwrap();
    // half the records have prod k_p = -1 and never occur
    assert_eq!(e.verdict.n_branches, 128);
    assert!(e.verdict.certified());
    for b in &e.verdict.branches {
        let neg = b.record.outcomes.iter().filter(|o| o.outcome == 1).count();
        assert_eq!(neg % 2, 0);
    }
}

#[test]
fn toric_eight_sampled_on_tableau() {
    let (p, t) = toric_code_protocol(8).unwrap();
    assert_eq!(p.depth(), 16);
    let input = TableauState::zeros(&p.initial).unwrap();
    let target = t.tableau().unwrap();
    for seed in 0..3 {
        let (out, _) = run_sampled(&p, &input, seed).unwrap();
        let got = out.tableau_in_order(target.keys()).unwrap();
        assert!(got.states_equal(target.tableau()).unwrap());
    }
}

#[test]
fn toric_tableau_matches_dense_target() {
    let l = ToricCodeLayout::new(4).unwrap();
    let dense = toric_code_state(&l).unwrap();
    let tab = toric_code_tableau(&l).unwrap().to_pure_state().unwrap();
    assert!((dense.fidelity(&tab).unwrap() - 1.0).abs() < 1e-10);
}
