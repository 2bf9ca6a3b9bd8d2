use proptest::prelude::*;

use qccc::diagnostics::check_factorization;
use qccc::gates::pauli;
use qccc::lattice::Lattice;
use qccc::locc::{run_sampled, Protocol};
use qccc::protocols::{
    find_tc_correction, ghz_protocol, rg_fixed_point_protocol, toric_code_protocol, w_protocol, RGFixedPointSpec, ToricCodeLayout,
};
use qccc::stabilizer::PauliString;
use qccc::statevector::{EntryKey, PureState, RegionOperator};
use qccc::C64;

fn run(p: &Protocol, seed: u64) -> PureState {
    run_sampled(p, &PureState::zeros(p.initial.clone()), seed).unwrap().0
}

// A record with an even number of -1 outcomes, built from a free bit vector.
fn even_record(n_plaq: usize, bits: &[bool]) -> Vec<i8> {
    let mut k: Vec<i8> = bits.iter().take(n_plaq).map(|&b| if b { -1 } else { 1 }).collect();
    if k.iter().filter(|&&x| x == -1).count() % 2 == 1 {
        k[0] = -k[0];
    }
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toric_correction_flips_exactly_the_negative_plaquettes(
        half in 2usize..5,
        bits in prop::collection::vec(any::<bool>(), 32),
    ) {
        let l = ToricCodeLayout::new(2 * half).unwrap();
        let k = even_record(l.a.len(), &bits);
        let z = find_tc_correction(&l, &k).unwrap();
        let nq = l.num_qubits();
        let zs = PauliString::on(nq, &z, 'Z').unwrap();
        for (i, p) in l.a.iter().enumerate() {
            let xs = PauliString::on(nq, &p.qubits, 'X').unwrap();
            prop_assert_eq!(xs.commutes(&zs), k[i] == 1, "plaquette {}", i);
        }
        // B plaquettes are Z checks and are left untouched by a Z string
        for p in &l.b {
            prop_assert!(PauliString::on(nq, &p.qubits, 'Z').unwrap().commutes(&zs));
        }
    }

    #[test]
    fn odd_records_are_rejected(half in 2usize..4, bits in prop::collection::vec(any::<bool>(), 16)) {
        let l = ToricCodeLayout::new(2 * half).unwrap();
        let mut k = even_record(l.a.len(), &bits);
        k[1] = -k[1];
        prop_assert!(find_tc_correction(&l, &k).is_err());
    }
}

#[test]
fn circuit_depths() {
    for n in 2..=7 {
        let want = if n == 2 { 1 } else { 2 };
        assert_eq!(ghz_protocol(n).unwrap().0.depth(), want, "GHZ {n}");
        assert_eq!(w_protocol(n).unwrap().0.depth(), want, "W {n}");
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)];
    for n in 2..=4 {
        let spec = RGFixedPointSpec::new(vec![C64::new(1.0, 0.0)], bell.clone(), 2, 2, n).unwrap();
        let (p, _) = rg_fixed_point_protocol(&spec).unwrap();
        assert_eq!(p.depth(), if n == 2 { 3 } else { 4 }, "RG {n}");
    }
    for n in [4, 6, 8] {
        let (p, _) = toric_code_protocol(n).unwrap();
        assert_eq!(p.depth(), 16, "TC {n}");
        p.validate().unwrap();
        assert_eq!(p.num_measurements(), n * n / 2);
    }
}

#[test]
fn constructors_reject_bad_sizes() {
    assert!(ghz_protocol(1).is_err());
    assert!(w_protocol(1).is_err());
    assert!(toric_code_protocol(5).is_err());
    assert!(toric_code_protocol(2).is_err());
    assert!(RGFixedPointSpec::new(vec![C64::new(1.0, 0.0)], vec![C64::new(1.0, 0.0); 4], 2, 2, 3).is_err());
}

#[test]
fn ghz_correlations_span_the_ring() {
    let z = |s: usize| RegionOperator::single(EntryKey::sys(s), pauli('Z').unwrap());
    for n in [4, 6, 9] {
        let (p, _) = ghz_protocol(n).unwrap();
        let st = run(&p, n as u64);
        let lat = Lattice::chain(n, 2).unwrap();
        let r = check_factorization(&st, &lat, &z(0), &z(n / 2), Some(p.depth())).unwrap();
        assert!(r.residual >= 0.99, "GHZ {n}: {}", r.residual);
    }
}

#[test]
fn toric_code_has_long_range_string_correlations() {
    let (p, _) = toric_code_protocol(4).unwrap();
    let st = run(&p, 21);
    let lat = Lattice::square(4, 2).unwrap();
    let row = |r: usize| RegionOperator::product((0..4).map(|c| (EntryKey::sys(4 * r + c), pauli('X').unwrap())).collect());
    let rep = check_factorization(&st, &lat, &row(0), &row(2), None).unwrap();
    assert!(rep.residual >= 0.99, "{}", rep.residual);
    // a single plaquette and a distant site factorize
    let plaq = RegionOperator::product(
        ToricCodeLayout::new(4).unwrap().a[0].qubits.iter().map(|&q| (EntryKey::sys(q), pauli('X').unwrap())).collect(),
    );
    let far = RegionOperator::single(EntryKey::sys(10), pauli('Z').unwrap());
    assert!(check_factorization(&st, &lat, &plaq, &far, None).unwrap().residual < 1e-9);
}

#[test]
fn w_output_is_symmetric_under_translation() {
    let (p, _) = w_protocol(5).unwrap();
    let st = run(&p, 9);
    let keys: Vec<EntryKey> = (0..5).map(EntryKey::sys).collect();
    let a = st.materialize(&keys).unwrap();
    let rotated: Vec<EntryKey> = (0..5).map(|s| EntryKey::sys((s + 1) % 5)).collect();
    let b = st.materialize(&rotated).unwrap();
    let overlap: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-10);
}
