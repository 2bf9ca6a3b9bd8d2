use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::circuits::random_circuit;
use crate::gates::{pauli, sigma_minus, sigma_plus, CliffordGate};
use crate::lattice::{Lattice, Region};
use crate::linalg::{random_state, random_unitary, I, ONE};
use crate::locc::run_sampled;
use crate::protocols::{ghz_protocol, ghz_state, toric_code_state, toric_code_tableau, w_state, ToricCodeLayout};
use crate::stabilizer::{CliffordOp, GraphState, PauliString, Tableau};
use crate::statevector::{EntryKey, PureState, QuditRegister, RegionOperator};
use crate::C64;

fn ps(s: &str) -> PauliString {
    s.parse().unwrap()
}

fn tab(gens: &[&str]) -> Tableau {
    Tableau::from_generators(gens.iter().map(|s| ps(s)).collect()).unwrap()
}

fn z(site: usize) -> RegionOperator {
    RegionOperator::single(EntryKey::sys(site), pauli('Z').unwrap())
}

fn random_pure(n: usize, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_state(1 << n, &mut rng);
    PureState::from_amplitudes(QuditRegister::uniform(n, 2), v.iter().copied().collect()).unwrap()
}

#[test]
fn factorization_examples() {
    let lat = Lattice::chain(8, 2).unwrap();
    let ghz = ghz_state(8).unwrap();
    let rep = check_factorization(&ghz, &lat, &z(0), &z(4), Some(1)).unwrap();
    assert!((rep.lhs() - ONE).norm() < 1e-12 && rep.rhs().norm() < 1e-12);
    assert!((rep.residual - 1.0).abs() < 1e-12);
    assert_eq!(rep.distance, 4);
    assert_eq!(rep.violates, Some(true));
    let rep = check_factorization(&ghz, &lat, &z(0), &z(4), Some(2)).unwrap();
    assert_eq!(rep.violates, Some(false));

    let w = w_state(8).unwrap();
    let sp = RegionOperator::single(EntryKey::sys(0), sigma_plus());
    let sm = RegionOperator::single(EntryKey::sys(4), sigma_minus());
    let rep = check_factorization(&w, &lat, &sp, &sm, None).unwrap();
    assert!((rep.lhs().re - 0.125).abs() < 1e-12 && rep.rhs().norm() < 1e-12);
    assert!((rep.residual - 0.125).abs() < 1e-12);
    assert_eq!(rep.violates, None);

    let prod = PureState::zeros(QuditRegister::uniform(8, 2));
    let x = RegionOperator::product(vec![(EntryKey::sys(1), pauli('X').unwrap()), (EntryKey::sys(2), pauli('Z').unwrap())]);
    assert!(check_factorization(&prod, &lat, &x, &z(6), Some(0)).unwrap().residual < 1e-15);
    assert!(check_factorization(&prod, &lat, &x, &z(2), None).is_err());
}

#[test]
fn factorization_residual_invariances() {
    let lat = Lattice::chain(6, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..5 {
        let psi = random_pure(6, seed);
        let x = RegionOperator::single(EntryKey::sys(0), random_unitary(2, &mut rng));
        let y = RegionOperator::single(EntryKey::sys(3), pauli('Y').unwrap());
        let base = check_factorization(&psi, &lat, &x, &y, None).unwrap().residual;
        let phased = PureState::from_amplitudes(
            psi.register().clone(),
            psi.amplitudes().unwrap().iter().map(|a| a * C64::from_polar(1.0, 0.7)).collect(),
        )
        .unwrap();
        assert!((check_factorization(&phased, &lat, &x, &y, None).unwrap().residual - base).abs() < 1e-12);
        let mut lu = psi.clone();
        for s in [1, 2, 4, 5] {
            lu.apply_matrix(&[EntryKey::sys(s)], &random_unitary(2, &mut rng)).unwrap();
        }
        lu.apply_matrix(&[EntryKey::sys(4), EntryKey::sys(5)], &random_unitary(4, &mut rng)).unwrap();
        assert!((check_factorization(&lu, &lat, &x, &y, None).unwrap().residual - base).abs() < 1e-12);
    }
}

#[test]
fn toric_code_row_strings_are_correlated() {
    let layout = ToricCodeLayout::new(4).unwrap();
    let lat = Lattice::square(4, 2).unwrap();
    let row = |r: usize| RegionOperator::product((0..4).map(|c| (EntryKey::sys(4 * r + c), pauli('X').unwrap())).collect());
    let tc = toric_code_state(&layout).unwrap();
    let rep = check_factorization(&tc, &lat, &row(0), &row(2), Some(0)).unwrap();
    assert!((rep.residual - 1.0).abs() < 1e-12, "{rep:?}");
    assert_eq!(rep.distance, 2);
    // the same expectations from the stabilizer group
    let t = toric_code_tableau(&layout).unwrap();
    let both = PauliString::on(16, &(0..4).chain(8..12).collect::<Vec<_>>(), 'X').unwrap();
    assert!(t.tableau().contains(&both));
    assert_eq!(t.tableau().expectation(&PauliString::on(16, &[0, 1, 2, 3], 'X').unwrap()).unwrap(), 0.0);
}

#[test]
fn area_law_examples() {
    let lat = Lattice::chain(10, 2).unwrap();
    let regions = default_regions(&lat).unwrap();
    assert_eq!(regions.len(), 5);
    let prod = PureState::zeros(QuditRegister::uniform(10, 2));
    let rep = audit_state(&prod, &lat, 0, &regions, None).unwrap();
    assert!(rep.regions.iter().all(|e| e.s0 == 0.0) && rep.passes);

    let (p, _) = ghz_protocol(10).unwrap();
    let rep = area_law_audit(&p, &PureState::zeros(p.initial.clone()), None, None, 3).unwrap();
    assert_eq!(rep.c, 4.0);
    assert!(rep.passes);
    for e in &rep.regions {
        assert!((e.s0 - 1.0).abs() < 1e-12);
        assert_eq!(e.boundary, e.region.len().min(2));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let c = random_circuit(&lat, 2, &mut rng).unwrap();
        let mut s = PureState::zeros(QuditRegister::uniform(10, 2));
        c.run(&mut s).unwrap();
        let rep = audit_state(&s, &lat, 2, &regions, None).unwrap();
        assert!(rep.passes);
        assert!(rep.regions.iter().all(|e| e.s0 <= 8.0 + 1e-9));
    }
}

#[test]
fn volume_law_counterexample_fails() {
    let (s, lat) = bell_pair_volume_state(10).unwrap();
    let rep = audit_state(&s, &lat, 2, &[Region::interval(0, 10)], None).unwrap();
    assert_eq!(rep.regions[0].boundary, 2);
    assert!((rep.regions[0].s0 - 10.0).abs() < 1e-9);
    assert_eq!(rep.c, 4.0);
    assert!(!rep.passes);
}

#[test]
fn clifford_map_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 1..5 {
        let t = crate::stabilizer::tests::random_tableau(n, &mut rng);
        // any Clifford: reuse the graph conversion gates plus the graph preparation
        let g = crate::stabilizer::to_graph_state(&t).unwrap();
        let mut ops = g.local_ops();
        ops.extend(g.preparation_ops());
        ops.push(CliffordOp::new(CliffordGate::S, vec![0]));
        let m = CliffordMap::from_ops(n, &ops).unwrap();
        assert!(m.is_symplectic());
        let dense = crate::stabilizer::circuit_matrix(n, &ops);
        let u = m.to_dense().unwrap();
        // equal up to one global phase
        let (r, c) = (0..1 << n).flat_map(|r| (0..1 << n).map(move |c| (r, c))).max_by(|a, b| u[*a].norm().total_cmp(&u[*b].norm())).unwrap();
        let ph = dense[(r, c)] / u[(r, c)];
        assert!((ph.norm() - 1.0).abs() < 1e-9);
        assert!((&u * ph - &dense).norm() < 1e-9);
        let inv = m.inverse().unwrap();
        assert_eq!(m.then(&inv).unwrap(), CliffordMap::identity(n));
        assert_eq!(inv.then(&m).unwrap(), CliffordMap::identity(n));
        for s in ['X', 'Y', 'Z'] {
            let p = PauliString::single(n, n - 1, s).unwrap();
            let img = m.conjugate(&p).unwrap();
            assert!((&u * p.to_matrix() * u.adjoint() - img.to_matrix()).norm() < 1e-9);
        }
    }
    let q = ps("XXX");
    let w = CliffordMap::quarter_rotation(&q).unwrap();
    let dense = (crate::linalg::CMat::identity(8, 8) + q.to_matrix() * I) * C64::from(std::f64::consts::FRAC_1_SQRT_2);
    for s in ["ZII", "IYI", "IIX"] {
        let p = ps(s);
        let lhs = &dense * p.to_matrix() * dense.adjoint();
        assert!((lhs - w.conjugate(&p).unwrap().to_matrix()).norm() < 1e-12);
    }
}

#[test]
fn local_maps_decompose_into_gates() {
    use CliffordGate::*;
    let words: [&[CliffordGate]; 4] = [&[H, S], &[S, H, Z], &[Sdg], &[H, S, H, X]];
    for w in words {
        let ops: Vec<CliffordOp> = w.iter().map(|&g| CliffordOp::new(g, vec![0])).collect();
        let m = CliffordMap::from_ops(1, &ops).unwrap();
        let back = m.local_gates(0).unwrap();
        let ops2: Vec<CliffordOp> = back.iter().map(|&g| CliffordOp::new(g, vec![0])).collect();
        assert_eq!(CliffordMap::from_ops(1, &ops2).unwrap(), m);
    }
}

#[test]
fn cj_empty_graph_is_hadamard_like() {
    let cj = build_cj_protocol(&tab(&["XII", "IXI", "IIX"])).unwrap();
    assert!(cj.graph.edges().is_empty());
    for k in 0..3 {
        assert_eq!(cj.unitary.image_x(k), &PauliString::single(3, k, 'Z').unwrap());
        assert_eq!(cj.unitary.image_z(k), &PauliString::single(3, k, 'X').unwrap());
    }
    assert!(verify_clifford_table(&cj));
    let psi = random_pure(3, 9);
    let v = certify_cj(&cj, &psi, None).unwrap();
    assert_eq!(v.n_branches, 64);
    assert!(v.certified() && v.min_fidelity > 1.0 - 1e-9);
    // H on every qubit, applied directly
    let mut direct = psi.clone();
    for k in 0..3 {
        direct.apply_matrix(&[EntryKey::sys(k)], &CliffordGate::H.matrix()).unwrap();
    }
    let out = run_cj_unitary(&cj, &psi, None, 5).unwrap();
    assert!(out.fidelity(&direct).unwrap() > 1.0 - 1e-9);

    // with an H frame the protocol only teleports
    let frame = vec![vec![CliffordGate::H]; 3];
    let id = build_cj_protocol_with(&tab(&["XII", "IXI", "IIX"]), &[], Some(frame)).unwrap();
    assert_eq!(id.unitary, CliffordMap::identity(3));
    let out = run_cj_unitary(&id, &psi, None, 1).unwrap();
    assert!(out.fidelity(&psi).unwrap() > 1.0 - 1e-12);
}

fn ghz_resource(m: usize) -> Tableau {
    crate::protocols::ghz_tableau(m).unwrap().tableau().clone()
}

fn quarter_xs(m: usize) -> crate::linalg::CMat {
    let x = PauliString::on(m, &(0..m).collect::<Vec<_>>(), 'X').unwrap().to_matrix();
    (crate::linalg::CMat::identity(1 << m, 1 << m) + x * I) * C64::from(std::f64::consts::FRAC_1_SQRT_2)
}

#[test]
fn cj_ghz_all_branches() {
    let cj = build_cj_protocol(&ghz_resource(3)).unwrap();
    assert!(verify_clifford_table(&cj));
    let zero = PureState::zeros(QuditRegister::uniform(3, 2));
    let v = certify_cj(&cj, &zero, None).unwrap();
    assert_eq!(v.n_branches, 64);
    assert!(v.certified());
    let first = &v.branches[0];
    assert!(v.branches.iter().all(|b| (b.branch_probability - first.branch_probability).abs() < 1e-12));

    // resource made by its own protocol
    let (p, _) = ghz_protocol(3).unwrap();
    let (made, _) = run_sampled(&p, &PureState::zeros(p.initial.clone()), 2).unwrap();
    let psi = random_pure(3, 31);
    let v = certify_cj(&cj, &psi, Some(&made)).unwrap();
    assert!(v.certified() && v.min_fidelity > 1.0 - 1e-9);
}

#[test]
fn cj_ghz_matches_quarter_rotation_in_recorded_frame() {
    for m in [3, 4] {
        let res = ghz_resource(m);
        let star = crate::stabilizer::to_graph_state(&res).unwrap();
        let centre = (0..m).find(|&v| star.neighbors(v).len() == m - 1).unwrap();
        let cj = build_cj_protocol_with(&res, &[centre], None).unwrap();
        assert_eq!(cj.graph.edges().len(), m * (m - 1) / 2);
        let w = CliffordMap::quarter_rotation(&PauliString::on(m, &(0..m).collect::<Vec<_>>(), 'X').unwrap()).unwrap();
        let frame = cj.frame_relative_to(&w).unwrap();
        assert!(frame.is_local(), "frame at M={m} is not local");
        // U = F W densely, up to a global phase
        let u = cj.unitary.to_dense().unwrap();
        let fw = frame.to_dense().unwrap() * quarter_xs(m);
        let ph = (u.adjoint() * &fw).trace() / (1 << m) as f64;
        assert!((ph.norm() - 1.0).abs() < 1e-9);
        assert!((u * ph - fw).norm() < 1e-9);
        for k in 0..m {
            assert_eq!(cj.unitary.conjugate(&PauliString::single(m, k, 'Z').unwrap()).unwrap().weight(), m);
        }
        assert!(verify_clifford_table(&cj));
    }
}

#[test]
fn path_graph_images() {
    let g = GraphState::from_adjacency(vec![vec![false, true, false], vec![true, false, true], vec![false, true, false]]).unwrap();
    let cj = build_cj_protocol(&g.tableau()).unwrap();
    assert_eq!(cj.graph.edges(), vec![(0, 1), (1, 2)]);
    assert_eq!(cj.unitary.conjugate(&ps("IZI")).unwrap(), ps("ZXZ"));
    assert!(verify_clifford_table(&cj));
}

#[test]
fn cj_composes_with_inverse() {
    let cj = build_cj_protocol(&ghz_resource(3)).unwrap();
    let inv = cj.unitary.inverse().unwrap().to_dense().unwrap();
    for seed in 0..3 {
        let psi = random_pure(3, 100 + seed);
        let out = run_cj_unitary(&cj, &psi, None, seed).unwrap();
        let mut back = out.clone();
        let keys: Vec<EntryKey> = (0..3).map(EntryKey::sys).collect();
        back.apply_matrix(&keys, &inv).unwrap();
        assert!(back.fidelity(&psi).unwrap() > 1.0 - 1e-9);
    }
}

#[test]
fn toric_code_unitary_prepares_rotated_code_state() {
    let layout = ToricCodeLayout::new(4).unwrap();
    let tc = toric_code_tableau(&layout).unwrap().tableau().clone();
    let cj = build_cj_protocol(&tc).unwrap();
    let mut rotated = tc.clone();
    rotated.apply_ops(&cj.graph.local_ops()).unwrap();
    assert!(cj.unitary.image_of_zero().unwrap().states_equal(&rotated).unwrap());
    assert!(verify_clifford_table(&cj));
}
