//! Dense pure-state backend over heterogeneous qudit registers.

mod register;
mod state;

pub use register::{Entry, EntryKey, QuditRegister, Slot};
pub use state::{Measure, PureState, RegionOperator, PROB_FLOOR};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{sigma_minus, sigma_plus, CliffordGate};
    use crate::linalg::{c, r, CMat, ONE, ZERO};
    use crate::C64;
    use rand::SeedableRng;

    fn qubits(n: usize) -> QuditRegister {
        QuditRegister::uniform(n, 2)
    }

    fn ghz(n: usize) -> PureState {
        let mut v = vec![ZERO; 1 << n];
        v[0] = r(std::f64::consts::FRAC_1_SQRT_2);
        v[(1 << n) - 1] = r(std::f64::consts::FRAC_1_SQRT_2);
        PureState::from_amplitudes(qubits(n), v).unwrap()
    }

    fn k(i: usize) -> EntryKey {
        EntryKey::sys(i)
    }

    #[test]
    fn product_init_indexing() {
        let reg = QuditRegister::new(vec![Entry::new(k(0), 2), Entry::new(k(1), 3)]).unwrap();
        let s = PureState::init_product(reg, vec![vec![ONE, ZERO], vec![ZERO, ZERO, ONE]]).unwrap();
        let a = s.amplitudes().unwrap();
        assert_eq!(a.len(), 6);
        assert!((a[2] - ONE).norm() < 1e-15);
        assert!(PureState::init_product(qubits(1), vec![vec![ONE, ONE]]).is_err());
    }

    #[test]
    fn gates_and_ghz_unitary() {
        let mut s = PureState::zeros(qubits(2));
        s.apply_matrix(&[k(0)], &CliffordGate::X.matrix()).unwrap();
        s.apply_matrix(&[k(0), k(1)], &CliffordGate::Cnot.matrix()).unwrap();
        assert!((s.amplitudes().unwrap()[3] - ONE).norm() < 1e-15);

        let x3 = crate::linalg::kron_all(&[CliffordGate::X.matrix(), CliffordGate::X.matrix(), CliffordGate::X.matrix()]);
        let u = (CMat::identity(8, 8) + x3 * c(0.0, 1.0)) * r(std::f64::consts::FRAC_1_SQRT_2);
        let mut s = PureState::zeros(qubits(3));
        let op = RegionOperator::new(vec![k(0), k(1), k(2)], u);
        s.apply_operator(&op, true).unwrap();
        let a = s.amplitudes().unwrap();
        assert!((a[0] - r(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((a[7] - c(0.0, std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-12);
        let bad = RegionOperator::single(k(0), CMat::identity(2, 2) * r(2.0));
        assert!(s.apply_operator(&bad, true).is_err());
    }

    #[test]
    fn measurement_modes() {
        let mut s = PureState::zeros(qubits(1));
        s.apply_matrix(&[k(0)], &CliffordGate::H.matrix()).unwrap();
        let (o, p) = s.clone().measure_local(&k(0), None, Measure::Force(0)).unwrap();
        assert_eq!(o, 0);
        assert!((p - 0.5).abs() < 1e-12);

        let bell = {
            let mut b = PureState::zeros(qubits(2));
            b.apply_matrix(&[k(0)], &CliffordGate::H.matrix()).unwrap();
            b.apply_matrix(&[k(0), k(1)], &CliffordGate::Cnot.matrix()).unwrap();
            b
        };
        let mut b = bell.clone();
        let (o, p) = b.measure_local(&k(0), None, Measure::Force(1)).unwrap();
        assert_eq!((o, (p - 0.5).abs() < 1e-12), (1, true));
        assert!((b.amplitudes().unwrap()[3].norm() - 1.0).abs() < 1e-12);
        let mut z = PureState::zeros(qubits(1));
        assert!(matches!(
            z.measure_local(&k(0), None, Measure::Force(1)),
            Err(crate::Error::VanishingOutcome { .. })
        ));
        let skew = CMat::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(z.measure_local(&k(0), Some(&skew), Measure::Force(0)).is_err());

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0; 2];
        for _ in 0..200 {
            let (o, _) = bell.clone().measure_local(&k(1), None, Measure::Sample(&mut rng)).unwrap();
            counts[o] += 1;
        }
        assert!(counts[0] > 60 && counts[1] > 60);
    }

    #[test]
    fn x_basis_measurement_on_parked_and_live() {
        let h = CliffordGate::H.matrix();
        let mut s = PureState::zeros(qubits(1));
        let p = s.probabilities(&k(0), Some(&h)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        s.measure_local(&k(0), Some(&h), Measure::Force(1)).unwrap();
        let a = s.amplitudes().unwrap();
        assert!((a[0] - r(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((a[1] + r(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn ghz_expectations() {
        let g = ghz(4);
        let zz = RegionOperator::product(vec![(k(0), CliffordGate::Z.matrix()), (k(2), CliffordGate::Z.matrix())]);
        assert!((g.expectation(&zz).unwrap() - ONE).norm() < 1e-12);
        let z = RegionOperator::single(k(0), CliffordGate::Z.matrix());
        assert!(g.expectation(&z).unwrap().norm() < 1e-12);
    }

    #[test]
    fn entropies() {
        let g = ghz(6);
        assert!((g.max_entropy(&[k(0), k(1), k(2)], 1e-10).unwrap() - 1.0).abs() < 1e-12);
        let p = PureState::zeros(qubits(3));
        assert_eq!(p.max_entropy(&[k(1)], 1e-10).unwrap(), 0.0);
        // three Bell pairs (i, i+3) across the cut {0,1,2}
        let mut s = PureState::zeros(qubits(6));
        for i in 0..3 {
            s.apply_matrix(&[k(i)], &CliffordGate::H.matrix()).unwrap();
            s.apply_matrix(&[k(i), k(i + 3)], &CliffordGate::Cnot.matrix()).unwrap();
        }
        assert!((s.max_entropy(&[k(0), k(1), k(2)], 1e-10).unwrap() - 3.0).abs() < 1e-12);
        assert!((s.max_entropy(&[k(3), k(4), k(5)], 1e-10).unwrap() - 3.0).abs() < 1e-12);
        assert!(s.max_entropy(&[], 1e-10).is_err());
        assert!(s.max_entropy(&s.keys(), 1e-10).is_err());
    }

    #[test]
    fn fidelities_and_phase() {
        let z = PureState::zeros(qubits(1));
        let mut ph = PureState::from_amplitudes(qubits(1), vec![C64::from_polar(1.0, 0.7), ZERO]).unwrap();
        assert!((z.fidelity(&ph).unwrap() - 1.0).abs() < 1e-12);
        assert!(z.global_phase_equal(&ph, 1e-9).unwrap());
        ph.apply_matrix(&[k(0)], &CliffordGate::H.matrix()).unwrap();
        assert!((z.fidelity(&ph).unwrap() - 0.5).abs() < 1e-12);
        assert!(z.fidelity(&PureState::zeros(qubits(2))).is_err());
    }

    #[test]
    fn partial_traces() {
        let mut bell = PureState::zeros(qubits(2));
        bell.apply_matrix(&[k(0)], &CliffordGate::H.matrix()).unwrap();
        bell.apply_matrix(&[k(0), k(1)], &CliffordGate::Cnot.matrix()).unwrap();
        let rho = bell.reduced_density(&[k(0)]).unwrap();
        assert!((rho - CMat::identity(2, 2) * r(0.5)).norm() < 1e-12);
        assert!(!bell.is_product_across(&[k(0)]).unwrap());
        assert!(PureState::zeros(qubits(2)).is_product_across(&[k(0)]).unwrap());
        let g3 = ghz(3).reduced_density(&[k(0), k(1)]).unwrap();
        let want = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![r(0.5), ZERO, ZERO, r(0.5)]));
        assert!((g3 - want).norm() < 1e-12);
        assert!(bell.reduced_density(&[]).is_err());
    }

    #[test]
    fn parked_entries_and_relabels() {
        let reg = QuditRegister::new(vec![
            Entry::new(k(0), 2),
            Entry::new(EntryKey::anc(0, 0), 2),
            Entry::new(k(1), 2),
        ])
        .unwrap();
        let mut s = PureState::zeros(reg);
        s.apply_matrix(&[k(0)], &CliffordGate::X.matrix()).unwrap();
        s.swap_entries(&k(0), &EntryKey::anc(0, 0)).unwrap();
        let a = s.amplitudes().unwrap();
        assert!((a[0b010] - ONE).norm() < 1e-12);
        let v = s.remove_entry(&EntryKey::anc(0, 0)).unwrap();
        assert!((v[1].norm() - 1.0).abs() < 1e-12);
        assert_eq!(s.keys(), vec![k(0), k(1)]);

        let mut bell = ghz(2);
        assert!(matches!(bell.remove_entry(&k(0)), Err(crate::Error::NotDecoupled(_))));
        bell.add_entry(Entry::new(EntryKey::anc(1, 0), 3), None).unwrap();
        bell.swap_entries(&k(0), &k(1)).unwrap();
        assert!((bell.fidelity(&{
            let mut g = ghz(2);
            g.add_entry(Entry::new(EntryKey::anc(1, 0), 3), None).unwrap();
            g
        })
        .unwrap()
            - 1.0)
            .abs()
            < 1e-12);
    }

    #[test]
    fn sigma_pm_on_w2() {
        let w = PureState::from_unnormalized(qubits(2), vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let op = RegionOperator::product(vec![(k(0), sigma_plus()), (k(1), sigma_minus())]);
        assert!((w.expectation(&op).unwrap() - r(0.5)).norm() < 1e-12);
    }

    #[test]
    fn register_serde() {
        let reg = QuditRegister::new(vec![Entry::new(k(0), 2), Entry::new(EntryKey::anc(3, 1), 3)]).unwrap();
        let js = serde_json::to_string(&reg).unwrap();
        let back: QuditRegister = serde_json::from_str(&js).unwrap();
        assert_eq!(back, reg);
        assert_eq!(back.position(&EntryKey::anc(3, 1)), Some(1));
        assert!(serde_json::from_str::<QuditRegister>(r#"[{"site":0,"slot":{"system":0},"dim":1}]"#).is_err());
    }
}
