#![allow(dead_code)]

use rand::Rng;

use qccc::gates::CliffordGate;
use qccc::linalg::random_state;
use qccc::stabilizer::CliffordOp;
use qccc::statevector::{PureState, QuditRegister};
use qccc::C64;

pub const GATES: [CliffordGate; 9] = [
    CliffordGate::H,
    CliffordGate::S,
    CliffordGate::Sdg,
    CliffordGate::X,
    CliffordGate::Y,
    CliffordGate::Z,
    CliffordGate::Cnot,
    CliffordGate::Cz,
    CliffordGate::Swap,
];

/// Uniformly drawn gates on random qubits.
pub fn random_clifford_ops<R: Rng>(n: usize, len: usize, rng: &mut R) -> Vec<CliffordOp> {
    let mut ops = Vec::with_capacity(len);
    while ops.len() < len {
        let g = GATES[rng.gen_range(0..GATES.len())];
        if g.arity() == 2 {
            if n < 2 {
                continue;
            }
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            ops.push(CliffordOp::new(g, vec![a, b]));
        } else {
            ops.push(CliffordOp::new(g, vec![rng.gen_range(0..n)]));
        }
    }
    ops
}

pub fn random_qubits<R: Rng>(n: usize, rng: &mut R) -> PureState {
    let v = random_state(1 << n, rng);
    PureState::from_amplitudes(QuditRegister::uniform(n, 2), v.iter().copied().collect()).unwrap()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
