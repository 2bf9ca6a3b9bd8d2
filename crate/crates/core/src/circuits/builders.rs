use rand::Rng;

use super::{Circuit, Gate};
use crate::error::{invalid, Result};
use crate::lattice::Lattice;
use crate::linalg::random_unitary;
use crate::gates::permutation;
use crate::linalg::{CMat, ONE, ZERO};
use crate::statevector::{Entry, EntryKey, PureState, QuditRegister};

/// Disjoint nearest-neighbour pairs `(i, i+1)` starting at `i = parity` on a chain.
pub fn brickwork_pairs(n: usize, periodic: bool, parity: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = parity;
    while i + 1 < n {
        out.push((i, i + 1));
        i += 2;
    }
    if periodic && n > 2 && n % 2 == 0 && i + 1 == n {
        out.push((n - 1, 0));
    }
    out
}

/// Brickwork of Haar-random two-site gates on a chain, one system qudit per site.
pub fn random_circuit<R: Rng + ?Sized>(lattice: &Lattice, depth: usize, rng: &mut R) -> Result<Circuit> {
    if lattice.dimension() != 1 {
        return invalid("random brickwork circuits are built on chains");
    }
    let n = lattice.num_sites();
    let d = lattice.local_dim();
    let mut c = Circuit::new(lattice.clone());
    for t in 0..depth {
        let gates = brickwork_pairs(n, lattice.periodic(), t % 2)
            .into_iter()
            .map(|(a, b)| Gate::matrix(vec![EntryKey::sys(a), EntryKey::sys(b)], random_unitary(d * d, rng)))
            .collect();
        c.push_gates(gates);
    }
    Ok(c)
}

/// Depth-2 swap circuit realising the lattice translation on the system qudits.
#[derive(Clone, Debug)]
pub struct ShiftCircuit {
    pub circuit: Circuit,
    /// System qudits first (site order), then one ancilla per site.
    pub register: QuditRegister,
}

/// `T|n_1 ... n_N> = |n_2 ... n_N n_1>` on the system, `T^dag` on the ancillas.
pub fn build_shift_circuit(lattice: &Lattice) -> Result<ShiftCircuit> {
    if lattice.dimension() != 1 || !lattice.periodic() {
        return invalid("shift circuit needs a periodic chain");
    }
    let n = lattice.num_sites();
    let d = lattice.local_dim();
    let mut entries: Vec<Entry> = (0..n).map(|j| Entry::new(EntryKey::sys(j), d)).collect();
    entries.extend((0..n).map(|j| Entry::new(EntryKey::anc(j, 0), d)));
    let mut c = Circuit::new(lattice.clone());
    c.push_gates((0..n).map(|j| Gate::swap(EntryKey::sys(j), EntryKey::anc((j + n - 1) % n, 0))).collect());
    c.push_gates((0..n).map(|j| Gate::swap(EntryKey::sys(j), EntryKey::anc(j, 0))).collect());
    Ok(ShiftCircuit { circuit: c, register: QuditRegister::new(entries)? })
}

/// Digits of `x` in base `d`, most significant first.
fn digits(mut x: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = x % d;
        x /= d;
    }
    out
}

fn undigits(ds: impl IntoIterator<Item = usize>, d: usize) -> usize {
    ds.into_iter().fold(0, |acc, k| acc * d + k)
}

/// The translation `T|n_1 ... n_N> = |n_2 ... n_N n_1>` as a permutation matrix.
pub fn shift_unitary(n: usize, d: usize) -> Result<CMat> {
    crate::capacity::check_amplitudes("shift operator", (d as u128).pow(2 * n as u32))?;
    let dim = d.pow(n as u32);
    let perm: Vec<usize> = (0..dim)
        .map(|x| {
            let s = digits(x, d, n);
            undigits((0..n).map(|j| s[(j + 1) % n]), d)
        })
        .collect();
    Ok(permutation(&perm))
}

impl ShiftCircuit {
    /// Runs every computational basis state of the joint register and checks
    /// `T` on the system and `T^dag` on the ancillas.
    pub fn verify(&self) -> Result<bool> {
        let n = self.circuit.lattice.num_sites();
        let d = self.circuit.lattice.local_dim();
        let dim = d.pow(2 * n as u32);
        crate::capacity::check_amplitudes("shift check", dim as u128 * dim as u128)?;
        for x in 0..dim {
            let ds = digits(x, d, 2 * n);
            let (s, a) = ds.split_at(n);
            let mut amps = vec![ZERO; dim];
            amps[x] = ONE;
            let mut st = PureState::from_amplitudes(self.register.clone(), amps)?;
            self.circuit.run(&mut st)?;
            let order = self.register.keys();
            let out = st.materialize(&order)?;
            let want = undigits((0..n).map(|j| s[(j + 1) % n]).chain((0..n).map(|j| a[(j + n - 1) % n])), d);
            if (out[want] - ONE).norm() > 1e-12 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
