use super::{need, Target};
use crate::circuits::{brickwork_pairs, Circuit, Gate, LocalLayer};
use crate::error::Result;
use crate::gates::CliffordGate;
use crate::lattice::Lattice;
use crate::linalg::{r, CMat, ZERO};
use crate::locc::{teleport_round, Protocol};
use crate::statevector::{Entry, EntryKey, PureState, QuditRegister};

/// `z_n = 1/(x_n sqrt N)` with `x_1 = 1` and `x_{n+1} = sqrt(x_n^2 - 1/N)`.
pub fn w_z_sequence(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut x: f64 = 1.0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((1.0 / (x * nf.sqrt())).min(1.0));
        x = (x * x - 1.0 / nf).max(0.0).sqrt();
    }
    out
}

/// Two-qubit rotation `V(z)` on `(control, target)`: fixes `|00>` and `|11>`,
/// `|01> -> z|01> + sqrt(1-z^2)|10>`, `|10> -> -sqrt(1-z^2)|01> + z|10>`.
pub fn w_rotation(z: f64) -> CMat {
    let w = (1.0 - z * z).max(0.0).sqrt();
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = r(1.0);
    m[(3, 3)] = r(1.0);
    m[(1, 1)] = r(z);
    m[(2, 1)] = r(w);
    m[(1, 2)] = r(-w);
    m[(2, 2)] = r(z);
    m
}

/// W preparation on a ring of `n` qubits.
///
/// Site `j` carries ancillas `l_j = a(j,0)` and `r_j = a(j,1)`, the last site
/// also `a(n-1,2)`; Bell pairs join `r_j` to the next left ancilla. The
/// excitation amplitude is split off at each site by `V(z_j)` and the rest is
/// teleported onward, then swapped into the next spin.
pub fn w_protocol(n: usize) -> Result<(Protocol, Target)> {
    need(n >= 2, "W protocol needs N >= 2")?;
    let lat = Lattice::chain(n, 2)?;
    let s = EntryKey::sys;
    let l = |j| EntryKey::anc(j, 0);
    let rr = |j| EntryKey::anc(j, 1);
    let last = EntryKey::anc(n - 1, 2);
    let next_left = |j: usize| if j + 1 < n { l(j + 1) } else { last };

    let mut create: Vec<Entry> = Vec::new();
    for j in 0..n {
        create.push(Entry::new(l(j), 2));
        create.push(Entry::new(rr(j), 2));
    }
    create.push(Entry::new(last, 2));
    let mut ops: Vec<Gate> = (0..n).map(|j| Gate::named(CliffordGate::H, vec![rr(j)])).collect();
    ops.push(Gate::named(CliffordGate::Cnot, vec![rr(n - 1), last]));
    // x_1 = 1: the first spin starts in |1>
    ops.push(Gate::named(CliffordGate::X, vec![s(0)]));
    let mut c = Circuit::new(lat);
    c.push_local(LocalLayer { create, ops, discard: vec![] });
    for parity in 0..2 {
        let gates = brickwork_pairs(n, false, parity)
            .into_iter()
            .map(|(j, k)| Gate::named(CliffordGate::Cnot, vec![rr(j), l(k)]))
            .collect();
        c.push_gates(gates);
    }

    let mut p = Protocol::new(format!("w-{n}"), QuditRegister::uniform(n, 2), c);
    for (j, z) in w_z_sequence(n).into_iter().enumerate() {
        let mut round = teleport_round(l(j), rr(j), next_left(j), 2);
        let mut pre = Vec::new();
        if j > 0 {
            pre.push(Gate::swap(l(j), s(j)));
        }
        pre.push(Gate::matrix(vec![l(j), s(j)], w_rotation(z)));
        pre.append(&mut round.local.ops);
        round.local.ops = pre;
        p.push_round(round);
    }
    Ok((p, Target::W(n)))
}

/// `(1/sqrt N) sum_k sigma_k^- |0...0>`.
pub fn w_state(n: usize) -> Result<PureState> {
    need(n >= 1, "W state needs at least one qubit")?;
    crate::capacity::check_amplitudes("W state", 1u128 << n)?;
    let mut amps = vec![ZERO; 1 << n];
    let a = r(1.0 / (n as f64).sqrt());
    for k in 0..n {
        amps[1 << (n - 1 - k)] = a;
    }
    PureState::from_amplitudes(QuditRegister::uniform(n, 2), amps)
}
