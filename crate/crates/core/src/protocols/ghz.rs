use std::sync::Arc;

use super::{need, Target};
use crate::circuits::{brickwork_pairs, Circuit, Gate, LocalLayer, TableauState};
use crate::error::Result;
use crate::gates::CliffordGate;
use crate::lattice::Lattice;
use crate::linalg::{r, ZERO};
use crate::locc::{MeasurementSpec, OutcomeRecord, Protocol, Round};
use crate::stabilizer::{PauliString, Tableau};
use crate::statevector::{Entry, EntryKey, PureState, QuditRegister};

/// GHZ preparation on a ring of `n` qubits.
///
/// Bell pairs `(s_j, a_{j+1})` and `|+>` on the last spin, a local CNOT
/// `s_j -> a_j`, Z measurements with outcomes `m_j = k_{j-1} + k_j`, and
/// `X^(m_1 + ... + m_j)` on `s_j`.
pub fn ghz_protocol(n: usize) -> Result<(Protocol, Target)> {
    need(n >= 2, "GHZ protocol needs N >= 2")?;
    let lat = Lattice::chain(n, 2)?;
    let s = EntryKey::sys;
    let a = |j| EntryKey::anc(j, 0);
    let mut c = Circuit::new(lat);
    let mut ops: Vec<Gate> = (0..n - 1).map(|j| Gate::named(CliffordGate::H, vec![s(j)])).collect();
    // v = (1 - i sigma^y)/sqrt2 = X H
    ops.push(Gate::named(CliffordGate::H, vec![s(n - 1)]));
    ops.push(Gate::named(CliffordGate::X, vec![s(n - 1)]));
    c.push_local(LocalLayer { create: (1..n).map(|j| Entry::new(a(j), 2)).collect(), ops, discard: vec![] });
    for parity in 0..2 {
        let gates = brickwork_pairs(n, false, parity)
            .into_iter()
            .map(|(j, k)| Gate::named(CliffordGate::Cnot, vec![s(j), a(k)]))
            .collect();
        c.push_gates(gates);
    }
    let mut p = Protocol::new(format!("ghz-{n}"), QuditRegister::uniform(n, 2), c);
    let correction = Arc::new(move |rec: &OutcomeRecord| -> Result<Vec<Gate>> {
        let mut out = Vec::new();
        let mut acc = 0;
        for j in 1..n {
            acc ^= rec.require(&EntryKey::anc(j, 0))?;
            if acc == 1 {
                out.push(Gate::named(CliffordGate::X, vec![EntryKey::sys(j)]));
            }
        }
        Ok(out)
    });
    p.push_round(Round::new(
        LocalLayer::ops((1..n).map(|j| Gate::named(CliffordGate::Cnot, vec![s(j), a(j)])).collect()),
        (1..n).map(|j| MeasurementSpec::z(a(j))).collect(),
        Some(correction),
    ));
    Ok((p, Target::Ghz(n)))
}

/// `(|0...0> + |1...1>)/sqrt2`.
pub fn ghz_state(n: usize) -> Result<PureState> {
    need(n >= 1, "GHZ state needs at least one qubit")?;
    let reg = QuditRegister::uniform(n, 2);
    crate::capacity::check_amplitudes("GHZ state", 1u128 << n)?;
    let mut amps = vec![ZERO; 1 << n];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = r(h);
    amps[(1 << n) - 1] = r(h);
    PureState::from_amplitudes(reg, amps)
}

/// Stabilizers `X^{(x)n}` and `Z_i Z_{i+1}`.
pub fn ghz_tableau(n: usize) -> Result<TableauState> {
    need(n >= 1, "GHZ state needs at least one qubit")?;
    let mut gens = vec![PauliString::on(n, &(0..n).collect::<Vec<_>>(), 'X')?];
    for i in 0..n - 1 {
        gens.push(PauliString::on(n, &[i, i + 1], 'Z')?);
    }
    TableauState::from_tableau(Tableau::from_generators(gens)?, (0..n).map(EntryKey::sys).collect())
}
