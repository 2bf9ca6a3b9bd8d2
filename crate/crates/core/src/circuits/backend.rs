use std::collections::HashMap;

use super::{Gate, GateKind, UNITARY_TOL};
use crate::error::{invalid, Error, Result};
use crate::gates::CliffordGate;
use crate::linalg::{fourier_matrix, unitarity_deviation, CMat};
use crate::stabilizer::{PauliString, Tableau};
use crate::statevector::{Entry, EntryKey, Measure, PureState, QuditRegister};

/// Measurement basis for one entry.
#[derive(Clone, Debug, PartialEq)]
pub enum Basis {
    /// Computational basis.
    Z,
    /// Fourier basis `F|k>`; the Hadamard basis for qubits.
    X,
    /// Columns of an explicit unitary.
    Matrix(CMat),
}

impl Basis {
    /// Basis vectors as columns, `None` for the computational basis.
    pub fn columns(&self, d: usize) -> Option<CMat> {
        match self {
            Basis::Z => None,
            Basis::X => Some(fourier_matrix(d)),
            Basis::Matrix(m) => Some(m.clone()),
        }
    }
}

/// Operations a simulator must support to run circuits and protocols.
pub trait Backend: Clone {
    /// Every entry of `reg` in `|0>`.
    fn zeros(reg: &QuditRegister) -> Result<Self>;
    fn register(&self) -> QuditRegister;
    /// `|<self|other>|^2` over the same set of entries.
    fn fidelity(&self, other: &Self) -> Result<f64>;
    fn apply_gate(&mut self, gate: &Gate) -> Result<()>;
    /// New entry in `|0>`.
    fn create(&mut self, entry: Entry) -> Result<()>;
    /// Removes an entry, which must be decoupled from the rest.
    fn discard(&mut self, key: &EntryKey) -> Result<()>;
    fn probabilities(&self, key: &EntryKey, basis: &Basis) -> Result<Vec<f64>>;
    fn measure(&mut self, key: &EntryKey, basis: &Basis, mode: Measure<'_>) -> Result<(usize, f64)>;
}

impl Backend for PureState {
    fn zeros(reg: &QuditRegister) -> Result<Self> {
        Ok(PureState::zeros(reg.clone()))
    }

    fn register(&self) -> QuditRegister {
        PureState::register(self).clone()
    }

    fn fidelity(&self, other: &Self) -> Result<f64> {
        PureState::fidelity(self, other)
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match &gate.kind {
            GateKind::Named(CliffordGate::Swap) if gate.targets.len() == 2 => {
                self.swap_entries(&gate.targets[0], &gate.targets[1])
            }
            GateKind::Matrix(m) => {
                let dev = unitarity_deviation(m);
                if dev > UNITARY_TOL {
                    return Err(Error::NotUnitary(dev));
                }
                self.apply_matrix(&gate.targets, m)
            }
            GateKind::Named(_) => {
                let reg = PureState::register(self);
                let dims: Vec<usize> = gate
                    .targets
                    .iter()
                    .map(|k| reg.dim_of(k).ok_or_else(|| Error::Register(format!("no entry {k}"))))
                    .collect::<Result<_>>()?;
                let m = gate.to_matrix(&dims)?;
                self.apply_matrix(&gate.targets, &m)
            }
        }
    }

    fn create(&mut self, entry: Entry) -> Result<()> {
        self.add_entry(entry, None)
    }

    fn discard(&mut self, key: &EntryKey) -> Result<()> {
        self.remove_entry(key).map(|_| ())
    }

    fn probabilities(&self, key: &EntryKey, basis: &Basis) -> Result<Vec<f64>> {
        let d = PureState::register(self).dim_of(key).ok_or_else(|| Error::Register(format!("no entry {key}")))?;
        PureState::probabilities(self, key, basis.columns(d).as_ref())
    }

    fn measure(&mut self, key: &EntryKey, basis: &Basis, mode: Measure<'_>) -> Result<(usize, f64)> {
        let d = PureState::register(self).dim_of(key).ok_or_else(|| Error::Register(format!("no entry {key}")))?;
        self.measure_local(key, basis.columns(d).as_ref(), mode)
    }
}

/// Tableau with qubits labelled by register entries.
#[derive(Clone, Debug)]
pub struct TableauState {
    tab: Tableau,
    keys: Vec<EntryKey>,
    index: HashMap<EntryKey, usize>,
}

impl TableauState {
    /// All qubits in `|0>`.
    pub fn new(keys: Vec<EntryKey>) -> Result<Self> {
        let n = keys.len();
        TableauState::from_tableau(Tableau::new(n), keys)
    }

    pub fn from_tableau(tab: Tableau, keys: Vec<EntryKey>) -> Result<Self> {
        if tab.num_qubits() != keys.len() {
            return invalid("one key per tableau qubit required");
        }
        let mut index = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            if index.insert(*k, i).is_some() {
                return invalid(format!("duplicate entry {k}"));
            }
        }
        Ok(TableauState { tab, keys, index })
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tab
    }

    pub fn keys(&self) -> &[EntryKey] {
        &self.keys
    }

    pub fn qubit(&self, key: &EntryKey) -> Result<usize> {
        self.index.get(key).copied().ok_or_else(|| Error::Register(format!("no entry {key}")))
    }

    /// Tableau with qubits re-ordered as `order`; generators are relabelled, not recomputed.
    pub fn tableau_in_order(&self, order: &[EntryKey]) -> Result<Tableau> {
        if order.len() != self.keys.len() {
            return invalid("order must list every entry");
        }
        let perm: Vec<usize> = order.iter().map(|k| self.qubit(k)).collect::<Result<_>>()?;
        let n = perm.len();
        let gens = self
            .tab
            .stabilizers()
            .iter()
            .map(|g| {
                let mut p = PauliString::identity(n);
                for (new, &old) in perm.iter().enumerate() {
                    p.set_op(new, g.op(old)).expect("valid symbol");
                }
                p.set_phase(g.phase());
                p
            })
            .collect();
        Tableau::from_generators(gens)
    }

    /// Dense state with the register ordering of `keys`.
    pub fn to_pure_state(&self) -> Result<PureState> {
        let reg = QuditRegister::new(self.keys.iter().map(|&k| Entry::new(k, 2)).collect())?;
        PureState::from_amplitudes(reg, self.tab.to_dense()?)
    }

    fn qubits(&self, keys: &[EntryKey]) -> Result<Vec<usize>> {
        keys.iter().map(|k| self.qubit(k)).collect()
    }
}

impl Backend for TableauState {
    fn zeros(reg: &QuditRegister) -> Result<Self> {
        if let Some(e) = reg.entries().iter().find(|e| e.dim != 2) {
            return Err(Error::NonClifford(format!("tableau backend needs qubits, {} has dimension {}", e.key, e.dim)));
        }
        TableauState::new(reg.keys())
    }

    fn register(&self) -> QuditRegister {
        QuditRegister::new(self.keys.iter().map(|&k| Entry::new(k, 2)).collect()).expect("keys are unique")
    }

    // Projecting onto the other state's generators one at a time leaves
    // norm^2 = <self|P_other|self> = |<other|self>|^2.
    fn fidelity(&self, other: &Self) -> Result<f64> {
        let mut mine = self.tableau_in_order(&other.keys)?;
        let mut f = 1.0;
        for g in other.tab.stabilizers() {
            match mine.measure_pauli(g, Measure::Force(0)) {
                Ok(o) => f *= o.probability,
                Err(Error::VanishingOutcome { .. }) => return Ok(0.0),
                Err(e) => return Err(e),
            }
        }
        Ok(f)
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match &gate.kind {
            GateKind::Named(g) => {
                let q = self.qubits(&gate.targets)?;
                self.tab.apply(*g, &q)
            }
            GateKind::Matrix(_) => Err(Error::NonClifford("matrix gates are not supported on the tableau backend".into())),
        }
    }

    fn create(&mut self, entry: Entry) -> Result<()> {
        if entry.dim != 2 {
            return Err(Error::NonClifford(format!("tableau backend needs qubits, {} has dimension {}", entry.key, entry.dim)));
        }
        if self.index.contains_key(&entry.key) {
            return invalid(format!("duplicate entry {}", entry.key));
        }
        let q = self.tab.add_qubit();
        self.keys.push(entry.key);
        self.index.insert(entry.key, q);
        Ok(())
    }

    fn discard(&mut self, key: &EntryKey) -> Result<()> {
        let q = self.qubit(key)?;
        self.tab.remove_qubit(q)?;
        self.keys.remove(q);
        self.index.remove(key);
        for v in self.index.values_mut() {
            if *v > q {
                *v -= 1;
            }
        }
        Ok(())
    }

    fn probabilities(&self, key: &EntryKey, basis: &Basis) -> Result<Vec<f64>> {
        let p = pauli_for(self, key, basis)?;
        Ok(self.tab.probabilities(&p)?.to_vec())
    }

    fn measure(&mut self, key: &EntryKey, basis: &Basis, mode: Measure<'_>) -> Result<(usize, f64)> {
        let p = pauli_for(self, key, basis)?;
        let o = self.tab.measure_pauli(&p, mode)?;
        Ok((o.outcome, o.probability))
    }
}

fn pauli_for(s: &TableauState, key: &EntryKey, basis: &Basis) -> Result<PauliString> {
    let q = s.qubit(key)?;
    let n = s.tab.num_qubits();
    match basis {
        Basis::Z => PauliString::single(n, q, 'Z'),
        Basis::X => PauliString::single(n, q, 'X'),
        Basis::Matrix(_) => Err(Error::NonClifford("tableau backend measures only in the Z or X basis".into())),
    }
}
