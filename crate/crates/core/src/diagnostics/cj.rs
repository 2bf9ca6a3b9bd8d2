use std::sync::Arc;

use super::clifford::CliffordMap;
use crate::circuits::{Circuit, Gate, LocalLayer};
use crate::error::{invalid, Error, Result};
use crate::gates::CliffordGate;
use crate::lattice::Lattice;
use crate::locc::{enumerate_branches, run_sampled, EnumerateOptions, MeasurementSpec, OutcomeRecord, Protocol, Round, Verdict};
use crate::stabilizer::{to_graph_state, GraphState, PauliString, Tableau};
use crate::statevector::{Entry, EntryKey, PureState, QuditRegister};
use crate::C64;

/// Deterministic Clifford unitary driven by a stabilizer resource state.
///
/// Site `k` holds the input carrier `s_k = sys(k)`, the resource qubit
/// `a_k = anc(k, 0)` and a fresh `|+>` partner `a'_k = anc(k, 1)`. A local CZ
/// on `(a_k, a'_k)` (after bringing the resource to graph form) makes
/// `|R> = (U_G (x) 1)|Phi+>^M` with `U_G = prod_e CZ_e H^M`. A Bell
/// measurement on `(s_k, a'_k)` teleports the input through `U_G`, the
/// Pauli `w = U_G P U_G^dag` is undone on `a`, and `a` is swapped back onto
/// `s`, followed by an optional fixed local frame.
#[derive(Clone, Debug)]
pub struct CJProtocol {
    pub m: usize,
    pub resource: Tableau,
    /// Graph form of the resource; `local_cliffords` map the resource onto it.
    pub graph: GraphState,
    /// Gates applied to each output qubit after the swap.
    pub output_frame: Vec<Vec<CliffordGate>>,
    /// `U_G` alone.
    pub graph_unitary: CliffordMap,
    /// Total unitary, frame included.
    pub unitary: CliffordMap,
    /// `table[k][2*m1 + m2] = U_G X_k^{m2} Z_k^{m1} U_G^dag` for the Bell outcome
    /// `(m1, m2)` on `(s_k, a'_k)`.
    pub table: Vec<[PauliString; 4]>,
}

pub fn build_cj_protocol(resource: &Tableau) -> Result<CJProtocol> {
    build_cj_protocol_with(resource, &[], None)
}

/// Like [`build_cj_protocol`], with local complementations applied to the
/// graph in order and an optional per-site output frame.
pub fn build_cj_protocol_with(
    resource: &Tableau,
    local_complements: &[usize],
    output_frame: Option<Vec<Vec<CliffordGate>>>,
) -> Result<CJProtocol> {
    let m = resource.num_qubits();
    if m == 0 {
        return invalid("resource needs at least one qubit");
    }
    let mut graph = to_graph_state(resource)?;
    for &v in local_complements {
        graph.local_complement(v)?;
    }
    let output_frame = output_frame.unwrap_or_else(|| vec![Vec::new(); m]);
    if output_frame.len() != m || output_frame.iter().flatten().any(|g| g.arity() != 1) {
        return invalid("output frame needs one list of single-qubit gates per site");
    }
    let graph_unitary = CliffordMap::graph_unitary(&graph);
    let frame_ops: Vec<_> = output_frame
        .iter()
        .enumerate()
        .flat_map(|(k, gs)| gs.iter().map(move |&g| crate::stabilizer::CliffordOp::new(g, vec![k])))
        .collect();
    let unitary = graph_unitary.then(&CliffordMap::from_ops(m, &frame_ops)?)?;
    let mut table = Vec::with_capacity(m);
    for k in 0..m {
        let mut row = Vec::with_capacity(4);
        for idx in 0..4 {
            let p = bell_pauli(m, k, idx >> 1, idx & 1);
            row.push(graph_unitary.conjugate(&p)?);
        }
        table.push(row.try_into().expect("four entries"));
    }
    Ok(CJProtocol { m, resource: resource.clone(), graph, output_frame, graph_unitary, unitary, table })
}

/// `X^{m2} Z^{m1}` on qubit `k`.
fn bell_pauli(n: usize, k: usize, m1: usize, m2: usize) -> PauliString {
    let x = PauliString::single(n, k, 'X').expect("in range");
    let z = PauliString::single(n, k, 'Z').expect("in range");
    let mut p = PauliString::identity(n);
    if m2 == 1 {
        p = p.mul(&x);
    }
    if m1 == 1 {
        p = p.mul(&z);
    }
    p
}

fn carrier(k: usize) -> EntryKey {
    EntryKey::sys(k)
}

fn resource_key(k: usize) -> EntryKey {
    EntryKey::anc(k, 0)
}

fn partner(k: usize) -> EntryKey {
    EntryKey::anc(k, 1)
}

impl CJProtocol {
    /// Pauli `w` for a full outcome pattern `[(m1, m2); M]`.
    pub fn correction(&self, bits: &[(usize, usize)]) -> Result<PauliString> {
        if bits.len() != self.m {
            return invalid(format!("need {} outcome pairs, got {}", self.m, bits.len()));
        }
        let mut w = PauliString::identity(self.m);
        for (k, &(m1, m2)) in bits.iter().enumerate() {
            if m1 > 1 || m2 > 1 {
                return Err(Error::Numerical(format!("outcome ({m1}, {m2}) missing from the correction table")));
            }
            w = w.mul(&self.table[k][2 * m1 + m2]);
        }
        Ok(w)
    }

    pub fn input_register(&self) -> QuditRegister {
        let mut entries: Vec<Entry> = (0..self.m).map(|k| Entry::new(carrier(k), 2)).collect();
        entries.extend((0..self.m).map(|k| Entry::new(resource_key(k), 2)));
        QuditRegister::new(entries).expect("distinct keys")
    }

    pub fn protocol(&self) -> Result<Protocol> {
        let m = self.m;
        let lat = if m >= 2 { Lattice::chain(m, 2)? } else { Lattice::new(vec![1], false, 2)? };
        let mut c = Circuit::new(lat);
        let mut ops = Vec::new();
        for k in 0..m {
            ops.push(Gate::named(CliffordGate::H, vec![partner(k)]));
            for &g in &self.graph.local_cliffords[k] {
                ops.push(Gate::named(g, vec![resource_key(k)]));
            }
            ops.push(Gate::named(CliffordGate::Cz, vec![resource_key(k), partner(k)]));
        }
        c.push_local(LocalLayer { create: (0..m).map(|k| Entry::new(partner(k), 2)).collect(), ops, discard: vec![] });
        let mut p = Protocol::new(format!("cj-{m}"), self.input_register(), c);

        let bell: Vec<Gate> = (0..m)
            .flat_map(|k| {
                [Gate::named(CliffordGate::Cnot, vec![carrier(k), partner(k)]), Gate::named(CliffordGate::H, vec![carrier(k)])]
            })
            .collect();
        let meas = (0..m).flat_map(|k| [MeasurementSpec::z(carrier(k)), MeasurementSpec::z(partner(k))]).collect();
        let table = self.clone();
        let correction = Arc::new(move |rec: &OutcomeRecord| -> Result<Vec<Gate>> {
            let bits = (0..table.m)
                .map(|k| Ok((rec.require(&carrier(k))?, rec.require(&partner(k))?)))
                .collect::<Result<Vec<_>>>()?;
            let w = table.correction(&bits)?;
            Ok(pauli_gates(&w, resource_key))
        });
        p.push_round(Round::new(LocalLayer::ops(bell), meas, Some(correction)));

        let mut out = Vec::new();
        for k in 0..m {
            out.push(Gate::swap(resource_key(k), carrier(k)));
            for &g in &self.output_frame[k] {
                out.push(Gate::named(g, vec![carrier(k)]));
            }
        }
        p.push_round(Round::new(LocalLayer::ops(out), vec![], None));
        Ok(p)
    }

    /// `psi (x) phi` on the protocol's input register. `resource` defaults
    /// to the dense form of the resource tableau; otherwise its amplitudes
    /// are taken in its own register order.
    pub fn joint_input(&self, psi: &PureState, resource: Option<&PureState>) -> Result<PureState> {
        let order: Vec<EntryKey> = (0..self.m).map(carrier).collect();
        let a = psi.materialize(&order).map_err(|e| Error::Register(format!("CJ input: {e}")))?;
        let phi = match resource {
            Some(r) => {
                if r.register().len() != self.m || r.register().entries().iter().any(|e| e.dim != 2) {
                    return Err(Error::Register("resource must hold one qubit per site".into()));
                }
                r.amplitudes()?
            }
            None => self.resource.to_dense()?,
        };
        crate::capacity::check_amplitudes("CJ joint input", 1u128 << (2 * self.m))?;
        let mut amps = Vec::with_capacity(a.len() * phi.len());
        for x in &a {
            for y in &phi {
                amps.push(x * y);
            }
        }
        PureState::from_amplitudes(self.input_register(), amps)
    }

    /// `U psi` from the dense Clifford, as a state on the carriers.
    pub fn dense_action(&self, psi: &PureState) -> Result<PureState> {
        let order: Vec<EntryKey> = (0..self.m).map(carrier).collect();
        let a = psi.materialize(&order)?;
        let u = self.unitary.to_dense()?;
        let out: Vec<C64> = (0..a.len()).map(|r| (0..a.len()).map(|c| u[(r, c)] * a[c]).sum()).collect();
        PureState::from_amplitudes(QuditRegister::uniform(self.m, 2), out)
    }

    /// `U W^{-1}`, the frame relating this unitary to a reference Clifford.
    pub fn frame_relative_to(&self, reference: &CliffordMap) -> Result<CliffordMap> {
        reference.inverse()?.then(&self.unitary)
    }
}

/// One Pauli gate per non-identity site of `w`, phase dropped.
fn pauli_gates(w: &PauliString, key: impl Fn(usize) -> EntryKey) -> Vec<Gate> {
    w.support()
        .into_iter()
        .map(|j| {
            let g = match w.op(j) {
                'X' => CliffordGate::X,
                'Y' => CliffordGate::Y,
                _ => CliffordGate::Z,
            };
            Gate::named(g, vec![key(j)])
        })
        .collect()
}

/// One sampled run: the output on the carriers.
pub fn run_cj_unitary(cj: &CJProtocol, input: &PureState, resource: Option<&PureState>, seed: u64) -> Result<PureState> {
    let p = cj.protocol()?;
    let joint = cj.joint_input(input, resource)?;
    Ok(run_sampled(&p, &joint, seed)?.0)
}

/// Every Bell branch against the dense `U psi`.
pub fn certify_cj(cj: &CJProtocol, input: &PureState, resource: Option<&PureState>) -> Result<Verdict> {
    let p = cj.protocol()?;
    let joint = cj.joint_input(input, resource)?;
    let target = cj.dense_action(input)?;
    Ok(enumerate_branches(&p, &joint, Some(&target), EnumerateOptions::default())?.verdict)
}

/// Single-site Pauli images are Pauli strings, the table agrees with
/// `U_G`, and at `M <= 4` the dense matrix reproduces every image.
pub fn verify_clifford_table(cj: &CJProtocol) -> bool {
    let m = cj.m;
    if !cj.unitary.is_symplectic() || !cj.graph_unitary.is_symplectic() || cj.table.len() != m {
        return false;
    }
    for k in 0..m {
        for idx in 0..4 {
            match cj.graph_unitary.conjugate(&bell_pauli(m, k, idx >> 1, idx & 1)) {
                Ok(w) if w == cj.table[k][idx] => {}
                _ => return false,
            }
        }
    }
    if m <= 4 {
        let Ok(u) = cj.unitary.to_dense() else { return false };
        for k in 0..m {
            for s in ['X', 'Y', 'Z'] {
                let p = PauliString::single(m, k, s).expect("in range");
                let Ok(img) = cj.unitary.conjugate(&p) else { return false };
                let lhs = &u * p.to_matrix() * u.adjoint();
                if (lhs - img.to_matrix()).norm() > 1e-9 {
                    return false;
                }
            }
        }
    }
    true
}
