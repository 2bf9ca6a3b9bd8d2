use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{need, Target};
use crate::circuits::{Circuit, Gate, LocalLayer, TableauState};
use crate::error::{Error, Result};
use crate::gates::CliffordGate;
use crate::lattice::Lattice;
use crate::linalg::gf2::BitMatrix;
use crate::linalg::{ONE, ZERO};
use crate::locc::{MeasurementSpec, OutcomeRecord, Protocol, Round};
use crate::stabilizer::{PauliString, Tableau};
use crate::statevector::{Entry, EntryKey, PureState, QuditRegister};

/// One plaquette of the `N x N` torus, named by its upper-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub corner: (usize, usize),
    /// Qubits in the order corner, right, down, diagonal.
    pub qubits: [usize; 4],
}

/// Qubits on the vertices of an `N x N` torus, row-major, with plaquettes
/// split chessboard-wise: `P_A` has `r + c` even.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricCodeLayout {
    pub n: usize,
    pub a: Vec<Plaquette>,
    pub b: Vec<Plaquette>,
}

impl ToricCodeLayout {
    pub fn new(n: usize) -> Result<Self> {
        need(n >= 4 && n % 2 == 0, "toric code needs even N >= 4")?;
        let q = |r: usize, c: usize| (r % n) * n + c % n;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for r in 0..n {
            for c in 0..n {
                let p = Plaquette { corner: (r, c), qubits: [q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1)] };
                if (r + c) % 2 == 0 {
                    a.push(p)
                } else {
                    b.push(p)
                }
            }
        }
        Ok(ToricCodeLayout { n, a, b })
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.n
    }

    /// Indices into `a` of the first wave (corner row even) and the second.
    pub fn waves(&self) -> [Vec<usize>; 2] {
        let mut w = [Vec::new(), Vec::new()];
        for (i, p) in self.a.iter().enumerate() {
            w[p.corner.0 % 2].push(i);
        }
        w
    }

    /// A-plaquettes containing qubit `q`.
    pub fn plaquettes_of(&self, q: usize) -> Vec<usize> {
        (0..self.a.len()).filter(|&i| self.a[i].qubits.contains(&q)).collect()
    }

    pub fn shared_qubit(&self, i: usize, j: usize) -> Option<usize> {
        self.a[i].qubits.iter().copied().find(|q| self.a[j].qubits.contains(q))
    }

    /// A-plaquettes sharing a qubit with `i`, sorted.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.a[i].qubits.iter().flat_map(|&q| self.plaquettes_of(q)).filter(|&j| j != i).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Plaquette-by-qubit incidence over GF(2).
    pub fn incidence(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.a.len(), self.num_qubits());
        for (i, p) in self.a.iter().enumerate() {
            for &q in &p.qubits {
                m.set(i, q, true);
            }
        }
        m
    }

    fn x_string(&self, i: usize) -> Result<PauliString> {
        PauliString::on(self.num_qubits(), &self.a[i].qubits, 'X')
    }
}

/// Qubits (sorted) whose `sigma^z` product anticommutes with exactly the
/// plaquettes where `k_p = -1`.
///
/// Negatives are taken in layout order and each is paired with the nearest
/// unpaired one on the plaquette adjacency graph; every edge of the joining
/// path toggles the qubit the two plaquettes share.
pub fn find_tc_correction(layout: &ToricCodeLayout, k: &[i8]) -> Result<Vec<usize>> {
    if k.len() != layout.a.len() {
        return crate::error::invalid(format!("{} outcomes for {} plaquettes", k.len(), layout.a.len()));
    }
    if k.iter().any(|&x| x != 1 && x != -1) {
        return crate::error::invalid("outcomes must be +1 or -1");
    }
    let mut open: Vec<usize> = (0..k.len()).filter(|&i| k[i] == -1).collect();
    if open.len() % 2 == 1 {
        return crate::error::invalid("product of plaquette outcomes is -1");
    }
    let mut flip = vec![false; layout.num_qubits()];
    while let Some(&start) = open.first() {
        open.remove(0);
        let mut prev = vec![usize::MAX; k.len()];
        let mut dist = vec![usize::MAX; k.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in layout.neighbors(i) {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    prev[j] = i;
                    queue.push_back(j);
                }
            }
        }
        let Some(pos) = (0..open.len()).min_by_key(|&t| (dist[open[t]], open[t])) else {
            unreachable!("odd count checked above")
        };
        let mut j = open.remove(pos);
        while j != start {
            let i = prev[j];
            let q = layout.shared_qubit(i, j).expect("adjacent plaquettes share a qubit");
            flip[q] ^= true;
            j = i;
        }
    }
    let out: Vec<usize> = (0..flip.len()).filter(|&q| flip[q]).collect();
    for (i, p) in layout.a.iter().enumerate() {
        let odd = p.qubits.iter().filter(|q| flip[**q]).count() % 2 == 1;
        if odd != (k[i] == -1) {
            return Err(Error::Numerical(format!("correction misses plaquette {i}")));
        }
    }
    Ok(out)
}

/// Toric code preparation on the `n x n` torus: two waves of `V_p`, each as
/// eight swap layers around a local parity check, then `Z` on every `a_p`.
///
/// The ancillas of `p` sit at its corner `u`: `a_p = a(u,0)` and `Q = a(u,1..4)`.
/// The diagonal vertex is not adjacent to `u`, so it is routed through a relay
/// `a(right,0)`; right-hand vertices are never A-corners.
pub fn toric_code_protocol(n: usize) -> Result<(Protocol, Target)> {
    let layout = ToricCodeLayout::new(n)?;
    let lat = Lattice::square(n, 2)?;
    let s = EntryKey::sys;
    let mut c = Circuit::new(lat);
    for wave in layout.waves() {
        let ps: Vec<Plaquette> = wave.iter().map(|&i| layout.a[i]).collect();
        let ap = |p: &Plaquette| EntryKey::anc(p.qubits[0], 0);
        let qk = |p: &Plaquette, k: u16| EntryKey::anc(p.qubits[0], 1 + k);
        let relay = |p: &Plaquette| EntryKey::anc(p.qubits[1], 0);
        let swaps: [&dyn Fn(&Plaquette) -> Gate; 4] = [
            &|p| Gate::swap(s(p.qubits[1]), qk(p, 1)),
            &|p| Gate::swap(s(p.qubits[2]), qk(p, 2)),
            &|p| Gate::swap(s(p.qubits[3]), relay(p)),
            &|p| Gate::swap(relay(p), qk(p, 3)),
        ];

        let mut open = LocalLayer::default();
        for p in &ps {
            open.create.push(Entry::new(ap(p), 2));
            open.create.extend((0..4).map(|k| Entry::new(qk(p, k), 2)));
            open.create.push(Entry::new(relay(p), 2));
            open.ops.push(Gate::swap(s(p.qubits[0]), qk(p, 0)));
        }
        c.push_local(open);
        for g in &swaps {
            c.push_gates(ps.iter().map(|p| g(p)).collect());
        }
        let mut check = LocalLayer::default();
        for p in &ps {
            check.ops.push(Gate::named(CliffordGate::H, vec![ap(p)]));
            check.ops.extend((0..4).map(|k| Gate::named(CliffordGate::Cnot, vec![ap(p), qk(p, k)])));
            check.ops.push(Gate::named(CliffordGate::H, vec![ap(p)]));
        }
        c.push_local(check);
        for g in swaps.iter().rev() {
            c.push_gates(ps.iter().map(|p| g(p)).collect());
        }
        let mut close = LocalLayer::default();
        for p in &ps {
            close.ops.push(Gate::swap(s(p.qubits[0]), qk(p, 0)));
            close.discard.extend((0..4).map(|k| qk(p, k)));
            close.discard.push(relay(p));
        }
        c.push_local(close);
    }

    let mut p = Protocol::new(format!("tc-{n}"), QuditRegister::uniform(layout.num_qubits(), 2), c);
    let keys: Vec<EntryKey> = layout.a.iter().map(|p| EntryKey::anc(p.qubits[0], 0)).collect();
    let lay = layout.clone();
    let ks = keys.clone();
    let correction = Arc::new(move |rec: &OutcomeRecord| -> Result<Vec<Gate>> {
        let k = ks.iter().map(|e| Ok(if rec.require(e)? == 0 { 1 } else { -1 })).collect::<Result<Vec<i8>>>()?;
        Ok(find_tc_correction(&lay, &k)?.into_iter().map(|q| Gate::named(CliffordGate::Z, vec![EntryKey::sys(q)])).collect())
    });
    p.push_round(Round::new(LocalLayer::default(), keys.into_iter().map(MeasurementSpec::z).collect(), Some(correction)));
    Ok((p, Target::ToricCode(layout)))
}

/// `prod_p (1 + X_p)|0...0>`, normalized.
pub fn toric_code_state(layout: &ToricCodeLayout) -> Result<PureState> {
    let m = layout.num_qubits();
    crate::capacity::check_amplitudes("toric code state", 1u128 << m)?;
    let mut amps = vec![ZERO; 1 << m];
    amps[0] = ONE;
    for p in &layout.a {
        let mask = p.qubits.iter().fold(0usize, |acc, &q| acc | 1 << (m - 1 - q));
        let prev = amps.clone();
        for (i, a) in amps.iter_mut().enumerate() {
            *a += prev[i ^ mask];
        }
    }
    PureState::from_unnormalized(QuditRegister::uniform(m, 2), amps)
}

/// Independent `X_p` together with the `Z` strings commuting with all of them.
pub fn toric_code_tableau(layout: &ToricCodeLayout) -> Result<TableauState> {
    let m = layout.num_qubits();
    let xs = (0..layout.a.len()).map(|i| layout.x_string(i)).collect::<Result<Vec<_>>>()?;
    let mut gens = Tableau::independent_subset(&xs);
    for v in layout.incidence().kernel() {
        let support: Vec<usize> = (0..m).filter(|&q| v[q]).collect();
        gens.push(PauliString::on(m, &support, 'Z')?);
    }
    TableauState::from_tableau(Tableau::from_generators(gens)?, (0..m).map(EntryKey::sys).collect())
}
