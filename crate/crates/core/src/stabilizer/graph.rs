use serde::{Deserialize, Serialize};

use super::pauli::{CliffordOp, PauliString};
use super::tableau::Tableau;
use crate::error::{invalid, Error, Result};
use crate::gates::CliffordGate;

/// Graph state plus the local Cliffords that map some stabilizer state onto it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphState {
    pub adjacency: Vec<Vec<bool>>,
    /// Gates applied to qubit `v`, in order.
    pub local_cliffords: Vec<Vec<CliffordGate>>,
}

impl GraphState {
    pub fn from_adjacency(adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let n = adjacency.len();
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != n {
                return invalid("adjacency matrix must be square");
            }
            if row[i] {
                return invalid(format!("self loop on vertex {i}"));
            }
            if (0..n).any(|j| adjacency[j][i] != row[j]) {
                return invalid("adjacency matrix must be symmetric");
            }
        }
        Ok(GraphState { adjacency, local_cliffords: vec![Vec::new(); n] })
    }

    pub fn num_qubits(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.num_qubits()).filter(|&u| self.adjacency[v][u]).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.num_qubits();
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if self.adjacency[u][v] {
                    e.push((u, v));
                }
            }
        }
        e
    }

    /// Generators `X_v prod_{u ~ v} Z_u`.
    pub fn generator(&self, v: usize) -> PauliString {
        let n = self.num_qubits();
        let mut p = PauliString::single(n, v, 'X').expect("in range");
        for u in self.neighbors(v) {
            p.set_op(u, 'Z').expect("valid symbol");
        }
        p
    }

    pub fn tableau(&self) -> Tableau {
        Tableau::from_generators((0..self.num_qubits()).map(|v| self.generator(v)).collect())
            .expect("graph generators are independent and commute")
    }

    /// The local Cliffords as a gate list.
    pub fn local_ops(&self) -> Vec<CliffordOp> {
        let mut ops = Vec::new();
        for (v, gs) in self.local_cliffords.iter().enumerate() {
            for &g in gs {
                ops.push(CliffordOp::new(g, vec![v]));
            }
        }
        ops
    }

    /// Local complementation at `v`: toggles every edge inside the
    /// neighbourhood of `v` and records the local Cliffords
    /// `sqrt(X)^dag` on `v` and `sqrt(Z)` on its neighbours that map
    /// the old graph state to the new one.
    pub fn local_complement(&mut self, v: usize) -> Result<()> {
        if v >= self.num_qubits() {
            return invalid(format!("vertex {v} out of range {}", self.num_qubits()));
        }
        let nb = self.neighbors(v);
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                self.adjacency[a][b] ^= true;
                self.adjacency[b][a] ^= true;
            }
        }
        self.local_cliffords[v].extend([CliffordGate::H, CliffordGate::S, CliffordGate::H]);
        for u in nb {
            self.local_cliffords[u].push(CliffordGate::Sdg);
        }
        Ok(())
    }

    /// `prod_e CZ_e H^{⊗n}`, which maps `|0...0>` to this graph state.
    pub fn preparation_ops(&self) -> Vec<CliffordOp> {
        let mut ops: Vec<CliffordOp> = (0..self.num_qubits()).map(|v| CliffordOp::new(CliffordGate::H, vec![v])).collect();
        for (u, v) in self.edges() {
            ops.push(CliffordOp::new(CliffordGate::Cz, vec![u, v]));
        }
        ops
    }
}

fn eliminate(gens: &mut [PauliString], r: usize, col_bit: impl Fn(&PauliString) -> bool) {
    let p = gens[r].clone();
    for (i, g) in gens.iter_mut().enumerate() {
        if i != r && col_bit(g) {
            *g = g.mul(&p);
        }
    }
}

/// Local-Clifford reduction of a stabilizer state to graph form.
pub fn to_graph_state(tab: &Tableau) -> Result<GraphState> {
    let n = tab.num_qubits();
    let mut gens = tab.stabilizers().to_vec();
    let mut lc: Vec<Vec<CliffordGate>> = vec![Vec::new(); n];

    // X part to echelon form.
    let mut rank = 0;
    let mut xpiv = Vec::new();
    for col in 0..n {
        let Some(p) = (rank..n).find(|&i| gens[i].x(col)) else { continue };
        gens.swap(rank, p);
        eliminate(&mut gens, rank, |g| g.x(col));
        xpiv.push(col);
        rank += 1;
    }
    // Z-only rows; their pivots on non-pivot columns get a Hadamard.
    let mut r = rank;
    for col in (0..n).filter(|c| !xpiv.contains(c)) {
        let Some(p) = (r..n).find(|&i| gens[i].z(col)) else { continue };
        gens.swap(r, p);
        let pv = gens[r].clone();
        for g in gens[rank..].iter_mut().enumerate().filter(|(i, _)| *i + rank != r).map(|(_, g)| g) {
            if g.z(col) {
                *g = g.mul(&pv);
            }
        }
        lc[col].push(CliffordGate::H);
        r += 1;
    }
    for (q, ops) in lc.iter().enumerate() {
        if !ops.is_empty() {
            for g in gens.iter_mut() {
                g.conjugate_by(CliffordGate::H, &[q])?;
            }
        }
    }
    // X part to the identity.
    for col in 0..n {
        let p = (col..n)
            .find(|&i| gens[i].x(col))
            .ok_or_else(|| Error::Numerical("X part not full rank after Hadamards".into()))?;
        gens.swap(col, p);
        eliminate(&mut gens, col, |g| g.x(col));
    }
    for v in 0..n {
        if gens[v].z(v) {
            for g in gens.iter_mut() {
                g.conjugate_by(CliffordGate::Sdg, &[v])?;
            }
            lc[v].push(CliffordGate::Sdg);
        }
        if gens[v].sign() < 0 {
            for g in gens.iter_mut() {
                g.conjugate_by(CliffordGate::Z, &[v])?;
            }
            lc[v].push(CliffordGate::Z);
        }
    }
    let adjacency: Vec<Vec<bool>> = (0..n).map(|u| (0..n).map(|v| u != v && gens[u].z(v)).collect()).collect();
    let mut gs = GraphState::from_adjacency(adjacency)?;
    gs.local_cliffords = lc;
    Ok(gs)
}
