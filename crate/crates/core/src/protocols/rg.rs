use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{merge_rounds, need, subspace_csum, subspace_shift, Target};
use crate::circuits::{Circuit, Gate, LocalLayer};
use crate::error::{invalid, Result};
use crate::gates::csum;
use crate::io::{vec_from_json, vec_to_json, JsonComplex};
use crate::lattice::Lattice;
use crate::linalg::{complete_to_unitary, fourier_matrix, CMat, ZERO};
use crate::locc::{teleport_round, MeasurementSpec, OutcomeRecord, Protocol, Round};
use crate::statevector::{Entry, EntryKey, PureState, QuditRegister};
use crate::C64;

/// `sum_k alpha_k (x)_n |k>_{C_n} |psi>_{R_n, L_{n+1}}` on a ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct RGFixedPointSpec {
    pub alphas: Vec<C64>,
    /// On `R (x) L`, `R` slowest-varying.
    pub bond_state: Vec<C64>,
    /// Dimension of each of `L` and `R`.
    pub bond_dim: usize,
    /// Dimension of the `C` qudits; at least the number of terms.
    pub center_dim: usize,
    pub n: usize,
    /// Optional bond state per term, replacing `bond_state` when the pair
    /// is prepared conditioned on the center value.
    pub term_bond_states: Option<Vec<Vec<C64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    alphas: Vec<JsonComplex>,
    bond_state: Vec<JsonComplex>,
    bond_dim: usize,
    #[serde(default)]
    center_dim: Option<usize>,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    term_bond_states: Option<Vec<Vec<JsonComplex>>>,
}

impl TryFrom<SpecFile> for RGFixedPointSpec {
    type Error = crate::Error;
    fn try_from(f: SpecFile) -> Result<Self> {
        let alphas = vec_from_json(&f.alphas);
        let center_dim = f.center_dim.unwrap_or(alphas.len().max(2));
        let spec = RGFixedPointSpec::new(alphas, vec_from_json(&f.bond_state), f.bond_dim, center_dim, f.n)?;
        match f.term_bond_states {
            Some(t) => spec.with_term_bond_states(t.iter().map(|v| vec_from_json(v)).collect()),
            None => Ok(spec),
        }
    }
}

impl From<RGFixedPointSpec> for SpecFile {
    fn from(s: RGFixedPointSpec) -> Self {
        SpecFile {
            alphas: vec_to_json(&s.alphas),
            bond_state: vec_to_json(&s.bond_state),
            bond_dim: s.bond_dim,
            center_dim: Some(s.center_dim),
            n: s.n,
            term_bond_states: s.term_bond_states.map(|t| t.iter().map(|v| vec_to_json(v)).collect()),
        }
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl RGFixedPointSpec {
    pub fn new(alphas: Vec<C64>, bond_state: Vec<C64>, bond_dim: usize, center_dim: usize, n: usize) -> Result<Self> {
        need(!alphas.is_empty(), "at least one superposition term required")?;
        need((norm(&alphas) - 1.0).abs() <= 1e-10, "alphas must be normalized")?;
        need((norm(&bond_state) - 1.0).abs() <= 1e-10, "bond state must be normalized")?;
        need(bond_dim >= 2, "bond dimension must be >= 2")?;
        if bond_state.len() != bond_dim * bond_dim {
            return invalid(format!("bond state has {} entries, expected {}", bond_state.len(), bond_dim * bond_dim));
        }
        if center_dim < alphas.len() || center_dim < 2 {
            return invalid(format!("{} terms do not fit center qudits of dimension {center_dim}", alphas.len()));
        }
        need(n >= 2, "RG protocol needs N >= 2")?;
        Ok(RGFixedPointSpec { alphas, bond_state, bond_dim, center_dim, n, term_bond_states: None })
    }

    pub fn with_term_bond_states(mut self, states: Vec<Vec<C64>>) -> Result<Self> {
        if states.len() != self.terms() {
            return invalid(format!("{} bond states for {} terms", states.len(), self.terms()));
        }
        for s in &states {
            need(s.len() == self.bond_dim * self.bond_dim, "term bond state has the wrong length")?;
            need((norm(s) - 1.0).abs() <= 1e-10, "term bond states must be normalized")?;
        }
        self.term_bond_states = Some(states);
        Ok(self)
    }

    /// Bond state attached to term `k`.
    pub fn bond(&self, k: usize) -> &[C64] {
        match &self.term_bond_states {
            Some(t) => &t[k],
            None => &self.bond_state,
        }
    }

    pub fn terms(&self) -> usize {
        self.alphas.len()
    }

    /// Register `C_n, L_n, R_n` per site.
    pub fn register(&self) -> QuditRegister {
        let mut v = Vec::with_capacity(3 * self.n);
        for j in 0..self.n {
            v.push(Entry::new(c_key(j), self.center_dim));
            v.push(Entry::new(l_key(j), self.bond_dim));
            v.push(Entry::new(r_key(j), self.bond_dim));
        }
        QuditRegister::new(v).expect("distinct keys")
    }
}

fn c_key(j: usize) -> EntryKey {
    EntryKey::sys_k(j, 0)
}
fn l_key(j: usize) -> EntryKey {
    EntryKey::sys_k(j, 1)
}
fn r_key(j: usize) -> EntryKey {
    EntryKey::sys_k(j, 2)
}

fn column_unitary(v: &[C64]) -> Result<CMat> {
    complete_to_unitary(&CMat::from_column_slice(v.len(), 1, v), &[0])
}

/// Four gate layers: Bell pairs `R'_n - L_{n+1}` (two layers), then the
/// GHZ-type pairs `C_n - C'_{n+1}` (two layers). LOCC rounds then fix the
/// center qudits to a common value and teleport `L'_n` into `L_{n+1}`.
pub fn rg_fixed_point_protocol(spec: &RGFixedPointSpec) -> Result<(Protocol, Target)> {
    let n = spec.n;
    let (b, dc, dd) = (spec.terms(), spec.center_dim, spec.bond_dim);
    let lat = Lattice::chain(n, dc.max(dd))?;
    let cp = |j| EntryKey::anc(j, 0);
    let lp = |j| EntryKey::anc(j, 1);
    let rp = |j| EntryKey::anc(j, 2);

    let mut create = Vec::new();
    for j in 0..n {
        create.push(Entry::new(cp(j), dc));
        create.push(Entry::new(lp(j), dd));
        create.push(Entry::new(rp(j), dd));
    }
    let mut uniform = vec![ZERO; dc];
    uniform[..b].iter_mut().for_each(|x| *x = C64::new(1.0 / (b as f64).sqrt(), 0.0));
    let mut alpha = vec![ZERO; dc];
    alpha[..b].copy_from_slice(&spec.alphas);
    let mut ops: Vec<Gate> = (0..n).map(|j| Gate::matrix(vec![rp(j)], fourier_matrix(dd))).collect();
    ops.push(Gate::matrix(vec![c_key(0)], column_unitary(&alpha)?));
    for j in 1..n {
        ops.push(Gate::matrix(vec![c_key(j)], column_unitary(&uniform)?));
    }
    let mut c = Circuit::new(lat);
    c.push_local(LocalLayer { create, ops, discard: vec![] });
    for parity in 0..2 {
        c.push_gates(
            (0..n)
                .filter(|j| j % 2 == parity)
                .map(|j| Gate::matrix(vec![rp(j), l_key((j + 1) % n)], csum(dd, 1)))
                .collect(),
        );
    }
    for parity in 0..2 {
        c.push_gates(
            (0..n - 1)
                .filter(|j| j % 2 == parity)
                .map(|j| Gate::matrix(vec![c_key(j), cp(j + 1)], subspace_csum(dc, b, 1)))
                .collect(),
        );
    }

    let mut p = Protocol::new(format!("rg-{n}"), spec.register(), c);
    // C'_j holds k_{j-1} - k_j (mod B); shifting C_j by the partial sums aligns every center with k_0.
    let correction = Arc::new(move |rec: &OutcomeRecord| -> Result<Vec<Gate>> {
        let mut out = Vec::new();
        let mut acc = 0i64;
        for j in 1..n {
            acc += rec.require(&cp(j))? as i64;
            if acc.rem_euclid(b as i64) != 0 {
                out.push(Gate::matrix(vec![c_key(j)], subspace_shift(dc, b, acc)));
            }
        }
        Ok(out)
    });
    p.push_round(Round::new(
        LocalLayer::ops((1..n).map(|j| Gate::matrix(vec![c_key(j), cp(j)], subspace_csum(dc, b, -1))).collect()),
        (1..n).map(|j| MeasurementSpec::z(cp(j))).collect(),
        Some(correction),
    ));
    let prep_gate: Box<dyn Fn(usize) -> Gate> = match &spec.term_bond_states {
        None => {
            let psi = column_unitary(&spec.bond_state)?;
            Box::new(move |j| Gate::matrix(vec![r_key(j), lp(j)], psi.clone()))
        }
        Some(states) => {
            // |k>|0>|0> -> |k>|psi_k>, identity on unused center levels
            let pair = dd * dd;
            let mut m = CMat::identity(dc * pair, dc * pair);
            for (k, st) in states.iter().enumerate() {
                let w = column_unitary(st)?;
                m.view_mut((k * pair, k * pair), (pair, pair)).copy_from(&w);
            }
            Box::new(move |j| Gate::matrix(vec![c_key(j), r_key(j), lp(j)], m.clone()))
        }
    };
    let mut teleports = Vec::with_capacity(n);
    let mut prep = Vec::with_capacity(n);
    for j in 0..n {
        prep.push(prep_gate(j));
        teleports.push(teleport_round(lp(j), rp(j), l_key((j + 1) % n), dd));
    }
    let mut round = merge_rounds(teleports);
    prep.append(&mut round.local.ops);
    round.local.ops = prep;
    p.push_round(round);
    Ok((p, Target::Rg(spec.clone())))
}

/// The state built directly from its defining sum.
pub fn rg_fixed_point_state(spec: &RGFixedPointSpec) -> Result<PureState> {
    let reg = spec.register();
    crate::capacity::check_amplitudes("RG fixed point", reg.total_dim())?;
    let n = spec.n;
    let (dc, dd) = (spec.center_dim, spec.bond_dim);
    let per = dc * dd * dd;
    let total = per.pow(n as u32);
    let mut amps = vec![ZERO; total];
    let mut digits = vec![0usize; 3 * n];
    for (idx, amp) in amps.iter_mut().enumerate() {
        let mut rest = idx;
        for k in (0..3 * n).rev() {
            let d = if k % 3 == 0 { dc } else { dd };
            digits[k] = rest % d;
            rest /= d;
        }
        let k0 = digits[0];
        if k0 >= spec.terms() || (0..n).any(|j| digits[3 * j] != k0) {
            continue;
        }
        let mut a = spec.alphas[k0];
        let bond = spec.bond(k0);
        for j in 0..n {
            let rj = digits[3 * j + 2];
            let lnext = digits[3 * ((j + 1) % n) + 1];
            a *= bond[rj * dd + lnext];
        }
        *amp = a;
    }
    PureState::from_amplitudes(reg, amps)
}
