//! Layered circuits over a lattice, their validation and execution.

mod backend;
mod builders;
mod range;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::CliffordGate;
use crate::io::{mat_from_json, mat_to_json, JsonMatrix};
use crate::lattice::Lattice;
use crate::linalg::{unitarity_deviation, CMat};
use crate::statevector::{Entry, EntryKey, QuditRegister};

pub use backend::{Backend, Basis, TableauState};
pub use builders::{brickwork_pairs, build_shift_circuit, random_circuit, shift_unitary, ShiftCircuit};
pub use range::{circuit_unitary, estimate_range, operator_support};

/// Unitarity tolerance for gate matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    Named(CliffordGate),
    Matrix(CMat),
}

/// A gate on register entries; the first target is slowest-varying.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRecord", into = "GateRecord")]
pub struct Gate {
    pub targets: Vec<EntryKey>,
    pub kind: GateKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRecord {
    targets: Vec<EntryKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gate: Option<CliffordGate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<JsonMatrix>,
}

impl TryFrom<GateRecord> for Gate {
    type Error = Error;
    fn try_from(r: GateRecord) -> Result<Self> {
        let kind = match (r.gate, r.matrix) {
            (Some(g), None) => GateKind::Named(g),
            (None, Some(m)) => GateKind::Matrix(mat_from_json(&m)?),
            _ => return invalid("gate needs exactly one of `gate` or `matrix`"),
        };
        Ok(Gate { targets: r.targets, kind })
    }
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> Self {
        match g.kind {
            GateKind::Named(n) => GateRecord { targets: g.targets, gate: Some(n), matrix: None },
            GateKind::Matrix(m) => GateRecord { targets: g.targets, gate: None, matrix: Some(mat_to_json(&m)) },
        }
    }
}

impl Gate {
    pub fn named(gate: CliffordGate, targets: Vec<EntryKey>) -> Self {
        Gate { targets, kind: GateKind::Named(gate) }
    }

    pub fn matrix(targets: Vec<EntryKey>, m: CMat) -> Self {
        Gate { targets, kind: GateKind::Matrix(m) }
    }

    pub fn swap(a: EntryKey, b: EntryKey) -> Self {
        Gate::named(CliffordGate::Swap, vec![a, b])
    }

    pub fn sites(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.targets.iter().map(|k| k.site).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Dense matrix given the target dimensions.
    pub fn to_matrix(&self, dims: &[usize]) -> Result<CMat> {
        match &self.kind {
            GateKind::Matrix(m) => Ok(m.clone()),
            GateKind::Named(CliffordGate::Swap) if dims.len() == 2 => Ok(crate::gates::swap(dims[0], dims[1])),
            GateKind::Named(g) => {
                if dims.iter().any(|&d| d != 2) {
                    return invalid(format!("{g} needs qubit targets"));
                }
                Ok(g.matrix())
            }
        }
    }

    /// Inverse gate.
    pub fn inverse(&self) -> Gate {
        match &self.kind {
            GateKind::Named(g) => Gate::named(g.inverse(), self.targets.clone()),
            GateKind::Matrix(m) => Gate::matrix(self.targets.clone(), m.adjoint()),
        }
    }
}

/// Free local operations: new entries (in `|0>`), single-site gates, then removals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalLayer {
    #[serde(default)]
    pub create: Vec<Entry>,
    #[serde(default)]
    pub ops: Vec<Gate>,
    #[serde(default)]
    pub discard: Vec<EntryKey>,
}

impl LocalLayer {
    pub fn ops(ops: Vec<Gate>) -> Self {
        LocalLayer { ops, ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.create.is_empty() && self.ops.is_empty() && self.discard.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Layer {
    Gates { gates: Vec<Gate> },
    Local(LocalLayer),
}

/// Ordered layers on a lattice. Only gate layers count towards depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    pub lattice: Lattice,
    pub layers: Vec<Layer>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownEntry { entry: EntryKey },
    EntryReused { entry: EntryKey },
    NotNearestNeighbor { sites: Vec<usize> },
    NotLocal { sites: Vec<usize> },
    SiteOutOfRange { site: usize },
    NotUnitary { deviation: f64 },
    Dimension { expected: usize, found: usize },
    BadGate { message: String },
    DuplicateEntry { entry: EntryKey },
}

/// A structural problem found by [`Circuit::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub layer: usize,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "layer {}: ", self.layer)?;
        match &self.kind {
            ViolationKind::UnknownEntry { entry } => write!(f, "entry {entry} does not exist"),
            ViolationKind::EntryReused { entry } => write!(f, "entry {entry} used twice"),
            ViolationKind::NotNearestNeighbor { sites } => write!(f, "gate on sites {sites:?} is not nearest-neighbour"),
            ViolationKind::NotLocal { sites } => write!(f, "local op spans sites {sites:?}"),
            ViolationKind::SiteOutOfRange { site } => write!(f, "site {site} outside the lattice"),
            ViolationKind::NotUnitary { deviation } => write!(f, "gate not unitary (deviation {deviation:.2e})"),
            ViolationKind::Dimension { expected, found } => write!(f, "matrix dimension {found}, support needs {expected}"),
            ViolationKind::BadGate { message } => f.write_str(message),
            ViolationKind::DuplicateEntry { entry } => write!(f, "entry {entry} already exists"),
        }
    }
}

impl Circuit {
    pub fn new(lattice: Lattice) -> Self {
        Circuit { lattice, layers: Vec::new() }
    }

    pub fn push_gates(&mut self, gates: Vec<Gate>) {
        self.layers.push(Layer::Gates { gates });
    }

    pub fn push_local(&mut self, layer: LocalLayer) {
        self.layers.push(Layer::Local(layer));
    }

    /// Number of non-empty gate layers.
    pub fn depth(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Gates { gates } if !gates.is_empty())).count()
    }

    /// Total gate count over all layers.
    pub fn gate_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Gates { gates } => gates.len(),
                Layer::Local(ll) => ll.ops.len(),
            })
            .sum()
    }

    /// Checks every layer against the register as it evolves from `initial`.
    pub fn validate(&self, initial: &QuditRegister) -> Vec<Violation> {
        let mut reg = initial.clone();
        let mut out = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut push = |kind| out.push(Violation { layer: li, kind });
            match layer {
                Layer::Gates { gates } => {
                    let mut used = HashSet::new();
                    for g in gates {
                        check_gate(&self.lattice, &reg, g, false, &mut used, &mut push);
                    }
                }
                Layer::Local(ll) => {
                    for e in &ll.create {
                        if e.key.site >= self.lattice.num_sites() {
                            push(ViolationKind::SiteOutOfRange { site: e.key.site });
                        } else if reg.push(*e).is_err() {
                            push(ViolationKind::DuplicateEntry { entry: e.key });
                        }
                    }
                    let mut used = HashSet::new();
                    for g in &ll.ops {
                        used.clear();
                        check_gate(&self.lattice, &reg, g, true, &mut used, &mut push);
                    }
                    for k in &ll.discard {
                        if reg.remove(k).is_none() {
                            push(ViolationKind::UnknownEntry { entry: *k });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn check(&self, initial: &QuditRegister) -> Result<()> {
        let v = self.validate(initial);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Circuit(v))
        }
    }

    /// Register after all layers, assuming the circuit is valid.
    pub fn final_register(&self, initial: &QuditRegister) -> Result<QuditRegister> {
        self.check(initial)?;
        let mut reg = initial.clone();
        for layer in &self.layers {
            if let Layer::Local(ll) = layer {
                for e in &ll.create {
                    reg.push(*e)?;
                }
                for k in &ll.discard {
                    reg.remove(k);
                }
            }
        }
        Ok(reg)
    }

    /// Applies every layer to `state`, validating against its register first.
    pub fn run<B: Backend>(&self, state: &mut B) -> Result<()> {
        self.check(&state.register())?;
        for layer in &self.layers {
            match layer {
                Layer::Gates { gates } => {
                    for g in gates {
                        state.apply_gate(g)?;
                    }
                }
                Layer::Local(ll) => run_local(ll, state)?,
            }
        }
        Ok(())
    }
}

/// Applies a local layer without validation.
pub fn run_local<B: Backend>(ll: &LocalLayer, state: &mut B) -> Result<()> {
    for e in &ll.create {
        state.create(*e)?;
    }
    for g in &ll.ops {
        state.apply_gate(g)?;
    }
    for k in &ll.discard {
        state.discard(k)?;
    }
    Ok(())
}

/// Checks that `op` acts on entries of a single site (used for corrections).
pub fn check_local_gate(g: &Gate) -> Result<()> {
    let s = g.sites();
    if s.len() > 1 {
        return invalid(format!("correction gate spans sites {s:?}"));
    }
    Ok(())
}

fn check_gate(
    lat: &Lattice,
    reg: &QuditRegister,
    g: &Gate,
    local: bool,
    used: &mut HashSet<EntryKey>,
    push: &mut impl FnMut(ViolationKind),
) {
    if g.targets.is_empty() {
        push(ViolationKind::BadGate { message: "gate without targets".into() });
        return;
    }
    let mut dims = Vec::new();
    for k in &g.targets {
        match reg.dim_of(k) {
            Some(d) => dims.push(d),
            None => {
                push(ViolationKind::UnknownEntry { entry: *k });
                return;
            }
        }
        if !used.insert(*k) {
            push(ViolationKind::EntryReused { entry: *k });
        }
    }
    let sites = g.sites();
    if let Some(&s) = sites.iter().find(|&&s| s >= lat.num_sites()) {
        push(ViolationKind::SiteOutOfRange { site: s });
        return;
    }
    if local && sites.len() > 1 {
        push(ViolationKind::NotLocal { sites: sites.clone() });
    }
    if !local && (sites.len() > 2 || (sites.len() == 2 && lat.site_distance(sites[0], sites[1]) > 1)) {
        push(ViolationKind::NotNearestNeighbor { sites: sites.clone() });
    }
    let expected: usize = dims.iter().product();
    match &g.kind {
        GateKind::Matrix(m) => {
            if m.nrows() != expected || m.ncols() != expected {
                push(ViolationKind::Dimension { expected, found: m.nrows() });
                return;
            }
            let dev = unitarity_deviation(m);
            if dev > UNITARY_TOL {
                push(ViolationKind::NotUnitary { deviation: dev });
            }
        }
        GateKind::Named(n) => {
            if g.targets.len() != n.arity() {
                push(ViolationKind::BadGate { message: format!("{n} takes {} targets", n.arity()) });
            } else if *n == CliffordGate::Swap {
                if dims[0] != dims[1] {
                    push(ViolationKind::BadGate { message: "SWAP of entries with different dimensions".into() });
                }
            } else if dims.iter().any(|&d| d != 2) {
                push(ViolationKind::BadGate { message: format!("{n} needs qubit targets") });
            }
        }
    }
}
