use std::collections::HashMap;
use std::sync::Arc;

use super::{block, bound_report, canonicalize, mps_amplitudes, rg_fixed_point_tensor, BoundReport, Canonical, Mps};
use crate::circuits::{Circuit, Gate, Layer, LocalLayer};
use crate::error::{invalid, Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{complete_to_unitary, polar_isometry, psd_sqrt, r, spectral_norm, CMat, ZERO};
use crate::locc::{as_channel, Channel, MeasurementSpec, Outcome, OutcomeRecord, Protocol, Round};
use crate::protocols::{rg_fixed_point_protocol, RGFixedPointSpec};
use crate::statevector::{Entry, EntryKey, PureState, QuditRegister, Slot};
use crate::C64;

/// Slot for entries passing through a site while a blocked gate is routed.
const ROUTE_SLOT: u16 = 40;
/// Slots `10 + t` hold the `t`-th qudit of a block at its anchor.
const GATHER_SLOT: u16 = 10;
/// Slots `50 + t` carry the `t`-th qudit of a block on its way to the anchor.
const GATHER_TRANSIT: u16 = 50;

/// Preparation of a normal or block-normal MPS on `n = M q` sites.
///
/// `prepare` is an LOCC protocol producing the RG fixed point on the blocked
/// chain, with the block at anchor site `j q`; `unblock` is a circuit that
/// gathers each block's qudits at its anchor, applies the isometry `V` and
/// returns them. The two compose as a [`Channel`].
#[derive(Clone, Debug)]
pub struct Theorem1Pipeline {
    pub q: usize,
    pub n: usize,
    pub m: usize,
    pub canonical: Canonical,
    pub spec: RGFixedPointSpec,
    /// `d^q x (B D^2)` isometry; column `(k, l, r)` maps the virtual pair of term `k`.
    pub isometry: CMat,
    /// `||V - [U_0 ... U_{B-1}]||`, nonzero when the blocks' isometries overlap.
    pub isometry_correction: f64,
    pub prepare: Protocol,
    pub unblock: Protocol,
    /// One report per normal block; `None` where the bound does not apply.
    pub reports: Vec<Option<BoundReport>>,
    d: usize,
    /// Per block: `(U_k, omega_k)` padded to bond dimension `D`.
    terms: Vec<(CMat, CMat)>,
}

impl Theorem1Pipeline {
    pub fn channel(&self) -> Channel {
        as_channel(&self.prepare).then(as_channel(&self.unblock))
    }

    pub fn depth(&self) -> usize {
        self.prepare.depth() + self.unblock.depth()
    }

    pub fn input(&self) -> Result<PureState> {
        Ok(PureState::zeros(QuditRegister::uniform(self.n, self.d)))
    }

    /// The state the pipeline prepares: `sum_k alpha_k psi_k` with
    /// `psi_k` the trace of the blocked tensors `V (1 (x) omega_k)`.
    pub fn approximant(&self) -> Result<PureState> {
        let dd = self.spec.bond_dim;
        let dq = self.isometry.nrows();
        let mut amps = vec![ZERO; dq.pow(self.m as u32)];
        for (k, (_, omega)) in self.terms.iter().enumerate() {
            let ts: Vec<CMat> = (0..dq)
                .map(|s| {
                    let v = CMat::from_fn(dd, dd, |l, rr| self.isometry[(s, (k * dd + l) * dd + rr)]);
                    v * omega
                })
                .collect();
            let a = mps_amplitudes(&Mps::new(ts)?, self.m)?;
            for (x, y) in amps.iter_mut().zip(a) {
                *x += self.spec.alphas[k] * y;
            }
        }
        PureState::from_unnormalized(QuditRegister::uniform(self.n, self.d), amps)
    }
}

/// Builds the two-stage preparation of `mps` on `n` sites, blocking by `q`.
pub fn theorem1_pipeline(mps: &Mps, q: usize, n: usize) -> Result<Theorem1Pipeline> {
    if q == 0 || n % q != 0 {
        return invalid(format!("N = {n} is not a multiple of q = {q}"));
    }
    let m = n / q;
    if m < 2 {
        return invalid("need at least two blocks");
    }
    let d = mps.d();
    let canonical = canonicalize(mps)?;
    if let Some(b) = canonical.blocks.iter().find(|b| b.tensor.normal != super::Normality::Yes) {
        return Err(Error::NotNormal(format!(
            "block of bond dimension {} is not normal; block by its period first",
            b.tensor.chi()
        )));
    }
    let nb = canonical.blocks.len();
    let dd = canonical.blocks.iter().map(|b| b.tensor.chi()).max().unwrap_or(1).max(2);

    let mut terms = Vec::with_capacity(nb);
    let mut reports = Vec::with_capacity(nb);
    for b in &canonical.blocks {
        let chi = b.tensor.chi();
        let fpt = rg_fixed_point_tensor(&block(&b.tensor, q)?)?;
        let mut u = CMat::zeros(fpt.u.nrows(), dd * dd);
        for l in 0..chi {
            for rr in 0..chi {
                u.set_column(l * dd + rr, &fpt.u.column(l * chi + rr));
            }
        }
        // bond state on (R, L) between neighbouring blocks
        let w = psd_sqrt(&fpt.points.left) * psd_sqrt(&fpt.points.right);
        let mut omega = CMat::zeros(dd, dd);
        omega.view_mut((0, 0), (chi, chi)).copy_from(&(&w / r(w.norm())));
        terms.push((u, omega));
        reports.push(bound_report(&b.tensor, q, m).ok());
    }

    let weights: Vec<f64> = canonical.blocks.iter().map(|b| b.mu.powi(n as i32)).collect();
    let wn = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let alphas: Vec<C64> = weights.iter().map(|w| r(w / wn)).collect();
    let bond_vec = |om: &CMat| -> Vec<C64> { (0..dd * dd).map(|k| om[(k / dd, k % dd)]).collect() };
    let bc = nb.max(2);
    let mut spec = RGFixedPointSpec::new(alphas, bond_vec(&terms[0].1), dd, bc, m)?;
    if nb > 1 {
        spec = spec.with_term_bond_states(terms.iter().map(|t| bond_vec(&t.1)).collect())?;
    }

    let dq = terms[0].0.nrows();
    let stacked = CMat::from_fn(dq, nb * dd * dd, |s, col| terms[col / (dd * dd)].0[(s, col % (dd * dd))]);
    // unused columns of the padding stay zero; only the support is orthonormalized
    let used: Vec<usize> = (0..stacked.ncols()).filter(|&c| stacked.column(c).norm() > 1e-12).collect();
    let sub = CMat::from_columns(&used.iter().map(|&c| stacked.column(c).into_owned()).collect::<Vec<_>>());
    let polar = polar_isometry(&sub);
    let mut isometry = CMat::zeros(dq, stacked.ncols());
    for (i, &c) in used.iter().enumerate() {
        isometry.set_column(c, &polar.column(i));
    }
    let isometry_correction = spectral_norm(&(&isometry - &stacked));

    let (rg, _) = rg_fixed_point_protocol(&spec)?;
    let prepare = compile_blocked(&rg, q, d)?;
    let unblock = unblock_stage(&prepare, &spec, &isometry, q, m, d)?;
    Ok(Theorem1Pipeline { q, n, m, canonical, spec, isometry, isometry_correction, prepare, unblock, reports, d, terms })
}

fn to_unblocked(k: EntryKey, q: usize) -> EntryKey {
    match k.slot {
        Slot::System(i) => EntryKey::sys_k(k.site * q, i + 1),
        Slot::Ancilla(i) => EntryKey::anc(k.site * q, i),
    }
}

fn to_blocked(k: EntryKey, q: usize) -> Option<EntryKey> {
    if k.site % q != 0 {
        return None;
    }
    match k.slot {
        Slot::System(0) => None,
        Slot::System(i) => Some(EntryKey::sys_k(k.site / q, i - 1)),
        Slot::Ancilla(i) => Some(EntryKey::anc(k.site / q, i)),
    }
}

fn map_gate(g: &Gate, q: usize) -> Gate {
    Gate { targets: g.targets.iter().map(|&k| to_unblocked(k, q)).collect(), kind: g.kind.clone() }
}

fn map_local(ll: &LocalLayer, q: usize) -> LocalLayer {
    LocalLayer {
        create: ll.create.iter().map(|e| Entry::new(to_unblocked(e.key, q), e.dim)).collect(),
        ops: ll.ops.iter().map(|g| map_gate(g, q)).collect(),
        discard: ll.discard.iter().map(|&k| to_unblocked(k, q)).collect(),
    }
}

/// Compiles a protocol on a chain of `M` blocks onto the chain of `M q` sites.
///
/// Block `j` lives at site `j q`; its system entries move up one slot to make
/// room for the physical qudit and are created in `|0>` at the start. A gate
/// between neighbouring blocks is applied after routing the left operand
/// through `q - 1` intermediate sites, and routed back afterwards.
pub fn compile_blocked(p: &Protocol, q: usize, d: usize) -> Result<Protocol> {
    let m = p.circuit.lattice.num_sites();
    let n = m * q;
    let mut dims: HashMap<EntryKey, usize> = p.initial.entries().iter().map(|e| (e.key, e.dim)).collect();
    let mut c = Circuit::new(Lattice::chain(n, d)?);
    c.push_local(LocalLayer {
        create: p.initial.entries().iter().map(|e| Entry::new(to_unblocked(e.key, q), e.dim)).collect(),
        ..Default::default()
    });
    for layer in &p.circuit.layers {
        match layer {
            Layer::Local(ll) => {
                dims.extend(ll.create.iter().map(|e| (e.key, e.dim)));
                c.push_local(map_local(ll, q));
            }
            Layer::Gates { gates } => route_layer(&mut c, gates, &dims, q, m)?,
        }
    }
    let mut out = Protocol::new(format!("{}-blocked-{q}", p.name), QuditRegister::uniform(n, d), c);
    for round in &p.rounds {
        let correction = round.correction.clone().map(|f| {
            let wrapped: crate::locc::CorrectionFn = Arc::new(move |rec: &OutcomeRecord| -> Result<Vec<Gate>> {
                let inner = OutcomeRecord {
                    outcomes: rec
                        .outcomes
                        .iter()
                        .filter_map(|o| to_blocked(o.entry, q).map(|entry| Outcome { entry, ..*o }))
                        .collect(),
                };
                Ok(f(&inner)?.iter().map(|g| map_gate(g, q)).collect())
            });
            wrapped
        });
        out.push_round(Round::new(
            map_local(&round.local, q),
            round.measurements.iter().map(|ms| MeasurementSpec { entry: to_unblocked(ms.entry, q), basis: ms.basis.clone() }).collect(),
            correction,
        ));
    }
    Ok(out)
}

fn route_layer(c: &mut Circuit, gates: &[Gate], dims: &HashMap<EntryKey, usize>, q: usize, m: usize) -> Result<()> {
    // (position of the routed target, its key) per gate
    let mut routed: Vec<Option<(usize, EntryKey)>> = Vec::with_capacity(gates.len());
    for g in gates {
        let sites = g.sites();
        match sites.len() {
            1 => routed.push(None),
            2 => {
                let pick = g.targets.iter().position(|t| {
                    let other = g.targets.iter().find(|u| u.site != t.site).expect("two sites");
                    (t.site + 1) % m == other.site
                });
                match pick {
                    Some(i) => routed.push(Some((i, g.targets[i]))),
                    None => return invalid("blocked gate joins non-neighbouring blocks"),
                }
            }
            _ => return invalid("blocked gate spans more than two blocks"),
        }
    }
    if q == 1 || routed.iter().all(Option::is_none) {
        c.push_gates(gates.iter().map(|g| map_gate(g, q)).collect());
        return Ok(());
    }
    let transit = |site: usize, t: usize| EntryKey::anc(site * q + t, ROUTE_SLOT);
    let mut open = LocalLayer::default();
    let mut close = LocalLayer::default();
    let mut seen = std::collections::HashSet::new();
    for (_, key) in routed.iter().flatten() {
        if !seen.insert(key.site) {
            return invalid("two routed operands leave the same block in one layer");
        }
        let dim = *dims.get(key).ok_or_else(|| Error::Register(format!("unknown entry {key}")))?;
        for t in 1..q {
            open.create.push(Entry::new(transit(key.site, t), dim));
            close.discard.push(transit(key.site, t));
        }
    }
    let step = |t: usize| -> Vec<Gate> {
        routed
            .iter()
            .flatten()
            .map(|(_, key)| {
                let from = if t == 1 { to_unblocked(*key, q) } else { transit(key.site, t - 1) };
                Gate::swap(from, transit(key.site, t))
            })
            .collect()
    };
    c.push_local(open);
    for t in 1..q {
        c.push_gates(step(t));
    }
    c.push_gates(
        gates
            .iter()
            .zip(&routed)
            .map(|(g, rt)| {
                let mut mg = map_gate(g, q);
                if let Some((i, key)) = rt {
                    mg.targets[*i] = transit(key.site, q - 1);
                }
                mg
            })
            .collect(),
    );
    for t in (1..q).rev() {
        c.push_gates(step(t));
    }
    c.push_local(close);
    Ok(())
}

/// Gathers each block at its anchor, applies `W: |k, l, r>|0> -> |0,0,0> V|k, l, r>`
/// and spreads the qudits back.
fn unblock_stage(prepare: &Protocol, spec: &RGFixedPointSpec, v: &CMat, q: usize, m: usize, d: usize) -> Result<Protocol> {
    let n = m * q;
    let (bc, dd) = (spec.center_dim, spec.bond_dim);
    let dq = v.nrows();
    let total = bc * dd * dd * dq;
    crate::capacity::check_amplitudes("unblocking gate", (total as u128) * (total as u128))?;
    let mut cols = CMat::zeros(total, v.ncols());
    let mut positions = Vec::with_capacity(v.ncols());
    for col in 0..v.ncols() {
        cols.view_mut((0, col), (dq, 1)).copy_from(&v.column(col));
        positions.push(col * dq);
    }
    // zero padding columns are completed arbitrarily
    let keep: Vec<usize> = (0..v.ncols()).filter(|&c| v.column(c).norm() > 0.5).collect();
    let cols = CMat::from_columns(&keep.iter().map(|&k| cols.column(k).into_owned()).collect::<Vec<_>>());
    let positions: Vec<usize> = keep.iter().map(|&k| positions[k]).collect();
    let w = complete_to_unitary(&cols, &positions)?;

    let slot = |h: usize, t: usize| if t == 0 { EntryKey::sys(h) } else { EntryKey::anc(h, GATHER_SLOT + t as u16) };
    let transit = |x: usize, t: usize| EntryKey::anc(x, GATHER_TRANSIT + t as u16);
    let anchors: Vec<usize> = (0..m).map(|j| j * q).collect();

    let mut open = LocalLayer::default();
    let mut close = LocalLayer::default();
    for &h in &anchors {
        for t in 1..q {
            open.create.push(Entry::new(slot(h, t), d));
            close.discard.push(slot(h, t));
            for x in h + 1..h + t {
                open.create.push(Entry::new(transit(x, t), d));
                close.discard.push(transit(x, t));
            }
        }
        close.discard.extend((1..=3).map(|i| EntryKey::sys_k(h, i)));
    }
    let step = |tau: usize| -> Vec<Gate> {
        let mut g = Vec::new();
        for &h in &anchors {
            for t in tau..q {
                let x = h + t - tau + 1;
                let from = if tau == 1 { EntryKey::sys(x) } else { transit(x, t) };
                let to = if x - 1 == h { slot(h, t) } else { transit(x - 1, t) };
                g.push(Gate::swap(from, to));
            }
        }
        g
    };
    let mut c = Circuit::new(Lattice::chain(n, d)?);
    c.push_local(open);
    for tau in 1..q {
        c.push_gates(step(tau));
    }
    let mut apply = LocalLayer::default();
    for &h in &anchors {
        let mut targets: Vec<EntryKey> = (1..=3).map(|i| EntryKey::sys_k(h, i)).collect();
        targets.extend((0..q).map(|t| slot(h, t)));
        apply.ops.push(Gate::matrix(targets, w.clone()));
    }
    c.push_local(apply);
    for tau in (1..q).rev() {
        c.push_gates(step(tau));
    }
    c.push_local(close);
    Ok(Protocol::new(format!("unblock-{q}"), prepare.output_register()?, c))
}
