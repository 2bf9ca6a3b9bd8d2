//! The measurement and feed-forward layer: protocols, outcome records,
//! branch enumeration and determinism certification.

mod channel;
mod teleport;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::DEFAULT_MAX_BRANCHES;
use crate::circuits::{check_local_gate, run_local, Backend, Basis, Circuit, Gate, LocalLayer};
use crate::error::{invalid, Error, Result};
use crate::statevector::{EntryKey, Measure, QuditRegister, PROB_FLOOR};

pub use channel::{as_channel, Channel, Ensemble};
pub use teleport::{teleport, teleport_branch, teleport_round};

/// Fidelity below `1 - DETERMINISM_TOL` counts as a different output.
pub const DETERMINISM_TOL: f64 = 1e-9;

/// Maps the outcomes recorded so far to local correction gates.
pub type CorrectionFn = Arc<dyn Fn(&OutcomeRecord) -> Result<Vec<Gate>> + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSpec {
    pub entry: EntryKey,
    pub basis: Basis,
}

impl MeasurementSpec {
    pub fn z(entry: EntryKey) -> Self {
        MeasurementSpec { entry, basis: Basis::Z }
    }

    pub fn x(entry: EntryKey) -> Self {
        MeasurementSpec { entry, basis: Basis::X }
    }
}

/// Local operations, then measurements, then an outcome-dependent correction.
#[derive(Clone, Default)]
pub struct Round {
    pub local: LocalLayer,
    pub measurements: Vec<MeasurementSpec>,
    pub correction: Option<CorrectionFn>,
}

impl fmt::Debug for Round {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Round")
            .field("local", &self.local)
            .field("measurements", &self.measurements)
            .field("correction", &self.correction.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl Round {
    pub fn new(local: LocalLayer, measurements: Vec<MeasurementSpec>, correction: Option<CorrectionFn>) -> Self {
        Round { local, measurements, correction }
    }
}

/// A circuit followed by rounds of local measurement and correction.
///
/// Every ancilla left at the end must be decoupled; it is discarded.
#[derive(Clone, Debug)]
pub struct Protocol {
    pub name: String,
    /// Register of the input state.
    pub initial: QuditRegister,
    pub circuit: Circuit,
    pub rounds: Vec<Round>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub entry: EntryKey,
    pub outcome: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub outcomes: Vec<Outcome>,
}

impl OutcomeRecord {
    pub fn get(&self, entry: &EntryKey) -> Option<usize> {
        self.outcomes.iter().find(|o| o.entry == *entry).map(|o| o.outcome)
    }

    /// Like [`OutcomeRecord::get`] but a missing entry is an error.
    pub fn require(&self, entry: &EntryKey) -> Result<usize> {
        self.get(entry).ok_or_else(|| Error::Register(format!("no outcome recorded for {entry}")))
    }

    pub fn probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).product()
    }

    pub fn bits(&self) -> Vec<usize> {
        self.outcomes.iter().map(|o| o.outcome).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub record: OutcomeRecord,
    pub branch_probability: f64,
    /// Fidelity to the target when one is given, else to the first branch.
    pub post_correction_fidelity: f64,
    pub fidelity_to_first: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    Deterministic,
    NotDeterministic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub n_branches: usize,
    pub total_probability: f64,
    pub min_fidelity: f64,
    pub max_fidelity: f64,
    /// `Some(true)` when every branch matches the target.
    pub target_matched: Option<bool>,
    pub branches: Vec<BranchReport>,
}

impl Verdict {
    pub fn is_deterministic(&self) -> bool {
        self.verdict == VerdictKind::Deterministic
    }

    /// Deterministic and, if a target was given, equal to it.
    pub fn certified(&self) -> bool {
        self.is_deterministic() && self.target_matched != Some(false)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerateOptions {
    pub prob_floor: f64,
    pub max_branches: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { prob_floor: PROB_FLOOR, max_branches: DEFAULT_MAX_BRANCHES }
    }
}

/// Result of exhaustive exploration; `representative` is the first branch's output.
#[derive(Clone, Debug)]
pub struct Enumeration<B> {
    pub verdict: Verdict,
    pub representative: B,
}

impl Protocol {
    pub fn new(name: impl Into<String>, initial: QuditRegister, circuit: Circuit) -> Self {
        Protocol { name: name.into(), initial, circuit, rounds: Vec::new() }
    }

    pub fn push_round(&mut self, round: Round) {
        self.rounds.push(round);
    }

    /// Depth of the entangling circuit.
    pub fn depth(&self) -> usize {
        self.circuit.depth()
    }

    pub fn num_measurements(&self) -> usize {
        self.rounds.iter().map(|r| r.measurements.len()).sum()
    }

    /// Structural checks: the circuit, every round's local layer, and single measurements.
    pub fn validate(&self) -> Result<()> {
        let mut reg = self.circuit.final_register(&self.initial)?;
        let mut measured = HashSet::new();
        for (ri, round) in self.rounds.iter().enumerate() {
            let mut c = Circuit::new(self.circuit.lattice.clone());
            c.push_local(round.local.clone());
            reg = c.final_register(&reg).map_err(|e| Error::Invalid(format!("round {ri}: {e}")))?;
            for m in &round.measurements {
                if !reg.contains(&m.entry) {
                    return invalid(format!("round {ri}: measured entry {} does not exist", m.entry));
                }
                if !measured.insert(m.entry) {
                    return invalid(format!("round {ri}: entry {} measured twice", m.entry));
                }
            }
        }
        Ok(())
    }

    /// Register of the output, after ancillas are discarded.
    pub fn output_register(&self) -> Result<QuditRegister> {
        let mut reg = self.circuit.final_register(&self.initial)?;
        for round in &self.rounds {
            let mut c = Circuit::new(self.circuit.lattice.clone());
            c.push_local(round.local.clone());
            reg = c.final_register(&reg)?;
        }
        for k in reg.keys() {
            if k.is_ancilla() {
                reg.remove(&k);
            }
        }
        Ok(reg)
    }

    fn check_input<B: Backend>(&self, input: &B) -> Result<()> {
        let mut a = input.register().keys();
        let mut b = self.initial.keys();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::Register(format!("input register does not match protocol {}", self.name)));
        }
        Ok(())
    }
}

fn apply_correction<B: Backend>(round: &Round, record: &OutcomeRecord, state: &mut B) -> Result<()> {
    if let Some(f) = &round.correction {
        for g in f(record)? {
            check_local_gate(&g)?;
            state.apply_gate(&g)?;
        }
    }
    Ok(())
}

fn discard_ancillas<B: Backend>(state: &mut B) -> Result<()> {
    for k in state.register().keys() {
        if k.is_ancilla() {
            state.discard(&k)?;
        }
    }
    Ok(())
}

/// Runs the protocol once, sampling outcomes from a seeded generator.
pub fn run_sampled<B: Backend>(protocol: &Protocol, input: &B, seed: u64) -> Result<(B, OutcomeRecord)> {
    protocol.validate()?;
    protocol.check_input(input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = input.clone();
    protocol.circuit.run(&mut state)?;
    let mut record = OutcomeRecord::default();
    for round in &protocol.rounds {
        run_local(&round.local, &mut state)?;
        for m in &round.measurements {
            let (outcome, probability) = state.measure(&m.entry, &m.basis, Measure::Sample(&mut rng))?;
            record.outcomes.push(Outcome { entry: m.entry, outcome, probability });
        }
        apply_correction(round, &record, &mut state)?;
    }
    discard_ancillas(&mut state)?;
    Ok((state, record))
}

/// Runs the protocol with every outcome prescribed; `outcomes` lists them in schedule order.
pub fn run_forced<B: Backend>(protocol: &Protocol, input: &B, outcomes: &[usize]) -> Result<(B, OutcomeRecord)> {
    protocol.validate()?;
    protocol.check_input(input)?;
    if outcomes.len() != protocol.num_measurements() {
        return invalid(format!("{} outcomes given, protocol has {} measurements", outcomes.len(), protocol.num_measurements()));
    }
    let mut state = input.clone();
    protocol.circuit.run(&mut state)?;
    let mut record = OutcomeRecord::default();
    let mut it = outcomes.iter();
    for round in &protocol.rounds {
        run_local(&round.local, &mut state)?;
        for m in &round.measurements {
            let k = *it.next().expect("length checked");
            let (outcome, probability) = state.measure(&m.entry, &m.basis, Measure::Force(k))?;
            record.outcomes.push(Outcome { entry: m.entry, outcome, probability });
        }
        apply_correction(round, &record, &mut state)?;
    }
    discard_ancillas(&mut state)?;
    Ok((state, record))
}

struct Leaf<B> {
    record: OutcomeRecord,
    state: B,
}

struct Explorer<'a, B: Backend> {
    protocol: &'a Protocol,
    opts: EnumerateOptions,
    leaves: usize,
    sink: &'a mut dyn FnMut(Leaf<B>) -> Result<()>,
}

impl<B: Backend> Explorer<'_, B> {
    fn explore(&mut self, mut state: B, round: usize, meas: usize, record: OutcomeRecord) -> Result<()> {
        let rounds = &self.protocol.rounds;
        if round == rounds.len() {
            discard_ancillas(&mut state)?;
            if self.leaves >= self.opts.max_branches {
                return Err(Error::BranchCap(self.opts.max_branches));
            }
            self.leaves += 1;
            return (self.sink)(Leaf { record, state });
        }
        let r = &rounds[round];
        if meas == 0 {
            run_local(&r.local, &mut state)?;
        }
        if meas == r.measurements.len() {
            apply_correction(r, &record, &mut state)?;
            return self.explore(state, round + 1, 0, record);
        }
        let m = &r.measurements[meas];
        let probs = state.probabilities(&m.entry, &m.basis)?;
        let alive: Vec<usize> = (0..probs.len()).filter(|&k| probs[k] > self.opts.prob_floor).collect();
        for (n, &k) in alive.iter().enumerate() {
            let mut s = if n + 1 == alive.len() { std::mem::replace(&mut state, B::zeros(&QuditRegister::default())?) } else { state.clone() };
            let (outcome, probability) = s.measure(&m.entry, &m.basis, Measure::Force(k))?;
            let mut rec = record.clone();
            rec.outcomes.push(Outcome { entry: m.entry, outcome, probability });
            self.explore(s, round, meas + 1, rec)?;
        }
        Ok(())
    }
}

/// Visits every branch with probability above the floor, depth first in
/// increasing outcome order, handing each corrected output to `visit`.
pub fn for_each_branch<B: Backend>(
    protocol: &Protocol,
    input: &B,
    opts: EnumerateOptions,
    mut visit: impl FnMut(&OutcomeRecord, &B) -> Result<()>,
) -> Result<usize> {
    protocol.validate()?;
    protocol.check_input(input)?;
    let mut state = input.clone();
    protocol.circuit.run(&mut state)?;
    let mut sink = |leaf: Leaf<B>| visit(&leaf.record, &leaf.state);
    let mut ex = Explorer { protocol, opts, leaves: 0, sink: &mut sink };
    ex.explore(state, 0, 0, OutcomeRecord::default())?;
    Ok(ex.leaves)
}

/// Exhaustive branch exploration and determinism verdict.
pub fn enumerate_branches<B: Backend>(
    protocol: &Protocol,
    input: &B,
    target: Option<&B>,
    opts: EnumerateOptions,
) -> Result<Enumeration<B>> {
    let mut first: Option<B> = None;
    let mut branches = Vec::new();
    for_each_branch(protocol, input, opts, |record, state| {
        let to_first = match &first {
            None => {
                first = Some(state.clone());
                1.0
            }
            Some(f) => f.fidelity(state)?,
        };
        let fid = match target {
            Some(t) => t.fidelity(state)?,
            None => to_first,
        };
        branches.push(BranchReport {
            record: record.clone(),
            branch_probability: record.probability(),
            post_correction_fidelity: fid,
            fidelity_to_first: to_first,
        });
        Ok(())
    })?;
    let representative = first.ok_or_else(|| Error::Numerical("no branch above the probability floor".into()))?;
    let deterministic = branches.iter().all(|b| b.fidelity_to_first >= 1.0 - DETERMINISM_TOL);
    let fids = branches.iter().map(|b| b.post_correction_fidelity);
    let min_fidelity = fids.clone().fold(f64::INFINITY, f64::min);
    let max_fidelity = fids.fold(f64::NEG_INFINITY, f64::max);
    let verdict = Verdict {
        verdict: if deterministic { VerdictKind::Deterministic } else { VerdictKind::NotDeterministic },
        n_branches: branches.len(),
        total_probability: branches.iter().map(|b| b.branch_probability).sum(),
        min_fidelity,
        max_fidelity,
        target_matched: target.map(|_| min_fidelity >= 1.0 - DETERMINISM_TOL),
        branches,
    };
    Ok(Enumeration { verdict, representative })
}
