//! Constructors for the preparation protocols: GHZ, W, RG fixed points and the toric code.

mod ghz;
mod rg;
mod toric;
mod w;

use std::sync::Arc;

use crate::circuits::{Gate, LocalLayer, TableauState};
use crate::error::{invalid, Result};
use crate::gates::permutation;
use crate::linalg::CMat;
use crate::locc::{OutcomeRecord, Round};
use crate::statevector::PureState;

pub use ghz::{ghz_protocol, ghz_state, ghz_tableau};
pub use rg::{rg_fixed_point_protocol, rg_fixed_point_state, RGFixedPointSpec};
pub use toric::{find_tc_correction, toric_code_protocol, toric_code_state, toric_code_tableau, ToricCodeLayout};
pub use w::{w_protocol, w_rotation, w_state, w_z_sequence};

/// The state a protocol is meant to prepare, built on demand.
#[derive(Clone, Debug)]
pub enum Target {
    Ghz(usize),
    W(usize),
    Rg(RGFixedPointSpec),
    ToricCode(ToricCodeLayout),
}

impl Target {
    pub fn dense(&self) -> Result<PureState> {
        match self {
            Target::Ghz(n) => ghz_state(*n),
            Target::W(n) => w_state(*n),
            Target::Rg(spec) => rg_fixed_point_state(spec),
            Target::ToricCode(l) => toric_code_state(l),
        }
    }

    pub fn tableau(&self) -> Result<TableauState> {
        match self {
            Target::Ghz(n) => ghz_tableau(*n),
            Target::ToricCode(l) => toric_code_tableau(l),
            Target::W(_) | Target::Rg(_) => {
                Err(crate::Error::NonClifford("the W and RG targets are not stabilizer states".into()))
            }
        }
    }
}

/// `|j> -> |j + k mod b>` on the first `b` levels of a `d`-level qudit, identity above.
pub fn subspace_shift(d: usize, b: usize, k: i64) -> CMat {
    let perm: Vec<usize> = (0..d).map(|j| if j < b { (j as i64 + k).rem_euclid(b as i64) as usize } else { j }).collect();
    permutation(&perm)
}

/// `|x, y> -> |x, y + sign*x mod b>` when both lie in the first `b` levels, identity otherwise.
pub fn subspace_csum(d: usize, b: usize, sign: i64) -> CMat {
    let perm: Vec<usize> = (0..d * d)
        .map(|j| {
            let (x, y) = (j / d, j % d);
            if x < b && y < b {
                x * d + (y as i64 + sign * x as i64).rem_euclid(b as i64) as usize
            } else {
                j
            }
        })
        .collect();
    permutation(&perm)
}

/// Runs several rounds as one: local layers concatenated, then all measurements,
/// then every correction.
pub fn merge_rounds(rounds: Vec<Round>) -> Round {
    let mut local = LocalLayer::default();
    let mut measurements = Vec::new();
    let mut fns = Vec::new();
    for r in rounds {
        local.create.extend(r.local.create);
        local.ops.extend(r.local.ops);
        local.discard.extend(r.local.discard);
        measurements.extend(r.measurements);
        fns.extend(r.correction);
    }
    let correction = if fns.is_empty() {
        None
    } else {
        let f: crate::locc::CorrectionFn = Arc::new(move |rec: &OutcomeRecord| -> Result<Vec<Gate>> {
            let mut out = Vec::new();
            for f in &fns {
                out.extend(f(rec)?);
            }
            Ok(out)
        });
        Some(f)
    };
    Round { local, measurements, correction }
}

fn need(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        invalid(msg)
    }
}

#[cfg(test)]
mod tests;
