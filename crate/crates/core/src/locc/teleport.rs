//! Qudit teleportation through a shared maximally entangled pair.

use std::sync::Arc;

use rand::RngCore;

use super::{MeasurementSpec, OutcomeRecord, Round, DETERMINISM_TOL};
use crate::circuits::{Gate, LocalLayer};
use crate::error::{invalid, Error, Result};
use crate::gates::{clock_pow, csum, shift_pow};
use crate::linalg::{fourier_matrix, CMat, ONE, ZERO};
use crate::statevector::{EntryKey, Measure, PureState};

/// One round moving the content of `source` onto `e2`, given `|Phi+>` on `(e1, e2)`.
///
/// `source` and `e1` must sit on the same site. With `a` the outcome on `e1`
/// and `b` the Fourier outcome on `source`, `e2` holds `X^a Z^-b psi` before correction.
pub fn teleport_round(source: EntryKey, e1: EntryKey, e2: EntryKey, d: usize) -> Round {
    let local = LocalLayer::ops(vec![Gate::matrix(vec![source, e1], csum(d, -1))]);
    let measurements = vec![MeasurementSpec::z(e1), MeasurementSpec::x(source)];
    let correction = Arc::new(move |rec: &OutcomeRecord| -> Result<Vec<Gate>> {
        let a = rec.require(&e1)? as i64;
        let b = rec.require(&source)? as i64;
        let mut out = Vec::new();
        if a != 0 {
            out.push(Gate::matrix(vec![e2], shift_pow(d, -a)));
        }
        if b != 0 {
            out.push(Gate::matrix(vec![e2], clock_pow(d, b)));
        }
        Ok(out)
    });
    Round { local, measurements, correction: Some(correction) }
}

fn phi_plus_fidelity(state: &PureState, e1: &EntryKey, e2: &EntryKey, d: usize) -> Result<f64> {
    let rho = state.reduced_density(&[*e1, *e2])?;
    let phi = CMat::from_fn(d * d, 1, |i, _| if i / d == i % d { ONE / (d as f64).sqrt() } else { ZERO });
    Ok((phi.adjoint() * rho * phi)[(0, 0)].re)
}

fn check_teleport(state: &PureState, source: &EntryKey, e1: &EntryKey, e2: &EntryKey) -> Result<usize> {
    let reg = state.register();
    let dim = |k: &EntryKey| reg.dim_of(k).ok_or_else(|| Error::Register(format!("no entry {k}")));
    let d = dim(source)?;
    if dim(e1)? != d || dim(e2)? != d {
        return invalid(format!("teleport needs equal dimensions on {source}, {e1}, {e2}"));
    }
    if source == e1 || source == e2 || e1 == e2 {
        return invalid("teleport needs three distinct entries");
    }
    let f = phi_plus_fidelity(state, e1, e2, d)?;
    if f < 1.0 - DETERMINISM_TOL {
        return invalid(format!("pair ({e1}, {e2}) is not maximally entangled (fidelity {f:.12})"));
    }
    Ok(d)
}

enum Pick<'a> {
    Sample(&'a mut dyn RngCore),
    Force(usize, usize),
}

fn run_teleport(state: &PureState, source: EntryKey, e1: EntryKey, e2: EntryKey, pick: Pick<'_>) -> Result<PureState> {
    let d = check_teleport(state, &source, &e1, &e2)?;
    let f = fourier_matrix(d);
    let mut s = state.clone();
    s.apply_matrix(&[source, e1], &csum(d, -1))?;
    let (a, b) = match pick {
        Pick::Sample(rng) => {
            let (a, _) = s.measure_local(&e1, None, Measure::Sample(&mut *rng))?;
            let (b, _) = s.measure_local(&source, Some(&f), Measure::Sample(rng))?;
            (a, b)
        }
        Pick::Force(a, b) => {
            s.measure_local(&e1, None, Measure::Force(a))?;
            s.measure_local(&source, Some(&f), Measure::Force(b))?;
            (a, b)
        }
    };
    s.apply_matrix(&[e2], &shift_pow(d, -(a as i64)))?;
    s.apply_matrix(&[e2], &clock_pow(d, b as i64))?;
    s.remove_entry(&source)?;
    s.remove_entry(&e1)?;
    Ok(s)
}

/// Teleports `source` onto `e2` with sampled outcomes; `source` and `e1` are removed.
pub fn teleport(state: &PureState, source: EntryKey, e1: EntryKey, e2: EntryKey, rng: &mut dyn RngCore) -> Result<PureState> {
    run_teleport(state, source, e1, e2, Pick::Sample(rng))
}

/// The branch with outcome `a` on `e1` and Fourier outcome `b` on `source`.
pub fn teleport_branch(state: &PureState, source: EntryKey, e1: EntryKey, e2: EntryKey, a: usize, b: usize) -> Result<PureState> {
    run_teleport(state, source, e1, e2, Pick::Force(a, b))
}
