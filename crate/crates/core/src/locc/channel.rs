//! Protocols viewed as channels acting on pure-state ensembles.

use super::{for_each_branch, EnumerateOptions, Protocol, DETERMINISM_TOL};
use crate::error::{invalid, Result};
use crate::linalg::{hermitian_eigen, CVec};
use crate::statevector::PureState;
use crate::C64;

/// Probability-weighted pure branches.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn pure(state: PureState) -> Self {
        Ensemble { members: vec![(1.0, state)] }
    }

    pub fn total_probability(&self) -> f64 {
        self.members.iter().map(|m| m.0).sum()
    }

    /// Adds a branch, merging it into an existing member equal up to phase.
    pub fn push(&mut self, p: f64, state: PureState) -> Result<()> {
        for (q, s) in self.members.iter_mut() {
            if s.fidelity(&state)? >= 1.0 - DETERMINISM_TOL {
                *q += p;
                return Ok(());
            }
        }
        self.members.push((p, state));
        Ok(())
    }

    pub fn is_pure(&self) -> bool {
        self.members.len() == 1
    }

    /// `|| sigma - |phi><phi| ||_1` with `sigma` the ensemble's density matrix.
    ///
    /// Evaluated in an orthonormal basis of the span of the branches and `phi`.
    pub fn trace_norm_distance(&self, target: &PureState) -> Result<f64> {
        let order = target.register().keys();
        let tv = CVec::from_vec(target.materialize(&order)?);
        let mut vecs = Vec::with_capacity(self.members.len());
        for (p, s) in &self.members {
            vecs.push((*p, CVec::from_vec(s.materialize(&order)?)));
        }
        let mut basis: Vec<CVec> = Vec::new();
        for v in std::iter::once(&tv).chain(vecs.iter().map(|(_, v)| v)) {
            let mut w = v.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&w);
                    w -= b * c;
                }
            }
            let n = w.norm();
            if n > 1e-10 {
                basis.push(w / C64::new(n, 0.0));
            }
        }
        let k = basis.len();
        let coords = |v: &CVec| CVec::from_fn(k, |i, _| basis[i].dotc(v));
        let t = coords(&tv);
        let mut diff = -(&t * t.adjoint());
        for (p, v) in &vecs {
            let c = coords(v);
            diff += (&c * c.adjoint()) * C64::new(*p, 0.0);
        }
        let (vals, _) = hermitian_eigen(&diff);
        Ok(vals.iter().map(|x| x.abs()).sum())
    }
}

/// A sequence of protocols applied one after another.
#[derive(Clone, Debug)]
pub struct Channel {
    pub stages: Vec<Protocol>,
    pub opts: EnumerateOptions,
}

pub fn as_channel(protocol: &Protocol) -> Channel {
    Channel { stages: vec![protocol.clone()], opts: EnumerateOptions::default() }
}

impl Channel {
    pub fn identity() -> Self {
        Channel { stages: Vec::new(), opts: EnumerateOptions::default() }
    }

    /// `other` after `self`.
    pub fn then(mut self, other: Channel) -> Channel {
        self.stages.extend(other.stages);
        self
    }

    pub fn apply(&self, input: &PureState) -> Result<Ensemble> {
        self.apply_ensemble(&Ensemble::pure(input.clone()))
    }

    pub fn apply_ensemble(&self, input: &Ensemble) -> Result<Ensemble> {
        let mut cur = input.clone();
        for stage in &self.stages {
            let mut next = Ensemble { members: Vec::new() };
            let mut count = 0usize;
            for (p, s) in &cur.members {
                count += for_each_branch(stage, s, self.opts, |rec, out| next.push(p * rec.probability(), out.clone()))?;
                if count > self.opts.max_branches {
                    return Err(crate::Error::BranchCap(self.opts.max_branches));
                }
            }
            if next.members.is_empty() {
                return invalid("channel produced no branches");
            }
            cur = next;
        }
        Ok(cur)
    }
}
