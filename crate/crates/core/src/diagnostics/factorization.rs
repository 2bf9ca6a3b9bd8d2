use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::io::{c_to_json, JsonComplex};
use crate::lattice::{Lattice, Region};
use crate::linalg::kron;
use crate::statevector::{PureState, RegionOperator};
use crate::C64;

/// Residuals above this count as a correlation.
pub const FACTORIZATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub region_a: Vec<usize>,
    pub region_b: Vec<usize>,
    pub distance: usize,
    /// `<X_A Y_B>`.
    pub lhs: JsonComplex,
    /// `<X_A><Y_B>`.
    pub rhs: JsonComplex,
    pub residual: f64,
    pub claimed_depth: Option<usize>,
    /// With a claimed depth `l`: whether the pair rules out preparation by a
    /// depth-`l` circuit (`residual > tol` and `d(A,B) > 2l`).
    pub violates: Option<bool>,
}

impl FactorizationReport {
    pub fn lhs(&self) -> C64 {
        C64::new(self.lhs[0], self.lhs[1])
    }

    pub fn rhs(&self) -> C64 {
        C64::new(self.rhs[0], self.rhs[1])
    }
}

fn sites_of(op: &RegionOperator) -> Result<Region> {
    Region::new(op.support.iter().map(|k| k.site).collect())
}

/// Compares `<X_A Y_B>` with `<X_A><Y_B>` on `state`.
pub fn check_factorization(
    state: &PureState,
    lattice: &Lattice,
    x_a: &RegionOperator,
    y_b: &RegionOperator,
    claimed_depth: Option<usize>,
) -> Result<FactorizationReport> {
    let a = sites_of(x_a)?;
    let b = sites_of(y_b)?;
    if a.is_empty() || b.is_empty() {
        return invalid("factorization operators need non-empty support");
    }
    if a.sites().iter().any(|&s| b.contains(s)) {
        return invalid("supports of X_A and Y_B overlap");
    }
    let distance = lattice.distance(&a, &b)?;
    let joint = RegionOperator::new(
        x_a.support.iter().chain(&y_b.support).copied().collect(),
        kron(&x_a.matrix, &y_b.matrix),
    );
    let lhs = state.expectation(&joint)?;
    let rhs = state.expectation(x_a)? * state.expectation(y_b)?;
    let residual = (lhs - rhs).norm();
    Ok(FactorizationReport {
        region_a: a.sites().to_vec(),
        region_b: b.sites().to_vec(),
        distance,
        lhs: c_to_json(lhs),
        rhs: c_to_json(rhs),
        residual,
        claimed_depth,
        violates: claimed_depth.map(|l| residual > FACTORIZATION_TOL && distance > 2 * l),
    })
}
