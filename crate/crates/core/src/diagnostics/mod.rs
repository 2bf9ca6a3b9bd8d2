//! No-go witnesses and certifiers: the factorization test for short-range
//! correlations, the area-law audit, and deterministic Clifford unitaries
//! from stabilizer resource states.

mod area_law;
mod cj;
mod clifford;
mod factorization;

pub use area_law::{
    area_law_audit, audit_state, audit_state_with_tol, bell_pair_volume_state, default_area_constant, default_regions, AreaLawReport,
    RegionEntropy, RANK_TOL,
};
pub use cj::{build_cj_protocol, build_cj_protocol_with, certify_cj, run_cj_unitary, verify_clifford_table, CJProtocol};
pub use clifford::CliffordMap;
pub use factorization::{check_factorization, FactorizationReport, FACTORIZATION_TOL};

#[cfg(test)]
mod tests;
