//! Stabilizer tableau backend and graph-state conversion.

mod graph;
mod pauli;
mod tableau;

pub use graph::{to_graph_state, GraphState};
pub use pauli::{circuit_matrix, conjugate_pauli, embed, CliffordOp, PauliString};
pub use tableau::{PauliOutcome, Tableau};
