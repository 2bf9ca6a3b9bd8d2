//! Exact simulation and certification of finite-depth circuits assisted by
//! local measurements and classical communication.
//!
//! Two backends are provided: a dense pure-state simulator over heterogeneous
//! qudit registers ([`statevector`]) and a stabilizer tableau ([`stabilizer`]).
//! Protocols ([`protocols`]) run on either through the execution model in
//! [`locc`]; [`mps`] holds the matrix-product-state machinery and
//! [`diagnostics`] the no-go witnesses.

pub mod capacity;
pub mod circuits;
pub mod diagnostics;
pub mod error;
pub mod gates;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod locc;
pub mod mps;
pub mod protocols;
pub mod stabilizer;
pub mod statevector;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
