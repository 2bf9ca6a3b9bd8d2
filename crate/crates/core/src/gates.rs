//! Named gates and their dense matrices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, r, CMat, ONE, ZERO};

/// Clifford primitives understood by both backends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliffordGate {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "CZ")]
    Cz,
    #[serde(rename = "SWAP")]
    Swap,
}

impl CliffordGate {
    pub fn arity(self) -> usize {
        match self {
            CliffordGate::Cnot | CliffordGate::Cz | CliffordGate::Swap => 2,
            _ => 1,
        }
    }

    /// Qubit matrix, first target slowest-varying for two-qubit gates.
    pub fn matrix(self) -> CMat {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = |n: usize, v: &[crate::C64]| CMat::from_row_slice(n, n, v);
        match self {
            CliffordGate::H => m(2, &[r(h), r(h), r(h), r(-h)]),
            CliffordGate::S => m(2, &[ONE, ZERO, ZERO, c(0.0, 1.0)]),
            CliffordGate::Sdg => m(2, &[ONE, ZERO, ZERO, c(0.0, -1.0)]),
            CliffordGate::X => m(2, &[ZERO, ONE, ONE, ZERO]),
            CliffordGate::Y => m(2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
            CliffordGate::Z => m(2, &[ONE, ZERO, ZERO, r(-1.0)]),
            CliffordGate::Cnot => permutation(&[0, 1, 3, 2]),
            CliffordGate::Cz => CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                ONE,
                ONE,
                ONE,
                r(-1.0),
            ])),
            CliffordGate::Swap => permutation(&[0, 2, 1, 3]),
        }
    }

    pub fn inverse(self) -> CliffordGate {
        match self {
            CliffordGate::S => CliffordGate::Sdg,
            CliffordGate::Sdg => CliffordGate::S,
            g => g,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CliffordGate::H => "H",
            CliffordGate::S => "S",
            CliffordGate::Sdg => "Sdg",
            CliffordGate::X => "X",
            CliffordGate::Y => "Y",
            CliffordGate::Z => "Z",
            CliffordGate::Cnot => "CNOT",
            CliffordGate::Cz => "CZ",
            CliffordGate::Swap => "SWAP",
        }
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CliffordGate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "H" => CliffordGate::H,
            "S" => CliffordGate::S,
            "SDG" => CliffordGate::Sdg,
            "X" => CliffordGate::X,
            "Y" => CliffordGate::Y,
            "Z" => CliffordGate::Z,
            "CNOT" | "CX" => CliffordGate::Cnot,
            "CZ" => CliffordGate::Cz,
            "SWAP" => CliffordGate::Swap,
            _ => return Err(Error::Invalid(format!("unknown gate {s}"))),
        })
    }
}

/// Matrix with `M|j> = |perm[j]>`.
pub fn permutation(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut m = CMat::zeros(n, n);
    for (j, &p) in perm.iter().enumerate() {
        m[(p, j)] = ONE;
    }
    m
}

/// Controlled shift `|a,b> -> |a, b + sign*a mod d>` on two qudits.
pub fn csum(d: usize, sign: i64) -> CMat {
    let perm: Vec<usize> = (0..d * d)
        .map(|j| {
            let (a, b) = (j / d, j % d);
            let nb = (b as i64 + sign * a as i64).rem_euclid(d as i64) as usize;
            a * d + nb
        })
        .collect();
    permutation(&perm)
}

/// Swap of two qudits of dimensions `da` and `db`.
pub fn swap(da: usize, db: usize) -> CMat {
    let perm: Vec<usize> = (0..da * db).map(|j| (j % db) * da + j / db).collect();
    permutation(&perm)
}

/// `X^k` on a qudit.
pub fn shift_pow(d: usize, k: i64) -> CMat {
    let perm: Vec<usize> = (0..d).map(|j| (j as i64 + k).rem_euclid(d as i64) as usize).collect();
    permutation(&perm)
}

/// `Z^k` on a qudit.
pub fn clock_pow(d: usize, k: i64) -> CMat {
    let w = 2.0 * std::f64::consts::PI / d as f64;
    let kk = k.rem_euclid(d as i64) as f64;
    CMat::from_fn(d, d, |i, j| {
        if i == j {
            crate::C64::from_polar(1.0, w * kk * i as f64)
        } else {
            ZERO
        }
    })
}

/// Single-qubit Pauli by symbol.
pub fn pauli(sym: char) -> Result<CMat> {
    match sym {
        'I' => Ok(CMat::identity(2, 2)),
        'X' => Ok(CliffordGate::X.matrix()),
        'Y' => Ok(CliffordGate::Y.matrix()),
        'Z' => Ok(CliffordGate::Z.matrix()),
        _ => Err(Error::Invalid(format!("unknown Pauli {sym}"))),
    }
}

/// `sigma^+ = |0><1|`; with this convention `sigma^-|0> = |1>` creates an excitation.
pub fn sigma_plus() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

pub fn sigma_minus() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}
