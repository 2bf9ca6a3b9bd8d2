use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::gates::CliffordGate;
use crate::linalg::gf2::{get, set, words};
use crate::linalg::{CMat, ONE, ZERO};
use crate::C64;

/// `i^phase * prod_j sigma(x_j, z_j)` with `sigma(1,1) = Y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    pub(crate) x: Vec<u64>,
    pub(crate) z: Vec<u64>,
    pub(crate) phase: u8,
}

/// Power of `i` picked up by `sigma(x1,z1) * sigma(x2,z2)`.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    /// Single-qubit Pauli `sym` (one of I, X, Y, Z) on qubit `q`.
    pub fn single(n: usize, q: usize, sym: char) -> Result<Self> {
        let mut p = PauliString::identity(n);
        if q >= n {
            return invalid(format!("qubit {q} out of range {n}"));
        }
        p.set_op(q, sym)?;
        Ok(p)
    }

    /// Product of the same Pauli on every listed qubit.
    pub fn on(n: usize, qubits: &[usize], sym: char) -> Result<Self> {
        let mut p = PauliString::identity(n);
        for &q in qubits {
            if q >= n {
                return invalid(format!("qubit {q} out of range {n}"));
            }
            p.set_op(q, sym)?;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x(&self, j: usize) -> bool {
        get(&self.x, j)
    }

    pub fn z(&self, j: usize) -> bool {
        get(&self.z, j)
    }

    pub(crate) fn set_bits(&mut self, j: usize, x: bool, z: bool) {
        set(&mut self.x, j, x);
        set(&mut self.z, j, z);
    }

    /// Overwrites the operator on qubit `j`, keeping the phase.
    pub fn set_op(&mut self, j: usize, sym: char) -> Result<()> {
        let (x, z) = match sym {
            'I' => (false, false),
            'X' => (true, false),
            'Y' => (true, true),
            'Z' => (false, true),
            _ => return invalid(format!("unknown Pauli {sym}")),
        };
        self.set_bits(j, x, z);
        Ok(())
    }

    pub fn op(&self, j: usize) -> char {
        match (self.x(j), self.z(j)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Phase as a power of `i`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, p: u8) {
        self.phase = p % 4;
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// `+1` or `-1` for Hermitian strings.
    pub fn sign(&self) -> i8 {
        if self.phase == 0 {
            1
        } else {
            -1
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.x(j) || self.z(j)).collect()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Equal as operators on the qubits, ignoring the phase.
    pub fn same_bits(&self, other: &PauliString) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let mut s = 0u32;
        for k in 0..self.x.len() {
            s += (self.x[k] & other.z[k]).count_ones() + (self.z[k] & other.x[k]).count_ones();
        }
        s % 2 == 0
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n, "Pauli strings of different length");
        let mut e = self.phase as i32 + other.phase as i32;
        for j in 0..self.n {
            e += g(self.x(j), self.z(j), other.x(j), other.z(j));
        }
        PauliString {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase: e.rem_euclid(4) as u8,
        }
    }

    /// Appends an identity factor on a new last qubit.
    pub(crate) fn push_qubit(&mut self) {
        self.n += 1;
        if self.x.len() < words(self.n) {
            self.x.push(0);
            self.z.push(0);
        }
    }

    /// Removes qubit `q`, shifting later qubits down.
    pub(crate) fn drop_qubit(&mut self, q: usize) {
        let mut out = PauliString::identity(self.n - 1);
        out.phase = self.phase;
        let mut k = 0;
        for j in 0..self.n {
            if j != q {
                out.set_bits(k, self.x(j), self.z(j));
                k += 1;
            }
        }
        *self = out;
    }

    fn flip_if(&mut self, c: bool) {
        if c {
            self.negate();
        }
    }

    /// Conjugates in place: `P -> G P G^dag`.
    pub fn conjugate_by(&mut self, gate: CliffordGate, q: &[usize]) -> Result<()> {
        let need = gate.arity();
        if q.len() != need {
            return invalid(format!("{gate} needs {need} qubits, got {}", q.len()));
        }
        if q.iter().any(|&j| j >= self.n) {
            return invalid(format!("{gate} on {q:?} outside {} qubits", self.n));
        }
        if need == 2 && q[0] == q[1] {
            return invalid(format!("{gate} needs distinct qubits"));
        }
        let a = q[0];
        let (xa, za) = (self.x(a), self.z(a));
        match gate {
            CliffordGate::H => {
                self.flip_if(xa && za);
                self.set_bits(a, za, xa);
            }
            CliffordGate::S => {
                self.flip_if(xa && za);
                self.set_bits(a, xa, za ^ xa);
            }
            CliffordGate::Sdg => {
                self.flip_if(xa && !za);
                self.set_bits(a, xa, za ^ xa);
            }
            CliffordGate::X => self.flip_if(za),
            CliffordGate::Y => self.flip_if(xa ^ za),
            CliffordGate::Z => self.flip_if(xa),
            CliffordGate::Cnot => {
                let b = q[1];
                let (xb, zb) = (self.x(b), self.z(b));
                self.flip_if(xa && zb && !(xb ^ za));
                self.set_bits(b, xb ^ xa, zb);
                self.set_bits(a, xa, za ^ zb);
            }
            CliffordGate::Cz => {
                let b = q[1];
                let (xb, zb) = (self.x(b), self.z(b));
                self.flip_if(xa && xb && (za ^ zb));
                self.set_bits(a, xa, za ^ xb);
                self.set_bits(b, xb, zb ^ xa);
            }
            CliffordGate::Swap => {
                let b = q[1];
                let (xb, zb) = (self.x(b), self.z(b));
                self.set_bits(a, xb, zb);
                self.set_bits(b, xa, za);
            }
        }
        Ok(())
    }

    /// Dense matrix, qubit 0 slowest-varying.
    pub fn to_matrix(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for b in 0..dim {
            let (amp, out) = self.act_on_basis(b);
            m[(out, b)] = amp;
        }
        m
    }

    /// `P|b> = amp |out>` for a computational basis index (qubit 0 is the top bit).
    pub fn act_on_basis(&self, b: usize) -> (C64, usize) {
        let mut e = self.phase as u32;
        let mut sign = false;
        let mut out = b;
        for j in 0..self.n {
            let bit = 1usize << (self.n - 1 - j);
            let (x, z) = (self.x(j), self.z(j));
            if x && z {
                e += 1;
            }
            if z && b & bit != 0 {
                sign = !sign;
            }
            if x {
                out ^= bit;
            }
        }
        let ph = [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)][(e % 4) as usize];
        (if sign { -ph } else { ph }, out)
    }

    /// Stabilizer eigen-check helper: the dense matrix applied to a vector.
    pub fn apply_dense(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (b, a) in v.iter().enumerate() {
            if *a != ZERO {
                let (amp, o) = self.act_on_basis(b);
                out[o] += amp * a;
            }
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = ["+", "+i", "-", "-i"][self.phase as usize];
        f.write_str(s)?;
        for j in 0..self.n {
            write!(f, "{}", self.op(j))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(b) = s.strip_prefix("+i") {
            (1, b)
        } else if let Some(b) = s.strip_prefix("-i") {
            (3, b)
        } else if let Some(b) = s.strip_prefix('+') {
            (0, b)
        } else if let Some(b) = s.strip_prefix('-') {
            (2, b)
        } else {
            (0, s)
        };
        let mut p = PauliString::identity(body.chars().count());
        for (j, ch) in body.chars().enumerate() {
            p.set_op(j, ch)?;
        }
        p.phase = phase;
        Ok(p)
    }
}

/// A Clifford gate on qubit indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordOp {
    pub gate: CliffordGate,
    pub qubits: Vec<usize>,
}

impl CliffordOp {
    pub fn new(gate: CliffordGate, qubits: Vec<usize>) -> Self {
        CliffordOp { gate, qubits }
    }

    pub fn inverse(&self) -> CliffordOp {
        CliffordOp { gate: self.gate.inverse(), qubits: self.qubits.clone() }
    }
}

/// `U P U^dag` where `U` applies `ops` in order.
pub fn conjugate_pauli(ops: &[CliffordOp], p: &PauliString) -> Result<PauliString> {
    let mut out = p.clone();
    for op in ops {
        out.conjugate_by(op.gate, &op.qubits)?;
    }
    Ok(out)
}

/// Dense unitary of a Clifford gate list (qubit 0 slowest-varying).
pub fn circuit_matrix(n: usize, ops: &[CliffordOp]) -> CMat {
    let dim = 1usize << n;
    let mut u = CMat::identity(dim, dim);
    for op in ops {
        u = embed(n, &op.gate.matrix(), &op.qubits) * u;
    }
    u
}

/// Embeds a gate matrix acting on `qubits` into `n` qubits.
pub fn embed(n: usize, m: &CMat, qubits: &[usize]) -> CMat {
    let dim = 1usize << n;
    let k = qubits.len();
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let sub: usize = qubits
            .iter()
            .enumerate()
            .map(|(t, &q)| ((col >> (n - 1 - q)) & 1) << (k - 1 - t))
            .sum();
        for row_sub in 0..(1usize << k) {
            let v = m[(row_sub, sub)];
            if v == ZERO {
                continue;
            }
            let mut row = col;
            for (t, &q) in qubits.iter().enumerate() {
                let bit = (row_sub >> (k - 1 - t)) & 1;
                let mask = 1usize << (n - 1 - q);
                row = (row & !mask) | (bit << (n - 1 - q));
            }
            out[(row, col)] += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn products_and_phases() {
        assert_eq!(p("X").mul(&p("Z")), p("-iY"));
        assert_eq!(p("Z").mul(&p("X")), p("+iY"));
        assert_eq!(p("Y").mul(&p("Y")), p("I"));
        assert!(!p("XI").commutes(&p("ZZ")));
        assert!(p("XX").commutes(&p("ZZ")));
        assert_eq!(p("-XYZ").to_string(), "-XYZ");
    }

    #[test]
    fn conjugation_matches_dense() {
        use CliffordGate::*;
        let paulis = ["XI", "ZI", "IX", "IZ", "YI", "IY", "XY", "ZY"];
        for gate in [H, S, Sdg, X, Y, Z, Cnot, Cz, Swap] {
            let qs: Vec<usize> = if gate.arity() == 2 { vec![0, 1] } else { vec![1] };
            let u = embed(2, &gate.matrix(), &qs);
            for s in paulis {
                let mut q = p(s);
                q.conjugate_by(gate, &qs).unwrap();
                let want = &u * p(s).to_matrix() * u.adjoint();
                assert!((q.to_matrix() - want).norm() < 1e-12, "{gate} on {s}");
            }
        }
    }

    #[test]
    fn reversed_cnot_embedding() {
        let u = embed(2, &CliffordGate::Cnot.matrix(), &[1, 0]);
        // control qubit 1, target qubit 0: |01> -> |11>
        assert!((u[(3, 1)] - ONE).norm() < 1e-12);
        let mut q = p("IX");
        q.conjugate_by(CliffordGate::Cnot, &[1, 0]).unwrap();
        assert_eq!(q, p("XX"));
    }

    #[test]
    fn hadamard_maps_x_to_z() {
        let out = conjugate_pauli(&[CliffordOp::new(CliffordGate::H, vec![0])], &p("X")).unwrap();
        assert_eq!(out, p("Z"));
    }
}
