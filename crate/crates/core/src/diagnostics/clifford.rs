use crate::error::{invalid, Error, Result};
use crate::gates::CliffordGate;
use crate::linalg::gf2::BitMatrix;
use crate::linalg::CMat;
use crate::stabilizer::{conjugate_pauli, CliffordOp, GraphState, PauliString, Tableau};

/// A Clifford unitary `U` stored by its action `P -> U P U^dag` on the
/// generators `X_j`, `Z_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordMap {
    x: Vec<PauliString>,
    z: Vec<PauliString>,
}

impl CliffordMap {
    pub fn identity(n: usize) -> Self {
        CliffordMap { x: (0..n).map(|j| single(n, j, 'X')).collect(), z: (0..n).map(|j| single(n, j, 'Z')).collect() }
    }

    /// From explicit images; checks they are Hermitian and satisfy the
    /// canonical commutation relations.
    pub fn from_images(x: Vec<PauliString>, z: Vec<PauliString>) -> Result<Self> {
        let n = x.len();
        if z.len() != n || x.iter().chain(&z).any(|p| p.len() != n) {
            return invalid("Clifford images must be n Pauli strings on n qubits");
        }
        let m = CliffordMap { x, z };
        if !m.is_symplectic() {
            return Err(Error::NonClifford("images violate the Pauli commutation relations".into()));
        }
        Ok(m)
    }

    /// The gate sequence, first gate applied first.
    pub fn from_ops(n: usize, ops: &[CliffordOp]) -> Result<Self> {
        let x = (0..n).map(|j| conjugate_pauli(ops, &single(n, j, 'X'))).collect::<Result<_>>()?;
        let z = (0..n).map(|j| conjugate_pauli(ops, &single(n, j, 'Z'))).collect::<Result<_>>()?;
        Ok(CliffordMap { x, z })
    }

    /// `prod_e CZ_e H^{⊗n}`: `X_k -> Z_k`, `Z_k -> X_k prod_{i~k} Z_i`.
    pub fn graph_unitary(g: &GraphState) -> Self {
        let n = g.num_qubits();
        CliffordMap { x: (0..n).map(|j| single(n, j, 'Z')).collect(), z: (0..n).map(|j| g.generator(j)).collect() }
    }

    /// `exp(i pi/4 Q) = (1 + iQ)/sqrt2` for a Hermitian Pauli `Q`.
    pub fn quarter_rotation(q: &PauliString) -> Result<Self> {
        if !q.is_hermitian() {
            return invalid(format!("{q} is not Hermitian"));
        }
        let n = q.len();
        let img = |p: PauliString| {
            if p.commutes(q) {
                p
            } else {
                let mut r = q.mul(&p);
                r.set_phase((r.phase() + 1) % 4);
                r
            }
        };
        Ok(CliffordMap {
            x: (0..n).map(|j| img(single(n, j, 'X'))).collect(),
            z: (0..n).map(|j| img(single(n, j, 'Z'))).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn image_x(&self, j: usize) -> &PauliString {
        &self.x[j]
    }

    pub fn image_z(&self, j: usize) -> &PauliString {
        &self.z[j]
    }

    /// `U P U^dag`, phases included.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        let n = self.num_qubits();
        if p.len() != n {
            return invalid(format!("Pauli on {} qubits, map on {n}", p.len()));
        }
        let mut out = PauliString::identity(n);
        out.set_phase(p.phase());
        for j in 0..n {
            let f = match (p.x(j), p.z(j)) {
                (false, false) => continue,
                (true, false) => self.x[j].clone(),
                (false, true) => self.z[j].clone(),
                // Y = i X Z
                (true, true) => {
                    let mut y = self.x[j].mul(&self.z[j]);
                    y.set_phase((y.phase() + 1) % 4);
                    y
                }
            };
            out = out.mul(&f);
        }
        Ok(out)
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &CliffordMap) -> Result<CliffordMap> {
        let x = self.x.iter().map(|p| after.conjugate(p)).collect::<Result<_>>()?;
        let z = self.z.iter().map(|p| after.conjugate(p)).collect::<Result<_>>()?;
        Ok(CliffordMap { x, z })
    }

    pub fn inverse(&self) -> Result<CliffordMap> {
        let n = self.num_qubits();
        // Columns: symplectic vectors of the images of X_0..X_{n-1}, Z_0..Z_{n-1}.
        let mut rows = vec![vec![false; 2 * n]; 2 * n];
        for (c, p) in self.x.iter().chain(&self.z).enumerate() {
            for j in 0..n {
                rows[j][c] = p.x(j);
                rows[n + j][c] = p.z(j);
            }
        }
        let m = BitMatrix::from_bools(&rows);
        let pre = |t: PauliString| -> Result<PauliString> {
            let b: Vec<bool> = (0..n).map(|j| t.x(j)).chain((0..n).map(|j| t.z(j))).collect();
            let v = m.solve(&b).ok_or_else(|| Error::NonClifford("Clifford images are not independent".into()))?;
            let mut p = PauliString::identity(n);
            for j in 0..n {
                p.set_bits(j, v[j], v[n + j]);
            }
            // Fix the phase so that U p U^dag = t exactly.
            let img = self.conjugate(&p)?;
            p.set_phase((4 + t.phase() - img.phase()) % 4);
            Ok(p)
        };
        let x = (0..n).map(|j| pre(single(n, j, 'X'))).collect::<Result<_>>()?;
        let z = (0..n).map(|j| pre(single(n, j, 'Z'))).collect::<Result<_>>()?;
        Ok(CliffordMap { x, z })
    }

    /// Every generator image is supported on its own qubit.
    pub fn is_local(&self) -> bool {
        (0..self.num_qubits()).all(|j| {
            let ok = |p: &PauliString| p.support().iter().all(|&q| q == j);
            ok(&self.x[j]) && ok(&self.z[j])
        })
    }

    /// The single-qubit Clifford on qubit `j` of a local map, as a gate list.
    pub fn local_gates(&self, j: usize) -> Result<Vec<CliffordGate>> {
        if !self.is_local() {
            return invalid("map is not a product of single-qubit Cliffords");
        }
        let want = (self.x[j].op(j), self.x[j].sign(), self.z[j].op(j), self.z[j].sign());
        single_qubit_cliffords()
            .into_iter()
            .find(|seq| {
                let ops: Vec<CliffordOp> = seq.iter().map(|&g| CliffordOp::new(g, vec![0])).collect();
                let m = CliffordMap::from_ops(1, &ops).expect("one-qubit gates");
                (m.x[0].op(0), m.x[0].sign(), m.z[0].op(0), m.z[0].sign()) == want
            })
            .ok_or_else(|| Error::Numerical(format!("no single-qubit Clifford matches site {j}")))
    }

    /// Images Hermitian and obeying the commutation relations of `X_j`, `Z_j`.
    pub fn is_symplectic(&self) -> bool {
        let n = self.num_qubits();
        let herm = self.x.iter().chain(&self.z).all(|p| p.is_hermitian());
        herm && (0..n).all(|i| {
            (0..n).all(|j| {
                self.x[i].commutes(&self.x[j]) && self.z[i].commutes(&self.z[j]) && self.x[i].commutes(&self.z[j]) == (i != j)
            })
        })
    }

    /// Stabilizer tableau of `U|0...0>`.
    pub fn image_of_zero(&self) -> Result<Tableau> {
        Tableau::from_generators(self.z.clone())
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 most significant, fixed up to a
    /// global phase.
    pub fn to_dense(&self) -> Result<CMat> {
        let n = self.num_qubits();
        crate::capacity::check_amplitudes("dense Clifford", 1u128 << (2 * n))?;
        let dim = 1usize << n;
        let v0 = self.image_of_zero()?.to_dense()?;
        let mut u = CMat::zeros(dim, dim);
        for col in 0..dim {
            let mut v = v0.clone();
            for j in 0..n {
                if (col >> (n - 1 - j)) & 1 == 1 {
                    v = self.x[j].apply_dense(&v);
                }
            }
            for (r, a) in v.into_iter().enumerate() {
                u[(r, col)] = a;
            }
        }
        Ok(u)
    }
}

fn single(n: usize, j: usize, s: char) -> PauliString {
    PauliString::single(n, j, s).expect("qubit in range")
}

/// One gate word for each of the 24 single-qubit Cliffords modulo phase.
fn single_qubit_cliffords() -> Vec<Vec<CliffordGate>> {
    use CliffordGate::*;
    let frames: [&[CliffordGate]; 6] = [&[], &[H], &[S], &[H, S], &[S, H], &[H, S, H]];
    let paulis: [&[CliffordGate]; 4] = [&[], &[X], &[Y], &[Z]];
    let mut out = Vec::new();
    for f in frames {
        for p in paulis {
            out.push(f.iter().chain(p.iter()).copied().collect());
        }
    }
    out
}
