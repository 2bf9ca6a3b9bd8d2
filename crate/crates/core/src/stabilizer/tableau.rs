use rand::{RngCore, SeedableRng};

use super::pauli::{CliffordOp, PauliString};
use crate::capacity::check_amplitudes;
use crate::error::{invalid, Error, Result};
use crate::gates::CliffordGate;
use crate::linalg::gf2::BitMatrix;
use crate::statevector::Measure;
use crate::C64;

/// Stabilizer state on `n` qubits with destabilizers.
///
/// Rows `0..n` are destabilizers, rows `n..2n` stabilizer generators;
/// row `i` anticommutes with row `i + n` only.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliString>,
}

/// Result of a Pauli measurement on a tableau.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliOutcome {
    /// 0 for eigenvalue +1, 1 for -1.
    pub outcome: usize,
    pub deterministic: bool,
    pub probability: f64,
}

impl Tableau {
    /// `|0...0>`.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(PauliString::single(n, q, 'X').expect("in range"));
        }
        for q in 0..n {
            rows.push(PauliString::single(n, q, 'Z').expect("in range"));
        }
        Tableau { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    pub fn apply(&mut self, gate: CliffordGate, qubits: &[usize]) -> Result<()> {
        for r in &mut self.rows {
            r.conjugate_by(gate, qubits)?;
        }
        if self.rows.is_empty() && qubits.iter().any(|&q| q >= self.n) {
            return invalid("qubit out of range");
        }
        Ok(())
    }

    pub fn apply_ops(&mut self, ops: &[CliffordOp]) -> Result<()> {
        for op in ops {
            self.apply(op.gate, &op.qubits)?;
        }
        Ok(())
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.len() != self.n {
            return invalid(format!("Pauli on {} qubits, tableau has {}", p.len(), self.n));
        }
        if !p.is_hermitian() {
            return invalid("measured Pauli must be Hermitian");
        }
        Ok(())
    }

    /// The group element with the same bits as `p`, if `p` is in the group up to sign.
    pub fn group_element(&self, p: &PauliString) -> Option<PauliString> {
        if p.len() != self.n || !self.stabilizers().iter().all(|g| g.commutes(p)) {
            return None;
        }
        let mut acc = PauliString::identity(self.n);
        for j in 0..self.n {
            if !self.rows[j].commutes(p) {
                acc = acc.mul(&self.rows[j + self.n]);
            }
        }
        acc.same_bits(p).then_some(acc)
    }

    /// Whether `p` (with its sign) stabilizes the state.
    pub fn contains(&self, p: &PauliString) -> bool {
        self.group_element(p).is_some_and(|e| e.phase() == p.phase())
    }

    /// Expectation value of a Hermitian Pauli: `+1`, `-1` or `0`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_pauli(p)?;
        Ok(match self.group_element(p) {
            Some(e) if e.phase() == p.phase() => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        })
    }

    /// Outcome probabilities `[P(+1), P(-1)]` of measuring `p`.
    pub fn probabilities(&self, p: &PauliString) -> Result<[f64; 2]> {
        let e = self.expectation(p)?;
        Ok([(1.0 + e) / 2.0, (1.0 - e) / 2.0])
    }

    pub fn measure_z(&mut self, q: usize, mode: Measure<'_>) -> Result<PauliOutcome> {
        if q >= self.n {
            return invalid(format!("qubit {q} out of range {}", self.n));
        }
        let z = PauliString::single(self.n, q, 'Z')?;
        self.measure_pauli(&z, mode)
    }

    /// Projective measurement of a Hermitian Pauli string.
    pub fn measure_pauli(&mut self, p: &PauliString, mode: Measure<'_>) -> Result<PauliOutcome> {
        self.check_pauli(p)?;
        let n = self.n;
        let Some(piv) = (n..2 * n).find(|&i| !self.rows[i].commutes(p)) else {
            let acc = self.group_element(p).ok_or_else(|| Error::Numerical("tableau lost rank".into()))?;
            let outcome = usize::from(acc.phase() != p.phase());
            if let Measure::Force(k) = mode {
                if k > 1 {
                    return invalid(format!("outcome {k} out of range"));
                }
                if k != outcome {
                    return Err(Error::VanishingOutcome { outcome: k, probability: 0.0 });
                }
            }
            return Ok(PauliOutcome { outcome, deterministic: true, probability: 1.0 });
        };
        let outcome = match mode {
            Measure::Force(k) if k > 1 => return invalid(format!("outcome {k} out of range")),
            Measure::Force(k) => k,
            Measure::Sample(rng) => (rng.next_u64() & 1) as usize,
        };
        let pivot = self.rows[piv].clone();
        for i in 0..2 * n {
            if i != piv && i != piv - n && !self.rows[i].commutes(p) {
                self.rows[i] = self.rows[i].mul(&pivot);
            }
        }
        self.rows[piv - n] = pivot;
        let mut np = p.clone();
        if outcome == 1 {
            np.negate();
        }
        self.rows[piv] = np;
        Ok(PauliOutcome { outcome, deterministic: false, probability: 0.5 })
    }

    /// Same state: every generator of `other` stabilizes `self` with matching sign.
    pub fn states_equal(&self, other: &Tableau) -> Result<bool> {
        if self.n != other.n {
            return invalid(format!("tableaus on {} and {} qubits", self.n, other.n));
        }
        Ok(other.stabilizers().iter().all(|g| self.contains(g)))
    }

    /// Builds a tableau from `n` commuting, independent Hermitian generators.
    pub fn from_generators(gens: Vec<PauliString>) -> Result<Self> {
        let n = gens.len();
        for (i, g) in gens.iter().enumerate() {
            if g.len() != n {
                return invalid(format!("generator {i} acts on {} qubits, expected {n}", g.len()));
            }
            if !g.is_hermitian() {
                return invalid(format!("generator {g} is not Hermitian"));
            }
            if let Some(h) = gens[..i].iter().find(|h| !h.commutes(g)) {
                return invalid(format!("generators {h} and {g} anticommute"));
            }
        }
        // Solve <d_i, g_j> = delta_ij for all i at once.
        let mut aug = BitMatrix::zeros(n, 3 * n);
        for (j, g) in gens.iter().enumerate() {
            for q in 0..n {
                aug.set(j, q, g.z(q));
                aug.set(j, n + q, g.x(q));
            }
            aug.set(j, 2 * n + j, true);
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= 2 * n {
            return invalid("generators are not independent");
        }
        let mut destab: Vec<PauliString> = (0..n)
            .map(|i| {
                let mut d = PauliString::identity(n);
                for (r, &c) in pivots.iter().enumerate() {
                    if aug.get(r, 2 * n + i) {
                        let q = c % n;
                        let (x, z) = (d.x(q), d.z(q));
                        if c < n {
                            d.set_bits(q, true, z);
                        } else {
                            d.set_bits(q, x, true);
                        }
                    }
                }
                d
            })
            .collect();
        for i in 0..n {
            for j in 0..i {
                if !destab[i].commutes(&destab[j]) {
                    destab[i] = destab[i].mul(&gens[j]);
                }
            }
            destab[i].set_phase(0);
        }
        let mut rows = destab;
        rows.extend(gens);
        Ok(Tableau { n, rows })
    }

    /// Picks an independent subset generating the same group as `gens`.
    pub fn independent_subset(gens: &[PauliString]) -> Vec<PauliString> {
        let Some(n) = gens.first().map(|g| g.len()) else { return Vec::new() };
        let mut basis = BitMatrix::zeros(0, 2 * n);
        let mut out = Vec::new();
        for g in gens {
            let mut m = basis.clone();
            let mut row = vec![0u64; crate::linalg::gf2::words(2 * n)];
            for q in 0..n {
                crate::linalg::gf2::set(&mut row, q, g.x(q));
                crate::linalg::gf2::set(&mut row, n + q, g.z(q));
            }
            m.rows.push(row);
            if m.rank() > basis.nrows() {
                basis = m;
                out.push(g.clone());
            }
        }
        out
    }

    /// Appends a qubit in `|0>`; returns its index.
    pub fn add_qubit(&mut self) -> usize {
        let n = self.n;
        for r in &mut self.rows {
            r.push_qubit();
        }
        let mut rows = self.rows[..n].to_vec();
        rows.push(PauliString::single(n + 1, n, 'X').expect("in range"));
        rows.extend(self.rows[n..].iter().cloned());
        rows.push(PauliString::single(n + 1, n, 'Z').expect("in range"));
        self.rows = rows;
        self.n += 1;
        n
    }

    /// Removes a qubit that is in a product state with the rest.
    ///
    /// Returns the single-qubit stabilizer of the removed qubit.
    pub fn remove_qubit(&mut self, q: usize) -> Result<PauliString> {
        if q >= self.n {
            return invalid(format!("qubit {q} out of range {}", self.n));
        }
        let local = ['Z', 'X', 'Y']
            .iter()
            .find_map(|&s| self.group_element(&PauliString::single(self.n, q, s).expect("in range")))
            .ok_or_else(|| Error::NotDecoupled(format!("qubit {q}")))?;
        let mut gens: Vec<PauliString> = self.stabilizers().to_vec();
        let piv = gens
            .iter()
            .position(|g| g.x(q) || g.z(q))
            .ok_or_else(|| Error::Numerical("no generator acts on qubit".into()))?;
        let pivot = gens.remove(piv);
        for g in &mut gens {
            if g.x(q) || g.z(q) {
                if (g.x(q), g.z(q)) != (pivot.x(q), pivot.z(q)) {
                    return Err(Error::NotDecoupled(format!("qubit {q}")));
                }
                *g = g.mul(&pivot);
            }
            g.drop_qubit(q);
        }
        *self = Tableau::from_generators(gens)?;
        let mut one = PauliString::single(1, 0, local.op(q))?;
        one.set_phase(local.phase());
        Ok(one)
    }

    /// Dense amplitudes (qubit 0 slowest-varying), global phase fixed so the
    /// largest amplitude is real positive.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        if self.n > 30 {
            return Err(Error::Capacity { what: "dense stabilizer state".into(), needed: 1u128 << self.n, limit: 1 << 30 });
        }
        check_amplitudes("dense stabilizer state", 1u128 << self.n)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v: Vec<C64> = (0..1usize << self.n)
            .map(|_| {
                let a = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                let b = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                C64::new(a, b)
            })
            .collect();
        for g in self.stabilizers() {
            let gv = g.apply_dense(&v);
            for (a, b) in v.iter_mut().zip(gv) {
                *a = (*a + b) * 0.5;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Err(Error::Numerical("projection onto stabilizer state vanished".into()));
        }
        let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("non-empty");
        let ph = big.conj() / big.norm() / norm;
        v.iter_mut().for_each(|a| *a *= ph);
        Ok(v)
    }

    /// One signed generator per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for g in self.stabilizers() {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let gens = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<PauliString>>>()?;
        Tableau::from_generators(gens)
    }
}
