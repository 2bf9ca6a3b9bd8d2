use rand::RngCore;

use super::register::{Entry, EntryKey, QuditRegister};
use crate::capacity::check_amplitudes;
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, CMat, ONE, ZERO};
use crate::C64;

/// How a measurement picks its outcome.
pub enum Measure<'a> {
    Sample(&'a mut dyn RngCore),
    Force(usize),
}

/// Outcomes with probability below this are treated as impossible.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Status {
    Live,
    /// Known to be in this product state with the rest of the register.
    Parked(Vec<C64>),
}

/// An operator on a list of register entries; the first entry is slowest-varying.
#[derive(Clone, Debug)]
pub struct RegionOperator {
    pub support: Vec<EntryKey>,
    pub matrix: CMat,
}

impl RegionOperator {
    pub fn new(support: Vec<EntryKey>, matrix: CMat) -> Self {
        RegionOperator { support, matrix }
    }

    pub fn single(key: EntryKey, matrix: CMat) -> Self {
        RegionOperator { support: vec![key], matrix }
    }

    /// Tensor product of single-entry factors.
    pub fn product(factors: Vec<(EntryKey, CMat)>) -> Self {
        let mut support = Vec::with_capacity(factors.len());
        let mut m = CMat::identity(1, 1);
        for (k, f) in factors {
            support.push(k);
            m = m.kronecker(&f);
        }
        RegionOperator { support, matrix: m }
    }
}

/// Dense pure state over a [`QuditRegister`].
///
/// Entries known to be in a product state with everything else are kept
/// outside the amplitude vector ("parked"); they are folded back in lazily when
/// an operator touches them. Swapping two entries of equal dimension is a relabel.
#[derive(Clone, Debug)]
pub struct PureState {
    register: QuditRegister,
    status: Vec<Status>,
    live: Vec<usize>,
    amps: Vec<C64>,
    pub norm_tol: f64,
}

fn basis_vec(d: usize, k: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[k] = ONE;
    v
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn check_basis(basis: &CMat, d: usize) -> Result<()> {
    if basis.nrows() != d || basis.ncols() != d {
        return invalid(format!("basis must be {d}x{d}"));
    }
    let dev = crate::linalg::unitarity_deviation(basis);
    if dev > 1e-10 {
        return invalid(format!("measurement basis not orthonormal (deviation {dev:.2e})"));
    }
    Ok(())
}

impl PureState {
    /// All entries in `|0>`.
    pub fn zeros(register: QuditRegister) -> Self {
        let status = register.entries().iter().map(|e| Status::Parked(basis_vec(e.dim, 0))).collect();
        PureState { register, status, live: Vec::new(), amps: vec![ONE], norm_tol: 1e-10 }
    }

    /// Tensor product of the given local states.
    pub fn init_product(register: QuditRegister, locals: Vec<Vec<C64>>) -> Result<Self> {
        if locals.len() != register.len() {
            return invalid("one local state per entry required");
        }
        let mut status = Vec::with_capacity(locals.len());
        for (e, v) in register.entries().iter().zip(locals) {
            if v.len() != e.dim {
                return invalid(format!("local state for {} has length {} != {}", e.key, v.len(), e.dim));
            }
            let n = vec_norm(&v);
            if (n - 1.0).abs() > 1e-10 {
                return invalid(format!("local state for {} not normalized (norm {n})", e.key));
            }
            status.push(Status::Parked(v));
        }
        Ok(PureState { register, status, live: Vec::new(), amps: vec![ONE], norm_tol: 1e-10 })
    }

    /// State with the given amplitudes in register order.
    pub fn from_amplitudes(register: QuditRegister, amps: Vec<C64>) -> Result<Self> {
        let total = register.total_dim();
        check_amplitudes("state", total)?;
        if amps.len() as u128 != total {
            return invalid(format!("expected {total} amplitudes, got {}", amps.len()));
        }
        let n = vec_norm(&amps);
        if (n - 1.0).abs() > 1e-10 {
            return invalid(format!("amplitudes not normalized (norm {n})"));
        }
        let live = (0..register.len()).collect();
        let status = vec![Status::Live; register.len()];
        Ok(PureState { register, status, live, amps, norm_tol: 1e-10 })
    }

    /// Like [`PureState::from_amplitudes`] but rescales to unit norm first.
    pub fn from_unnormalized(register: QuditRegister, mut amps: Vec<C64>) -> Result<Self> {
        let n = vec_norm(&amps);
        if n == 0.0 {
            return invalid("zero vector");
        }
        amps.iter_mut().for_each(|a| *a /= n);
        PureState::from_amplitudes(register, amps)
    }

    pub fn register(&self) -> &QuditRegister {
        &self.register
    }

    pub fn keys(&self) -> Vec<EntryKey> {
        self.register.keys()
    }

    pub fn contains(&self, key: &EntryKey) -> bool {
        self.register.contains(key)
    }

    /// Number of amplitudes currently stored.
    pub fn live_len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_live(&self, key: &EntryKey) -> bool {
        self.register.position(key).is_some_and(|i| matches!(self.status[i], Status::Live))
    }

    fn idx(&self, key: &EntryKey) -> Result<usize> {
        self.register
            .position(key)
            .ok_or_else(|| Error::Register(format!("no entry {key}")))
    }

    fn dim(&self, i: usize) -> usize {
        self.register.entries()[i].dim
    }

    fn live_pos(&self, i: usize) -> usize {
        self.live.iter().position(|&x| x == i).expect("entry is live")
    }

    fn stride(&self, pos: usize) -> usize {
        self.live[pos + 1..].iter().map(|&i| self.dim(i)).product()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amps)
    }

    fn unpark(&mut self, i: usize) -> Result<()> {
        let Status::Parked(v) = &self.status[i] else { return Ok(()) };
        let d = v.len();
        check_amplitudes("state", self.amps.len() as u128 * d as u128)?;
        let mut out = Vec::with_capacity(self.amps.len() * d);
        for a in &self.amps {
            for b in v {
                out.push(a * b);
            }
        }
        self.amps = out;
        self.live.push(i);
        self.status[i] = Status::Live;
        Ok(())
    }

    /// Contract live entry `i` with `conj(b)` and park it as `b`.
    fn park_as(&mut self, i: usize, b: Vec<C64>) {
        let pos = self.live_pos(i);
        let d = self.dim(i);
        let st = self.stride(pos);
        let outer = self.amps.len() / (d * st);
        let mut out = vec![ZERO; outer * st];
        for o in 0..outer {
            for (k, bk) in b.iter().enumerate() {
                if *bk == ZERO {
                    continue;
                }
                let w = bk.conj();
                let src = &self.amps[o * d * st + k * st..o * d * st + (k + 1) * st];
                let dst = &mut out[o * st..(o + 1) * st];
                for (x, y) in dst.iter_mut().zip(src) {
                    *x += w * y;
                }
            }
        }
        self.amps = out;
        self.live.remove(pos);
        self.status[i] = Status::Parked(b);
    }

    /// Appends a new entry in the given local state (`|0>` by default).
    pub fn add_entry(&mut self, entry: Entry, local: Option<Vec<C64>>) -> Result<()> {
        let v = match local {
            Some(v) => {
                if v.len() != entry.dim || (vec_norm(&v) - 1.0).abs() > 1e-10 {
                    return invalid(format!("bad local state for {}", entry.key));
                }
                v
            }
            None => basis_vec(entry.dim, 0),
        };
        self.register.push(entry)?;
        self.status.push(Status::Parked(v));
        Ok(())
    }

    /// Removes an entry that is in a product state with the rest; returns its local state.
    pub fn remove_entry(&mut self, key: &EntryKey) -> Result<Vec<C64>> {
        let i = self.idx(key)?;
        if matches!(self.status[i], Status::Live) {
            let rho = self.local_density(i);
            let tr: f64 = (0..rho.nrows()).map(|k| rho[(k, k)].re).sum();
            let purity = (&rho * &rho).trace().re / (tr * tr);
            if purity < 1.0 - 1e-9 {
                return Err(Error::NotDecoupled(format!("{key} (purity {purity:.12})")));
            }
            let (vals, vecs) = hermitian_eigen(&rho);
            let top = (0..vals.len())
                .max_by(|&a, &b| vals[a].total_cmp(&vals[b]))
                .expect("non-empty");
            let v: Vec<C64> = vecs.column(top).iter().copied().collect();
            self.park_as(i, v);
            let n = self.norm();
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        let Status::Parked(v) = self.status.remove(i) else { unreachable!() };
        self.register.remove(key);
        for l in self.live.iter_mut() {
            if *l > i {
                *l -= 1;
            }
        }
        Ok(v)
    }

    fn local_density(&self, i: usize) -> CMat {
        let pos = self.live_pos(i);
        let d = self.dim(i);
        let st = self.stride(pos);
        let outer = self.amps.len() / (d * st);
        let mut rho = CMat::zeros(d, d);
        for o in 0..outer {
            for k in 0..d {
                for kp in 0..d {
                    let a = &self.amps[o * d * st + k * st..o * d * st + (k + 1) * st];
                    let b = &self.amps[o * d * st + kp * st..o * d * st + (kp + 1) * st];
                    let s: C64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                    rho[(k, kp)] += s;
                }
            }
        }
        rho
    }

    /// Exchanges the contents of two entries of equal dimension.
    pub fn swap_entries(&mut self, a: &EntryKey, b: &EntryKey) -> Result<()> {
        let (i, j) = (self.idx(a)?, self.idx(b)?);
        if i == j {
            return invalid(format!("swap needs two distinct entries, got {a} twice"));
        }
        if self.dim(i) != self.dim(j) {
            return invalid(format!("swap of {a} and {b} with different dimensions"));
        }
        match (self.status[i].clone(), self.status[j].clone()) {
            (Status::Live, Status::Live) => {
                let (pa, pb) = (self.live_pos(i), self.live_pos(j));
                self.live.swap(pa, pb);
            }
            (Status::Live, Status::Parked(v)) => {
                let pa = self.live_pos(i);
                self.live[pa] = j;
                self.status[j] = Status::Live;
                self.status[i] = Status::Parked(v);
            }
            (Status::Parked(v), Status::Live) => {
                let pb = self.live_pos(j);
                self.live[pb] = i;
                self.status[i] = Status::Live;
                self.status[j] = Status::Parked(v);
            }
            (s, t) => {
                self.status[i] = t;
                self.status[j] = s;
            }
        }
        Ok(())
    }

    /// Applies `op` on its support, optionally checking unitarity first.
    pub fn apply_operator(&mut self, op: &RegionOperator, unitary_check: bool) -> Result<()> {
        if unitary_check {
            let dev = crate::linalg::unitarity_deviation(&op.matrix);
            if dev > 1e-10 {
                return Err(Error::NotUnitary(dev));
            }
        }
        self.apply_matrix(&op.support, &op.matrix)
    }

    /// Applies a matrix to the listed entries without any unitarity check.
    pub fn apply_matrix(&mut self, targets: &[EntryKey], m: &CMat) -> Result<()> {
        let idx: Vec<usize> = targets.iter().map(|k| self.idx(k)).collect::<Result<_>>()?;
        for (a, &x) in idx.iter().enumerate() {
            if idx[..a].contains(&x) {
                return invalid(format!("operator support repeats {}", targets[a]));
            }
        }
        let dims: Vec<usize> = idx.iter().map(|&i| self.dim(i)).collect();
        let big: usize = dims.iter().product();
        if m.nrows() != big || m.ncols() != big {
            return invalid(format!("operator is {}x{}, support dimension {big}", m.nrows(), m.ncols()));
        }
        for &i in &idx {
            self.unpark(i)?;
        }
        let strides: Vec<usize> = idx.iter().map(|&i| self.stride(self.live_pos(i))).collect();
        let mut offsets = vec![0usize; big];
        for (j, off) in offsets.iter_mut().enumerate() {
            let mut r = j;
            for t in (0..dims.len()).rev() {
                *off += (r % dims[t]) * strides[t];
                r /= dims[t];
            }
        }
        let rows: Vec<Vec<(usize, C64)>> = (0..big)
            .map(|r| (0..big).filter_map(|c| (m[(r, c)] != ZERO).then(|| (c, m[(r, c)]))).collect())
            .collect();
        let others: Vec<(usize, usize)> = (0..self.live.len())
            .filter(|p| !idx.contains(&self.live[*p]))
            .map(|p| (self.dim(self.live[p]), self.stride(p)))
            .collect();
        let mut buf = vec![ZERO; big];
        let mut counters = vec![0usize; others.len()];
        let mut base = 0usize;
        loop {
            for (b, &off) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base + off];
            }
            for (r, row) in rows.iter().enumerate() {
                let mut acc = ZERO;
                for &(c, v) in row {
                    acc += v * buf[c];
                }
                self.amps[base + offsets[r]] = acc;
            }
            let mut k = others.len();
            loop {
                if k == 0 {
                    return Ok(());
                }
                k -= 1;
                counters[k] += 1;
                base += others[k].1;
                if counters[k] < others[k].0 {
                    break;
                }
                base -= others[k].1 * others[k].0;
                counters[k] = 0;
            }
        }
    }

    fn digit_probs(&self, i: usize) -> Vec<f64> {
        let pos = self.live_pos(i);
        let d = self.dim(i);
        let st = self.stride(pos);
        let mut p = vec![0.0; d];
        for (n, a) in self.amps.iter().enumerate() {
            p[(n / st) % d] += a.norm_sqr();
        }
        let tot: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= tot);
        p
    }

    /// Born probabilities of measuring `key` in `basis` (columns; computational if `None`).
    pub fn probabilities(&self, key: &EntryKey, basis: Option<&CMat>) -> Result<Vec<f64>> {
        let i = self.idx(key)?;
        let d = self.dim(i);
        if let Some(b) = basis {
            check_basis(b, d)?;
        }
        match (&self.status[i], basis) {
            (Status::Parked(v), _) => Ok((0..d)
                .map(|k| match basis {
                    Some(b) => b.column(k).iter().zip(v).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr(),
                    None => v[k].norm_sqr(),
                })
                .collect()),
            (Status::Live, None) => Ok(self.digit_probs(i)),
            (Status::Live, Some(b)) => {
                let mut s = self.clone();
                s.apply_matrix(&[*key], &b.adjoint())?;
                Ok(s.digit_probs(i))
            }
        }
    }

    /// Projective measurement of one entry; returns `(outcome, probability)`.
    ///
    /// The entry is left in the corresponding basis vector.
    pub fn measure_local(&mut self, key: &EntryKey, basis: Option<&CMat>, mode: Measure<'_>) -> Result<(usize, f64)> {
        let i = self.idx(key)?;
        let d = self.dim(i);
        if let Some(b) = basis {
            check_basis(b, d)?;
        }
        let live = matches!(self.status[i], Status::Live);
        if live {
            if let Some(b) = basis {
                self.apply_matrix(&[*key], &b.adjoint())?;
            }
        }
        let probs = if live { self.digit_probs(i) } else { self.probabilities(key, basis)? };
        let k = choose(&probs, mode)?;
        let p = probs[k];
        let target: Vec<C64> = match basis {
            Some(b) => b.column(k).iter().copied().collect(),
            None => basis_vec(d, k),
        };
        if live {
            self.park_as(i, basis_vec(d, k));
            let n = self.norm();
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self.status[i] = Status::Parked(target);
        Ok((k, p))
    }

    /// Vector over the given entries in that order; every live entry must be listed,
    /// parked entries not listed are dropped (they factor out).
    pub fn materialize(&self, order: &[EntryKey]) -> Result<Vec<C64>> {
        let mut s = self.clone();
        let idx: Vec<usize> = order.iter().map(|k| s.idx(k)).collect::<Result<_>>()?;
        for &i in &idx {
            s.unpark(i)?;
        }
        if let Some(&l) = s.live.iter().find(|l| !idx.contains(l)) {
            return Err(Error::Register(format!(
                "entry {} is entangled but was not listed",
                s.register.entries()[l].key
            )));
        }
        Ok(s.permuted(&idx))
    }

    /// Amplitudes over the whole register in register order.
    pub fn amplitudes(&self) -> Result<Vec<C64>> {
        check_amplitudes("state", self.register.total_dim())?;
        self.materialize(&self.register.keys())
    }

    /// Amplitude vector with live factors re-ordered as `order` (a permutation of `live`).
    fn permuted(&self, order: &[usize]) -> Vec<C64> {
        if order == self.live.as_slice() {
            return self.amps.clone();
        }
        let n = order.len();
        let dims: Vec<usize> = order.iter().map(|&i| self.dim(i)).collect();
        let old: Vec<usize> = order.iter().map(|&i| self.stride(self.live_pos(i))).collect();
        let mut out = Vec::with_capacity(self.amps.len());
        let mut counters = vec![0usize; n];
        let mut src = 0usize;
        loop {
            out.push(self.amps[src]);
            let mut k = n;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                counters[k] += 1;
                src += old[k];
                if counters[k] < dims[k] {
                    break;
                }
                src -= old[k] * dims[k];
                counters[k] = 0;
            }
        }
    }

    fn same_register(&self, other: &PureState) -> Result<()> {
        let mut a: Vec<Entry> = self.register.entries().to_vec();
        let mut b: Vec<Entry> = other.register.entries().to_vec();
        a.sort_by_key(|e| e.key);
        b.sort_by_key(|e| e.key);
        if a != b {
            return Err(Error::Register("registers differ".into()));
        }
        Ok(())
    }

    /// `<self|other>` over identical registers (entry order may differ).
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.same_register(other)?;
        let mut order = Vec::new();
        let mut factor = ONE;
        for (i, e) in self.register.entries().iter().enumerate() {
            let j = other.idx(&e.key)?;
            match (&self.status[i], &other.status[j]) {
                (Status::Parked(u), Status::Parked(v)) => {
                    factor *= u.iter().zip(v).map(|(x, y)| x.conj() * y).sum::<C64>();
                }
                _ => order.push(e.key),
            }
        }
        let a = self.materialize(&order)?;
        let b = other.materialize(&order)?;
        Ok(factor * a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum::<C64>())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn global_phase_equal(&self, other: &PureState, tol: f64) -> Result<bool> {
        Ok(self.fidelity(other)? >= 1.0 - tol)
    }

    /// `<psi|op|psi>`.
    pub fn expectation(&self, op: &RegionOperator) -> Result<C64> {
        let mut s = self.clone();
        s.apply_matrix(&op.support, &op.matrix)?;
        self.inner(&s)
    }

    /// Amplitude matrix with rows indexed by `rows` (in order) and columns by everything else live.
    fn split_matrix(&self, rows: &[EntryKey]) -> Result<(CMat, PureState)> {
        let mut s = self.clone();
        let idx: Vec<usize> = rows.iter().map(|k| s.idx(k)).collect::<Result<_>>()?;
        for &i in &idx {
            s.unpark(i)?;
        }
        let mut order = idx.clone();
        order.extend(s.live.iter().copied().filter(|l| !idx.contains(l)));
        let dr: usize = idx.iter().map(|&i| s.dim(i)).product();
        let v = s.permuted(&order);
        let dc = v.len() / dr;
        Ok((CMat::from_row_slice(dr, dc, &v), s))
    }

    fn check_cut(&self, a: &[EntryKey]) -> Result<()> {
        for (n, k) in a.iter().enumerate() {
            self.idx(k)?;
            if a[..n].contains(k) {
                return invalid(format!("entry {k} listed twice"));
            }
        }
        if a.is_empty() || a.len() == self.register.len() {
            return invalid("bipartition needs a proper non-empty subset");
        }
        Ok(())
    }

    /// Singular values of the amplitude matrix across the cut `a : rest`.
    pub fn schmidt_coefficients(&self, a: &[EntryKey]) -> Result<Vec<f64>> {
        self.check_cut(a)?;
        let live_a: Vec<EntryKey> = a.iter().copied().filter(|k| self.is_live(k)).collect();
        let live_rest = self.live.len() - live_a.len();
        if live_a.is_empty() || live_rest == 0 {
            return Ok(vec![1.0]);
        }
        let (m, _) = self.split_matrix(&live_a)?;
        let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        Ok(s)
    }

    /// Max-entropy `log2(rank rho_A)` with a relative singular-value threshold.
    pub fn max_entropy(&self, a: &[EntryKey], rank_tol: f64) -> Result<f64> {
        let s = self.schmidt_coefficients(a)?;
        let top = s[0];
        let rank = s.iter().filter(|&&v| v > rank_tol * top).count();
        Ok((rank as f64).log2())
    }

    /// Reduced density matrix over `keep` (in that order).
    pub fn reduced_density(&self, keep: &[EntryKey]) -> Result<CMat> {
        for (n, k) in keep.iter().enumerate() {
            self.idx(k)?;
            if keep[..n].contains(k) {
                return invalid(format!("entry {k} listed twice"));
            }
        }
        if keep.is_empty() {
            return invalid("cannot trace out every entry");
        }
        let (m, _) = self.split_matrix(keep)?;
        Ok(&m * m.adjoint())
    }

    /// Whether the state factorizes across `a : rest` within 1e-9 in purity.
    pub fn is_product_across(&self, a: &[EntryKey]) -> Result<bool> {
        let s = self.schmidt_coefficients(a)?;
        let tot: f64 = s.iter().map(|x| x * x).sum();
        let purity: f64 = s.iter().map(|x| (x * x / tot).powi(2)).sum();
        Ok(purity >= 1.0 - 1e-9)
    }

    /// Multiplies the state by a global phase so that its largest amplitude is real positive.
    pub fn fix_phase(&mut self) {
        if let Some(big) = self.amps.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
            if big.norm() > 0.0 {
                let ph = big.conj() / big.norm();
                self.amps.iter_mut().for_each(|a| *a *= ph);
            }
        }
    }
}

fn choose(probs: &[f64], mode: Measure<'_>) -> Result<usize> {
    match mode {
        Measure::Force(k) => {
            if k >= probs.len() {
                return invalid(format!("outcome {k} out of range"));
            }
            if probs[k] < PROB_FLOOR {
                return Err(Error::VanishingOutcome { outcome: k, probability: probs[k] });
            }
            Ok(k)
        }
        Measure::Sample(rng) => {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let mut acc = 0.0;
            let mut last = 0;
            for (k, &p) in probs.iter().enumerate() {
                if p < PROB_FLOOR {
                    continue;
                }
                last = k;
                acc += p;
                if u < acc {
                    return Ok(k);
                }
            }
            Ok(last)
        }
    }
}
