//! Complex dense linear algebra helpers and GF(2) elimination.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    ms.iter().fold(CMat::identity(1, 1), |acc, m| acc.kronecker(m))
}

/// Largest entry of `|m^dagger m - 1|`.
pub fn unitarity_deviation(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let p = m.adjoint() * m;
    let n = p.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((p[(i, j)] - target).norm());
        }
    }
    dev
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    unitarity_deviation(m) <= tol
}

/// Operator (spectral) norm.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Trace norm, the sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.sum()
}

/// Eigen-decomposition of the Hermitian part of `h`.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let herm = (h + h.adjoint()) * r(0.5);
    let e = herm.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Relative size below which an eigenvalue is roundoff and its square root is zero.
pub const PSD_EIGEN_FLOOR: f64 = 1e-13;

/// Principal square root of a Hermitian matrix. Negative and roundoff-sized
/// eigenvalues are clamped to zero, so a rank-deficient input keeps its rank.
pub fn psd_sqrt(h: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(h);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| r(if v > PSD_EIGEN_FLOOR * top { v.sqrt() } else { 0.0 })),
    ));
    &vecs * d * vecs.adjoint()
}

/// Moore-Penrose pseudo-inverse with singular values below `rel_cutoff * max` dropped.
pub fn pinv(m: &CMat, rel_cutoff: f64) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let mut sinv = CMat::zeros(vt.nrows(), u.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > rel_cutoff * smax && s > 0.0 {
            sinv[(k, k)] = r(1.0 / s);
        }
    }
    vt.adjoint() * sinv * u.adjoint()
}

/// Numerical rank relative to the largest singular value.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let smax = s.max();
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Nearest matrix with orthonormal columns (polar factor).
pub fn polar_isometry(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// Unitary whose columns at `positions` are the given orthonormal columns.
pub fn complete_to_unitary(cols: &CMat, positions: &[usize]) -> Result<CMat> {
    let dim = cols.nrows();
    if cols.ncols() != positions.len() {
        return Err(Error::Invalid("column count does not match positions".into()));
    }
    let gram = cols.adjoint() * cols;
    let dev = (gram - CMat::identity(cols.ncols(), cols.ncols())).norm();
    if dev > 1e-8 {
        return Err(Error::Numerical(format!("columns not orthonormal (deviation {dev:.2e})")));
    }
    let mut basis: Vec<CVec> = (0..cols.ncols()).map(|k| cols.column(k).into_owned()).collect();
    let mut extra = Vec::new();
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVec::zeros(dim);
        v[e] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let p = b.dotc(&v);
                v -= b * p;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            v /= r(n);
            basis.push(v.clone());
            extra.push(v);
        }
    }
    if basis.len() != dim {
        return Err(Error::Numerical("could not complete basis".into()));
    }
    let mut u = CMat::zeros(dim, dim);
    let mut taken = vec![false; dim];
    for (k, &p) in positions.iter().enumerate() {
        if p >= dim || taken[p] {
            return Err(Error::Invalid("bad completion position".into()));
        }
        taken[p] = true;
        u.set_column(p, &cols.column(k));
    }
    let mut it = extra.into_iter();
    for (p, t) in taken.iter().enumerate() {
        if !t {
            u.set_column(p, &it.next().expect("enough vectors"));
        }
    }
    Ok(u)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut u = q;
    for k in 0..dim {
        let d = rr[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = u.column_mut(k);
        col *= ph;
    }
    u
}

/// Haar-random normalized vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v / r(n)
}

/// Dense generalized Pauli shift `X|j> = |j+1 mod d>`.
pub fn shift_matrix(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| if i == (j + 1) % d { ONE } else { ZERO })
}

/// Dense generalized Pauli clock `Z|j> = w^j |j>`.
pub fn clock_matrix(d: usize) -> CMat {
    let w = 2.0 * std::f64::consts::PI / d as f64;
    CMat::from_fn(d, d, |i, j| if i == j { C64::from_polar(1.0, w * i as f64) } else { ZERO })
}

/// Discrete Fourier transform `F|j> = sum_k w^{jk}|k>/sqrt(d)`.
pub fn fourier_matrix(d: usize) -> CMat {
    let w = 2.0 * std::f64::consts::PI / d as f64;
    let s = 1.0 / (d as f64).sqrt();
    CMat::from_fn(d, d, |k, j| C64::from_polar(s, w * ((j * k) % d) as f64))
}

/// Eigenvalues of a general square matrix, sorted by decreasing modulus.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = m
        .clone()
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut v: Vec<C64> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    v.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(v)
}

/// Right singular vector of the smallest singular value, and that value.
pub fn null_vector(m: &CMat) -> (CVec, f64) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .unwrap_or((0, 0.0));
    // a short matrix has a null space beyond its rows
    if vt.nrows() < n {
        let mut rest = CMat::identity(n, n);
        rest -= vt.adjoint() * &vt;
        let col = (0..n).max_by(|&a, &b| rest.column(a).norm().total_cmp(&rest.column(b).norm())).unwrap_or(0);
        let v = rest.column(col).into_owned();
        let nv = v.norm();
        return (v / r(nv), 0.0);
    }
    (vt.row(k).adjoint(), s)
}

pub fn mat_pow(m: &CMat, mut p: usize) -> CMat {
    let mut base = m.clone();
    let mut acc = CMat::identity(m.nrows(), m.ncols());
    while p > 0 {
        if p & 1 == 1 {
            acc = &acc * &base;
        }
        p >>= 1;
        if p > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Linear algebra over GF(2) on bit-packed rows.
pub mod gf2 {
    /// Dense bit matrix, one `Vec<u64>` per row.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct BitMatrix {
        pub ncols: usize,
        pub rows: Vec<Vec<u64>>,
    }

    pub fn words(n: usize) -> usize {
        n.div_ceil(64)
    }

    pub fn get(row: &[u64], j: usize) -> bool {
        (row[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(row: &mut [u64], j: usize, v: bool) {
        if v {
            row[j / 64] |= 1 << (j % 64);
        } else {
            row[j / 64] &= !(1 << (j % 64));
        }
    }

    pub fn xor_into(dst: &mut [u64], src: &[u64]) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= s;
        }
    }

    impl BitMatrix {
        pub fn zeros(nrows: usize, ncols: usize) -> Self {
            BitMatrix { ncols, rows: vec![vec![0; words(ncols)]; nrows] }
        }

        pub fn from_bools(rows: &[Vec<bool>]) -> Self {
            let ncols = rows.first().map_or(0, |r| r.len());
            let mut m = BitMatrix::zeros(rows.len(), ncols);
            for (i, row) in rows.iter().enumerate() {
                for (j, &b) in row.iter().enumerate() {
                    set(&mut m.rows[i], j, b);
                }
            }
            m
        }

        pub fn nrows(&self) -> usize {
            self.rows.len()
        }

        pub fn get(&self, i: usize, j: usize) -> bool {
            get(&self.rows[i], j)
        }

        pub fn set(&mut self, i: usize, j: usize, v: bool) {
            set(&mut self.rows[i], j, v)
        }

        /// Reduced row echelon form in place; returns pivot columns.
        pub fn rref(&mut self) -> Vec<usize> {
            let mut pivots = Vec::new();
            let mut r = 0;
            for col in 0..self.ncols {
                if r == self.nrows() {
                    break;
                }
                let Some(p) = (r..self.nrows()).find(|&i| self.get(i, col)) else {
                    continue;
                };
                self.rows.swap(r, p);
                let pivot = self.rows[r].clone();
                for i in 0..self.nrows() {
                    if i != r && self.get(i, col) {
                        xor_into(&mut self.rows[i], &pivot);
                    }
                }
                pivots.push(col);
                r += 1;
            }
            pivots
        }

        pub fn rank(&self) -> usize {
            self.clone().rref().len()
        }

        /// Basis of `{x : M x = 0}`.
        pub fn kernel(&self) -> Vec<Vec<bool>> {
            let mut m = self.clone();
            let pivots = m.rref();
            let free: Vec<usize> = (0..self.ncols).filter(|c| !pivots.contains(c)).collect();
            free.iter()
                .map(|&f| {
                    let mut x = vec![false; self.ncols];
                    x[f] = true;
                    for (r, &p) in pivots.iter().enumerate() {
                        if m.get(r, f) {
                            x[p] = true;
                        }
                    }
                    x
                })
                .collect()
        }

        /// One solution of `M x = b`, if any.
        pub fn solve(&self, b: &[bool]) -> Option<Vec<bool>> {
            let n = self.ncols;
            let mut aug = BitMatrix::zeros(self.nrows(), n + 1);
            for i in 0..self.nrows() {
                for j in 0..n {
                    aug.set(i, j, self.get(i, j));
                }
                aug.set(i, n, b[i]);
            }
            let pivots = aug.rref();
            if pivots.last() == Some(&n) {
                return None;
            }
            let mut x = vec![false; n];
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = aug.get(r, n);
            }
            Some(x)
        }

        pub fn mul_vec(&self, x: &[bool]) -> Vec<bool> {
            (0..self.nrows())
                .map(|i| (0..self.ncols).filter(|&j| self.get(i, j) && x[j]).count() % 2 == 1)
                .collect()
        }
    }
}
