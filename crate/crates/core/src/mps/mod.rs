//! Translation-invariant matrix product states: canonical form, normality,
//! blocking, transfer-matrix spectra, the RG fixed-point approximant and the
//! bound quantities attached to it.

mod fixed_point;
mod pipeline;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::{c_from_json, c_to_json, JsonComplex};
use crate::linalg::{c, eigenvalues, kron, null_vector, psd_sqrt, r, rank, CMat, CVec, ONE, ZERO};
use crate::statevector::{PureState, QuditRegister};
use crate::C64;

pub use fixed_point::{
    bound_report, deficit_from_transfer, envelope, fidelity_deficit, fixed_points, overlap, realign, rg_fixed_point_tensor,
    unrealign, BoundReport, FixedPointTensor, FixedPoints,
};
pub use pipeline::{compile_blocked, theorem1_pipeline, Theorem1Pipeline};

/// Tolerance on the leading transfer eigenvalue of a canonical tensor.
pub const CANONICAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normality {
    Yes,
    No,
    Unknown,
}

/// `|phi_N> = sum tr(M^{s_1} ... M^{s_N}) |s_1 ... s_N>` with `chi x chi` matrices `M^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    tensors: Vec<CMat>,
    pub normal: Normality,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpsFile {
    d: usize,
    chi: usize,
    /// `[s][l][r]`
    tensor: Vec<Vec<Vec<JsonComplex>>>,
}

impl Serialize for Mps {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tensor = self
            .tensors
            .iter()
            .map(|m| (0..self.chi()).map(|l| (0..self.chi()).map(|rr| c_to_json(m[(l, rr)])).collect()).collect())
            .collect();
        MpsFile { d: self.d(), chi: self.chi(), tensor }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mps {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = MpsFile::deserialize(de)?;
        if f.tensor.len() != f.d {
            return Err(D::Error::custom(format!("tensor has {} physical slices, d = {}", f.tensor.len(), f.d)));
        }
        let mut ts = Vec::with_capacity(f.d);
        for slice in &f.tensor {
            if slice.len() != f.chi || slice.iter().any(|row| row.len() != f.chi) {
                return Err(D::Error::custom(format!("every slice must be {0} x {0}", f.chi)));
            }
            ts.push(CMat::from_fn(f.chi, f.chi, |l, rr| c_from_json(slice[l][rr])));
        }
        Mps::new(ts).map_err(D::Error::custom)
    }
}

impl Mps {
    pub fn new(tensors: Vec<CMat>) -> Result<Self> {
        let Some(first) = tensors.first() else {
            return invalid("MPS needs at least one physical slice");
        };
        let chi = first.nrows();
        if chi == 0 || tensors.iter().any(|m| m.nrows() != chi || m.ncols() != chi) {
            return invalid("MPS slices must be nonempty square matrices of equal size");
        }
        if tensors.iter().any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return invalid("MPS tensor has non-finite entries");
        }
        Ok(Mps { tensors, normal: Normality::Unknown })
    }

    pub fn d(&self) -> usize {
        self.tensors.len()
    }

    pub fn chi(&self) -> usize {
        self.tensors[0].nrows()
    }

    pub fn tensors(&self) -> &[CMat] {
        &self.tensors
    }

    pub fn tensor(&self, s: usize) -> &CMat {
        &self.tensors[s]
    }

    /// `d x chi^2` matrix with rows `s` and columns `(l, r)`.
    pub fn as_matrix(&self) -> CMat {
        let chi = self.chi();
        CMat::from_fn(self.d(), chi * chi, |s, k| self.tensors[s][(k / chi, k % chi)])
    }

    pub fn from_matrix(m: &CMat, chi: usize) -> Result<Self> {
        if m.ncols() != chi * chi {
            return invalid("matrix columns must be chi^2");
        }
        Mps::new((0..m.nrows()).map(|s| CMat::from_fn(chi, chi, |l, rr| m[(s, l * chi + rr)])).collect())
    }

    /// `tau = sum_s M^s (x) conj(M^s)`, acting on `vec(X)` as `X -> sum M X M^dag`.
    pub fn transfer(&self) -> CMat {
        self.tensors.iter().map(|m| kron(m, &m.conjugate())).fold(CMat::zeros(self.chi().pow(2), self.chi().pow(2)), |a, b| a + b)
    }

    pub fn spectrum(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.transfer())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.spectrum()?.first().map_or(0.0, |z| z.norm()))
    }

    pub fn scaled(&self, f: C64) -> Mps {
        Mps { tensors: self.tensors.iter().map(|m| m * f).collect(), normal: self.normal }
    }

    /// `M^s -> g^-1 M^s g`; the state is unchanged.
    pub fn gauged(&self, g: &CMat, g_inv: &CMat) -> Mps {
        Mps { tensors: self.tensors.iter().map(|m| g_inv * m * g).collect(), normal: self.normal }
    }

    pub fn is_zero(&self) -> bool {
        self.tensors.iter().all(|m| m.norm() == 0.0)
    }
}

/// Transfer matrix with its spectrum and fixed points.
///
/// `right` is `vec(X)` with `sum M X M^dag = lambda_0 X`, `left` the
/// corresponding left eigenvector, scaled so that `<left|right> = 1`.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub matrix: CMat,
    pub spectrum: Vec<C64>,
    /// Eigenvalues grouped within `1e-8`, with multiplicities.
    pub clusters: Vec<(C64, usize)>,
    pub right: CVec,
    pub left: CVec,
}

impl TransferMatrix {
    pub fn new(mps: &Mps) -> Result<Self> {
        let matrix = mps.transfer();
        let spectrum = eigenvalues(&matrix)?;
        let mut clusters: Vec<(C64, usize)> = Vec::new();
        for &z in &spectrum {
            match clusters.iter_mut().find(|(w, _)| (*w - z).norm() < 1e-8) {
                Some(cl) => cl.1 += 1,
                None => clusters.push((z, 1)),
            }
        }
        // for a completely positive map the spectral radius is itself an eigenvalue
        let lead = C64::new(spectrum[0].norm(), 0.0);
        let fp = fixed_points(&matrix, mps.chi(), lead)?;
        Ok(TransferMatrix { matrix, spectrum, clusters, right: fp.right_vec(), left: fp.left_vec() })
    }

    /// `|lambda_1|`, zero for a one-dimensional transfer matrix.
    pub fn second_modulus(&self) -> f64 {
        self.spectrum.get(1).map_or(0.0, |z| z.norm())
    }
}

/// A normal block of the canonical form, entering with weight `mu`.
#[derive(Clone, Debug)]
pub struct NormalBlock {
    pub mu: f64,
    pub tensor: Mps,
}

/// `M = (+)_k mu_k M_k` with each `M_k` irreducible and leading eigenvalue 1.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub mps: Mps,
    pub blocks: Vec<NormalBlock>,
}

impl Canonical {
    pub fn is_normal(&self) -> bool {
        self.mps.normal == Normality::Yes
    }
}

/// Brings the tensor to canonical form, splitting reducible tensors into blocks.
///
/// Each block is rescaled to spectral radius 1 and gauged so that
/// `sum_s M^s M^s^dag = 1`. Off-diagonal parts of block-triangular tensors
/// do not contribute to the state under the trace and are dropped.
pub fn canonicalize(mps: &Mps) -> Result<Canonical> {
    if mps.is_zero() {
        return invalid("cannot canonicalize the zero tensor");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d7073);
    let mut pieces = Vec::new();
    split(mps.tensors.clone(), &mut rng, &mut pieces)?;
    let mut blocks = Vec::new();
    for p in pieces {
        let m = Mps::new(p)?;
        let rho = m.spectral_radius()?;
        if rho < 1e-14 {
            continue;
        }
        let mu = rho.sqrt();
        let unit = m.scaled(r(1.0 / mu));
        let mut gauged = right_gauge(&unit)?;
        gauged.normal = if normal_checks(&gauged)? { Normality::Yes } else { Normality::No };
        blocks.push(NormalBlock { mu, tensor: gauged });
    }
    if blocks.is_empty() {
        return invalid("tensor is nilpotent; the state vanishes");
    }
    let chi: usize = blocks.iter().map(|b| b.tensor.chi()).sum();
    let mut sum = vec![CMat::zeros(chi, chi); mps.d()];
    let mut off = 0;
    for b in &blocks {
        let k = b.tensor.chi();
        for (s, m) in sum.iter_mut().enumerate() {
            m.view_mut((off, off), (k, k)).copy_from(&(b.tensor.tensor(s) * r(b.mu)));
        }
        off += k;
    }
    let out = if blocks.len() == 1 {
        let b = &blocks[0];
        let mut m = b.tensor.scaled(r(b.mu));
        // normal up to the overall scale
        m.normal = if (b.mu - 1.0).abs() < 1e-12 { b.tensor.normal } else { Normality::Unknown };
        m
    } else {
        let mut m = Mps::new(sum)?;
        m.normal = Normality::No;
        m
    };
    Ok(Canonical { mps: out, blocks })
}

/// `M -> X^{-1/2} M X^{1/2}` with `X` the fixed point of `X -> sum M X M^dag`.
fn right_gauge(m: &Mps) -> Result<Mps> {
    let chi = m.chi();
    if chi == 1 {
        return Ok(m.clone());
    }
    let fp = fixed_points(&m.transfer(), chi, ONE)?;
    let x = &fp.right;
    let sq = psd_sqrt(x);
    if rank(&sq, 1e-10) < chi {
        return Ok(m.clone());
    }
    let sq_inv = sq.clone().try_inverse().ok_or_else(|| Error::Numerical("fixed point not invertible".into()))?;
    let mut g = m.gauged(&sq, &sq_inv);
    g.normal = m.normal;
    Ok(g)
}

fn split(ts: Vec<CMat>, rng: &mut ChaCha8Rng, out: &mut Vec<Vec<CMat>>) -> Result<()> {
    let chi = ts[0].nrows();
    match invariant_subspace(&ts, rng)? {
        None => out.push(ts),
        Some(p) => {
            let k = p.ncols();
            let q = crate::linalg::complete_to_unitary(&p, &(0..k).collect::<Vec<_>>())?;
            let rot: Vec<CMat> = ts.iter().map(|m| q.adjoint() * m * &q).collect();
            let top = rot.iter().map(|m| m.view((0, 0), (k, k)).into_owned()).collect();
            let bottom = rot.iter().map(|m| m.view((k, k), (chi - k, chi - k)).into_owned()).collect();
            split(top, rng, out)?;
            split(bottom, rng, out)?;
        }
    }
    Ok(())
}

/// Orthonormal basis of the unital algebra generated by the slices, as `chi^2` vectors.
fn algebra_basis(ts: &[CMat]) -> Vec<CMat> {
    let chi = ts[0].nrows();
    let mut basis: Vec<CMat> = Vec::new();
    let add = |basis: &mut Vec<CMat>, m: CMat| -> bool {
        let mut v = m;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dotc(&v);
                v -= b * p;
            }
        }
        let n = v.norm();
        if n > 1e-9 {
            basis.push(v / r(n));
            true
        } else {
            false
        }
    };
    add(&mut basis, CMat::identity(chi, chi));
    let mut frontier = 0;
    while frontier < basis.len() && basis.len() < chi * chi {
        let x = basis[frontier].clone();
        for m in ts {
            add(&mut basis, &x * m);
        }
        frontier += 1;
    }
    basis
}

/// A proper subspace `P` with `M^s P ⊆ P` for all `s`, if one is found.
fn invariant_subspace(ts: &[CMat], rng: &mut ChaCha8Rng) -> Result<Option<CMat>> {
    use rand::Rng;
    let chi = ts[0].nrows();
    if chi == 1 {
        return Ok(None);
    }
    let alg = algebra_basis(ts);
    if alg.len() == chi * chi {
        return Ok(None);
    }
    for _ in 0..8 {
        let mut a = CMat::zeros(chi, chi);
        for b in &alg {
            a += b * c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for lambda in eigenvalues(&a)? {
            let (v, _) = null_vector(&(&a - CMat::identity(chi, chi) * lambda));
            let orbit = CMat::from_columns(&alg.iter().map(|b| b * &v).collect::<Vec<_>>());
            let svd = orbit.clone().svd(true, false);
            let smax = svd.singular_values.max();
            let k = svd.singular_values.iter().filter(|&&s| s > 1e-9 * smax).count();
            if k > 0 && k < chi {
                let u = svd.u.expect("u requested");
                // singular values are not sorted by nalgebra
                let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
                idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
                let cols: Vec<CVec> = idx[..k].iter().map(|&i| u.column(i).into_owned()).collect();
                return Ok(Some(CMat::from_columns(&cols)));
            }
        }
    }
    Err(Error::Numerical("tensor algebra is not full but no invariant subspace was found".into()))
}

fn spectral_gap_ok(spec: &[C64]) -> bool {
    let lead = spec[0];
    (lead - ONE).norm() < CANONICAL_TOL && spec.get(1).map_or(true, |z| z.norm() < 1.0 - 1e-9)
}

/// Products of length `L <= chi^4` span all `chi x chi` matrices.
fn injective_after_blocking(ts: &[CMat]) -> bool {
    let chi = ts[0].nrows();
    let full = chi * chi;
    let mut span = orthonormalize(ts.to_vec());
    for _ in 1..=chi.pow(4) {
        if span.len() == full {
            return true;
        }
        let next: Vec<CMat> = span.iter().flat_map(|x| ts.iter().map(move |m| x * m)).collect();
        span = orthonormalize(next);
        if span.is_empty() {
            return false;
        }
    }
    span.len() == full
}

fn orthonormalize(ms: Vec<CMat>) -> Vec<CMat> {
    let scale = ms.iter().map(|m| m.norm()).fold(0.0, f64::max);
    let mut basis: Vec<CMat> = Vec::new();
    for m in ms {
        let mut v = m;
        for _ in 0..2 {
            for b in &basis {
                let p = b.dotc(&v);
                v -= b * p;
            }
        }
        let n = v.norm();
        if n > 1e-9 * scale.max(1e-300) {
            basis.push(v / r(n));
        }
    }
    basis
}

fn normal_checks(m: &Mps) -> Result<bool> {
    Ok(spectral_gap_ok(&m.spectrum()?) && injective_after_blocking(m.tensors()))
}

/// Unique leading eigenvalue 1 with a gap, and injectivity after blocking.
pub fn is_normal(mps: &Mps) -> Result<bool> {
    let rho = mps.spectral_radius()?;
    if (rho - 1.0).abs() > CANONICAL_TOL {
        return invalid(format!("tensor is not canonical: spectral radius {rho}"));
    }
    normal_checks(mps)
}

/// `A^{(s_1 ... s_q)} = M^{s_1} ... M^{s_q}`, first site slowest-varying.
pub fn block(mps: &Mps, q: usize) -> Result<Mps> {
    if q == 0 {
        return invalid("blocking needs q >= 1");
    }
    let chi = mps.chi();
    let total = (mps.d() as u128).checked_pow(q as u32).unwrap_or(u128::MAX);
    crate::capacity::check_amplitudes("blocked tensor", total.saturating_mul((chi * chi) as u128))?;
    let mut cur = mps.tensors.clone();
    for _ in 1..q {
        cur = cur.iter().flat_map(|p| mps.tensors.iter().map(move |m| p * m)).collect();
    }
    let mut out = Mps::new(cur)?;
    out.normal = mps.normal;
    Ok(out)
}

/// Unnormalized amplitudes `tr(M^{s_1} ... M^{s_n})`, first site slowest-varying.
pub fn mps_amplitudes(mps: &Mps, n: usize) -> Result<Vec<C64>> {
    if n == 0 {
        return invalid("state needs at least one site");
    }
    let d = mps.d();
    let total = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    crate::capacity::check_amplitudes("MPS expansion", total)?;
    let chi = mps.chi();
    let mut out = vec![ZERO; total as usize];
    // depth-first over prefixes; stack[k] is the product of the first k+1 matrices
    let mut stack: Vec<CMat> = vec![CMat::identity(chi, chi); n];
    let mut digits = vec![0usize; n];
    let mut depth = 0;
    loop {
        let prev = if depth == 0 { None } else { Some(&stack[depth - 1]) };
        let next = match prev {
            None => mps.tensors[digits[0]].clone(),
            Some(p) => p * &mps.tensors[digits[depth]],
        };
        stack[depth] = next;
        if depth + 1 < n {
            depth += 1;
            digits[depth] = 0;
            continue;
        }
        let idx = digits.iter().fold(0usize, |acc, &x| acc * d + x);
        out[idx] = stack[depth].trace();
        // advance to the next leaf
        loop {
            digits[depth] += 1;
            if digits[depth] < d {
                break;
            }
            if depth == 0 {
                return Ok(out);
            }
            depth -= 1;
        }
    }
}

/// The normalized state on `n` sites.
pub fn state_from_mps(mps: &Mps, n: usize) -> Result<PureState> {
    let amps = mps_amplitudes(mps, n)?;
    PureState::from_unnormalized(QuditRegister::uniform(n, mps.d()), amps)
}

/// `chi = 1`, `M^s = delta_{s,0}`.
pub fn product_tensor(d: usize) -> Result<Mps> {
    Mps::new((0..d).map(|s| CMat::from_element(1, 1, if s == 0 { ONE } else { ZERO })).collect())
}

/// `M^0 = diag(1,0)`, `M^1 = diag(0,1)`.
pub fn ghz_tensor() -> Mps {
    let m0 = CMat::from_diagonal(&CVec::from_vec(vec![ONE, ZERO]));
    let m1 = CMat::from_diagonal(&CVec::from_vec(vec![ZERO, ONE]));
    Mps::new(vec![m0, m1]).expect("valid fixture")
}

/// Spin-1 AKLT tensor in the order `(+, 0, -)`.
pub fn aklt_tensor() -> Mps {
    let a = (2.0f64 / 3.0).sqrt();
    let b = (1.0f64 / 3.0).sqrt();
    let plus = CMat::from_row_slice(2, 2, &[ZERO, r(a), ZERO, ZERO]);
    let zero = CMat::from_row_slice(2, 2, &[r(-b), ZERO, ZERO, r(b)]);
    let minus = CMat::from_row_slice(2, 2, &[ZERO, ZERO, r(-a), ZERO]);
    Mps::new(vec![plus, zero, minus]).expect("valid fixture")
}

/// `M^0 = 1`, `M^1 = sigma^+`: the W state with open boundaries. Under the
/// trace only the diagonal survives, so it is reducible.
pub fn w_tensor() -> Mps {
    let m1 = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    Mps::new(vec![CMat::identity(2, 2), m1]).expect("valid fixture")
}

/// Ring cluster state: `M^0 = |+><0|`, `M^1 = |-><1|`.
pub fn cluster_tensor() -> Mps {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m0 = CMat::from_row_slice(2, 2, &[r(h), ZERO, r(h), ZERO]);
    let m1 = CMat::from_row_slice(2, 2, &[ZERO, r(h), ZERO, r(-h)]);
    Mps::new(vec![m0, m1]).expect("valid fixture")
}

/// Bundled tensors by name: `product`, `ghz`, `aklt`, `w`, `cluster`.
pub fn fixture(name: &str) -> Result<Mps> {
    match name {
        "product" => product_tensor(2),
        "ghz" => Ok(ghz_tensor()),
        "aklt" => Ok(aklt_tensor()),
        "w" => Ok(w_tensor()),
        "cluster" => Ok(cluster_tensor()),
        other => invalid(format!("unknown MPS fixture `{other}`")),
    }
}
