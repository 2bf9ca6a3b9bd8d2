use serde::{Deserialize, Serialize};

use super::{canonicalize, Mps, TransferMatrix};
use crate::error::{invalid, Error, Result};
use crate::linalg::{complete_to_unitary, mat_pow, null_vector, pinv, psd_sqrt, r, spectral_norm, CMat, CVec};
use crate::C64;

/// Right and left fixed points of a transfer matrix as `chi x chi` matrices.
///
/// Both are Hermitian up to rounding, `right` has unit Frobenius norm and
/// `tr(left^dag right) = 1`.
#[derive(Clone, Debug)]
pub struct FixedPoints {
    pub right: CMat,
    pub left: CMat,
}

impl FixedPoints {
    pub fn right_vec(&self) -> CVec {
        vec_of(&self.right)
    }

    pub fn left_vec(&self) -> CVec {
        vec_of(&self.left)
    }

    /// `|a><b|`, the fixed-point projector.
    pub fn tau_bb(&self) -> CMat {
        self.right_vec() * self.left_vec().adjoint()
    }
}

fn vec_of(m: &CMat) -> CVec {
    let n = m.nrows();
    CVec::from_fn(n * m.ncols(), |k, _| m[(k / n, k % n)])
}

fn unvec(v: &CVec, chi: usize) -> CMat {
    CMat::from_fn(chi, chi, |i, j| v[i * chi + j])
}

/// Rescale by a phase so the trace (or largest entry) is real and positive, then hermitize.
fn fix_phase(m: CMat) -> CMat {
    let t = m.trace();
    let pivot = if t.norm() > 1e-10 * m.norm() { t } else { *m.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty") };
    let m = m * (pivot.conj() / pivot.norm());
    (&m + m.adjoint()) * r(0.5)
}

/// Fixed points of `tau` for the eigenvalue `lambda`.
pub fn fixed_points(tau: &CMat, chi: usize, lambda: C64) -> Result<FixedPoints> {
    let id = CMat::identity(chi * chi, chi * chi);
    let (a, _) = null_vector(&(tau - &id * lambda));
    let (b, _) = null_vector(&(tau.adjoint() - &id * lambda.conj()));
    let mut x = fix_phase(unvec(&a, chi));
    x /= r(x.norm());
    let mut y = fix_phase(unvec(&b, chi));
    let ov = y.conjugate().component_mul(&x).sum();
    if ov.norm() < 1e-12 {
        return Err(Error::Numerical("left and right fixed points are orthogonal".into()));
    }
    y /= ov.conj();
    Ok(FixedPoints { right: x, left: y })
}

/// `Rl(T)[(l r), (l' r')] = T[(l' l), (r' r)]`, so that `Rl(tau_AB) = B^dag A`.
pub fn realign(t: &CMat, chi: usize) -> CMat {
    let n = chi * chi;
    CMat::from_fn(n, n, |row, col| {
        let (l, rr) = (row / chi, row % chi);
        let (lp, rp) = (col / chi, col % chi);
        t[(lp * chi + l, rp * chi + rr)]
    })
}

pub fn unrealign(m: &CMat, chi: usize) -> CMat {
    let n = chi * chi;
    CMat::from_fn(n, n, |row, col| {
        let (lp, l) = (row / chi, row % chi);
        let (rp, rr) = (col / chi, col % chi);
        m[(l * chi + rr, lp * chi + rp)]
    })
}

/// `tr[(sum_s A^s (x) conj B^s)^m] = <psi_m(B)|phi_m(A)>`.
pub fn overlap(a: &Mps, b: &Mps, m: usize) -> Result<C64> {
    if a.d() != b.d() || a.chi() != b.chi() {
        return invalid("tensors must share physical and bond dimensions");
    }
    let n = a.chi() * a.chi();
    let tau = a.tensors().iter().zip(b.tensors()).fold(CMat::zeros(n, n), |acc, (x, y)| acc + crate::linalg::kron(x, &y.conjugate()));
    Ok(mat_pow(&tau, m).trace())
}

/// `|<psi_m(B)|phi_m(A)> - 1|`.
pub fn fidelity_deficit(a: &Mps, b: &Mps, m: usize) -> Result<f64> {
    if m < 2 {
        return invalid("deficit needs M >= 2 blocks");
    }
    Ok((overlap(a, b, m)? - r(1.0)).norm())
}

/// The RG fixed-point tensor `B = U sqrt(Rl(tau_BB))` next to a blocked tensor `A = U sqrt(A^dag A)`.
#[derive(Clone, Debug)]
pub struct FixedPointTensor {
    pub b: Mps,
    /// Partial isometry `d^q x chi^2` with `A = U A~`.
    pub u: CMat,
    pub a_tilde: CMat,
    pub b_tilde: CMat,
    pub points: FixedPoints,
    /// `||U^dag U - P||` with `P` the support projector of `A~`.
    pub isometry_defect: f64,
    /// `||tau_BB^2 - tau_BB||`.
    pub idempotency_defect: f64,
}

pub fn rg_fixed_point_tensor(a: &Mps) -> Result<FixedPointTensor> {
    let chi = a.chi();
    let tm = TransferMatrix::new(a)?;
    let lead = tm.spectrum[0];
    if (lead - r(1.0)).norm() > 1e-8 || tm.second_modulus() >= 1.0 - 1e-9 {
        return Err(Error::NotNormal(format!("leading eigenvalues {lead:.6} and modulus {:.6}", tm.second_modulus())));
    }
    let points = fixed_points(&tm.matrix, chi, lead)?;
    let am = a.as_matrix();
    let a_tilde = psd_sqrt(&(am.adjoint() * &am));
    let a_pinv = pinv(&a_tilde, 1e-10);
    let u = &am * &a_pinv;
    let support = &a_tilde * &a_pinv;
    let isometry_defect = spectral_norm(&(u.adjoint() * &u - &support));
    if isometry_defect > 1e-8 {
        return Err(Error::Numerical(format!("U is not a partial isometry (defect {isometry_defect:.3e})")));
    }
    let tau_bb = points.tau_bb();
    let idempotency_defect = spectral_norm(&(&tau_bb * &tau_bb - &tau_bb));
    if idempotency_defect > 1e-9 {
        return Err(Error::Numerical(format!("fixed-point projector not idempotent ({idempotency_defect:.3e})")));
    }
    let b_tilde = psd_sqrt(&realign(&tau_bb, chi));
    let outside = spectral_norm(&(&b_tilde - &support * &b_tilde));
    if outside > 1e-8 * spectral_norm(&b_tilde).max(1.0) {
        return Err(Error::Numerical(format!("fixed point leaves the support of A (by {outside:.3e})")));
    }
    let b = Mps::from_matrix(&(&u * &b_tilde), chi)?;
    Ok(FixedPointTensor { b, u, a_tilde, b_tilde, points, isometry_defect, idempotency_defect })
}

/// `<psi_m|phi_m>` from `tau^q` alone, without forming the `d^q`-dimensional tensors.
pub fn deficit_from_transfer(tau_q: &CMat, points: &FixedPoints, chi: usize, m: usize) -> Result<C64> {
    if m < 2 {
        return invalid("deficit needs M >= 2 blocks");
    }
    let a_tilde = psd_sqrt(&realign(tau_q, chi));
    let b_tilde = psd_sqrt(&realign(&points.tau_bb(), chi));
    let tau_ab = unrealign(&(&b_tilde * &a_tilde), chi);
    Ok(mat_pow(&tau_ab, m).trace())
}

/// `eps + eps^2 e^eps (1 + eps/M)`.
pub fn envelope(eps: f64, m: usize) -> f64 {
    eps + eps * eps * eps.exp() * (1.0 + eps / m as f64)
}

/// Smallest `|lambda_1|` used for the decay rate; exact fixed points have `lambda_1 = 0`.
const LAMBDA1_FLOOR: f64 = 1e-12;

/// Bound quantities for the fidelity of the RG fixed-point approximant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub chi: usize,
    pub lambda1: f64,
    pub alpha: f64,
    pub q: usize,
    #[serde(rename = "M_sites")]
    pub m_sites: usize,
    #[serde(rename = "Gamma_q")]
    pub gamma_q: f64,
    /// Condition number of the block-diagonalizing similarity; a surrogate
    /// for the Jordan-form constant.
    #[serde(rename = "C_V")]
    pub c_v: f64,
    pub c_v_surrogate: bool,
    #[serde(rename = "Lambda_q")]
    pub lambda_q: f64,
    #[serde(rename = "C_q")]
    pub c_q: f64,
    #[serde(rename = "Ctilde_q")]
    pub ctilde_q: f64,
    pub epsilon_q: f64,
    pub delta_q: f64,
    pub envelope: f64,
    /// The envelope only says something when `epsilon_q < 1`.
    pub envelope_applies: bool,
    pub measured_deficit: f64,
    pub within_envelope: bool,
}

/// `exp(x)` saturating to `f64::MAX` so the report stays serializable.
fn sat_exp(x: f64) -> f64 {
    if x > 709.0 {
        f64::MAX
    } else {
        x.exp()
    }
}

/// Bound quantities for blocking `mps` by `q` and comparing on `m` blocks.
pub fn bound_report(mps: &Mps, q: usize, m: usize) -> Result<BoundReport> {
    if q == 0 || m < 2 {
        return invalid("bound needs q >= 1 and M >= 2");
    }
    let can = canonicalize(mps)?;
    if can.blocks.len() != 1 || !can.blocks[0].tensor.normal.eq(&super::Normality::Yes) {
        return Err(Error::NotNormal(format!("canonical form has {} blocks", can.blocks.len())));
    }
    let t = &can.blocks[0].tensor;
    let chi = t.chi();
    let tm = TransferMatrix::new(t)?;
    let lambda1 = tm.second_modulus();
    let alpha = -lambda1.max(LAMBDA1_FLOOR).ln();
    let points = fixed_points(&tm.matrix, chi, tm.spectrum[0])?;
    let (a, b) = (points.right_vec(), points.left_vec());

    // S = [a, W] with W an orthonormal basis of b-perp splits off the leading block
    let bn = &b / r(b.norm());
    let comp = complete_to_unitary(&CMat::from_column_slice(bn.len(), 1, bn.as_slice()), &[0])?;
    let mut s = comp.clone();
    s.set_column(0, &(&a / r(a.norm())));
    let s_inv = s.clone().try_inverse().ok_or_else(|| Error::Numerical("similarity not invertible".into()))?;
    let c_v = spectral_norm(&s) * spectral_norm(&s_inv);

    let k = (chi * chi - 1) as f64;
    let ln_gamma = 3.0 * (chi as f64).ln() + k * (q as f64).ln() + alpha * k;
    let gamma_q = sat_exp(ln_gamma);
    let ln_lambda = (chi as f64).ln() + c_v.ln() + ln_gamma;
    let lambda_q = sat_exp(ln_lambda);
    let tau_bb_norm = a.norm() * b.norm();
    let b_tilde_norm = (spectral_norm(&points.right) * spectral_norm(&points.left)).sqrt();
    let pre = tau_bb_norm.max(1.0);
    let ln_c = 2.0 * (chi as f64).ln() + pre.ln() + b_tilde_norm.ln() + 0.5 * ln_lambda;
    let ln_ct = pre.ln() + ln_c;
    let ln_delta = ln_ct - alpha * q as f64 / 2.0;
    let delta_q = sat_exp(ln_delta);
    let epsilon_q = sat_exp(ln_delta + (m as f64).ln());
    let env = if epsilon_q < 50.0 { envelope(epsilon_q, m) } else { f64::MAX };

    let ov = deficit_from_transfer(&mat_pow(&tm.matrix, q), &points, chi, m)?;
    let measured_deficit = (ov - r(1.0)).norm();
    Ok(BoundReport {
        chi,
        lambda1,
        alpha,
        q,
        m_sites: m,
        gamma_q,
        c_v,
        c_v_surrogate: true,
        lambda_q,
        c_q: sat_exp(ln_c),
        ctilde_q: sat_exp(ln_ct),
        epsilon_q,
        delta_q,
        envelope: env,
        envelope_applies: epsilon_q < 1.0,
        measured_deficit,
        within_envelope: measured_deficit <= env,
    })
}
