use super::Circuit;
use crate::capacity::check_amplitudes;
use crate::error::{invalid, Result};
use crate::lattice::Lattice;
use crate::linalg::{CMat, ONE, ZERO};
use crate::statevector::{PureState, QuditRegister};
use crate::C64;

/// Largest composite dimension accepted by [`estimate_range`].
pub const MAX_RANGE_DIM: usize = 1 << 14;

/// Dense unitary of a circuit that neither creates nor discards entries.
pub fn circuit_unitary(circuit: &Circuit, register: &QuditRegister) -> Result<CMat> {
    let fin = circuit.final_register(register)?;
    if fin.keys() != register.keys() {
        return invalid("circuit changes the register; it has no unitary on the input space");
    }
    let dim = register.total_dim();
    check_amplitudes("circuit unitary", dim * dim)?;
    let dim = dim as usize;
    let mut u = CMat::zeros(dim, dim);
    for j in 0..dim {
        let mut e = vec![ZERO; dim];
        e[j] = ONE;
        let mut s = PureState::from_amplitudes(register.clone(), e)?;
        circuit.run(&mut s)?;
        let col = s.amplitudes()?;
        for (i, a) in col.into_iter().enumerate() {
            u[(i, j)] = a;
        }
    }
    Ok(u)
}

/// Entries (by register position) on which `y` acts non-trivially.
///
/// Entry `j` is in the support unless `y = 1_j ⊗ tr_j(y)/d_j` within
/// `tol * ||y||_F` in Frobenius norm.
pub fn operator_support(y: &CMat, dims: &[usize], tol: f64) -> Vec<usize> {
    let total: usize = dims.iter().product();
    assert_eq!(y.nrows(), total);
    let scale = y.norm();
    let mut out = Vec::new();
    for j in 0..dims.len() {
        let d = dims[j];
        let st: usize = dims[j + 1..].iter().product();
        let zero_digit: Vec<usize> = (0..total).filter(|&r| (r / st) % d == 0).collect();
        let mut res = 0.0;
        for &r0 in &zero_digit {
            for &c0 in &zero_digit {
                let mut avg = ZERO;
                for k in 0..d {
                    avg += y[(r0 + k * st, c0 + k * st)];
                }
                avg /= d as f64;
                for k in 0..d {
                    for kp in 0..d {
                        let v = y[(r0 + k * st, c0 + kp * st)] - if k == kp { avg } else { ZERO };
                        res += v.norm_sqr();
                    }
                }
            }
        }
        if res.sqrt() > tol * scale {
            out.push(j);
        }
    }
    out
}

/// Range of a unitary on a lattice with one qudit of `local_dim` per site:
/// the largest distance by which `U^dag X_i U` spreads a single-site operator.
pub fn estimate_range(u: &CMat, lattice: &Lattice) -> Result<usize> {
    let m = lattice.num_sites();
    let d = lattice.local_dim();
    let total = (d as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > MAX_RANGE_DIM as u128 {
        return Err(crate::Error::Capacity { what: "range estimation".into(), needed: total, limit: MAX_RANGE_DIM as u128 });
    }
    let total = total as usize;
    if u.nrows() != total || u.ncols() != total {
        return invalid(format!("unitary is {}x{}, lattice needs {total}", u.nrows(), u.ncols()));
    }
    let dims = vec![d; m];
    let w = 2.0 * std::f64::consts::PI / d as f64;
    let ud = u.adjoint();
    let mut range = 0;
    for i in 0..m {
        let st = d.pow((m - 1 - i) as u32);
        for a in 0..d {
            for b in 0..d {
                if a == 0 && b == 0 {
                    continue;
                }
                // P U with P = X^a Z^b on site i
                let mut pu = CMat::zeros(total, total);
                for r in 0..total {
                    let k = (r / st) % d;
                    let to = r - k * st + ((k + a) % d) * st;
                    let ph = C64::from_polar(1.0, w * (b * k) as f64);
                    for c in 0..total {
                        pu[(to, c)] = ph * u[(r, c)];
                    }
                }
                let y = &ud * pu;
                for j in operator_support(&y, &dims, 1e-9) {
                    range = range.max(lattice.site_distance(i, j));
                }
            }
        }
    }
    Ok(range)
}
