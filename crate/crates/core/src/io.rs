//! JSON encodings shared by the CLI and the golden-file tests.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::CMat;
use crate::statevector::{PureState, QuditRegister};
use crate::C64;

/// Complex number as `[re, im]`.
pub type JsonComplex = [f64; 2];
/// Matrix as a list of rows.
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn c_to_json(z: C64) -> JsonComplex {
    [z.re, z.im]
}

pub fn c_from_json(z: JsonComplex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn vec_to_json(v: &[C64]) -> Vec<JsonComplex> {
    v.iter().map(|&z| c_to_json(z)).collect()
}

pub fn vec_from_json(v: &[JsonComplex]) -> Vec<C64> {
    v.iter().map(|&z| c_from_json(z)).collect()
}

pub fn mat_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| c_to_json(m[(i, j)])).collect()).collect()
}

pub fn mat_from_json(rows: &JsonMatrix) -> Result<CMat> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return invalid("ragged matrix");
    }
    Ok(CMat::from_fn(nr, nc, |i, j| c_from_json(rows[i][j])))
}

/// State dump: register descriptor plus amplitudes in register order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDump {
    pub register: QuditRegister,
    pub amplitudes: Vec<JsonComplex>,
}

impl StateDump {
    pub fn from_state(s: &PureState) -> Result<Self> {
        Ok(StateDump { register: s.register().clone(), amplitudes: vec_to_json(&s.amplitudes()?) })
    }

    pub fn to_state(&self) -> Result<PureState> {
        PureState::from_amplitudes(self.register.clone(), vec_from_json(&self.amplitudes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE, ZERO};

    #[test]
    fn state_dump_round_trip() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureState::from_amplitudes(QuditRegister::uniform(1, 2), vec![c(h, 0.0), c(0.0, h)]).unwrap();
        let js = serde_json::to_string(&StateDump::from_state(&s).unwrap()).unwrap();
        let back: StateDump = serde_json::from_str(&js).unwrap();
        assert!((back.to_state().unwrap().fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!(serde_json::from_str::<StateDump>(&js.replace("\"amplitudes\"", "\"amps\"")).is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = CMat::from_row_slice(2, 2, &[ONE, ZERO, c(0.5, -1.0), ONE]);
        assert_eq!(mat_from_json(&mat_to_json(&m)).unwrap(), m);
        assert!(mat_from_json(&vec![vec![[1.0, 0.0]], vec![]]).is_err());
    }
}
