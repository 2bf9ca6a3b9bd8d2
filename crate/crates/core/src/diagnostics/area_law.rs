use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{Lattice, Region};
use crate::linalg::r;
use crate::locc::{run_sampled, Protocol};
use crate::statevector::{EntryKey, PureState, QuditRegister};

/// Relative singular-value cutoff for the Schmidt rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionEntropy {
    pub region: Vec<usize>,
    /// Size of the inner boundary.
    pub boundary: usize,
    /// `log2` of the Schmidt rank across `A : A^c`.
    pub s0: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaLawReport {
    pub depth: usize,
    pub local_dim: usize,
    pub c: f64,
    pub regions: Vec<RegionEntropy>,
    pub max_ratio: f64,
    pub passes: bool,
}

/// `2 l log2 d`: each layer puts at most one gate across the cut per
/// boundary site, and each such gate multiplies the Schmidt rank by at most `d^2`.
pub fn default_area_constant(depth: usize, local_dim: usize) -> f64 {
    2.0 * depth as f64 * (local_dim as f64).log2()
}

/// Intervals `[0, k)` for `k <= n/2` on a chain; `k x k` corner squares on a
/// square lattice.
pub fn default_regions(lattice: &Lattice) -> Result<Vec<Region>> {
    let dims = lattice.dims();
    match dims.len() {
        1 => Ok((1..=dims[0] / 2).map(|k| Region::interval(0, k)).collect()),
        2 => {
            let m = dims[0].min(dims[1]) / 2;
            (1..=m)
                .map(|k| {
                    let mut sites = Vec::new();
                    for x in 0..k {
                        for y in 0..k {
                            sites.push(lattice.site(&[x, y])?);
                        }
                    }
                    Region::new(sites)
                })
                .collect()
        }
        _ => invalid("default regions exist for chains and square lattices only"),
    }
}

/// Area-law audit of a fixed state against the bound for depth `depth`.
pub fn audit_state(
    state: &PureState,
    lattice: &Lattice,
    depth: usize,
    regions: &[Region],
    c: Option<f64>,
) -> Result<AreaLawReport> {
    audit_state_with_tol(state, lattice, depth, regions, c, RANK_TOL)
}

/// [`audit_state`] with an explicit relative Schmidt-rank cutoff.
pub fn audit_state_with_tol(
    state: &PureState,
    lattice: &Lattice,
    depth: usize,
    regions: &[Region],
    c: Option<f64>,
    rank_tol: f64,
) -> Result<AreaLawReport> {
    let c = c.unwrap_or_else(|| default_area_constant(depth, lattice.local_dim()));
    let keys = state.keys();
    let mut out = Vec::with_capacity(regions.len());
    for region in regions {
        let (_, boundary) = lattice.boundary(region)?;
        let inside: Vec<EntryKey> = keys.iter().copied().filter(|k| region.contains(k.site)).collect();
        let s0 = if inside.is_empty() || inside.len() == keys.len() { 0.0 } else { state.max_entropy(&inside, rank_tol)? };
        let ratio = if boundary == 0 {
            if s0 > 0.0 { f64::INFINITY } else { 0.0 }
        } else {
            s0 / boundary as f64
        };
        out.push(RegionEntropy { region: region.sites().to_vec(), boundary, s0, ratio });
    }
    let max_ratio = out.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let passes = out.iter().all(|e| e.s0 <= c * e.boundary as f64 + 1e-9);
    Ok(AreaLawReport { depth, local_dim: lattice.local_dim(), c, regions: out, max_ratio, passes })
}

/// Runs one sampled branch of `protocol` and audits its output. Default
/// regions and `c` come from the protocol's lattice and depth.
pub fn area_law_audit(
    protocol: &Protocol,
    input: &PureState,
    regions: Option<&[Region]>,
    c: Option<f64>,
    seed: u64,
) -> Result<AreaLawReport> {
    let (state, _) = run_sampled(protocol, input, seed)?;
    let lattice = &protocol.circuit.lattice;
    let defaults;
    let regions = match regions {
        Some(r) => r,
        None => {
            defaults = default_regions(lattice)?;
            &defaults
        }
    };
    audit_state(&state, lattice, protocol.depth(), regions, c)
}

/// `n` Bell pairs between sites `i` and `n + i` of a `2n` chain: Schmidt
/// rank `2^n` across `[0, n)` with only two boundary sites.
pub fn bell_pair_volume_state(n: usize) -> Result<(PureState, Lattice)> {
    if n == 0 {
        return invalid("need at least one pair");
    }
    let lat = Lattice::chain(2 * n, 2)?;
    crate::capacity::check_amplitudes("Bell-pair state", 1u128 << (2 * n))?;
    let mut amps = vec![r(0.0); 1 << (2 * n)];
    let a = (0.5f64).powf(n as f64 / 2.0);
    for x in 0..1usize << n {
        amps[(x << n) | x] = r(a);
    }
    Ok((PureState::from_amplitudes(QuditRegister::uniform(2 * n, 2), amps)?, lat))
}
