//! Regular lattices in one and two dimensions.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A regular `N` or `N x N` lattice with row-major site numbering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatticeConfig", into = "LatticeConfig")]
pub struct Lattice {
    dims: Vec<usize>,
    periodic: bool,
    local_dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeConfig {
    dims: Vec<usize>,
    #[serde(default = "default_true")]
    periodic: bool,
    local_dim: usize,
}

fn default_true() -> bool {
    true
}

impl TryFrom<LatticeConfig> for Lattice {
    type Error = crate::Error;
    fn try_from(c: LatticeConfig) -> Result<Self> {
        Lattice::new(c.dims, c.periodic, c.local_dim)
    }
}

impl From<Lattice> for LatticeConfig {
    fn from(l: Lattice) -> Self {
        LatticeConfig { dims: l.dims, periodic: l.periodic, local_dim: l.local_dim }
    }
}

impl Lattice {
    pub fn new(dims: Vec<usize>, periodic: bool, local_dim: usize) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return invalid(format!("lattice must be 1D or 2D, got {} dims", dims.len()));
        }
        if dims.iter().any(|&n| n == 0) {
            return invalid("lattice dimensions must be positive");
        }
        if local_dim < 2 {
            return invalid(format!("local dimension must be >= 2, got {local_dim}"));
        }
        Ok(Lattice { dims, periodic, local_dim })
    }

    /// Periodic ring of `n` sites.
    pub fn chain(n: usize, local_dim: usize) -> Result<Self> {
        Lattice::new(vec![n], true, local_dim)
    }

    /// Periodic `n x n` torus.
    pub fn square(n: usize, local_dim: usize) -> Result<Self> {
        Lattice::new(vec![n, n], true, local_dim)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn num_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut c = vec![0; self.dims.len()];
        let mut rest = site;
        for (k, &n) in self.dims.iter().enumerate().rev() {
            c[k] = rest % n;
            rest /= n;
        }
        c
    }

    pub fn site(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims.len() {
            return invalid("coordinate arity does not match lattice");
        }
        let mut s = 0;
        for (&c, &n) in coords.iter().zip(&self.dims) {
            if c >= n {
                return invalid(format!("coordinate {c} out of range {n}"));
            }
            s = s * n + c;
        }
        Ok(s)
    }

    /// Site at `coords` with each coordinate reduced modulo the lattice size.
    pub fn site_wrapped(&self, coords: &[isize]) -> usize {
        let mut s = 0;
        for (&c, &n) in coords.iter().zip(&self.dims) {
            s = s * n + c.rem_euclid(n as isize) as usize;
        }
        s
    }

    /// Sorted, deduplicated nearest neighbours.
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let c = self.coords(site);
        let mut out = BTreeSet::new();
        for k in 0..self.dims.len() {
            let n = self.dims[k];
            for step in [-1isize, 1] {
                let v = c[k] as isize + step;
                if !self.periodic && (v < 0 || v >= n as isize) {
                    continue;
                }
                let mut cc = c.clone();
                cc[k] = v.rem_euclid(n as isize) as usize;
                let t = self.site(&cc).expect("in range");
                if t != site {
                    out.insert(t);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Graph distance between two sites.
    pub fn site_distance(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        ca.iter()
            .zip(&cb)
            .zip(&self.dims)
            .map(|((&x, &y), &n)| {
                let d = x.abs_diff(y);
                if self.periodic {
                    d.min(n - d)
                } else {
                    d
                }
            })
            .sum()
    }

    fn check_region(&self, r: &Region) -> Result<()> {
        if let Some(&s) = r.sites.iter().find(|&&s| s >= self.num_sites()) {
            return invalid(format!("site {s} outside lattice of {} sites", self.num_sites()));
        }
        Ok(())
    }

    /// Minimal number of edges between any site of `a` and any site of `b`.
    pub fn distance(&self, a: &Region, b: &Region) -> Result<usize> {
        if a.is_empty() || b.is_empty() {
            return invalid("distance needs non-empty regions");
        }
        self.check_region(a)?;
        self.check_region(b)?;
        let target: BTreeSet<usize> = b.sites.iter().copied().collect();
        let mut dist = vec![usize::MAX; self.num_sites()];
        let mut queue = VecDeque::new();
        for &s in &a.sites {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(s) = queue.pop_front() {
            if target.contains(&s) {
                return Ok(dist[s]);
            }
            for t in self.neighbors(s) {
                if dist[t] == usize::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        invalid("regions are disconnected")
    }

    /// Inner boundary of `a`: its sites adjacent to the complement.
    pub fn boundary(&self, a: &Region) -> Result<(Region, usize)> {
        self.check_region(a)?;
        if a.is_empty() || a.len() == self.num_sites() {
            return invalid("boundary needs a proper non-empty region");
        }
        let inside: BTreeSet<usize> = a.sites.iter().copied().collect();
        let sites: Vec<usize> = a
            .sites
            .iter()
            .copied()
            .filter(|&s| self.neighbors(s).iter().any(|t| !inside.contains(t)))
            .collect();
        let n = sites.len();
        Ok((Region { sites }, n))
    }
}

/// An ordered set of lattice sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Region {
    sites: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Region {
    type Error = crate::Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Region::new(v)
    }
}

impl From<Region> for Vec<usize> {
    fn from(r: Region) -> Self {
        r.sites
    }
}

impl Region {
    /// Sorts the sites; duplicates are rejected.
    pub fn new(mut sites: Vec<usize>) -> Result<Self> {
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return invalid("region contains duplicate sites");
        }
        Ok(Region { sites })
    }

    pub fn interval(start: usize, len: usize) -> Self {
        Region { sites: (start..start + len).collect() }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.sites.binary_search(&s).is_ok()
    }

    pub fn complement(&self, lat: &Lattice) -> Region {
        Region { sites: (0..lat.num_sites()).filter(|&s| !self.contains(s)).collect() }
    }
}
