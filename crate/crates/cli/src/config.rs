//! Per-command settings; each may also come from a `--config` JSON file.
//! Flags given on the command line win over the file; unknown keys in the
//! file are rejected.

use std::path::PathBuf;

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

pub trait Merge: Sized + DeserializeOwned {
    fn config_path(&self) -> Option<&PathBuf>;
    /// `self` (command line) takes precedence over `file`.
    fn merge(self, file: Self) -> Self;
}

pub fn load<T: Merge>(cli: T) -> CliResult<T> {
    let Some(path) = cli.config_path() else { return Ok(cli) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: T = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cli.merge(file))
}

macro_rules! merge_impl {
    ($t:ty; options: $($o:ident),*; flags: $($b:ident),*) => {
        impl Merge for $t {
            fn config_path(&self) -> Option<&PathBuf> {
                self.config.as_ref()
            }

            fn merge(mut self, file: Self) -> Self {
                $( self.$o = self.$o.or(file.$o); )*
                $( self.$b = self.$b || file.$b; )*
                self
            }
        }
    };
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepareArgs {
    /// Protocol family.
    #[arg(long, value_parser = ["ghz", "w", "rg", "tc"])]
    pub protocol: Option<String>,
    /// Number of sites (linear size for the toric code).
    #[arg(long)]
    pub n: Option<usize>,
    /// RG fixed-point specification (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_parser = ["dense", "tableau"])]
    pub backend: Option<String>,
    /// `sample` runs one seeded branch, `enumerate` every branch.
    #[arg(long, value_parser = ["sample", "enumerate"])]
    pub mode: Option<String>,
    /// Required in sample mode.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
merge_impl!(PrepareArgs; options: protocol, n, spec, backend, mode, seed, out; flags: );

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpsArgs {
    /// Bundled tensor: product, ghz, aklt, w, cluster.
    #[arg(long, conflicts_with = "file")]
    pub fixture: Option<String>,
    /// MPS file `{d, chi, tensor[s][l][r]}`.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Blocking sizes for the bound sweep.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<usize>>,
    /// Number of blocks in the overlap comparison.
    #[arg(long)]
    pub m: Option<usize>,
    /// Accept tensors that split into several normal blocks.
    #[arg(long)]
    pub allow_blocks: bool,
    /// Compile and run the preparation on this many sites.
    #[arg(long)]
    pub pipeline_n: Option<usize>,
    /// Blocking size for the compiled preparation; defaults to the first `q`.
    #[arg(long)]
    pub pipeline_q: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
merge_impl!(MpsArgs; options: fixture, file, q, m, pipeline_n, pipeline_q, out; flags: allow_blocks);

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseArgs {
    #[arg(long, value_parser = ["prop1", "arealaw", "cj"])]
    pub check: Option<String>,
    /// State dump (JSON) to analyse.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Built-in state instead of `--in`.
    #[arg(long, value_parser = ["ghz", "w", "tc", "product"])]
    pub state: Option<String>,
    /// Protocol to run for the area-law audit.
    #[arg(long, value_parser = ["ghz", "w", "rg", "tc"])]
    pub protocol: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Lattice dimensions, e.g. `8` or `4,4`; periodic.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Operator on A as `P:sites`, P one of X, Y, Z, sp, sm; e.g. `Z:0` or `X:0,1,2,3`.
    #[arg(long)]
    pub x: Option<String>,
    /// Operator on B, same syntax as `--x`.
    #[arg(long)]
    pub y: Option<String>,
    /// Claimed circuit depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Area-law constant; defaults to `2 l log2 d`.
    #[arg(long)]
    pub c: Option<f64>,
    /// Relative singular-value cutoff for the Schmidt rank.
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resource state for the Clifford-unitary check.
    #[arg(long, value_parser = ["ghz", "plus", "path", "tc"])]
    pub resource: Option<String>,
    /// Number of resource qubits (linear size for `tc`).
    #[arg(long)]
    pub m: Option<usize>,
    /// Vertices at which to locally complement the resource graph.
    #[arg(long, value_delimiter = ',')]
    pub lc: Option<Vec<usize>>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
merge_impl!(DiagnoseArgs; options: check, input, state, protocol, n, dims, x, y, depth, c, rank_tol, seed, resource, m, lc, report; flags: );

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RangeArgs {
    /// Circuit file (JSON) acting on one qudit per site.
    #[arg(long, conflicts_with_all = ["random", "translation"])]
    pub circuit: Option<PathBuf>,
    /// Random brickwork circuit on a chain.
    #[arg(long)]
    pub random: bool,
    /// The translation operator itself.
    #[arg(long)]
    pub translation: bool,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
merge_impl!(RangeArgs; options: circuit, n, d, depth, seed, out; flags: random, translation);

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShiftArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
merge_impl!(ShiftArgs; options: n, d, out; flags: );
