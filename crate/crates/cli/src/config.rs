use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::output::CliError;

pub const MAX_WEIGHT: i64 = 40;
pub const MAX_INDEX: u32 = 12;
pub const MAX_QPREC: i64 = 40;

#[derive(Parser, Debug)]
#[command(name = "fj", version, about = "Exact genus-2 Fourier-Jacobi computations")]
pub struct Cli {
    /// Write the artifact here and the manifest next to it.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Holomorphic Jacobi forms.
    #[command(subcommand)]
    Jacobi(JacobiCmd),
    /// Formal Fourier-Jacobi series.
    #[command(subcommand)]
    Fj(FjCmd),
    /// Siegel tables and the symmetric-space solver.
    #[command(subcommand)]
    Siegel(SiegelCmd),
    /// Even lattices.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Weil representations.
    #[command(subcommand)]
    Weil(WeilCmd),
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum JacobiCmd {
    /// Echelonized basis of J_{k,m} to q-precision N.
    Basis {
        #[arg(short)]
        k: i64,
        #[arg(short)]
        m: u32,
        #[arg(short = 'N', default_value_t = 8)]
        n: i64,
    },
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRef {
    pub path: PathBuf,
    /// Which series to take when the file holds several (a solver basis).
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum FjCmd {
    /// Symmetry and validity report for every series in a file.
    Check { path: PathBuf },
    /// Tensor product of two series.
    Tensor {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0)]
        a_index: usize,
        #[arg(long, default_value_t = 0)]
        b_index: usize,
    },
    /// Pairing of a Hom-valued series with a series.
    Pair {
        g: PathBuf,
        f: PathBuf,
        /// Target representation; defaults to the trivial one of the
        /// matching dimension.
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value_t = 0)]
        g_index: usize,
        #[arg(long, default_value_t = 0)]
        f_index: usize,
    },
    /// Formal inverse of a scalar series.
    Invert {
        #[command(flatten)]
        series: SeriesRef,
    },
    /// Formal expansion of g / h.
    Quotient {
        g: PathBuf,
        h: PathBuf,
        #[arg(long, default_value_t = 0)]
        g_index: usize,
        #[arg(long, default_value_t = 0)]
        h_index: usize,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SiegelCmd {
    /// Basis of symmetric formal series of weight k.
    Solve {
        /// Weight, an integer or "p/2".
        #[arg(short, allow_hyphen_values = true)]
        k: String,
        #[arg(short = 'M', default_value_t = 6)]
        m: usize,
        #[arg(short = 'N', default_value_t = 8)]
        n: i64,
        /// "trivial", "trivial^d" or a representation JSON file.
        #[arg(long, default_value = "trivial")]
        rep: String,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        stabilize: bool,
        /// Cap on (M, N) escalations when stabilizing.
        #[arg(long, default_value_t = 3)]
        max_escalations: usize,
    },
    /// Expected dimensions for even k up to max-k, optionally solved.
    Dims {
        #[arg(long)]
        max_k: i64,
        /// Also run the solver at (M, N) and compare.
        #[arg(long)]
        solve: bool,
        #[arg(short = 'M', default_value_t = 6)]
        m: usize,
        #[arg(short = 'N', default_value_t = 8)]
        n: i64,
    },
    /// Coefficient table of a symmetric series.
    Table {
        #[command(flatten)]
        series: SeriesRef,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LatticeCmd {
    /// Discriminant form of a Gram matrix file.
    Disc { gram: PathBuf },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum WeilCmd {
    /// Images of S and T for a discriminant form file.
    Genus1 { disc: PathBuf },
    /// Genus-2 named-element images on (L'/L)^2.
    Genus2 {
        disc: PathBuf,
        /// delta = zeta_8^root * swap.
        #[arg(long, default_value_t = 0)]
        delta_root: u8,
    },
}

fn bound<T: PartialOrd + std::fmt::Display>(name: &str, v: T, lo: T, hi: T) -> Result<(), CliError> {
    if v < lo || v > hi {
        return Err(CliError::InvalidConfig(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

impl Command {
    /// Range checks on numeric parameters.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Command::Jacobi(JacobiCmd::Basis { k, m, n }) => {
                bound("k", *k, -MAX_WEIGHT, MAX_WEIGHT)?;
                bound("m", *m, 0, MAX_INDEX)?;
                bound("N", *n, 1, MAX_QPREC)
            }
            Command::Siegel(SiegelCmd::Solve { m, n, max_escalations, .. }) => {
                bound("M", *m, 0, MAX_INDEX as usize)?;
                bound("N", *n, 1, MAX_QPREC)?;
                bound("max-escalations", *max_escalations, 0, 8)
            }
            Command::Siegel(SiegelCmd::Dims { max_k, m, n, .. }) => {
                bound("max-k", *max_k, 0, MAX_WEIGHT)?;
                bound("M", *m, 0, MAX_INDEX as usize)?;
                bound("N", *n, 1, MAX_QPREC)
            }
            Command::Weil(WeilCmd::Genus2 { delta_root, .. }) => bound("delta-root", *delta_root, 0, 7),
            _ => Ok(()),
        }
    }

    /// Input files whose digests go into the manifest.
    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Command::Jacobi(_) | Command::Siegel(SiegelCmd::Dims { .. }) => vec![],
            Command::Fj(FjCmd::Check { path }) => vec![path.clone()],
            Command::Fj(FjCmd::Tensor { a, b, .. }) => vec![a.clone(), b.clone()],
            Command::Fj(FjCmd::Pair { g, f, sigma, .. }) => {
                let mut v = vec![g.clone(), f.clone()];
                v.extend(sigma.iter().filter(|s| !s.starts_with("trivial")).map(PathBuf::from));
                v
            }
            Command::Fj(FjCmd::Invert { series }) | Command::Siegel(SiegelCmd::Table { series }) => {
                vec![series.path.clone()]
            }
            Command::Fj(FjCmd::Quotient { g, h, .. }) => vec![g.clone(), h.clone()],
            Command::Siegel(SiegelCmd::Solve { rep, .. }) => {
                if rep.starts_with("trivial") {
                    vec![]
                } else {
                    vec![PathBuf::from(rep)]
                }
            }
            Command::Lattice(LatticeCmd::Disc { gram }) => vec![gram.clone()],
            Command::Weil(WeilCmd::Genus1 { disc }) | Command::Weil(WeilCmd::Genus2 { disc, .. }) => vec![disc.clone()],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Jacobi(_) => "jacobi basis",
            Command::Fj(FjCmd::Check { .. }) => "fj check",
            Command::Fj(FjCmd::Tensor { .. }) => "fj tensor",
            Command::Fj(FjCmd::Pair { .. }) => "fj pair",
            Command::Fj(FjCmd::Invert { .. }) => "fj invert",
            Command::Fj(FjCmd::Quotient { .. }) => "fj quotient",
            Command::Siegel(SiegelCmd::Solve { .. }) => "siegel solve",
            Command::Siegel(SiegelCmd::Dims { .. }) => "siegel dims",
            Command::Siegel(SiegelCmd::Table { .. }) => "siegel table",
            Command::Lattice(_) => "lattice disc",
            Command::Weil(WeilCmd::Genus1 { .. }) => "weil genus1",
            Command::Weil(WeilCmd::Genus2 { .. }) => "weil genus2",
        }
    }
}
