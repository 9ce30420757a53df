//! Exact-arithmetic engine for genus-2 formal Fourier-Jacobi series.
//!
//! The crate is layered bottom-up:
//!
//! * [`cyclotomic`] and [`linalg`]: exact scalars in `Q(zeta_N)` and sparse
//!   row reduction over them;
//! * [`qseries`]: truncated Laurent series in `q` with Laurent-polynomial
//!   coefficients in `zeta`, Eisenstein series, eta and theta functions;
//! * [`jacobi`]: Jacobi forms as Fourier tables and bases of `J_{k,m}`;
//! * [`rep`]: representations given by images of `delta` and the center,
//!   invariant subspaces and genus-1 Weil representations;
//! * [`lattice`]: even lattices and their discriminant forms;
//! * [`fjseries`]: formal Fourier-Jacobi series with tensor products,
//!   pairings, symmetry checks and formal inversion;
//! * [`siegel`]: Siegel coefficient tables and the symmetric-space solver.

pub mod cyclotomic;
pub mod error;
pub mod fjseries;
pub mod jacobi;
pub mod lattice;
pub mod linalg;
pub mod qseries;
pub mod ratio;
pub mod rep;
pub mod siegel;

pub use cyclotomic::CycNumber;
pub use error::{Error, Result};
pub use ratio::Q64;
