//! Spectral analysis of a periodic fiber-reinforced cylinder with
//! high-contrast coefficients: P1 finite elements on the square cross
//! section, separated vertical modes, and the semi-analytic limit spectrum.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_reporting;
pub mod eigensolve;
pub mod epsilon_spectrum;
pub mod error;
pub mod fem_assembly;
pub mod limit_spectrum;
pub mod mesh2d;
pub mod sparse;
pub mod special_functions;

pub use cli_reporting::{parse_config, run_command, Command, CommandOutcome, RunConfig};
pub use eigensolve::{smallest_eigenpairs, EigenPair, LanczosOptions};
pub use epsilon_spectrum::{convergence_sweep, ConvergenceReport, ModeSpectrum, SweepSettings};
pub use error::{Error, Result};
pub use limit_spectrum::{DispersionParams, LimitRoot};
pub use mesh2d::{generate_mesh, CellGeometry, Material, TriMesh};
pub use sparse::SparseSymMatrix;
