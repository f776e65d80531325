//! Restarted Halpern Peaceman-Rachford (HPR) solver for linear programs
//!
//! ```text
//! min <c, x>  s.t.  A x in K = [l_c, u_c],  x in C = [l_v, u_v]
//! ```
//!
//! The [`solver::solve`] entry point scales the problem, estimates
//! `lambda_A >= |A|^2`, and runs restarted Halpern iterations of the
//! Peaceman-Rachford step in [`engine`] with adaptive restarts and penalty
//! updates from [`adaptive`]. MPS input lives in [`mps`]; [`oracle`] is a
//! brute-force reference solver for tiny instances.

pub mod adaptive;
pub mod bench;
pub mod engine;
pub mod error;
pub mod instances;
pub mod model;
pub mod mps;
pub mod oracle;
mod serde_ext;
pub mod solver;
pub mod sparse;

pub use engine::{EngineConfig, Mode};
pub use error::{Error, Result};
pub use model::{Iterate, LpProblem, ObjSense};
pub use solver::{solve, SolveResult, SolverConfig, Status};
pub use sparse::SparseMatrix;
