//! Globalized limited-memory BFGS.
//!
//! The solver keeps a bounded FIFO of secant pairs, but each iteration only
//! applies the stored pairs whose curvature quotient clears a threshold tied to
//! the current gradient norm, and it confines the seed scaling to the matching
//! interval. With a small threshold constant the method reproduces classical
//! L-BFGS (and the Barzilai–Borwein gradient method for `m = 0`) step for step.
//!
//! All vector arithmetic goes through [`Space`], so the same code runs with the
//! Euclidean product or with the `h²`-weighted product of a uniform grid.
//!
//! ```
//! use lbfgsm::{minimize, problems::Rosenbrock, SolverConfig, Status};
//!
//! let problem = Rosenbrock::new();
//! let config = SolverConfig::defaults(2);
//! let report = minimize(&problem, &[-1.2, 1.0], &config).unwrap();
//! assert_eq!(report.status, Status::Converged);
//! assert!((report.x_final[0] - 1.0).abs() < 1e-7);
//! ```

// `!(x > 0.0)` style comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod direction;
mod error;
pub mod harness;
pub mod linesearch;
pub mod problems;
pub mod secant_store;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use linesearch::{LineSearchKind, LineSearchParams};
pub use problems::Problem;
pub use secant_store::{CautiousParams, SecantPair, Storage};
pub use solver::{minimize, IterationRecord, Mode, SolveReport, SolverConfig, Status};
pub use space::Space;
