//! Prescribed Weingarten curvature graphs over a flat torus in a warped
//! product `dt^2 + h(t)^2 dsigma^2`, solved by Newton iteration along a
//! homotopy from a gauge-normalized radial problem.

pub mod ambient;
pub mod cli;
pub mod config;
pub mod curvature;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod oracle;
pub mod problem;
pub mod small;
pub mod solver;

pub use ambient::{WarpValue, WarpingProfile};
pub use curvature::CurvatureSpec;
pub use error::{Error, Result};
pub use geometry::GraphGeometry;
pub use grid::{NodeField, TorusGrid};
pub use problem::{HomotopyProblem, Prescription, PrescriptionForm};
pub use solver::{continuation, newton_solve, JacobianMode, SolveReport, SolverConfig};
