//! Solvers for least gradient problems on strictly convex planar domains.
//!
//! The bounded solver builds minimisers level by level: boundary crossings of
//! each level are paired by a minimal-cost noncrossing chord matching, the
//! nested superlevel sets are stacked into a scalar field, and the boundary
//! trace is verified. An independent finite-difference minimizer of the
//! relaxed functional serves as an oracle, a truncation loop extends the
//! solver to unbounded domains, and a closed-form module handles the
//! axisymmetric discs-versus-catenoid comparison in the ball.

pub mod anisotropy;
pub mod boundary;
pub mod catenoid;
pub mod chord;
pub mod oracle;
pub mod scenario;
pub mod unbounded;
pub mod emit;
pub mod geom;
pub mod geometry;

pub use geom::{pt, Point};
