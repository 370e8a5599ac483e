//! Frank-Wolfe solvers over V-polytopes, the condition measures that govern
//! their linear convergence, and seeded Monte Carlo experiments on random
//! matrices and random polytopes.

pub mod conditioning;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod solvers;
pub mod subsets;

pub use error::{Error, ErrorClass, Result};
pub use geometry::{Facet, PointSet, Polytope};
pub use conditioning::{MeasureOptions, MeasureReport};
pub use linalg::Matrix;
pub use solvers::{Certificate, QuadraticObjective, RunTrace, Solution};
