//! k-sum-free sets of positive integers: exact checks, dilation extraction,
//! multiplicative Følner grids, an exact maximum k-sum-free subset solver,
//! periodic hulls with the finitary density-increment step, and finitely
//! supported rational measures.

pub mod bitset;
pub mod dilation;
pub mod error;
pub mod folner;
pub mod harness;
pub mod measures;
pub mod nat;
pub mod periodic;
pub mod solver;
pub mod sumfree;

pub use dilation::{ExtractionResult, OpenInterval};
pub use error::{Error, Result};
pub use folner::FolnerGrid;
pub use measures::{NuSchedule, RationalMeasure};
pub use nat::{FiniteSet, Nat, Rational};
pub use periodic::{DensityDropInstance, FlsInstance, FlsOutcome, HorizonSet, Orientation, ResidueSet};
pub use solver::{Algorithm, ForbiddenHypergraph, SolveResult, SolveStatus};
pub use sumfree::Violation;
