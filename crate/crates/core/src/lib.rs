//! Transversal cycle tilings in blow-ups of cycles.

pub mod constructive;
pub mod exact;
pub mod generators;
pub mod graph;
pub mod inequality;
pub mod io;
pub mod matching;
pub mod swap3;

pub use graph::{
    uncovered, validate_tiling, wrap_part, BlowupGraph, DegreeProfile, GraphError, Tiling,
    TilingViolation, TransversalCycle, VertexMask, VertexRef,
};

/// Exact rational scalar used by the inequality certifier.
pub type Rational = num_rational::BigRational;
pub type RatInterval = inequality::Interval<Rational>;
pub type RatPoly = inequality::Poly<Rational>;
