//! Functional Object-Oriented Network (FOON) toolkit.
//!
//! Subgraph files are parsed ([`parser`]), unioned into a universal FOON
//! ([`merge`]) and searched for task trees ([`retrieval`]) with iterative
//! deepening or one of two greedy best-first heuristics. [`testkit`] holds
//! the exhaustive oracle and random instance generator used to check the
//! searches.

pub mod cli;
pub mod dot;
pub mod merge;
pub mod model;
pub mod parser;
pub mod retrieval;
pub mod testkit;

pub use model::{
    object_key, unit_equals, FunctionalUnit, Kitchen, MotionNode, MotionRateTable, ObjectKey,
    ObjectNode, SearchStats, UniversalFoon,
};
pub use retrieval::{Algorithm, SearchOutcome, TaskTree};
