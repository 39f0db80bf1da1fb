//! Tools for matchstick graphs: planar graphs drawn with unit-length
//! straight edges that meet only at shared endpoints.
//!
//! The crate takes graphs as they appear in vector figures, a list of drawn
//! segments with coordinates rounded to a few decimals, and turns them into
//! verified examples:
//!
//! 1. [`ingest`] extracts segments, merges repeated endpoints and rescales to
//!    unit edges;
//! 2. [`refine`] moves the vertices onto exact unit lengths;
//! 3. [`verify`] checks lengths, clearances, degrees and connectivity;
//! 4. [`rigidity`] computes the rank of the rigidity matrix and the internal
//!    degrees of freedom;
//! 5. [`congruence`] recognizes rotated or mirrored copies of one example;
//! 6. [`catalog`] runs all of it over a corpus and compares the counts with
//!    the published tables.
//!
//! ```
//! use matchstick::catalog::normalized_components;
//! use matchstick::ingest::IngestOptions;
//! use matchstick::refine::{refine, RefineOptions};
//! use matchstick::rigidity::analyze_rigidity;
//! use matchstick::verify::{verify_matchstick, VerificationPolicy};
//!
//! let graphs = normalized_components(matchstick::corpus::FIG11, &IngestOptions::default())?;
//! assert_eq!(graphs.len(), 1);
//! let (refined, trace) = refine(&graphs[0], &RefineOptions::default())?;
//! assert!(trace.converged);
//! assert!(verify_matchstick(&refined, &VerificationPolicy::default()).passed());
//! assert_eq!(analyze_rigidity(&refined)?.internal_dof, 0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod catalog;
pub mod congruence;
pub mod corpus;
pub mod geometry;
pub mod ingest;
pub mod mgf;
pub mod model;
pub mod refine;
pub mod render;
pub mod report;
pub mod rigidity;
pub mod verify;

pub use model::{build_graph, Edge, Graph, Point2, RegularityClass};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/ingest.md")]
    mod ingest {}
    #[doc = include_str!("../../../book/src/refinement.md")]
    mod refinement {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/rigidity.md")]
    mod rigidity {}
    #[doc = include_str!("../../../book/src/congruence.md")]
    mod congruence {}
    #[doc = include_str!("../../../book/src/catalog.md")]
    mod catalog {}
}
