//! Local routing on the surface of a triangulated convex polytope.

pub mod geometry;
pub mod polytope;
pub mod shapes;
pub mod patching;
pub mod sampling;
pub mod graph;
pub mod spanner;
pub mod compact_routing;
pub mod tables;
pub mod router;
pub mod oracle;
pub mod pipeline;
pub mod cli;
