//! Isometric balanced embeddings of metric graphs as tropical plane curves.
//!
//! The library takes an abstract metric graph (finite connected graph with
//! positive or infinite edge lengths) and realizes a tropical modification
//! of it as a balanced weighted rational polyhedral complex in the plane,
//! such that every finite edge maps to a chain of segments whose tropical
//! length equals the edge length exactly, edge images carry weight 1, image
//! edges cross each other at most the graph's crossing number of times, and
//! (optionally) every vertex lies in Λ² for a declared value group Λ.
//!
//! All arithmetic is exact: rational, or rational-linear combinations of
//! declared value-group generators. No floating point touches any certified
//! quantity.

pub mod creneau;
pub mod error;
pub mod io;
pub mod lambda;
pub mod lattice;
pub mod layout;
pub mod metric_graph;
pub mod pipeline;
pub mod projections;
pub mod rat;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
pub use io::{emit_complex, emit_graph, parse_complex, parse_graph, EmbeddingDocument};
pub use pipeline::{embed_isometric, EmbedOptions};
pub use projections::{projections, PAFunction};
pub use svg::{render_svg, RenderOptions};
pub use verify::{verify, Report};
