//! Provable edge elimination for 2-D rounded-Euclidean TSP instances.
//!
//! Given a TSPLIB instance with EUC_2D or CEIL_2D distances, the pipeline in
//! [`pipeline`] removes edges that cannot belong to any optimum tour and
//! returns a sparse edge set containing every optimum tour.

pub mod backtrack;
pub mod certify;
pub mod compat;
pub mod edges;
pub mod eliminate;
pub mod error;
pub mod geometry;
pub mod kdtree;
pub mod oracle;
pub mod pipeline;
pub mod scalar;
pub mod tsplib;

pub use backtrack::{PathSystem, SearchConfig};
pub use certify::{ConeCover, Membership, PotentialPoint, Rejection};
pub use edges::SparseEdgeSet;
pub use eliminate::{Method, Verdict, Witness};
pub use error::{Error, ParseErrorKind, Result};
pub use geometry::DeltaRadii;
pub use kdtree::NeighborIndex;
pub use pipeline::{PipelineConfig, RunStats};
pub use scalar::Scalar;
pub use tsplib::{parse_edge_set, parse_instance, write_edge_set, DistanceMode, Instance};

/// Default working precision.
pub type Real = f64;
pub type DeltaRadii64 = DeltaRadii<f64>;
pub type ConeCover64 = ConeCover<f64>;
pub type PotentialPoint64 = PotentialPoint<f64>;
pub type DeltaRadii32 = DeltaRadii<f32>;
pub type PotentialPoint32 = PotentialPoint<f32>;
