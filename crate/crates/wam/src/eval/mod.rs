//! Alignment quality: per-pair R², nearest-neighbor translation accuracy,
//! embedding export and 2D projection.

mod metrics;
mod neighbors;
mod projection;
mod report;
mod similarity;
mod vectors;

pub use metrics::{avg_r2, covered_pairs, covered_sources, knn_accuracies, knn_accuracy, pair_r2, R2Summary};
pub use neighbors::NeighborIndex;
pub use projection::{project_2d, projection_tsv, write_projection, ProjectedPoint, ProjectionInput};
pub use report::EvalReport;
pub use similarity::{similarities, Cosine, Euclidean, Similarity, SimilarityFactory};
pub use vectors::WordVectors;
