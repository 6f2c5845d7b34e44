//! Turning voting histories, ballots or latent utilities into voting blocs.

mod ballots;
mod distance;
mod kmeans;
mod signature;

pub use ballots::{ballot_column_weights, cluster_ballots, normalize_ballots};
pub use distance::{distance, DistanceKind};
pub use kmeans::{cluster_vote_matrix, kmeans, ClusteringOutcome, KMeansConfig};
pub use signature::{apathetic_set, signature, signature_clustering};
