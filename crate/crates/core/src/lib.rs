//! Topic-aware most influential community search.
//!
//! Given a directed social network whose edges carry topic-weight vectors,
//! a query topic distribution `q` and parameters `(k, l, eta)`, find the
//! weakly connected `(k, l, eta)`-core of the uncertain interaction graph
//! with the highest influence score under the topic-aware independent
//! cascade model. Two query paths are provided: an online algorithm with a
//! sampling error bound, and an index-backed one built on per-`(k, l)`
//! eta-threshold lists and a cone tree of precomputed influence tables.

pub mod error;
pub mod graph;
pub mod index;
pub mod influence;
pub mod query;
pub mod testkit;
pub mod uncertain_core;

pub use error::{Error, Result};
pub use graph::{
    community_stats, Community, CommunityStats, Fingerprint, InteractionGraph, Normalization,
    SocialNetwork, TopicVector, VertexId, WeightedEdge,
};
pub use influence::{estimate_influence, InfluenceTable, SampleParams};
pub use query::{indexed_query, online_query, QueryMode, QueryRequest, QueryResult, QueryStatus};
pub use uncertain_core::{compute_cores, eta_thresholds, CoreSet};
