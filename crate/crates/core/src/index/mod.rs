//! Offline structures for indexed queries: threshold lists over the
//! supergraph and a cone tree of precomputed influence tables.

pub mod kmeans;
pub mod persist;
pub mod tie;
pub mod tuc;

pub use kmeans::select_topic_vectors;
pub use persist::{load_index, read_index, save_index, write_index, LoadedIndex};
pub use tie::{build_tie_tree, nearest_topic_vector, TieNode, TieSettings, TieTree};
pub use tuc::{build_tuc_list, candidate_vertices, Candidates, TucCell, TucList};
