//! Biregular 0/1 matrices and their elementary statistics.

mod matrix;
mod sets;
mod stats;
pub mod text;

pub use matrix::{BiregularBitMatrix, BitMatrix};
pub use sets::{SetPairSpec, VertexSet, VertexSetPair};
pub use stats::{
    codegree, column_overlap, discrepancy, edge_count, edge_count_bits, max_codegree_deviation, row_overlap,
    CodegreeRecord, Direction, Discrepancy,
};
