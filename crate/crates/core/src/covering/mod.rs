//! Coverings used in the good-λ argument: Whitney decompositions of open
//! sets, doubling-cube searches and bounded-overlap cube selection.

mod besicovitch;
mod doubling;
mod oracle;
mod whitney;

pub use besicovitch::{besicovitch_select, default_overlap_bound, BesicovitchSelection};
pub use doubling::{
    find_big_doubling_cube, find_small_doubling_cube, BigDoublingCube, DoublingSearchConfig, DoublingStep,
    SmallDoublingCube,
};
pub use oracle::{
    sampled_complement_distance, BallUnion, DistanceBracket, OpenSetOracle, Region, SuperlevelOracle, BRACKET_REL_TOL,
};
pub use whitney::{
    neighbor_lists, verify_whitney, whitney_decompose, whitney_decompose_capped, WhitneyCheck, WhitneyCube,
    WhitneyDecomposition, DEFAULT_DELTA, DEFAULT_NODE_CAP,
};
