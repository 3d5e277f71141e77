//! Compiles closed triangle meshes into amigurumi crochet patterns.

// Negated float comparisons such as `!(x > 0.0)` reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embed;
pub mod geodesic;
pub mod geom;
pub mod graph;
pub mod isoline;
pub mod mesh;
pub mod param;
pub mod patch;
pub mod pattern;
pub mod pipeline;
pub mod segmentation;
pub mod sparse;
pub mod topology;
