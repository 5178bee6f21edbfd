//! Geometry kernel: node semantics, graph evaluation and mesh I/O.
//!
//! Rotations use XYZ extrinsic Euler angles in radians. Every triangle
//! carries the index of the graph node that created it in `part_tags`.

mod eval;
mod frame;
pub mod math;
mod mesh;
pub mod nodes;
mod obj;

pub use eval::{evaluate, Bindings, EvalError, EvalSession, Value};
pub use frame::{decode_frame, encode_frame, FrameError};
pub use mesh::{Curve, Mesh};
pub use nodes::GeomError;
pub use obj::{export_obj, import_obj, ObjError};

use crate::lang::Graph;

/// Node id behind each part tag produced by evaluating `graph`.
pub fn tag_names(graph: &Graph) -> Vec<&str> {
    graph.nodes.iter().map(|n| n.id.as_str()).collect()
}
