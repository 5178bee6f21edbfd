//! Procedural compact graph (PCG) toolkit core.
//!
//! [`lang`] holds the textual language: parsing, printing, validation and
//! token accounting. [`geom`] executes validated graphs into triangle meshes
//! and supports incremental re-evaluation when parameters change.

pub mod fixtures;
pub mod geom;
pub mod lang;

pub use geom::{evaluate, Bindings, Curve, EvalError, EvalSession, Mesh, Value};
pub use lang::{
    count_tokens, list_params, parse_pcg, print_pcg, topo_order, validate, Diagnostic, Expr, Graph,
    Node, ParamSpec, Registry, Scalar, Severity, ValueType,
};
