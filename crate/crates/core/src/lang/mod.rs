//! The PCG language.
//!
//! One statement per line:
//!
//! ```text
//! input leg_height: float = 2.0 range 0.2..6.0
//! leg = cylinder(radius=0.1, depth=leg_height)
//! output = leg
//! ```
//!
//! See `docs/grammar.md` for the full grammar.

mod ast;
mod diag;
mod lexer;
mod parser;
mod printer;
pub mod registry;
mod tokens;
mod validate;

pub use ast::{format_float, Expr, Graph, Node, ParamSpec, Scalar, ValueType};
pub use diag::{DiagCode, Diagnostic, Severity};
pub use parser::{parse_pcg, parse_pcg_with, parse_unvalidated};
pub use printer::{canonicalize, canonicalize_with, print_node, print_param, print_pcg};
pub use registry::{NodeKind, Registry};
pub use tokens::count_tokens;
pub use validate::{
    is_identifier, list_params, topo_order, validate, validate_with, CycleDetected, LineMap,
};
