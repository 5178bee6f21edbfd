//! Emitters from PCG graphs to engine formats.
//!
//! [`to_blender_python`] writes Infinigen node-wrangler code and [`to_json`]
//! the canonical interchange form. [`compactness_report`] compares their
//! token counts against the PCG text.

mod blender;
mod report;

use pcg_core::{Diagnostic, Graph};
use thiserror::Error;

pub use blender::{blender_node_name, to_blender_python, to_blender_python_with, UNSUPPORTED_BLENDER};
pub use report::{compactness_report, write_csv, CompactnessReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranspileError {
    #[error("node `{node}`: kind `{kind}` has no {backend} equivalent")]
    UnsupportedKind {
        node: String,
        kind: String,
        backend: &'static str,
    },
    #[error("graph is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// Target format selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    BlenderPython,
    Json,
}

impl Backend {
    pub const ALL: [Backend; 2] = [Backend::BlenderPython, Backend::Json];

    pub fn name(self) -> &'static str {
        match self {
            Backend::BlenderPython => "blender_python",
            Backend::Json => "json",
        }
    }

    pub fn from_name(name: &str) -> Option<Backend> {
        Backend::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn emit(self, graph: &Graph) -> Result<String, TranspileError> {
        match self {
            Backend::BlenderPython => to_blender_python(graph),
            Backend::Json => Ok(to_json(graph)),
        }
    }
}

/// Canonical JSON text of the graph.
pub fn to_json(graph: &Graph) -> String {
    graph.to_json()
}

pub fn from_json(text: &str) -> Result<Graph, serde_json::Error> {
    Graph::from_json(text)
}
