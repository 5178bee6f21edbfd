//! Part hierarchy to PCG extraction.
//!
//! A hierarchy of labeled oriented boxes is turned into a parametric graph:
//! one cube per leaf under a transform with exposed parameters, one switch
//! per top-level group, and optional group and global transforms.
//!
//! ```
//! use pcg_extract::{extract, synth, ExtractionConfig};
//!
//! let chair = synth::chair();
//! let e = extract(&chair, &ExtractionConfig::default()).unwrap();
//! assert!(e.graph.param("has_back").is_some());
//! ```

mod batch;
mod build;
mod hierarchy;
pub mod synth;
mod transform;

pub use batch::{extract_file, extract_path, parse_coord_rot, save_graph, BatchError};
pub use build::{
    build_pcg, clean_label, extract, ExtractError, Extraction, ExtractionConfig, GroupRecord,
    PartRecord,
};
pub use hierarchy::{hierarchy_from_json, load_hierarchy, Obb, PartHierarchy, PartNode, SchemaError};
pub use transform::{
    corner_set_distance, extract_transform_from_box, extract_transform_from_vertices, PartFlags,
    Recovered, TransformError, TransformTriple, EIGEN_GAP_TOL, MIN_EXTENT,
};
