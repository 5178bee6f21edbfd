//! Graph assembly from a part hierarchy.
//!
//! Every leaf becomes a unit cube under a transform whose nine components
//! are exposed parameters. Siblings sharing a label are joined into one
//! group. Each child of the root is gated by a `has_<label>` switch, and
//! groups with more than one leaf get their own translation, rotation and
//! scale parameters applied about the group's center, so editing them
//! carries every member along. A root rotation about z can wrap the model.

use std::collections::HashSet;
use std::f64::consts::PI;

use pcg_core::geom::math::{mat_vec, M3, V3};
use pcg_core::lang::is_identifier;
use pcg_core::{Expr, Graph, Node, ParamSpec};
use serde::Serialize;
use thiserror::Error;

use crate::hierarchy::{Obb, PartHierarchy, PartNode};
use crate::transform::{extract_transform_from_box, PartFlags, TransformError, TransformTriple};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionConfig {
    /// Rotation applied to every box on ingest.
    pub coord_rotation: M3,
    pub merge_same_label: bool,
    pub expose_global_rotation: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            coord_rotation: pcg_core::geom::math::IDENTITY,
            merge_same_label: true,
            expose_global_rotation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("{path}: {source}")]
    Transform {
        path: String,
        #[source]
        source: TransformError,
    },
    #[error("coordinate rotation is not a proper rotation")]
    BadCoordRotation,
}

/// Record of one emitted leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartRecord {
    /// Position of the source leaf in depth-first order.
    pub leaf_index: usize,
    pub full_label: Vec<String>,
    /// Name prefix of the part's parameters.
    pub name: String,
    pub cube_id: String,
    pub transform: TransformTriple,
    pub flags: PartFlags,
    /// Index into [`Extraction::groups`].
    pub group: Option<usize>,
}

/// Record of one switch-gated group under the root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRecord {
    pub label: String,
    pub switch_id: String,
    pub flag_param: String,
    /// Prefix of the group's own transform parameters, when it has them.
    pub transform_params: Option<String>,
    pub pivot: V3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub graph: Graph,
    pub parts: Vec<PartRecord>,
    pub groups: Vec<GroupRecord>,
}

impl Extraction {
    /// Part tags (node indices) of the cubes belonging to `group`.
    pub fn group_tags(&self, group: usize) -> Vec<u32> {
        self.parts
            .iter()
            .filter(|p| p.group == Some(group))
            .map(|p| self.graph.node_index(&p.cube_id).expect("cube emitted") as u32)
            .collect()
    }
}

pub fn build_pcg(hierarchy: &PartHierarchy, config: &ExtractionConfig) -> Result<Graph, ExtractError> {
    extract(hierarchy, config).map(|e| e.graph)
}

pub fn extract(hierarchy: &PartHierarchy, config: &ExtractionConfig) -> Result<Extraction, ExtractError> {
    let r = &config.coord_rotation;
    if !is_rotation(r) {
        return Err(ExtractError::BadCoordRotation);
    }
    let mut b = Builder {
        config,
        used: HashSet::new(),
        graph: Graph::default(),
        parts: Vec::new(),
        groups: Vec::new(),
        current_group: None,
        leaves: hierarchy.root.leaves().into_iter().map(|n| n as *const PartNode).collect(),
    };
    let root = &hierarchy.root;
    let root_name = clean_label(&root.label);
    if root.is_leaf() {
        let top = b.leaf(root)?;
        b.graph.output = Some(Expr::reference(top));
        return Ok(b.finish());
    }
    let mut members = Vec::new();
    for (label, siblings) in b.bucket(&root.children) {
        members.push(b.top_group(&label, &siblings)?);
    }
    let joined = b.join(&format!("{root_name}_parts"), members);
    let out = if config.expose_global_rotation {
        let base = b.alloc(&root_name, &["", "_rotation_z"]);
        let param = format!("{base}_rotation_z");
        b.graph.params.push(ParamSpec::float(&param, 0.0, Some([-PI, PI])));
        b.graph.nodes.push(Node::new(&base, "rotate").arg("geometry", Expr::reference(joined)).arg(
            "r",
            Expr::vec3(Expr::Float(0.0), Expr::Float(0.0), Expr::reference(param)),
        ));
        base
    } else {
        joined
    };
    b.graph.output = Some(Expr::reference(out));
    Ok(b.finish())
}

fn is_rotation(m: &M3) -> bool {
    let t = pcg_core::geom::math::transpose(m);
    let p = pcg_core::geom::math::mat_mul(&t, m);
    (0..3).all(|i| (0..3).all(|j| (p[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9))
        && (pcg_core::geom::math::det(m) - 1.0).abs() < 1e-9
}

/// Lowercase identifier form of a label.
pub fn clean_label(label: &str) -> String {
    let mut s: String = label
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    let s = s.trim_matches('_').to_string();
    let s = if s.is_empty() { "part".to_string() } else { s };
    let s = if s.starts_with(|c: char| c.is_ascii_digit()) { format!("p{s}") } else { s };
    match s.as_str() {
        "input" | "output" | "true" | "false" | "range" => format!("{s}_part"),
        _ => s,
    }
}

const LEAF_SUFFIXES: [&str; 11] = [
    "",
    "_cube",
    "_translation_x",
    "_translation_y",
    "_translation_z",
    "_rotation_x",
    "_rotation_y",
    "_rotation_z",
    "_scale_x",
    "_scale_y",
    "_scale_z",
];

const GROUP_SUFFIXES: [&str; 12] = [
    "",
    "_centered",
    "_placed",
    "_translation_x",
    "_translation_y",
    "_translation_z",
    "_rotation_x",
    "_rotation_y",
    "_rotation_z",
    "_scale_x",
    "_scale_y",
    "_scale_z",
];

struct Builder<'a> {
    config: &'a ExtractionConfig,
    used: HashSet<String>,
    graph: Graph,
    parts: Vec<PartRecord>,
    groups: Vec<GroupRecord>,
    current_group: Option<usize>,
    leaves: Vec<*const PartNode>,
}

impl Builder<'_> {
    fn finish(self) -> Extraction {
        Extraction {
            graph: self.graph,
            parts: self.parts,
            groups: self.groups,
        }
    }

    /// First free name among `label`, `label_2`, ... whose derived names
    /// are free too. Reserves all of them.
    fn alloc(&mut self, label: &str, suffixes: &[&str]) -> String {
        let mut k = 1;
        loop {
            let base = if k == 1 { label.to_string() } else { format!("{label}_{k}") };
            let names: Vec<String> = suffixes.iter().map(|s| format!("{base}{s}")).collect();
            if names.iter().all(|n| !self.used.contains(n) && is_identifier(n)) {
                self.used.extend(names);
                return base;
            }
            k += 1;
        }
    }

    /// Children bucketed by label, in first-appearance order.
    fn bucket<'n>(&self, children: &'n [PartNode]) -> Vec<(String, Vec<&'n PartNode>)> {
        let mut out: Vec<(String, Vec<&PartNode>)> = Vec::new();
        for c in children {
            let label = clean_label(&c.label);
            match out.iter_mut().find(|(l, _)| *l == label) {
                Some((_, v)) if self.config.merge_same_label => v.push(c),
                _ => out.push((label, vec![c])),
            }
        }
        out
    }

    fn join(&mut self, label: &str, members: Vec<String>) -> String {
        if members.len() == 1 {
            return members.into_iter().next().unwrap();
        }
        let id = self.alloc(label, &[""]);
        self.graph.nodes.push(Node::new(&id, "join").arg(
            "geometry",
            Expr::List {
                list: members.into_iter().map(Expr::reference).collect(),
            },
        ));
        id
    }

    fn subtree(&mut self, node: &PartNode) -> Result<String, ExtractError> {
        if node.is_leaf() {
            return self.leaf(node);
        }
        let mut members = Vec::new();
        for (label, siblings) in self.bucket(&node.children) {
            let mut ids = Vec::new();
            for s in siblings {
                ids.push(self.subtree(s)?);
            }
            members.push(self.join(&label, ids));
        }
        Ok(self.join(&clean_label(&node.label), members))
    }

    fn top_group(&mut self, label: &str, siblings: &[&PartNode]) -> Result<String, ExtractError> {
        let index = self.groups.len();
        let base = self.alloc(label, &GROUP_SUFFIXES);
        let flag = self.alloc(&format!("has_{base}"), &[""]);
        self.groups.push(GroupRecord {
            label: label.to_string(),
            switch_id: base.clone(),
            flag_param: flag.clone(),
            transform_params: None,
            pivot: [0.0; 3],
        });
        self.current_group = Some(index);
        let first_part = self.parts.len();
        let mut ids = Vec::new();
        for s in siblings {
            ids.push(self.subtree(s)?);
        }
        self.current_group = None;
        let joined = self.join(&format!("{base}_members"), ids);
        let leaves = self.parts.len() - first_part;

        let gated = if leaves > 1 {
            let pivot = self.pivot(first_part);
            self.groups[index].pivot = pivot;
            self.groups[index].transform_params = Some(base.clone());
            let centered = format!("{base}_centered");
            self.graph.nodes.push(
                Node::new(&centered, "translate")
                    .arg("geometry", Expr::reference(joined))
                    .arg("t", Expr::vec3_lit(pivot.map(|x| if x == 0.0 { 0.0 } else { -x }))),
            );
            let placed = format!("{base}_placed");
            let node = self.transform_node(
                &placed,
                &centered,
                &base,
                &TransformTriple {
                    translation: pivot,
                    rotation: [0.0; 3],
                    scale: [1.0; 3],
                },
            );
            self.graph.nodes.push(node);
            placed
        } else {
            joined
        };
        self.graph.params.push(ParamSpec::boolean(&flag, true));
        self.graph.nodes.push(
            Node::new(&base, "switch")
                .arg("flag", Expr::reference(flag))
                .arg("on_true", Expr::reference(gated)),
        );
        Ok(base)
    }

    /// Center of the axis-aligned box around the leaves emitted since `first`.
    fn pivot(&self, first: usize) -> V3 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for part in &self.parts[first..] {
            for c in part.transform.box_corners() {
                for k in 0..3 {
                    lo[k] = lo[k].min(c[k]);
                    hi[k] = hi[k].max(c[k]);
                }
            }
        }
        [0, 1, 2].map(|k| 0.5 * (lo[k] + hi[k]))
    }

    fn leaf(&mut self, node: &PartNode) -> Result<String, ExtractError> {
        let obb = node.obb.expect("leaf carries a box");
        let r = &self.config.coord_rotation;
        let rotated = Obb {
            center: mat_vec(r, obb.center),
            size: obb.size,
            dir1: mat_vec(r, obb.dir1),
            dir2: mat_vec(r, obb.dir2),
        };
        let rec = extract_transform_from_box(&rotated).map_err(|source| ExtractError::Transform {
            path: node.full_label.join("/"),
            source,
        })?;
        let base = self.alloc(&clean_label(&node.label), &LEAF_SUFFIXES);
        let cube_id = format!("{base}_cube");
        self.graph.nodes.push(Node::new(&cube_id, "cube"));
        let node_t = self.transform_node(&base, &cube_id, &base, &rec.transform);
        self.graph.nodes.push(node_t);
        let leaf_index = self
            .leaves
            .iter()
            .position(|&p| std::ptr::eq(p, node))
            .expect("leaf belongs to the hierarchy");
        self.parts.push(PartRecord {
            leaf_index,
            full_label: node.full_label.clone(),
            name: base.clone(),
            cube_id,
            transform: rec.transform,
            flags: rec.flags,
            group: self.current_group,
        });
        Ok(base)
    }

    /// `transform` node whose nine components are fresh parameters named
    /// `<prefix>_<component>_<axis>`.
    fn transform_node(&mut self, id: &str, input: &str, prefix: &str, t: &TransformTriple) -> Node {
        let mut vec_for = |component: &str, values: V3| {
            let refs = ["x", "y", "z"].map(|axis| {
                let name = format!("{prefix}_{component}_{axis}");
                Expr::reference(name)
            });
            for (axis, &v) in ["x", "y", "z"].iter().zip(&values) {
                let name = format!("{prefix}_{component}_{axis}");
                let range = match component {
                    "translation" => [v - (1.0 + v.abs()), v + (1.0 + v.abs())],
                    "rotation" => [-PI, PI],
                    _ => [0.01f64.min(v), 4.0 * v],
                };
                self.graph.params.push(ParamSpec::float(name, v, Some(range)));
            }
            let [x, y, z] = refs;
            Expr::vec3(x, y, z)
        };
        let translation = vec_for("translation", t.translation);
        let rotation = vec_for("rotation", t.rotation);
        let scale = vec_for("scale", t.scale);
        Node::new(id, "transform")
            .arg("geometry", Expr::reference(input))
            .arg("translation", translation)
            .arg("rotation", rotation)
            .arg("scale", scale)
    }
}
