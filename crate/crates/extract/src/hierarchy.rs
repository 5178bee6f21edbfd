//! Part hierarchy documents.
//!
//! ```json
//! {"label": "chair", "children": [
//!   {"label": "seat", "box": [0, 0, 0.45,  0.5, 0.5, 0.05,  1, 0, 0,  0, 1, 0]}
//! ]}
//! ```
//!
//! Leaves carry `box`: center (3), full size (3), `dir1` (3), `dir2` (3).
//! Inner nodes carry a non-empty `children` array and no box.

use pcg_core::geom::math::{add, cross, dot, norm, scale, V3};
use serde_json::Value as Json;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pointer}: {message}")]
pub struct SchemaError {
    /// JSON pointer to the offending value (empty for the document root).
    pub pointer: String,
    pub message: String,
}

/// Oriented bounding box: `dir3 = dir1 x dir2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: V3,
    pub size: V3,
    pub dir1: V3,
    pub dir2: V3,
}

impl Obb {
    pub fn axis_aligned(center: V3, size: V3) -> Obb {
        Obb {
            center,
            size,
            dir1: [1.0, 0.0, 0.0],
            dir2: [0.0, 1.0, 0.0],
        }
    }

    pub fn from_array(a: [f64; 12]) -> Obb {
        Obb {
            center: [a[0], a[1], a[2]],
            size: [a[3], a[4], a[5]],
            dir1: [a[6], a[7], a[8]],
            dir2: [a[9], a[10], a[11]],
        }
    }

    pub fn to_array(&self) -> [f64; 12] {
        let mut a = [0.0; 12];
        a[..3].copy_from_slice(&self.center);
        a[3..6].copy_from_slice(&self.size);
        a[6..9].copy_from_slice(&self.dir1);
        a[9..].copy_from_slice(&self.dir2);
        a
    }

    pub fn dir3(&self) -> V3 {
        cross(self.dir1, self.dir2)
    }

    /// The 8 corners, ordered by sign pattern over (dir1, dir2, dir3).
    pub fn corners(&self) -> [V3; 8] {
        let axes = [self.dir1, self.dir2, self.dir3()];
        let mut out = [[0.0; 3]; 8];
        for (i, c) in out.iter_mut().enumerate() {
            let mut p = self.center;
            for k in 0..3 {
                let sign = if i & (1 << k) != 0 { 0.5 } else { -0.5 };
                p = add(p, scale(axes[k], sign * self.size[k]));
            }
            *c = p;
        }
        out
    }

    /// Unit, mutually orthogonal directions within `tol`.
    pub fn frame_is_valid(&self, tol: f64) -> bool {
        (norm(self.dir1) - 1.0).abs() <= tol
            && (norm(self.dir2) - 1.0).abs() <= tol
            && dot(self.dir1, self.dir2).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartNode {
    pub label: String,
    /// Labels from the root down to this node, inclusive.
    pub full_label: Vec<String>,
    pub children: Vec<PartNode>,
    pub obb: Option<Obb>,
}

impl PartNode {
    pub fn leaf(label: &str, obb: Obb) -> PartNode {
        PartNode {
            label: label.to_string(),
            full_label: vec![label.to_string()],
            children: Vec::new(),
            obb: Some(obb),
        }
    }

    pub fn group(label: &str, children: Vec<PartNode>) -> PartNode {
        PartNode {
            label: label.to_string(),
            full_label: vec![label.to_string()],
            children,
            obb: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<&PartNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            if n.is_leaf() {
                out.push(n);
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out
    }

    fn fix_labels(&mut self, prefix: &[String]) {
        self.full_label = prefix.to_vec();
        self.full_label.push(self.label.clone());
        let path = self.full_label.clone();
        for c in &mut self.children {
            c.fix_labels(&path);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartHierarchy {
    pub root: PartNode,
}

impl PartHierarchy {
    /// Builds a hierarchy from nodes assembled in code, recomputing full labels.
    pub fn new(mut root: PartNode) -> PartHierarchy {
        root.fix_labels(&[]);
        PartHierarchy { root }
    }

    pub fn to_json(&self) -> Json {
        fn node(n: &PartNode) -> Json {
            let mut m = serde_json::Map::new();
            m.insert("label".into(), Json::from(n.label.clone()));
            match &n.obb {
                Some(b) => {
                    m.insert("box".into(), Json::from(b.to_array().to_vec()));
                }
                None => {
                    m.insert("children".into(), Json::Array(n.children.iter().map(node).collect()));
                }
            }
            Json::Object(m)
        }
        node(&self.root)
    }
}

pub fn load_hierarchy(document: &str) -> Result<PartHierarchy, SchemaError> {
    let json: Json = serde_json::from_str(document).map_err(|e| SchemaError {
        pointer: String::new(),
        message: format!("not valid JSON: {e}"),
    })?;
    hierarchy_from_json(&json)
}

pub fn hierarchy_from_json(json: &Json) -> Result<PartHierarchy, SchemaError> {
    let root = parse_node(json, "", &[])?;
    Ok(PartHierarchy { root })
}

fn err(pointer: &str, message: impl Into<String>) -> SchemaError {
    SchemaError {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn parse_node(json: &Json, ptr: &str, prefix: &[String]) -> Result<PartNode, SchemaError> {
    let obj = json
        .as_object()
        .ok_or_else(|| err(ptr, "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "label" | "children" | "box") {
            return Err(err(&format!("{ptr}/{key}"), "unknown field"));
        }
    }
    let label = match obj.get("label") {
        Some(Json::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(Json::String(_)) => return Err(err(&format!("{ptr}/label"), "label is empty")),
        Some(_) => return Err(err(&format!("{ptr}/label"), "label must be a string")),
        None => return Err(err(ptr, "missing label")),
    };
    let mut full_label = prefix.to_vec();
    full_label.push(label.clone());
    let children_json = match obj.get("children") {
        None => &[][..],
        Some(Json::Array(a)) => a.as_slice(),
        Some(_) => return Err(err(&format!("{ptr}/children"), "children must be an array")),
    };
    let mut children = Vec::with_capacity(children_json.len());
    for (i, c) in children_json.iter().enumerate() {
        children.push(parse_node(c, &format!("{ptr}/children/{i}"), &full_label)?);
    }
    let obb = match (obj.get("box"), children.is_empty()) {
        (Some(_), false) => {
            return Err(err(&format!("{ptr}/box"), "inner nodes must not carry a box"))
        }
        (None, true) => return Err(err(ptr, "leaf is missing its box")),
        (None, false) => None,
        (Some(b), true) => Some(parse_box(b, &format!("{ptr}/box"))?),
    };
    Ok(PartNode {
        label,
        full_label,
        children,
        obb,
    })
}

fn parse_box(json: &Json, ptr: &str) -> Result<Obb, SchemaError> {
    let arr = json
        .as_array()
        .ok_or_else(|| err(ptr, "box must be an array of 12 numbers"))?;
    if arr.len() != 12 {
        return Err(err(ptr, format!("box has {} numbers, expected 12", arr.len())));
    }
    let mut a = [0.0; 12];
    for (i, v) in arr.iter().enumerate() {
        a[i] = v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| err(&format!("{ptr}/{i}"), "expected a finite number"))?;
    }
    for i in 3..6 {
        if a[i] < 0.0 {
            return Err(err(&format!("{ptr}/{i}"), "size must be non-negative"));
        }
    }
    Ok(Obb::from_array(a))
}
