//! Infinigen node-wrangler emitter.

use std::collections::HashMap;
use std::fmt::Write;

use heck::ToUpperCamelCase;
use pcg_core::lang::{canonicalize_with, format_float, validate_with};
use pcg_core::{Expr, Graph, Registry, Scalar, Severity, ValueType};

use crate::TranspileError;

const HEADER: &str = "\
import bpy
import mathutils
from numpy.random import uniform, normal, randint
from infinigen.core.nodes.node_wrangler import Nodes, NodeWrangler
from infinigen.core.nodes import node_utils
from infinigen.core.util.color import color_category
from infinigen.core import surface

def geometry_nodes(nw: NodeWrangler):
    # Code generated using version 2.6.5 of the node_transpiler
";

const FOOTER: &str = "\
def apply(obj, selection=None, **kwargs):
    surface.add_geomod(obj, geometry_nodes, selection=selection, attributes=[])
";

/// Registered kinds the Blender backend cannot express.
pub const UNSUPPORTED_BLENDER: &[&str] = &[];

const WRAP_AT: usize = 100;

#[derive(Clone, Copy)]
enum Key {
    Socket(&'static str),
    Index(u8),
}

struct Mapping {
    node: &'static str,
    var: &'static str,
    /// PCG port to Blender input socket.
    inputs: &'static [(&'static str, Key)],
    attrs: &'static [(&'static str, &'static str)],
    /// Named output used when referencing the node, if not the default.
    output: Option<&'static str>,
}

const fn m(
    node: &'static str,
    var: &'static str,
    inputs: &'static [(&'static str, Key)],
    attrs: &'static [(&'static str, &'static str)],
    output: Option<&'static str>,
) -> Mapping {
    Mapping {
        node,
        var,
        inputs,
        attrs,
        output,
    }
}

use Key::{Index, Socket};

const MATH: &[(&str, Key)] = &[("a", Index(0)), ("b", Index(1))];

fn mapping(kind: &str) -> Option<Mapping> {
    Some(match kind {
        "cube" => m("Nodes.MeshCube", "cube", &[("size", Socket("Size"))], &[], Some("Mesh")),
        "cylinder" => m(
            "Nodes.Cylinder",
            "cylinder",
            &[
                ("radius", Socket("Radius")),
                ("depth", Socket("Depth")),
                ("segments", Socket("Vertices")),
            ],
            &[],
            Some("Mesh"),
        ),
        "sphere" => m(
            "Nodes.MeshUVSphere",
            "uv_sphere",
            &[
                ("radius", Socket("Radius")),
                ("rings", Socket("Rings")),
                ("segments", Socket("Segments")),
            ],
            &[],
            Some("Mesh"),
        ),
        "rectangle" => m(
            "Nodes.Quadrilateral",
            "quadrilateral",
            &[("width", Socket("Width")), ("height", Socket("Height"))],
            &[],
            None,
        ),
        "fillet" => m(
            "Nodes.FilletCurve",
            "fillet_curve",
            &[
                ("curve", Socket("Curve")),
                ("radius", Socket("Radius")),
                ("count", Socket("Count")),
            ],
            &[("mode", "POLY")],
            None,
        ),
        "fill" => m("Nodes.FillCurve", "fill_curve", &[("curve", Socket("Curve"))], &[("mode", "NGONS")], None),
        "extrude" => m(
            "Nodes.ExtrudeMesh",
            "extrude_mesh",
            &[("mesh", Socket("Mesh")), ("offset_scale", Socket("Offset Scale"))],
            &[],
            Some("Mesh"),
        ),
        "transform" => m(
            "Nodes.Transform",
            "transform_geometry",
            &[
                ("geometry", Socket("Geometry")),
                ("translation", Socket("Translation")),
                ("rotation", Socket("Rotation")),
                ("scale", Socket("Scale")),
            ],
            &[],
            None,
        ),
        "translate" => m(
            "Nodes.Transform",
            "transform_geometry",
            &[("geometry", Socket("Geometry")), ("t", Socket("Translation"))],
            &[],
            None,
        ),
        "rotate" => m(
            "Nodes.Transform",
            "transform_geometry",
            &[("geometry", Socket("Geometry")), ("r", Socket("Rotation"))],
            &[],
            None,
        ),
        "scale" => m(
            "Nodes.Transform",
            "transform_geometry",
            &[("geometry", Socket("Geometry")), ("s", Socket("Scale"))],
            &[],
            None,
        ),
        "join" => m("Nodes.JoinGeometry", "join_geometry", &[("geometry", Socket("Geometry"))], &[], None),
        "switch" => m(
            "Nodes.Switch",
            "switch",
            &[
                ("flag", Socket("Switch")),
                ("on_false", Socket("False")),
                ("on_true", Socket("True")),
            ],
            &[("input_type", "GEOMETRY")],
            None,
        ),
        "combine_xyz" => m(
            "Nodes.CombineXYZ",
            "combine_xyz",
            &[("x", Socket("X")), ("y", Socket("Y")), ("z", Socket("Z"))],
            &[],
            None,
        ),
        "instance_on_points" => m(
            "Nodes.InstanceOnPoints",
            "instance_on_points",
            &[("points", Socket("Points")), ("instance", Socket("Instance"))],
            &[],
            None,
        ),
        "add" => m("Nodes.Math", "add", MATH, &[], None),
        "subtract" => m("Nodes.Math", "subtract", MATH, &[("operation", "SUBTRACT")], None),
        "multiply" => m("Nodes.Math", "multiply", MATH, &[("operation", "MULTIPLY")], None),
        "divide" => m("Nodes.Math", "divide", MATH, &[("operation", "DIVIDE")], None),
        _ => return None,
    })
}

/// Blender node constructor for a PCG kind, e.g. `Nodes.Cylinder`.
pub fn blender_node_name(kind: &str) -> Option<&'static str> {
    mapping(kind).map(|m| m.node)
}

fn float(x: f64) -> String {
    let four = format!("{x:.4}");
    if four.parse::<f64>() == Ok(x) {
        four
    } else {
        format_float(x)
    }
}

fn scalar(s: Scalar) -> String {
    match s {
        Scalar::Bool(b) => if b { "True" } else { "False" }.to_string(),
        Scalar::Int(i) => i.to_string(),
        Scalar::Float(x) => float(x),
    }
}

struct Emitter<'g> {
    graph: &'g Graph,
    /// Socket names of graph parameters.
    sockets: HashMap<&'g str, String>,
    /// Python variable and default output expression of each emitted node.
    vars: HashMap<&'g str, (String, String)>,
    counters: HashMap<&'static str, usize>,
    body: String,
}

impl<'g> Emitter<'g> {
    fn fresh(&mut self, base: &'static str) -> String {
        let n = self.counters.entry(base).or_insert(0);
        let name = if *n == 0 { base.to_string() } else { format!("{base}_{n}") };
        *n += 1;
        name
    }

    fn statement(&mut self, var: &str, node: &str, kwargs: &[(String, String)], attrs: &[(&str, String)]) {
        let mut parts = Vec::new();
        if !kwargs.is_empty() {
            let items: Vec<String> = kwargs.iter().map(|(k, v)| format!("{k}: {v}")).collect();
            parts.push(format!("input_kwargs={{{}}}", items.join(", ")));
        }
        if !attrs.is_empty() {
            let items: Vec<String> = attrs.iter().map(|(k, v)| format!("'{k}': {v}")).collect();
            parts.push(format!("attrs={{{}}}", items.join(", ")));
        }
        let mut line = format!("    {var} = nw.new_node({node}");
        for p in &parts {
            let _ = write!(line, ", {p}");
        }
        line.push(')');
        if line.len() > WRAP_AT && !parts.is_empty() {
            line = format!("    {var} = nw.new_node({node},\n        {})", parts.join(",\n        "));
        }
        self.body.push_str(&line);
        self.body.push_str("\n    \n");
    }

    fn expr(&mut self, e: &'g Expr) -> String {
        match e {
            Expr::Bool(b) => scalar(Scalar::Bool(*b)),
            Expr::Int(i) => i.to_string(),
            Expr::Float(x) => float(*x),
            Expr::Ref { name, port } => {
                if let Some(socket) = self.sockets.get(name.as_str()) {
                    return format!("group_input.outputs[\"{socket}\"]");
                }
                let (var, default) = &self.vars[name.as_str()];
                match port {
                    Some(p) => format!("{var}.outputs[\"{}\"]", p.to_upper_camel_case()),
                    None => default.clone(),
                }
            }
            Expr::Vec3 { vec3 } => {
                if let [Some(x), Some(y), Some(z)] = vec3.each_ref().map(literal) {
                    return format!("({}, {}, {})", float(x), float(y), float(z));
                }
                let mut kwargs = Vec::new();
                for (axis, c) in ["'X'", "'Y'", "'Z'"].into_iter().zip(vec3.iter()) {
                    if literal(c) == Some(0.0) {
                        continue;
                    }
                    kwargs.push((axis.to_string(), self.expr(c)));
                }
                let var = self.fresh("combine_xyz");
                self.statement(&var, "Nodes.CombineXYZ", &kwargs, &[]);
                var
            }
            Expr::List { list } => {
                let items: Vec<String> = list.iter().map(|x| self.expr(x)).collect();
                format!("[{}]", items.join(", "))
            }
        }
    }
}

fn literal(e: &Expr) -> Option<f64> {
    match e {
        Expr::Float(x) => Some(*x),
        Expr::Int(i) => Some(*i as f64),
        _ => None,
    }
}

/// Assigns each parameter a distinct upper camel case socket name.
fn socket_names(graph: &Graph) -> HashMap<&str, String> {
    let mut taken = std::collections::HashSet::from(["Geometry".to_string()]);
    let mut out = HashMap::new();
    for p in &graph.params {
        let base = p.name.to_upper_camel_case();
        let mut name = base.clone();
        let mut k = 2;
        while !taken.insert(name.clone()) {
            name = format!("{base}{k}");
            k += 1;
        }
        out.insert(p.name.as_str(), name);
    }
    out
}

fn socket_type(ty: ValueType) -> &'static str {
    match ty {
        ValueType::Int => "NodeSocketInt",
        ValueType::Bool => "NodeSocketBool",
        _ => "NodeSocketFloat",
    }
}

/// Emits Infinigen-style Blender Python building the graph with geometry
/// nodes. Nodes appear in dependency order, one `new_node` call each, with
/// an extra `CombineXYZ` wherever a vector is assembled from parameters.
pub fn to_blender_python(graph: &Graph) -> Result<String, TranspileError> {
    to_blender_python_with(graph, Registry::standard())
}

/// As [`to_blender_python`], validating against `registry`.
pub fn to_blender_python_with(graph: &Graph, registry: &Registry) -> Result<String, TranspileError> {
    let diags: Vec<_> = validate_with(graph, registry)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if !diags.is_empty() {
        return Err(TranspileError::Invalid(diags));
    }
    let canon = canonicalize_with(graph, registry);
    let mut em = Emitter {
        graph: &canon,
        sockets: socket_names(&canon),
        vars: HashMap::new(),
        counters: HashMap::new(),
        body: String::new(),
    };
    let mut text = String::from(HEADER);
    text.push('\n');
    if !canon.params.is_empty() {
        let mut items = vec!["('NodeSocketGeometry', 'Geometry', None)".to_string()];
        for p in &canon.params {
            items.push(format!(
                "('{}', '{}', {})",
                socket_type(p.ty),
                em.sockets[p.name.as_str()],
                scalar(p.default.coerce(p.ty).unwrap_or(p.default))
            ));
        }
        let _ = write!(
            text,
            "    group_input = nw.new_node(Nodes.GroupInput,\n        expose_input=[{}])\n    \n",
            items.join(",\n            ")
        );
        let mut bounded = false;
        for p in canon.params.iter().filter(|p| p.range.is_some()) {
            let [lo, hi] = p.range.unwrap();
            let socket = &em.sockets[p.name.as_str()];
            let bound = |x: f64| if p.ty == ValueType::Int { format!("{}", x as i64) } else { float(x) };
            let _ = writeln!(text, "    nw.node_group.inputs[\"{socket}\"].min_value = {}", bound(lo));
            let _ = writeln!(text, "    nw.node_group.inputs[\"{socket}\"].max_value = {}", bound(hi));
            bounded = true;
        }
        if bounded {
            text.push_str("    \n");
        }
    }
    for node in &em.graph.nodes {
        let map = mapping(&node.kind).ok_or_else(|| TranspileError::UnsupportedKind {
            node: node.id.clone(),
            kind: node.kind.clone(),
            backend: "blender_python",
        })?;
        let mut kwargs = Vec::new();
        for (port, value) in &node.args {
            let key = map
                .inputs
                .iter()
                .find(|(p, _)| p == port)
                .map(|(_, k)| *k)
                .ok_or_else(|| TranspileError::UnsupportedKind {
                    node: node.id.clone(),
                    kind: format!("{}.{port}", node.kind),
                    backend: "blender_python",
                })?;
            let key = match key {
                Socket(s) => format!("'{s}'"),
                Index(i) => i.to_string(),
            };
            kwargs.push((key, em.expr(value)));
        }
        let var = em.fresh(map.var);
        let attrs: Vec<(&str, String)> = map.attrs.iter().map(|(k, v)| (*k, format!("'{v}'"))).collect();
        em.statement(&var, map.node, &kwargs, &attrs);
        let reference = match map.output {
            Some(o) => format!("{var}.outputs[\"{o}\"]"),
            None => var.clone(),
        };
        em.vars.insert(node.id.as_str(), (var, reference));
    }
    if let Some(out) = &canon.output {
        let value = em.expr(out);
        em.statement(
            "group_output",
            "Nodes.GroupOutput",
            &[("'Geometry'".to_string(), value)],
            &[("is_active_output", "True".to_string())],
        );
    }
    text.push_str(&em.body);
    text.push('\n');
    text.push_str(FOOTER);
    Ok(text)
}
