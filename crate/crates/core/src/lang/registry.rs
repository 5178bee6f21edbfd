//! Node kind catalog.
//!
//! The standard registry carries the working subset of the catalog. Further
//! kinds can be added with [`Registry::register`]; the geometry kernel reports
//! an evaluation error for kinds it has no semantics for.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::ast::ValueType;

/// Accepted type of an input port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortType {
    Exact(ValueType),
    /// Either a curve or a mesh; the output follows the input.
    Spatial,
}

impl PortType {
    pub fn accepts(self, actual: ValueType) -> bool {
        match self {
            PortType::Exact(t) => actual.converts_to(t),
            PortType::Spatial => matches!(actual, ValueType::Curve | ValueType::Geometry),
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            PortType::Exact(t) => t.as_str(),
            PortType::Spatial => "curve|geometry",
        }
    }
}

/// Default used when an input port is left unset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PortDefault {
    Float(f64),
    Int(i64),
    Bool(bool),
    Vec3([f64; 3]),
    EmptyGeometry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputPort {
    pub name: &'static str,
    pub ty: PortType,
    pub default: Option<PortDefault>,
    /// Collects every positional argument from this port onwards.
    pub variadic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputType {
    Fixed(ValueType),
    /// Same type as the value bound to the input port at this index.
    FollowInput(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPort {
    pub name: &'static str,
    pub ty: OutputType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeKind {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub summary: &'static str,
    pub inputs: Vec<InputPort>,
    pub outputs: Vec<OutputPort>,
}

impl NodeKind {
    pub fn input(&self, port: &str) -> Option<(usize, &InputPort)> {
        self.inputs.iter().enumerate().find(|(_, p)| p.name == port)
    }

    pub fn output_index(&self, port: &str) -> Option<usize> {
        self.outputs.iter().position(|p| p.name == port)
    }

    /// `input` and `output` are statements, not callable kinds.
    pub fn is_pseudo(&self) -> bool {
        self.name == "input" || self.name == "output"
    }
}

#[derive(Debug, Clone)]
pub struct Registry {
    kinds: Vec<NodeKind>,
    lookup: HashMap<String, usize>,
}

fn port(name: &'static str, ty: ValueType, default: Option<PortDefault>) -> InputPort {
    InputPort {
        name,
        ty: PortType::Exact(ty),
        default,
        variadic: false,
    }
}

fn spatial(name: &'static str) -> InputPort {
    InputPort {
        name,
        ty: PortType::Spatial,
        default: None,
        variadic: false,
    }
}

fn out(name: &'static str, ty: ValueType) -> OutputPort {
    OutputPort {
        name,
        ty: OutputType::Fixed(ty),
    }
}

fn follow(name: &'static str, input: usize) -> OutputPort {
    OutputPort {
        name,
        ty: OutputType::FollowInput(input),
    }
}

fn math_kind(name: &'static str, summary: &'static str) -> NodeKind {
    use PortDefault as D;
    NodeKind {
        name,
        aliases: &[],
        summary,
        inputs: vec![
            port("a", ValueType::Float, Some(D::Float(0.5))),
            port("b", ValueType::Float, Some(D::Float(0.5))),
        ],
        outputs: vec![out("value", ValueType::Float)],
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            kinds: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    /// Shared instance of the working subset.
    pub fn standard() -> &'static Registry {
        static STANDARD: OnceLock<Registry> = OnceLock::new();
        STANDARD.get_or_init(Registry::build_standard)
    }

    fn build_standard() -> Registry {
        use PortDefault as D;
        use ValueType::*;
        let mut r = Registry::empty();
        r.register(NodeKind {
            name: "input",
            aliases: &[],
            summary: "graph parameter declaration",
            inputs: vec![],
            outputs: vec![out("value", Float)],
        });
        r.register(NodeKind {
            name: "output",
            aliases: &[],
            summary: "graph result declaration",
            inputs: vec![port("geometry", Geometry, None)],
            outputs: vec![],
        });
        r.register(NodeKind {
            name: "cube",
            aliases: &[],
            summary: "box centered at the origin with the given edge lengths",
            inputs: vec![port("size", Vec3, Some(D::Vec3([1.0, 1.0, 1.0])))],
            outputs: vec![out("mesh", Geometry)],
        });
        r.register(NodeKind {
            name: "cylinder",
            aliases: &[],
            summary: "closed cylinder along z centered at the origin",
            inputs: vec![
                port("radius", Float, Some(D::Float(1.0))),
                port("depth", Float, Some(D::Float(2.0))),
                port("segments", Int, Some(D::Int(32))),
            ],
            outputs: vec![out("mesh", Geometry)],
        });
        r.register(NodeKind {
            name: "sphere",
            aliases: &["uv_sphere"],
            summary: "UV sphere centered at the origin",
            inputs: vec![
                port("radius", Float, Some(D::Float(1.0))),
                port("rings", Int, Some(D::Int(16))),
                port("segments", Int, Some(D::Int(32))),
            ],
            outputs: vec![out("mesh", Geometry)],
        });
        r.register(NodeKind {
            name: "rectangle",
            aliases: &["quadrilateral"],
            summary: "closed rectangle curve in the z=0 plane",
            inputs: vec![
                port("width", Float, Some(D::Float(1.0))),
                port("height", Float, Some(D::Float(1.0))),
            ],
            outputs: vec![out("curve", Curve)],
        });
        r.register(NodeKind {
            name: "fillet",
            aliases: &["fillet_curve"],
            summary: "rounds curve corners with circular arcs",
            inputs: vec![
                port("curve", Curve, None),
                port("radius", Float, Some(D::Float(0.25))),
                port("count", Int, Some(D::Int(20))),
            ],
            outputs: vec![out("curve", Curve)],
        });
        r.register(NodeKind {
            name: "fill",
            aliases: &["fill_curve"],
            summary: "triangulates the inside of a closed planar curve",
            inputs: vec![port("curve", Curve, None)],
            outputs: vec![out("mesh", Geometry)],
        });
        r.register(NodeKind {
            name: "extrude",
            aliases: &["extrude_mesh"],
            summary: "extends a planar cap along its normal into a closed prism",
            inputs: vec![
                port("mesh", Geometry, None),
                port("offset_scale", Float, Some(D::Float(1.0))),
            ],
            outputs: vec![out("mesh", Geometry)],
        });
        r.register(NodeKind {
            name: "transform",
            aliases: &[],
            summary: "scales, rotates (XYZ Euler, radians) then translates",
            inputs: vec![
                spatial("geometry"),
                port("translation", Vec3, Some(D::Vec3([0.0; 3]))),
                port("rotation", Vec3, Some(D::Vec3([0.0; 3]))),
                port("scale", Vec3, Some(D::Vec3([1.0; 3]))),
            ],
            outputs: vec![follow("geometry", 0)],
        });
        r.register(NodeKind {
            name: "translate",
            aliases: &[],
            summary: "moves geometry by a vector",
            inputs: vec![spatial("geometry"), port("t", Vec3, Some(D::Vec3([0.0; 3])))],
            outputs: vec![follow("geometry", 0)],
        });
        r.register(NodeKind {
            name: "rotate",
            aliases: &[],
            summary: "rotates geometry by XYZ Euler angles in radians",
            inputs: vec![spatial("geometry"), port("r", Vec3, Some(D::Vec3([0.0; 3])))],
            outputs: vec![follow("geometry", 0)],
        });
        r.register(NodeKind {
            name: "scale",
            aliases: &[],
            summary: "scales geometry per axis about the origin",
            inputs: vec![spatial("geometry"), port("s", Vec3, Some(D::Vec3([1.0; 3])))],
            outputs: vec![follow("geometry", 0)],
        });
        r.register(NodeKind {
            name: "join",
            aliases: &["join_geometry"],
            summary: "concatenates meshes without welding",
            inputs: vec![InputPort {
                name: "geometry",
                ty: PortType::Exact(Geometry),
                default: None,
                variadic: true,
            }],
            outputs: vec![out("geometry", Geometry)],
        });
        r.register(NodeKind {
            name: "switch",
            aliases: &[],
            summary: "selects one of two geometries by a boolean",
            inputs: vec![
                port("flag", Bool, Some(D::Bool(true))),
                port("on_true", Geometry, None),
                port("on_false", Geometry, Some(D::EmptyGeometry)),
            ],
            outputs: vec![out("geometry", Geometry)],
        });
        r.register(NodeKind {
            name: "combine_xyz",
            aliases: &["combine"],
            summary: "builds a vector from three scalars",
            inputs: vec![
                port("x", Float, Some(D::Float(0.0))),
                port("y", Float, Some(D::Float(0.0))),
                port("z", Float, Some(D::Float(0.0))),
            ],
            outputs: vec![out("vector", Vec3)],
        });
        r.register(NodeKind {
            name: "instance_on_points",
            aliases: &["point_instance"],
            summary: "places a translated copy of a mesh at every curve point",
            inputs: vec![port("points", Curve, None), port("instance", Geometry, None)],
            outputs: vec![out("geometry", Geometry)],
        });
        r.register(math_kind("add", "a + b"));
        r.register(math_kind("subtract", "a - b"));
        r.register(math_kind("multiply", "a * b"));
        r.register(math_kind("divide", "a / b"));
        r
    }

    /// Adds a kind; a later registration with the same name replaces it.
    pub fn register(&mut self, kind: NodeKind) {
        let idx = match self.lookup.get(kind.name) {
            Some(&i) => {
                self.kinds[i] = kind;
                i
            }
            None => {
                self.kinds.push(kind);
                self.kinds.len() - 1
            }
        };
        let kind = &self.kinds[idx];
        self.lookup.insert(kind.name.to_ascii_lowercase(), idx);
        for alias in kind.aliases {
            self.lookup.insert(alias.to_ascii_lowercase(), idx);
        }
    }

    /// Case-insensitive lookup by name or alias.
    pub fn get(&self, name: &str) -> Option<&NodeKind> {
        self.lookup
            .get(&name.to_ascii_lowercase())
            .map(|&i| &self.kinds[i])
    }

    pub fn kinds(&self) -> impl Iterator<Item = &NodeKind> {
        self.kinds.iter()
    }

    /// Kinds usable in node statements.
    pub fn callable(&self) -> impl Iterator<Item = &NodeKind> {
        self.kinds.iter().filter(|k| !k.is_pseudo())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn working_subset_is_registered() {
        let r = Registry::standard();
        for name in [
            "input",
            "output",
            "cube",
            "cylinder",
            "sphere",
            "rectangle",
            "quadrilateral",
            "fillet",
            "fill",
            "extrude",
            "transform",
            "translate",
            "rotate",
            "scale",
            "join",
            "switch",
            "combine_xyz",
            "instance_on_points",
            "add",
            "subtract",
            "multiply",
            "divide",
        ] {
            assert!(r.get(name).is_some(), "{name} missing");
        }
    }

    #[test]
    fn lookup_ignores_case_and_resolves_aliases() {
        let r = Registry::standard();
        assert_eq!(r.get("CuBe").unwrap().name, "cube");
        assert_eq!(r.get("Quadrilateral").unwrap().name, "rectangle");
    }

    #[test]
    fn every_kind_but_output_has_an_output() {
        for k in Registry::standard().kinds() {
            assert_eq!(k.outputs.is_empty(), k.name == "output", "{}", k.name);
        }
    }
}
