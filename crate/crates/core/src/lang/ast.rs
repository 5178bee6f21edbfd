use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Type carried by a port, a parameter, or an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Float,
    Int,
    Bool,
    Vec3,
    Curve,
    Geometry,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Float => "float",
            ValueType::Int => "int",
            ValueType::Bool => "bool",
            ValueType::Vec3 => "vec3",
            ValueType::Curve => "curve",
            ValueType::Geometry => "geometry",
        }
    }

    pub fn from_name(name: &str) -> Option<ValueType> {
        Some(match name.to_ascii_lowercase().as_str() {
            "float" => ValueType::Float,
            "int" => ValueType::Int,
            "bool" => ValueType::Bool,
            "vec3" => ValueType::Vec3,
            "curve" => ValueType::Curve,
            "geometry" => ValueType::Geometry,
            _ => return None,
        })
    }

    /// Whether a value of type `self` may flow into a slot of type `target`.
    /// Int to Float is the only implicit conversion.
    pub fn converts_to(self, target: ValueType) -> bool {
        self == target || (self == ValueType::Int && target == ValueType::Float)
    }

    pub fn is_scalar_param(self) -> bool {
        matches!(self, ValueType::Float | ValueType::Int | ValueType::Bool)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scalar literal used for parameter defaults and bindings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
}

impl Scalar {
    pub fn value_type(self) -> ValueType {
        match self {
            Scalar::Bool(_) => ValueType::Bool,
            Scalar::Int(_) => ValueType::Int,
            Scalar::Float(_) => ValueType::Float,
        }
    }

    pub fn as_f64(self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(i as f64),
            Scalar::Float(x) => Some(x),
            Scalar::Bool(_) => None,
        }
    }

    /// Converts to `ty`, applying Int to Float when needed.
    pub fn coerce(self, ty: ValueType) -> Option<Scalar> {
        match (self, ty) {
            (Scalar::Int(i), ValueType::Float) => Some(Scalar::Float(i as f64)),
            (s, t) if s.value_type() == t => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => f.write_str(&format_float(*x)),
        }
    }
}

/// Shortest text that parses back to the same `f64`, always with a decimal
/// point or exponent so it re-lexes as a float.
pub fn format_float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || !x.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

/// Graph-level input exposed to sliders and checkboxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ValueType,
    pub default: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
}

impl ParamSpec {
    pub fn float(name: impl Into<String>, default: f64, range: Option<[f64; 2]>) -> Self {
        ParamSpec {
            name: name.into(),
            ty: ValueType::Float,
            default: Scalar::Float(default),
            range,
        }
    }

    pub fn boolean(name: impl Into<String>, default: bool) -> Self {
        ParamSpec {
            name: name.into(),
            ty: ValueType::Bool,
            default: Scalar::Bool(default),
            range: None,
        }
    }

    pub fn in_range(&self, value: Scalar) -> bool {
        match (self.range, value.as_f64()) {
            (Some([lo, hi]), Some(x)) => x >= lo && x <= hi,
            _ => true,
        }
    }
}

/// Right-hand side of a node argument or the output declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Float(f64),
    Ref {
        #[serde(rename = "ref")]
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        port: Option<String>,
    },
    Vec3 { vec3: Box<[Expr; 3]> },
    List { list: Vec<Expr> },
}

impl Expr {
    pub fn reference(name: impl Into<String>) -> Expr {
        Expr::Ref {
            name: name.into(),
            port: None,
        }
    }

    pub fn vec3(x: Expr, y: Expr, z: Expr) -> Expr {
        Expr::Vec3 {
            vec3: Box::new([x, y, z]),
        }
    }

    pub fn vec3_lit(v: [f64; 3]) -> Expr {
        Expr::vec3(Expr::Float(v[0]), Expr::Float(v[1]), Expr::Float(v[2]))
    }

    /// Names referenced anywhere inside this expression, in order.
    pub fn refs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Ref { name, .. } => out.push(name),
            Expr::Vec3 { vec3 } => vec3.iter().for_each(|e| e.collect_refs(out)),
            Expr::List { list } => list.iter().for_each(|e| e.collect_refs(out)),
            _ => {}
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Float(x) => f.write_str(&format_float(*x)),
            Expr::Ref { name, port: None } => f.write_str(name),
            Expr::Ref {
                name,
                port: Some(p),
            } => write!(f, "{name}.{p}"),
            Expr::Vec3 { vec3 } => write!(f, "({}, {}, {})", vec3[0], vec3[1], vec3[2]),
            Expr::List { list } => {
                f.write_str("[")?;
                for (i, e) in list.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: String,
    #[serde(default)]
    pub args: IndexMap<String, Expr>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            kind: kind.into(),
            args: IndexMap::new(),
        }
    }

    pub fn arg(mut self, port: impl Into<String>, value: Expr) -> Self {
        self.args.insert(port.into(), value);
        self
    }
}

/// A procedural compact graph: declared inputs, nodes and a single output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Graph {
    pub params: Vec<ParamSpec>,
    pub nodes: Vec<Node>,
    pub output: Option<Expr>,
}

impl Graph {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Graph, serde_json::Error> {
        serde_json::from_str(text)
    }
}
