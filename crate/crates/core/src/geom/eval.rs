//! Graph evaluation.
//!
//! A validated graph is compiled once into a [`Plan`]: every argument is
//! resolved to a parameter slot, a node slot or a literal, and unset ports
//! receive their registry defaults. [`EvalSession`] evaluates the plan on
//! demand from the output and caches node values, so a parameter change only
//! recomputes nodes downstream of that parameter.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use super::math::V3;
use super::mesh::{Curve, Mesh};
use super::nodes::{self, GeomError};
use crate::lang::registry::PortDefault;
use crate::lang::{validate_with, Diagnostic, Expr, Graph, ParamSpec, Registry, Scalar, ValueType};

/// Parameter values by name. Unbound parameters take their defaults.
pub type Bindings = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Vec3(V3),
    Curve(Arc<Curve>),
    Mesh(Arc<Mesh>),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Float(_) => ValueType::Float,
            Value::Int(_) => ValueType::Int,
            Value::Bool(_) => ValueType::Bool,
            Value::Vec3(_) => ValueType::Vec3,
            Value::Curve(_) => ValueType::Curve,
            Value::Mesh(_) => ValueType::Geometry,
        }
    }

    fn from_scalar(s: Scalar) -> Value {
        match s {
            Scalar::Bool(b) => Value::Bool(b),
            Scalar::Int(i) => Value::Int(i),
            Scalar::Float(x) => Value::Float(x),
        }
    }

    fn from_default(d: PortDefault) -> Value {
        match d {
            PortDefault::Float(x) => Value::Float(x),
            PortDefault::Int(i) => Value::Int(i),
            PortDefault::Bool(b) => Value::Bool(b),
            PortDefault::Vec3(v) => Value::Vec3(v),
            PortDefault::EmptyGeometry => Value::Mesh(Arc::new(Mesh::empty())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("graph failed validation with {} diagnostic(s)", .0.len())]
    InvalidGraph(Vec<Diagnostic>),
    #[error("no parameter named `{0}`")]
    UnknownParam(String),
    #[error("parameter `{name}` expects {expected}, got {found}")]
    BindingType {
        name: String,
        expected: ValueType,
        found: ValueType,
    },
    #[error("parameter `{name}` = {value} is outside {lo}..{hi}")]
    Range {
        name: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("node `{node}`: {message}")]
    Numeric { node: String, message: String },
    #[error("node `{node}`: {kind}")]
    Geometry { node: String, kind: GeomError },
    #[error("node `{node}`: kind `{kind}` has no evaluator")]
    Unsupported { node: String, kind: String },
}

#[derive(Debug, Clone)]
enum CExpr {
    Lit(Value),
    Param(usize),
    Node(usize),
    Vec3(Box<[CExpr; 3]>),
    List(Vec<CExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MathOp {
    Add,
    Subtract,
    Multiply,
    Divide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Cube,
    Cylinder,
    Sphere,
    Rectangle,
    Fillet,
    Fill,
    Extrude,
    Transform,
    Translate,
    Rotate,
    Scale,
    Join,
    Switch,
    CombineXyz,
    InstanceOnPoints,
    Math(MathOp),
}

impl Op {
    fn from_kind(kind: &str) -> Option<Op> {
        Some(match kind {
            "cube" => Op::Cube,
            "cylinder" => Op::Cylinder,
            "sphere" => Op::Sphere,
            "rectangle" => Op::Rectangle,
            "fillet" => Op::Fillet,
            "fill" => Op::Fill,
            "extrude" => Op::Extrude,
            "transform" => Op::Transform,
            "translate" => Op::Translate,
            "rotate" => Op::Rotate,
            "scale" => Op::Scale,
            "join" => Op::Join,
            "switch" => Op::Switch,
            "combine_xyz" => Op::CombineXyz,
            "instance_on_points" => Op::InstanceOnPoints,
            "add" => Op::Math(MathOp::Add),
            "subtract" => Op::Math(MathOp::Subtract),
            "multiply" => Op::Math(MathOp::Multiply),
            "divide" => Op::Math(MathOp::Divide),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
struct Step {
    op: Option<Op>,
    /// One entry per input port of the kind, in port order.
    args: Vec<CExpr>,
}

/// A graph compiled for evaluation.
#[derive(Debug, Clone)]
struct Plan {
    params: Vec<ParamSpec>,
    param_slots: HashMap<String, usize>,
    steps: Vec<Step>,
    output: CExpr,
}

impl Plan {
    fn compile(graph: &Graph, registry: &Registry) -> Result<Plan, EvalError> {
        let diags = validate_with(graph, registry);
        if diags.iter().any(Diagnostic::is_error) {
            return Err(EvalError::InvalidGraph(diags));
        }
        let param_slots: HashMap<String, usize> = graph
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), i))
            .collect();
        let node_slots: HashMap<&str, usize> = graph
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let resolve = |e: &Expr| resolve(e, &param_slots, &node_slots);
        let steps = graph
            .nodes
            .iter()
            .map(|node| {
                let kind = registry.get(&node.kind).expect("validated kind");
                let args = kind
                    .inputs
                    .iter()
                    .map(|port| match node.args.get(port.name) {
                        Some(e) => resolve(e),
                        None if port.variadic => CExpr::List(Vec::new()),
                        None => CExpr::Lit(Value::from_default(
                            port.default.expect("validated required port"),
                        )),
                    })
                    .collect();
                Step {
                    op: Op::from_kind(kind.name),
                    args,
                }
            })
            .collect();
        let output = resolve(graph.output.as_ref().expect("validated output"));
        Ok(Plan {
            params: graph.params.clone(),
            param_slots,
            steps,
            output,
        })
    }

    /// For every parameter, the nodes whose value depends on it, directly
    /// or through other nodes.
    fn param_dependents(&self) -> Vec<Vec<usize>> {
        let n = self.steps.len();
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut direct: Vec<Vec<usize>> = vec![Vec::new(); self.params.len()];
        for (i, step) in self.steps.iter().enumerate() {
            let mut refs = Vec::new();
            step.args.iter().for_each(|a| collect(a, &mut refs));
            for r in refs {
                match r {
                    Ref::Param(p) => direct[p].push(i),
                    Ref::Node(j) => users[j].push(i),
                }
            }
        }
        direct
            .into_iter()
            .map(|seeds| {
                let mut seen = vec![false; n];
                let mut stack = seeds;
                while let Some(i) = stack.pop() {
                    if !std::mem::replace(&mut seen[i], true) {
                        stack.extend(users[i].iter().copied());
                    }
                }
                (0..n).filter(|&i| seen[i]).collect()
            })
            .collect()
    }
}

enum Ref {
    Param(usize),
    Node(usize),
}

fn collect(e: &CExpr, out: &mut Vec<Ref>) {
    match e {
        CExpr::Lit(_) => {}
        CExpr::Param(p) => out.push(Ref::Param(*p)),
        CExpr::Node(n) => out.push(Ref::Node(*n)),
        CExpr::Vec3(v) => v.iter().for_each(|c| collect(c, out)),
        CExpr::List(l) => l.iter().for_each(|c| collect(c, out)),
    }
}

fn resolve(e: &Expr, params: &HashMap<String, usize>, nodes: &HashMap<&str, usize>) -> CExpr {
    match e {
        Expr::Bool(b) => CExpr::Lit(Value::Bool(*b)),
        Expr::Int(i) => CExpr::Lit(Value::Int(*i)),
        Expr::Float(x) => CExpr::Lit(Value::Float(*x)),
        Expr::Ref { name, .. } => match nodes.get(name.as_str()) {
            Some(&i) => CExpr::Node(i),
            None => CExpr::Param(params[name]),
        },
        Expr::Vec3 { vec3 } => {
            let [x, y, z] = &**vec3;
            let c = |e: &Expr| resolve(e, params, nodes);
            match (c(x), c(y), c(z)) {
                (CExpr::Lit(a), CExpr::Lit(b), CExpr::Lit(d)) => {
                    CExpr::Lit(Value::Vec3([num(&a), num(&b), num(&d)]))
                }
                (a, b, d) => CExpr::Vec3(Box::new([a, b, d])),
            }
        }
        Expr::List { list } => CExpr::List(list.iter().map(|e| resolve(e, params, nodes)).collect()),
    }
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Float(x) => *x,
        Value::Int(i) => *i as f64,
        other => panic!("validated numeric value, found {:?}", other.value_type()),
    }
}

/// Checks a binding against its parameter, returning the coerced value.
fn check_binding(spec: &ParamSpec, value: Scalar) -> Result<Scalar, EvalError> {
    let coerced = value.coerce(spec.ty).ok_or_else(|| EvalError::BindingType {
        name: spec.name.clone(),
        expected: spec.ty,
        found: value.value_type(),
    })?;
    if let (Some([lo, hi]), Some(x)) = (spec.range, coerced.as_f64()) {
        if !(x >= lo && x <= hi) {
            return Err(EvalError::Range {
                name: spec.name.clone(),
                value: x,
                lo,
                hi,
            });
        }
    } else if let Some(x) = coerced.as_f64() {
        if !x.is_finite() {
            return Err(EvalError::Range {
                name: spec.name.clone(),
                value: x,
                lo: f64::MIN,
                hi: f64::MAX,
            });
        }
    }
    Ok(coerced)
}

/// Full evaluation of `graph` with `bindings` over the standard registry.
pub fn evaluate(graph: &Graph, bindings: &Bindings) -> Result<Mesh, EvalError> {
    let session = EvalSession::new(graph.clone(), bindings)?;
    Ok(Arc::unwrap_or_clone(session.mesh))
}

/// Incremental evaluator for one editing stream.
#[derive(Debug, Clone)]
pub struct EvalSession {
    graph: Graph,
    node_ids: Vec<String>,
    plan: Plan,
    values: Vec<Scalar>,
    cache: Vec<Option<Value>>,
    dependents: Vec<Vec<usize>>,
    mesh: Arc<Mesh>,
    last_recomputed: usize,
    total_recomputed: u64,
}

impl EvalSession {
    pub fn new(graph: Graph, bindings: &Bindings) -> Result<EvalSession, EvalError> {
        EvalSession::with_registry(graph, bindings, Registry::standard())
    }

    pub fn with_registry(
        graph: Graph,
        bindings: &Bindings,
        registry: &Registry,
    ) -> Result<EvalSession, EvalError> {
        let plan = Plan::compile(&graph, registry)?;
        let mut values: Vec<Scalar> = plan.params.iter().map(|p| p.default).collect();
        for (name, &v) in bindings {
            let &slot = plan
                .param_slots
                .get(name)
                .ok_or_else(|| EvalError::UnknownParam(name.clone()))?;
            values[slot] = check_binding(&plan.params[slot], v)?;
        }
        let dependents = plan.param_dependents();
        let mut session = EvalSession {
            node_ids: graph.nodes.iter().map(|n| n.id.clone()).collect(),
            graph,
            cache: vec![None; plan.steps.len()],
            plan,
            values,
            dependents,
            mesh: Arc::new(Mesh::empty()),
            last_recomputed: 0,
            total_recomputed: 0,
        };
        session.mesh = session.run()?;
        Ok(session)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Current value of every parameter, bound or default.
    pub fn bindings(&self) -> Bindings {
        self.plan
            .params
            .iter()
            .zip(&self.values)
            .map(|(p, &v)| (p.name.clone(), v))
            .collect()
    }

    /// Nodes computed by the most recent evaluation.
    pub fn last_recomputed(&self) -> usize {
        self.last_recomputed
    }

    pub fn total_recomputed(&self) -> u64 {
        self.total_recomputed
    }

    /// Cached value of a node, if it has been evaluated and is still valid.
    pub fn node_value(&self, id: &str) -> Option<&Value> {
        let i = self.node_ids.iter().position(|n| n == id)?;
        self.cache[i].as_ref()
    }

    /// Applies `delta` and recomputes what it invalidates. The delta is
    /// checked as a whole first; on any error the session is unchanged.
    pub fn reevaluate(&mut self, delta: &Bindings) -> Result<Arc<Mesh>, EvalError> {
        let mut changes = Vec::with_capacity(delta.len());
        for (name, &v) in delta {
            let &slot = self
                .plan
                .param_slots
                .get(name)
                .ok_or_else(|| EvalError::UnknownParam(name.clone()))?;
            let v = check_binding(&self.plan.params[slot], v)?;
            if v != self.values[slot] {
                changes.push((slot, v));
            }
        }
        if changes.is_empty() {
            self.last_recomputed = 0;
            return Ok(self.mesh.clone());
        }
        let mut stale = vec![false; self.cache.len()];
        for &(slot, _) in &changes {
            for &i in &self.dependents[slot] {
                stale[i] = true;
            }
        }
        let backup: Vec<(usize, Option<Value>)> = stale
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s)
            .map(|(i, _)| (i, self.cache[i].take()))
            .collect();
        let old_values: Vec<(usize, Scalar)> =
            changes.iter().map(|&(s, _)| (s, self.values[s])).collect();
        for &(slot, v) in &changes {
            self.values[slot] = v;
        }
        match self.run() {
            Ok(mesh) => {
                self.mesh = mesh.clone();
                Ok(mesh)
            }
            Err(e) => {
                for (slot, v) in old_values {
                    self.values[slot] = v;
                }
                for (i, v) in backup {
                    self.cache[i] = v;
                }
                Err(e)
            }
        }
    }

    fn run(&mut self) -> Result<Arc<Mesh>, EvalError> {
        let mut counter = 0;
        let output = self.plan.output.clone();
        let result = self.expr(&output, &mut counter);
        self.last_recomputed = counter;
        self.total_recomputed += counter as u64;
        match result? {
            Value::Mesh(m) => Ok(m),
            other => panic!("validated output is geometry, found {:?}", other.value_type()),
        }
    }

    fn expr(&mut self, e: &CExpr, counter: &mut usize) -> Result<Value, EvalError> {
        Ok(match e {
            CExpr::Lit(v) => v.clone(),
            CExpr::Param(p) => Value::from_scalar(self.values[*p]),
            CExpr::Node(i) => self.node(*i, counter)?,
            CExpr::Vec3(c) => {
                let mut out = [0.0; 3];
                for (k, comp) in c.iter().enumerate() {
                    out[k] = num(&self.expr(comp, counter)?);
                }
                Value::Vec3(out)
            }
            CExpr::List(_) => panic!("list outside a variadic port"),
        })
    }

    fn node(&mut self, i: usize, counter: &mut usize) -> Result<Value, EvalError> {
        if let Some(v) = &self.cache[i] {
            return Ok(v.clone());
        }
        let v = self.compute(i, counter)?;
        *counter += 1;
        self.cache[i] = Some(v.clone());
        Ok(v)
    }

    fn compute(&mut self, i: usize, counter: &mut usize) -> Result<Value, EvalError> {
        let step = self.plan.steps[i].clone();
        let Some(op) = step.op else {
            return Err(EvalError::Unsupported {
                node: self.node_ids[i].clone(),
                kind: self.graph.nodes[i].kind.clone(),
            });
        };
        let tag = i as u32;
        let geom = |r: Result<Mesh, GeomError>, id: String| r.map(|m| Value::Mesh(Arc::new(m))).map_err(|k| lift(id, k));
        let args = &step.args;

        if op == Op::Switch {
            let flag = matches!(self.expr(&args[0], counter)?, Value::Bool(true));
            return self.expr(&args[if flag { 1 } else { 2 }], counter);
        }
        if op == Op::Join {
            let CExpr::List(items) = &args[0] else {
                panic!("validated variadic join");
            };
            let mut parts = Vec::with_capacity(items.len());
            for item in items {
                parts.push(mesh(self.expr(item, counter)?));
            }
            return Ok(Value::Mesh(Arc::new(Mesh::join(parts.iter().map(|m| &**m)))));
        }

        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.expr(a, counter)?);
        }
        let id = self.node_ids[i].clone();
        Ok(match op {
            Op::Cube => geom(nodes::cube(vec3(&vals[0]), tag), id)?,
            Op::Cylinder => geom(
                nodes::cylinder(num(&vals[0]), num(&vals[1]), int(&vals[2]), tag),
                id,
            )?,
            Op::Sphere => geom(
                nodes::sphere(num(&vals[0]), int(&vals[1]), int(&vals[2]), tag),
                id,
            )?,
            Op::Rectangle => Value::Curve(Arc::new(
                nodes::rectangle(num(&vals[0]), num(&vals[1])).map_err(|k| lift(id, k))?,
            )),
            Op::Fillet => Value::Curve(Arc::new(
                nodes::fillet(&curve(&vals[0]), num(&vals[1]), int(&vals[2]))
                    .map_err(|k| lift(id, k))?,
            )),
            Op::Fill => geom(nodes::fill(&curve(&vals[0]), tag), id)?,
            Op::Extrude => geom(nodes::extrude(&mesh(vals[0].clone()), num(&vals[1]), tag), id)?,
            Op::Transform => spatial(&vals[0], vec3(&vals[1]), vec3(&vals[2]), vec3(&vals[3])),
            Op::Translate => spatial(&vals[0], vec3(&vals[1]), [0.0; 3], [1.0; 3]),
            Op::Rotate => spatial(&vals[0], [0.0; 3], vec3(&vals[1]), [1.0; 3]),
            Op::Scale => spatial(&vals[0], [0.0; 3], [0.0; 3], vec3(&vals[1])),
            Op::CombineXyz => Value::Vec3([num(&vals[0]), num(&vals[1]), num(&vals[2])]),
            Op::InstanceOnPoints => Value::Mesh(Arc::new(nodes::instance_on_points(
                &curve(&vals[0]),
                &mesh(vals[1].clone()),
            ))),
            Op::Math(m) => {
                let (a, b) = (num(&vals[0]), num(&vals[1]));
                if m == MathOp::Divide && b == 0.0 {
                    return Err(EvalError::Numeric {
                        node: id,
                        message: format!("division of {a} by zero"),
                    });
                }
                let r = match m {
                    MathOp::Add => a + b,
                    MathOp::Subtract => a - b,
                    MathOp::Multiply => a * b,
                    MathOp::Divide => a / b,
                };
                if !r.is_finite() {
                    return Err(EvalError::Numeric {
                        node: id,
                        message: format!("result {r} is not finite"),
                    });
                }
                Value::Float(r)
            }
            Op::Switch | Op::Join => unreachable!(),
        })
    }
}

fn lift(node: String, kind: GeomError) -> EvalError {
    match kind {
        GeomError::Numeric(message) => EvalError::Numeric { node, message },
        kind => EvalError::Geometry { node, kind },
    }
}

fn int(v: &Value) -> i64 {
    match v {
        Value::Int(i) => *i,
        other => panic!("validated int value, found {:?}", other.value_type()),
    }
}

fn vec3(v: &Value) -> V3 {
    match v {
        Value::Vec3(x) => *x,
        other => panic!("validated vec3 value, found {:?}", other.value_type()),
    }
}

fn curve(v: &Value) -> Arc<Curve> {
    match v {
        Value::Curve(c) => c.clone(),
        other => panic!("validated curve value, found {:?}", other.value_type()),
    }
}

fn mesh(v: Value) -> Arc<Mesh> {
    match v {
        Value::Mesh(m) => m,
        other => panic!("validated geometry value, found {:?}", other.value_type()),
    }
}

fn spatial(v: &Value, t: V3, r: V3, s: V3) -> Value {
    match v {
        Value::Curve(c) => Value::Curve(Arc::new(Curve {
            points: nodes::transform_points(&c.points, t, r, s),
            closed: c.closed,
        })),
        Value::Mesh(m) => Value::Mesh(Arc::new(Mesh {
            vertices: nodes::transform_points(&m.vertices, t, r, s),
            triangles: m.triangles.clone(),
            part_tags: m.part_tags.clone(),
        })),
        other => panic!("validated spatial value, found {:?}", other.value_type()),
    }
}
