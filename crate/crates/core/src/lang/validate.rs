use std::collections::{BTreeSet, HashMap};

use super::ast::{Expr, Graph, ValueType};
use super::diag::{DiagCode, Diagnostic};
use super::parser::is_reserved;
use super::registry::{NodeKind, OutputType, PortDefault, Registry};

/// Source line of every statement of a parsed graph.
#[derive(Debug, Clone, Default)]
pub struct LineMap {
    pub params: Vec<usize>,
    pub nodes: Vec<usize>,
    pub output: Option<usize>,
    pub last: usize,
}

impl LineMap {
    /// Lines a graph would occupy if printed in its stored order.
    pub fn sequential(graph: &Graph) -> LineMap {
        let np = graph.params.len();
        let nn = graph.nodes.len();
        LineMap {
            params: (1..=np).collect(),
            nodes: (np + 1..=np + nn).collect(),
            output: graph.output.as_ref().map(|_| np + nn + 1),
            last: (np + nn + 1).max(1),
        }
    }

    fn param(&self, i: usize) -> usize {
        self.params.get(i).copied().unwrap_or(self.last)
    }

    fn node(&self, i: usize) -> usize {
        self.nodes.get(i).copied().unwrap_or(self.last)
    }
}

/// Checks every graph invariant and port type. Reports all violations.
pub fn validate(graph: &Graph) -> Vec<Diagnostic> {
    validate_with(graph, Registry::standard())
}

pub fn validate_with(graph: &Graph, registry: &Registry) -> Vec<Diagnostic> {
    validate_with_lines(graph, &LineMap::sequential(graph), registry)
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Copy)]
enum Target {
    Param(usize),
    Node(usize),
}

pub(crate) fn validate_with_lines(
    graph: &Graph,
    lines: &LineMap,
    registry: &Registry,
) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut names: HashMap<&str, Target> = HashMap::new();

    for (i, p) in graph.params.iter().enumerate() {
        let line = lines.param(i);
        if !is_identifier(&p.name) || is_reserved(&p.name) {
            diags.push(Diagnostic::error(
                DiagCode::InvalidParam,
                line,
                format!("`{}` is not a valid parameter name", p.name),
            ));
        }
        if !p.ty.is_scalar_param() {
            diags.push(Diagnostic::error(
                DiagCode::InvalidParam,
                line,
                format!("parameter `{}` must be float, int or bool", p.name),
            ));
        } else if p.default.coerce(p.ty).is_none() {
            diags.push(Diagnostic::error(
                DiagCode::TypeMismatch,
                line,
                format!(
                    "default `{}` of `{}` is not a {}",
                    p.default, p.name, p.ty
                ),
            ));
        } else if matches!(p.default.as_f64(), Some(x) if !x.is_finite()) {
            diags.push(Diagnostic::error(
                DiagCode::InvalidParam,
                line,
                format!("default of `{}` is not finite", p.name),
            ));
        }
        if let Some([lo, hi]) = p.range {
            if p.ty == ValueType::Bool {
                diags.push(Diagnostic::error(
                    DiagCode::InvalidParam,
                    line,
                    format!("bool parameter `{}` cannot declare a range", p.name),
                ));
            } else if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                diags.push(Diagnostic::error(
                    DiagCode::InvalidParam,
                    line,
                    format!("range {lo}..{hi} of `{}` is empty or not finite", p.name),
                ));
            } else if !p.in_range(p.default) {
                diags.push(Diagnostic::error(
                    DiagCode::InvalidParam,
                    line,
                    format!(
                        "default {} of `{}` lies outside {lo}..{hi}",
                        p.default, p.name
                    ),
                ));
            }
        }
        if names.insert(&p.name, Target::Param(i)).is_some() {
            diags.push(Diagnostic::error(
                DiagCode::DuplicateId,
                line,
                format!("`{}` is declared more than once", p.name),
            ));
        }
    }

    let mut kinds: Vec<Option<&NodeKind>> = Vec::with_capacity(graph.nodes.len());
    for (i, node) in graph.nodes.iter().enumerate() {
        let line = lines.node(i);
        if !is_identifier(&node.id) || is_reserved(&node.id) {
            diags.push(Diagnostic::error(
                DiagCode::SyntaxError,
                line,
                format!("`{}` is not a valid node id", node.id),
            ));
        }
        match names.get(node.id.as_str()) {
            Some(_) => diags.push(Diagnostic::error(
                DiagCode::DuplicateId,
                line,
                format!("`{}` is declared more than once", node.id),
            )),
            None => {
                names.insert(&node.id, Target::Node(i));
            }
        }
        let kind = registry.get(&node.kind).filter(|k| !k.is_pseudo());
        if kind.is_none() {
            diags.push(Diagnostic::error(
                DiagCode::UnknownNodeKind,
                line,
                format!("unknown node kind `{}`", node.kind),
            ));
        }
        kinds.push(kind);
    }

    // Port names and required inputs.
    for (i, node) in graph.nodes.iter().enumerate() {
        let Some(kind) = kinds[i] else { continue };
        let line = lines.node(i);
        for (port, value) in &node.args {
            match kind.input(port) {
                None => diags.push(Diagnostic::error(
                    DiagCode::UnknownPort,
                    line,
                    format!("`{}` has no input `{port}`", kind.name),
                )),
                Some((_, spec)) => {
                    if matches!(value, Expr::List { .. }) != spec.variadic {
                        let msg = if spec.variadic {
                            format!("input `{port}` of `{}` takes a list", kind.name)
                        } else {
                            format!("input `{port}` of `{}` does not take a list", kind.name)
                        };
                        diags.push(Diagnostic::error(DiagCode::TypeMismatch, line, msg));
                    }
                }
            }
        }
        for spec in &kind.inputs {
            let given = node.args.get(spec.name);
            let empty_list = matches!(given, Some(Expr::List { list }) if list.is_empty());
            if spec.default.is_none() && (given.is_none() || empty_list) {
                diags.push(Diagnostic::error(
                    DiagCode::MissingInput,
                    line,
                    format!("`{}` requires input `{}`", kind.name, spec.name),
                ));
            }
        }
    }

    // References.
    let resolve = |name: &str, port: &Option<String>| -> Result<Target, String> {
        let target = *names
            .get(name)
            .ok_or_else(|| format!("`{name}` is not defined"))?;
        if let Some(port) = port {
            match target {
                Target::Param(_) => return Err(format!("parameter `{name}` has no ports")),
                Target::Node(n) => {
                    if let Some(kind) = kinds[n] {
                        if kind.output_index(port).is_none() {
                            return Err(format!("`{name}` has no output `{port}`"));
                        }
                    }
                }
            }
        }
        Ok(target)
    };
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); graph.nodes.len()];
    for (i, node) in graph.nodes.iter().enumerate() {
        for value in node.args.values() {
            for_each_ref(value, &mut |name, port| match resolve(name, port) {
                Ok(Target::Node(n)) => {
                    deps[i].insert(n);
                }
                Ok(Target::Param(_)) => {}
                Err(msg) => diags.push(Diagnostic::error(
                    DiagCode::UnresolvedReference,
                    lines.node(i),
                    msg,
                )),
            });
        }
    }

    // Cycles.
    let in_cycle = cyclic_nodes(&deps);
    let mut reported = vec![false; graph.nodes.len()];
    for (i, comp) in in_cycle.iter().enumerate() {
        if let Some(c) = comp {
            if !reported[*c] {
                reported[*c] = true;
                diags.push(Diagnostic::error(
                    DiagCode::CycleDetected,
                    lines.node(i),
                    format!("`{}` depends on itself", graph.nodes[i].id),
                ));
            }
        }
    }

    // Types, in dependency order so follow-input outputs are known.
    let order = kahn_order(&deps);
    let mut out_types: Vec<Option<Vec<ValueType>>> = vec![None; graph.nodes.len()];
    let type_of_ref = |name: &str,
                       port: &Option<String>,
                       out_types: &[Option<Vec<ValueType>>]|
     -> Option<ValueType> {
        match resolve(name, port).ok()? {
            Target::Param(p) => Some(graph.params[p].ty),
            Target::Node(n) => {
                let kind = kinds[n]?;
                let idx = match port {
                    Some(p) => kind.output_index(p)?,
                    None => 0,
                };
                out_types[n].as_ref()?.get(idx).copied()
            }
        }
    };
    for &i in &order {
        let Some(kind) = kinds[i] else { continue };
        let node = &graph.nodes[i];
        let line = lines.node(i);
        let mut input_types: Vec<Option<ValueType>> = Vec::with_capacity(kind.inputs.len());
        for spec in &kind.inputs {
            let Some(value) = node.args.get(spec.name) else {
                input_types.push(spec.default.map(default_type));
                continue;
            };
            let values: Vec<&Expr> = match value {
                Expr::List { list } if spec.variadic => list.iter().collect(),
                Expr::List { .. } => {
                    input_types.push(None);
                    continue;
                }
                other => vec![other],
            };
            let mut seen = None;
            for v in values {
                let actual = match expr_type(v, &|n, p| type_of_ref(n, p, &out_types)) {
                    Ok(t) => t,
                    Err(msg) => {
                        diags.push(Diagnostic::error(DiagCode::TypeMismatch, line, msg));
                        None
                    }
                };
                if let Some(actual) = actual {
                    if !spec.ty.accepts(actual) {
                        diags.push(Diagnostic::error(
                            DiagCode::TypeMismatch,
                            line,
                            format!(
                                "input `{}` of `{}` expects {}, found {actual}",
                                spec.name,
                                kind.name,
                                spec.ty.describe()
                            ),
                        ));
                    } else {
                        seen = Some(actual);
                    }
                }
            }
            input_types.push(seen);
        }
        let outs: Option<Vec<ValueType>> = kind
            .outputs
            .iter()
            .map(|o| match o.ty {
                OutputType::Fixed(t) => Some(t),
                OutputType::FollowInput(k) => input_types.get(k).copied().flatten(),
            })
            .collect();
        out_types[i] = outs;
    }

    match &graph.output {
        None => diags.push(Diagnostic::error(
            DiagCode::MissingOutput,
            lines.last,
            "graph has no `output = ...` declaration",
        )),
        Some(expr) => {
            let line = lines.output.unwrap_or(lines.last);
            match expr {
                Expr::Ref { name, port } => match resolve(name, port) {
                    Err(msg) => diags.push(Diagnostic::error(
                        DiagCode::UnresolvedReference,
                        line,
                        msg,
                    )),
                    Ok(_) => {
                        if let Some(t) = type_of_ref(name, port, &out_types) {
                            if t != ValueType::Geometry {
                                diags.push(Diagnostic::error(
                                    DiagCode::TypeMismatch,
                                    line,
                                    format!("output must be geometry, found {t}"),
                                ));
                            }
                        }
                    }
                },
                _ => diags.push(Diagnostic::error(
                    DiagCode::TypeMismatch,
                    line,
                    "output must reference a node",
                )),
            }
        }
    }
    diags
}

fn default_type(d: PortDefault) -> ValueType {
    match d {
        PortDefault::Float(_) => ValueType::Float,
        PortDefault::Int(_) => ValueType::Int,
        PortDefault::Bool(_) => ValueType::Bool,
        PortDefault::Vec3(_) => ValueType::Vec3,
        PortDefault::EmptyGeometry => ValueType::Geometry,
    }
}

fn for_each_ref(expr: &Expr, f: &mut impl FnMut(&str, &Option<String>)) {
    match expr {
        Expr::Ref { name, port } => f(name, port),
        Expr::Vec3 { vec3 } => vec3.iter().for_each(|e| for_each_ref(e, f)),
        Expr::List { list } => list.iter().for_each(|e| for_each_ref(e, f)),
        _ => {}
    }
}

/// Type of an expression; `Ok(None)` when a reference's type is unknown.
fn expr_type(
    expr: &Expr,
    ref_type: &dyn Fn(&str, &Option<String>) -> Option<ValueType>,
) -> Result<Option<ValueType>, String> {
    Ok(match expr {
        Expr::Bool(_) => Some(ValueType::Bool),
        Expr::Int(_) => Some(ValueType::Int),
        Expr::Float(x) => {
            if !x.is_finite() {
                return Err("number is not finite".into());
            }
            Some(ValueType::Float)
        }
        Expr::Ref { name, port } => ref_type(name, port),
        Expr::Vec3 { vec3 } => {
            for c in vec3.iter() {
                match expr_type(c, ref_type)? {
                    Some(t) if !t.converts_to(ValueType::Float) => {
                        return Err(format!("vector component must be float, found {t}"))
                    }
                    _ => {}
                }
            }
            Some(ValueType::Vec3)
        }
        Expr::List { .. } => return Err("lists are only allowed for variadic inputs".into()),
    })
}

/// Component id for nodes on a cycle (self-loops included), `None` otherwise.
fn cyclic_nodes(deps: &[BTreeSet<usize>]) -> Vec<Option<usize>> {
    // Tarjan's strongly connected components, iterative.
    let n = deps.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![None; n];
    let mut counter = 0;
    let adj: Vec<Vec<usize>> = deps.iter().map(|d| d.iter().copied().collect()).collect();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let cyclic = members.len() > 1 || adj[v].contains(&v);
                    if cyclic {
                        let id = *members.iter().min().expect("non-empty");
                        for m in members {
                            comp[m] = Some(id);
                        }
                    }
                }
            }
        }
    }
    comp
}

/// Kahn's algorithm with ties broken by declaration order. Nodes on cycles
/// (and nodes depending on them) are left out.
pub(crate) fn kahn_order(deps: &[BTreeSet<usize>]) -> Vec<usize> {
    let n = deps.len();
    let mut indegree: Vec<usize> = deps.iter().map(BTreeSet::len).collect();
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, d) in deps.iter().enumerate() {
        for &j in d {
            users[j].push(i);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &u in &users[i] {
            indegree[u] -= 1;
            if indegree[u] == 0 {
                ready.insert(u);
            }
        }
    }
    order
}

/// Node-to-node dependencies by index; unresolved names are ignored.
pub(crate) fn node_deps(graph: &Graph) -> Vec<BTreeSet<usize>> {
    let ids: HashMap<&str, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let params: BTreeSet<&str> = graph.params.iter().map(|p| p.name.as_str()).collect();
    graph
        .nodes
        .iter()
        .map(|node| {
            let mut d = BTreeSet::new();
            for value in node.args.values() {
                for_each_ref(value, &mut |name, _| {
                    if !params.contains(name) {
                        if let Some(&j) = ids.get(name) {
                            d.insert(j);
                        }
                    }
                });
            }
            d
        })
        .collect()
}

/// Error returned by [`topo_order`] on a cyclic graph.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cycle detected through node `{0}`")]
pub struct CycleDetected(pub String);

/// Evaluation order: every node after the nodes it references, ties broken
/// by declaration order.
pub fn topo_order(graph: &Graph) -> Result<Vec<String>, CycleDetected> {
    let deps = node_deps(graph);
    let order = kahn_order(&deps);
    if order.len() < graph.nodes.len() {
        let mut placed = vec![false; graph.nodes.len()];
        order.iter().for_each(|&i| placed[i] = true);
        let stuck = placed.iter().position(|p| !p).expect("some node unplaced");
        return Err(CycleDetected(graph.nodes[stuck].id.clone()));
    }
    Ok(order.into_iter().map(|i| graph.nodes[i].id.clone()).collect())
}

/// Parameters in declaration order.
pub fn list_params(graph: &Graph) -> Vec<super::ast::ParamSpec> {
    graph.params.clone()
}
