use std::fmt::Write;

use indexmap::IndexMap;

use super::ast::{format_float, Expr, Graph, Node, ParamSpec, ValueType};
use super::registry::Registry;
use super::validate::{kahn_order, node_deps};

/// Canonical text: parameters in declaration order, nodes in dependency
/// order (ties by declaration order), then the output line.
pub fn print_pcg(graph: &Graph) -> String {
    let canon = canonicalize(graph);
    let mut out = String::new();
    for p in &canon.params {
        out.push_str(&print_param(p));
        out.push('\n');
    }
    for node in &canon.nodes {
        out.push_str(&print_node(node));
        out.push('\n');
    }
    if let Some(expr) = &canon.output {
        let _ = writeln!(out, "output = {expr}");
    }
    out
}

pub fn print_param(p: &ParamSpec) -> String {
    let mut s = format!("input {}: {} = {}", p.name, p.ty, p.default);
    if let Some([lo, hi]) = p.range {
        let bound = |x: f64| {
            if p.ty == ValueType::Int && x.fract() == 0.0 && x.abs() < 9.0e15 {
                format!("{}", x as i64)
            } else {
                format_float(x)
            }
        };
        let _ = write!(s, " range {}..{}", bound(lo), bound(hi));
    }
    s
}

pub fn print_node(node: &Node) -> String {
    let mut s = format!("{} = {}(", node.id, node.kind);
    let mut first = true;
    for (i, (port, value)) in node.args.iter().enumerate() {
        match value {
            // A variadic first port prints positionally: `join(a, b)`.
            Expr::List { list } if i == 0 && !list.is_empty() => {
                for e in list {
                    if !first {
                        s.push_str(", ");
                    }
                    first = false;
                    let _ = write!(s, "{e}");
                }
            }
            _ => {
                if !first {
                    s.push_str(", ");
                }
                first = false;
                let _ = write!(s, "{port}={value}");
            }
        }
    }
    s.push(')');
    s
}

/// Normal form used for structural comparison: canonical kind names,
/// arguments in port order, nodes in dependency order.
pub fn canonicalize(graph: &Graph) -> Graph {
    canonicalize_with(graph, Registry::standard())
}

pub fn canonicalize_with(graph: &Graph, registry: &Registry) -> Graph {
    let deps = node_deps(graph);
    let mut order = kahn_order(&deps);
    if order.len() < graph.nodes.len() {
        // cyclic: keep declaration order for whatever could not be placed
        let mut placed = vec![false; graph.nodes.len()];
        order.iter().for_each(|&i| placed[i] = true);
        order.extend((0..graph.nodes.len()).filter(|&i| !placed[i]));
    }
    let nodes = order
        .into_iter()
        .map(|i| canonical_node(&graph.nodes[i], registry))
        .collect();
    let params = graph
        .params
        .iter()
        .map(|p| ParamSpec {
            default: p.default.coerce(p.ty).unwrap_or(p.default),
            ..p.clone()
        })
        .collect();
    Graph {
        params,
        nodes,
        output: graph.output.clone(),
    }
}

fn canonical_node(node: &Node, registry: &Registry) -> Node {
    let Some(kind) = registry.get(&node.kind) else {
        return node.clone();
    };
    let mut args = IndexMap::new();
    for port in &kind.inputs {
        if let Some(v) = node.args.get(port.name) {
            args.insert(port.name.to_string(), v.clone());
        }
    }
    for (k, v) in &node.args {
        if !args.contains_key(k) {
            args.insert(k.clone(), v.clone());
        }
    }
    Node {
        id: node.id.clone(),
        kind: kind.name.to_string(),
        args,
    }
}
