//! Reference programs and a seeded generator of valid random graphs, shared
//! by tests, benchmarks and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geom::Bindings;
use crate::lang::{Expr, Graph, Node, ParamSpec, Scalar, ValueType};

/// Table with four cylinder legs under a filleted, extruded top.
pub const TABLE_PCG: &str = "\
input table_width: float = 2.0 range 0.6..6.0
input table_length: float = 2.0 range 0.6..6.0
input leg_height: float = 2.0 range 0.2..6.0
input leg_radius: float = 1.0 range 0.01..2.0
inset_w = subtract(a=table_width, b=0.5)
inset_l = subtract(a=table_length, b=0.5)
corners = rectangle(width=inset_w, height=inset_l)
leg = cylinder(radius=leg_radius, depth=leg_height)
legs = instance_on_points(points=corners, instance=leg)
drop = divide(a=leg_height, b=-2.0)
offset = combine_xyz(z=drop)
legs_placed = transform(geometry=legs, translation=offset)
outline = rectangle(width=table_width, height=table_length)
rounded = fillet(curve=outline, radius=0.25, count=20)
top_face = fill(curve=rounded)
top = extrude(mesh=top_face, offset_scale=1.0)
table = join(legs_placed, top)
output = table
";

pub fn table_graph() -> Graph {
    crate::lang::parse_pcg(TABLE_PCG).expect("table fixture parses")
}

/// Shape of graphs produced by [`random_graph`].
#[derive(Debug, Clone, Copy)]
pub struct GraphShape {
    pub max_nodes: usize,
    pub max_params: usize,
}

impl Default for GraphShape {
    fn default() -> Self {
        GraphShape {
            max_nodes: 40,
            max_params: 8,
        }
    }
}

#[derive(Default)]
struct Pools {
    /// Strictly positive float expressions.
    positive: Vec<Expr>,
    /// Float expressions of either sign.
    signed: Vec<Expr>,
    bools: Vec<Expr>,
    ints: Vec<Expr>,
    vectors: Vec<Expr>,
    /// Vectors with strictly positive components.
    positive_vec: Vec<Expr>,
    /// Closed simple planar curves, with their point counts.
    curves: Vec<(String, usize)>,
    /// Planar caps suitable for extrusion.
    caps: Vec<(String, usize)>,
    /// Meshes with their triangle counts.
    meshes: Vec<(String, usize)>,
}

const MESH_BUDGET: usize = 20_000;

/// A random graph that validates and evaluates at every binding inside its
/// parameter ranges.
pub fn random_graph<R: Rng>(rng: &mut R, shape: GraphShape) -> Graph {
    let mut g = Graph::default();
    let mut p = Pools::default();
    let n_params = rng.gen_range(1..=shape.max_params.max(1));
    for i in 0..n_params {
        match rng.gen_range(0..10) {
            0 | 1 => {
                let name = format!("flag_{i}");
                g.params.push(ParamSpec::boolean(&name, rng.gen()));
                p.bools.push(Expr::reference(name));
            }
            2 => {
                let name = format!("count_{i}");
                g.params.push(ParamSpec {
                    name: name.clone(),
                    ty: ValueType::Int,
                    default: Scalar::Int(rng.gen_range(3..=6)),
                    range: Some([3.0, 8.0]),
                });
                p.ints.push(Expr::reference(name));
            }
            3 => {
                let name = format!("shift_{i}");
                g.params.push(ParamSpec::float(&name, round2(rng.gen_range(-1.0..1.0)), Some([-2.0, 2.0])));
                p.signed.push(Expr::reference(name));
            }
            _ => {
                let name = format!("size_{i}");
                g.params.push(ParamSpec::float(&name, round2(rng.gen_range(0.3..2.0)), Some([0.1, 3.0])));
                p.positive.push(Expr::reference(name.clone()));
                p.signed.push(Expr::reference(name));
            }
        }
    }

    let target = rng.gen_range(1..=shape.max_nodes.max(1));
    let mut counter = 0usize;
    let mut fresh = |kind: &str| {
        counter += 1;
        format!("{kind}_{counter}")
    };
    let mut guard = 0;
    while g.nodes.len() < target && guard < 20 * target {
        guard += 1;
        let choice = rng.gen_range(0..16);
        let node = match choice {
            0 => {
                let id = fresh("cube");
                let mut n = Node::new(&id, "cube");
                if rng.gen_bool(0.7) {
                    n = n.arg("size", pos_vec3(rng, &p));
                }
                p.meshes.push((id, 12));
                n
            }
            1 => {
                let id = fresh("cyl");
                let mut n = Node::new(&id, "cylinder")
                    .arg("radius", pos(rng, &p))
                    .arg("depth", pos(rng, &p));
                let segs = match p.ints.choose(rng) {
                    Some(e) if rng.gen_bool(0.5) => e.clone(),
                    _ => Expr::Int(rng.gen_range(3..=12)),
                };
                n = n.arg("segments", segs);
                p.meshes.push((id, 4 * 12));
                n
            }
            2 => {
                let id = fresh("ball");
                let n = Node::new(&id, "sphere")
                    .arg("radius", pos(rng, &p))
                    .arg("rings", Expr::Int(rng.gen_range(2..=6)))
                    .arg("segments", Expr::Int(rng.gen_range(3..=8)));
                p.meshes.push((id, 2 * 6 * 8));
                n
            }
            3 => {
                let id = fresh("rect");
                let n = Node::new(&id, "rectangle")
                    .arg("width", pos(rng, &p))
                    .arg("height", pos(rng, &p));
                p.curves.push((id, 4));
                n
            }
            4 => {
                let Some((src, pts)) = p.curves.choose(rng).cloned() else { continue };
                let count = rng.gen_range(2..=4);
                let id = fresh("round");
                let n = Node::new(&id, "fillet")
                    .arg("curve", Expr::reference(src))
                    .arg("radius", pos(rng, &p))
                    .arg("count", Expr::Int(count));
                let points = pts * count as usize;
                if points > 64 {
                    continue;
                }
                p.curves.push((id, points));
                n
            }
            5 => {
                let Some((src, pts)) = p.curves.choose(rng).cloned() else { continue };
                let id = fresh("face");
                p.caps.push((id.clone(), pts));
                p.meshes.push((id.clone(), pts));
                Node::new(&id, "fill").arg("curve", Expr::reference(src))
            }
            6 => {
                let Some((src, pts)) = p.caps.choose(rng).cloned() else { continue };
                let id = fresh("slab");
                let offset = if rng.gen_bool(0.5) { pos(rng, &p) } else { Expr::Float(-0.5) };
                p.meshes.push((id.clone(), 4 * pts));
                Node::new(&id, "extrude")
                    .arg("mesh", Expr::reference(src))
                    .arg("offset_scale", offset)
            }
            7 | 8 => {
                let id = fresh("xf");
                let use_curve = rng.gen_bool(0.2) && !p.curves.is_empty();
                let src = if use_curve {
                    let (c, pts) = p.curves.choose(rng).cloned().unwrap();
                    p.curves.push((id.clone(), pts));
                    c
                } else {
                    let Some((m, tris)) = p.meshes.choose(rng).cloned() else { continue };
                    p.meshes.push((id.clone(), tris));
                    m
                };
                let mut n = Node::new(&id, "transform").arg("geometry", Expr::reference(src));
                if rng.gen_bool(0.7) {
                    n = n.arg("translation", signed_vec3(rng, &p));
                }
                if rng.gen_bool(0.5) {
                    n = n.arg("rotation", signed_vec3(rng, &p));
                }
                if rng.gen_bool(0.4) {
                    n = n.arg("scale", pos_vec3(rng, &p));
                }
                n
            }
            9 => {
                let Some((m, tris)) = p.meshes.choose(rng).cloned() else { continue };
                let (kind, port, v) = match rng.gen_range(0..3) {
                    0 => ("translate", "t", signed_vec3(rng, &p)),
                    1 => ("rotate", "r", signed_vec3(rng, &p)),
                    _ => ("scale", "s", pos_vec3(rng, &p)),
                };
                let id = fresh(kind);
                p.meshes.push((id.clone(), tris));
                Node::new(&id, kind)
                    .arg("geometry", Expr::reference(m))
                    .arg(port, v)
            }
            10 => {
                if p.meshes.is_empty() {
                    continue;
                }
                let k = rng.gen_range(1..=3.min(p.meshes.len()));
                let parts: Vec<(String, usize)> =
                    p.meshes.choose_multiple(rng, k).cloned().collect();
                let tris: usize = parts.iter().map(|x| x.1).sum();
                if tris > MESH_BUDGET {
                    continue;
                }
                let id = fresh("group");
                p.meshes.push((id.clone(), tris));
                Node::new(&id, "join").arg(
                    "geometry",
                    Expr::List {
                        list: parts.into_iter().map(|x| Expr::reference(x.0)).collect(),
                    },
                )
            }
            11 => {
                if p.meshes.is_empty() {
                    continue;
                }
                let (on_true, t1) = p.meshes.choose(rng).cloned().unwrap();
                let flag = match p.bools.choose(rng) {
                    Some(b) => b.clone(),
                    None => Expr::Bool(rng.gen()),
                };
                let id = fresh("pick");
                let mut n = Node::new(&id, "switch")
                    .arg("flag", flag)
                    .arg("on_true", Expr::reference(on_true));
                let mut tris = t1;
                if rng.gen_bool(0.5) {
                    let (on_false, t2) = p.meshes.choose(rng).cloned().unwrap();
                    tris = tris.max(t2);
                    n = n.arg("on_false", Expr::reference(on_false));
                }
                p.meshes.push((id, tris));
                n
            }
            12 => {
                let Some((c, pts)) = p.curves.choose(rng).cloned() else { continue };
                let Some((m, tris)) = p.meshes.choose(rng).cloned() else { continue };
                if pts * tris > MESH_BUDGET {
                    continue;
                }
                let id = fresh("scatter");
                p.meshes.push((id.clone(), pts * tris));
                Node::new(&id, "instance_on_points")
                    .arg("points", Expr::reference(c))
                    .arg("instance", Expr::reference(m))
            }
            13 | 14 => {
                let kind = ["add", "multiply", "divide", "subtract"][rng.gen_range(0..4)];
                let id = fresh(kind);
                if kind == "subtract" {
                    let n = Node::new(&id, kind)
                        .arg("a", sgn(rng, &p))
                        .arg("b", sgn(rng, &p));
                    p.signed.push(Expr::reference(&id));
                    n
                } else {
                    let mut n = Node::new(&id, kind);
                    if rng.gen_bool(0.9) {
                        n = n.arg("a", pos(rng, &p));
                    }
                    if rng.gen_bool(0.9) {
                        n = n.arg("b", pos(rng, &p));
                    }
                    p.positive.push(Expr::reference(&id));
                    p.signed.push(Expr::reference(&id));
                    n
                }
            }
            _ => {
                let id = fresh("vec");
                let positive = rng.gen_bool(0.5);
                let comp = |rng: &mut R| if positive { pos(rng, &p) } else { sgn(rng, &p) };
                let (x, y, z) = (comp(rng), comp(rng), comp(rng));
                let n = Node::new(&id, "combine_xyz").arg("x", x).arg("y", y).arg("z", z);
                p.vectors.push(Expr::reference(&id));
                if positive {
                    p.positive_vec.push(Expr::reference(&id));
                }
                n
            }
        };
        g.nodes.push(node);
    }
    if p.meshes.is_empty() {
        let id = fresh("cube");
        g.nodes.push(Node::new(&id, "cube"));
        p.meshes.push((id, 12));
    }
    let consumed: std::collections::HashSet<String> = g
        .nodes
        .iter()
        .flat_map(|n| n.args.values().flat_map(|e| e.refs()).map(str::to_string).collect::<Vec<_>>())
        .collect();
    let sinks: Vec<&(String, usize)> = p.meshes.iter().filter(|m| !consumed.contains(&m.0)).collect();
    let total: usize = sinks.iter().map(|m| m.1).sum();
    g.output = Some(if sinks.len() == 1 {
        Expr::reference(sinks[0].0.clone())
    } else if sinks.is_empty() || total > 4 * MESH_BUDGET {
        Expr::reference(p.meshes.last().unwrap().0.clone())
    } else {
        let id = fresh("result");
        g.nodes.push(Node::new(&id, "join").arg(
            "geometry",
            Expr::List {
                list: sinks.iter().map(|m| Expr::reference(m.0.clone())).collect(),
            },
        ));
        Expr::reference(id)
    });
    // declaration order is irrelevant to printing and evaluation
    g.nodes.shuffle(rng);
    g
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn pos<R: Rng>(rng: &mut R, p: &Pools) -> Expr {
    match p.positive.choose(rng) {
        Some(e) if rng.gen_bool(0.6) => e.clone(),
        _ => {
            if rng.gen_bool(0.2) {
                Expr::Int(rng.gen_range(1..=3))
            } else {
                Expr::Float(round2(rng.gen_range(0.1..2.0)))
            }
        }
    }
}

fn sgn<R: Rng>(rng: &mut R, p: &Pools) -> Expr {
    match p.signed.choose(rng) {
        Some(e) if rng.gen_bool(0.6) => e.clone(),
        _ => Expr::Float(round2(rng.gen_range(-2.0..2.0))),
    }
}

fn pos_vec3<R: Rng>(rng: &mut R, p: &Pools) -> Expr {
    match p.positive_vec.choose(rng) {
        Some(e) if rng.gen_bool(0.3) => e.clone(),
        _ => Expr::vec3(pos(rng, p), pos(rng, p), pos(rng, p)),
    }
}

fn signed_vec3<R: Rng>(rng: &mut R, p: &Pools) -> Expr {
    match p.vectors.choose(rng) {
        Some(e) if rng.gen_bool(0.3) => e.clone(),
        _ => Expr::vec3(sgn(rng, p), sgn(rng, p), sgn(rng, p)),
    }
}

/// A binding for a random subset of the graph's parameters, inside ranges.
pub fn random_delta<R: Rng>(rng: &mut R, graph: &Graph, max_changes: usize) -> Bindings {
    let mut delta = Bindings::new();
    if graph.params.is_empty() {
        return delta;
    }
    let k = rng.gen_range(0..=max_changes.min(graph.params.len()));
    for spec in graph.params.choose_multiple(rng, k) {
        delta.insert(spec.name.clone(), random_value(rng, spec));
    }
    delta
}

/// A value of the parameter's type, inside its range when it has one.
pub fn random_value<R: Rng>(rng: &mut R, spec: &ParamSpec) -> Scalar {
    let [lo, hi] = spec.range.unwrap_or([-10.0, 10.0]);
    match spec.ty {
        ValueType::Bool => Scalar::Bool(rng.gen()),
        ValueType::Int => Scalar::Int(rng.gen_range(lo.ceil() as i64..=hi.floor() as i64)),
        _ => Scalar::Float(rng.gen_range(lo..=hi)),
    }
}

/// Applies one random fault to printed PCG source. Every fault kind is
/// guaranteed to make the source invalid.
pub fn mutate_source<R: Rng>(rng: &mut R, source: &str) -> String {
    let mut lines: Vec<String> = source.lines().map(str::to_string).collect();
    let node_lines: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.contains('(') && !l.starts_with("input "))
        .map(|(i, _)| i)
        .collect();
    let output_line = lines.iter().position(|l| l.starts_with("output ="));
    loop {
        match rng.gen_range(0..6) {
            0 if !lines.is_empty() => {
                let i = rng.gen_range(0..lines.len());
                let line = &mut lines[i];
                let cut = rng.gen_range(0..=line.len());
                let ch = ['$', '@', '?', '!', '{', '\''][rng.gen_range(0..6)];
                line.insert(cut, ch);
                break;
            }
            1 if !node_lines.is_empty() => {
                let i = *node_lines.choose(rng).unwrap();
                let line = &lines[i];
                let (lhs, rhs) = line.split_once(" = ").unwrap();
                let (_, args) = rhs.split_once('(').unwrap();
                lines[i] = format!("{lhs} = frobnicate({args}");
                break;
            }
            2 if output_line.is_some() => {
                lines[output_line.unwrap()] = "output = ghost_node".to_string();
                break;
            }
            3 if !node_lines.is_empty() => {
                let i = *node_lines.choose(rng).unwrap();
                let copy = lines[i].clone();
                lines.insert(i + 1, copy);
                break;
            }
            4 if output_line.is_some() => {
                lines.remove(output_line.unwrap());
                break;
            }
            5 if !node_lines.is_empty() => {
                let i = *node_lines.choose(rng).unwrap();
                let line = lines[i].trim_end().to_string();
                lines[i] = line[..line.len() - 1].to_string();
                break;
            }
            _ if lines.is_empty() => return "$".to_string(),
            _ => {}
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
