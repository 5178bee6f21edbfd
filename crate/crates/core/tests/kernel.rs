use std::f64::consts::PI;

use pcg_core::fixtures::{random_delta, random_graph, table_graph, GraphShape};
use pcg_core::geom::math::{euler_to_matrix, mat_vec, Affine};
use pcg_core::geom::nodes::{cube, extrude, fill, fillet, rectangle};
use pcg_core::geom::{export_obj, import_obj, GeomError};
use pcg_core::{evaluate, parse_pcg, Bindings, Curve, EvalError, EvalSession, Mesh, Scalar, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tag_of(graph: &pcg_core::Graph, id: &str) -> u32 {
    graph.node_index(id).unwrap() as u32
}

fn bind(pairs: &[(&str, f64)]) -> Bindings {
    pairs
        .iter()
        .map(|&(k, v)| (k.to_string(), Scalar::Float(v)))
        .collect()
}

#[test]
fn default_cube_program() {
    let g = parse_pcg("c = cube()\noutput = c\n").unwrap();
    let m = evaluate(&g, &Bindings::new()).unwrap();
    assert_eq!((m.vertices.len(), m.triangles.len()), (8, 12));
    assert_eq!(m.bbox().unwrap(), ([-0.5; 3], [0.5; 3]));
}

#[test]
fn table_at_defaults() {
    let g = table_graph();
    let defaults = bind(&[
        ("table_width", 2.0),
        ("table_length", 2.0),
        ("leg_height", 2.0),
        ("leg_radius", 1.0),
    ]);
    let m = evaluate(&g, &defaults).unwrap();
    assert_eq!(m, evaluate(&g, &Bindings::new()).unwrap());
    let leg_tag = tag_of(&g, "leg");
    let legs = m.filter_tags(|t| t == leg_tag);
    // four copies of a 32-segment cylinder
    assert_eq!(legs.triangles.len(), 4 * 4 * 32);
    let (lo, hi) = legs.bbox().unwrap();
    assert_eq!(hi[2] - lo[2], 2.0);
    assert_eq!((lo[2], hi[2]), (-2.0, 0.0));
    let top = m.filter_tags(|t| t == tag_of(&g, "top"));
    let (lo, hi) = top.bbox().unwrap();
    assert_eq!((lo[2], hi[2]), (0.0, 1.0));
    assert_eq!(legs.triangles.len() + top.triangles.len(), m.triangles.len());

    let s = EvalSession::new(g, &Bindings::new()).unwrap();
    assert_eq!(s.node_value("drop"), Some(&Value::Float(-1.0)));
    assert_eq!(s.node_value("offset"), Some(&Value::Vec3([0.0, 0.0, -1.0])));
}

#[test]
fn evaluation_is_deterministic() {
    let g = table_graph();
    let b = bind(&[("leg_height", 3.3)]);
    assert_eq!(evaluate(&g, &b).unwrap(), evaluate(&g, &b).unwrap());
}

#[test]
fn leg_height_change_only_touches_legs() {
    let g = table_graph();
    let mut s = EvalSession::new(g.clone(), &Bindings::new()).unwrap();
    let before = s.mesh().clone();
    let after = s.reevaluate(&bind(&[("leg_height", 3.0)])).unwrap();
    let fresh = evaluate(&g, &bind(&[("leg_height", 3.0)])).unwrap();
    assert_eq!(*after, fresh);
    let top = tag_of(&g, "top");
    assert_eq!(
        before.filter_tags(|t| t == top).vertices,
        after.filter_tags(|t| t == top).vertices
    );
    let leg = tag_of(&g, "leg");
    assert_ne!(
        before.filter_tags(|t| t == leg).vertices,
        after.filter_tags(|t| t == leg).vertices
    );
    // leg, drop, offset, legs, legs_placed, table
    assert_eq!(s.last_recomputed(), 6);
}

#[test]
fn empty_delta_recomputes_nothing() {
    let mut s = EvalSession::new(table_graph(), &Bindings::new()).unwrap();
    let before = s.mesh().clone();
    let after = s.reevaluate(&Bindings::new()).unwrap();
    assert_eq!(s.last_recomputed(), 0);
    assert!(std::sync::Arc::ptr_eq(&before, &after));
    s.reevaluate(&bind(&[("leg_height", 2.0)])).unwrap();
    assert_eq!(s.last_recomputed(), 0);
}

#[test]
fn failed_delta_leaves_session_unchanged() {
    let src = "input d: float = 1.0 range -1.0..1.0\nq = divide(a=1.0, b=d)\nw = add(a=q, b=2.0)\nc = cube(size=(w, 1, 1))\noutput = c\n";
    let g = parse_pcg(src).unwrap();
    let mut s = EvalSession::new(g.clone(), &Bindings::new()).unwrap();
    let mesh = s.mesh().clone();
    let err = s.reevaluate(&bind(&[("d", 0.0)])).unwrap_err();
    assert!(matches!(err, EvalError::Numeric { ref node, .. } if node == "q"), "{err}");
    assert_eq!(s.bindings()["d"], Scalar::Float(1.0));
    assert_eq!(s.mesh(), &mesh);
    // range failures are rejected before anything is touched
    let err = s.reevaluate(&bind(&[("d", 2.0)])).unwrap_err();
    assert!(matches!(err, EvalError::Range { .. }));
    assert!(matches!(
        s.reevaluate(&bind(&[("nope", 0.0)])),
        Err(EvalError::UnknownParam(_))
    ));
    let mut b = Bindings::new();
    b.insert("d".into(), Scalar::Bool(true));
    assert!(matches!(s.reevaluate(&b), Err(EvalError::BindingType { .. })));
    // a later good delta matches a fresh evaluation
    let m = s.reevaluate(&bind(&[("d", 0.5)])).unwrap();
    assert_eq!(*m, evaluate(&g, &bind(&[("d", 0.5)])).unwrap());
    // negative size surfaces as a numeric error on the cube
    let err = s.reevaluate(&bind(&[("d", -0.25)])).unwrap_err();
    assert!(matches!(err, EvalError::Numeric { ref node, .. } if node == "c"));
}

#[test]
fn invalid_graph_is_reported_not_evaluated() {
    let g = pcg_core::Graph {
        params: vec![],
        nodes: vec![pcg_core::Node::new("c", "cube")],
        output: None,
    };
    assert!(matches!(evaluate(&g, &Bindings::new()), Err(EvalError::InvalidGraph(_))));
}

#[test]
fn int_binding_into_float_param() {
    let g = parse_pcg("input h: float = 1.0 range 0.5..4.0\nc = cube(size=(1, 1, h))\noutput = c\n").unwrap();
    let mut b = Bindings::new();
    b.insert("h".into(), Scalar::Int(2));
    let m = evaluate(&g, &b).unwrap();
    assert_eq!(m.bbox().unwrap().1[2], 1.0);
}

#[test]
fn filleted_square_area_closed_form() {
    let r = 0.25;
    let cap = fill(&fillet(&rectangle(2.0, 2.0).unwrap(), r, 1000).unwrap(), 0).unwrap();
    let exact = 4.0 - (4.0 - PI) * r * r;
    assert!((cap.surface_area() - exact).abs() < 1e-6);
}

#[test]
fn l_hexagon_triangulation() {
    let l = Curve::closed(vec![
        [0.0, 0.0, 0.0],
        [2.0, 0.0, 0.0],
        [2.0, 1.0, 0.0],
        [1.0, 1.0, 0.0],
        [1.0, 2.0, 0.0],
        [0.0, 2.0, 0.0],
    ]);
    let m = fill(&l, 0).unwrap();
    assert_eq!(m.triangles.len(), 4);
    assert!((m.surface_area() - l.signed_area_xy()).abs() < 1e-12);
    assert!((m.surface_area() - 3.0).abs() < 1e-12);
    for i in 0..m.triangles.len() {
        let [a, b, c] = m.triangle(i);
        let z = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        assert!(z > 0.0);
    }
}

#[test]
fn fill_of_tilted_curve_keeps_area() {
    let rot = euler_to_matrix([0.4, -0.9, 1.3]);
    let c = fillet(&rectangle(3.0, 1.0).unwrap(), 0.3, 12).unwrap();
    let tilted = Curve::closed(c.points.iter().map(|&p| mat_vec(&rot, p)).collect());
    let flat = fill(&c, 0).unwrap().surface_area();
    assert!((fill(&tilted, 0).unwrap().surface_area() - flat).abs() < 1e-9);
}

#[test]
fn table_top_thickness_and_volume() {
    let cap = fill(&fillet(&rectangle(2.0, 2.0).unwrap(), 0.25, 20).unwrap(), 0).unwrap();
    let top = extrude(&cap, 1.0, 1).unwrap();
    let (lo, hi) = top.bbox().unwrap();
    assert_eq!(hi[2] - lo[2], 1.0);
    assert!(top.is_watertight());
    for offset in [0.3, 1.0, -2.5] {
        let v = extrude(&cap, offset, 1).unwrap().signed_volume();
        assert!((v - cap.surface_area() * offset.abs()).abs() < 1e-6);
    }
}

#[test]
fn transform_composition_matches_matrix_product() {
    let (t1, r1, s1) = ([1.0, -2.0, 0.5], [0.3, 0.2, -0.7], [2.0, 0.5, 1.5]);
    let (t2, r2, s2) = ([-0.4, 0.9, 3.0], [-1.1, 0.6, 2.2], [0.7, 1.3, 0.9]);
    let src = format!(
        "c = cube(size=(1, 2, 3))\na = transform(c, translation=({}, {}, {}), rotation=({}, {}, {}), scale=({}, {}, {}))\nb = transform(a, translation=({}, {}, {}), rotation=({}, {}, {}), scale=({}, {}, {}))\noutput = b\n",
        t1[0], t1[1], t1[2], r1[0], r1[1], r1[2], s1[0], s1[1], s1[2],
        t2[0], t2[1], t2[2], r2[0], r2[1], r2[2], s2[0], s2[1], s2[2],
    );
    let m = evaluate(&parse_pcg(&src).unwrap(), &Bindings::new()).unwrap();
    let composed = Affine::from_trs(t2, r2, s2).compose(&Affine::from_trs(t1, r1, s1));
    let base = cube([1.0, 2.0, 3.0], 0).unwrap();
    for (got, v) in m.vertices.iter().zip(&base.vertices) {
        let want = composed.apply(*v);
        for k in 0..3 {
            assert!((got[k] - want[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn identity_transform_is_bitwise() {
    let a = evaluate(&parse_pcg("c = sphere()\noutput = c\n").unwrap(), &Bindings::new()).unwrap();
    let b = evaluate(
        &parse_pcg("c = sphere()\nt = transform(c)\noutput = t\n").unwrap(),
        &Bindings::new(),
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn instances_sit_on_points() {
    let g = parse_pcg("p = rectangle(width=4, height=2)\nc = cube(size=(0.2, 0.2, 0.2))\ni = instance_on_points(points=p, instance=c)\noutput = i\n").unwrap();
    let m = evaluate(&g, &Bindings::new()).unwrap();
    assert_eq!(m.triangles.len(), 4 * 12);
    let corners = [[2.0, 1.0], [-2.0, 1.0], [-2.0, -1.0], [2.0, -1.0]];
    for (k, chunk) in m.vertices.chunks(8).enumerate() {
        let cx = chunk.iter().map(|v| v[0]).sum::<f64>() / 8.0;
        let cy = chunk.iter().map(|v| v[1]).sum::<f64>() / 8.0;
        assert!((cx - corners[k][0]).abs() < 1e-12 && (cy - corners[k][1]).abs() < 1e-12);
    }
    let single = parse_pcg("p = rectangle()\nq = fillet(p, radius=0.0)\nc = cube()\ni = instance_on_points(q, c)\noutput = i\n").unwrap();
    assert_eq!(evaluate(&single, &Bindings::new()).unwrap().triangles.len(), 48);
}

#[test]
fn join_counts_and_associativity() {
    let a = cube([1.0; 3], 0).unwrap();
    let b = cube([2.0; 3], 1).unwrap();
    let c = cube([3.0; 3], 2).unwrap();
    let ab_c = Mesh::join([&Mesh::join([&a, &b]), &c]);
    let a_bc = Mesh::join([&a, &Mesh::join([&b, &c])]);
    assert_eq!(ab_c, a_bc);
    assert_eq!(ab_c.vertices.len(), 24);
    assert_eq!(Mesh::join([&a, &Mesh::empty()]), a);
}

#[test]
fn switch_is_lazy_and_reversible() {
    let src = "input on: bool = true\nbig = sphere(radius=2.0)\ns = switch(flag=on, on_true=big)\noutput = s\n";
    let g = parse_pcg(src).unwrap();
    let mut off = Bindings::new();
    off.insert("on".into(), Scalar::Bool(false));
    let mut s = EvalSession::new(g, &off).unwrap();
    assert!(s.mesh().is_empty());
    assert!(s.node_value("big").is_none());
    let shown = s.reevaluate(&[("on".to_string(), Scalar::Bool(true))].into()).unwrap();
    assert!(!shown.is_empty());
    s.reevaluate(&off).unwrap();
    let again = s.reevaluate(&[("on".to_string(), Scalar::Bool(true))].into()).unwrap();
    assert_eq!(shown, again);
}

#[test]
fn geometry_errors_carry_node_id() {
    let g = parse_pcg("p = rectangle()\nq = fill(p)\nr = fill(p)\nj = join(q, r)\ne = extrude(j)\noutput = e\n").unwrap();
    match evaluate(&g, &Bindings::new()) {
        Err(EvalError::Geometry { node, kind }) => {
            assert_eq!(node, "e");
            assert_eq!(kind, GeomError::OpenBoundaryAmbiguous);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn obj_round_trip_of_table() {
    let m = evaluate(&table_graph(), &Bindings::new()).unwrap();
    let text = export_obj(&m);
    let back = import_obj(&text).unwrap();
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(back.part_tags, m.part_tags);
    for (a, b) in back.vertices.iter().zip(&m.vertices) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= 1e-8 * b[k].abs().max(1e-300));
        }
    }
    assert_eq!(export_obj(&back), text);
}

#[test]
fn random_deltas_match_fresh_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let g = random_graph(&mut rng, GraphShape { max_nodes: 100, max_params: 8 });
        let mut s = EvalSession::new(g.clone(), &Bindings::new()).unwrap();
        let mut merged = Bindings::new();
        for _ in 0..100 {
            let delta = random_delta(&mut rng, &g, 3);
            merged.extend(delta.clone());
            let got = s.reevaluate(&delta).unwrap();
            assert_eq!(*got, evaluate(&g, &merged).unwrap());
        }
    }
}
