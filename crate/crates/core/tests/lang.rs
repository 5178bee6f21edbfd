use pcg_core::fixtures::{mutate_source, random_graph, table_graph, GraphShape, TABLE_PCG};
use pcg_core::lang::{canonicalize, DiagCode};
use pcg_core::{
    count_tokens, list_params, parse_pcg, print_pcg, topo_order, validate, Expr, Graph, Node,
    ParamSpec, Scalar, ValueType,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MINIMAL: &str = "input h: float = 1.0\nc = cube()\nout = scale(geometry=c, s=(1,1,h))\noutput = out\n";

#[test]
fn table_graph_shape() {
    let g = table_graph();
    assert_eq!(g.params.len(), 4);
    assert!(g.nodes.len() >= 10);
    assert!(validate(&g).is_empty());
    let names: Vec<_> = list_params(&g).into_iter().map(|p| (p.name, p.ty)).collect();
    assert_eq!(
        names,
        ["table_width", "table_length", "leg_height", "leg_radius"]
            .map(|n| (n.to_string(), ValueType::Float))
    );
    assert!(count_tokens(&print_pcg(&g)) < 800);
    assert!(count_tokens(TABLE_PCG) < 800);
}

#[test]
fn minimal_program() {
    let g = parse_pcg(MINIMAL).unwrap();
    assert_eq!(g.params.len(), 1);
    assert_eq!(g.nodes.len(), 2);
    let once = print_pcg(&g);
    let twice = print_pcg(&parse_pcg(&once).unwrap());
    assert_eq!(once, twice);
}

#[test]
fn missing_output_reference() {
    let diags = parse_pcg("c = cube()\noutput = missing_id\n").unwrap_err();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].code, DiagCode::UnresolvedReference);
    assert_eq!(diags[0].line, 2);
}

#[test]
fn float_into_geometry_is_one_type_mismatch() {
    let g = Graph {
        params: vec![],
        nodes: vec![
            Node::new("n", "add").arg("a", Expr::Float(1.0)),
            Node::new("t", "transform").arg("geometry", Expr::reference("n")),
        ],
        output: Some(Expr::reference("t")),
    };
    let diags = validate(&g);
    let mismatches: Vec<_> = diags.iter().filter(|d| d.code == DiagCode::TypeMismatch).collect();
    assert_eq!(mismatches.len(), 1, "{diags:?}");
}

#[test]
fn self_reference_is_a_cycle() {
    let diags = parse_pcg("a = transform(geometry=a)\noutput = a\n").unwrap_err();
    assert!(diags.iter().any(|d| d.code == DiagCode::CycleDetected));
}

#[test]
fn topo_chain_and_diamond() {
    let chain = parse_pcg("c = translate(b)\nb = translate(a)\na = cube()\noutput = c\n").unwrap();
    assert_eq!(topo_order(&chain).unwrap(), ["a", "b", "c"]);
    let diamond =
        parse_pcg("d = join(b, c)\nb = translate(a)\nc = rotate(a)\na = cube()\noutput = d\n")
            .unwrap();
    let order = topo_order(&diamond).unwrap();
    assert_eq!(order.first().unwrap(), "a");
    assert_eq!(order.last().unwrap(), "d");
}

#[test]
fn bool_param_listed() {
    let g = parse_pcg(
        "input has_arms: bool = true\nc = cube()\ns = switch(flag=has_arms, on_true=c)\noutput = s\n",
    )
    .unwrap();
    let p = &list_params(&g)[0];
    assert_eq!((p.name.as_str(), p.ty), ("has_arms", ValueType::Bool));
    assert!(list_params(&parse_pcg("c = cube()\noutput = c\n").unwrap()).is_empty());
}

#[test]
fn json_round_trip_and_field_order() {
    let g = table_graph();
    let text = g.to_json();
    assert_eq!(Graph::from_json(&text).unwrap(), g);
    let p = text.find("\"params\"").unwrap();
    let n = text.find("\"nodes\"").unwrap();
    let o = text.find("\"output\"").unwrap();
    assert!(p < n && n < o);
}

#[test]
fn int_param_into_float_port() {
    let g = parse_pcg("input n: int = 2 range 1..4\nc = cylinder(radius=n)\noutput = c\n").unwrap();
    assert_eq!(g.params[0].default, Scalar::Int(2));
    let bad = parse_pcg("input r: float = 2.0\nc = cylinder(segments=r)\noutput = c\n").unwrap_err();
    assert!(bad.iter().any(|d| d.code == DiagCode::TypeMismatch));
}

#[test]
fn independent_faults_yield_as_many_errors() {
    let clean: Vec<&str> = TABLE_PCG.lines().collect();
    for k in 1..=6 {
        let faulty: Vec<String> = clean
            .iter()
            .enumerate()
            .map(|(i, l)| if i < k { format!("{l} $") } else { l.to_string() })
            .collect();
        let diags = parse_pcg(&faulty.join("\n")).unwrap_err();
        assert!(diags.iter().filter(|d| d.is_error()).count() >= k);
    }
}

#[test]
fn random_graphs_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let g = random_graph(&mut rng, GraphShape::default());
        assert!(validate(&g).is_empty(), "{}", print_pcg(&g));
        let text = print_pcg(&g);
        let back = parse_pcg(&text).unwrap_or_else(|d| panic!("{text}\n{d:?}"));
        assert_eq!(back, canonicalize(&g));
        assert_eq!(print_pcg(&back), text);
    }
}

#[test]
fn mutated_sources_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let g = random_graph(&mut rng, GraphShape::default());
        let bad = mutate_source(&mut rng, &print_pcg(&g));
        let diags = parse_pcg(&bad).expect_err(&bad);
        assert!(diags.iter().any(|d| d.is_error()));
        let lines = bad.lines().count().max(1);
        assert!(diags.iter().all(|d| d.line >= 1 && d.line <= lines + 1));
    }
}

#[test]
fn param_default_outside_range_is_invalid() {
    let g = Graph {
        params: vec![ParamSpec::float("w", 5.0, Some([0.0, 1.0]))],
        nodes: vec![Node::new("c", "cube")],
        output: Some(Expr::reference("c")),
    };
    assert!(validate(&g).iter().any(|d| d.code == DiagCode::InvalidParam));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn topo_order_respects_every_edge(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, GraphShape { max_nodes: 50, max_params: 6 });
        let order = topo_order(&g).unwrap();
        let pos = |id: &str| order.iter().position(|x| x == id);
        for n in &g.nodes {
            for e in n.args.values() {
                for r in e.refs() {
                    if let Some(p) = pos(r) {
                        prop_assert!(p < pos(&n.id).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn parsing_arbitrary_text_never_panics(src in "[a-z0-9_=(),.\\[\\] \n#:-]{0,200}") {
        let _ = parse_pcg(&src);
    }
}
