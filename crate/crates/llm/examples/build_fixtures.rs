//! Regenerates `fixtures/corpus.jsonl` and the replay store entries used by
//! the service and CLI tests. Existing replay entries are kept.

use std::path::Path;

use pcg_core::fixtures::{table_graph, TABLE_PCG};
use pcg_core::{print_pcg, Graph, Registry, Scalar};
use pcg_extract::{extract, synth, ExtractionConfig};
use pcg_llm::*;

const OFFICE_CHAIR: &str = "\
Here is an office chair on five-star style casters.

```pcg
input seat_height: float = 0.48 range 0.35..0.65
input seat_width: float = 0.5 range 0.4..0.7
input has_arms: bool = true
seat = cube(size=(seat_width, 0.48, 0.08))
seat_pos = combine_xyz(z=seat_height)
seat_placed = translate(geometry=seat, t=seat_pos)
back = cube(size=(seat_width, 0.05, 0.55))
back_z = add(a=seat_height, b=0.32)
back_pos = combine_xyz(y=-0.22, z=back_z)
back_placed = translate(geometry=back, t=back_pos)
post_len = subtract(a=seat_height, b=0.1)
post = cylinder(radius=0.025, depth=post_len)
half = divide(a=post_len, b=2.0)
post_z = add(a=half, b=0.1)
post_pos = combine_xyz(z=post_z)
post_placed = translate(geometry=post, t=post_pos)
spoke = cube(size=(0.6, 0.05, 0.04))
spoke_turned = rotate(geometry=spoke, r=(0, 0, 1.5708))
cross = join(spoke, spoke_turned)
base = transform(geometry=cross, translation=(0, 0, 0.08), rotation=(0, 0, 0.7854))
corners = rectangle(width=0.42, height=0.42)
wheel = sphere(radius=0.04, rings=8, segments=12)
wheels = instance_on_points(points=corners, instance=wheel)
wheels_placed = translate(geometry=wheels, t=(0, 0, 0.04))
arm = cube(size=(0.05, 0.4, 0.04))
arm_z = add(a=seat_height, b=0.2)
left_pos = combine_xyz(x=-0.27, z=arm_z)
right_pos = combine_xyz(x=0.27, z=arm_z)
left_arm = translate(geometry=arm, t=left_pos)
right_arm = translate(geometry=arm, t=right_pos)
arms = join(left_arm, right_arm)
maybe_arms = switch(flag=has_arms, on_true=arms)
office_chair = join(seat_placed, back_placed, post_placed, base, wheels_placed, maybe_arms)
output = office_chair
```

Toggle `has_arms` to remove the armrests.
";

fn with_default(graph: &Graph, name: &str, value: Scalar) -> Graph {
    let mut g = graph.clone();
    g.params
        .iter_mut()
        .find(|p| p.name == name)
        .expect("param exists")
        .default = value;
    g
}

fn fenced_reply(lead: &str, graph: &Graph) -> String {
    format!("{lead}\n\n```pcg\n{}```\n", print_pcg(graph))
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let chair = extract(&synth::chair(), &ExtractionConfig::default())
        .expect("chair extracts")
        .graph;

    let mut corpus = synthetic_corpus(120, 2024);
    corpus.push(InstructionGraphPair {
        id: "table-000".into(),
        instruction: "A table with four round legs and a rounded rectangular top".into(),
        detail_level: DetailLevel::Medium,
        pcg: TABLE_PCG.into(),
    });
    corpus.push(InstructionGraphPair {
        id: "chair-000".into(),
        instruction: "A chair with four legs, a seat, a back and two armrests".into(),
        detail_level: DetailLevel::Medium,
        pcg: print_pcg(&chair),
    });
    std::fs::write(root.join("corpus.jsonl"), to_jsonl(&corpus)).unwrap();

    let client = LlmClient::new(LlmEndpointConfig::default(), LlmMode::Replay, root.join("llm")).unwrap();
    let retriever = Retriever::new(corpus).unwrap();
    let primer = grammar_primer(Registry::standard());
    let gen = build_generation_prompt(
        "Generate an office chair with wheels",
        &retriever.retrieve("Generate an office chair with wheels", DEFAULT_K),
        &primer,
    );
    let entries = [
        (gen.text, OFFICE_CHAIR.to_string()),
        (
            build_edit_prompt(&chair, "Remove the arms").unwrap().text,
            fenced_reply(
                "I switched the armrest group off.",
                &with_default(&chair, "has_armrest", Scalar::Bool(false)),
            ),
        ),
        (
            build_edit_prompt(&table_graph(), "make the legs taller").unwrap().text,
            fenced_reply(
                "The legs are now 3 units tall.",
                &with_default(&table_graph(), "leg_height", Scalar::Float(3.0)),
            ),
        ),
        (
            build_edit_prompt(&chair, "Make it glow").unwrap().text,
            "Sorry, PCG has no material or emission nodes, so I can't make it glow.\n".to_string(),
        ),
    ];
    for (prompt, reply) in entries {
        let path = client.record(&prompt, &reply).unwrap();
        println!("{}", path.display());
    }
}
