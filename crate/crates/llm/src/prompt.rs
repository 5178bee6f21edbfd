//! Prompt templates for generation and edits.

use std::fmt::Write;

use pcg_core::lang::registry::PortDefault;
use pcg_core::{count_tokens, print_pcg, Graph, Registry};
use thiserror::Error;

use crate::corpus::InstructionGraphPair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("edit instruction is empty")]
    EmptyInstruction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prompt {
    pub text: String,
    /// Sum of the token counts of the template pieces.
    pub token_estimate: usize,
}

fn default_text(d: PortDefault) -> String {
    match d {
        PortDefault::Float(x) => pcg_core::lang::format_float(x),
        PortDefault::Int(i) => i.to_string(),
        PortDefault::Bool(b) => b.to_string(),
        PortDefault::Vec3(v) => format!(
            "({}, {}, {})",
            pcg_core::lang::format_float(v[0]),
            pcg_core::lang::format_float(v[1]),
            pcg_core::lang::format_float(v[2])
        ),
        PortDefault::EmptyGeometry => "empty".into(),
    }
}

/// Language summary and node catalog derived from `registry`.
pub fn grammar_primer(registry: &Registry) -> String {
    let mut s = String::from(
        "You write procedural 3D models in PCG. One statement per line:\n\
         input <name>: float|int|bool = <default> [range <lo>..<hi>]\n\
         <id> = <kind>(<port>=<expr>, ...)\n\
         output = <id>\n\
         Expressions are numbers, true/false, (x, y, z) vectors, parameter names or node ids.\n\
         Units are meters, angles are radians, z is up. Node kinds:\n",
    );
    for kind in registry.callable() {
        let ports: Vec<String> = kind
            .inputs
            .iter()
            .map(|p| {
                let ty = p.ty.describe();
                let dots = if p.variadic { "..." } else { "" };
                match p.default {
                    Some(d) => format!("{}{dots}: {ty} = {}", p.name, default_text(d)),
                    None => format!("{}{dots}: {ty}", p.name),
                }
            })
            .collect();
        let _ = writeln!(s, "- {}({}): {}", kind.name, ports.join(", "), kind.summary);
    }
    s
}

fn fenced(pcg: &str) -> String {
    format!("```pcg\n{}\n```\n", pcg.trim_end())
}

/// Primer, then one block per example, then the target instruction.
pub fn build_generation_prompt(instruction: &str, examples: &[&InstructionGraphPair], primer: &str) -> Prompt {
    let mut pieces: Vec<String> = vec![format!("{}\n", primer.trim_end())];
    for (i, ex) in examples.iter().enumerate() {
        pieces.push(format!(
            "### Example {}\nInstruction: {}\n{}\n",
            i + 1,
            ex.instruction.trim(),
            fenced(&ex.pcg)
        ));
    }
    pieces.push(format!(
        "### Task\nInstruction: {}\nAnswer with one ```pcg fenced block and nothing else.\n",
        instruction.trim()
    ));
    let token_estimate = pieces.iter().map(|p| count_tokens(p)).sum();
    Prompt {
        text: pieces.concat(),
        token_estimate,
    }
}

/// Current graph plus the edit request, asking for the full revised graph.
pub fn build_edit_prompt(current: &Graph, instruction: &str) -> Result<Prompt, PromptError> {
    if instruction.trim().is_empty() {
        return Err(PromptError::EmptyInstruction);
    }
    let pieces = [
        "Here is a procedural 3D model in PCG.\n".to_string(),
        fenced(&print_pcg(current)),
        format!(
            "\nEdit request: {}\nChange parameter defaults where that is enough; otherwise change nodes. \
             Return the complete revised graph in one ```pcg fenced block.\n",
            instruction.trim()
        ),
    ];
    Ok(Prompt {
        token_estimate: pieces.iter().map(|p| count_tokens(p)).sum(),
        text: pieces.concat(),
    })
}
