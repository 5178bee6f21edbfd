//! Generation and text-edit round trips through the model.

use std::time::{Duration, Instant};

use pcg_core::Graph;
use thiserror::Error;

use crate::client::{LlmClient, LlmError};
use crate::corpus::Retriever;
use crate::prompt::{build_edit_prompt, build_generation_prompt, Prompt, PromptError};
use crate::response::{extract_graph, ResponseError};

pub const DEFAULT_K: usize = 20;

#[derive(Debug, Clone)]
pub struct Generation {
    pub prompt: Prompt,
    pub response: String,
    pub graph: Graph,
    pub latency: Duration,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    /// The model answered but no usable graph came back.
    #[error("{error}")]
    Response { error: ResponseError, raw: String },
}

fn complete(client: &LlmClient, prompt: Prompt) -> Result<Generation, GenerateError> {
    let started = Instant::now();
    let response = client.call(&prompt.text)?;
    let latency = started.elapsed();
    match extract_graph(&response) {
        Ok(graph) => Ok(Generation {
            prompt,
            response,
            graph,
            latency,
        }),
        Err(error) => Err(GenerateError::Response { error, raw: response }),
    }
}

/// Retrieves `k` examples, prompts the model and parses its graph.
pub fn generate(
    client: &LlmClient,
    retriever: &Retriever,
    primer: &str,
    instruction: &str,
    k: usize,
) -> Result<Generation, GenerateError> {
    let examples = retriever.retrieve(instruction, k);
    complete(client, build_generation_prompt(instruction, &examples, primer))
}

/// Asks the model for a revised version of `current`.
pub fn edit(client: &LlmClient, current: &Graph, instruction: &str) -> Result<Generation, GenerateError> {
    complete(client, build_edit_prompt(current, instruction)?)
}
