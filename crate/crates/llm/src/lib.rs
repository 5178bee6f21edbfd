//! Language-model side of PCG: example retrieval, prompts, model calls and
//! evaluation metrics.
//!
//! ```
//! use pcg_llm::{Retriever, synthetic_corpus};
//! let r = Retriever::new(synthetic_corpus(30, 1)).unwrap();
//! let hits = r.retrieve("a wooden chair", 5);
//! assert_eq!(hits.len(), 5);
//! ```

pub mod bm25;
mod client;
mod corpus;
mod generate;
mod metrics;
mod prompt;
mod response;

pub use bm25::{Bm25Index, IndexError};
pub use client::{prompt_key, status_is_retryable, LlmClient, LlmEndpointConfig, LlmError, LlmMode};
pub use corpus::{
    load_corpus, synthetic_corpus, to_jsonl, CorpusError, DetailLevel, InstructionGraphPair, Retriever,
};
pub use generate::{edit, generate, GenerateError, Generation, DEFAULT_K};
pub use metrics::{
    chamfer_distance, compile_rate, compile_response, export_ulip_pairs, sample_surface,
    similarity_measure, unit_normalize, CompileError, MetricsRecord, SimilarityError, SAMPLE_COUNT,
    SAMPLE_SEED,
};
pub use prompt::{build_edit_prompt, build_generation_prompt, grammar_primer, Prompt, PromptError};
pub use response::{extract_graph, ResponseError};

/// Replay store shipped with the crate's fixtures.
pub const BUNDLED_REPLAY_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/llm");

/// Example corpus shipped with the crate.
pub fn bundled_corpus() -> Vec<InstructionGraphPair> {
    load_corpus(include_str!("../fixtures/corpus.jsonl")).expect("bundled corpus is valid")
}
