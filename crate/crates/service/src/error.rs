use std::io;

use pcg_core::{Diagnostic, EvalError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("request needs exactly one of `instruction` or `pcg`")]
    BadRequest(String),
    #[error("graph is invalid")]
    Invalid {
        diagnostics: Vec<Diagnostic>,
        raw_response: Option<String>,
    },
    #[error("{0}")]
    Eval(#[from] EvalError),
    /// The model answered without a usable graph.
    #[error("{message}")]
    Generation {
        message: String,
        diagnostics: Vec<Diagnostic>,
        raw_response: String,
    },
    #[error("language model call failed: {0}")]
    Llm(#[from] pcg_llm::LlmError),
    #[error("no language model is configured")]
    NoModel,
    #[error("corrupt session history: {0}")]
    Corrupt(String),
    #[error("session store: {0}")]
    Io(#[from] io::Error),
}

impl ServiceError {
    /// Attaches the model output that led to this error.
    pub fn with_raw(self, raw: &str) -> ServiceError {
        match self {
            ServiceError::Invalid { diagnostics, .. } => ServiceError::Invalid {
                diagnostics,
                raw_response: Some(raw.to_string()),
            },
            ServiceError::Eval(e) => ServiceError::Generation {
                message: e.to_string(),
                diagnostics: Vec::new(),
                raw_response: raw.to_string(),
            },
            other => other,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ServiceError::Invalid { diagnostics, .. } | ServiceError::Generation { diagnostics, .. } => diagnostics,
            ServiceError::Eval(EvalError::InvalidGraph(d)) => d,
            _ => &[],
        }
    }

    pub fn raw_response(&self) -> Option<&str> {
        match self {
            ServiceError::Invalid { raw_response, .. } => raw_response.as_deref(),
            ServiceError::Generation { raw_response, .. } => Some(raw_response),
            _ => None,
        }
    }
}
