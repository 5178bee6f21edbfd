use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagCode {
    LexError,
    SyntaxError,
    UnknownNodeKind,
    DuplicateId,
    UnresolvedReference,
    CycleDetected,
    TypeMismatch,
    MissingOutput,
    DuplicateOutput,
    UnknownPort,
    MissingInput,
    InvalidParam,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::LexError => "lex-error",
            DiagCode::SyntaxError => "syntax-error",
            DiagCode::UnknownNodeKind => "unknown-node-kind",
            DiagCode::DuplicateId => "duplicate-id",
            DiagCode::UnresolvedReference => "unresolved-reference",
            DiagCode::CycleDetected => "cycle-detected",
            DiagCode::TypeMismatch => "type-mismatch",
            DiagCode::MissingOutput => "missing-output",
            DiagCode::DuplicateOutput => "duplicate-output",
            DiagCode::UnknownPort => "unknown-port",
            DiagCode::MissingInput => "missing-input",
            DiagCode::InvalidParam => "invalid-param",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based line in the source that produced the diagnostic.
    pub line: usize,
    pub code: DiagCode,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagCode, line: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line,
            code,
            message: message.into(),
        }
    }

    pub fn warning(code: DiagCode, line: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            line,
            code,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "line {}: {sev}[{}]: {}", self.line, self.code, self.message)
    }
}
