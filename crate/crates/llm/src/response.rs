//! Locating PCG text inside free-form model responses.

use pcg_core::{parse_pcg, Diagnostic, Graph};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResponseError {
    #[error("response contains no PCG block")]
    NoGraphFound,
    #[error("PCG block has {} diagnostic(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
}

/// Text of the first fenced block, preferring blocks tagged `pcg`.
fn fenced_block(response: &str) -> Option<String> {
    let mut blocks: Vec<(String, String)> = Vec::new();
    let mut current: Option<(String, Vec<&str>)> = None;
    for line in response.lines() {
        let t = line.trim_start();
        if let Some(rest) = t.strip_prefix("```") {
            match current.take() {
                Some((tag, body)) => blocks.push((tag, body.join("\n"))),
                None => current = Some((rest.trim().to_ascii_lowercase(), Vec::new())),
            }
        } else if let Some((_, body)) = current.as_mut() {
            body.push(line);
        }
    }
    // an unterminated fence still counts
    if let Some((tag, body)) = current {
        blocks.push((tag, body.join("\n")));
    }
    blocks
        .iter()
        .find(|(tag, _)| tag == "pcg")
        .or_else(|| blocks.iter().find(|(_, body)| body.lines().any(is_statement)))
        .map(|(_, body)| body.clone())
}

fn is_statement(line: &str) -> bool {
    let t = line.trim();
    if let Some(rest) = t.strip_prefix("input ") {
        return rest.contains(':');
    }
    if let Some(rest) = t.strip_prefix("output") {
        return rest.trim_start().starts_with('=');
    }
    match t.split_once('=') {
        Some((lhs, rhs)) => {
            pcg_core::lang::is_identifier(lhs.trim()) && rhs.contains('(') && !rhs.starts_with('=')
        }
        None => false,
    }
}

/// Longest run of statement-looking lines; blank and comment lines may sit
/// inside a run.
fn statement_run(response: &str) -> Option<String> {
    let lines: Vec<&str> = response.lines().collect();
    let mut best: Option<(usize, usize, usize)> = None;
    let mut i = 0;
    while i < lines.len() {
        if !is_statement(lines[i]) {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        let mut count = 1;
        let mut j = i + 1;
        while j < lines.len() {
            let t = lines[j].trim();
            if is_statement(lines[j]) {
                count += 1;
                end = j + 1;
            } else if !(t.is_empty() || t.starts_with('#')) {
                break;
            }
            j += 1;
        }
        if best.is_none_or(|(_, _, c)| count > c) {
            best = Some((start, end, count));
        }
        i = j.max(i + 1);
    }
    best.map(|(s, e, _)| lines[s..e].join("\n"))
}

/// Finds the graph in a model response and parses it.
pub fn extract_graph(response: &str) -> Result<Graph, ResponseError> {
    let text = fenced_block(response)
        .filter(|b| !b.trim().is_empty())
        .or_else(|| statement_run(response))
        .ok_or(ResponseError::NoGraphFound)?;
    parse_pcg(&text).map_err(ResponseError::Invalid)
}
