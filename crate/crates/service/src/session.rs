//! One editing session: evaluator state plus its event history.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use pcg_core::{list_params, parse_pcg, print_pcg, Bindings, EvalError, EvalSession, Graph, Mesh, Scalar, ValueType};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

/// Something that changed a session, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    /// First event. `instruction` is set when the graph came from the model.
    Create {
        pcg: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        instruction: Option<String>,
    },
    Param { name: String, value: Scalar },
    /// Graph replaced by a text edit; `pcg` is the graph that was accepted.
    TextEdit { instruction: String, pcg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Milliseconds since the Unix epoch.
    pub at_ms: u64,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamState {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ValueType,
    pub value: Scalar,
    pub default: Scalar,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
}

/// Consistent view of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub pcg: String,
    pub params: Vec<ParamState>,
    pub revision: u64,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    eval: EvalSession,
    history: Vec<HistoryEntry>,
    revision: u64,
    created_ms: u64,
    updated_ms: u64,
}

fn parse(text: &str) -> Result<Graph, ServiceError> {
    parse_pcg(text).map_err(|diagnostics| ServiceError::Invalid {
        diagnostics,
        raw_response: None,
    })
}

/// Bindings kept across a graph swap: a parameter keeps its current value
/// when the new graph declares it with the same type and default and the
/// value is still in range. Parameters the edit touched take the new default.
pub fn carry_over(old: &EvalSession, new: &Graph) -> Bindings {
    let current = old.bindings();
    let mut out = Bindings::new();
    for p in &new.params {
        let Some(prev) = old.graph().params.iter().find(|q| q.name == p.name) else {
            continue;
        };
        if prev.ty != p.ty || prev.default != p.default {
            continue;
        }
        let Some(&v) = current.get(&p.name) else { continue };
        let in_range = match (p.range, v.as_f64()) {
            (Some([lo, hi]), Some(x)) => x >= lo && x <= hi,
            _ => true,
        };
        if in_range && v != p.default {
            out.insert(p.name.clone(), v);
        }
    }
    out
}

impl Session {
    /// Starts a session from PCG text.
    pub fn create(id: String, pcg: &str, instruction: Option<String>) -> Result<Session, ServiceError> {
        let graph = parse(pcg)?;
        let eval = EvalSession::new(graph, &Bindings::new())?;
        let at_ms = now_ms();
        Ok(Session {
            id,
            history: vec![HistoryEntry {
                at_ms,
                event: Event::Create {
                    pcg: print_pcg(eval.graph()),
                    instruction,
                },
            }],
            eval,
            revision: 0,
            created_ms: at_ms,
            updated_ms: at_ms,
        })
    }

    /// Rebuilds a session by replaying its history.
    pub fn replay(id: String, history: Vec<HistoryEntry>) -> Result<Session, ServiceError> {
        let mut entries = history.into_iter();
        let first = entries
            .next()
            .ok_or_else(|| ServiceError::Corrupt("history is empty".into()))?;
        let Event::Create { pcg, instruction } = first.event else {
            return Err(ServiceError::Corrupt("history does not start with a create event".into()));
        };
        let mut s = Session::create(id, &pcg, instruction)?;
        s.history[0].at_ms = first.at_ms;
        s.created_ms = first.at_ms;
        s.updated_ms = first.at_ms;
        for entry in entries {
            match &entry.event {
                Event::Create { .. } => return Err(ServiceError::Corrupt("repeated create event".into())),
                Event::Param { name, value } => {
                    s.apply_param(name, *value)?;
                }
                Event::TextEdit { instruction, pcg } => {
                    s.apply_graph(parse(pcg)?, instruction)?;
                }
            }
            s.history.last_mut().expect("mutation appended").at_ms = entry.at_ms;
            s.updated_ms = entry.at_ms;
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn graph(&self) -> &Graph {
        self.eval.graph()
    }

    pub fn eval(&self) -> &EvalSession {
        &self.eval
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.eval.mesh()
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn created_ms(&self) -> u64 {
        self.created_ms
    }

    pub fn updated_ms(&self) -> u64 {
        self.updated_ms
    }

    pub fn params(&self) -> Vec<ParamState> {
        let values = self.eval.bindings();
        list_params(self.graph())
            .into_iter()
            .map(|p| ParamState {
                value: values.get(&p.name).copied().unwrap_or(p.default),
                name: p.name.clone(),
                ty: p.ty,
                default: p.default,
                range: p.range,
            })
            .collect()
    }

    pub fn state(&self) -> SessionState {
        SessionState {
            session_id: self.id.clone(),
            pcg: print_pcg(self.graph()),
            params: self.params(),
            revision: self.revision,
        }
    }

    fn push(&mut self, event: Event) -> u64 {
        let at_ms = now_ms();
        self.history.push(HistoryEntry { at_ms, event });
        self.updated_ms = at_ms;
        self.revision += 1;
        self.revision
    }

    /// Sets one parameter. On error nothing changes.
    pub fn apply_param(&mut self, name: &str, value: Scalar) -> Result<u64, ServiceError> {
        let mut delta = Bindings::new();
        delta.insert(name.to_string(), value);
        self.eval.reevaluate(&delta)?;
        let stored = self.eval.bindings()[name];
        Ok(self.push(Event::Param {
            name: name.to_string(),
            value: stored,
        }))
    }

    /// Swaps in a new graph, carrying bindings over. On error nothing
    /// changes.
    pub fn apply_graph(&mut self, graph: Graph, instruction: &str) -> Result<u64, ServiceError> {
        let bindings = carry_over(&self.eval, &graph);
        let eval = EvalSession::new(graph, &bindings).map_err(|e| match e {
            EvalError::InvalidGraph(diagnostics) => ServiceError::Invalid {
                diagnostics,
                raw_response: None,
            },
            other => ServiceError::Eval(other),
        })?;
        let pcg = print_pcg(eval.graph());
        self.eval = eval;
        Ok(self.push(Event::TextEdit {
            instruction: instruction.to_string(),
            pcg,
        }))
    }

    /// Drops the most recent mutation, restoring the evaluator saved before
    /// it.
    pub(crate) fn undo(&mut self, previous: EvalSession) {
        if self.history.len() > 1 {
            self.history.pop();
            self.revision -= 1;
            self.updated_ms = self.history.last().map_or(self.created_ms, |h| h.at_ms);
        }
        self.eval = previous;
    }
}
