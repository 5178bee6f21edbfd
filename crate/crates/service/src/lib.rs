//! Editing service: sessions that hold a graph and its evaluator, apply
//! parameter and text edits, persist their history and stream meshes.

mod error;
mod http;
mod manager;
mod session;
mod store;

pub use error::ServiceError;
pub use http::{router, serve, ControlMessage, CreateRequest, EditRequest, ParamRequest};
pub use manager::{LlmBackend, SessionManager, Update};
pub use session::{carry_over, now_ms, Event, HistoryEntry, ParamState, Session, SessionState};
pub use store::{Loaded, Store};
