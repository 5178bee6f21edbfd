//! Registry of live sessions with per-session locking and mesh broadcast.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use pcg_core::{print_pcg, Mesh, Registry, Scalar};
use pcg_llm::{
    bundled_corpus, edit, generate, grammar_primer, GenerateError, LlmClient, LlmEndpointConfig, LlmMode,
    ResponseError, Retriever, BUNDLED_REPLAY_DIR, DEFAULT_K,
};
use tokio::sync::watch;

use crate::error::ServiceError;
use crate::session::{ParamState, Session, SessionState};
use crate::store::Store;

/// Model access for instruction-driven creation and edits.
#[derive(Debug)]
pub struct LlmBackend {
    pub client: LlmClient,
    pub retriever: Retriever,
    pub primer: String,
    pub k: usize,
}

impl LlmBackend {
    pub fn new(client: LlmClient, retriever: Retriever) -> LlmBackend {
        LlmBackend {
            client,
            retriever,
            primer: grammar_primer(Registry::standard()),
            k: DEFAULT_K,
        }
    }

    /// Bundled corpus and recorded responses; no network.
    pub fn bundled_replay() -> LlmBackend {
        let client = LlmClient::new(LlmEndpointConfig::default(), LlmMode::Replay, BUNDLED_REPLAY_DIR)
            .expect("replay client needs no network setup");
        LlmBackend::new(client, Retriever::new(bundled_corpus()).expect("bundled corpus is not empty"))
    }
}

/// Published after every successful mutation.
#[derive(Debug, Clone)]
pub struct Update {
    pub revision: u64,
    pub params: Vec<ParamState>,
    pub mesh: Arc<Mesh>,
}

impl Update {
    fn of(s: &Session) -> Update {
        Update {
            revision: s.revision(),
            params: s.params(),
            mesh: s.mesh().clone(),
        }
    }
}

struct Entry {
    session: Mutex<Session>,
    tx: watch::Sender<Arc<Update>>,
}

impl Entry {
    fn new(session: Session) -> Arc<Entry> {
        let (tx, _) = watch::channel(Arc::new(Update::of(&session)));
        Arc::new(Entry {
            session: Mutex::new(session),
            tx,
        })
    }

    fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|e| e.into_inner())
    }
}

fn generation_error(e: GenerateError) -> ServiceError {
    match e {
        GenerateError::Prompt(p) => ServiceError::BadRequest(p.to_string()),
        GenerateError::Llm(l) => ServiceError::Llm(l),
        GenerateError::Response { error, raw } => ServiceError::Generation {
            message: error.to_string(),
            diagnostics: match error {
                ResponseError::Invalid(d) => d,
                ResponseError::NoGraphFound => Vec::new(),
            },
            raw_response: raw,
        },
    }
}

/// All sessions of one service instance. Mutations on one session are
/// serialized; different sessions proceed independently. Methods block and
/// should run off the async executor.
pub struct SessionManager {
    sessions: RwLock<HashMap<String, Arc<Entry>>>,
    store: Option<Store>,
    llm: Option<LlmBackend>,
}

impl SessionManager {
    pub fn new(store: Option<Store>, llm: Option<LlmBackend>) -> SessionManager {
        SessionManager {
            sessions: RwLock::new(HashMap::new()),
            store,
            llm,
        }
    }

    /// Manager holding every session persisted in `store`.
    pub fn load(store: Store, llm: Option<LlmBackend>) -> Result<SessionManager, ServiceError> {
        let loaded = store.load_all()?;
        let m = SessionManager::new(Some(store), llm);
        {
            let mut map = m.sessions.write().unwrap_or_else(|e| e.into_inner());
            for s in loaded.sessions {
                map.insert(s.id().to_string(), Entry::new(s));
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn insert(&self, session: Session) -> Result<SessionState, ServiceError> {
        if let Some(store) = &self.store {
            store.create(&session)?;
        }
        let state = session.state();
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(session.id().to_string(), Entry::new(session));
        Ok(state)
    }

    pub fn create_from_pcg(&self, pcg: &str) -> Result<SessionState, ServiceError> {
        self.insert(Session::create(uuid::Uuid::new_v4().simple().to_string(), pcg, None)?)
    }

    /// Generates a graph for `instruction` and starts a session on it.
    pub fn create_from_instruction(&self, instruction: &str) -> Result<SessionState, ServiceError> {
        let llm = self.llm.as_ref().ok_or(ServiceError::NoModel)?;
        if instruction.trim().is_empty() {
            return Err(ServiceError::BadRequest("instruction is empty".into()));
        }
        let g = generate(&llm.client, &llm.retriever, &llm.primer, instruction, llm.k).map_err(generation_error)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::create(id, &print_pcg(&g.graph), Some(instruction.to_string()))
            .map_err(|e| e.with_raw(&g.response))?;
        self.insert(session)
    }

    pub fn state(&self, id: &str) -> Result<SessionState, ServiceError> {
        Ok(self.entry(id)?.lock().state())
    }

    pub fn mesh(&self, id: &str) -> Result<Arc<Mesh>, ServiceError> {
        Ok(self.entry(id)?.lock().mesh().clone())
    }

    pub fn subscribe(&self, id: &str) -> Result<watch::Receiver<Arc<Update>>, ServiceError> {
        Ok(self.entry(id)?.tx.subscribe())
    }

    /// Runs `f` on the session; keeps the result only if it is persisted.
    fn mutate(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<u64, ServiceError>,
    ) -> Result<SessionState, ServiceError> {
        let entry = self.entry(id)?;
        let mut s = entry.lock();
        let before = s.eval().clone();
        f(&mut s)?;
        if let Some(store) = &self.store {
            let last = s.history().last().expect("history is never empty").clone();
            if let Err(e) = store.append(id, &last) {
                s.undo(before);
                return Err(e.into());
            }
        }
        entry.tx.send_replace(Arc::new(Update::of(&s)));
        Ok(s.state())
    }

    pub fn apply_param(&self, id: &str, name: &str, value: Scalar) -> Result<SessionState, ServiceError> {
        self.mutate(id, |s| s.apply_param(name, value))
    }

    /// Asks the model to edit the session's graph and swaps in the result.
    pub fn apply_text_edit(&self, id: &str, instruction: &str) -> Result<SessionState, ServiceError> {
        let llm = self.llm.as_ref().ok_or(ServiceError::NoModel)?;
        self.mutate(id, |s| {
            let g = edit(&llm.client, s.graph(), instruction).map_err(generation_error)?;
            s.apply_graph(g.graph, instruction).map_err(|e| e.with_raw(&g.response))
        })
    }
}
