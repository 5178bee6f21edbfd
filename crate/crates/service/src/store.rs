//! JSON Lines event log, one file per session.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::session::{HistoryEntry, Session};

#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
}

/// Sessions found on disk and the files that could not be used.
#[derive(Debug, Default)]
pub struct Loaded {
    pub sessions: Vec<Session>,
    pub skipped: Vec<(PathBuf, String)>,
}

fn line(entry: &HistoryEntry) -> String {
    let mut s = serde_json::to_string(entry).expect("history entry serializes");
    s.push('\n');
    s
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Store> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Store { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    /// Writes a new session's full history.
    pub fn create(&self, session: &Session) -> io::Result<()> {
        let body: String = session.history().iter().map(line).collect();
        let path = self.path(session.id());
        let tmp = self.dir.join(format!(".{}.tmp", session.id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(body.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    }

    pub fn append(&self, id: &str, entry: &HistoryEntry) -> io::Result<()> {
        let mut f = OpenOptions::new().append(true).open(self.path(id))?;
        f.write_all(line(entry).as_bytes())
    }

    /// Replays every `*.jsonl` log. Unreadable or inconsistent logs are
    /// skipped with a warning.
    pub fn load_all(&self) -> io::Result<Loaded> {
        let mut files: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut out = Loaded::default();
        for path in files {
            match load_one(&path) {
                Ok(s) => out.sessions.push(s),
                Err(why) => {
                    log::warn!("skipping session log {}: {why}", path.display());
                    out.skipped.push((path, why));
                }
            }
        }
        Ok(out)
    }
}

fn load_one(path: &Path) -> Result<Session, String> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or("no file name")?;
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    if !text.is_empty() && !text.ends_with('\n') {
        return Err("last record is truncated".into());
    }
    let history = text
        .lines()
        .enumerate()
        .map(|(i, l)| serde_json::from_str::<HistoryEntry>(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Session::replay(id, history).map_err(|e| e.to_string())
}
