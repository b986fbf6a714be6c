//! Session, turn and profile persistence.
//!
//! [`FileStore`] keeps one append-only JSON-lines log per session plus a
//! profile log. A record is written with a single `write` call, so a killed
//! process leaves at most one partial line at the end of a file; it is cut
//! off the next time the store is opened.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::dialog::{SessionState, TurnRecord};
use crate::text::UserProfile;
use crate::{Error, Result};

pub trait Store: Send + Sync {
    fn put_turn(&self, session_id: &str, turn: &TurnRecord) -> Result<()>;
    /// Turns of a session in insertion order; empty for unknown sessions.
    fn get_turns(&self, session_id: &str) -> Result<Vec<TurnRecord>>;
    fn put_profile(&self, profile: &UserProfile) -> Result<()>;
    fn get_profile(&self, device_id: &str) -> Result<Option<UserProfile>>;
    /// Latest snapshot wins. `history` is not stored.
    fn put_session(&self, state: &SessionState) -> Result<()>;
    fn get_session(&self, session_id: &str) -> Result<Option<SessionState>>;

    /// Persists a completed turn and the state after it. Stores that can
    /// should write both in one record.
    fn commit_turn(&self, state: &SessionState, turn: &TurnRecord) -> Result<()> {
        self.put_turn(&state.session_id, turn)?;
        self.put_session(state)
    }

    fn flush(&self) -> Result<()> {
        Ok(())
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Default)]
struct SessionData {
    turns: Vec<TurnRecord>,
    state: Option<SessionState>,
}

/// In-process store for tests and ephemeral runs.
#[derive(Default)]
pub struct MemoryStore {
    sessions: Mutex<HashMap<String, SessionData>>,
    profiles: Mutex<HashMap<String, UserProfile>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Store for MemoryStore {
    fn put_turn(&self, session_id: &str, turn: &TurnRecord) -> Result<()> {
        lock(&self.sessions).entry(session_id.to_string()).or_default().turns.push(turn.clone());
        Ok(())
    }

    fn get_turns(&self, session_id: &str) -> Result<Vec<TurnRecord>> {
        Ok(lock(&self.sessions).get(session_id).map(|d| d.turns.clone()).unwrap_or_default())
    }

    fn put_profile(&self, profile: &UserProfile) -> Result<()> {
        lock(&self.profiles).insert(profile.device_id.clone(), profile.clone());
        Ok(())
    }

    fn get_profile(&self, device_id: &str) -> Result<Option<UserProfile>> {
        Ok(lock(&self.profiles).get(device_id).cloned())
    }

    fn put_session(&self, state: &SessionState) -> Result<()> {
        let mut snapshot = state.clone();
        snapshot.history.clear();
        lock(&self.sessions).entry(state.session_id.clone()).or_default().state = Some(snapshot);
        Ok(())
    }

    fn get_session(&self, session_id: &str) -> Result<Option<SessionState>> {
        Ok(lock(&self.sessions).get(session_id).and_then(|d| d.state.clone()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Record {
    Turn { turn: TurnRecord },
    State { state: Box<SessionState> },
    Commit { turn: TurnRecord, state: Box<SessionState> },
}

struct SessionLog {
    file: File,
    path: PathBuf,
    data: SessionData,
}

/// Durable store: `sessions/<id>.jsonl` and `profiles.jsonl` under a
/// directory. Everything is read into memory on open; writes append.
pub struct FileStore {
    dir: PathBuf,
    fsync: bool,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionLog>>>>,
    profiles: Mutex<(File, HashMap<String, UserProfile>)>,
}

/// Reads complete lines from `path`, truncating a torn or unparsable final
/// line. A bad line in the middle is an error.
fn recover<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(File, Vec<T>)> {
    let mut file = OpenOptions::new()
        .read(true)
        .append(true)
        .create(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut good_len = 0usize;
    let mut pos = 0usize;
    let mut line_no = 0usize;
    while pos < bytes.len() {
        line_no += 1;
        let end = bytes[pos..].iter().position(|&b| b == b'\n').map(|i| pos + i);
        let Some(end) = end else { break };
        let line = &bytes[pos..end];
        match serde_json::from_slice::<T>(line) {
            Ok(v) => out.push(v),
            Err(_) if line.iter().all(u8::is_ascii_whitespace) => {}
            Err(e) if end + 1 == bytes.len() => {
                log::warn!("{}:{line_no}: dropping corrupt trailing record: {e}", path.display());
                break;
            }
            Err(e) => return Err(Error::parse(path.display().to_string(), line_no, e.to_string())),
        }
        pos = end + 1;
        good_len = pos;
    }
    if good_len < bytes.len() {
        log::warn!("{}: truncating {} bytes of incomplete data", path.display(), bytes.len() - good_len);
        file.set_len(good_len as u64).map_err(|e| Error::io(path, e))?;
        file.seek(SeekFrom::End(0)).map_err(|e| Error::io(path, e))?;
    }
    Ok((file, out))
}

impl FileStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let sessions_dir = dir.join("sessions");
        std::fs::create_dir_all(&sessions_dir).map_err(|e| Error::io(&sessions_dir, e))?;
        let probe = dir.join(".write-test");
        std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
        let _ = std::fs::remove_file(&probe);

        let (pfile, records) = recover::<UserProfile>(&dir.join("profiles.jsonl"))?;
        let profiles = records.into_iter().map(|p| (p.device_id.clone(), p)).collect();

        let mut sessions = HashMap::new();
        for entry in std::fs::read_dir(&sessions_dir).map_err(|e| Error::io(&sessions_dir, e))? {
            let path = entry.map_err(|e| Error::io(&sessions_dir, e))?.path();
            if path.extension().is_none_or(|x| x != "jsonl") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            let (file, records) = recover::<Record>(&path)?;
            let mut data = SessionData::default();
            for r in records {
                match r {
                    Record::Turn { turn } => data.turns.push(turn),
                    Record::State { state } => data.state = Some(*state),
                    Record::Commit { turn, state } => {
                        data.turns.push(turn);
                        data.state = Some(*state);
                    }
                }
            }
            sessions.insert(id, Arc::new(Mutex::new(SessionLog { file, path, data })));
        }
        Ok(FileStore { dir, fsync: false, sessions: Mutex::new(sessions), profiles: Mutex::new((pfile, profiles)) })
    }

    /// Also fsync after each record (survives power loss, not only a crash).
    pub fn with_fsync(mut self, fsync: bool) -> Self {
        self.fsync = fsync;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<SessionLog>>> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(Error::Config(format!("session id `{id}` is not a safe file name")));
        }
        let mut map = lock(&self.sessions);
        if let Some(s) = map.get(id) {
            return Ok(Arc::clone(s));
        }
        let path = self.dir.join("sessions").join(format!("{id}.jsonl"));
        let file = OpenOptions::new().append(true).create(true).open(&path).map_err(|e| Error::io(&path, e))?;
        let log = Arc::new(Mutex::new(SessionLog { file, path, data: SessionData::default() }));
        map.insert(id.to_string(), Arc::clone(&log));
        Ok(log)
    }

    fn existing(&self, id: &str) -> Option<Arc<Mutex<SessionLog>>> {
        lock(&self.sessions).get(id).cloned()
    }

    fn append(file: &mut File, path: &Path, value: &impl Serialize, fsync: bool) -> Result<()> {
        let mut line = serde_json::to_vec(value)?;
        line.push(b'\n');
        file.write_all(&line).map_err(|e| Error::io(path, e))?;
        if fsync {
            file.sync_data().map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    fn write_record(&self, id: &str, record: Record) -> Result<()> {
        let log = self.session(id)?;
        let mut log = lock(&log);
        let SessionLog { file, path, .. } = &mut *log;
        Self::append(file, path, &record, self.fsync)?;
        match record {
            Record::Turn { turn } => log.data.turns.push(turn),
            Record::State { state } => log.data.state = Some(*state),
            Record::Commit { turn, state } => {
                log.data.turns.push(turn);
                log.data.state = Some(*state);
            }
        }
        Ok(())
    }
}

fn snapshot(state: &SessionState) -> Box<SessionState> {
    let mut s = Box::new(state.clone());
    s.history.clear();
    s
}

impl Store for FileStore {
    fn put_turn(&self, session_id: &str, turn: &TurnRecord) -> Result<()> {
        self.write_record(session_id, Record::Turn { turn: turn.clone() })
    }

    fn get_turns(&self, session_id: &str) -> Result<Vec<TurnRecord>> {
        Ok(self.existing(session_id).map(|l| lock(&l).data.turns.clone()).unwrap_or_default())
    }

    fn put_profile(&self, profile: &UserProfile) -> Result<()> {
        let mut guard = lock(&self.profiles);
        let (file, map) = &mut *guard;
        Self::append(file, &self.dir.join("profiles.jsonl"), profile, self.fsync)?;
        map.insert(profile.device_id.clone(), profile.clone());
        Ok(())
    }

    fn get_profile(&self, device_id: &str) -> Result<Option<UserProfile>> {
        Ok(lock(&self.profiles).1.get(device_id).cloned())
    }

    fn put_session(&self, state: &SessionState) -> Result<()> {
        self.write_record(&state.session_id, Record::State { state: snapshot(state) })
    }

    fn get_session(&self, session_id: &str) -> Result<Option<SessionState>> {
        Ok(self.existing(session_id).and_then(|l| lock(&l).data.state.clone()))
    }

    fn commit_turn(&self, state: &SessionState, turn: &TurnRecord) -> Result<()> {
        self.write_record(&state.session_id, Record::Commit { turn: turn.clone(), state: snapshot(state) })
    }

    fn flush(&self) -> Result<()> {
        let logs: Vec<_> = lock(&self.sessions).values().cloned().collect();
        for l in logs {
            let l = lock(&l);
            l.file.sync_data().map_err(|e| Error::io(&l.path, e))?;
        }
        let p = lock(&self.profiles);
        p.0.sync_data().map_err(|e| Error::io(self.dir.join("profiles.jsonl"), e))
    }
}

/// The default durable store rooted at `dir`.
pub fn store_default(dir: impl Into<PathBuf>) -> Result<Arc<dyn Store>> {
    Ok(Arc::new(FileStore::open(dir)?))
}

#[cfg(test)]
mod tests {
    use chrono::Utc;

    use super::*;
    use crate::text::UtteranceFeatures;

    fn turn(i: u64) -> TurnRecord {
        TurnRecord {
            turn_index: i,
            user_text: format!("turn {i}"),
            features: UtteranceFeatures::default(),
            entities: vec![],
            chosen_generator: "chitchat".into(),
            response_text: "ok".into(),
            latency_ms: 1.0,
        }
    }

    fn state(id: &str) -> SessionState {
        SessionState::new(id, UserProfile::new("dev"), 7, Utc::now())
    }

    fn exercise(store: &dyn Store) {
        assert_eq!(store.get_profile("nobody").unwrap(), None);
        let mut p = UserProfile::new("dev");
        store.put_profile(&p).unwrap();
        p.name = Some("alice".into());
        store.put_profile(&p).unwrap();
        assert_eq!(store.get_profile("dev").unwrap().unwrap().name.as_deref(), Some("alice"));

        let mut s = state("s1");
        s.history.push(turn(0));
        store.commit_turn(&s, &turn(0)).unwrap();
        store.put_turn("s1", &turn(1)).unwrap();
        s.c = 3;
        store.put_session(&s).unwrap();
        let back = store.get_session("s1").unwrap().unwrap();
        assert_eq!(back.c, 3);
        assert!(back.history.is_empty());
        let idx: Vec<u64> = store.get_turns("s1").unwrap().iter().map(|t| t.turn_index).collect();
        assert_eq!(idx, [0, 1]);
        assert!(store.get_turns("other").unwrap().is_empty());
        assert!(store.get_session("other").unwrap().is_none());
    }

    #[test]
    fn memory_store_contract() {
        exercise(&MemoryStore::new());
    }

    #[test]
    fn file_store_contract_and_restart() {
        let dir = tempfile::tempdir().unwrap();
        exercise(&FileStore::open(dir.path()).unwrap());
        let reopened = FileStore::open(dir.path()).unwrap();
        assert_eq!(reopened.get_turns("s1").unwrap().len(), 2);
        assert_eq!(reopened.get_session("s1").unwrap().unwrap().c, 3);
        assert_eq!(reopened.get_profile("dev").unwrap().unwrap().name.as_deref(), Some("alice"));
    }

    #[test]
    fn torn_tail_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = FileStore::open(dir.path()).unwrap();
            store.commit_turn(&state("s2"), &turn(0)).unwrap();
        }
        let path = dir.path().join("sessions/s2.jsonl");
        let good = std::fs::metadata(&path).unwrap().len();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"type":"turn","turn":{"turn_ind"#).unwrap();
        drop(f);
        let store = FileStore::open(dir.path()).unwrap();
        assert_eq!(store.get_turns("s2").unwrap().len(), 1);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), good);
        store.put_turn("s2", &turn(1)).unwrap();
        drop(store);
        assert_eq!(FileStore::open(dir.path()).unwrap().get_turns("s2").unwrap().len(), 2);
    }

    #[test]
    fn rejects_path_like_ids_and_unwritable_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        assert!(store.put_turn("../x", &turn(0)).is_err());
        let file = dir.path().join("plain-file");
        std::fs::write(&file, b"x").unwrap();
        assert!(FileStore::open(&file).is_err());
    }
}
