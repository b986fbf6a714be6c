//! Engine configuration: a TOML file plus environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::pool::RankerWeights;
use crate::text::{LexiconPaths, Topic};
use crate::{Error, Exec, Result};

/// Overrides `paths.data_dir`.
pub const ENV_DATA_DIR: &str = "CONVO_DATA_DIR";
/// Overrides `server.port`.
pub const ENV_PORT: &str = "CONVO_PORT";

/// Where per-session random streams come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "SeedRepr", into = "SeedRepr")]
pub enum SeedMode {
    /// Every session uses this seed; runs replay exactly.
    Fixed(u64),
    #[default]
    System,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SeedRepr {
    Fixed(u64),
    Named(String),
}

impl TryFrom<SeedRepr> for SeedMode {
    type Error = String;

    fn try_from(r: SeedRepr) -> std::result::Result<Self, String> {
        match r {
            SeedRepr::Fixed(s) => Ok(SeedMode::Fixed(s)),
            SeedRepr::Named(s) if s == "system" => Ok(SeedMode::System),
            SeedRepr::Named(s) => Err(format!("seed must be an integer or \"system\", got `{s}`")),
        }
    }
}

impl From<SeedMode> for SeedRepr {
    fn from(m: SeedMode) -> Self {
        match m {
            SeedMode::Fixed(s) => SeedRepr::Fixed(s),
            SeedMode::System => SeedRepr::Named("system".into()),
        }
    }
}

/// What a turn does when another turn of the same session is in flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusyMode {
    #[default]
    Queue,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timeouts {
    pub knowledge_qa_ms: u64,
    pub chitchat_ms: u64,
    pub news_ms: u64,
}

impl Default for Timeouts {
    fn default() -> Self {
        Timeouts { knowledge_qa_ms: 250, chitchat_ms: 250, news_ms: 500 }
    }
}

/// Data file overrides. Unset entries use the shipped data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Sessions, profiles, the built entity index and the news store live here.
    pub data_dir: PathBuf,
    pub lexicons: LexiconPaths,
    pub safety_dir: Option<PathBuf>,
    pub ckt_dir: Option<PathBuf>,
    pub movies: Option<PathBuf>,
    /// Entity corpus TSV directory, used when no built index exists.
    pub entities_dir: Option<PathBuf>,
    pub priority_table: Option<PathBuf>,
    pub qa_table: Option<PathBuf>,
    pub jokes: Option<PathBuf>,
    pub news_categories: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            data_dir: PathBuf::from("convo-data"),
            lexicons: LexiconPaths::default(),
            safety_dir: None,
            ckt_dir: None,
            movies: None,
            entities_dir: None,
            priority_table: None,
            qa_table: None,
            jokes: None,
            news_categories: None,
        }
    }
}

impl Paths {
    pub fn sessions_dir(&self) -> PathBuf {
        self.data_dir.join("store")
    }

    pub fn index_file(&self) -> PathBuf {
        self.data_dir.join("entity-index.json")
    }

    pub fn news_file(&self) -> PathBuf {
        self.data_dir.join("news.jsonl")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { host: "127.0.0.1".into(), port: 8080 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Topic-driven turns before the loop moves to the next topic.
    pub turns_per_topic: u32,
    pub seed: SeedMode,
    pub exec: Exec,
    pub busy: BusyMode,
    pub session_idle_minutes: i64,
    /// Consecutive offensive turns before a joke is told.
    pub joke_threshold: u32,
    pub max_chars: usize,
    /// Entities kept per retrieval.
    pub retrieve_limit: usize,
    pub news_window_days: i64,
    /// Include debug info in every reply, not only when asked.
    pub debug: bool,
    pub topics: Vec<Topic>,
    pub weights: RankerWeights,
    pub timeouts: Timeouts,
    pub paths: Paths,
    pub server: ServerConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            turns_per_topic: 5,
            seed: SeedMode::System,
            exec: Exec::default(),
            busy: BusyMode::Queue,
            session_idle_minutes: 30,
            joke_threshold: 2,
            max_chars: crate::pool::DEFAULT_MAX_CHARS,
            retrieve_limit: 5,
            news_window_days: 30,
            debug: false,
            topics: Topic::LOOP.to_vec(),
            weights: RankerWeights::default(),
            timeouts: Timeouts::default(),
            paths: Paths::default(),
            server: ServerConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let cfg: EngineConfig = toml::from_str(text).map_err(|e| Error::Invalid {
            file: file.into(),
            what: "config".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        // relative data paths are relative to the config file
        if let Some(base) = path.parent() {
            cfg.paths.rebase(base);
        }
        Ok(cfg)
    }

    /// Applies `CONVO_DATA_DIR` and `CONVO_PORT` from `get`.
    pub fn apply_env_with(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(dir) = get(ENV_DATA_DIR).filter(|d| !d.is_empty()) {
            self.paths.data_dir = PathBuf::from(dir);
        }
        if let Some(port) = get(ENV_PORT).filter(|p| !p.is_empty()) {
            self.server.port = port
                .parse()
                .map_err(|_| Error::Config(format!("{ENV_PORT}=`{port}` is not a port number")))?;
        }
        Ok(())
    }

    pub fn apply_env(&mut self) -> Result<()> {
        self.apply_env_with(|k| std::env::var(k).ok())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.turns_per_topic == 0 {
            return bad("turns_per_topic must be positive".into());
        }
        if self.topics.is_empty() {
            return bad("topics must not be empty".into());
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(t) = self.topics.iter().find(|t| !seen.insert(**t)) {
            return bad(format!("topic {t} listed twice"));
        }
        if self.session_idle_minutes <= 0 || self.news_window_days <= 0 {
            return bad("session_idle_minutes and news_window_days must be positive".into());
        }
        if self.max_chars < 20 || self.retrieve_limit == 0 {
            return bad("max_chars must be at least 20 and retrieve_limit positive".into());
        }
        let t = &self.timeouts;
        if [t.knowledge_qa_ms, t.chitchat_ms, t.news_ms].contains(&0) {
            return bad("generator timeouts must be positive".into());
        }
        self.weights.validate()
    }
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_dir);
        for p in [
            &mut self.safety_dir,
            &mut self.ckt_dir,
            &mut self.movies,
            &mut self.entities_dir,
            &mut self.priority_table,
            &mut self.qa_table,
            &mut self.jokes,
            &mut self.news_categories,
            &mut self.lexicons.ignore,
            &mut self.lexicons.stopwords,
            &mut self.lexicons.affirmations,
            &mut self.lexicons.negations,
            &mut self.lexicons.stop,
            &mut self.lexicons.sentiment,
            &mut self.lexicons.topics,
            &mut self.lexicons.english,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_defaults() {
        let c = EngineConfig::parse("", "t").unwrap();
        assert_eq!(c, EngineConfig::default());
        assert_eq!(c.turns_per_topic, 5);
        let c = EngineConfig::parse(
            "turns_per_topic = 3\nseed = 42\nbusy = \"reject\"\ntopics = [\"MOVIE\", \"BOOK\"]\n[server]\nport = 9000\n[paths]\ndata_dir = \"/tmp/x\"\n",
            "t",
        )
        .unwrap();
        assert_eq!((c.turns_per_topic, c.seed, c.busy), (3, SeedMode::Fixed(42), BusyMode::Reject));
        assert_eq!(c.topics, [Topic::Movie, Topic::Book]);
        assert_eq!(c.server.port, 9000);
        assert_eq!(EngineConfig::parse("seed = \"system\"", "t").unwrap().seed, SeedMode::System);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in ["turns_per_topic = 0", "seed = \"sometimes\"", "topics = []", "nonsense = 1", "[weights]\nerroneous = 1.0"] {
            assert!(EngineConfig::parse(bad, "t").is_err(), "{bad}");
        }
    }

    #[test]
    fn env_overrides() {
        let mut c = EngineConfig::default();
        c.apply_env_with(|k| match k {
            ENV_DATA_DIR => Some("/data".into()),
            ENV_PORT => Some("7000".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!((c.paths.data_dir.as_path(), c.server.port), (Path::new("/data"), 7000));
        assert!(c.apply_env_with(|k| (k == ENV_PORT).then(|| "x".into())).is_err());
    }
}
