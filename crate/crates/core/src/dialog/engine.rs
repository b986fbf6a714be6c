use std::collections::{BTreeSet, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock, TryLockError};
use std::time::Instant;

use chrono::{DateTime, Duration, Local, Timelike, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::outer::{outer_loop_step, OuterLoop, Route, FALLBACK, FALLBACK_TEXT};
use super::state::{boredom_check, global_intent, GlobalIntent, SessionState, TurnRecord};
use crate::ckt::{load_ckt_specs, load_movies, CktLibrary, MovieCkt, MovieDb};
use crate::config::{BusyMode, EngineConfig, SeedMode};
use crate::entity::{builtin_corpus, load_corpus_dir, EntityRecord, EntityType, SearchIndex};
use crate::news::{CategoryTable, IngestReport, NewsGenerator, NewsHandle, NewsStore};
use crate::pool::{
    build_response, ChitchatStub, KnowledgeQaStub, PriorityTable, QaTable, ResponseGenerator, CHITCHAT, JOKE,
    KNOWLEDGE_QA, MINI_CKT, MOVIE_CKT, NEWS,
};
use crate::safety::{Category, JokeBook, SafetyFilter, SensitiveLexicon, Verdict};
use crate::store::{FileStore, MemoryStore, Store};
use crate::text::{greeting_for_time, Lexicons, Topic, UserProfile};
use crate::{Error, Result};

const WELCOME: &str = "welcome";
const FAREWELL: &str = "farewell";
const DEFLECT: &str = "deflection";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityDebug {
    pub name: String,
    pub entity_type: EntityType,
    /// Match score S.
    pub score: f64,
    /// Heuristic rank h.
    pub rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictDebug {
    /// `input` for the user utterance, `output` for a candidate reply.
    pub stage: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebugInfo {
    pub intent: crate::text::Intent,
    pub topic: Topic,
    pub entities: Vec<EntityDebug>,
    pub chosen_generator: String,
    pub filter_verdicts: Vec<VerdictDebug>,
    pub latency_ms: f64,
    pub global_intent: GlobalIntent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    pub topic_current: Option<Topic>,
    /// Topic-driven turns left on the current topic.
    pub counter: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseEnvelope {
    pub text: String,
    pub session_id: String,
    pub turn_index: u64,
    /// The session is over; further turns are refused.
    pub ended: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub debug: Option<DebugInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub device_id: String,
    pub name: Option<String>,
    pub turns: u64,
    pub topic_current: Option<Topic>,
    pub ended: bool,
    pub created_at: DateTime<Utc>,
    pub last_active: DateTime<Utc>,
}

impl SessionSummary {
    fn of(s: &SessionState) -> Self {
        SessionSummary {
            session_id: s.session_id.clone(),
            device_id: s.profile.device_id.clone(),
            name: s.profile.name.clone(),
            turns: s.next_turn,
            topic_current: s.topic_current,
            ended: s.ended,
            created_at: s.created_at,
            last_active: s.last_active,
        }
    }
}

/// Everything an [`Engine`] is assembled from.
pub struct EngineParts {
    pub config: EngineConfig,
    pub lexicons: Arc<Lexicons>,
    pub index: Arc<SearchIndex>,
    pub filter: SafetyFilter,
    pub jokes: Arc<JokeBook>,
    pub outer: OuterLoop,
    pub news: NewsHandle,
    /// Where ingested news is saved; `None` keeps it in memory.
    pub news_path: Option<PathBuf>,
    pub store: Arc<dyn Store>,
}

fn read_or_builtin<T>(path: &Option<PathBuf>, load: impl FnOnce(&Path) -> Result<T>, builtin: impl FnOnce() -> T) -> Result<T> {
    match path {
        Some(p) => load(p),
        None => Ok(builtin()),
    }
}

/// Shipped entities plus the movie database's titles and actors. Movie
/// records win on id clashes.
pub fn default_entities(db: &MovieDb, lexicons: &Lexicons) -> Result<Vec<EntityRecord>> {
    let mut records = db.entity_records(lexicons)?;
    let ids: HashSet<String> = records.iter().map(|r| r.id.clone()).collect();
    records.extend(builtin_corpus(lexicons).into_iter().filter(|r| !ids.contains(&r.id)));
    Ok(records)
}

impl EngineParts {
    /// Shipped data, the given store, no persisted news.
    pub fn builtin(config: EngineConfig, store: Arc<dyn Store>) -> Result<Self> {
        Self::assemble(config, store, false)
    }

    /// Loads everything the configuration points at. Sessions and news are
    /// persisted under `paths.data_dir`.
    pub fn from_config(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let store: Arc<dyn Store> = Arc::new(FileStore::open(config.paths.sessions_dir())?);
        Self::assemble(config, store, true)
    }

    fn assemble(config: EngineConfig, store: Arc<dyn Store>, use_files: bool) -> Result<Self> {
        config.validate()?;
        let p = &config.paths;
        let lp = &p.lexicons;
        let custom_lexicons = [&lp.ignore, &lp.stopwords, &lp.affirmations, &lp.negations, &lp.stop, &lp.sentiment, &lp.topics, &lp.english]
            .iter()
            .any(|x| x.is_some());
        let lexicons = Arc::new(if custom_lexicons { Lexicons::load(lp)? } else { Lexicons::builtin().clone() });

        let sensitive = read_or_builtin(&p.safety_dir, |d| SensitiveLexicon::load_dir(d, &lexicons), SensitiveLexicon::builtin)?;
        let filter = SafetyFilter::new(sensitive, Arc::clone(&lexicons));
        let jokes = match &p.jokes {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                JokeBook::parse(&text, &path.display().to_string(), &filter)?
            }
            None => JokeBook::builtin(&filter),
        };

        let db = match &p.movies {
            Some(path) => MovieDb::new(load_movies(path)?, &lexicons)?,
            None => MovieDb::builtin(),
        };
        let library = read_or_builtin(&p.ckt_dir, |d| CktLibrary::new(load_ckt_specs(d)?), CktLibrary::builtin)?;

        let index_file = p.index_file();
        let index = if use_files && index_file.exists() {
            load_index(&index_file)?
        } else {
            let records = match &p.entities_dir {
                Some(dir) => load_corpus_dir(dir, &lexicons)?,
                None => default_entities(&db, &lexicons)?,
            };
            SearchIndex::build_with(records, &lexicons, config.exec)?
        }
        .with_exec(config.exec);

        let table = read_or_builtin(&p.priority_table, PriorityTable::load, PriorityTable::builtin)?;
        let registered: HashSet<&str> = [MOVIE_CKT, MINI_CKT, NEWS, KNOWLEDGE_QA, CHITCHAT, JOKE].into_iter().collect();
        table.validate(&registered)?;
        let qa = read_or_builtin(&p.qa_table, |f| QaTable::load(f, &lexicons), QaTable::builtin)?;

        let categories = Arc::new(match &p.news_categories {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                CategoryTable::parse(&text, &path.display().to_string(), &lexicons)?
            }
            None => CategoryTable::builtin(),
        });
        let news_path = use_files.then(|| p.news_file());
        let news_store = match &news_path {
            Some(path) if path.exists() => NewsStore::load(path, categories, Arc::clone(&lexicons))?,
            _ => NewsStore::new(categories, Arc::clone(&lexicons)),
        };
        let news: NewsHandle = Arc::new(RwLock::new(Arc::new(news_store)));

        let t = &config.timeouts;
        let generators: Vec<Arc<dyn ResponseGenerator>> = vec![
            Arc::new(KnowledgeQaStub::new(Arc::new(qa), t.knowledge_qa_ms)),
            Arc::new(ChitchatStub::new(Arc::clone(&lexicons), t.chitchat_ms)),
            Arc::new(NewsGenerator::new(Arc::clone(&news), filter.clone(), t.news_ms).with_window_days(config.news_window_days)),
        ];
        let outer = OuterLoop {
            lexicons: Arc::clone(&lexicons),
            movie: Arc::new(MovieCkt::new(Arc::new(db), Vec::new())),
            library: Arc::new(library),
            topic_specs: OuterLoop::default_topic_specs(),
            generators,
            table: Arc::new(table),
            weights: config.weights,
            filter: filter.clone(),
            topics: config.topics.clone(),
            turns_per_topic: config.turns_per_topic,
            exec: config.exec,
            max_chars: config.max_chars,
        };
        for topic in &config.topics {
            if *topic != Topic::Movie && !outer.topic_specs.get(topic).is_some_and(|s| outer.library.contains(s)) {
                return Err(Error::Config(format!("loop topic {topic} has no template")));
            }
        }
        Ok(EngineParts {
            config,
            lexicons,
            index: Arc::new(index),
            filter,
            jokes: Arc::new(jokes),
            outer,
            news,
            news_path,
            store,
        })
    }
}

pub fn load_index(path: &Path) -> Result<SearchIndex> {
    let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&text)?)
}

pub fn save_index(index: &SearchIndex, path: &Path) -> Result<()> {
    let bytes = serde_json::to_vec(index)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// splitmix64 finalizer; decorrelates neighbouring turn indices.
fn mix(seed: u64, turn: u64) -> u64 {
    let mut z = seed ^ turn.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn local_hour(profile: &UserProfile, now: DateTime<Utc>) -> u32 {
    match profile.timezone.as_deref().and_then(|z| z.parse::<chrono_tz::Tz>().ok()) {
        Some(tz) => now.with_timezone(&tz).hour(),
        None => now.with_timezone(&Local).hour(),
    }
}

fn capitalize(name: &str) -> String {
    name.split(' ')
        .map(|w| {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect::<String>()).unwrap_or_default()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn deflection(category: Category) -> String {
    match category {
        Category::Offensive => "Let's keep our chat friendly. What else would you like to talk about?".into(),
        Category::Emergency => {
            "That sounds serious. If you need help right away, please contact your local emergency services.".into()
        }
        c => format!("I'd rather not talk about {c} topics. Let's chat about something else. What else is on your mind?"),
    }
}

struct TurnOutput {
    text: String,
    generator: String,
    features: crate::text::UtteranceFeatures,
    entities: Vec<crate::entity::MatchCandidate>,
    global_intent: GlobalIntent,
    route: Option<Route>,
    verdicts: Vec<VerdictDebug>,
}

/// The dialog manager: owns live sessions and runs the turn pipeline.
/// Turns of one session are serialized; sessions run concurrently.
pub struct Engine {
    parts: EngineParts,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionState>>>>,
}

impl Engine {
    pub fn new(parts: EngineParts) -> Self {
        Engine { parts, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn from_config(config: EngineConfig) -> Result<Self> {
        Ok(Self::new(EngineParts::from_config(config)?))
    }

    /// Shipped data with an in-memory store.
    pub fn builtin(config: EngineConfig) -> Result<Self> {
        Ok(Self::new(EngineParts::builtin(config, Arc::new(MemoryStore::new()))?))
    }

    pub fn parts(&self) -> &EngineParts {
        &self.parts
    }

    pub fn config(&self) -> &EngineConfig {
        &self.parts.config
    }

    pub fn store(&self) -> &Arc<dyn Store> {
        &self.parts.store
    }

    pub fn index(&self) -> &SearchIndex {
        &self.parts.index
    }

    /// Ingests a corpus into a copy of the news store and publishes it.
    pub fn ingest_news(&self, path: &Path, now: DateTime<Utc>) -> Result<IngestReport> {
        let mut next = NewsStore::clone(&self.parts.news.read().unwrap_or_else(|e| e.into_inner()));
        let report = next.ingest_file(path, now)?;
        if let Some(out) = &self.parts.news_path {
            if let Some(dir) = out.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            next.save(out)?;
        }
        *self.parts.news.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(report)
    }

    pub fn create_session(&self, device_id: &str, timezone: Option<&str>, now: DateTime<Utc>) -> Result<String> {
        if device_id.trim().is_empty() {
            return Err(Error::Invalid { file: "<request>".into(), what: "device_id".into(), message: "must be non-empty".into() });
        }
        let mut profile = self.parts.store.get_profile(device_id)?.unwrap_or_else(|| UserProfile::new(device_id));
        if let Some(tz) = timezone {
            tz.parse::<chrono_tz::Tz>().map_err(|_| Error::Invalid {
                file: "<request>".into(),
                what: "timezone".into(),
                message: format!("unknown time zone `{tz}`"),
            })?;
            profile.timezone = Some(tz.to_string());
            self.parts.store.put_profile(&profile)?;
        }
        let seed = match self.parts.config.seed {
            SeedMode::Fixed(s) => s,
            SeedMode::System => rand::random(),
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let state = SessionState::new(&id, profile, seed, now);
        self.parts.store.put_session(&state)?;
        lock(&self.sessions).insert(id.clone(), Arc::new(Mutex::new(state)));
        Ok(id)
    }

    /// The live session, reloaded from the store after a restart.
    fn slot(&self, id: &str) -> Result<Arc<Mutex<SessionState>>> {
        if let Some(s) = lock(&self.sessions).get(id) {
            return Ok(Arc::clone(s));
        }
        let Some(mut state) = self.parts.store.get_session(id)? else {
            return Err(Error::UnknownSession(id.to_string()));
        };
        state.history = self.parts.store.get_turns(id)?;
        // a crash between writing a turn and its snapshot leaves the
        // snapshot one turn behind; the turn log is authoritative for counts
        if let Some(last) = state.history.last() {
            state.next_turn = state.next_turn.max(last.turn_index + 1);
        }
        Ok(Arc::clone(lock(&self.sessions).entry(id.to_string()).or_insert_with(|| Arc::new(Mutex::new(state)))))
    }

    pub fn session_summary(&self, id: &str) -> Result<SessionSummary> {
        let slot = self.slot(id)?;
        let s = lock(&slot);
        Ok(SessionSummary::of(&s))
    }

    pub fn end_session(&self, id: &str) -> Result<SessionSummary> {
        let slot = self.slot(id)?;
        let mut s = lock(&slot);
        if !s.ended {
            s.ended = true;
            self.parts.store.put_session(&s)?;
        }
        Ok(SessionSummary::of(&s))
    }

    pub fn handle_turn(&self, session_id: &str, text: &str, now: DateTime<Utc>, debug: bool) -> Result<ResponseEnvelope> {
        let started = Instant::now();
        let slot = self.slot(session_id)?;
        let mut guard = match self.parts.config.busy {
            BusyMode::Queue => lock(&slot),
            BusyMode::Reject => match slot.try_lock() {
                Ok(g) => g,
                Err(TryLockError::Poisoned(e)) => e.into_inner(),
                Err(TryLockError::WouldBlock) => return Err(Error::SessionBusy(session_id.to_string())),
            },
        };
        if guard.ended {
            return Err(Error::SessionEnded(session_id.to_string()));
        }
        if now - guard.last_active > Duration::minutes(self.parts.config.session_idle_minutes) {
            guard.ended = true;
            self.parts.store.put_session(&guard)?;
            return Err(Error::SessionEnded(session_id.to_string()));
        }

        let mut work = guard.clone();
        let out = match catch_unwind(AssertUnwindSafe(|| self.run_turn(&mut work, text, now))) {
            Ok(out) => out,
            Err(_) => {
                log::error!("turn {} of session {session_id} panicked; answering with a fallback", guard.next_turn);
                work = guard.clone();
                let nt = self.parts.lexicons.normalize(text);
                TurnOutput {
                    text: FALLBACK_TEXT.into(),
                    generator: FALLBACK.into(),
                    features: self.parts.lexicons.classify_intent_topic(&nt, &work.history),
                    entities: Vec::new(),
                    global_intent: GlobalIntent::Continue,
                    route: None,
                    verdicts: Vec::new(),
                }
            }
        };
        let latency_ms = started.elapsed().as_secs_f64() * 1000.0;
        let record = TurnRecord {
            turn_index: work.next_turn,
            user_text: text.to_string(),
            features: out.features.clone(),
            entities: out.entities.clone(),
            chosen_generator: out.generator.clone(),
            response_text: out.text.clone(),
            latency_ms,
        };
        work.next_turn += 1;
        work.last_active = now;
        work.history.push(record.clone());
        if let Err(e) = self.parts.store.commit_turn(&work, &record) {
            log::error!("could not persist turn {} of session {session_id}: {e}", record.turn_index);
        }
        let envelope = ResponseEnvelope {
            text: out.text,
            session_id: session_id.to_string(),
            turn_index: record.turn_index,
            ended: work.ended,
            debug: (debug || self.parts.config.debug).then(|| DebugInfo {
                intent: out.features.intent,
                topic: out.features.topic,
                entities: out
                    .entities
                    .iter()
                    .map(|m| EntityDebug { name: m.entity.name.clone(), entity_type: m.entity.entity_type, score: m.score, rank: m.rank })
                    .collect(),
                chosen_generator: out.generator,
                filter_verdicts: out.verdicts,
                latency_ms,
                global_intent: out.global_intent,
                route: out.route,
                topic_current: work.topic_current,
                counter: work.c,
            }),
        };
        *guard = work;
        Ok(envelope)
    }

    fn run_turn(&self, state: &mut SessionState, text: &str, now: DateTime<Utc>) -> TurnOutput {
        let p = &self.parts;
        let lx = &p.lexicons;
        let nt = lx.normalize(text);
        let mut features = lx.classify_intent_topic(&nt, &state.history);
        let gi = global_intent(&nt, features.intent, state, lx);
        let done = |text: String, generator: &str, features, entities, route, verdicts| TurnOutput {
            text: build_response(&text, p.config.max_chars),
            generator: generator.to_string(),
            features,
            entities,
            global_intent: gi,
            route,
            verdicts,
        };

        if gi == GlobalIntent::End {
            state.ended = true;
            let text = match &state.profile.name {
                Some(n) => format!("It was great talking with you, {n}. Goodbye!"),
                None => "It was great talking with you. Goodbye!".to_string(),
            };
            return done(text, FAREWELL, features, Vec::new(), None, Vec::new());
        }

        let entities = p.index.retrieve(&nt, None, p.config.retrieve_limit);
        let verdict = p.filter.check_utterance(&nt, &entities, &features);
        let mut verdicts = vec![VerdictDebug { stage: "input".into(), generator: None, verdict: verdict.clone() }];
        if verdict.blocked {
            let category = verdict.category.expect("blocked verdicts carry a category");
            // the deflection does not move the conversation
            features.topic = state.topic_current.unwrap_or(Topic::General);
            if category == Category::Offensive {
                state.consecutive_offense += 1;
                let mut rng = ChaCha8Rng::seed_from_u64(mix(state.seed, state.next_turn));
                if let Some(joke) = p.jokes.pick_joke(state.consecutive_offense, p.config.joke_threshold, &mut state.jokes, &mut rng) {
                    let text = format!("How about a joke instead? {}", joke.spoken());
                    return done(text, JOKE, features, entities, None, verdicts);
                }
            }
            return done(deflection(category), DEFLECT, features, entities, None, verdicts);
        }
        state.consecutive_offense = 0;

        let mut prefix = None;
        if gi == GlobalIntent::Welcome {
            let greeting = greeting_for_time(local_hour(&state.profile, now)).greeting();
            match &state.profile.name {
                Some(name) => prefix = Some(format!("{greeting}, {name}! It's great to talk with you again.")),
                None => {
                    state.awaiting_name = true;
                    let text = format!(
                        "{greeting}! I'm a social bot, and I love chatting about movies, books, music and more. What's your name?"
                    );
                    return done(text, WELCOME, features, entities, None, verdicts);
                }
            }
        } else if state.awaiting_name {
            state.awaiting_name = false;
            if let Some(name) = lx.extract_user_name(&nt) {
                let name = capitalize(&name);
                state.profile.name = Some(name.clone());
                if let Err(e) = p.store.put_profile(&state.profile) {
                    log::error!("could not save profile for {}: {e}", state.profile.device_id);
                }
                prefix = Some(format!("Nice to meet you, {name}!"));
            }
        }

        let bored = {
            let window: Vec<TurnRecord> = state
                .history
                .iter()
                .filter(|t| t.turn_index > state.topic_since)
                .cloned()
                .chain(std::iter::once(TurnRecord {
                    turn_index: state.next_turn,
                    user_text: text.to_string(),
                    features: features.clone(),
                    entities: Vec::new(),
                    chosen_generator: String::new(),
                    response_text: String::new(),
                    latency_ms: 0.0,
                }))
                .collect();
            boredom_check(&window, lx)
        };
        let step = outer_loop_step(&p.outer, state, &nt, &features, &entities, bored, now, mix(state.seed, state.next_turn));
        verdicts.extend(step.verdicts.into_iter().map(|(g, v)| VerdictDebug { stage: "output".into(), generator: Some(g), verdict: v }));
        // pool turns keep the conversation's topic unless the user named one
        // with a template, so the next unmarked utterance returns to the loop
        features.topic = match step.route {
            Route::Ckt => step.topic,
            Route::Pool if features.topic_explicit && p.outer.has_ckt(state, features.topic) => features.topic,
            Route::Pool => state.topic_current.unwrap_or(Topic::General),
        };
        let text = match prefix {
            Some(pre) => format!("{pre} {}", step.text),
            None => step.text,
        };
        done(text, &step.generator, features, entities, Some(step.route), verdicts)
    }

    /// Ids of sessions held in memory.
    pub fn live_sessions(&self) -> BTreeSet<String> {
        lock(&self.sessions).keys().cloned().collect()
    }
}
