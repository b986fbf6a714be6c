//! Candidate replies: the generator interface, concurrent gathering,
//! ranking and final packaging.

mod build;
mod gather;
mod rank;
mod stubs;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::entity::MatchCandidate;
use crate::text::{NormalizedText, Topic, UtteranceFeatures};

pub use build::{build_response, is_pronounceable, strip_unpronounceable, DEFAULT_MAX_CHARS};
pub use gather::gather;
pub use rank::{
    rank_polynomial, rank_rule_based, score_metrics, KindProfile, Metrics, PriorityTable,
    RankerWeights, ScoringContext,
};
pub use stubs::{generator_rng, ChitchatStub, KnowledgeQaStub, QaTable};

pub const MOVIE_CKT: &str = "movie_ckt";
pub const MINI_CKT: &str = "mini_ckt";
pub const NEWS: &str = "news";
pub const KNOWLEDGE_QA: &str = "knowledge_qa";
pub const CHITCHAT: &str = "chitchat";
pub const JOKE: &str = "joke";

/// Generator families, declared from highest to lowest tie-break priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Ckt,
    MiniCkt,
    News,
    KnowledgeQaStub,
    ChitchatStub,
    Joke,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::Ckt => "ckt",
            GeneratorKind::MiniCkt => "mini_ckt",
            GeneratorKind::News => "news",
            GeneratorKind::KnowledgeQaStub => "knowledge_qa_stub",
            GeneratorKind::ChitchatStub => "chitchat_stub",
            GeneratorKind::Joke => "joke",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            GeneratorKind::Ckt,
            GeneratorKind::MiniCkt,
            GeneratorKind::News,
            GeneratorKind::KnowledgeQaStub,
            GeneratorKind::ChitchatStub,
            GeneratorKind::Joke,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| format!("unknown generator kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDescriptor {
    pub name: String,
    pub kind: GeneratorKind,
    pub timeout_ms: u64,
}

impl GeneratorDescriptor {
    pub fn new(name: impl Into<String>, kind: GeneratorKind, timeout_ms: u64) -> Self {
        assert!(timeout_ms > 0, "generator timeout must be positive");
        GeneratorDescriptor { name: name.into(), kind, timeout_ms }
    }
}

/// Everything a generator may look at for one turn.
#[derive(Debug, Clone)]
pub struct GeneratorContext {
    pub nt: NormalizedText,
    pub features: UtteranceFeatures,
    pub entities: Vec<MatchCandidate>,
    pub topic: Topic,
    /// Per-turn seed; generators derive their own random streams from it.
    pub seed: u64,
    pub now: DateTime<Utc>,
    pub previous_bot: Option<String>,
}

/// A source of candidate replies. Implementations must not share mutable
/// state between calls; the pool runs them concurrently.
pub trait ResponseGenerator: Send + Sync {
    fn descriptor(&self) -> &GeneratorDescriptor;

    /// `None` when the generator has nothing to say this turn.
    fn generate(&self, ctx: &GeneratorContext) -> Option<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResponse {
    pub text: String,
    pub generator: String,
    pub kind: GeneratorKind,
    pub metrics: Metrics,
}

impl CandidateResponse {
    pub fn new(text: impl Into<String>, generator: impl Into<String>, kind: GeneratorKind, metrics: Metrics) -> Self {
        let text = text.into();
        assert!(!text.trim().is_empty(), "candidate text must be nonempty");
        CandidateResponse { text, generator: generator.into(), kind, metrics: metrics.clamped() }
    }
}
