use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CandidateResponse, GeneratorKind};
use crate::text::{Intent, Lexicons, Topic};
use crate::{Error, Result};

const BUILTIN_TABLE: &str = include_str!("../../data/pool/priority.tsv");
/// Scores this close, relative to the best, count as a tie.
const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub comprehensible: f64,
    pub interesting: f64,
    pub engaging: f64,
    pub erroneous: f64,
    pub on_topic: f64,
}

impl Metrics {
    pub fn new(comprehensible: f64, interesting: f64, engaging: f64, erroneous: f64, on_topic: f64) -> Self {
        Metrics { comprehensible, interesting, engaging, erroneous, on_topic }
    }

    pub(crate) fn clamped(self) -> Self {
        let c = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
        Metrics::new(c(self.comprehensible), c(self.interesting), c(self.engaging), c(self.erroneous), c(self.on_topic))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankerWeights {
    pub comprehensible: f64,
    pub interesting: f64,
    pub engaging: f64,
    pub erroneous: f64,
    pub on_topic: f64,
}

impl Default for RankerWeights {
    fn default() -> Self {
        RankerWeights { comprehensible: 1.0, interesting: 1.0, engaging: 1.0, erroneous: -2.0, on_topic: 2.0 }
    }
}

impl RankerWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = self.erroneous <= 0.0
            && [self.comprehensible, self.interesting, self.engaging, self.on_topic]
                .iter()
                .all(|w| *w >= 0.0)
            && [self.comprehensible, self.interesting, self.engaging, self.erroneous, self.on_topic]
                .iter()
                .all(|w| w.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "ranker weights must be finite, erroneous <= 0 and the rest >= 0: {self:?}"
            )))
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        RankerWeights {
            comprehensible: self.comprehensible * k,
            interesting: self.interesting * k,
            engaging: self.engaging * k,
            erroneous: self.erroneous * k,
            on_topic: self.on_topic * k,
        }
    }

    pub fn score(&self, m: &Metrics) -> f64 {
        self.comprehensible * m.comprehensible
            + self.interesting * m.interesting
            + self.engaging * m.engaging
            + self.erroneous * m.erroneous
            + self.on_topic * m.on_topic
    }
}

/// Generator priority lists per (intent, topic). A `None` topic is the
/// wildcard row for the intent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriorityTable {
    rows: HashMap<(Intent, Option<Topic>), Vec<String>>,
}

impl PriorityTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TABLE, "<builtin priority table>").expect("shipped table parses")
    }

    /// Lines `intent TAB topic TAB name,name,...`; `*` as topic matches any.
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut rows = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [intent, topic, names] = f.as_slice() else {
                return Err(Error::parse(file, i + 1, "expected `intent<TAB>topic<TAB>generators`"));
            };
            let intent: Intent = intent.parse().map_err(|e| Error::parse(file, i + 1, e))?;
            let topic = match *topic {
                "*" => None,
                t => Some(t.parse::<Topic>().map_err(|e| Error::parse(file, i + 1, e))?),
            };
            let names: Vec<String> = names
                .split(',')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .map(str::to_string)
                .collect();
            if names.is_empty() {
                return Err(Error::parse(file, i + 1, "empty generator list"));
            }
            if rows.insert((intent, topic), names).is_some() {
                return Err(Error::parse(file, i + 1, "duplicate (intent, topic) row"));
            }
        }
        Ok(PriorityTable { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn insert(&mut self, intent: Intent, topic: Option<Topic>, names: Vec<String>) {
        self.rows.insert((intent, topic), names);
    }

    /// Every generator named in the table must be registered.
    pub fn validate(&self, registered: &HashSet<&str>) -> Result<()> {
        for names in self.rows.values() {
            if let Some(n) = names.iter().find(|n| !registered.contains(n.as_str())) {
                return Err(Error::Config(format!("priority table names unregistered generator `{n}`")));
            }
        }
        Ok(())
    }

    pub fn lookup(&self, intent: Intent, topic: Topic) -> Option<&[String]> {
        self.rows
            .get(&(intent, Some(topic)))
            .or_else(|| self.rows.get(&(intent, None)))
            .map(Vec::as_slice)
    }
}

/// The first candidate, in table order for `(intent, topic)`, that was
/// actually produced.
pub fn rank_rule_based<'a>(
    candidates: &'a [CandidateResponse],
    intent: Intent,
    topic: Topic,
    table: &PriorityTable,
) -> Option<&'a CandidateResponse> {
    table
        .lookup(intent, topic)?
        .iter()
        .find_map(|name| candidates.iter().find(|c| &c.generator == name))
}

/// Weighted-sum argmax. Ties go to the higher-priority kind, then to the
/// lexicographically smaller generator name.
pub fn rank_polynomial<'a>(candidates: &'a [CandidateResponse], weights: &RankerWeights) -> &'a CandidateResponse {
    assert!(!candidates.is_empty(), "nothing to rank");
    let scores: Vec<f64> = candidates.iter().map(|c| weights.score(&c.metrics)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_EPSILON * best.abs();
    candidates
        .iter()
        .zip(&scores)
        .filter(|(_, s)| **s >= best - tol)
        .map(|(c, _)| c)
        .min_by(|a, b| match a.kind.cmp(&b.kind) {
            Ordering::Equal => a.generator.cmp(&b.generator),
            o => o,
        })
        .expect("at least one candidate within tolerance of the best")
}

/// Configured interest and engagement per generator kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindProfile {
    pub interesting: f64,
    pub engaging: f64,
}

impl KindProfile {
    pub fn default_for(kind: GeneratorKind) -> Self {
        let (interesting, engaging) = match kind {
            GeneratorKind::Ckt => (0.8, 0.8),
            GeneratorKind::MiniCkt => (0.7, 0.8),
            GeneratorKind::News => (0.9, 0.5),
            GeneratorKind::KnowledgeQaStub => (0.6, 0.4),
            GeneratorKind::ChitchatStub => (0.3, 0.5),
            GeneratorKind::Joke => (0.7, 0.6),
        };
        KindProfile { interesting, engaging }
    }
}

pub struct ScoringContext<'a> {
    pub lexicons: &'a Lexicons,
    pub topic: Topic,
    pub previous_bot: Option<&'a str>,
    pub max_chars: usize,
}

/// Deterministic stand-ins for a learned response scorer.
pub fn score_metrics(text: &str, kind: GeneratorKind, ctx: &ScoringContext<'_>) -> Metrics {
    let trimmed = text.trim();
    let comprehensible = if trimmed.is_empty() || trimmed.chars().count() > ctx.max_chars { 0.0 } else { 1.0 };
    let nt = ctx.lexicons.normalize(trimmed);
    let repeated = ctx
        .previous_bot
        .is_some_and(|p| !nt.is_empty() && ctx.lexicons.normalize(p).normalized == nt.normalized);
    let placeholder = trimmed.contains('{') || trimmed.contains('}');
    let erroneous = if repeated || placeholder { 1.0 } else { 0.0 };
    let hits = ctx
        .lexicons
        .topic_keywords(ctx.topic)
        .iter()
        .filter(|k| {
            !k.is_empty()
                && nt.tokens.windows(k.len()).any(|w| w.iter().zip(k.iter()).all(|(a, b)| a == b))
        })
        .count();
    let on_topic = (hits as f64 / 2.0).min(1.0);
    let profile = KindProfile::default_for(kind);
    Metrics::new(comprehensible, profile.interesting, profile.engaging, erroneous, on_topic)
}
