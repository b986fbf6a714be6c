use std::path::Path;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GeneratorContext, GeneratorDescriptor, GeneratorKind, ResponseGenerator, CHITCHAT, KNOWLEDGE_QA};
use crate::text::{Lexicons, NormalizedText};
use crate::{Error, Result};

const BUILTIN_QA: &str = include_str!("../../data/pool/qa.tsv");
/// Minimum content-word overlap for a near-miss question to count.
const QA_MIN_JACCARD: f64 = 0.75;

/// Random stream for one generator on one turn.
pub fn generator_rng(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a keeps the stream stable across builds
    let h = name
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Question-answer pairs keyed by normalized question.
#[derive(Debug, Clone, Default)]
pub struct QaTable {
    entries: Vec<(NormalizedText, String)>,
}

impl QaTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_QA, "<builtin qa>", Lexicons::builtin()).expect("shipped qa table parses")
    }

    /// Lines `question TAB answer`; `#` starts a comment line.
    pub fn parse(text: &str, file: &str, lexicons: &Lexicons) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((q, a)) = line.split_once('\t') else {
                return Err(Error::parse(file, i + 1, "expected `question<TAB>answer`"));
            };
            let (q, a) = (lexicons.normalize(q), a.trim().to_string());
            if q.is_empty() || a.is_empty() {
                return Err(Error::parse(file, i + 1, "empty question or answer"));
            }
            entries.push((q, a));
        }
        Ok(QaTable { entries })
    }

    pub fn load(path: &Path, lexicons: &Lexicons) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string(), lexicons)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn answers(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(_, a)| a.as_str())
    }

    /// Exact normalized match, else the best content-word overlap.
    pub fn lookup(&self, nt: &NormalizedText) -> Option<&str> {
        if let Some((_, a)) = self.entries.iter().find(|(q, _)| q.normalized == nt.normalized) {
            return Some(a);
        }
        let words = |t: &NormalizedText| -> std::collections::HashSet<String> {
            t.content_tokens().map(str::to_string).collect()
        };
        let asked = words(nt);
        if asked.is_empty() {
            return None;
        }
        self.entries
            .iter()
            .map(|(q, a)| {
                let known = words(q);
                let inter = asked.intersection(&known).count() as f64;
                let union = asked.union(&known).count() as f64;
                (inter / union, a)
            })
            .filter(|(j, _)| *j >= QA_MIN_JACCARD)
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .map(|(_, a)| a.as_str())
    }
}

/// Answers questions found in a local table.
pub struct KnowledgeQaStub {
    descriptor: GeneratorDescriptor,
    table: Arc<QaTable>,
}

impl KnowledgeQaStub {
    pub fn new(table: Arc<QaTable>, timeout_ms: u64) -> Self {
        KnowledgeQaStub {
            descriptor: GeneratorDescriptor::new(KNOWLEDGE_QA, GeneratorKind::KnowledgeQaStub, timeout_ms),
            table,
        }
    }
}

impl ResponseGenerator for KnowledgeQaStub {
    fn descriptor(&self) -> &GeneratorDescriptor {
        &self.descriptor
    }

    fn generate(&self, ctx: &GeneratorContext) -> Option<String> {
        self.table.lookup(&ctx.nt).map(str::to_string)
    }
}

const ECHO: &[&str] = &[
    "That's interesting. Tell me more about {}.",
    "I'd love to hear more about {}.",
    "Oh, {}! What do you like about it?",
];
const OPEN: &[&str] = &[
    "I see. What else is on your mind?",
    "Got it. What would you like to talk about?",
];
const UNSURE: &[&str] = &[
    "That's a good question. I'm not sure, but I'd love to hear what you think.",
    "Hmm, I don't know that one. What do you think?",
];

/// Template small talk that echoes a phrase from the utterance.
pub struct ChitchatStub {
    descriptor: GeneratorDescriptor,
    lexicons: Arc<Lexicons>,
}

impl ChitchatStub {
    pub fn new(lexicons: Arc<Lexicons>, timeout_ms: u64) -> Self {
        ChitchatStub {
            descriptor: GeneratorDescriptor::new(CHITCHAT, GeneratorKind::ChitchatStub, timeout_ms),
            lexicons,
        }
    }

    /// Longest run of content words, capped at three.
    fn phrase(&self, nt: &NormalizedText) -> Option<String> {
        let content: Vec<bool> = nt
            .tokens
            .iter()
            .zip(&nt.ignorable_mask)
            .map(|(t, &ig)| {
                !ig && !self.lexicons.is_stopword(t)
                    && !self.lexicons.is_negation(t)
                    && !self.lexicons.affirmations.iter().any(|p| p.len() == 1 && p[0] == *t)
            })
            .collect();
        let (mut best, mut start) = (None::<(usize, usize)>, None);
        for i in 0..=content.len() {
            match (content.get(i).copied().unwrap_or(false), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    if best.is_none_or(|(bs, be)| i - s > be - bs) {
                        best = Some((s, i));
                    }
                    start = None;
                }
                _ => {}
            }
        }
        let (s, e) = best?;
        Some(nt.tokens[s..e.min(s + 3)].join(" "))
    }
}

impl ResponseGenerator for ChitchatStub {
    fn descriptor(&self) -> &GeneratorDescriptor {
        &self.descriptor
    }

    fn generate(&self, ctx: &GeneratorContext) -> Option<String> {
        let mut rng = generator_rng(ctx.seed, &self.descriptor.name);
        if ctx.features.is_question {
            return UNSURE.choose(&mut rng).map(|s| s.to_string());
        }
        Some(match self.phrase(&ctx.nt) {
            Some(p) => ECHO.choose(&mut rng).expect("nonempty").replace("{}", &p),
            None => OPEN.choose(&mut rng).expect("nonempty").to_string(),
        })
    }
}
