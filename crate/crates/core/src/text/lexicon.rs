use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::Topic;
use crate::{Error, Result};

const IGNORE: &str = include_str!("../../data/lexicon/ignore.txt");
const STOPWORDS: &str = include_str!("../../data/lexicon/stopwords.txt");
const AFFIRMATIONS: &str = include_str!("../../data/lexicon/affirmations.txt");
const NEGATIONS: &str = include_str!("../../data/lexicon/negations.txt");
const STOP: &str = include_str!("../../data/lexicon/stop.txt");
const SENTIMENT: &str = include_str!("../../data/lexicon/sentiment.tsv");
const TOPICS: &str = include_str!("../../data/lexicon/topics.tsv");
const ENGLISH: &str = include_str!("../../data/lexicon/english.txt");

/// Optional overrides for the shipped lexicon files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconPaths {
    pub ignore: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub affirmations: Option<PathBuf>,
    pub negations: Option<PathBuf>,
    pub stop: Option<PathBuf>,
    pub sentiment: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub english: Option<PathBuf>,
}

/// Word lists driving normalization and feature extraction. Immutable once
/// loaded and shared by every session.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub(crate) ignore: HashSet<String>,
    pub(crate) stopwords: HashSet<String>,
    pub(crate) affirmations: Vec<Vec<String>>,
    pub(crate) negations: HashSet<String>,
    pub(crate) stop_phrases: Vec<Vec<String>>,
    pub(crate) sentiment: HashMap<String, f64>,
    pub(crate) topics: Vec<(Topic, Vec<Vec<String>>)>,
    pub(crate) english: HashSet<String>,
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn word_set(text: &str) -> HashSet<String> {
    lines(text).map(|(_, l)| l.to_lowercase()).collect()
}

fn phrases(text: &str) -> Vec<Vec<String>> {
    lines(text)
        .map(|(_, l)| l.split_whitespace().map(str::to_lowercase).collect())
        .collect()
}

fn parse_sentiment(text: &str, file: &str) -> Result<HashMap<String, f64>> {
    let mut map = HashMap::new();
    for (line, l) in lines(text) {
        let (word, weight) = l
            .split_once('\t')
            .ok_or_else(|| Error::parse(file, line, "expected `word<TAB>weight`"))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| Error::parse(file, line, format!("bad weight `{weight}`")))?;
        map.insert(word.trim().to_lowercase(), weight);
    }
    Ok(map)
}

fn parse_topics(text: &str, file: &str) -> Result<Vec<(Topic, Vec<Vec<String>>)>> {
    let mut out = Vec::new();
    for (line, l) in lines(text) {
        let (topic, words) = l
            .split_once('\t')
            .ok_or_else(|| Error::parse(file, line, "expected `topic<TAB>keywords`"))?;
        let topic: Topic = topic.parse().map_err(|e| Error::parse(file, line, e))?;
        let keywords = words
            .split(',')
            .map(|p| p.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .filter(|p| !p.is_empty())
            .collect();
        out.push((topic, keywords));
    }
    Ok(out)
}

fn read(path: &Option<PathBuf>, builtin: &'static str) -> Result<(String, String)> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok((text, p.display().to_string()))
        }
        None => Ok((builtin.to_string(), "<builtin>".to_string())),
    }
}

impl Lexicons {
    /// The shipped lexicons, parsed once per process.
    pub fn builtin() -> &'static Lexicons {
        static BUILTIN: OnceLock<Lexicons> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Lexicons::load(&LexiconPaths::default()).expect("shipped lexicons are well-formed")
        })
    }

    pub fn load(paths: &LexiconPaths) -> Result<Self> {
        let (ignore, _) = read(&paths.ignore, IGNORE)?;
        let (stopwords, _) = read(&paths.stopwords, STOPWORDS)?;
        let (affirmations, _) = read(&paths.affirmations, AFFIRMATIONS)?;
        let (negations, _) = read(&paths.negations, NEGATIONS)?;
        let (stop, _) = read(&paths.stop, STOP)?;
        let (sentiment, sentiment_file) = read(&paths.sentiment, SENTIMENT)?;
        let (topics, topics_file) = read(&paths.topics, TOPICS)?;
        let (english, _) = read(&paths.english, ENGLISH)?;
        Ok(Lexicons {
            ignore: word_set(&ignore),
            stopwords: word_set(&stopwords),
            affirmations: phrases(&affirmations),
            negations: word_set(&negations),
            stop_phrases: phrases(&stop),
            sentiment: parse_sentiment(&sentiment, &sentiment_file)?,
            topics: parse_topics(&topics, &topics_file)?,
            english: word_set(&english),
        })
    }

    pub fn is_ignorable(&self, token: &str) -> bool {
        self.ignore.contains(token)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn is_negation(&self, token: &str) -> bool {
        self.negations.contains(token)
    }

    pub fn is_english_word(&self, token: &str) -> bool {
        self.english.contains(token)
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn sentiment_lexicon(&self) -> &HashMap<String, f64> {
        &self.sentiment
    }

    /// Keyword phrases for `topic`, empty when the topic has no table.
    pub fn topic_keywords(&self, topic: Topic) -> &[Vec<String>] {
        self.topics
            .iter()
            .find(|(t, _)| *t == topic)
            .map(|(_, k)| k.as_slice())
            .unwrap_or(&[])
    }

    /// Reads a word-per-line file into a set (shared helper for other word lists).
    pub fn read_word_file(path: &Path) -> Result<HashSet<String>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(word_set(&text))
    }
}

/// Position of the first occurrence of `phrase` in `tokens`.
pub(crate) fn find_phrase<S: AsRef<str>>(tokens: &[S], phrase: &[String]) -> Option<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - phrase.len()).find(|&i| {
        phrase
            .iter()
            .zip(&tokens[i..])
            .all(|(p, t)| p == t.as_ref())
    })
}

pub(crate) fn starts_with_phrase<S: AsRef<str>>(tokens: &[S], phrase: &[String]) -> bool {
    phrase.len() <= tokens.len() && phrase.iter().zip(tokens).all(|(p, t)| p == t.as_ref())
}
