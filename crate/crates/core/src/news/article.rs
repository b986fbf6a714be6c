use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::text::Lexicons;
use crate::{Error, Result};

const BUILTIN_CATEGORIES: &str = include_str!("../../data/news/categories.tsv");
/// Share of words made only of ASCII letters an English article must reach.
const MIN_ASCII_WORDS: f64 = 0.9;
/// Share of words that must be frequent English words.
const MIN_COMMON_WORDS: f64 = 0.4;
/// Words ending in a period that do not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "prof", "gen", "gov", "sen", "rep", "lt", "col",
    "capt", "sgt", "inc", "ltd", "co", "corp", "vs", "etc", "no", "mt", "ft", "jan", "feb", "mar",
    "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "e.g", "i.e",
    "a.m", "p.m",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewsCategory {
    Politics,
    Sports,
    SciTech,
    Business,
}

impl NewsCategory {
    pub const ALL: [NewsCategory; 4] =
        [NewsCategory::Politics, NewsCategory::Sports, NewsCategory::SciTech, NewsCategory::Business];

    pub fn as_str(self) -> &'static str {
        match self {
            NewsCategory::Politics => "politics",
            NewsCategory::Sports => "sports",
            NewsCategory::SciTech => "sci_tech",
            NewsCategory::Business => "business",
        }
    }

    pub fn spoken(self) -> &'static str {
        match self {
            NewsCategory::Politics => "politics",
            NewsCategory::Sports => "sports",
            NewsCategory::SciTech => "science and technology",
            NewsCategory::Business => "business",
        }
    }
}

impl fmt::Display for NewsCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NewsCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NewsCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown news category `{s}`"))
    }
}

/// One corpus record as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawArticle {
    pub headline: String,
    pub body: String,
    pub published_at: DateTime<Utc>,
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsArticle {
    /// Derived from the ingestion timestamp; increases with ingestion order.
    pub id: String,
    pub headline: String,
    pub body: String,
    pub category: NewsCategory,
    pub short_summary: String,
    pub long_summary: String,
    pub published_at: DateTime<Utc>,
    pub keywords: BTreeSet<String>,
    pub language: String,
}

/// Keyword lists per category, in normalized form.
#[derive(Debug, Clone)]
pub struct CategoryTable {
    rows: Vec<(NewsCategory, Vec<Vec<String>>)>,
}

impl CategoryTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_CATEGORIES, "<builtin categories>", Lexicons::builtin())
            .expect("shipped category table parses")
    }

    pub fn parse(text: &str, file: &str, lexicons: &Lexicons) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (cat, words) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(file, i + 1, "expected `category<TAB>keywords`"))?;
            let cat: NewsCategory = cat.trim().parse().map_err(|e| Error::parse(file, i + 1, e))?;
            let words = words
                .split(',')
                .map(|w| lexicons.normalize(w).tokens)
                .filter(|t| !t.is_empty())
                .collect();
            rows.push((cat, words));
        }
        Ok(CategoryTable { rows })
    }

    fn hits(&self, category: NewsCategory, tokens: &[String]) -> usize {
        self.rows
            .iter()
            .filter(|(c, _)| *c == category)
            .flat_map(|(_, words)| words)
            .map(|k| tokens.windows(k.len()).filter(|w| *w == k.as_slice()).count())
            .sum()
    }
}

/// Category with the most keyword occurrences in headline and body. Ties
/// and articles without any hit are business.
pub fn categorize(headline: &str, body: &str, table: &CategoryTable, lexicons: &Lexicons) -> NewsCategory {
    let tokens = lexicons.normalize(&format!("{headline} {body}")).tokens;
    let counts: Vec<(NewsCategory, usize)> =
        NewsCategory::ALL.iter().map(|&c| (c, table.hits(c, &tokens))).collect();
    let best = counts.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let leaders: Vec<NewsCategory> = counts.iter().filter(|(_, n)| *n == best).map(|(c, _)| *c).collect();
    match leaders.as_slice() {
        [only] if best > 0 => *only,
        _ => NewsCategory::Business,
    }
}

/// English when nearly every word is plain ASCII letters and a fair share
/// are frequent English words.
pub fn is_english(text: &str, lexicons: &Lexicons) -> bool {
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).replace(['\'', '\u{2019}'], ""))
        .filter(|w| w.chars().any(char::is_alphabetic))
        .collect();
    if words.is_empty() {
        return false;
    }
    let n = words.len() as f64;
    let ascii = words.iter().filter(|w| w.chars().all(|c| c.is_ascii_alphabetic())).count() as f64;
    let common = words
        .iter()
        .filter(|w| lexicons.is_english_word(&w.to_lowercase()))
        .count() as f64;
    ascii / n >= MIN_ASCII_WORDS && common / n >= MIN_COMMON_WORDS
}

fn is_abbreviation(word: &str) -> bool {
    let w = word
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .trim_end_matches('.')
        .to_lowercase();
    // single-letter initials such as "J."
    (w.chars().count() == 1 && w.chars().all(char::is_alphabetic)) || ABBREVIATIONS.contains(&w.as_str())
}

/// Splits on `.`, `!` or `?` followed by whitespace, except after known
/// abbreviations and initials.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let words: Vec<&str> = text.split_whitespace().collect();
    for (i, w) in words.iter().enumerate() {
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(w);
        let end = w.trim_end_matches(['"', '\'', ')']);
        let terminal = end.ends_with(['.', '!', '?']);
        let guarded = end.ends_with('.') && is_abbreviation(end);
        if terminal && !guarded || i + 1 == words.len() {
            out.push(std::mem::take(&mut current));
        }
    }
    out
}

/// Lead summaries: the first sentence, and the first three.
pub fn summarize(body: &str) -> (String, String) {
    let sentences = split_sentences(body);
    let short = sentences.first().cloned().unwrap_or_default();
    let long = sentences.iter().take(3).cloned().collect::<Vec<_>>().join(" ");
    (short, long)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        let (s, l) = summarize("One. Two! Three? Four. Five.");
        assert_eq!(s, "One.");
        assert_eq!(l, "One. Two! Three?");
        let (s, l) = summarize("Alpha beta. Gamma delta.");
        assert_eq!((s.as_str(), l.as_str()), ("Alpha beta.", "Alpha beta. Gamma delta."));
        assert_eq!(split_sentences("One. Mr. Smith spoke. Three. Four.")[..2], ["One.", "Mr. Smith spoke."]);
        assert_eq!(split_sentences("J. R. Smith scored. Then he left.").len(), 2);
        assert_eq!(split_sentences("No terminal punctuation"), ["No terminal punctuation"]);
    }

    #[test]
    fn categories() {
        let t = CategoryTable::builtin();
        let lx = Lexicons::builtin();
        assert_eq!(
            categorize("Yankees win", "The baseball team won the game in the ninth inning.", &t, lx),
            NewsCategory::Sports
        );
        assert_eq!(categorize("Quiet day", "Nothing much happened here.", &t, lx), NewsCategory::Business);
        assert_eq!(
            categorize("Senate news", "The senate met. The senate argued. The senate adjourned. A startup watched.", &t, lx),
            NewsCategory::Politics
        );
        // one hit each is a tie
        assert_eq!(categorize("x", "A team and a startup.", &t, lx), NewsCategory::Business);
    }

    #[test]
    fn language_filter() {
        let lx = Lexicons::builtin();
        assert!(is_english("The team won the game on Sunday and the fans were happy.", lx));
        assert!(!is_english("El equipo ganó el partido del domingo y los aficionados estaban felices.", lx));
        assert!(!is_english("La squadra ha vinto la partita di domenica e i tifosi erano felici.", lx));
        assert!(!is_english("", lx));
    }
}
