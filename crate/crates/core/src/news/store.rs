use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;

use super::article::{categorize, is_english, summarize, CategoryTable, NewsArticle, NewsCategory, RawArticle};
use crate::pool::strip_unpronounceable;
use crate::safety::SafetyFilter;
use crate::text::Lexicons;
use crate::{Error, Result};

pub const DEFAULT_WINDOW_DAYS: i64 = 30;
/// Draws before a query gives up on finding an article that passes the filter.
pub const MAX_ATTEMPTS: usize = 20;
const ID_WIDTH: usize = 20;

/// What one ingestion batch did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub ingested: usize,
    pub malformed: usize,
    pub non_english: usize,
    pub duplicates: usize,
}

/// Articles plus a keyword index over their normalized tokens.
#[derive(Debug, Clone)]
pub struct NewsStore {
    articles: BTreeMap<String, NewsArticle>,
    index: HashMap<String, BTreeSet<String>>,
    seen: HashSet<(String, DateTime<Utc>)>,
    last_id: i64,
    categories: Arc<CategoryTable>,
    lexicons: Arc<Lexicons>,
}

impl NewsStore {
    pub fn new(categories: Arc<CategoryTable>, lexicons: Arc<Lexicons>) -> Self {
        NewsStore {
            articles: BTreeMap::new(),
            index: HashMap::new(),
            seen: HashSet::new(),
            last_id: 0,
            categories,
            lexicons,
        }
    }

    pub fn builtin() -> Self {
        Self::new(Arc::new(CategoryTable::builtin()), Arc::new(Lexicons::builtin().clone()))
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Articles in id (ingestion) order.
    pub fn articles(&self) -> impl Iterator<Item = &NewsArticle> {
        self.articles.values()
    }

    pub fn get(&self, id: &str) -> Option<&NewsArticle> {
        self.articles.get(id)
    }

    /// Ids indexed under a normalized token.
    pub fn postings(&self, token: &str) -> Option<&BTreeSet<String>> {
        self.index.get(token)
    }

    pub fn ingest_file(&mut self, path: &Path, now: DateTime<Utc>) -> Result<IngestReport> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(self.ingest_text(&text, &path.display().to_string(), now))
    }

    /// One JSON record per line. Bad records are logged and skipped.
    pub fn ingest_text(&mut self, text: &str, file: &str, now: DateTime<Utc>) -> IngestReport {
        let mut report = IngestReport::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawArticle = match serde_json::from_str(line) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("{file}:{}: skipping malformed article: {e}", i + 1);
                    report.malformed += 1;
                    continue;
                }
            };
            if raw.headline.trim().is_empty() || raw.body.trim().is_empty() {
                log::warn!("{file}:{}: skipping article with empty headline or body", i + 1);
                report.malformed += 1;
                continue;
            }
            if !is_english(&format!("{} {}", raw.headline, raw.body), &self.lexicons) {
                log::info!("{file}:{}: dropping non-English article", i + 1);
                report.non_english += 1;
                continue;
            }
            if self.add(raw, now) {
                report.ingested += 1;
            } else {
                report.duplicates += 1;
            }
        }
        report
    }

    /// Cleans, categorizes and indexes one English record. False when the
    /// same headline and publication time are already stored.
    fn add(&mut self, raw: RawArticle, now: DateTime<Utc>) -> bool {
        let headline = strip_unpronounceable(&raw.headline);
        let key = (self.lexicons.normalize(&headline).normalized, raw.published_at);
        if self.seen.contains(&key) {
            return false;
        }
        let body = strip_unpronounceable(&raw.body);
        let keywords: BTreeSet<String> = raw
            .keywords
            .iter()
            .map(|k| self.lexicons.normalize(k).normalized)
            .filter(|k| !k.is_empty())
            .collect();
        let (short_summary, long_summary) = summarize(&body);
        let id_value = now.timestamp_micros().max(self.last_id + 1);
        self.last_id = id_value;
        let article = NewsArticle {
            id: format!("{id_value:0ID_WIDTH$}"),
            category: categorize(&headline, &body, &self.categories, &self.lexicons),
            headline,
            body,
            short_summary,
            long_summary,
            published_at: raw.published_at,
            keywords,
            language: "en".to_string(),
        };
        self.seen.insert(key);
        self.insert(article);
        true
    }

    fn insert(&mut self, article: NewsArticle) {
        let text = format!(
            "{} {} {}",
            article.headline,
            article.body,
            article.keywords.iter().cloned().collect::<Vec<_>>().join(" ")
        );
        for token in self.lexicons.normalize(&text).tokens {
            if !self.lexicons.is_stopword(&token) {
                self.index.entry(token).or_default().insert(article.id.clone());
            }
        }
        self.articles.insert(article.id.clone(), article);
    }

    fn in_window(a: &NewsArticle, now: DateTime<Utc>, window_days: i64) -> bool {
        a.published_at <= now && a.published_at >= now - Duration::days(window_days)
    }

    fn passes(a: &NewsArticle, filter: &SafetyFilter) -> bool {
        [&a.headline, &a.short_summary, &a.long_summary]
            .iter()
            .all(|t| !filter.check_response(t).blocked)
    }

    /// Ids of in-window articles containing every non-stopword token of
    /// `keyword`. Empty when the keyword has no such token.
    pub fn keyword_matches(&self, keyword: &str, now: DateTime<Utc>, window_days: i64) -> Vec<&NewsArticle> {
        let tokens: Vec<String> = self
            .lexicons
            .normalize(keyword)
            .tokens
            .into_iter()
            .filter(|t| !self.lexicons.is_stopword(t))
            .collect();
        let Some((first, rest)) = tokens.split_first() else {
            return Vec::new();
        };
        let Some(ids) = self.index.get(first) else {
            return Vec::new();
        };
        ids.iter()
            .filter(|id| rest.iter().all(|t| self.index.get(t).is_some_and(|s| s.contains(*id))))
            .map(|id| &self.articles[id])
            .filter(|a| Self::in_window(a, now, window_days))
            .collect()
    }

    /// Uniform category among those with in-window articles, then a uniform
    /// article within it; redrawn while the pick fails the filter.
    pub fn random_news<R: Rng + ?Sized>(
        &self,
        now: DateTime<Utc>,
        window_days: i64,
        filter: &SafetyFilter,
        rng: &mut R,
    ) -> Option<&NewsArticle> {
        let mut by_category: BTreeMap<NewsCategory, Vec<&NewsArticle>> = BTreeMap::new();
        for a in self.articles.values().filter(|a| Self::in_window(a, now, window_days)) {
            by_category.entry(a.category).or_default().push(a);
        }
        let categories: Vec<&Vec<&NewsArticle>> = by_category.values().collect();
        for _ in 0..MAX_ATTEMPTS {
            let pick = categories.choose(rng)?.choose(rng)?;
            if Self::passes(pick, filter) {
                return Some(pick);
            }
        }
        None
    }

    /// Uniform pick among in-window keyword matches that passes the filter.
    pub fn keyword_news<R: Rng + ?Sized>(
        &self,
        keyword: &str,
        now: DateTime<Utc>,
        window_days: i64,
        filter: &SafetyFilter,
        rng: &mut R,
    ) -> Option<&NewsArticle> {
        let matches = self.keyword_matches(keyword, now, window_days);
        for _ in 0..MAX_ATTEMPTS {
            let pick = *matches.choose(rng)?;
            if Self::passes(pick, filter) {
                return Some(pick);
            }
        }
        None
    }

    /// Writes the stored articles as JSON lines.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?);
        for a in self.articles.values() {
            serde_json::to_writer(&mut out, a)?;
            out.write_all(b"\n").map_err(|e| Error::io(&tmp, e))?;
        }
        out.flush().map_err(|e| Error::io(&tmp, e))?;
        drop(out);
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    /// Reads articles written by [`NewsStore::save`] and rebuilds the index.
    pub fn load(path: &Path, categories: Arc<CategoryTable>, lexicons: Arc<Lexicons>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut store = NewsStore::new(categories, lexicons);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let a: NewsArticle = serde_json::from_str(line)
                .map_err(|e| Error::parse(path.display().to_string(), i + 1, e.to_string()))?;
            if store.articles.contains_key(&a.id) {
                return Err(Error::Duplicate { kind: "news id", id: a.id });
            }
            let id_value: i64 = a
                .id
                .parse()
                .map_err(|_| Error::parse(path.display().to_string(), i + 1, "non-numeric article id"))?;
            store.last_id = store.last_id.max(id_value);
            store.seen.insert((store.lexicons.normalize(&a.headline).normalized, a.published_at));
            store.insert(a);
        }
        Ok(store)
    }
}
