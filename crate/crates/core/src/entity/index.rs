use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::keys::kgram_keys;
use super::lcs::lcs_length;
use super::score::score;
use super::{EntityRecord, EntityType, MatchCandidate};
use crate::text::{Lexicons, NormalizedText};
use crate::{Error, Exec, Result};

/// Upper bound on the entities scored with LCS per retrieval; the ones with
/// the most key hits are kept.
pub const CANDIDATE_CAP: usize = 256;

/// Immutable k-gram index over an entity corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchIndex {
    /// Sorted by id; positions are the internal entity handles.
    records: Vec<EntityRecord>,
    key_map: HashMap<String, Vec<u32>>,
    max_key_tokens: usize,
    stopwords: HashSet<String>,
    #[serde(skip)]
    exec: Exec,
}

impl PartialEq for SearchIndex {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records && self.key_map == other.key_map
    }
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    count: u32,
    /// Token range (inclusive start, exclusive end) of the longest hit.
    span: (usize, usize),
}

impl Hit {
    fn record(&mut self, span: (usize, usize)) {
        self.count += 1;
        let cur = self.span.1 - self.span.0;
        let new = span.1 - span.0;
        if new > cur || (new == cur && span.0 < self.span.0) {
            self.span = span;
        }
    }
}

impl SearchIndex {
    pub fn empty() -> Self {
        SearchIndex {
            records: Vec::new(),
            key_map: HashMap::new(),
            max_key_tokens: 0,
            stopwords: Lexicons::builtin().stopwords().clone(),
            exec: Exec::default(),
        }
    }

    /// Builds the index with the shipped stop-word list.
    pub fn build(records: Vec<EntityRecord>) -> Result<Self> {
        Self::build_with(records, Lexicons::builtin(), Exec::default())
    }

    pub fn build_with(mut records: Vec<EntityRecord>, lexicons: &Lexicons, exec: Exec) -> Result<Self> {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Duplicate {
                kind: "entity id",
                id: w[0].id.clone(),
            });
        }
        let stopwords = lexicons.stopwords().clone();
        let per_record: Vec<Vec<String>> = exec.map(&records, |r| {
            kgram_keys(&r.normalized_name.tokens, &stopwords)
                .into_iter()
                .collect()
        });
        let mut key_map: HashMap<String, Vec<u32>> = HashMap::new();
        let mut max_key_tokens = 0;
        for (idx, keys) in per_record.into_iter().enumerate() {
            for key in keys {
                max_key_tokens = max_key_tokens.max(key.split(' ').count());
                key_map.entry(key).or_default().push(idx as u32);
            }
        }
        // records are visited in id order, so postings are already sorted
        Ok(SearchIndex {
            records,
            key_map,
            max_key_tokens,
            stopwords,
            exec,
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn key_count(&self) -> usize {
        self.key_map.len()
    }

    pub fn records(&self) -> &[EntityRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&EntityRecord> {
        self.records
            .binary_search_by(|r| r.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.records[i])
    }

    /// Ids stored under `key`, in id order.
    pub fn lookup(&self, key: &str) -> Vec<&str> {
        self.key_map
            .get(key)
            .map(|ids| ids.iter().map(|&i| self.records[i as usize].id.as_str()).collect())
            .unwrap_or_default()
    }

    /// Every `(key, id)` pair, for invariant checks.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &EntityRecord)> {
        self.key_map.iter().flat_map(move |(k, ids)| {
            ids.iter()
                .map(move |&i| (k.as_str(), &self.records[i as usize]))
        })
    }

    fn collect_hits(
        &self,
        positions: &[usize],
        tokens: &[String],
        mask: &[bool],
        hits: &mut HashMap<u32, Hit>,
    ) {
        let n = positions.len();
        let mut key = String::new();
        for i in 0..n {
            key.clear();
            let mut all_ignorable = true;
            for k in 1..=self.max_key_tokens.min(n - i) {
                let pos = positions[i + k - 1];
                if k > 1 {
                    key.push(' ');
                }
                key.push_str(&tokens[pos]);
                all_ignorable &= mask[pos];
                if all_ignorable {
                    continue;
                }
                if let Some(ids) = self.key_map.get(&key) {
                    let span = (positions[i], pos + 1);
                    for &id in ids {
                        hits.entry(id)
                            .or_insert(Hit { count: 0, span })
                            .record(span);
                    }
                }
            }
        }
    }

    /// Ranked entities mentioned in `utterance`.
    ///
    /// Keys are looked up for every contiguous k-gram of the utterance (and of
    /// its stop-word-free form) that is not made only of ignorable tokens. The
    /// `CANDIDATE_CAP` entities with the most hits are scored by character LCS
    /// and ranked by the heuristic for their type; ties go to the larger
    /// ranking attribute, then the smaller id.
    pub fn retrieve(
        &self,
        utterance: &NormalizedText,
        type_filter: Option<&HashSet<EntityType>>,
        limit: usize,
    ) -> Vec<MatchCandidate> {
        assert!(limit >= 1, "limit must be positive");
        let tokens = &utterance.tokens;
        if tokens.is_empty() || self.records.is_empty() {
            return Vec::new();
        }
        let mask = &utterance.ignorable_mask;
        let mut hits: HashMap<u32, Hit> = HashMap::new();
        let all: Vec<usize> = (0..tokens.len()).collect();
        self.collect_hits(&all, tokens, mask, &mut hits);
        let content: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&i| !self.stopwords.contains(&tokens[i]))
            .collect();
        if content.len() < all.len() {
            self.collect_hits(&content, tokens, mask, &mut hits);
        }

        let mut pool: Vec<(u32, Hit)> = hits
            .into_iter()
            .filter(|(id, _)| {
                type_filter.is_none_or(|f| f.contains(&self.records[*id as usize].entity_type))
            })
            .collect();
        pool.sort_by(|a, b| b.1.count.cmp(&a.1.count).then(a.0.cmp(&b.0)));
        pool.truncate(CANDIDATE_CAP);

        let offsets = utterance.token_offsets();
        let text = &utterance.normalized;
        let mut ranked: Vec<(u32, MatchCandidate)> = self.exec.map(&pool, |&(id, hit)| {
            let entity = &self.records[id as usize];
            let name = &entity.normalized_name.normalized;
            let s = lcs_length(name, text) as f64 / name.chars().count() as f64;
            let l = entity.token_len();
            let h = score(s, l, entity.ranking_attribute, entity.entity_type.score_kind());
            let start = offsets[hit.span.0];
            let end = offsets[hit.span.1 - 1] + tokens[hit.span.1 - 1].len();
            (
                id,
                MatchCandidate {
                    entity: entity.clone(),
                    score: s,
                    length: l,
                    rank: h,
                    matched_span: start..end,
                },
            )
        });
        ranked.sort_by(|(ia, a), (ib, b)| {
            b.rank
                .total_cmp(&a.rank)
                .then_with(|| {
                    let ra = a.entity.ranking_attribute.unwrap_or(-1.0);
                    let rb = b.entity.ranking_attribute.unwrap_or(-1.0);
                    rb.total_cmp(&ra)
                })
                .then(ia.cmp(ib))
        });
        ranked.truncate(limit);
        ranked.into_iter().map(|(_, c)| c).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::normalize;

    fn rec(id: &str, name: &str, ty: EntityType, r: Option<f64>) -> EntityRecord {
        EntityRecord::new(id, name, ty, r, "test").unwrap()
    }

    fn movie(id: &str, name: &str, votes: f64) -> EntityRecord {
        rec(id, name, EntityType::Movie, Some(votes))
    }

    #[test]
    fn empty_index() {
        let idx = SearchIndex::build(vec![]).unwrap();
        assert!(idx.is_empty());
        assert!(idx.retrieve(&normalize("titanic"), None, 5).is_empty());
    }

    #[test]
    fn single_record_lookup() {
        let idx = SearchIndex::build(vec![movie("tt1", "Titanic", 1e6)]).unwrap();
        assert_eq!(idx.lookup("titanic"), vec!["tt1"]);
        assert_eq!(idx.lookup("titanics"), vec!["tt1"]);
    }

    #[test]
    fn shared_bigram_maps_to_both() {
        let idx = SearchIndex::build(vec![
            movie("m2", "The Matrix Reloaded", 5e5),
            movie("m1", "The Matrix", 1.8e6),
        ])
        .unwrap();
        assert_eq!(idx.lookup("the matrix"), vec!["m1", "m2"]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = SearchIndex::build(vec![movie("x", "Up", 1.0), movie("x", "Cars", 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }));
    }

    #[test]
    fn order_independent() {
        let a = vec![movie("a", "Alien", 9e5), movie("b", "Aliens", 7e5), movie("c", "Avatar", 1.2e6)];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(SearchIndex::build(a).unwrap(), SearchIndex::build(b).unwrap());
    }

    #[test]
    fn verbatim_mention_scores_one() {
        let idx = SearchIndex::build(vec![movie("tt1", "Titanic", 1.1e6), movie("tt2", "Avatar", 1.2e6)]).unwrap();
        let got = idx.retrieve(&normalize("I watched Titanic yesterday"), None, 5);
        assert_eq!(got[0].entity.id, "tt1");
        assert_eq!(got[0].score, 1.0);
        assert_eq!(got[0].length, 1);
    }

    #[test]
    fn matched_span_covers_phrase() {
        let idx = SearchIndex::build(vec![rec("a1", "James Bond", EntityType::MovieActor, Some(5e4))]).unwrap();
        let nt = normalize("james bond movies");
        let got = idx.retrieve(&nt, None, 5);
        assert_eq!(got.len(), 1);
        assert_eq!(&nt.normalized[got[0].matched_span.clone()], "james bond");
        assert_eq!(got[0].score, 1.0);
    }

    #[test]
    fn type_filter_applies() {
        let idx = SearchIndex::build(vec![
            movie("m", "Frozen", 6e5),
            rec("s", "Frozen", EntityType::Music, Some(50.0)),
        ])
        .unwrap();
        let only_music: HashSet<_> = [EntityType::Music].into();
        let got = idx.retrieve(&normalize("frozen"), Some(&only_music), 5);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].entity.id, "s");
    }

    #[test]
    fn ranking_uses_log_votes_and_length() {
        // h_a = ln(1e6) = 13.8155..., h_b = sqrt(3) * ln(1e4) = 15.9527...
        let idx = SearchIndex::build(vec![
            movie("a", "Zephyr", 1e6),
            movie("b", "Quill Harbor Nights", 1e4),
        ])
        .unwrap();
        let got = idx.retrieve(&normalize("zephyr and quill harbor nights"), None, 5);
        assert_eq!(got[0].entity.id, "b");
        assert!((got[0].rank - 15.952_777_479_265_58).abs() < 1e-9);
        assert!((got[1].rank - 13.815_510_557_964_274).abs() < 1e-9);
    }

    #[test]
    fn ignorable_only_kgrams_skipped() {
        let idx = SearchIndex::build(vec![rec("x", "Who Are You", EntityType::Music, Some(80.0))]).unwrap();
        assert!(idx.retrieve(&normalize("who are you"), None, 3).is_empty());
    }

    #[test]
    fn stopword_dropped_mention() {
        let idx = SearchIndex::build(vec![movie("lotr", "The Lord of the Rings", 1.9e6)]).unwrap();
        let got = idx.retrieve(&normalize("i liked lord rings a lot"), None, 3);
        assert_eq!(got[0].entity.id, "lotr");
        assert!(got[0].score > 0.4);
    }

    #[test]
    fn typo_scores_below_one() {
        let idx = SearchIndex::build(vec![movie("tt1", "Titanic", 1e6), movie("tt9", "Titanik", 10.0)]).unwrap();
        let got = idx.retrieve(&normalize("titanik"), None, 5);
        let titanic = got.iter().find(|c| c.entity.id == "tt1");
        // "titanik" is not a key of "titanic", only the exact record is found
        assert!(titanic.is_none());
        assert_eq!(got[0].entity.id, "tt9");
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let records: Vec<_> = (0..300)
            .map(|i| movie(&format!("m{i:03}"), &format!("Star Quest {i}"), 1000.0 + i as f64))
            .collect();
        let seq = SearchIndex::build_with(records.clone(), Lexicons::builtin(), Exec::Sequential).unwrap();
        let par = SearchIndex::build_with(records, Lexicons::builtin(), Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        let nt = normalize("have you seen star quest 42");
        assert_eq!(seq.retrieve(&nt, None, 10), par.retrieve(&nt, None, 10));
    }
}
