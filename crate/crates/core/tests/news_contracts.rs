use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use convo_core::news::{NewsCategory, NewsStore};
use convo_core::pool::is_pronounceable;
use convo_core::safety::SafetyFilter;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn now() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 12, 0, 0).unwrap()
}

fn fixture() -> NewsStore {
    let mut store = NewsStore::builtin();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/news100.jsonl");
    let report = store.ingest_file(&path, now()).unwrap();
    assert_eq!((report.ingested, report.non_english, report.malformed, report.duplicates), (85, 12, 3, 0));
    store
}

fn shared() -> &'static NewsStore {
    static STORE: std::sync::OnceLock<NewsStore> = std::sync::OnceLock::new();
    STORE.get_or_init(fixture)
}

#[test]
fn fixture_stores_only_clean_english() {
    let store = fixture();
    for a in store.articles() {
        assert_eq!(a.language, "en");
        for field in [&a.headline, &a.body, &a.short_summary, &a.long_summary] {
            assert!(field.chars().all(is_pronounceable), "{field:?}");
            assert!(!field.contains(['#', '~']));
        }
        assert!(a.long_summary.starts_with(&a.short_summary));
        assert!(!a.headline.starts_with("El ") && !a.headline.starts_with("La "));
    }
    let cats: std::collections::BTreeSet<NewsCategory> = store.articles().map(|a| a.category).collect();
    assert_eq!(cats.len(), 4);
}

#[test]
fn reingest_is_idempotent() {
    let mut store = fixture();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/news100.jsonl");
    let r = store.ingest_file(&path, now() + Duration::hours(1)).unwrap();
    assert_eq!((r.ingested, r.duplicates), (0, 85));
    assert_eq!(store.len(), 85);
}

#[test]
fn random_news_is_recent_and_safe() {
    let store = fixture();
    let filter = SafetyFilter::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..2000 {
        let a = store.random_news(now(), 30, &filter, &mut rng).expect("fixture has clean recent news");
        assert!(a.published_at >= now() - Duration::days(30) && a.published_at <= now());
        for t in [&a.headline, &a.short_summary, &a.long_summary] {
            assert!(!filter.check_response(t).blocked);
        }
        seen.insert(a.category);
    }
    assert_eq!(seen.len(), 4);
}

#[test]
fn baseball_queries_only_return_matches() {
    let store = fixture();
    let filter = SafetyFilter::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let matches = store.keyword_matches("baseball", now(), 30);
    assert!(matches.len() >= 3);
    for _ in 0..500 {
        let a = store.keyword_news("baseball", now(), 30, &filter, &mut rng).unwrap();
        let text = format!("{} {}", a.headline, a.body).to_lowercase();
        assert!(text.contains("baseball") || a.keywords.contains("baseball"));
        assert!(a.published_at >= now() - Duration::days(30));
    }
    assert!(store.keyword_news("cricket", now(), 30, &filter, &mut rng).is_none());
    // the only downtown story is a shooting
    assert!(store.keyword_news("downtown shooting", now(), 60, &filter, &mut rng).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn headline_tokens_retrieve_their_article(pick in 0usize..85, days in 1i64..90) {
        let store = shared();
        let a = store.articles().nth(pick).unwrap();
        let lx = convo_core::text::Lexicons::builtin();
        for token in lx.normalize(&a.headline).tokens.iter().filter(|t| !lx.is_stopword(t)) {
            let window = (now() - a.published_at).num_days() + days;
            let hits = store.keyword_matches(token, now(), window);
            prop_assert!(hits.iter().any(|h| h.id == a.id), "token {token} misses {}", a.headline);
        }
    }

    #[test]
    fn no_query_leaves_the_window(seed in any::<u64>(), window in 1i64..40) {
        let store = shared();
        let filter = SafetyFilter::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let oldest = now() - Duration::days(window);
        if let Some(a) = store.random_news(now(), window, &filter, &mut rng) {
            prop_assert!(a.published_at >= oldest);
        }
        for kw in ["baseball", "team", "market", "senate"] {
            if let Some(a) = store.keyword_news(kw, now(), window, &filter, &mut rng) {
                prop_assert!(a.published_at >= oldest);
                prop_assert!(!filter.check_response(&a.headline).blocked);
            }
        }
    }
}
