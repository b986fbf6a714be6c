use std::sync::{Arc, RwLock};

use super::store::{NewsStore, DEFAULT_WINDOW_DAYS};
use crate::pool::{generator_rng, GeneratorContext, GeneratorDescriptor, GeneratorKind, ResponseGenerator, NEWS};
use crate::safety::SafetyFilter;
use crate::text::Intent;

/// Shared store. Ingestion builds a new store and swaps it in whole, so
/// readers always see a consistent snapshot.
pub type NewsHandle = Arc<RwLock<Arc<NewsStore>>>;

/// Serves news on request: by keyword when one was asked for, else a
/// random recent story.
pub struct NewsGenerator {
    descriptor: GeneratorDescriptor,
    store: NewsHandle,
    filter: SafetyFilter,
    window_days: i64,
}

impl NewsGenerator {
    pub fn new(store: NewsHandle, filter: SafetyFilter, timeout_ms: u64) -> Self {
        NewsGenerator {
            descriptor: GeneratorDescriptor::new(NEWS, GeneratorKind::News, timeout_ms),
            store,
            filter,
            window_days: DEFAULT_WINDOW_DAYS,
        }
    }

    pub fn with_window_days(mut self, days: i64) -> Self {
        assert!(days > 0, "news window must be positive");
        self.window_days = days;
        self
    }
}

impl ResponseGenerator for NewsGenerator {
    fn descriptor(&self) -> &GeneratorDescriptor {
        &self.descriptor
    }

    fn generate(&self, ctx: &GeneratorContext) -> Option<String> {
        let asked = ctx.features.intent == Intent::NewsRequest || ctx.features.news_keyword.is_some();
        if !asked {
            return None;
        }
        let store = Arc::clone(&self.store.read().unwrap_or_else(|e| e.into_inner()));
        let mut rng = generator_rng(ctx.seed, NEWS);
        match &ctx.features.news_keyword {
            Some(kw) => Some(
                match store.keyword_news(kw, ctx.now, self.window_days, &self.filter, &mut rng) {
                    Some(a) => format!("Here is a news story about {kw}. {}. {}", a.headline, a.short_summary),
                    None => format!("I couldn't find any recent news about {kw}."),
                },
            ),
            None => store
                .random_news(ctx.now, self.window_days, &self.filter, &mut rng)
                .map(|a| format!("Here is a news story about {}. {}. {}", a.category.spoken(), a.headline, a.short_summary)),
        }
    }
}
