//! Local news: ingestion with an English filter, keyword categorization,
//! lead summaries, a keyword index, and safe random or keyword queries
//! restricted to a recency window.

mod article;
mod generator;
mod store;

pub use article::{
    categorize, is_english, split_sentences, summarize, CategoryTable, NewsArticle, NewsCategory,
    RawArticle,
};
pub use generator::{NewsGenerator, NewsHandle};
pub use store::{IngestReport, NewsStore, DEFAULT_WINDOW_DAYS, MAX_ATTEMPTS};
