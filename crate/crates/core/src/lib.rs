//! Conversational dialog engine.
//!
//! The crate is organised around the turn pipeline:
//!
//! * [`text`] normalizes utterances to spoken English and extracts features
//!   (sentiment, intent, topic, user name).
//! * [`entity`] retrieves named entities from utterances through a k-gram
//!   index scored with character LCS.
//! * [`safety`] decides whether an utterance or a candidate reply is sensitive.
//! * [`ckt`] runs conversational knowledge templates (the movie template and
//!   declarative mini templates).
//! * [`pool`] gathers candidate replies from generators and ranks them.
//! * [`news`] ingests and serves a local news corpus.
//! * [`dialog`] drives the outer topic loop and the whole turn.
//! * [`store`] persists sessions, turns and user profiles.

pub mod ckt;
pub mod config;
pub mod dialog;
pub mod entity;
mod error;
pub mod exec;
pub mod news;
pub mod pool;
pub mod safety;
pub mod store;
pub mod text;

pub use error::{Error, Result};
pub use exec::Exec;
