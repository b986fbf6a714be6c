//! Conversational knowledge templates.
//!
//! [`MovieCkt`] walks a shuffled stack of movie attributes and pivots to a
//! related movie once the stack runs dry. Topics without a database use
//! [`MiniCktSpec`]: an ordered list of dialogs, each with several phrasings.

mod mini;
mod movie;

pub use mini::{
    builtin_specs, load_ckt_specs, mini_ckt_respond, parse_spec, CktLibrary, EntityHook,
    MiniCktSpec, MiniCktState, MiniOutcome,
};
pub use movie::{
    load_movies, parse_movies, Attribute, MovieCkt, MovieCktState, MovieDb, MovieRecord,
    Question, QuestionKind, DEFAULT_SEED_COUNT, P_GENERIC,
};
