//! Text normalization and conversational feature extraction.

mod features;
mod lexicon;
mod normalize;
pub mod numerals;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use features::{greeting_for_time, DayPart, UtteranceFeatures};
pub use lexicon::{LexiconPaths, Lexicons};
pub use normalize::fold_char;

/// An utterance rendered as spoken English.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NormalizedText {
    pub raw: String,
    pub normalized: String,
    pub tokens: Vec<String>,
    pub ignorable_mask: Vec<bool>,
}

impl NormalizedText {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Tokens that carry content (not pronouns, wh-words or common verbs).
    pub fn content_tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .zip(&self.ignorable_mask)
            .filter(|(_, &ignorable)| !ignorable)
            .map(|(t, _)| t.as_str())
    }

    /// Character offset of each token in `normalized`.
    pub fn token_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.tokens.len());
        let mut pos = 0;
        for t in &self.tokens {
            offsets.push(pos);
            pos += t.len() + 1;
        }
        offsets
    }
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "SCREAMING_SNAKE_CASE")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let s = s.trim();
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.label().eq_ignore_ascii_case(s))
                    .ok_or_else(|| format!("unknown {} `{}`", stringify!($name).to_lowercase(), s))
            }
        }
    };
}

label_enum! {
    /// Dialog act of a user utterance.
    Intent {
        Yes => "YES",
        No => "NO",
        Question => "QUESTION",
        Stop => "STOP",
        Statement => "STATEMENT",
        Greeting => "GREETING",
        Thanks => "THANKS",
        NewsRequest => "NEWS_REQUEST",
        TopicSwitch => "TOPIC_SWITCH",
        Opinion => "OPINION",
        DontKnow => "DONT_KNOW",
    }
}

label_enum! {
    /// Broad conversation topic.
    Topic {
        Movie => "MOVIE",
        Book => "BOOK",
        Music => "MUSIC",
        Sport => "SPORT",
        Tech => "TECH",
        Pets => "PETS",
        Family => "FAMILY",
        News => "NEWS",
        Travel => "TRAVEL",
        Covid => "COVID",
        General => "GENERAL",
    }
}

impl Topic {
    /// Topics cycled by the outer conversation loop, each backed by a template.
    pub const LOOP: [Topic; 7] = [
        Topic::Movie,
        Topic::Book,
        Topic::Music,
        Topic::Sport,
        Topic::Tech,
        Topic::Pets,
        Topic::Family,
    ];

    pub fn is_loop_topic(self) -> bool {
        Topic::LOOP.contains(&self)
    }
}

/// Stored facts about a returning user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub device_id: String,
    pub name: Option<String>,
    /// IANA zone name, e.g. `America/Chicago`.
    pub timezone: Option<String>,
}

impl UserProfile {
    pub fn new(device_id: impl Into<String>) -> Self {
        let device_id = device_id.into();
        assert!(!device_id.is_empty(), "device id must be non-empty");
        UserProfile {
            device_id,
            name: None,
            timezone: None,
        }
    }
}

/// Normalizes with the built-in lexicons.
pub fn normalize(text: &str) -> NormalizedText {
    Lexicons::builtin().normalize(text)
}
