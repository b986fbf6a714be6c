//! Sensitive-content filtering for user utterances and bot replies.
//!
//! A phrase from any of the thirteen category blacklists makes text
//! sensitive unless it is exempted: tokens inside a strongly matched named
//! entity are atomic, whitelisted phrases are masked, and factual questions
//! are let through on the input side.

mod filter;
mod jokes;
mod lexicon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use filter::{FactualClassifier, RuleFactualClassifier, SafetyFilter, ATOMIC_ENTITY_MIN_SCORE};
pub use jokes::{Joke, JokeBook, JokeHistory};
pub use lexicon::SensitiveLexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Alcohol,
    Disability,
    Finance,
    Law,
    Emergency,
    Medicine,
    Politics,
    Psychology,
    Religion,
    Sex,
    Society,
    Violence,
    Offensive,
}

impl Category {
    pub const ALL: [Category; 13] = [
        Category::Alcohol,
        Category::Disability,
        Category::Finance,
        Category::Law,
        Category::Emergency,
        Category::Medicine,
        Category::Politics,
        Category::Psychology,
        Category::Religion,
        Category::Sex,
        Category::Society,
        Category::Violence,
        Category::Offensive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Alcohol => "alcohol",
            Category::Disability => "disability",
            Category::Finance => "finance",
            Category::Law => "law",
            Category::Emergency => "emergency",
            Category::Medicine => "medicine",
            Category::Politics => "politics",
            Category::Psychology => "psychology",
            Category::Religion => "religion",
            Category::Sex => "sex",
            Category::Society => "society",
            Category::Violence => "violence",
            Category::Offensive => "offensive",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown sensitive category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exemption {
    Whitelist,
    FactualQuestion,
    AtomicEntity,
    Covid,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub blocked: bool,
    pub category: Option<Category>,
    pub trigger_phrase: Option<String>,
    /// Why a sensitive phrase was let through.
    pub exemption: Option<Exemption>,
}

impl Verdict {
    pub fn clean() -> Self {
        Verdict::default()
    }

    pub fn exempt(exemption: Exemption) -> Self {
        Verdict {
            exemption: Some(exemption),
            ..Verdict::default()
        }
    }

    pub fn blocked(category: Category, trigger: impl Into<String>) -> Self {
        Verdict {
            blocked: true,
            category: Some(category),
            trigger_phrase: Some(trigger.into()),
            exemption: None,
        }
    }
}
