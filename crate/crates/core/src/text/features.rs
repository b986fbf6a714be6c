//! Rule-based sentiment, intent, topic and user-name extraction.

use serde::{Deserialize, Serialize};

use super::lexicon::{find_phrase, starts_with_phrase, Lexicons};
use super::{Intent, NormalizedText, Topic};
use crate::dialog::TurnRecord;

/// Features of one user utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceFeatures {
    /// In `[-1, 1]`.
    pub sentiment: f64,
    pub intent: Intent,
    pub topic: Topic,
    /// True when a topic keyword fired on this utterance (as opposed to the
    /// topic being inherited from the previous turn).
    pub topic_explicit: bool,
    pub is_question: bool,
    /// Subject of a news request ("news about baseball" -> "baseball").
    pub news_keyword: Option<String>,
}

impl Default for UtteranceFeatures {
    fn default() -> Self {
        UtteranceFeatures {
            sentiment: 0.0,
            intent: Intent::Statement,
            topic: Topic::General,
            topic_explicit: false,
            is_question: false,
            news_keyword: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayPart {
    Morning,
    Afternoon,
    Evening,
}

impl DayPart {
    pub fn greeting(self) -> &'static str {
        match self {
            DayPart::Morning => "Good morning",
            DayPart::Afternoon => "Good afternoon",
            DayPart::Evening => "Good evening",
        }
    }
}

/// Morning for 5..=11, afternoon for 12..=16, evening otherwise.
///
/// Panics when `local_hour > 23`.
pub fn greeting_for_time(local_hour: u32) -> DayPart {
    assert!(local_hour <= 23, "hour out of range: {local_hour}");
    match local_hour {
        5..=11 => DayPart::Morning,
        12..=16 => DayPart::Afternoon,
        _ => DayPart::Evening,
    }
}

const WH_WORDS: &[&str] = &[
    "what", "whats", "who", "whos", "whom", "whose", "which", "where", "wheres", "when", "why",
    "how", "hows",
];

const AUXILIARIES: &[&str] = &[
    "do", "does", "did", "is", "are", "was", "were", "am", "can", "could", "will", "would",
    "should", "shall", "have", "has", "had", "may", "might", "isnt", "arent", "dont", "doesnt",
    "didnt", "cant", "wont", "wouldnt", "couldnt", "shouldnt",
];

const GREETINGS: &[&[&str]] = &[
    &["hello"],
    &["hi"],
    &["hey"],
    &["howdy"],
    &["greetings"],
    &["good", "morning"],
    &["good", "afternoon"],
    &["good", "evening"],
];

const DONT_KNOW: &[&[&str]] = &[
    &["dont", "know"],
    &["do", "not", "know"],
    &["not", "sure"],
    &["no", "idea"],
    &["dunno"],
];

const TOPIC_SWITCH: &[&[&str]] = &[
    &["talk", "about"],
    &["change", "the", "topic"],
    &["change", "topic"],
    &["something", "else"],
    &["another", "topic"],
    &["different", "topic"],
];

const OPINION: &[&[&str]] = &[
    &["i", "think"],
    &["i", "believe"],
    &["i", "feel"],
    &["i", "like"],
    &["i", "love"],
    &["i", "prefer"],
    &["i", "hate"],
    &["my", "favorite"],
    &["my", "favourite"],
    &["in", "my", "opinion"],
];

const NAME_PATTERNS: &[&[&str]] = &[
    &["my", "name", "is"],
    &["my", "names"],
    &["i", "am"],
    &["im"],
    &["call", "me"],
];

const NEWS_WORDS: &[&str] = &["news", "headline", "headlines"];
const NEWS_PREPOSITIONS: &[&str] = &["about", "on", "regarding", "for", "concerning"];

/// Scale of the sum-of-weights squashing, as in lexicon sentiment scorers.
const SENTIMENT_ALPHA: f64 = 15.0;
/// A negation this many tokens (or fewer) before a polar word flips it.
const NEGATION_WINDOW: usize = 3;

fn owned(p: &[&str]) -> Vec<String> {
    p.iter().map(|s| s.to_string()).collect()
}

fn contains_any(tokens: &[String], phrases: &[&[&str]]) -> bool {
    phrases
        .iter()
        .any(|p| find_phrase(tokens, &owned(p)).is_some())
}

fn starts_with_any(tokens: &[String], phrases: &[&[&str]]) -> bool {
    phrases.iter().any(|p| starts_with_phrase(tokens, &owned(p)))
}

impl Lexicons {
    /// Lexicon sentiment in `[-1, 1]`; zero when no polar word occurs.
    pub fn classify_sentiment(&self, nt: &NormalizedText) -> f64 {
        let tokens = &nt.tokens;
        let mut sum = 0.0;
        for (i, tok) in tokens.iter().enumerate() {
            let Some(&weight) = self.sentiment.get(tok) else {
                continue;
            };
            let negated = tokens[i.saturating_sub(NEGATION_WINDOW)..i]
                .iter()
                .any(|t| self.is_negation(t));
            sum += if negated { -weight } else { weight };
        }
        if sum == 0.0 {
            return 0.0;
        }
        (sum / (sum * sum + SENTIMENT_ALPHA).sqrt()).clamp(-1.0, 1.0)
    }

    pub fn is_question(&self, nt: &NormalizedText) -> bool {
        if nt.raw.trim_end().ends_with('?') {
            return true;
        }
        let Some(first) = nt.tokens.first() else {
            return false;
        };
        WH_WORDS.contains(&first.as_str())
            || (AUXILIARIES.contains(&first.as_str()) && nt.tokens.len() >= 2)
    }

    fn is_affirmation(&self, tokens: &[String]) -> bool {
        self.affirmations
            .iter()
            .any(|p| starts_with_phrase(tokens, p))
    }

    fn is_denial(&self, tokens: &[String]) -> bool {
        match tokens {
            [first, ..] if matches!(first.as_str(), "no" | "nope" | "nah" | "not" | "never") => true,
            [i, second, ..] if i == "i" => {
                self.is_negation(second) || (second == "do" && tokens.get(2).is_some_and(|t| t == "not"))
            }
            _ => false,
        }
    }

    pub fn is_stop(&self, nt: &NormalizedText) -> bool {
        self.stop_phrases
            .iter()
            .any(|p| find_phrase(&nt.tokens, p).is_some())
    }

    fn classify_intent(&self, nt: &NormalizedText, is_question: bool) -> Intent {
        let t = &nt.tokens;
        if self.is_stop(nt) {
            Intent::Stop
        } else if t.iter().any(|w| NEWS_WORDS.contains(&w.as_str())) {
            Intent::NewsRequest
        } else if is_question {
            Intent::Question
        } else if contains_any(t, DONT_KNOW) {
            Intent::DontKnow
        } else if self.is_denial(t) {
            Intent::No
        } else if self.is_affirmation(t) {
            Intent::Yes
        } else if t.iter().any(|w| w == "thanks" || w == "thank") {
            Intent::Thanks
        } else if starts_with_any(t, GREETINGS) {
            Intent::Greeting
        } else if contains_any(t, TOPIC_SWITCH) {
            Intent::TopicSwitch
        } else if starts_with_any(t, OPINION) {
            Intent::Opinion
        } else {
            Intent::Statement
        }
    }

    /// Topic with the most keyword hits; ties go to the earlier table row.
    fn keyword_topic(&self, tokens: &[String]) -> Option<Topic> {
        let mut best: Option<(Topic, usize)> = None;
        for (topic, keywords) in &self.topics {
            let hits = keywords
                .iter()
                .filter(|k| find_phrase(tokens, k).is_some())
                .count();
            if hits > 0 && best.is_none_or(|(_, h)| hits > h) {
                best = Some((*topic, hits));
            }
        }
        best.map(|(t, _)| t)
    }

    fn news_keyword(&self, tokens: &[String]) -> Option<String> {
        let news_at = tokens
            .iter()
            .position(|w| NEWS_WORDS.contains(&w.as_str()))?;
        let prep_at = tokens[news_at..]
            .iter()
            .position(|w| NEWS_PREPOSITIONS.contains(&w.as_str()))?
            + news_at;
        let words: Vec<&str> = tokens[prep_at + 1..]
            .iter()
            .map(String::as_str)
            .filter(|w| !self.is_stopword(w) && !self.is_ignorable(w))
            .collect();
        (!words.is_empty()).then(|| words.join(" "))
    }

    /// Intent and topic of an utterance in the context of the conversation so
    /// far. When no topic keyword fires the previous turn's topic carries over.
    pub fn classify_intent_topic(
        &self,
        nt: &NormalizedText,
        history: &[TurnRecord],
    ) -> UtteranceFeatures {
        let is_question = self.is_question(nt);
        let intent = self.classify_intent(nt, is_question);
        let explicit = self.keyword_topic(&nt.tokens);
        let topic = explicit.unwrap_or_else(|| {
            history
                .last()
                .map(|t| t.features.topic)
                .unwrap_or(Topic::General)
        });
        UtteranceFeatures {
            sentiment: self.classify_sentiment(nt),
            intent,
            topic,
            topic_explicit: explicit.is_some(),
            is_question: is_question || intent == Intent::Question,
            news_keyword: self.news_keyword(&nt.tokens),
        }
    }

    /// Name given in reply to the name question, if any.
    pub fn extract_user_name(&self, nt: &NormalizedText) -> Option<String> {
        let tokens = &nt.tokens;
        for pattern in NAME_PATTERNS {
            let pattern = owned(pattern);
            if let Some(at) = find_phrase(tokens, &pattern) {
                let rest = &tokens[at + pattern.len()..];
                let mask = &nt.ignorable_mask[at + pattern.len()..];
                let start = mask.iter().position(|&ig| !ig)?;
                let len = mask[start..]
                    .iter()
                    .take_while(|&&ig| !ig)
                    .count();
                return Some(rest[start..start + len].join(" "));
            }
        }
        match (tokens.as_slice(), nt.ignorable_mask.as_slice()) {
            ([only], [false])
                if !self.is_affirmation(tokens) && !self.is_negation(only) && !self.is_stopword(only) =>
            {
                Some(only.clone())
            }
            _ => None,
        }
    }
}
