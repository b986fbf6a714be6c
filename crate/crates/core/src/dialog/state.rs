use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ckt::{MiniCktState, MovieCktState};
use crate::entity::MatchCandidate;
use crate::safety::JokeHistory;
use crate::text::{Intent, Lexicons, NormalizedText, Topic, UserProfile, UtteranceFeatures};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn_index: u64,
    pub user_text: String,
    pub features: UtteranceFeatures,
    pub entities: Vec<MatchCandidate>,
    pub chosen_generator: String,
    pub response_text: String,
    pub latency_ms: f64,
}

/// Everything the engine knows about one conversation. `history` is not
/// part of the persisted snapshot; stores keep turns separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub profile: UserProfile,
    pub topic_current: Option<Topic>,
    /// Topic stack; the next topic is popped from the end.
    pub ts: Vec<Topic>,
    /// Topic-driven turns left before the topic changes.
    pub c: u32,
    pub movie_state: MovieCktState,
    /// Keyed by template topic, e.g. `book` or `travel-italy`.
    pub mini_states: BTreeMap<String, MiniCktState>,
    /// Template currently serving a topic when it differs from the default,
    /// e.g. travel after chaining from Italy to France.
    #[serde(default)]
    pub active_specs: BTreeMap<Topic, String>,
    #[serde(skip)]
    pub history: Vec<TurnRecord>,
    pub consecutive_offense: u32,
    pub awaiting_name: bool,
    #[serde(default)]
    pub jokes: JokeHistory,
    /// Seed of the per-turn random streams.
    pub seed: u64,
    /// Index the next turn will get.
    pub next_turn: u64,
    /// Turn index at which `topic_current` was entered.
    #[serde(default)]
    pub topic_since: u64,
    pub ended: bool,
    pub created_at: DateTime<Utc>,
    pub last_active: DateTime<Utc>,
}

impl SessionState {
    pub fn new(session_id: impl Into<String>, profile: UserProfile, seed: u64, now: DateTime<Utc>) -> Self {
        SessionState {
            session_id: session_id.into(),
            profile,
            topic_current: None,
            ts: Vec::new(),
            c: 0,
            movie_state: MovieCktState::default(),
            mini_states: BTreeMap::new(),
            active_specs: BTreeMap::new(),
            history: Vec::new(),
            consecutive_offense: 0,
            awaiting_name: false,
            jokes: JokeHistory::default(),
            seed,
            next_turn: 0,
            topic_since: 0,
            ended: false,
            created_at: now,
            last_active: now,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GlobalIntent {
    Welcome,
    Continue,
    End,
}

/// END on a stop phrase or STOP intent, WELCOME on the first turn, else
/// CONTINUE. A user who opens with "goodbye" gets the farewell.
pub fn global_intent(nt: &NormalizedText, intent: Intent, state: &SessionState, lexicons: &Lexicons) -> GlobalIntent {
    if intent == Intent::Stop || lexicons.is_stop(nt) {
        GlobalIntent::End
    } else if state.next_turn == 0 {
        GlobalIntent::Welcome
    } else {
        GlobalIntent::Continue
    }
}

/// Maximum content tokens in a reply that still reads as disengaged.
const BORED_MAX_TOKENS: usize = 3;

/// True when the last two user turns were both short and not positive.
pub fn boredom_check(turns: &[TurnRecord], lexicons: &Lexicons) -> bool {
    let [.., a, b] = turns else {
        return false;
    };
    [a, b].iter().all(|t| {
        let nt = lexicons.normalize(&t.user_text);
        nt.content_tokens().count() <= BORED_MAX_TOKENS && t.features.sentiment <= 0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn turn(text: &str) -> TurnRecord {
        let lx = Lexicons::builtin();
        let nt = lx.normalize(text);
        TurnRecord {
            turn_index: 0,
            user_text: text.into(),
            features: lx.classify_intent_topic(&nt, &[]),
            entities: vec![],
            chosen_generator: String::new(),
            response_text: String::new(),
            latency_ms: 0.0,
        }
    }

    #[test]
    fn boredom() {
        let lx = Lexicons::builtin();
        assert!(boredom_check(&[turn("no"), turn("okay")], lx));
        assert!(boredom_check(&[turn("i love it"), turn("no"), turn("meh")], lx));
        assert!(!boredom_check(&[turn("no")], lx));
        assert!(!boredom_check(&[], lx));
        assert!(!boredom_check(
            &[turn("no"), turn("wow i absolutely loved that movie, the ending was amazing and so fun")],
            lx
        ));
    }

    #[test]
    fn global_intents() {
        let lx = Lexicons::builtin();
        let mut s = SessionState::new("s", UserProfile::new("d"), 1, Utc::now());
        let gi = |t: &str, s: &SessionState| {
            let nt = lx.normalize(t);
            let f = lx.classify_intent_topic(&nt, &[]);
            global_intent(&nt, f.intent, s, lx)
        };
        assert_eq!(gi("hello", &s), GlobalIntent::Welcome);
        s.next_turn = 3;
        assert_eq!(gi("stop", &s), GlobalIntent::End);
        assert_eq!(gi("goodbye", &s), GlobalIntent::End);
        assert_eq!(gi("exit", &s), GlobalIntent::End);
        assert_eq!(gi("let's keep talking", &s), GlobalIntent::Continue);
    }
}
