use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::state::SessionState;
use crate::ckt::{mini_ckt_respond, CktLibrary, MiniCktState, MovieCkt, MovieCktState};
use crate::entity::MatchCandidate;
use crate::pool::{
    build_response, gather, rank_polynomial, score_metrics, CandidateResponse, GeneratorContext, GeneratorKind,
    PriorityTable, RankerWeights, ResponseGenerator, ScoringContext, MINI_CKT, MOVIE_CKT,
};
use crate::safety::{SafetyFilter, Verdict};
use crate::text::{Intent, Lexicons, NormalizedText, Topic, UtteranceFeatures};
use crate::Exec;

/// Said when every candidate was empty or failed the output filter.
pub const FALLBACK_TEXT: &str = "I'm not sure what to say about that. What else would you like to talk about?";
pub const FALLBACK: &str = "fallback";

/// Shared, read-only pieces of the topic loop.
pub struct OuterLoop {
    pub lexicons: Arc<Lexicons>,
    pub movie: Arc<MovieCkt>,
    pub library: Arc<CktLibrary>,
    /// Template serving each non-movie topic by default.
    pub topic_specs: BTreeMap<Topic, String>,
    pub generators: Vec<Arc<dyn ResponseGenerator>>,
    pub table: Arc<PriorityTable>,
    pub weights: RankerWeights,
    pub filter: SafetyFilter,
    /// Topics cycled by the loop.
    pub topics: Vec<Topic>,
    /// Topic-driven turns per topic.
    pub turns_per_topic: u32,
    pub exec: Exec,
    pub max_chars: usize,
}

impl OuterLoop {
    /// `book`, `music`, ... for the loop topics and `travel-italy` for travel.
    pub fn default_topic_specs() -> BTreeMap<Topic, String> {
        let mut m: BTreeMap<Topic, String> = Topic::LOOP
            .iter()
            .filter(|t| **t != Topic::Movie)
            .map(|t| (*t, t.label().to_lowercase()))
            .collect();
        m.insert(Topic::Travel, "travel-italy".into());
        m
    }

    fn spec_for(&self, state: &SessionState, topic: Topic) -> Option<String> {
        state
            .active_specs
            .get(&topic)
            .or_else(|| self.topic_specs.get(&topic))
            .filter(|s| self.library.contains(s))
            .cloned()
    }

    /// Whether the topic has a template the loop can dispatch to.
    pub fn has_ckt(&self, state: &SessionState, topic: Topic) -> bool {
        topic == Topic::Movie || self.spec_for(state, topic).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Dispatched to the current topic's template.
    Ckt,
    /// Answered from the fallback pool only.
    Pool,
}

/// Template updates held back until the template's reply is chosen.
#[derive(Debug, Clone)]
enum CktPatch {
    Movie(MovieCktState),
    Mini { topic: Topic, spec: String, states: Vec<MiniCktState> },
}

impl CktPatch {
    fn apply(self, state: &mut SessionState) {
        match self {
            CktPatch::Movie(m) => state.movie_state = m,
            CktPatch::Mini { topic, spec, states } => {
                for s in states {
                    state.mini_states.insert(s.topic.clone(), s);
                }
                state.active_specs.insert(topic, spec);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub text: String,
    pub generator: String,
    pub route: Route,
    /// Topic the turn was about: the dispatched topic on template turns,
    /// the utterance's topic otherwise.
    pub topic: Topic,
    pub topic_changed: bool,
    /// Output-side verdicts for every candidate that was checked, in order.
    pub verdicts: Vec<(String, Verdict)>,
}

/// True when the utterance belongs to the topic loop. News requests and
/// news, COVID or general questions go to the pool, as do questions about a
/// topic other than the current one.
pub fn is_predefined(features: &UtteranceFeatures, topic_current: Option<Topic>) -> bool {
    if features.intent == Intent::NewsRequest
        || features.news_keyword.is_some()
        || matches!(features.topic, Topic::News | Topic::Covid)
    {
        return false;
    }
    if features.is_question {
        return Some(features.topic) == topic_current;
    }
    true
}

/// Pops the next topic when none is active or the counter ran out. The
/// stack is refilled with a fresh shuffle only once it is empty, and a
/// refill never starts with the topic that just ended.
pub fn advance_topic<R: Rng + ?Sized>(state: &mut SessionState, topics: &[Topic], n: u32, rng: &mut R) -> bool {
    assert!(n > 0, "turns per topic must be positive");
    assert!(!topics.is_empty(), "no loop topics");
    if state.topic_current.is_some() && state.c > 0 {
        return false;
    }
    let previous = state.topic_current;
    if state.ts.is_empty() {
        let mut ts = topics.to_vec();
        ts.shuffle(rng);
        if ts.len() > 1 && ts.last().copied() == previous {
            let last = ts.len() - 1;
            ts.swap(0, last);
        }
        state.ts = ts;
    }
    state.topic_current = state.ts.pop();
    state.c = n;
    true
}

/// Table order for `(intent, topic)` first, then the rest by weighted score.
pub fn order_candidates(
    mut rest: Vec<CandidateResponse>,
    intent: Intent,
    topic: Topic,
    table: &PriorityTable,
    weights: &RankerWeights,
) -> Vec<CandidateResponse> {
    let mut out = Vec::with_capacity(rest.len());
    for name in table.lookup(intent, topic).unwrap_or_default() {
        if let Some(i) = rest.iter().position(|c| &c.generator == name) {
            out.push(rest.remove(i));
        }
    }
    while !rest.is_empty() {
        let best = rank_polynomial(&rest, weights).generator.clone();
        let i = rest.iter().position(|c| c.generator == best).expect("ranked candidate is present");
        out.push(rest.remove(i));
    }
    out
}

struct Dispatch<'a> {
    ol: &'a OuterLoop,
    nt: &'a NormalizedText,
    features: &'a UtteranceFeatures,
    entities: &'a [MatchCandidate],
}

impl Dispatch<'_> {
    fn movie(&self, state: &SessionState, rng: &mut ChaCha8Rng) -> (Option<String>, CktPatch) {
        let (text, s) = self.ol.movie.turn(&state.movie_state, self.nt, self.features.intent, self.entities, rng);
        (Some(text), CktPatch::Movie(s))
    }

    fn mini(&self, state: &SessionState, topic: Topic, entered: bool, rng: &mut ChaCha8Rng) -> Option<(Option<String>, CktPatch)> {
        let spec_name = self.ol.spec_for(state, topic)?;
        let spec = self.ol.library.get(&spec_name)?;
        let mut current = state.mini_states.get(&spec_name).cloned().unwrap_or_else(|| MiniCktState::new(&spec_name));
        if entered && current.exhausted {
            current = MiniCktState::new(&spec_name);
        }
        let out = mini_ckt_respond(spec, &current, self.features, self.nt, self.entities, rng);
        let mut states = vec![out.state];
        let mut spec_used = spec_name;
        let mut text = out.text;
        if let Some(next) = out.chain_to.filter(|n| self.ol.library.contains(n)) {
            let next_spec = self.ol.library.get(&next).expect("checked above");
            let fresh = MiniCktState::new(&next);
            let chained = mini_ckt_respond(next_spec, &fresh, self.features, self.nt, self.entities, rng);
            text = chained.text;
            states.push(chained.state);
            spec_used = next;
        }
        Some((text, CktPatch::Mini { topic, spec: spec_used, states }))
    }
}

/// One pass of the topic loop. Mutates the topic bookkeeping in `state`
/// and, when a template reply wins, that template's state.
#[allow(clippy::too_many_arguments)]
pub fn outer_loop_step(
    ol: &OuterLoop,
    state: &mut SessionState,
    nt: &NormalizedText,
    features: &UtteranceFeatures,
    entities: &[MatchCandidate],
    bored: bool,
    now: DateTime<Utc>,
    turn_seed: u64,
) -> StepOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(turn_seed);
    let previous_bot = state.history.last().map(|t| t.response_text.clone());
    let route = if is_predefined(features, state.topic_current) { Route::Ckt } else { Route::Pool };
    let mut topic = features.topic;
    let mut changed = false;
    let mut ckt: Option<(CandidateResponse, CktPatch)> = None;

    if route == Route::Ckt {
        let switch = features.topic_explicit
            && Some(features.topic) != state.topic_current
            && ol.has_ckt(state, features.topic);
        if switch {
            state.topic_current = Some(features.topic);
            state.c = ol.turns_per_topic;
            state.ts.retain(|t| *t != features.topic);
            changed = true;
        } else {
            if bored && state.topic_current.is_some() {
                state.c = 0;
            }
            changed = advance_topic(state, &ol.topics, ol.turns_per_topic, &mut rng);
        }
        if changed {
            state.topic_since = state.next_turn;
        }
        state.c -= 1;
        topic = state.topic_current.expect("a topic is active after advancing");

        let d = Dispatch { ol, nt, features, entities };
        let produced = if topic == Topic::Movie { Some(d.movie(state, &mut rng)) } else { d.mini(state, topic, changed, &mut rng) };
        match produced {
            Some((Some(text), patch)) => {
                let (name, kind) = if topic == Topic::Movie {
                    (MOVIE_CKT, GeneratorKind::Ckt)
                } else {
                    (MINI_CKT, GeneratorKind::MiniCkt)
                };
                let text = build_response(&text, ol.max_chars);
                let metrics = score_metrics(
                    &text,
                    kind,
                    &ScoringContext { lexicons: &ol.lexicons, topic, previous_bot: previous_bot.as_deref(), max_chars: ol.max_chars },
                );
                ckt = Some((CandidateResponse::new(text, name, kind, metrics), patch));
            }
            // nothing to say (question or spent template); keep the progress
            Some((None, patch)) => patch.apply(state),
            None => {}
        }
    }

    let ctx = Arc::new(GeneratorContext {
        nt: nt.clone(),
        features: features.clone(),
        entities: entities.to_vec(),
        topic,
        seed: turn_seed,
        now,
        previous_bot: previous_bot.clone(),
    });
    let mut candidates: Vec<CandidateResponse> = if ol.generators.is_empty() {
        Vec::new()
    } else {
        gather(&ol.generators, ctx, ol.exec)
            .into_iter()
            .filter_map(|(desc, text)| {
                let text = build_response(&text, ol.max_chars);
                if text.trim().is_empty() {
                    return None;
                }
                let metrics = score_metrics(
                    &text,
                    desc.kind,
                    &ScoringContext { lexicons: &ol.lexicons, topic, previous_bot: previous_bot.as_deref(), max_chars: ol.max_chars },
                );
                Some(CandidateResponse::new(text, desc.name, desc.kind, metrics))
            })
            .collect()
    };
    let mut patch = None;
    if let Some((c, p)) = ckt {
        candidates.push(c);
        patch = Some(p);
    }

    let mut verdicts = Vec::new();
    for c in order_candidates(candidates, features.intent, features.topic, &ol.table, &ol.weights) {
        let v = ol.filter.check_response(&c.text);
        let blocked = v.blocked;
        verdicts.push((c.generator.clone(), v));
        if blocked {
            continue;
        }
        if matches!(c.kind, GeneratorKind::Ckt | GeneratorKind::MiniCkt) {
            if let Some(p) = patch.take() {
                p.apply(state);
            }
        }
        return StepOutcome { text: c.text, generator: c.generator, route, topic, topic_changed: changed, verdicts };
    }
    StepOutcome {
        text: FALLBACK_TEXT.to_string(),
        generator: FALLBACK.to_string(),
        route,
        topic,
        topic_changed: changed,
        verdicts,
    }
}
