use convo_core::entity::{EntityRecord, EntityType, MatchCandidate};
use convo_core::safety::{Category, SafetyFilter, SensitiveLexicon};
use convo_core::text::{Lexicons, NormalizedText, UtteranceFeatures};
use proptest::prelude::*;
use std::sync::Arc;

const WORDS: &[&str] = &[
    "i", "love", "bond", "james", "beer", "oh", "my", "god", "share", "chinese", "food", "the",
    "movie", "what", "is", "vaccine", "gun", "shy", "court", "tennis", "great", "kill", "race",
    "car", "buy", "a", "dog", "idiot", "you", "suck", "police", "academy", "covid",
];

fn utterance() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..10).prop_map(|w| w.join(" "))
}

fn features(question: bool) -> UtteranceFeatures {
    UtteranceFeatures {
        is_question: question,
        ..UtteranceFeatures::default()
    }
}

fn filter_with_whitelist(extra: &[String]) -> SafetyFilter {
    let mut lx = SensitiveLexicon::builtin();
    for p in extra {
        lx.add_whitelist(p);
    }
    SafetyFilter::new(lx, Arc::new(Lexicons::builtin().clone()))
}

fn span_candidate(nt: &NormalizedText, start_tok: usize, len: usize) -> MatchCandidate {
    let offsets = nt.token_offsets();
    let start = offsets[start_tok];
    let last = start_tok + len - 1;
    let end = offsets[last] + nt.tokens[last].len();
    let name = nt.normalized[start..end].to_string();
    let entity = EntityRecord::new("x", name, EntityType::MovieActor, None, "prop").unwrap();
    MatchCandidate {
        length: entity.token_len(),
        entity,
        score: 1.0,
        rank: 1.0,
        matched_span: start..end,
    }
}

proptest! {
    #[test]
    fn whitelist_supremacy(text in utterance(), extra in prop::collection::vec(utterance(), 1..3), q in any::<bool>()) {
        let nt = Lexicons::builtin().normalize(&text);
        let f = features(q);
        let before = filter_with_whitelist(&[]).check_utterance(&nt, &[], &f);
        let after = filter_with_whitelist(&extra).check_utterance(&nt, &[], &f);
        if !before.blocked {
            prop_assert!(!after.blocked);
        }
    }

    #[test]
    fn entity_masking_monotone(text in utterance(), a in 0usize..10, l in 1usize..4, q in any::<bool>()) {
        let nt = Lexicons::builtin().normalize(&text);
        prop_assume!(!nt.is_empty());
        let start = a % nt.len();
        let len = l.min(nt.len() - start);
        let filter = SafetyFilter::builtin();
        let f = features(q);
        let before = filter.check_utterance(&nt, &[], &f);
        let after = filter.check_utterance(&nt, &[span_candidate(&nt, start, len)], &f);
        if !before.blocked {
            prop_assert!(!after.blocked);
        }
    }

    #[test]
    fn blocked_verdict_is_well_formed(text in utterance(), q in any::<bool>()) {
        let nt = Lexicons::builtin().normalize(&text);
        let v = SafetyFilter::builtin().check_utterance(&nt, &[], &features(q));
        if v.blocked {
            let trigger = v.trigger_phrase.clone().unwrap();
            prop_assert!(v.category.is_some());
            prop_assert!(v.exemption.is_none());
            let padded = format!(" {} ", nt.normalized);
            let needle = format!(" {} ", trigger);
            prop_assert!(padded.contains(&needle));
        }
    }
}

#[test]
fn every_category_is_reachable() {
    let filter = SafetyFilter::builtin();
    for c in Category::ALL {
        let phrase = filter.lexicon().phrases_in(c)[0].to_string();
        let v = filter.check_response(&phrase);
        assert!(v.blocked || v.exemption.is_some(), "{c}: {phrase}");
    }
}
