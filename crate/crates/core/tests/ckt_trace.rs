use std::collections::HashSet;
use std::sync::Arc;

use convo_core::ckt::{
    builtin_specs, mini_ckt_respond, Attribute, MiniCktState, MovieCkt, MovieCktState, MovieDb,
    QuestionKind,
};
use convo_core::safety::SafetyFilter;
use convo_core::text::{Intent, Lexicons, UtteranceFeatures};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Trace {
    transcript: Vec<String>,
    asked_before_pivot: Vec<Attribute>,
    pivot_turn: Option<usize>,
    states: Vec<MovieCktState>,
}

fn run(seed: u64, turns: usize) -> Trace {
    let ckt = MovieCkt::new(Arc::new(MovieDb::builtin()), vec![]);
    let nt = Lexicons::builtin().normalize("yes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = MovieCktState::default();
    let mut trace = Trace { transcript: vec![], asked_before_pivot: vec![], pivot_turn: None, states: vec![] };
    for turn in 0..turns {
        let before = state.movie_current.as_ref().map(|m| m.title.clone());
        let (text, next) = ckt.turn(&state, &nt, Intent::Yes, &[], &mut rng);
        let after = next.movie_current.as_ref().map(|m| m.title.clone());
        if before.is_some() && before != after && trace.pivot_turn.is_none() {
            trace.pivot_turn = Some(turn);
        }
        if trace.pivot_turn.is_none() {
            if let Some(QuestionKind::Attribute(a)) = next.question_last.as_ref().map(|q| q.kind) {
                trace.asked_before_pivot.push(a);
            }
        }
        trace.transcript.push(text);
        trace.states.push(next.clone());
        state = next;
    }
    trace
}

fn is_permutation(stack: &[Attribute]) -> bool {
    stack.len() == 7 && stack.iter().collect::<HashSet<_>>().len() == 7
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twenty_turns_cover_all_attributes_and_pivot(seed in any::<u64>()) {
        let t = run(seed, 20);
        let asked: HashSet<_> = t.asked_before_pivot.iter().copied().collect();
        prop_assert_eq!(asked.len(), 7);
        prop_assert_eq!(t.asked_before_pivot.len(), 7, "an attribute was asked twice");
        prop_assert!(t.pivot_turn.is_some());
    }

    #[test]
    fn stack_is_fresh_after_pivots(seed in any::<u64>()) {
        let t = run(seed, 40);
        let mut prev = None;
        for s in &t.states {
            let title = s.movie_current.as_ref().map(|m| m.title.clone());
            if title != prev {
                // initialization pops one attribute and a pivot pops none
                let len = s.stack_topic.len();
                prop_assert!(len == 6 || is_permutation(&s.stack_topic), "stack {:?}", s.stack_topic);
                prop_assert!(s.stack_topic.iter().collect::<HashSet<_>>().len() == len);
            }
            prev = title;
        }
    }

    #[test]
    fn replay_is_deterministic(seed in any::<u64>()) {
        prop_assert_eq!(run(seed, 25).transcript, run(seed, 25).transcript);
    }
}

#[test]
fn pivot_shares_actor_or_director() {
    let db = MovieDb::builtin();
    for seed in 0..30 {
        let t = run(seed, 20);
        let p = t.pivot_turn.unwrap();
        let old = t.states[p - 1].movie_current.clone().unwrap();
        let new = t.states[p].movie_current.clone().unwrap();
        assert!(
            old.director == new.director || old.actors.iter().any(|a| new.actors.contains(a)),
            "{} -> {}",
            old.title,
            new.title
        );
        assert!(db.find(&Lexicons::builtin().normalize(&new.title).normalized).is_some());
    }
}

#[test]
fn fresh_state_with_named_movie() {
    use convo_core::entity::{EntityType, SearchIndex};
    let db = Arc::new(MovieDb::builtin());
    let index = SearchIndex::build(db.entity_records(Lexicons::builtin()).unwrap()).unwrap();
    let ckt = MovieCkt::new(db, vec![]);
    let nt = Lexicons::builtin().normalize("i loved titanic");
    let types = [EntityType::Movie].into_iter().collect();
    let entities = index.retrieve(&nt, Some(&types), 5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (text, s) = ckt.turn(&MovieCktState::default(), &nt, Intent::Statement, &entities, &mut rng);
    assert_eq!(s.movie_current.unwrap().title, "Titanic");
    assert_eq!(s.stack_topic.len(), 6);
    assert!(text.ends_with('?'));
    assert!(matches!(s.question_last.unwrap().kind, QuestionKind::Attribute(_)));
}

#[test]
fn every_movie_rendering_is_clean() {
    let filter = SafetyFilter::builtin();
    for seed in 0..50 {
        for line in run(seed, 60).transcript {
            let v = filter.check_response(&line);
            assert!(!v.blocked, "{line}: {v:?}");
        }
    }
}

#[test]
fn every_mini_variant_is_clean() {
    let filter = SafetyFilter::builtin();
    for spec in builtin_specs() {
        for variant in spec.dialogs.iter().flatten() {
            let v = filter.check_response(variant);
            assert!(!v.blocked, "{}: {variant}: {v:?}", spec.topic);
        }
    }
}

#[test]
fn mini_progression_never_skips() {
    let nt = Lexicons::builtin().normalize("sure");
    let f = UtteranceFeatures::default();
    let q = UtteranceFeatures { is_question: true, ..UtteranceFeatures::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in builtin_specs() {
        let mut s = MiniCktState::new(spec.topic.clone());
        for i in 0..spec.dialogs.len() {
            let held = mini_ckt_respond(&spec, &s, &q, &nt, &[], &mut rng);
            assert_eq!(held.state.dialog_index, i);
            let out = mini_ckt_respond(&spec, &s, &f, &nt, &[], &mut rng);
            assert_eq!(out.state.dialog_index, i + 1);
            assert!(spec.dialogs[i].contains(out.text.as_ref().unwrap()));
            s = out.state;
        }
        let done = mini_ckt_respond(&spec, &s, &f, &nt, &[], &mut rng);
        assert!(done.text.is_none() && done.state.exhausted);
    }
}

