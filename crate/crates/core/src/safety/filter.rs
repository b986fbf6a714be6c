use std::sync::Arc;

use super::{Category, Exemption, SensitiveLexicon, Verdict};
use crate::entity::MatchCandidate;
use crate::text::{Lexicons, NormalizedText, UtteranceFeatures};

/// Entity candidates at or above this character-match ratio are treated as
/// atomic phrases. Weaker partial matches are too noisy to suppress a
/// blacklist hit.
pub const ATOMIC_ENTITY_MIN_SCORE: f64 = 0.9;

/// Separates factual questions from open-ended or advice-seeking ones.
/// Only consulted for utterances already known to be questions.
pub trait FactualClassifier: Send + Sync {
    fn is_factual(&self, nt: &NormalizedText) -> bool;
}

const OPINION_MARKERS: &[&[&str]] = &[
    &["do", "you", "think"],
    &["what", "do", "you", "think"],
    &["should", "i"],
    &["should", "we"],
    &["would", "you"],
    &["do", "you", "like"],
    &["your", "opinion"],
    &["your", "favorite"],
];
const FACTUAL_OPENERS: &[&str] = &["what", "who", "when", "where", "which"];
const CONTRACTED_OPENERS: &[&str] = &["whats", "whos", "wheres", "whens"];
const COPULAS: &[&str] = &[
    "is", "are", "was", "were", "does", "do", "did", "can", "will", "has", "have", "had",
];

/// Keyword heuristic: wh-word plus copula or auxiliary, or "how many/much",
/// unless an opinion marker appears anywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleFactualClassifier;

impl FactualClassifier for RuleFactualClassifier {
    fn is_factual(&self, nt: &NormalizedText) -> bool {
        let t: Vec<&str> = nt.tokens.iter().map(String::as_str).collect();
        if t.first() == Some(&"why") {
            return false;
        }
        let opinion = OPINION_MARKERS
            .iter()
            .any(|m| t.windows(m.len()).any(|w| w == *m));
        if opinion {
            return false;
        }
        match t.as_slice() {
            [first, second, ..] if FACTUAL_OPENERS.contains(first) => COPULAS.contains(second),
            [first, _, ..] if CONTRACTED_OPENERS.contains(first) => true,
            ["how", "many" | "much", ..] => true,
            _ => false,
        }
    }
}

/// The sensitive-content filter. Cheap to clone; lexicons are shared.
#[derive(Clone)]
pub struct SafetyFilter {
    lexicon: Arc<SensitiveLexicon>,
    text: Arc<Lexicons>,
    classifier: Arc<dyn FactualClassifier>,
}

impl std::fmt::Debug for SafetyFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SafetyFilter").finish_non_exhaustive()
    }
}

struct Hit {
    start: usize,
    len: usize,
    category: Category,
}

struct Scan {
    hit: Option<Hit>,
    /// Reason attached to the first blacklist phrase that was masked out.
    suppressed: Option<Exemption>,
}

impl SafetyFilter {
    pub fn new(lexicon: SensitiveLexicon, text: Arc<Lexicons>) -> Self {
        SafetyFilter {
            lexicon: Arc::new(lexicon),
            text,
            classifier: Arc::new(RuleFactualClassifier),
        }
    }

    pub fn builtin() -> Self {
        Self::new(SensitiveLexicon::builtin(), Arc::new(Lexicons::builtin().clone()))
    }

    pub fn with_classifier(mut self, classifier: Arc<dyn FactualClassifier>) -> Self {
        self.classifier = classifier;
        self
    }

    pub fn lexicon(&self) -> &SensitiveLexicon {
        &self.lexicon
    }

    pub fn is_factual_question(&self, nt: &NormalizedText, features: &UtteranceFeatures) -> bool {
        assert!(
            features.is_question,
            "is_factual_question called on a non-question"
        );
        self.classifier.is_factual(nt)
    }

    /// Input-side check. Retrieved entities must come from the same
    /// normalized text.
    pub fn check_utterance(
        &self,
        nt: &NormalizedText,
        entities: &[MatchCandidate],
        features: &UtteranceFeatures,
    ) -> Verdict {
        let mut mask = vec![None; nt.tokens.len()];
        self.mask_entities(nt, entities, &mut mask);
        self.mask_whitelists(&nt.tokens, &mut mask);
        let scan = self.scan(&nt.tokens, &mask);
        match scan.hit {
            Some(_) if features.is_question && self.is_factual_question(nt, features) => {
                Verdict::exempt(Exemption::FactualQuestion)
            }
            Some(hit) => self.blocked(&nt.tokens, hit),
            None => scan.suppressed.map_or_else(Verdict::clean, Verdict::exempt),
        }
    }

    /// Output-side check: whitelists apply but neither entity masking nor
    /// the factual exemption.
    pub fn check_response(&self, text: &str) -> Verdict {
        let nt = self.text.normalize(text);
        self.check_response_normalized(&nt)
    }

    pub fn check_response_normalized(&self, nt: &NormalizedText) -> Verdict {
        let mut mask = vec![None; nt.tokens.len()];
        self.mask_whitelists(&nt.tokens, &mut mask);
        let scan = self.scan(&nt.tokens, &mask);
        match scan.hit {
            Some(hit) => self.blocked(&nt.tokens, hit),
            None => scan.suppressed.map_or_else(Verdict::clean, Verdict::exempt),
        }
    }

    fn blocked(&self, tokens: &[String], hit: Hit) -> Verdict {
        Verdict::blocked(hit.category, tokens[hit.start..hit.start + hit.len].join(" "))
    }

    fn mask_entities(
        &self,
        nt: &NormalizedText,
        entities: &[MatchCandidate],
        mask: &mut [Option<Exemption>],
    ) {
        let offsets = nt.token_offsets();
        for c in entities.iter().filter(|c| c.score >= ATOMIC_ENTITY_MIN_SCORE) {
            for (i, (&off, tok)) in offsets.iter().zip(&nt.tokens).enumerate() {
                if off >= c.matched_span.start && off + tok.len() <= c.matched_span.end {
                    mask[i] = Some(Exemption::AtomicEntity);
                }
            }
        }
    }

    fn mask_whitelists(&self, tokens: &[String], mask: &mut [Option<Exemption>]) {
        let lists = [
            (&self.lexicon.whitelist, Exemption::Whitelist),
            (&self.lexicon.covid, Exemption::Covid),
        ];
        for (list, reason) in lists {
            for phrase in list {
                if phrase.is_empty() || phrase.len() > tokens.len() {
                    continue;
                }
                for start in 0..=tokens.len() - phrase.len() {
                    if tokens[start..start + phrase.len()] == phrase[..] {
                        for m in &mut mask[start..start + phrase.len()] {
                            m.get_or_insert(reason);
                        }
                    }
                }
            }
        }
    }

    /// Longest-match scan at each position. A phrase touching a masked token
    /// is skipped and shorter phrases at the same position are still tried,
    /// so masking can only remove hits, never create them.
    fn scan(&self, tokens: &[String], mask: &[Option<Exemption>]) -> Scan {
        let max = self.lexicon.max_phrase_tokens();
        let mut suppressed = None;
        let mut i = 0;
        while i < tokens.len() {
            let longest = max.min(tokens.len() - i);
            for len in (1..=longest).rev() {
                let phrase = tokens[i..i + len].join(" ");
                let Some(category) = self.lexicon.category_of(&phrase) else {
                    continue;
                };
                match mask[i..i + len].iter().flatten().next() {
                    Some(&reason) => {
                        suppressed.get_or_insert(reason);
                    }
                    None => {
                        return Scan {
                            hit: Some(Hit { start: i, len, category }),
                            suppressed,
                        }
                    }
                }
            }
            i += 1;
        }
        Scan { hit: None, suppressed }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::{EntityRecord, EntityType};

    fn features(nt: &NormalizedText) -> UtteranceFeatures {
        UtteranceFeatures {
            is_question: Lexicons::builtin().is_question(nt),
            ..UtteranceFeatures::default()
        }
    }

    fn check(text: &str) -> Verdict {
        let nt = Lexicons::builtin().normalize(text);
        SafetyFilter::builtin().check_utterance(&nt, &[], &features(&nt))
    }

    fn candidate(name: &str, span: std::ops::Range<usize>, score: f64) -> MatchCandidate {
        let entity = EntityRecord::new("e1", name, EntityType::MovieActor, None, "test").unwrap();
        MatchCandidate {
            length: entity.token_len(),
            entity,
            score,
            rank: score,
            matched_span: span,
        }
    }

    #[test]
    fn james_bond_is_atomic() {
        let nt = Lexicons::builtin().normalize("i love james bond movies");
        let start = nt.normalized.find("james bond").unwrap();
        let c = candidate("James Bond", start..start + 10, 1.0);
        let v = SafetyFilter::builtin().check_utterance(&nt, &[c], &features(&nt));
        assert_eq!(v, Verdict::exempt(Exemption::AtomicEntity));
    }

    #[test]
    fn weak_entity_does_not_mask() {
        let nt = Lexicons::builtin().normalize("i want to buy a bond");
        let start = nt.normalized.find("bond").unwrap();
        let c = candidate("Bondi", start..start + 4, 0.5);
        let v = SafetyFilter::builtin().check_utterance(&nt, &[c], &features(&nt));
        assert!(v.blocked);
    }

    #[test]
    fn relaxation_examples() {
        assert_eq!(check("oh my god that was great"), Verdict::exempt(Exemption::Whitelist));
        assert_eq!(
            check("what is the mrna vaccine"),
            Verdict::exempt(Exemption::FactualQuestion)
        );
        assert_eq!(check("i want to buy a bond"), Verdict::blocked(Category::Finance, "bond"));
        assert_eq!(check("let me share a story"), Verdict::exempt(Exemption::Whitelist));
        assert_eq!(check("we had chinese food"), Verdict::exempt(Exemption::Whitelist));
        assert_eq!(check("i like dogs"), Verdict::clean());
    }

    #[test]
    fn factual_rules() {
        let f = SafetyFilter::builtin();
        let q = |s: &str| {
            let nt = Lexicons::builtin().normalize(s);
            let mut feat = features(&nt);
            feat.is_question = true;
            f.is_factual_question(&nt, &feat)
        };
        assert!(q("what is the mrna vaccine"));
        assert!(q("who was the first president"));
        assert!(q("how many people live in italy"));
        assert!(q("what's a bond"));
        assert!(!q("should i wear a mask"));
        assert!(!q("do you think bonds are safe"));
        assert!(!q("why is the sky blue"));
        assert!(!q("what do you think about beer"));
    }

    #[test]
    #[should_panic(expected = "non-question")]
    fn factual_on_statement_panics() {
        let nt = Lexicons::builtin().normalize("the sky is blue");
        SafetyFilter::builtin().is_factual_question(&nt, &UtteranceFeatures::default());
    }

    #[test]
    fn advice_question_is_blocked() {
        let v = check("should i buy a bond?");
        assert_eq!(v.category, Some(Category::Finance));
        assert!(v.blocked);
    }

    #[test]
    fn longest_match_wins() {
        let v = check("you are an idiot and you suck");
        assert!(v.blocked);
        assert_eq!(v.category, Some(Category::Offensive));
    }

    #[test]
    fn response_side() {
        let f = SafetyFilter::builtin();
        assert_eq!(f.check_response(""), Verdict::clean());
        assert!(f.check_response("The attack left three people wounded.").blocked);
        // no factual exemption on output
        assert!(f.check_response("What is a bond?").blocked);
    }

    #[test]
    fn external_classifier_is_used() {
        struct Always;
        impl FactualClassifier for Always {
            fn is_factual(&self, _: &NormalizedText) -> bool {
                true
            }
        }
        let f = SafetyFilter::builtin().with_classifier(Arc::new(Always));
        let nt = Lexicons::builtin().normalize("should i buy a bond?");
        let v = f.check_utterance(&nt, &[], &features(&nt));
        assert_eq!(v, Verdict::exempt(Exemption::FactualQuestion));
    }
}
