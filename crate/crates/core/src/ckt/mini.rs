use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entity::{EntityType, MatchCandidate};
use crate::text::{NormalizedText, UtteranceFeatures};
use crate::{Error, Result};

const BUILTIN: &[(&str, &str)] = &[
    ("book.toml", include_str!("../../data/ckt/book.toml")),
    ("family.toml", include_str!("../../data/ckt/family.toml")),
    ("music.toml", include_str!("../../data/ckt/music.toml")),
    ("pets.toml", include_str!("../../data/ckt/pets.toml")),
    ("sport.toml", include_str!("../../data/ckt/sport.toml")),
    ("tech.toml", include_str!("../../data/ckt/tech.toml")),
    ("travel-france.toml", include_str!("../../data/ckt/travel-france.toml")),
    ("travel-italy.toml", include_str!("../../data/ckt/travel-italy.toml")),
];

/// Hands the conversation to another spec once the last dialog is answered.
/// `chain_to` may contain `{}`, replaced by the matched keyword or entity
/// name with spaces turned into hyphens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityHook {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_type: Option<EntityType>,
    pub chain_to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiniCktSpec {
    pub topic: String,
    /// Each dialog is a list of interchangeable phrasings.
    pub dialogs: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_hook: Option<EntityHook>,
}

impl MiniCktSpec {
    pub fn validate(&self, file: &str) -> Result<()> {
        let invalid = |what: &str, message: String| Error::Invalid {
            file: file.to_string(),
            what: what.to_string(),
            message,
        };
        if self.topic.trim().is_empty() {
            return Err(invalid("topic", "topic is empty".into()));
        }
        if self.dialogs.is_empty() {
            return Err(invalid("dialogs", "at least one dialog is required".into()));
        }
        for (i, d) in self.dialogs.iter().enumerate() {
            if d.is_empty() {
                return Err(invalid("dialogs", format!("dialog {} has no variants", i + 1)));
            }
            if d.iter().any(|v| v.trim().is_empty()) {
                return Err(invalid("dialogs", format!("dialog {} has an empty variant", i + 1)));
            }
        }
        if let Some(h) = &self.entity_hook {
            if h.chain_to.trim().is_empty() {
                return Err(invalid("entity_hook.chain_to", "chain_to is empty".into()));
            }
            if h.keywords.is_empty() == h.entity_type.is_none() {
                return Err(invalid(
                    "entity_hook",
                    "exactly one of keywords or entity_type is required".into(),
                ));
            }
        }
        Ok(())
    }

    fn hook_target(&self, nt: &NormalizedText, entities: &[MatchCandidate]) -> Option<String> {
        let hook = self.entity_hook.as_ref()?;
        let found = match hook.entity_type {
            Some(t) => entities
                .iter()
                .find(|c| c.entity.entity_type == t && c.is_full_match())
                .map(|c| c.entity.normalized_name.normalized.clone()),
            None => hook.keywords.iter().find_map(|k| {
                let words: Vec<&str> = k.split_whitespace().collect();
                nt.tokens
                    .windows(words.len().max(1))
                    .any(|w| w.iter().zip(&words).all(|(a, b)| a == b))
                    .then(|| words.join(" "))
            }),
        }?;
        let target = hook.chain_to.replace("{}", &found.replace(' ', "-"));
        (target != self.topic).then_some(target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiniCktState {
    pub topic: String,
    /// Next dialog to speak.
    pub dialog_index: usize,
    pub exhausted: bool,
}

impl MiniCktState {
    pub fn new(topic: impl Into<String>) -> Self {
        MiniCktState { topic: topic.into(), dialog_index: 0, exhausted: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniOutcome {
    /// Absent on questions and once the spec is exhausted.
    pub text: Option<String>,
    pub state: MiniCktState,
    pub chain_to: Option<String>,
}

/// One step of a mini template. Questions leave the state untouched so the
/// caller can route them elsewhere.
pub fn mini_ckt_respond<R: Rng + ?Sized>(
    spec: &MiniCktSpec,
    state: &MiniCktState,
    features: &UtteranceFeatures,
    nt: &NormalizedText,
    entities: &[MatchCandidate],
    rng: &mut R,
) -> MiniOutcome {
    assert_eq!(state.topic, spec.topic, "state belongs to another spec");
    let mut s = state.clone();
    if features.is_question || s.exhausted {
        return MiniOutcome { text: None, state: s, chain_to: None };
    }
    if s.dialog_index >= spec.dialogs.len() {
        s.exhausted = true;
        let chain_to = spec.hook_target(nt, entities);
        return MiniOutcome { text: None, state: s, chain_to };
    }
    let text = spec.dialogs[s.dialog_index]
        .choose(rng)
        .expect("validated spec")
        .clone();
    s.dialog_index += 1;
    MiniOutcome { text: Some(text), state: s, chain_to: None }
}

pub fn parse_spec(text: &str, file: &str) -> Result<MiniCktSpec> {
    let spec: MiniCktSpec = toml::from_str(text).map_err(|e| Error::Invalid {
        file: file.to_string(),
        what: "spec".into(),
        message: e.to_string().trim().to_string(),
    })?;
    spec.validate(file)?;
    Ok(spec)
}

/// Parses every `*.toml` file in `dir`, in file-name order.
pub fn load_ckt_specs(dir: &Path) -> Result<Vec<MiniCktSpec>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for e in entries {
        let path = e.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "toml") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut specs = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        specs.push(parse_spec(&text, &p.display().to_string())?);
    }
    check_unique(&specs)?;
    Ok(specs)
}

fn check_unique(specs: &[MiniCktSpec]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for s in specs {
        if !seen.insert(s.topic.as_str()) {
            return Err(Error::Duplicate { kind: "ckt topic", id: s.topic.clone() });
        }
    }
    Ok(())
}

pub fn builtin_specs() -> Vec<MiniCktSpec> {
    BUILTIN
        .iter()
        .map(|(name, text)| parse_spec(text, name).expect("shipped specs are valid"))
        .collect()
}

/// Mini templates keyed by topic name.
#[derive(Debug, Clone, Default)]
pub struct CktLibrary {
    specs: BTreeMap<String, MiniCktSpec>,
}

impl CktLibrary {
    pub fn new(specs: Vec<MiniCktSpec>) -> Result<Self> {
        check_unique(&specs)?;
        Ok(CktLibrary { specs: specs.into_iter().map(|s| (s.topic.clone(), s)).collect() })
    }

    pub fn builtin() -> Self {
        Self::new(builtin_specs()).expect("shipped topics are unique")
    }

    pub fn get(&self, topic: &str) -> Option<&MiniCktSpec> {
        self.specs.get(topic)
    }

    pub fn contains(&self, topic: &str) -> bool {
        self.specs.contains_key(topic)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.specs.keys().map(String::as_str)
    }

    pub fn specs(&self) -> impl Iterator<Item = &MiniCktSpec> {
        self.specs.values()
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::text::Lexicons;

    fn statement() -> UtteranceFeatures {
        UtteranceFeatures::default()
    }

    #[test]
    fn shipped_specs() {
        let lib = CktLibrary::builtin();
        assert_eq!(lib.get("travel-italy").unwrap().dialogs.len(), 5);
        for t in ["book", "music", "sport", "tech", "pets", "family"] {
            assert_eq!(lib.get(t).unwrap().dialogs.len(), 10, "{t}");
        }
        assert!(lib.contains("travel-france"));
    }

    #[test]
    fn first_dialog_is_a_variant_and_advances() {
        let lib = CktLibrary::builtin();
        let spec = lib.get("travel-italy").unwrap();
        let nt = Lexicons::builtin().normalize("sure");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = mini_ckt_respond(spec, &MiniCktState::new("travel-italy"), &statement(), &nt, &[], &mut rng);
        assert!(spec.dialogs[0].contains(&out.text.unwrap()));
        assert_eq!(out.state.dialog_index, 1);
    }

    #[test]
    fn question_takes_exception_route() {
        let lib = CktLibrary::builtin();
        let spec = lib.get("travel-italy").unwrap();
        let nt = Lexicons::builtin().normalize("where is rome?");
        let f = UtteranceFeatures { is_question: true, ..statement() };
        let state = MiniCktState { dialog_index: 2, ..MiniCktState::new("travel-italy") };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = mini_ckt_respond(spec, &state, &f, &nt, &[], &mut rng);
        assert_eq!(out.text, None);
        assert_eq!(out.state, state);
    }

    #[test]
    fn hook_chains_after_last_dialog() {
        let lib = CktLibrary::builtin();
        let spec = lib.get("travel-italy").unwrap();
        let state = MiniCktState { dialog_index: 5, ..MiniCktState::new("travel-italy") };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nt = Lexicons::builtin().normalize("France, definitely");
        let out = mini_ckt_respond(spec, &state, &statement(), &nt, &[], &mut rng);
        assert_eq!(out.chain_to.as_deref(), Some("travel-france"));
        assert!(out.state.exhausted);
        let nt = Lexicons::builtin().normalize("italy of course");
        let out = mini_ckt_respond(spec, &state, &statement(), &nt, &[], &mut rng);
        assert_eq!(out.chain_to, None);
    }

    #[test]
    fn load_dir_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_ckt_specs(dir.path()).unwrap().is_empty());
        std::fs::write(dir.path().join("travel-italy.toml"), BUILTIN[7].1).unwrap();
        let specs = load_ckt_specs(dir.path()).unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(specs[0].dialogs.len(), 5);

        std::fs::write(dir.path().join("x.toml"), BUILTIN[7].1).unwrap();
        assert!(matches!(load_ckt_specs(dir.path()), Err(Error::Duplicate { .. })));

        let err = parse_spec("topic = \"a\"\ndialogs = [[\"hi\"], []]\n", "a.toml").unwrap_err();
        assert!(err.to_string().contains("a.toml"), "{err}");
        assert!(err.to_string().contains("dialog 2"), "{err}");
        let err = parse_spec("topic = \"a\"\n", "b.toml").unwrap_err();
        assert!(err.to_string().contains("dialogs"), "{err}");
    }
}
