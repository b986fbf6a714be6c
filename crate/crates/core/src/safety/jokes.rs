use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SafetyFilter;
use crate::{Error, Result};

const BUILTIN: &str = include_str!("../../data/safety/jokes.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Joke {
    pub setup: String,
    pub punchline: String,
}

impl Joke {
    pub fn spoken(&self) -> String {
        format!("{} {}", self.setup, self.punchline)
    }
}

/// Per-session record of jokes already told. Cleared once every joke has
/// been used.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JokeHistory {
    used: BTreeSet<usize>,
}

/// Question-answer jokes, each checked clean when the book is built.
#[derive(Debug, Clone)]
pub struct JokeBook {
    jokes: Vec<Joke>,
}

impl JokeBook {
    pub fn builtin(filter: &SafetyFilter) -> Self {
        Self::parse(BUILTIN, "<builtin jokes>", filter).expect("shipped jokes are clean")
    }

    /// Parses setup/punchline line pairs separated by blank lines.
    pub fn parse(text: &str, file: &str, filter: &SafetyFilter) -> Result<Self> {
        let mut jokes = Vec::new();
        let mut block: Vec<(usize, &str)> = Vec::new();
        let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        for (line, l) in lines.chain(std::iter::once((0, ""))) {
            if l.starts_with('#') {
                continue;
            }
            if !l.is_empty() {
                block.push((line, l));
                continue;
            }
            match block.as_slice() {
                [] => {}
                [(_, setup), (_, punchline)] => jokes.push(Joke {
                    setup: setup.to_string(),
                    punchline: punchline.to_string(),
                }),
                [(first, _), ..] => {
                    return Err(Error::parse(file, *first, "a joke is exactly a setup line and a punchline line"))
                }
            }
            block.clear();
        }
        Self::new(jokes, file, filter)
    }

    pub fn new(jokes: Vec<Joke>, file: &str, filter: &SafetyFilter) -> Result<Self> {
        if jokes.is_empty() {
            return Err(Error::Invalid {
                file: file.to_string(),
                what: "joke book".into(),
                message: "no jokes".into(),
            });
        }
        for j in &jokes {
            for part in [&j.setup, &j.punchline] {
                let v = filter.check_response(part);
                if v.blocked {
                    return Err(Error::Invalid {
                        file: file.to_string(),
                        what: "joke".into(),
                        message: format!(
                            "`{part}` matches {} phrase `{}`",
                            v.category.map(|c| c.as_str()).unwrap_or_default(),
                            v.trigger_phrase.unwrap_or_default()
                        ),
                    });
                }
            }
        }
        Ok(JokeBook { jokes })
    }

    pub fn len(&self) -> usize {
        self.jokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jokes.is_empty()
    }

    pub fn jokes(&self) -> &[Joke] {
        &self.jokes
    }

    /// A joke once `consecutive_offense` reaches `threshold`, drawn uniformly
    /// from the jokes this session has not heard yet.
    pub fn pick_joke<R: Rng + ?Sized>(
        &self,
        consecutive_offense: u32,
        threshold: u32,
        history: &mut JokeHistory,
        rng: &mut R,
    ) -> Option<&Joke> {
        if consecutive_offense < threshold.max(1) {
            return None;
        }
        if history.used.len() >= self.jokes.len() {
            history.used.clear();
        }
        let fresh: Vec<usize> = (0..self.jokes.len())
            .filter(|i| !history.used.contains(i))
            .collect();
        let pick = fresh[rng.random_range(0..fresh.len())];
        history.used.insert(pick);
        Some(&self.jokes[pick])
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn builtin_book_is_clean() {
        let filter = SafetyFilter::builtin();
        let book = JokeBook::builtin(&filter);
        assert!(book.len() >= 20);
        for j in book.jokes() {
            assert!(!filter.check_response(&j.setup).blocked, "{}", j.setup);
            assert!(!filter.check_response(&j.punchline).blocked, "{}", j.punchline);
        }
    }

    #[test]
    fn threshold() {
        let filter = SafetyFilter::builtin();
        let book = JokeBook::builtin(&filter);
        let mut h = JokeHistory::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(book.pick_joke(0, 2, &mut h, &mut rng).is_none());
        assert!(book.pick_joke(1, 2, &mut h, &mut rng).is_none());
        assert!(book.pick_joke(2, 2, &mut h, &mut rng).is_some());
    }

    #[test]
    fn no_repeats_until_exhausted() {
        let filter = SafetyFilter::builtin();
        let book = JokeBook::builtin(&filter);
        let mut h = JokeHistory::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = BTreeSet::new();
        for _ in 0..book.len() {
            let j = book.pick_joke(2, 2, &mut h, &mut rng).unwrap();
            assert!(seen.insert(j.setup.clone()), "repeat before exhaustion");
        }
        assert!(book.pick_joke(2, 2, &mut h, &mut rng).is_some());
    }

    #[test]
    fn rejects_dirty_and_malformed() {
        let filter = SafetyFilter::builtin();
        assert!(JokeBook::parse("Why?\nBecause beer.\n", "t", &filter).is_err());
        assert!(JokeBook::parse("Why?\n", "t", &filter).is_err());
        assert!(JokeBook::parse("# nothing\n", "t", &filter).is_err());
        let ok = JokeBook::parse("Why?\nBecause.\n\nWho?\nMe.", "t", &filter).unwrap();
        assert_eq!(ok.len(), 2);
    }
}
