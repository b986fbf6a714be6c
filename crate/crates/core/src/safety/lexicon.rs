use std::collections::HashMap;
use std::path::Path;

use super::Category;
use crate::text::Lexicons;
use crate::{Error, Result};

macro_rules! builtin_category {
    ($name:literal) => {
        include_str!(concat!("../../data/safety/", $name, ".txt"))
    };
}

const BUILTIN: [(Category, &str); 13] = [
    (Category::Alcohol, builtin_category!("alcohol")),
    (Category::Disability, builtin_category!("disability")),
    (Category::Finance, builtin_category!("finance")),
    (Category::Law, builtin_category!("law")),
    (Category::Emergency, builtin_category!("emergency")),
    (Category::Medicine, builtin_category!("medicine")),
    (Category::Politics, builtin_category!("politics")),
    (Category::Psychology, builtin_category!("psychology")),
    (Category::Religion, builtin_category!("religion")),
    (Category::Sex, builtin_category!("sex")),
    (Category::Society, builtin_category!("society")),
    (Category::Violence, builtin_category!("violence")),
    (Category::Offensive, builtin_category!("offensive")),
];
const WHITELIST: &str = include_str!("../../data/safety/whitelist.txt");
const COVID: &str = include_str!("../../data/safety/covid.txt");

/// Category blacklists plus the general and COVID whitelists, all in
/// normalized form.
#[derive(Debug, Clone)]
pub struct SensitiveLexicon {
    phrases: HashMap<String, Category>,
    max_phrase_tokens: usize,
    pub(crate) whitelist: Vec<Vec<String>>,
    pub(crate) covid: Vec<Vec<String>>,
}

fn phrase_lines(text: &str, lexicons: &Lexicons) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| lexicons.normalize(l).normalized)
        .filter(|p| !p.is_empty())
        .collect()
}

fn split(phrases: Vec<String>) -> Vec<Vec<String>> {
    phrases
        .into_iter()
        .map(|p| p.split(' ').map(str::to_string).collect())
        .collect()
}

impl SensitiveLexicon {
    pub fn builtin() -> Self {
        let lx = Lexicons::builtin();
        let categories = BUILTIN
            .iter()
            .map(|(c, text)| (*c, phrase_lines(text, lx)))
            .collect();
        Self::from_parts(categories, phrase_lines(WHITELIST, lx), phrase_lines(COVID, lx))
    }

    /// Loads `<category>.txt` for every category plus `whitelist.txt` and
    /// `covid.txt` from `dir`. Missing files fall back to the shipped lists.
    pub fn load_dir(dir: &Path, lexicons: &Lexicons) -> Result<Self> {
        let read = |name: &str, builtin: &str| -> Result<Vec<String>> {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                Ok(phrase_lines(&text, lexicons))
            } else {
                Ok(phrase_lines(builtin, lexicons))
            }
        };
        let mut categories = Vec::new();
        for (c, text) in BUILTIN {
            categories.push((c, read(c.as_str(), text)?));
        }
        Ok(Self::from_parts(categories, read("whitelist", WHITELIST)?, read("covid", COVID)?))
    }

    pub fn from_parts(
        categories: Vec<(Category, Vec<String>)>,
        whitelist: Vec<String>,
        covid: Vec<String>,
    ) -> Self {
        let mut phrases = HashMap::new();
        let mut max_phrase_tokens = 0;
        for (category, list) in categories {
            for p in list {
                max_phrase_tokens = max_phrase_tokens.max(p.split(' ').count());
                // first category listed wins for shared phrases
                phrases.entry(p).or_insert(category);
            }
        }
        SensitiveLexicon {
            phrases,
            max_phrase_tokens,
            whitelist: split(whitelist),
            covid: split(covid),
        }
    }

    pub fn category_of(&self, phrase: &str) -> Option<Category> {
        self.phrases.get(phrase).copied()
    }

    pub fn max_phrase_tokens(&self) -> usize {
        self.max_phrase_tokens
    }

    pub fn phrases_in(&self, category: Category) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .phrases
            .iter()
            .filter(|(_, c)| **c == category)
            .map(|(p, _)| p.as_str())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn add_whitelist(&mut self, phrase: &str) {
        let words: Vec<String> = phrase.split_whitespace().map(str::to_string).collect();
        if !words.is_empty() {
            self.whitelist.push(words);
        }
    }
}
