use std::collections::{BTreeSet, HashSet};

/// Contiguous k-grams with `k / N >= 0.5`, i.e. `ceil(N/2) <= k <= N`.
pub fn base_kgrams<S: AsRef<str>>(tokens: &[S]) -> BTreeSet<String> {
    let n = tokens.len();
    let mut keys = BTreeSet::new();
    if n == 0 {
        return keys;
    }
    for k in n.div_ceil(2)..=n {
        for window in tokens.windows(k) {
            keys.insert(join(window));
        }
    }
    keys
}

/// Every lookup key of an entity: the base k-grams, their plural and
/// singular variants on the final token, and their stop-word-free variants.
pub fn kgram_keys<S: AsRef<str>>(tokens: &[S], stopwords: &HashSet<String>) -> BTreeSet<String> {
    let base = base_kgrams(tokens);
    let mut keys = base.clone();
    for key in &base {
        let words: Vec<&str> = key.split(' ').collect();
        let (last, head) = words.split_last().expect("keys are non-empty");
        for variant in [pluralize(last), singularize(last)] {
            if variant != *last && !variant.is_empty() {
                let mut v: Vec<&str> = head.to_vec();
                v.push(&variant);
                keys.insert(v.join(" "));
            }
        }
        let content: Vec<&str> = words
            .iter()
            .copied()
            .filter(|w| !stopwords.contains(*w))
            .collect();
        if !content.is_empty() && content.len() < words.len() {
            keys.insert(content.join(" "));
        }
    }
    keys
}

fn join<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut s = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(t.as_ref());
    }
    s
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

pub fn pluralize(word: &str) -> String {
    if word.ends_with('s')
        || word.ends_with('x')
        || word.ends_with('z')
        || word.ends_with("ch")
        || word.ends_with("sh")
    {
        format!("{word}es")
    } else if word.len() > 1
        && word.ends_with('y')
        && !word[..word.len() - 1].ends_with(is_vowel)
    {
        format!("{}ies", &word[..word.len() - 1])
    } else {
        format!("{word}s")
    }
}

/// Best-effort singular of an English plural; returns the word unchanged
/// when it does not look plural.
pub fn singularize(word: &str) -> String {
    if word.len() > 4 && word.ends_with("ies") {
        format!("{}y", &word[..word.len() - 3])
    } else if word.len() > 4
        && ["ses", "xes", "zes", "ches", "shes"]
            .iter()
            .any(|suf| word.ends_with(suf))
    {
        word[..word.len() - 2].to_string()
    } else if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") {
        word[..word.len() - 1].to_string()
    } else {
        word.to_string()
    }
}
