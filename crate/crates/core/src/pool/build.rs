pub const DEFAULT_MAX_CHARS: usize = 600;

const SPOKEN_PUNCTUATION: &str = ".,!?'\"-:;()%$&";

/// Characters a text-to-speech voice can read out.
pub fn is_pronounceable(c: char) -> bool {
    c.is_alphanumeric() || c == ' ' || SPOKEN_PUNCTUATION.contains(c)
}

fn ends_sentence(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Drops characters a voice cannot read and collapses whitespace. Curly
/// quotes and dashes become their ASCII forms first.
pub fn strip_unpronounceable(text: &str) -> String {
    let mapped: String = text
        .chars()
        .map(|c| match c {
            '\u{2018}' | '\u{2019}' => '\'',
            '\u{201c}' | '\u{201d}' => '"',
            '\u{2013}' | '\u{2014}' => '-',
            c if c.is_whitespace() => ' ',
            c => c,
        })
        .filter(|&c| is_pronounceable(c))
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Final packaging of the selected reply: unpronounceable characters
/// dropped, whitespace collapsed, and the text cut back to the last full
/// sentence that fits in `max_chars`.
pub fn build_response(text: &str, max_chars: usize) -> String {
    assert!(max_chars > 0);
    let clean = strip_unpronounceable(text);
    let chars: Vec<char> = clean.chars().collect();
    if chars.len() <= max_chars {
        return clean;
    }
    let sentence_end = (0..max_chars)
        .rev()
        .find(|&i| ends_sentence(chars[i]) && chars.get(i + 1).is_none_or(|&c| c == ' '));
    if let Some(i) = sentence_end {
        return chars[..=i].iter().collect();
    }
    // one long sentence: cut at a word boundary and close it
    let limit = max_chars - 1;
    let cut = (1..=limit).rev().find(|&i| chars[i] == ' ').unwrap_or(limit);
    let mut out: String = chars[..cut].iter().collect();
    out = out.trim_end_matches([',', ';', ':', '-', ' ']).to_string();
    out.push('.');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_special_characters() {
        assert_eq!(build_response("Great news! #breaking", 600), "Great news! breaking");
        assert_eq!(build_response("  a ~ b\n\tc  ", 600), "a b c");
        assert_eq!(build_response("hello", 600), "hello");
        assert_eq!(build_response("it\u{2019}s", 600), "it's");
    }

    #[test]
    fn truncates_after_last_full_sentence() {
        let first = format!("{}.", "a".repeat(298));
        let second = format!("{}.", "b".repeat(399));
        let text = format!("{first} {second}");
        assert_eq!(text.chars().count(), 700);
        assert_eq!(build_response(&text, 600), first);
    }

    #[test]
    fn long_single_sentence_cut_at_word() {
        let text = "word ".repeat(200);
        let out = build_response(&text, 600);
        assert!(out.chars().count() <= 600);
        assert!(out.ends_with("word."));
    }
}
