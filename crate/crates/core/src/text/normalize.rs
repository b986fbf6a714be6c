//! Spoken-English normalization: lowercase, punctuation-free, numerals
//! spelled out and abbreviations expanded.

use super::lexicon::Lexicons;
use super::numerals::{self, roman_value};
use super::NormalizedText;

/// Abbreviations recognised only with their trailing period.
const DOTTED_ABBREVIATIONS: &[(&str, &str)] = &[
    ("mr.", "mister"),
    ("mrs.", "missus"),
    ("ms.", "miss"),
    ("dr.", "doctor"),
    ("st.", "saint"),
    ("jr.", "junior"),
    ("sr.", "senior"),
    ("prof.", "professor"),
    ("mt.", "mount"),
    ("vs.", "versus"),
    ("etc.", "et cetera"),
];

/// Abbreviations unambiguous enough to expand without a period.
const BARE_ABBREVIATIONS: &[(&str, &str)] = &[
    ("mr", "mister"),
    ("mrs", "missus"),
    ("dr", "doctor"),
    ("jr", "junior"),
    ("sr", "senior"),
    ("vs", "versus"),
];

/// Lowercases and strips diacritics from common Latin letters.
///
/// Returns `None` for characters with no ASCII-letter rendering.
pub fn fold_char(c: char) -> Option<&'static str> {
    const ASCII: [&str; 26] = [
        "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n", "o", "p", "q", "r",
        "s", "t", "u", "v", "w", "x", "y", "z",
    ];
    if c.is_ascii_alphabetic() {
        return Some(ASCII[(c.to_ascii_lowercase() as u8 - b'a') as usize]);
    }
    let folded = match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'À' | 'Á' | 'Â' | 'Ã' | 'Ä' | 'Å' => "a",
        'ç' | 'Ç' => "c",
        'è' | 'é' | 'ê' | 'ë' | 'È' | 'É' | 'Ê' | 'Ë' => "e",
        'ì' | 'í' | 'î' | 'ï' | 'Ì' | 'Í' | 'Î' | 'Ï' => "i",
        'ñ' | 'Ñ' => "n",
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'Ò' | 'Ó' | 'Ô' | 'Õ' | 'Ö' | 'Ø' => "o",
        'ù' | 'ú' | 'û' | 'ü' | 'Ù' | 'Ú' | 'Û' | 'Ü' => "u",
        'ý' | 'ÿ' | 'Ý' => "y",
        'ß' => "ss",
        'æ' | 'Æ' => "ae",
        'œ' | 'Œ' => "oe",
        _ => return None,
    };
    Some(folded)
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}' | '`')
}

/// A maximal run of letters or of digits, keeping original case.
enum Piece {
    Word(String),
    Digits(String),
}

fn split_pieces(token: &str) -> Vec<Piece> {
    let chars: Vec<char> = token.chars().collect();
    let mut pieces = Vec::new();
    let mut word = String::new();
    let mut digits = String::new();
    let flush_word = |word: &mut String, pieces: &mut Vec<Piece>| {
        if !word.is_empty() {
            pieces.push(Piece::Word(std::mem::take(word)));
        }
    };
    let flush_digits = |digits: &mut String, pieces: &mut Vec<Piece>| {
        if !digits.is_empty() {
            pieces.push(Piece::Digits(std::mem::take(digits)));
        }
    };
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_digit() {
            flush_word(&mut word, &mut pieces);
            digits.push(c);
        } else if c.is_ascii_alphabetic() || fold_char(c).is_some() {
            flush_digits(&mut digits, &mut pieces);
            // keep original case for Roman numeral detection
            if c.is_ascii_alphabetic() {
                word.push(c);
            } else {
                word.push_str(fold_char(c).unwrap());
            }
        } else if is_apostrophe(c) {
            // "don't" -> "dont"
        } else if c == ','
            && !digits.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())
        {
            // thousands separator
        } else {
            flush_word(&mut word, &mut pieces);
            flush_digits(&mut digits, &mut pieces);
        }
    }
    flush_word(&mut word, &mut pieces);
    flush_digits(&mut digits, &mut pieces);
    pieces
}

fn push_word(piece: &str, out: &mut Vec<String>) {
    if numerals::is_uppercase_roman(piece) {
        numerals::cardinal_words(roman_value(piece).unwrap(), out);
        return;
    }
    let lower = piece.to_ascii_lowercase();
    if numerals::is_lowercase_roman(&lower) {
        numerals::cardinal_words(roman_value(&lower).unwrap(), out);
        return;
    }
    if let Some((_, expansion)) = BARE_ABBREVIATIONS.iter().find(|(a, _)| *a == lower) {
        out.extend(expansion.split(' ').map(str::to_string));
        return;
    }
    out.push(lower);
}

/// Spoken-English words for `text`.
pub(crate) fn spoken_words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let core = raw
            .trim_matches(|c: char| !(c.is_alphanumeric() || c == '.'))
            .trim_start_matches('.')
            .to_lowercase();
        if let Some((_, expansion)) = DOTTED_ABBREVIATIONS.iter().find(|(a, _)| *a == core) {
            out.extend(expansion.split(' ').map(str::to_string));
            continue;
        }
        for piece in split_pieces(raw) {
            match piece {
                Piece::Word(w) => push_word(&w, &mut out),
                Piece::Digits(d) => numerals::digits_to_words(&d, &mut out),
            }
        }
    }
    out
}

impl Lexicons {
    /// Normalizes `text` and tokenizes the result.
    pub fn normalize(&self, text: &str) -> NormalizedText {
        let tokens = spoken_words(text);
        let normalized = tokens.join(" ");
        let ignorable_mask = self.ignorable_mask(&tokens);
        NormalizedText {
            raw: text.to_string(),
            normalized,
            tokens,
            ignorable_mask,
        }
    }

    /// Splits already-normalized text on whitespace and marks ignorable tokens.
    pub fn tokenize(&self, normalized: &str) -> (Vec<String>, Vec<bool>) {
        let tokens: Vec<String> = normalized.split_whitespace().map(str::to_string).collect();
        let mask = self.ignorable_mask(&tokens);
        (tokens, mask)
    }

    pub fn ignorable_mask<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<bool> {
        tokens
            .iter()
            .map(|t| self.is_ignorable(t.as_ref()))
            .collect()
    }
}
