//! Numerals rendered as spoken English words.

const ONES: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];

const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

const ROMAN: [&str; 20] = [
    "i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii", "xiii", "xiv", "xv",
    "xvi", "xvii", "xviii", "xix", "xx",
];

/// Largest Arabic integer spelled out; larger values stay as digits.
pub const MAX_SPELLED: u32 = 9999;

/// Pushes the cardinal words for `n` (0..=9999).
pub fn cardinal_words(n: u32, out: &mut Vec<String>) {
    debug_assert!(n <= MAX_SPELLED);
    if n == 0 {
        out.push(ONES[0].to_string());
        return;
    }
    let thousands = n / 1000;
    let hundreds = (n / 100) % 10;
    let rest = n % 100;
    if thousands > 0 {
        out.push(ONES[thousands as usize].to_string());
        out.push("thousand".to_string());
    }
    if hundreds > 0 {
        out.push(ONES[hundreds as usize].to_string());
        out.push("hundred".to_string());
    }
    if rest >= 20 {
        out.push(TENS[(rest / 10) as usize].to_string());
        if !rest.is_multiple_of(10) {
            out.push(ONES[(rest % 10) as usize].to_string());
        }
    } else if rest > 0 {
        out.push(ONES[rest as usize].to_string());
    }
}

pub fn cardinal(n: u32) -> String {
    let mut words = Vec::new();
    cardinal_words(n, &mut words);
    words.join(" ")
}

/// Spoken words for a run of ASCII digits.
///
/// Values up to [`MAX_SPELLED`] are spelled as cardinals; runs with a leading
/// zero are read digit by digit; anything else is kept verbatim.
pub fn digits_to_words(digits: &str, out: &mut Vec<String>) {
    debug_assert!(digits.bytes().all(|b| b.is_ascii_digit()));
    if digits.len() > 1 && digits.starts_with('0') {
        for b in digits.bytes() {
            out.push(ONES[(b - b'0') as usize].to_string());
        }
        return;
    }
    match digits.parse::<u32>() {
        Ok(n) if n <= MAX_SPELLED => cardinal_words(n, out),
        _ => out.push(digits.to_string()),
    }
}

/// Value of a Roman numeral in I..=XX, matched case-insensitively.
pub fn roman_value(token: &str) -> Option<u32> {
    let lower = token.to_ascii_lowercase();
    ROMAN
        .iter()
        .position(|r| *r == lower)
        .map(|i| i as u32 + 1)
}

/// Whether a lowercase token is read as a Roman numeral.
///
/// Lowercase two-letter forms such as `xi`, `vi` or `iv` collide with
/// ordinary words and names, so only `ii` and forms of three or more letters
/// qualify. Single letters never do.
pub fn is_lowercase_roman(token: &str) -> bool {
    (token.len() >= 3 || token == "ii") && roman_value(token).is_some()
}

/// Whether a token written in capitals is read as a Roman numeral (II..=XX).
pub fn is_uppercase_roman(token: &str) -> bool {
    token.len() >= 2
        && token.bytes().all(|b| b.is_ascii_uppercase())
        && roman_value(token).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinals() {
        assert_eq!(cardinal(0), "zero");
        assert_eq!(cardinal(7), "seven");
        assert_eq!(cardinal(15), "fifteen");
        assert_eq!(cardinal(40), "forty");
        assert_eq!(cardinal(99), "ninety nine");
        assert_eq!(cardinal(100), "one hundred");
        assert_eq!(cardinal(305), "three hundred five");
        assert_eq!(cardinal(1997), "one thousand nine hundred ninety seven");
        assert_eq!(cardinal(2000), "two thousand");
        assert_eq!(cardinal(9999), "nine thousand nine hundred ninety nine");
    }

    #[test]
    fn digit_runs() {
        let mut out = Vec::new();
        digits_to_words("007", &mut out);
        assert_eq!(out, ["zero", "zero", "seven"]);
        out.clear();
        digits_to_words("10000", &mut out);
        assert_eq!(out, ["10000"]);
        out.clear();
        digits_to_words("99999999999999999999999", &mut out);
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn romans() {
        assert_eq!(roman_value("III"), Some(3));
        assert_eq!(roman_value("xx"), Some(20));
        assert_eq!(roman_value("xxi"), None);
        assert!(is_uppercase_roman("IV"));
        assert!(!is_uppercase_roman("I"));
        assert!(!is_uppercase_roman("Iv"));
        assert!(is_lowercase_roman("viii"));
        assert!(!is_lowercase_roman("xi"));
        assert!(!is_lowercase_roman("i"));
    }
}
