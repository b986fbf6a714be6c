use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// `S * sqrt(L) * sqrt(R)`; absent `R` counts as 1.
    General,
    /// `S * sqrt(L) * ln(max(R, 2))`.
    Imdb,
}

/// Heuristic rank of a candidate with match score `s`, token length `l`
/// and ranking attribute `r`.
pub fn score(s: f64, l: usize, r: Option<f64>, kind: ScoreKind) -> f64 {
    debug_assert!((0.0..=1.0).contains(&s), "S out of range: {s}");
    debug_assert!(l >= 1);
    let length_term = (l as f64).sqrt();
    let rank_term = match kind {
        ScoreKind::General => r.unwrap_or(1.0).sqrt(),
        ScoreKind::Imdb => r.unwrap_or(1.0).max(2.0).ln(),
    };
    s * length_term * rank_term
}
