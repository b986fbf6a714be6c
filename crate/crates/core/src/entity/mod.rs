//! Knowledge-driven named-entity retrieval over a k-gram index.

mod corpus;
mod index;
mod keys;
mod lcs;
mod score;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::{Lexicons, NormalizedText};
use crate::{Error, Result};

pub use corpus::{builtin_corpus, load_corpus_dir, load_corpus_file, parse_corpus};
pub use index::{SearchIndex, CANDIDATE_CAP};
pub use keys::{base_kgrams, kgram_keys, pluralize, singularize};
pub use lcs::lcs_length;
pub use score::{score, ScoreKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityType {
    Movie,
    MovieActor,
    Book,
    BookAuthor,
    Music,
    MusicArtist,
    VideoGame,
    NflPlayer,
    NflTeam,
    SoccerPlayer,
    SoccerClub,
    NbaPlayer,
    NbaTeam,
    MlbPlayer,
    MlbTeam,
    TennisPlayer,
}

impl EntityType {
    pub const ALL: [EntityType; 16] = [
        EntityType::Movie,
        EntityType::MovieActor,
        EntityType::Book,
        EntityType::BookAuthor,
        EntityType::Music,
        EntityType::MusicArtist,
        EntityType::VideoGame,
        EntityType::NflPlayer,
        EntityType::NflTeam,
        EntityType::SoccerPlayer,
        EntityType::SoccerClub,
        EntityType::NbaPlayer,
        EntityType::NbaTeam,
        EntityType::MlbPlayer,
        EntityType::MlbTeam,
        EntityType::TennisPlayer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Movie => "movie",
            EntityType::MovieActor => "movie_actor",
            EntityType::Book => "book",
            EntityType::BookAuthor => "book_author",
            EntityType::Music => "music",
            EntityType::MusicArtist => "music_artist",
            EntityType::VideoGame => "video_game",
            EntityType::NflPlayer => "nfl_player",
            EntityType::NflTeam => "nfl_team",
            EntityType::SoccerPlayer => "soccer_player",
            EntityType::SoccerClub => "soccer_club",
            EntityType::NbaPlayer => "nba_player",
            EntityType::NbaTeam => "nba_team",
            EntityType::MlbPlayer => "mlb_player",
            EntityType::MlbTeam => "mlb_team",
            EntityType::TennisPlayer => "tennis_player",
        }
    }

    /// Movies and video games rank by vote counts with the log heuristic.
    pub fn score_kind(self) -> ScoreKind {
        match self {
            EntityType::Movie | EntityType::VideoGame => ScoreKind::Imdb,
            _ => ScoreKind::General,
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| format!("unknown entity type `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    pub name: String,
    pub normalized_name: NormalizedText,
    pub entity_type: EntityType,
    /// Popularity signal (votes, ratings count, ...). `None` when the source
    /// has no such attribute.
    pub ranking_attribute: Option<f64>,
    pub source: String,
}

impl EntityRecord {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        entity_type: EntityType,
        ranking_attribute: Option<f64>,
        source: impl Into<String>,
    ) -> Result<Self> {
        Self::with_lexicons(
            Lexicons::builtin(),
            id,
            name,
            entity_type,
            ranking_attribute,
            source,
        )
    }

    pub fn with_lexicons(
        lexicons: &Lexicons,
        id: impl Into<String>,
        name: impl Into<String>,
        entity_type: EntityType,
        ranking_attribute: Option<f64>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let id = id.into();
        let name = name.into();
        let normalized_name = lexicons.normalize(&name);
        let invalid = |message: String| Error::Invalid {
            file: "<entity>".into(),
            what: format!("entity `{id}`"),
            message,
        };
        if normalized_name.is_empty() {
            return Err(invalid(format!("name `{name}` normalizes to nothing")));
        }
        if let Some(r) = ranking_attribute {
            if !r.is_finite() || r < 0.0 {
                return Err(invalid(format!("ranking attribute {r} is not a nonnegative number")));
            }
        }
        Ok(EntityRecord {
            id,
            name,
            normalized_name,
            entity_type,
            ranking_attribute,
            source: source.into(),
        })
    }

    /// Token count of the normalized name.
    pub fn token_len(&self) -> usize {
        self.normalized_name.tokens.len()
    }
}

/// A retrieved entity with its match score `S`, length `L` and heuristic
/// rank `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchCandidate {
    pub entity: EntityRecord,
    /// Character LCS with the utterance over the entity's normalized length, in `[0, 1]`.
    pub score: f64,
    /// Token count of the normalized entity name.
    pub length: usize,
    /// Heuristic rank value.
    pub rank: f64,
    /// Byte range in the utterance's normalized text.
    pub matched_span: Range<usize>,
}

impl MatchCandidate {
    pub fn is_full_match(&self) -> bool {
        self.score >= 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_type_labels() {
        for t in EntityType::ALL {
            assert_eq!(t.as_str().parse::<EntityType>().unwrap(), t);
        }
        assert!("wizard".parse::<EntityType>().is_err());
        assert_eq!(EntityType::VideoGame.score_kind(), ScoreKind::Imdb);
        assert_eq!(EntityType::NbaTeam.score_kind(), ScoreKind::General);
    }

    #[test]
    fn record_validation() {
        assert!(EntityRecord::new("a", "?!", EntityType::Movie, None, "t").is_err());
        assert!(EntityRecord::new("a", "Up", EntityType::Movie, Some(-1.0), "t").is_err());
        let r = EntityRecord::new("a", "Rocky III", EntityType::Movie, Some(3.0), "t").unwrap();
        assert_eq!(r.normalized_name.normalized, "rocky three");
        assert_eq!(r.token_len(), 2);
    }
}
