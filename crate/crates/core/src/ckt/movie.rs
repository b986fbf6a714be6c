use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entity::{EntityRecord, EntityType, MatchCandidate};
use crate::text::{Intent, Lexicons, NormalizedText};
use crate::{Error, Result};

/// Probability of asking a generic question instead of popping an attribute.
pub const P_GENERIC: f64 = 0.5;
/// Seed movies default to the most-voted titles.
pub const DEFAULT_SEED_COUNT: usize = 10;

const HEADER: [&str; 10] = [
    "title", "year", "actors", "director", "genre", "plot", "rating", "votes", "awards", "trivia",
];
const SWITCH_PHRASES: &[&[&str]] = &[
    &["different", "movie"],
    &["another", "movie"],
    &["other", "movie"],
    &["new", "movie"],
    &["different", "film"],
    &["another", "film"],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieRecord {
    pub title: String,
    pub year: i32,
    pub actors: Vec<String>,
    pub director: String,
    pub genre: Vec<String>,
    pub plot: String,
    pub rating: f64,
    pub votes: u64,
    pub awards: String,
    pub trivia: Vec<String>,
}

impl MovieRecord {
    fn has(&self, a: Attribute) -> bool {
        match a {
            Attribute::Actor => !self.actors.is_empty(),
            Attribute::Director => !self.director.is_empty(),
            Attribute::Plot => !self.plot.is_empty(),
            Attribute::Review => self.votes > 0,
            Attribute::Rating => self.rating > 0.0,
            Attribute::Award => !self.awards.is_empty(),
            Attribute::Trivia => !self.trivia.is_empty(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Attribute {
    Actor,
    Director,
    Plot,
    Review,
    Rating,
    Award,
    Trivia,
}

impl Attribute {
    pub const ALL: [Attribute; 7] = [
        Attribute::Actor,
        Attribute::Director,
        Attribute::Plot,
        Attribute::Review,
        Attribute::Rating,
        Attribute::Award,
        Attribute::Trivia,
    ];

    fn questions(self) -> &'static [&'static str] {
        match self {
            Attribute::Actor => &[
                "Do you know who starred in {title}?",
                "Can you guess who plays the lead in {title}?",
            ],
            Attribute::Director => &[
                "Do you know who directed {title}?",
                "Any idea who the director of {title} is?",
            ],
            Attribute::Plot => &[
                "Do you remember what {title} is about?",
                "Would you like to hear what {title} is about?",
            ],
            Attribute::Review => &[
                "Do you know how popular {title} is with viewers?",
                "Want to guess how many people have rated {title}?",
            ],
            Attribute::Rating => &[
                "Do you know how well {title} is rated?",
                "Can you guess the rating of {title}?",
            ],
            Attribute::Award => &[
                "Did you know {title} won some awards?",
                "Do you know what awards {title} received?",
            ],
            Attribute::Trivia => &[
                "Do you want to hear a fun fact about {title}?",
                "Can I tell you something interesting about {title}?",
            ],
        }
    }

    fn answers(self) -> &'static [&'static str] {
        match self {
            Attribute::Actor => &["{title} stars {actors}.", "The cast includes {actors}."],
            Attribute::Director => &["It was directed by {director}.", "{director} directed it in {year}."],
            Attribute::Plot => &["{plot}", "Here is the idea. {plot}"],
            Attribute::Review => &[
                "More than {votes} viewers have rated it online.",
                "It is really popular, with over {votes} ratings from viewers.",
            ],
            Attribute::Rating => &[
                "Viewers give it {rating} out of ten.",
                "It has a rating of {rating} out of ten.",
            ],
            Attribute::Award => &["It won {awards}.", "It picked up {awards}."],
            Attribute::Trivia => &["Here is one. {trivia}", "{trivia}"],
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

const GENERIC_QUESTIONS: &[&str] = &[
    "Have you seen {title}?",
    "Would you watch {title} again?",
    "Do you like movies like {title}?",
    "Would you recommend {title} to a friend?",
];
const GENERIC_YES: &[&str] = &["Me too, I really like it.", "Great, it is one of my favorites."];
const GENERIC_NO: &[&str] = &["That's okay, there are so many movies out there.", "No worries."];
const GENERIC_OTHER: &[&str] = &["I see.", "Interesting."];
const YES_PREFIX: &[&str] = &["Sure.", "Okay."];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", tag = "kind", content = "attribute")]
pub enum QuestionKind {
    Attribute(Attribute),
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub kind: QuestionKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MovieCktState {
    /// Change-movie flag.
    pub cf: bool,
    pub movie_current: Option<MovieRecord>,
    pub question_last: Option<Question>,
    pub stack_topic: Vec<Attribute>,
    /// A movie the user named; the next pivot or initialization uses it.
    #[serde(default)]
    pub target: Option<String>,
    /// Titles already discussed, preferred last when pivoting.
    #[serde(default)]
    pub visited: Vec<String>,
}

fn split_list(s: &str) -> Vec<String> {
    s.split('|')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parses the movie TSV. List columns use `|` between items.
pub fn parse_movies(text: &str, file: &str) -> Result<Vec<MovieRecord>> {
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = match lines.next() {
        Some((_, h)) => h.split('\t').map(str::trim).collect(),
        None => return Ok(Vec::new()),
    };
    if header != HEADER {
        return Err(Error::parse(file, 1, format!("expected header `{}`", HEADER.join("\\t"))));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != HEADER.len() {
            return Err(Error::parse(file, n, format!("expected {} columns, found {}", HEADER.len(), f.len())));
        }
        let num = |col: usize| -> Result<f64> {
            f[col].trim().parse::<f64>().map_err(|_| {
                Error::parse(file, n, format!("bad {} `{}`", HEADER[col], f[col]))
            })
        };
        let title = f[0].trim().to_string();
        if title.is_empty() {
            return Err(Error::parse(file, n, "empty title"));
        }
        let votes = f[7]
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::parse(file, n, format!("bad votes `{}`", f[7])))?;
        out.push(MovieRecord {
            title,
            year: num(1)? as i32,
            actors: split_list(f[2]),
            director: f[3].trim().to_string(),
            genre: split_list(f[4]),
            plot: f[5].trim().to_string(),
            rating: num(6)?,
            votes,
            awards: f[8].trim().to_string(),
            trivia: split_list(f[9]),
        });
    }
    Ok(out)
}

pub fn load_movies(path: &Path) -> Result<Vec<MovieRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_movies(&text, &path.display().to_string())
}

/// Movie records with a normalized-title lookup.
#[derive(Debug, Clone)]
pub struct MovieDb {
    movies: Vec<MovieRecord>,
    by_title: HashMap<String, usize>,
}

impl MovieDb {
    pub fn new(movies: Vec<MovieRecord>, lexicons: &Lexicons) -> Result<Self> {
        let mut by_title = HashMap::new();
        for (i, m) in movies.iter().enumerate() {
            let key = lexicons.normalize(&m.title).normalized;
            if by_title.insert(key, i).is_some() {
                return Err(Error::Duplicate { kind: "movie", id: m.title.clone() });
            }
        }
        Ok(MovieDb { movies, by_title })
    }

    pub fn builtin() -> Self {
        let text = include_str!("../../data/ckt/movies.tsv");
        let movies = parse_movies(text, "<builtin movies>").expect("shipped movies parse");
        Self::new(movies, Lexicons::builtin()).expect("shipped movies are unique")
    }

    pub fn len(&self) -> usize {
        self.movies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.movies.is_empty()
    }

    pub fn movies(&self) -> &[MovieRecord] {
        &self.movies
    }

    /// Looks a movie up by its normalized title.
    pub fn find(&self, normalized_title: &str) -> Option<&MovieRecord> {
        self.by_title.get(normalized_title).map(|&i| &self.movies[i])
    }

    /// Titles of the `n` most-voted movies.
    pub fn top_titles(&self, n: usize) -> Vec<String> {
        let mut idx: Vec<usize> = (0..self.movies.len()).collect();
        idx.sort_by(|&a, &b| {
            self.movies[b]
                .votes
                .cmp(&self.movies[a].votes)
                .then_with(|| self.movies[a].title.cmp(&self.movies[b].title))
        });
        idx.into_iter().take(n).map(|i| self.movies[i].title.clone()).collect()
    }

    /// Movie titles and actor names as entity records for the search index.
    pub fn entity_records(&self, lexicons: &Lexicons) -> Result<Vec<EntityRecord>> {
        let mut out = Vec::new();
        let mut actors = std::collections::BTreeSet::new();
        for m in &self.movies {
            let slug = lexicons.normalize(&m.title).normalized.replace(' ', "-");
            out.push(EntityRecord::with_lexicons(
                lexicons,
                format!("movie:{slug}"),
                m.title.clone(),
                EntityType::Movie,
                Some(m.votes as f64),
                "movies.tsv",
            )?);
            actors.extend(m.actors.iter().cloned());
        }
        for a in actors {
            let slug = lexicons.normalize(&a).normalized.replace(' ', "-");
            out.push(EntityRecord::with_lexicons(
                lexicons,
                format!("actor:{slug}"),
                a,
                EntityType::MovieActor,
                None,
                "movies.tsv",
            )?);
        }
        Ok(out)
    }

    /// A related movie and a bridge phrase naming the link. Directors are
    /// tried first, then shared actors, then genre, then any popular movie.
    /// Titles in `avoid` are used only when nothing else qualifies. `None`
    /// when the database holds no other movie.
    pub fn next_movie<R: Rng + ?Sized>(
        &self,
        current: &MovieRecord,
        avoid: &[String],
        rng: &mut R,
    ) -> Option<(MovieRecord, String)> {
        let others: Vec<&MovieRecord> =
            self.movies.iter().filter(|m| m.title != current.title).collect();
        if others.is_empty() {
            return None;
        }
        let shared_actor = |m: &MovieRecord| current.actors.iter().find(|a| m.actors.contains(a)).cloned();
        let shared_genre = |m: &MovieRecord| current.genre.iter().find(|g| m.genre.contains(g)).cloned();
        let tiers: [Vec<&MovieRecord>; 3] = [
            others.iter().copied().filter(|m| !current.director.is_empty() && m.director == current.director).collect(),
            others.iter().copied().filter(|m| shared_actor(m).is_some()).collect(),
            others.iter().copied().filter(|m| shared_genre(m).is_some()).collect(),
        ];
        let fresh = |m: &&MovieRecord| !avoid.contains(&m.title);
        let pick_tier = tiers
            .iter()
            .position(|t| t.iter().any(fresh))
            .or_else(|| tiers.iter().position(|t| !t.is_empty()));
        if let Some(tier) = pick_tier {
            let pool: Vec<&MovieRecord> = if tiers[tier].iter().any(fresh) {
                tiers[tier].iter().copied().filter(|m| fresh(m)).collect()
            } else {
                tiers[tier].clone()
            };
            let best = pool.iter().map(|m| m.votes).max().unwrap_or(0);
            let top: Vec<&MovieRecord> = pool.into_iter().filter(|m| m.votes == best).collect();
            let next = (*top.choose(rng).expect("nonempty tier")).clone();
            let bridge = match tier {
                0 => format!("{} also directed {}.", current.director, next.title),
                1 => format!("{} is also in {}.", shared_actor(&next).unwrap_or_default(), next.title),
                _ => format!(
                    "Another great {} movie is {}.",
                    shared_genre(&next).unwrap_or_default(),
                    next.title
                ),
            };
            return Some((next, bridge));
        }
        // nothing related: a random pick among the most popular
        let mut pool: Vec<&MovieRecord> = others.iter().copied().filter(fresh).collect();
        if pool.is_empty() {
            pool = others;
        }
        pool.sort_by(|a, b| b.votes.cmp(&a.votes).then_with(|| a.title.cmp(&b.title)));
        pool.truncate(DEFAULT_SEED_COUNT);
        let next = (*pool.choose(rng).expect("nonempty")).clone();
        let bridge = format!("Another movie I really like is {}.", next.title);
        Some((next, bridge))
    }

    pub fn get_next_movie<R: Rng + ?Sized>(
        &self,
        current: &MovieRecord,
        rng: &mut R,
    ) -> Option<(MovieRecord, String)> {
        self.next_movie(current, &[], rng)
    }
}

fn fill(template: &str, m: &MovieRecord, trivia: &str) -> String {
    let actors = match m.actors.as_slice() {
        [] => String::new(),
        [a] => a.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    };
    let short = m.title.split(':').next().unwrap_or(&m.title).trim();
    template
        .replace("{title}", short)
        .replace("{actors}", &actors)
        .replace("{director}", &m.director)
        .replace("{year}", &m.year.to_string())
        .replace("{plot}", &m.plot)
        .replace("{votes}", &m.votes.to_string())
        .replace("{rating}", &m.rating.to_string())
        .replace("{awards}", &m.awards)
        .replace("{trivia}", trivia)
}

fn pick<'a, R: Rng + ?Sized>(options: &'a [&'a str], rng: &mut R) -> &'a str {
    options.choose(rng).copied().unwrap_or_default()
}

/// The movie template generator.
#[derive(Debug, Clone)]
pub struct MovieCkt {
    db: Arc<MovieDb>,
    seeds: Vec<String>,
    p_generic: f64,
}

impl MovieCkt {
    /// `seeds` empty means the most-voted titles.
    pub fn new(db: Arc<MovieDb>, seeds: Vec<String>) -> Self {
        assert!(!db.is_empty(), "movie database is empty");
        let seeds = if seeds.is_empty() { db.top_titles(DEFAULT_SEED_COUNT) } else { seeds };
        MovieCkt { db, seeds, p_generic: P_GENERIC }
    }

    pub fn with_p_generic(mut self, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p));
        self.p_generic = p;
        self
    }

    pub fn db(&self) -> &MovieDb {
        &self.db
    }

    fn named_movie(&self, entities: &[MatchCandidate]) -> Option<&MovieRecord> {
        entities
            .iter()
            .filter(|c| c.entity.entity_type == EntityType::Movie && c.is_full_match())
            .find_map(|c| self.db.find(&c.entity.normalized_name.normalized))
    }

    /// Sets the change-movie flag: the user named another movie, asked for a
    /// different one, or the attribute stack is spent after a generic question.
    pub fn update_flags(
        &self,
        state: &MovieCktState,
        nt: &NormalizedText,
        entities: &[MatchCandidate],
    ) -> MovieCktState {
        let mut s = state.clone();
        let named = self.named_movie(entities).map(|m| m.title.clone());
        let Some(current) = &s.movie_current else {
            s.target = named;
            return s;
        };
        if let Some(title) = named.filter(|t| *t != current.title) {
            s.cf = true;
            s.target = Some(title);
        }
        let switch = SWITCH_PHRASES
            .iter()
            .any(|p| nt.tokens.windows(p.len()).any(|w| w.iter().zip(p.iter()).all(|(a, b)| a == b)));
        let spent = !s.stack_topic.iter().any(|a| current.has(*a));
        let last_generic = matches!(s.question_last, Some(Question { kind: QuestionKind::Generic, .. }));
        if switch || (spent && last_generic) {
            s.cf = true;
        }
        s
    }

    fn generic<R: Rng + ?Sized>(&self, m: &MovieRecord, rng: &mut R) -> Question {
        Question { kind: QuestionKind::Generic, text: fill(pick(GENERIC_QUESTIONS, rng), m, "") }
    }

    /// Pops attributes until one the movie can answer; generic when none.
    fn pop<R: Rng + ?Sized>(&self, s: &mut MovieCktState, m: &MovieRecord, rng: &mut R) -> Question {
        while let Some(a) = s.stack_topic.pop() {
            if m.has(a) {
                return Question {
                    kind: QuestionKind::Attribute(a),
                    text: fill(pick(a.questions(), rng), m, ""),
                };
            }
        }
        self.generic(m, rng)
    }

    fn answer<R: Rng + ?Sized>(&self, q: &Question, m: &MovieRecord, intent: Intent, rng: &mut R) -> String {
        match q.kind {
            QuestionKind::Generic => match intent {
                Intent::Yes => pick(GENERIC_YES, rng).to_string(),
                Intent::No => pick(GENERIC_NO, rng).to_string(),
                _ => pick(GENERIC_OTHER, rng).to_string(),
            },
            QuestionKind::Attribute(a) => {
                let trivia = m.trivia.choose(rng).cloned().unwrap_or_default();
                let fact = fill(pick(a.answers(), rng), m, &trivia);
                if intent == Intent::Yes {
                    format!("{} {}", pick(YES_PREFIX, rng), fact)
                } else {
                    fact
                }
            }
        }
    }

    fn fresh_stack<R: Rng + ?Sized>(rng: &mut R) -> Vec<Attribute> {
        let mut stack = Attribute::ALL.to_vec();
        stack.shuffle(rng);
        stack
    }

    /// One step of the movie template. The change-movie flag is read from
    /// `state` as is; see [`MovieCkt::update_flags`].
    pub fn respond<R: Rng + ?Sized>(
        &self,
        state: &MovieCktState,
        intent: Intent,
        rng: &mut R,
    ) -> (String, MovieCktState) {
        let mut s = state.clone();
        let Some(current) = s.movie_current.clone() else {
            let named = s.target.take().and_then(|t| self.db.find_title(&t)).cloned();
            let (movie, intro) = match named {
                Some(m) => {
                    let intro = format!("Oh, {}! Good choice.", m.title);
                    (m, intro)
                }
                None => {
                    let title = self.seeds.choose(rng).expect("seed list nonempty");
                    let m = self.db.find_title(title).unwrap_or(&self.db.movies[0]).clone();
                    let intro = format!("Let's talk about movies. One of my favorites is {}.", m.title);
                    (m, intro)
                }
            };
            s.stack_topic = Self::fresh_stack(rng);
            s.visited.push(movie.title.clone());
            let q = self.pop(&mut s, &movie, rng);
            let text = format!("{intro} {}", q.text);
            s.question_last = Some(q);
            s.movie_current = Some(movie);
            s.cf = false;
            return (text, s);
        };

        if s.cf {
            let mut parts = Vec::new();
            if intent == Intent::Yes {
                if let Some(q) = &s.question_last {
                    parts.push(self.answer(q, &current, intent, rng));
                }
            }
            let target = s.target.take().and_then(|t| self.db.find_title(&t)).cloned();
            let pivot = match target {
                Some(m) => Some((m.clone(), format!("Sure, let's talk about {}.", m.title))),
                None => self.db.next_movie(&current, &s.visited, rng),
            };
            let next = match pivot {
                Some((next, bridge)) => {
                    parts.push(bridge);
                    next
                }
                None => current.clone(),
            };
            let q = self.generic(&next, rng);
            parts.push(q.text.clone());
            s.visited.retain(|t| *t != next.title);
            s.visited.push(next.title.clone());
            s.movie_current = Some(next);
            s.stack_topic = Self::fresh_stack(rng);
            s.question_last = Some(q);
            s.cf = false;
            return (parts.join(" "), s);
        }

        let followup;
        let mut parts = Vec::new();
        match s.question_last.clone() {
            Some(last) => {
                parts.push(self.answer(&last, &current, intent, rng));
                let has_attr = s.stack_topic.iter().any(|a| current.has(*a));
                followup = if last.kind == QuestionKind::Generic && has_attr {
                    // never two generic questions in a row while attributes remain
                    self.pop(&mut s, &current, rng)
                } else if last.kind == QuestionKind::Generic || intent == Intent::No {
                    if rng.random_bool(self.p_generic) {
                        self.generic(&current, rng)
                    } else {
                        self.pop(&mut s, &current, rng)
                    }
                } else if rng.random_bool(self.p_generic) || !has_attr {
                    self.generic(&current, rng)
                } else {
                    self.pop(&mut s, &current, rng)
                };
            }
            None => followup = self.pop(&mut s, &current, rng),
        }
        parts.push(followup.text.clone());
        s.question_last = Some(followup);
        (parts.join(" "), s)
    }

    /// Flag update followed by one template step.
    pub fn turn<R: Rng + ?Sized>(
        &self,
        state: &MovieCktState,
        nt: &NormalizedText,
        intent: Intent,
        entities: &[MatchCandidate],
        rng: &mut R,
    ) -> (String, MovieCktState) {
        let s = self.update_flags(state, nt, entities);
        self.respond(&s, intent, rng)
    }
}

impl MovieDb {
    fn find_title(&self, title: &str) -> Option<&MovieRecord> {
        self.movies.iter().find(|m| m.title == title)
    }
}
