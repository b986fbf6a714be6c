//! Entity corpus files: UTF-8 TSV with header
//! `id, name, entity_type, ranking_attribute, source`. An empty
//! `ranking_attribute` means the source has none.

use std::path::Path;

use super::{EntityRecord, EntityType};
use crate::text::Lexicons;
use crate::{Error, Result};

const BUILTIN_CORPUS: &str = include_str!("../../data/entities/general.tsv");

const COLUMNS: [&str; 5] = ["id", "name", "entity_type", "ranking_attribute", "source"];

pub fn parse_corpus(text: &str, file: &str, lexicons: &Lexicons) -> Result<Vec<EntityRecord>> {
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = match lines.next() {
        Some((_, h)) => h.split('\t').map(str::trim).collect(),
        None => return Ok(Vec::new()),
    };
    if header != COLUMNS {
        return Err(Error::parse(
            file,
            1,
            format!("expected header `{}`", COLUMNS.join("\\t")),
        ));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != COLUMNS.len() {
            return Err(Error::parse(
                file,
                line_no,
                format!("expected {} columns, found {}", COLUMNS.len(), cols.len()),
            ));
        }
        let entity_type: EntityType = cols[2]
            .parse()
            .map_err(|e| Error::parse(file, line_no, e))?;
        let ranking = match cols[3].trim() {
            "" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::parse(file, line_no, format!("bad ranking_attribute `{v}`")))?,
            ),
        };
        let record = EntityRecord::with_lexicons(lexicons, cols[0].trim(), cols[1].trim(), entity_type, ranking, cols[4].trim())
            .map_err(|e| Error::parse(file, line_no, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_corpus_file(path: &Path, lexicons: &Lexicons) -> Result<Vec<EntityRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, &path.display().to_string(), lexicons)
}

/// Loads every `*.tsv` file in `dir`, in file-name order.
pub fn load_corpus_dir(dir: &Path, lexicons: &Lexicons) -> Result<Vec<EntityRecord>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(load_corpus_file(&f, lexicons)?);
    }
    Ok(out)
}

/// The shipped general-interest corpus (people, teams, books, songs, games).
pub fn builtin_corpus(lexicons: &Lexicons) -> Vec<EntityRecord> {
    parse_corpus(BUILTIN_CORPUS, "<builtin entities>", lexicons).expect("shipped corpus parses")
}
