//! ConceptNet assertion dump reader.
//!
//! Each record is a tab-separated line:
//! `assertion-uri  relation-uri  start-uri  end-uri  {json metadata}`.
//! Concept URIs look like `/c/en/dog` or `/c/en/dog/n/wn/animal`.

use std::io::BufRead;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::vocab::{normalize, ConceptVocabulary};

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeEdge {
    pub start: String,
    pub end: String,
    pub weight: f64,
}

/// Edges plus counters for everything that was not turned into an edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DumpParse {
    pub edges: Vec<KnowledgeEdge>,
    pub lines: usize,
    /// Lines that could not be parsed as an assertion record.
    pub malformed: usize,
    /// Well-formed lines dropped by the language filter, the vocabulary
    /// restriction, phrase terms, or self-loops.
    pub filtered: usize,
}

impl DumpParse {
    pub fn parsed(&self) -> usize {
        self.lines - self.malformed
    }
}

/// Splits a concept URI into (language, term). Underscores become spaces.
pub fn parse_concept_uri(uri: &str) -> Option<(&str, String)> {
    let mut parts = uri.strip_prefix("/c/")?.split('/');
    let lang = parts.next().filter(|s| !s.is_empty())?;
    let term = parts.next().filter(|s| !s.is_empty())?;
    Some((lang, term.replace('_', " ")))
}

struct Record<'a> {
    start: &'a str,
    end: &'a str,
    weight: f64,
}

fn parse_record(line: &str) -> Option<Record<'_>> {
    let mut fields = line.split('\t');
    let _assertion = fields.next()?;
    let _relation = fields.next()?;
    let start = fields.next()?;
    let end = fields.next()?;
    let meta = fields.next()?;
    if fields.next().is_some() {
        return None;
    }
    let meta: Value = serde_json::from_str(meta).ok()?;
    let weight = meta.get("weight")?.as_f64()?;
    if !(weight.is_finite() && weight > 0.0) {
        return None;
    }
    Some(Record { start, end, weight })
}

/// Reads assertion lines and keeps edges whose endpoints both belong to
/// `language` and normalize to vocabulary concepts.
///
/// Malformed lines are counted, not fatal. Fails with `Format` only when
/// no line at all could be parsed.
pub fn parse_dump<R: BufRead>(
    mut reader: R,
    vocab: &ConceptVocabulary,
    language: &str,
) -> Result<DumpParse> {
    let mut out = DumpParse::default();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let raw = match std::str::from_utf8(&buf) {
            Ok(s) => s.trim_end_matches(['\n', '\r']),
            Err(_) => {
                out.lines += 1;
                out.malformed += 1;
                continue;
            }
        };
        if raw.is_empty() {
            continue;
        }
        out.lines += 1;
        let Some(rec) = parse_record(raw) else {
            out.malformed += 1;
            continue;
        };
        let (Some((start_lang, start)), Some((end_lang, end))) =
            (parse_concept_uri(rec.start), parse_concept_uri(rec.end))
        else {
            out.malformed += 1;
            continue;
        };
        match (
            concept_term(start_lang, &start, vocab, language),
            concept_term(end_lang, &end, vocab, language),
        ) {
            (Some(s), Some(e)) if s != e => out.edges.push(KnowledgeEdge {
                start: s,
                end: e,
                weight: rec.weight,
            }),
            _ => out.filtered += 1,
        }
    }
    if out.parsed() == 0 {
        return Err(Error::Format {
            lines: out.lines,
            malformed: out.malformed,
        });
    }
    log::debug!(
        "dump: {} lines, {} edges, {} malformed, {} filtered",
        out.lines,
        out.edges.len(),
        out.malformed,
        out.filtered
    );
    Ok(out)
}

fn concept_term(lang: &str, term: &str, vocab: &ConceptVocabulary, language: &str) -> Option<String> {
    if lang != language || !term.chars().all(char::is_alphabetic) {
        return None;
    }
    let lemma = normalize(term);
    vocab.index_of_lemma(&lemma).map(|_| lemma)
}
