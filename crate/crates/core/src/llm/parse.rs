//! Recovering a corrected sentence from a free-form model reply.

use thiserror::Error;

use crate::text::{tokenize, Sentence};

const OPEN: &str = "<output>";
const CLOSE: &str = "</output>";

/// Labels stripped from the start of a line in the tag-free fallback.
const LABELS: &[&str] = &[
    "corrected sentence",
    "corrected",
    "correction",
    "output",
    "answer",
    "result",
    "الجملة المصححة",
    "التصحيح",
    "الإجابة",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedOutput {
    pub sentence: Sentence,
    /// Set when no tagged span was found and a heuristic picked the line.
    pub low_confidence: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no candidate correction in model output")]
    Unparseable,
}

fn is_arabic(c: char) -> bool {
    ('\u{0600}'..='\u{06FF}').contains(&c) || ('\u{0750}'..='\u{077F}').contains(&c)
}

/// First non-empty `<output>...</output>` span, trimmed.
fn tagged_span(raw: &str) -> Option<&str> {
    let mut rest = raw;
    while let Some(open) = rest.find(OPEN) {
        let after = &rest[open + OPEN.len()..];
        let close = after.find(CLOSE)?;
        let inner = after[..close].trim();
        if !inner.is_empty() {
            return Some(inner);
        }
        rest = &after[close + CLOSE.len()..];
    }
    None
}

fn strip_label(line: &str) -> &str {
    let mut s = line.trim().trim_start_matches(['*', '-', '#', '>', ' ']).trim();
    for tag in ["<output>", "</output>", "<input>", "</input>"] {
        s = s.trim_start_matches(tag).trim_end_matches(tag).trim();
    }
    let lower = s.to_lowercase();
    for label in LABELS {
        if lower.starts_with(label) {
            let rest = &s[label.len()..];
            if let Some(r) = rest.trim_start().strip_prefix([':', '：']) {
                return r.trim();
            }
        }
    }
    s
}

fn strip_quotes(s: &str) -> &str {
    s.trim_matches(|c: char| matches!(c, '"' | '\'' | '«' | '»' | '“' | '”' | '`'))
        .trim()
}

pub fn parse_model_output(raw: &str) -> Result<ParsedOutput, ParseError> {
    if let Some(span) = tagged_span(raw) {
        return Ok(ParsedOutput {
            sentence: tokenize(span),
            low_confidence: false,
        });
    }
    raw.lines()
        .map(|l| strip_quotes(strip_label(l))).rfind(|l| l.chars().any(is_arabic))
        .map(|l| ParsedOutput {
            sentence: tokenize(l),
            low_confidence: true,
        })
        .ok_or(ParseError::Unparseable)
}
