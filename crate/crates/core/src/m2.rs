//! Reader and writer for M² annotation files.
//!
//! ```text
//! S <space separated source tokens>
//! A <start> <end>|||<type>|||<correction>|||REQUIRED|||-NONE-|||<annotator>
//!
//! ```
//!
//! A `-NONE-` correction is an empty replacement. A block without `A` lines
//! is a sentence that annotator 0 left untouched; other annotators with no
//! edits are written as `A -1 -1|||noop|||...` lines so their ids survive a
//! round trip.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

use crate::align::{diff, validate_edits, Edit, EditError};
use crate::text::{Sentence, TextConfig};
use crate::typer;

pub const NONE_CORRECTION: &str = "-NONE-";
pub const NO_CLASS: &str = "NA";
const REQUIRED: &str = "REQUIRED";
const FIELD_SEP: &str = "|||";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct M2Record {
    pub source: Sentence,
    /// Annotator id to that annotator's sorted edit list.
    pub annotations: BTreeMap<u32, Vec<Edit>>,
}

impl M2Record {
    /// A record where annotator 0 made no edits.
    pub fn unannotated(source: Sentence) -> Self {
        Self {
            source,
            annotations: BTreeMap::from([(0, Vec::new())]),
        }
    }

    pub fn edits(&self, annotator: u32) -> Option<&[Edit]> {
        self.annotations.get(&annotator).map(Vec::as_slice)
    }

    /// Edits of the lowest-numbered annotator.
    pub fn first_edits(&self) -> &[Edit] {
        self.annotations
            .values()
            .next()
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn validate(&self) -> Result<(), EditError> {
        self.annotations
            .values()
            .try_for_each(|edits| validate_edits(edits, self.source.len()))
    }
}

#[derive(Debug, Error)]
pub enum M2Error {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: {source}")]
    SpanOutOfRange { line: usize, source: EditError },
    #[error("line {line}: {source}")]
    UnsortedEdits { line: usize, source: EditError },
    #[error("reading M2 input: {0}")]
    Io(#[from] std::io::Error),
}

struct PendingBlock {
    record: M2Record,
    // line number of each annotator's last A line, for error reporting
    last_line: BTreeMap<u32, usize>,
    saw_annotation: bool,
}

fn malformed(line: usize, reason: impl Into<String>) -> M2Error {
    M2Error::MalformedLine {
        line,
        reason: reason.into(),
    }
}

fn finish_block(block: PendingBlock) -> Result<M2Record, M2Error> {
    let PendingBlock {
        mut record,
        last_line,
        saw_annotation,
    } = block;
    if !saw_annotation {
        record.annotations.insert(0, Vec::new());
    }
    for (annotator, edits) in &record.annotations {
        let line = last_line.get(annotator).copied().unwrap_or(0);
        validate_edits(edits, record.source.len()).map_err(|e| match e {
            EditError::SpanOutOfRange { .. } => M2Error::SpanOutOfRange { line, source: e },
            EditError::Vacuous { .. } => malformed(line, e.to_string()),
            _ => M2Error::UnsortedEdits { line, source: e },
        })?;
    }
    Ok(record)
}

fn parse_a_line(
    body: &str,
    line: usize,
    src_len: usize,
    cfg: &TextConfig,
) -> Result<(u32, Option<Edit>), M2Error> {
    let fields: Vec<&str> = body.split(FIELD_SEP).collect();
    if fields.len() != 6 {
        return Err(malformed(
            line,
            format!("expected 6 |||-separated fields, found {}", fields.len()),
        ));
    }
    let annotator: u32 = fields[5]
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("bad annotator id {:?}", fields[5])))?;
    let mut span = fields[0].split(' ');
    let (Some(start), Some(end), None) = (span.next(), span.next(), span.next()) else {
        return Err(malformed(line, format!("bad span {:?}", fields[0])));
    };
    if start == "-1" && end == "-1" {
        return Ok((annotator, None));
    }
    let parse_index = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| malformed(line, format!("bad span index {s:?}")))
    };
    let (start, end) = (parse_index(start)?, parse_index(end)?);
    if start > end || end > src_len {
        return Err(M2Error::SpanOutOfRange {
            line,
            source: EditError::SpanOutOfRange {
                index: 0,
                start,
                end,
                len: src_len,
            },
        });
    }
    let correction = fields[2];
    let replacement = if correction == NONE_CORRECTION || correction.is_empty() {
        Vec::new()
    } else {
        correction.split(' ').map(|w| {
            if w.is_empty() {
                Err(malformed(line, "empty token in correction"))
            } else {
                Ok(cfg.token(w))
            }
        })
        .collect::<Result<_, _>>()?
    };
    let edit = Edit::new(start, end, replacement)
        .with_class(fields[1])
        .with_annotator(annotator);
    Ok((annotator, Some(edit)))
}

/// Parses M² text read from `reader`.
pub fn parse_m2_reader<R: BufRead>(reader: R, cfg: &TextConfig) -> Result<Vec<M2Record>, M2Error> {
    let mut records = Vec::new();
    let mut block: Option<PendingBlock> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.is_empty() {
            if let Some(b) = block.take() {
                records.push(finish_block(b)?);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('S').filter(|r| r.is_empty() || r.starts_with(' ')) {
            if let Some(b) = block.take() {
                records.push(finish_block(b)?);
            }
            let source = cfg.tokenize_m2_source(rest.strip_prefix(' ').unwrap_or(""), line_no)?;
            block = Some(PendingBlock {
                record: M2Record {
                    source,
                    annotations: BTreeMap::new(),
                },
                last_line: BTreeMap::new(),
                saw_annotation: false,
            });
        } else if let Some(rest) = line.strip_prefix("A ") {
            let Some(b) = block.as_mut() else {
                return Err(malformed(line_no, "A line before any S line"));
            };
            let (annotator, edit) = parse_a_line(rest, line_no, b.record.source.len(), cfg)?;
            b.saw_annotation = true;
            b.last_line.insert(annotator, line_no);
            let edits = b.record.annotations.entry(annotator).or_default();
            edits.extend(edit);
        } else {
            return Err(malformed(line_no, "expected an S line, an A line or a blank line"));
        }
    }
    if let Some(b) = block.take() {
        records.push(finish_block(b)?);
    }
    Ok(records)
}

pub fn parse_m2(text: &str) -> Result<Vec<M2Record>, M2Error> {
    parse_m2_reader(text.as_bytes(), &TextConfig::default())
}

impl TextConfig {
    // S lines are already tokenized; split on single spaces only.
    fn tokenize_m2_source(&self, text: &str, line: usize) -> Result<Sentence, M2Error> {
        if text.is_empty() {
            return Ok(Sentence::default());
        }
        let tokens = text
            .split(' ')
            .map(|w| {
                if w.is_empty() || w.chars().any(char::is_whitespace) {
                    Err(malformed(line, "source tokens must be separated by single spaces"))
                } else {
                    Ok(self.token(w))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Sentence::new("", tokens))
    }
}

fn write_a_line(out: &mut String, e: &Edit, annotator: u32) {
    let correction = if e.replacement.is_empty() {
        NONE_CORRECTION.to_string()
    } else {
        e.replacement_surfaces().join(" ")
    };
    let class = e.class.as_deref().unwrap_or(NO_CLASS);
    let _ = writeln!(
        out,
        "A {} {}|||{class}|||{correction}|||{REQUIRED}|||-NONE-|||{annotator}",
        e.start, e.end
    );
}

/// Writes records in canonical form: A lines grouped by ascending annotator,
/// each block followed by one blank line.
pub fn emit_m2(records: &[M2Record]) -> String {
    let mut out = String::new();
    for r in records {
        out.push('S');
        out.push(' ');
        out.push_str(&r.source.surfaces().join(" "));
        out.push('\n');
        let only_zero = r.annotations.len() == 1 && r.annotations.contains_key(&0);
        for (&annotator, edits) in &r.annotations {
            if edits.is_empty() {
                if !only_zero {
                    let _ = writeln!(
                        out,
                        "A -1 -1|||noop|||{NONE_CORRECTION}|||{REQUIRED}|||-NONE-|||{annotator}"
                    );
                }
                continue;
            }
            for e in edits {
                write_a_line(&mut out, e, annotator);
            }
        }
        out.push('\n');
    }
    out
}

/// Builds a single-annotator record from a source/reference pair. With
/// `with_types` the class field carries the error-type code, otherwise `NA`.
pub fn annotate_pair(src: &Sentence, reference: &Sentence, annotator: u32, with_types: bool) -> M2Record {
    let edits = diff(src, reference)
        .into_iter()
        .map(|e| {
            let class = if with_types {
                typer::classify_edit(&e, src).code().to_string()
            } else {
                NO_CLASS.to_string()
            };
            e.with_class(class).with_annotator(annotator)
        })
        .collect();
    M2Record {
        source: src.clone(),
        annotations: BTreeMap::from([(annotator, edits)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::apply_edits;
    use crate::text::tokenize;

    const SAMPLE: &str = "S الرجل ، يركب الفرس\n\
A 1 2|||PT|||-NONE-|||REQUIRED|||-NONE-|||0\n\
A 4 4|||PM|||.|||REQUIRED|||-NONE-|||0\n\
\n\
S غداالرجل سيركب\n\
\n";

    #[test]
    fn empty_stream() {
        assert!(parse_m2("").unwrap().is_empty());
        assert_eq!(emit_m2(&[]), "");
    }

    #[test]
    fn block_without_annotations_is_annotator_zero_noop() {
        let recs = parse_m2("S a b\n\n").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].annotations, BTreeMap::from([(0, vec![])]));
        assert_eq!(emit_m2(&recs), "S a b\n\n");
    }

    #[test]
    fn sample_round_trips() {
        let recs = parse_m2(SAMPLE).unwrap();
        assert_eq!(recs.len(), 2);
        let e = &recs[0].annotations[&0];
        assert_eq!(e.len(), 2);
        assert!(e[0].replacement.is_empty());
        assert_eq!(e[1].replacement_surfaces(), vec!["."]);
        assert_eq!(e[0].class.as_deref(), Some("PT"));
        assert_eq!(emit_m2(&recs), SAMPLE);
        let fixed = apply_edits(&recs[0].source, e).unwrap();
        assert_eq!(fixed.surfaces(), vec!["الرجل", "يركب", "الفرس", "."]);
    }

    #[test]
    fn multiple_annotators_keep_ids() {
        let text = "S a b\n\
A 0 1|||NA|||x|||REQUIRED|||-NONE-|||0\n\
A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||3\n\
\n";
        let recs = parse_m2(text).unwrap();
        assert_eq!(recs[0].annotations.keys().copied().collect::<Vec<_>>(), vec![0, 3]);
        assert!(recs[0].annotations[&3].is_empty());
        assert_eq!(emit_m2(&recs), text);
    }

    #[test]
    fn missing_trailing_blank_line_is_accepted() {
        let recs = parse_m2("S a\nA 0 1|||NA|||b|||REQUIRED|||-NONE-|||0").unwrap();
        assert_eq!(recs[0].annotations[&0].len(), 1);
    }

    #[test]
    fn malformed_inputs_report_line_numbers() {
        let err = parse_m2("S a b\nA 0 1|||NA|||x\n").unwrap_err();
        assert!(matches!(err, M2Error::MalformedLine { line: 2, .. }), "{err}");
        let err = parse_m2("S a b\n\nX junk\n").unwrap_err();
        assert!(matches!(err, M2Error::MalformedLine { line: 3, .. }));
        let err = parse_m2("A 0 1|||NA|||x|||REQUIRED|||-NONE-|||0\n").unwrap_err();
        assert!(matches!(err, M2Error::MalformedLine { line: 1, .. }));
        let err = parse_m2("S a b\nA 1 3|||NA|||x|||REQUIRED|||-NONE-|||0\n").unwrap_err();
        assert!(matches!(err, M2Error::SpanOutOfRange { line: 2, .. }));
        let err = parse_m2(
            "S a b\nA 1 2|||NA|||x|||REQUIRED|||-NONE-|||0\nA 0 1|||NA|||y|||REQUIRED|||-NONE-|||0\n",
        )
        .unwrap_err();
        assert!(matches!(err, M2Error::UnsortedEdits { line: 3, .. }));
        let err = parse_m2("S a b\nA 1 1|||NA|||-NONE-|||REQUIRED|||-NONE-|||0\n").unwrap_err();
        assert!(matches!(err, M2Error::MalformedLine { line: 2, .. }));
        let err = parse_m2("S a b\nA x 1|||NA|||y|||REQUIRED|||-NONE-|||0\n").unwrap_err();
        assert!(matches!(err, M2Error::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn annotate_identical_pair_has_no_a_lines() {
        let s = tokenize("الرجل يركب الفرس .");
        let rec = annotate_pair(&s, &s, 0, false);
        assert_eq!(emit_m2(&[rec]), "S الرجل يركب الفرس .\n\n");
    }

    #[test]
    fn annotate_merged_words_pair() {
        let src = tokenize("غداالرجل سيركب الفرس .");
        let reference = tokenize("غدا الرجل سيركب الفرس .");
        let rec = annotate_pair(&src, &reference, 0, true);
        assert_eq!(
            emit_m2(&[rec]),
            "S غداالرجل سيركب الفرس .\nA 0 1|||MG|||غدا الرجل|||REQUIRED|||-NONE-|||0\n\n"
        );
        let untyped = annotate_pair(&src, &reference, 2, false);
        assert!(emit_m2(&[untyped]).contains("|||NA|||غدا الرجل|||REQUIRED|||-NONE-|||2\n"));
    }
}
