//! Per-token edit tags: encoding a correction pair as tags, applying tags to
//! a source, and bounded iterative correction with a pluggable tagger.
//!
//! A [`TagSequence`] has one slot per source token plus a leading slot for a
//! synthetic start marker, which only takes `KEEP` or `APPEND`. Split
//! corrections are `REPLACE` tags whose payload holds one [`SPLIT_MARKER`].

use std::fmt;

use thiserror::Error;

use crate::text::{is_valid_surface, Sentence, TextConfig};

/// Separates the two output tokens of a split `REPLACE` payload.
pub const SPLIT_MARKER: char = '\u{2423}';

/// Token shown for the start slot in tag dumps.
pub const START_TOKEN: &str = "$START";

pub const DEFAULT_MAX_ITERS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TokenTag {
    Keep,
    Delete,
    Append(String),
    Replace(String),
    Merge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TagKind {
    Keep,
    Delete,
    Append,
    Replace,
    Merge,
}

impl TagKind {
    pub const ALL: [TagKind; 5] = [
        TagKind::Keep,
        TagKind::Delete,
        TagKind::Append,
        TagKind::Replace,
        TagKind::Merge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Keep => "KEEP",
            Self::Delete => "DELETE",
            Self::Append => "APPEND",
            Self::Replace => "REPLACE",
            Self::Merge => "MERGE",
        }
    }
}

impl TokenTag {
    pub fn kind(&self) -> TagKind {
        match self {
            Self::Keep => TagKind::Keep,
            Self::Delete => TagKind::Delete,
            Self::Append(_) => TagKind::Append,
            Self::Replace(_) => TagKind::Replace,
            Self::Merge => TagKind::Merge,
        }
    }

    pub fn split(first: &str, second: &str) -> Self {
        Self::Replace(format!("{first}{SPLIT_MARKER}{second}"))
    }

    pub fn parse(s: &str) -> Result<Self, TagError> {
        let (name, payload) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let tag = match (name, payload) {
            ("KEEP", None) => Self::Keep,
            ("DELETE", None) => Self::Delete,
            ("MERGE", None) => Self::Merge,
            ("APPEND", Some(p)) => Self::Append(p.to_string()),
            ("REPLACE", Some(p)) => Self::Replace(p.to_string()),
            _ => return Err(TagError::UnknownTag(s.to_string())),
        };
        Ok(tag)
    }
}

impl fmt::Display for TokenTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Append(p) => write!(f, "APPEND:{p}"),
            Self::Replace(p) => write!(f, "REPLACE:{p}"),
            other => f.write_str(other.kind().name()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagError {
    #[error("expected {expected} tags (source length + 1), found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("malformed tag at position {position}: {reason}")]
    MalformedTags { position: usize, reason: String },
    #[error("unknown tag {0:?}")]
    UnknownTag(String),
    #[error("tag dump line has an odd number of fields or a bad start slot")]
    BadDumpLine,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TagSequence {
    pub tags: Vec<TokenTag>,
}

impl TagSequence {
    pub fn all_keep(src_len: usize) -> Self {
        Self {
            tags: vec![TokenTag::Keep; src_len + 1],
        }
    }

    pub fn is_all_keep(&self) -> bool {
        self.tags.iter().all(|t| *t == TokenTag::Keep)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Checks the structural contract against a source of `src_len` tokens.
    pub fn validate(&self, src_len: usize) -> Result<(), TagError> {
        if self.tags.len() != src_len + 1 {
            return Err(TagError::LengthMismatch {
                expected: src_len + 1,
                found: self.tags.len(),
            });
        }
        let bad = |position: usize, reason: &str| TagError::MalformedTags {
            position,
            reason: reason.to_string(),
        };
        for (position, tag) in self.tags.iter().enumerate() {
            match tag {
                TokenTag::Delete | TokenTag::Replace(_) | TokenTag::Merge if position == 0 => {
                    return Err(bad(0, "the start slot only admits KEEP or APPEND"));
                }
                TokenTag::Merge if position == src_len => {
                    return Err(bad(position, "MERGE on the last token"));
                }
                TokenTag::Append(p) => {
                    if !is_valid_surface(p) || p.contains(SPLIT_MARKER) {
                        return Err(bad(position, "APPEND payload must be one token"));
                    }
                }
                TokenTag::Replace(p) => {
                    let parts: Vec<&str> = p.split(SPLIT_MARKER).collect();
                    if parts.len() > 2 || parts.iter().any(|s| !is_valid_surface(s)) {
                        return Err(bad(position, "REPLACE payload must be one token or two split parts"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tags.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

// Lattice costs. Deferring a target token to a later pass outranks any
// number of tag costs; among complete encodings the more literal tags win.
const COST_DEFER: u64 = 1 << 32;
const COST_TAG: u64 = 10;
const COST_ABSORB: u64 = 20;

#[derive(Clone, Copy, Debug)]
enum Unit {
    Keep,
    KeepAppend,
    Replace,
    Delete,
    Split,
    Merge(usize),
    StartAppend,
    Defer,
}

/// One greedy pass of tags that moves `src` toward `tgt`.
///
/// Finds a minimum-cost cover of the pair by tag units: KEEP, REPLACE,
/// DELETE, APPEND after a kept token or at the start, REPLACE with a split
/// payload, and MERGE chains. Target tokens no unit can place are left for a
/// later pass, at most as many as the insertions of an optimal alignment
/// minus one, so each pass strictly reduces the token edit distance.
pub fn encode_tags(src: &Sentence, tgt: &Sentence) -> TagSequence {
    let s: Vec<&str> = src.surfaces();
    let t: Vec<&str> = tgt.surfaces();
    let (p, q) = (s.len(), t.len());
    let idx = |i: usize, j: usize| i * (q + 1) + j;
    let mut best = vec![u64::MAX; (p + 1) * (q + 1)];
    let mut back: Vec<Option<(usize, usize, Unit)>> = vec![None; (p + 1) * (q + 1)];
    best[idx(0, 0)] = 0;
    for i in 0..=p {
        for j in 0..=q {
            let here = best[idx(i, j)];
            if here == u64::MAX {
                continue;
            }
            let mut relax = |ni: usize, nj: usize, cost: u64, unit: Unit| {
                let c = here + cost;
                if c < best[idx(ni, nj)] {
                    best[idx(ni, nj)] = c;
                    back[idx(ni, nj)] = Some((i, j, unit));
                }
            };
            if i < p && j < q {
                if s[i] == t[j] {
                    relax(i + 1, j + 1, 0, Unit::Keep);
                    if j + 1 < q {
                        relax(i + 1, j + 2, COST_TAG, Unit::KeepAppend);
                    }
                } else {
                    relax(i + 1, j + 1, COST_TAG, Unit::Replace);
                }
            }
            if i < p {
                relax(i + 1, j, COST_TAG, Unit::Delete);
            }
            if i < p && j + 1 < q {
                let natural = s[i].len() == t[j].len() + t[j + 1].len()
                    && s[i].starts_with(t[j])
                    && s[i].ends_with(t[j + 1]);
                relax(i + 1, j + 2, if natural { COST_TAG } else { COST_ABSORB }, Unit::Split);
            }
            if j < q {
                if i < p {
                    let mut joined = String::from(s[i]);
                    for k in 2..=p - i {
                        joined.push_str(s[i + k - 1]);
                        if joined.len() > t[j].len() {
                            break;
                        }
                        if joined == t[j] {
                            relax(i + k, j + 1, COST_TAG, Unit::Merge(k));
                        }
                    }
                }
                if i == 0 && j == 0 {
                    relax(0, 1, COST_TAG, Unit::StartAppend);
                }
                relax(i, j + 1, COST_DEFER, Unit::Defer);
            }
        }
    }

    let mut tags = TagSequence::all_keep(p);
    let (mut i, mut j) = (p, q);
    while let Some((pi, pj, unit)) = back[idx(i, j)] {
        let slot = pi + 1;
        match unit {
            Unit::Keep | Unit::Defer => {}
            Unit::KeepAppend => tags.tags[slot] = TokenTag::Append(t[pj + 1].to_string()),
            Unit::Replace => tags.tags[slot] = TokenTag::Replace(t[pj].to_string()),
            Unit::Delete => tags.tags[slot] = TokenTag::Delete,
            Unit::Split => tags.tags[slot] = TokenTag::split(t[pj], t[pj + 1]),
            Unit::Merge(k) => {
                for tag in &mut tags.tags[slot..slot + k - 1] {
                    *tag = TokenTag::Merge;
                }
            }
            Unit::StartAppend => tags.tags[0] = TokenTag::Append(t[0].to_string()),
        }
        (i, j) = (pi, pj);
    }
    tags
}

/// Applies tags left to right. MERGE glues a token to the first token
/// emitted by the following slot.
pub fn decode_tags_with(cfg: &TextConfig, src: &Sentence, tags: &TagSequence) -> Result<Sentence, TagError> {
    tags.validate(src.len())?;
    let mut out: Vec<String> = Vec::with_capacity(src.len() + 2);
    let mut glue = false;
    let push = |out: &mut Vec<String>, s: &str, glue: &mut bool| {
        match out.last_mut() {
            Some(last) if *glue => last.push_str(s),
            _ => out.push(s.to_string()),
        }
        *glue = false;
    };
    if let TokenTag::Append(p) = &tags.tags[0] {
        push(&mut out, p, &mut glue);
    }
    for (token, tag) in src.tokens.iter().zip(&tags.tags[1..]) {
        match tag {
            TokenTag::Keep => push(&mut out, token.surface(), &mut glue),
            TokenTag::Delete => {}
            TokenTag::Append(p) => {
                push(&mut out, token.surface(), &mut glue);
                push(&mut out, p, &mut glue);
            }
            TokenTag::Replace(p) => {
                for part in p.split(SPLIT_MARKER) {
                    push(&mut out, part, &mut glue);
                }
            }
            TokenTag::Merge => {
                push(&mut out, token.surface(), &mut glue);
                glue = true;
            }
        }
    }
    Ok(Sentence::new(
        src.id.clone(),
        out.into_iter().map(|s| cfg.token(s)).collect(),
    ))
}

pub fn decode_tags(src: &Sentence, tags: &TagSequence) -> Result<Sentence, TagError> {
    decode_tags_with(&TextConfig::default(), src, tags)
}

#[derive(Debug, Error)]
pub enum IterateError<E> {
    #[error("max_iters must be at least 1")]
    ZeroIterations,
    #[error("tagger failed: {0}")]
    Tagger(E),
    #[error(transparent)]
    Decode(#[from] TagError),
}

/// Outcome of [`iterative_correct`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub sentence: Sentence,
    /// Number of tagger invocations.
    pub iterations: usize,
}

/// Runs tagger + decode until a pass is all KEEP or `max_iters` passes ran.
pub fn iterative_correct<E>(
    src: &Sentence,
    mut tagger: impl FnMut(&Sentence) -> Result<TagSequence, E>,
    max_iters: usize,
) -> Result<Correction, IterateError<E>> {
    if max_iters == 0 {
        return Err(IterateError::ZeroIterations);
    }
    let mut current = src.clone();
    for iteration in 1..=max_iters {
        let tags = tagger(&current).map_err(IterateError::Tagger)?;
        if tags.is_all_keep() {
            tags.validate(current.len())?;
            return Ok(Correction {
                sentence: current,
                iterations: iteration,
            });
        }
        current = decode_tags(&current, &tags)?;
    }
    Ok(Correction {
        sentence: current,
        iterations: max_iters,
    })
}

/// Iterative correction with the encoder itself as tagger.
pub fn oracle_correct(src: &Sentence, reference: &Sentence, max_iters: usize) -> Correction {
    iterative_correct(
        src,
        |s| Ok::<_, std::convert::Infallible>(encode_tags(s, reference)),
        max_iters,
    )
    .expect("encoder output always decodes")
}

/// Tag counts over a corpus, start slots included.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EditSpaceStats {
    pub counts: [usize; 5],
}

impl EditSpaceStats {
    pub fn get(&self, kind: TagKind) -> usize {
        self.counts[kind as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn add(&mut self, tags: &TagSequence) {
        for t in &tags.tags {
            self.counts[t.kind() as usize] += 1;
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::from("Tag        Count     Share\n");
        let total = self.total().max(1) as f64;
        for k in TagKind::ALL {
            out.push_str(&format!(
                "{:<8}{:>8}{:>9.2}%\n",
                k.name(),
                self.get(k),
                self.get(k) as f64 * 100.0 / total
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let counts: serde_json::Map<String, serde_json::Value> =
            TagKind::ALL.iter().map(|&k| (k.name().to_string(), self.get(k).into())).collect();
        serde_json::json!({ "total": self.total(), "counts": counts })
    }
}

pub fn edit_space_stats<'a>(pairs: impl IntoIterator<Item = (&'a Sentence, &'a Sentence)>) -> EditSpaceStats {
    let mut stats = EditSpaceStats::default();
    for (src, tgt) in pairs {
        stats.add(&encode_tags(src, tgt));
    }
    stats
}

/// One dump line: `$START<TAB>TAG<TAB>token<TAB>TAG...`.
pub fn dump_line(src: &Sentence, tags: &TagSequence) -> String {
    let mut fields = vec![START_TOKEN.to_string(), tags.tags[0].to_string()];
    for (token, tag) in src.tokens.iter().zip(&tags.tags[1..]) {
        fields.push(token.surface().to_string());
        fields.push(tag.to_string());
    }
    fields.join("\t")
}

pub fn parse_dump_line(cfg: &TextConfig, line: &str) -> Result<(Sentence, TagSequence), TagError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if !fields.len().is_multiple_of(2) || fields.first() != Some(&START_TOKEN) {
        return Err(TagError::BadDumpLine);
    }
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    for (i, pair) in fields.chunks(2).enumerate() {
        if i > 0 {
            if !is_valid_surface(pair[0]) {
                return Err(TagError::BadDumpLine);
            }
            tokens.push(cfg.token(pair[0]));
        }
        tags.push(TokenTag::parse(pair[1])?);
    }
    let src = Sentence::new("", tokens);
    let seq = TagSequence { tags };
    seq.validate(src.len())?;
    Ok((src, seq))
}
