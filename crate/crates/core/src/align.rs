//! Token-level Levenshtein alignment, phrase-level edit extraction and
//! application, and classification of edits into action kinds.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{Sentence, Token};

/// One step of an alignment between a source and a target sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlignOp {
    Match { src: usize, tgt: usize },
    Substitute { src: usize, tgt: usize },
    Insert { tgt: usize },
    Delete { src: usize },
}

impl AlignOp {
    pub fn src_index(self) -> Option<usize> {
        match self {
            Self::Match { src, .. } | Self::Substitute { src, .. } | Self::Delete { src } => {
                Some(src)
            }
            Self::Insert { .. } => None,
        }
    }

    pub fn tgt_index(self) -> Option<usize> {
        match self {
            Self::Match { tgt, .. } | Self::Substitute { tgt, .. } | Self::Insert { tgt } => {
                Some(tgt)
            }
            Self::Delete { .. } => None,
        }
    }

    pub fn is_match(self) -> bool {
        matches!(self, Self::Match { .. })
    }

    pub fn cost(self) -> usize {
        usize::from(!self.is_match())
    }
}

/// A span replacement on source tokens. `start == end` is an insertion
/// before `start`; an empty replacement with `start < end` is a deletion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<Token>,
    pub class: Option<String>,
    pub annotator: u32,
}

impl Edit {
    pub fn new(start: usize, end: usize, replacement: Vec<Token>) -> Self {
        Self {
            start,
            end,
            replacement,
            class: None,
            annotator: 0,
        }
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class = Some(class.into());
        self
    }

    pub fn with_annotator(mut self, annotator: u32) -> Self {
        self.annotator = annotator;
        self
    }

    pub fn span_len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    pub fn is_deletion(&self) -> bool {
        self.start < self.end && self.replacement.is_empty()
    }

    pub fn replacement_surfaces(&self) -> Vec<&str> {
        self.replacement.iter().map(Token::surface).collect()
    }

    /// Span, replacement surfaces; ignores class and annotator.
    pub fn key(&self) -> (usize, usize, Vec<&str>) {
        (self.start, self.end, self.replacement_surfaces())
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}..{} -> [{}]",
            self.start,
            self.end,
            self.replacement_surfaces().join(" ")
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EditError {
    #[error("edit {index} ({start}..{end}) is outside a source of {len} tokens")]
    SpanOutOfRange {
        index: usize,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("edit {index} overlaps the preceding edit")]
    OverlappingEdits { index: usize },
    #[error("edit {index} is not sorted after the preceding edit")]
    Unsorted { index: usize },
    #[error("edit {index} is an empty insertion")]
    Vacuous { index: usize },
}

/// Checks the per-edit and list invariants: spans in range, no vacuous
/// insertions, sorted by `(start, end)`, no overlaps, and no two insertions
/// at the same point.
pub fn validate_edits(edits: &[Edit], src_len: usize) -> Result<(), EditError> {
    for (index, e) in edits.iter().enumerate() {
        if e.start > e.end || e.end > src_len {
            return Err(EditError::SpanOutOfRange {
                index,
                start: e.start,
                end: e.end,
                len: src_len,
            });
        }
        if e.is_insertion() && e.replacement.is_empty() {
            return Err(EditError::Vacuous { index });
        }
        if index > 0 {
            let prev = &edits[index - 1];
            if (prev.start, prev.end) > (e.start, e.end) {
                return Err(EditError::Unsorted { index });
            }
            let same_point = prev.is_insertion() && e.is_insertion() && prev.start == e.start;
            if prev.end > e.start || same_point {
                return Err(EditError::OverlappingEdits { index });
            }
        }
    }
    Ok(())
}

/// Minimum-cost alignment under unit costs, comparing items with `eq`.
///
/// The backtrace prefers Match, then Substitute, then Delete, then Insert.
pub fn align_by<T>(src: &[T], tgt: &[T], eq: impl Fn(&T, &T) -> bool) -> Vec<AlignOp> {
    let (n, m) = (src.len(), tgt.len());
    let width = m + 1;
    let mut dist = vec![0usize; (n + 1) * width];
    for (j, d) in dist[..width].iter_mut().enumerate() {
        *d = j;
    }
    for i in 1..=n {
        dist[i * width] = i;
        for j in 1..=m {
            let diag = dist[(i - 1) * width + j - 1] + usize::from(!eq(&src[i - 1], &tgt[j - 1]));
            let up = dist[(i - 1) * width + j] + 1;
            let left = dist[i * width + j - 1] + 1;
            dist[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        if i > 0 && j > 0 {
            let same = eq(&src[i - 1], &tgt[j - 1]);
            let diag = dist[(i - 1) * width + j - 1];
            if same && diag == here {
                ops.push(AlignOp::Match { src: i - 1, tgt: j - 1 });
                i -= 1;
                j -= 1;
                continue;
            }
            if !same && diag + 1 == here {
                ops.push(AlignOp::Substitute { src: i - 1, tgt: j - 1 });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dist[(i - 1) * width + j] + 1 == here {
            ops.push(AlignOp::Delete { src: i - 1 });
            i -= 1;
        } else {
            ops.push(AlignOp::Insert { tgt: j - 1 });
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

/// Aligns two sentences token by token on their surfaces.
pub fn align(src: &Sentence, tgt: &Sentence) -> Vec<AlignOp> {
    align_by(&src.tokens, &tgt.tokens, |a, b| a.surface() == b.surface())
}

pub fn alignment_cost(ops: &[AlignOp]) -> usize {
    ops.iter().map(|op| op.cost()).sum()
}

/// Token-level Levenshtein distance between two sentences.
pub fn token_distance(a: &Sentence, b: &Sentence) -> usize {
    alignment_cost(&align(a, b))
}

/// Merges every maximal run of non-Match ops into one phrase-level edit.
pub fn extract_edits(ops: &[AlignOp], src: &Sentence, tgt: &Sentence) -> Vec<Edit> {
    debug_assert!(ops.iter().all(|op| op.src_index().is_none_or(|i| i < src.len())));
    let mut edits = Vec::new();
    let mut src_pos = 0;
    let mut run: Option<Edit> = None;
    for &op in ops {
        if op.is_match() {
            if let Some(e) = run.take() {
                edits.push(e);
            }
            src_pos += 1;
            continue;
        }
        let e = run.get_or_insert_with(|| Edit::new(src_pos, src_pos, Vec::new()));
        if op.src_index().is_some() {
            src_pos += 1;
            e.end = src_pos;
        }
        if let Some(t) = op.tgt_index() {
            e.replacement.push(tgt.tokens[t].clone());
        }
    }
    edits.extend(run);
    edits
}

/// `extract_edits(align(src, tgt))`.
pub fn diff(src: &Sentence, tgt: &Sentence) -> Vec<Edit> {
    extract_edits(&align(src, tgt), src, tgt)
}

/// Applies sorted, non-overlapping edits to `src`. The result keeps the
/// source id.
pub fn apply_edits(src: &Sentence, edits: &[Edit]) -> Result<Sentence, EditError> {
    validate_edits(edits, src.len())?;
    let mut tokens = src.tokens.clone();
    for e in edits.iter().rev() {
        tokens.splice(e.start..e.end, e.replacement.iter().cloned());
    }
    Ok(Sentence::new(src.id.clone(), tokens))
}

/// Correction operation categories used in annotation statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Edit,
    Add,
    Merge,
    Split,
    Delete,
    Move,
    Other,
}

impl ActionKind {
    /// Reporting order.
    pub const ALL: [ActionKind; 7] = [
        ActionKind::Edit,
        ActionKind::Add,
        ActionKind::Merge,
        ActionKind::Split,
        ActionKind::Delete,
        ActionKind::Move,
        ActionKind::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Edit => "Edit",
            Self::Add => "Add",
            Self::Merge => "Merge",
            Self::Split => "Split",
            Self::Delete => "Delete",
            Self::Move => "Move",
            Self::Other => "Other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn concat<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> String {
    tokens.into_iter().map(Token::surface).collect()
}

/// Correction joins two or more source tokens into their concatenation.
pub fn is_merge_correction(e: &Edit, src: &Sentence) -> bool {
    e.span_len() >= 2
        && e.replacement.len() == 1
        && concat(&src.tokens[e.start..e.end]) == e.replacement[0].surface()
}

/// Correction splits one source token into parts that concatenate to it.
pub fn is_split_correction(e: &Edit, src: &Sentence) -> bool {
    e.span_len() == 1
        && e.replacement.len() >= 2
        && concat(&e.replacement) == src.tokens[e.start].surface()
}

fn is_swap(e: &Edit, src: &Sentence) -> bool {
    if e.span_len() != 2 || e.replacement.len() != 2 {
        return false;
    }
    let (a, b) = (src.tokens[e.start].surface(), src.tokens[e.start + 1].surface());
    a != b && e.replacement[0].surface() == b && e.replacement[1].surface() == a
}

/// Labels the correction operation an edit performs on its source.
pub fn classify_action(e: &Edit, src: &Sentence) -> ActionKind {
    if is_merge_correction(e, src) {
        ActionKind::Merge
    } else if is_split_correction(e, src) {
        ActionKind::Split
    } else if is_swap(e, src) {
        ActionKind::Move
    } else if e.is_insertion() {
        ActionKind::Add
    } else if e.replacement.is_empty() {
        ActionKind::Delete
    } else if e.span_len() == e.replacement.len() {
        ActionKind::Edit
    } else {
        ActionKind::Other
    }
}

/// Classifies a whole edit list. Besides the single-edit rules this also
/// recognises a one-token deletion paired with a neighbouring re-insertion of
/// the same token one position away, and labels both edits Move.
pub fn classify_actions(edits: &[Edit], src: &Sentence) -> Vec<ActionKind> {
    let mut kinds: Vec<ActionKind> = edits.iter().map(|e| classify_action(e, src)).collect();
    for i in 1..edits.len() {
        let (a, b) = (&edits[i - 1], &edits[i]);
        let moved = |del: &Edit, ins: &Edit, ins_point: usize| {
            del.span_len() == 1
                && del.replacement.is_empty()
                && ins.is_insertion()
                && ins.start == ins_point
                && ins.replacement.len() == 1
                && ins.replacement[0].surface() == src.tokens[del.start].surface()
        };
        // token moved right past its neighbour, or left past it
        let right = moved(a, b, a.start + 2)
            && src.tokens[a.start + 1].surface() != src.tokens[a.start].surface();
        let left = b.start >= 1
            && moved(b, a, b.start - 1)
            && src.tokens[b.start - 1].surface() != src.tokens[b.start].surface();
        if right || left {
            kinds[i - 1] = ActionKind::Move;
            kinds[i] = ActionKind::Move;
        }
    }
    kinds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    fn s(words: &[&str]) -> Sentence {
        Sentence::from_surfaces(words)
    }

    #[test]
    fn identity_alignment() {
        let a = s(&["a", "b", "c"]);
        let ops = align(&a, &a);
        assert_eq!(ops.len(), 3);
        assert!(ops.iter().all(|o| o.is_match()));
        assert!(extract_edits(&ops, &a, &a).is_empty());
    }

    #[test]
    fn single_insertion() {
        let ops = align(&s(&["a", "b"]), &s(&["a", "x", "b"]));
        assert_eq!(
            ops,
            vec![
                AlignOp::Match { src: 0, tgt: 0 },
                AlignOp::Insert { tgt: 1 },
                AlignOp::Match { src: 1, tgt: 2 },
            ]
        );
    }

    #[test]
    fn tie_break_prefers_substitution_then_deletion() {
        // [a] -> [b]: substitution rather than delete + insert
        assert_eq!(
            align(&s(&["a"]), &s(&["b"])),
            vec![AlignOp::Substitute { src: 0, tgt: 0 }]
        );
        // [a b] -> [c]: the backtrace keeps the substitution at the end
        assert_eq!(
            align(&s(&["a", "b"]), &s(&["c"])),
            vec![AlignOp::Delete { src: 0 }, AlignOp::Substitute { src: 1, tgt: 0 }]
        );
    }

    #[test]
    fn run_merging() {
        let src = s(&["a", "b", "c"]);
        let tgt = s(&["a", "X", "Y"]);
        let edits = diff(&src, &tgt);
        assert_eq!(edits.len(), 1);
        assert_eq!(edits[0].key(), (1, 3, vec!["X", "Y"]));
    }

    #[test]
    fn apply_basics() {
        let src = s(&["a", "b"]);
        assert_eq!(apply_edits(&src, &[]).unwrap(), src);
        let out = apply_edits(&src, &[Edit::new(0, 1, vec![Token::new("x")])]).unwrap();
        assert_eq!(out.surfaces(), vec!["x", "b"]);
        // insertion before a replacement at the same index
        let out = apply_edits(
            &src,
            &[
                Edit::new(1, 1, vec![Token::new("i")]),
                Edit::new(1, 2, vec![Token::new("y")]),
            ],
        )
        .unwrap();
        assert_eq!(out.surfaces(), vec!["a", "i", "y"]);
    }

    #[test]
    fn apply_rejects_malformed_lists() {
        let src = s(&["a", "b", "c"]);
        let x = || vec![Token::new("x")];
        assert!(matches!(
            apply_edits(&src, &[Edit::new(2, 4, x())]),
            Err(EditError::SpanOutOfRange { .. })
        ));
        assert!(matches!(
            apply_edits(&src, &[Edit::new(0, 2, x()), Edit::new(1, 3, x())]),
            Err(EditError::OverlappingEdits { index: 1 })
        ));
        assert!(matches!(
            apply_edits(&src, &[Edit::new(1, 1, x()), Edit::new(1, 1, x())]),
            Err(EditError::OverlappingEdits { index: 1 })
        ));
        assert!(matches!(
            apply_edits(&src, &[Edit::new(2, 3, x()), Edit::new(0, 1, x())]),
            Err(EditError::Unsorted { index: 1 })
        ));
        assert!(matches!(
            apply_edits(&src, &[Edit::new(1, 1, vec![])]),
            Err(EditError::Vacuous { index: 0 })
        ));
    }

    #[test]
    fn classify_split_of_merged_words() {
        let src = tokenize("غداالرجل سيركب الفرس .");
        let tgt = tokenize("غدا الرجل سيركب الفرس .");
        let edits = diff(&src, &tgt);
        assert_eq!(edits.len(), 1);
        assert_eq!(edits[0].key(), (0, 1, vec!["غدا", "الرجل"]));
        assert_eq!(classify_action(&edits[0], &src), ActionKind::Split);
    }

    #[test]
    fn classify_merge_of_split_word() {
        let src = tokenize("غدا الرجل ير كب الفرس .");
        let tgt = tokenize("غدا الرجل يركب الفرس .");
        let edits = diff(&src, &tgt);
        assert_eq!(edits.len(), 1);
        assert_eq!(classify_action(&edits[0], &src), ActionKind::Merge);
    }

    #[test]
    fn classify_definitional_kinds() {
        let src = s(&["a", "b", "c"]);
        let t = |w: &str| Token::new(w);
        assert_eq!(classify_action(&Edit::new(2, 2, vec![t("x")]), &src), ActionKind::Add);
        assert_eq!(classify_action(&Edit::new(1, 2, vec![]), &src), ActionKind::Delete);
        assert_eq!(classify_action(&Edit::new(1, 2, vec![t("x")]), &src), ActionKind::Edit);
        assert_eq!(
            classify_action(&Edit::new(0, 2, vec![t("b"), t("a")]), &src),
            ActionKind::Move
        );
        assert_eq!(
            classify_action(&Edit::new(0, 1, vec![t("x"), t("y")]), &src),
            ActionKind::Other
        );
    }

    #[test]
    fn classify_paired_move() {
        let src = s(&["a", "b", "c"]);
        // a moved after b: delete a, insert a after b
        let edits = vec![Edit::new(0, 1, vec![]), Edit::new(2, 2, vec![Token::new("a")])];
        assert_eq!(classify_actions(&edits, &src), vec![ActionKind::Move; 2]);
        // b moved before a
        let edits = vec![Edit::new(0, 0, vec![Token::new("b")]), Edit::new(1, 2, vec![])];
        assert_eq!(classify_actions(&edits, &src), vec![ActionKind::Move; 2]);
        // unrelated insertion stays Add
        let edits = vec![Edit::new(0, 1, vec![]), Edit::new(2, 2, vec![Token::new("z")])];
        assert_eq!(
            classify_actions(&edits, &src),
            vec![ActionKind::Delete, ActionKind::Add]
        );
    }

    fn small_sentence() -> impl Strategy<Value = Sentence> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "."]), 0..12)
            .prop_map(|w| Sentence::from_surfaces(&w))
    }

    proptest! {
        #[test]
        fn extraction_round_trips(src in small_sentence(), tgt in small_sentence()) {
            let ops = align(&src, &tgt);
            let edits = extract_edits(&ops, &src, &tgt);
            prop_assert!(validate_edits(&edits, src.len()).is_ok());
            prop_assert!(apply_edits(&src, &edits).unwrap().same_tokens(&tgt));
            prop_assert_eq!(align(&src, &tgt), ops);
        }

        #[test]
        fn self_diff_is_empty(src in small_sentence()) {
            prop_assert!(diff(&src, &src).is_empty());
        }
    }
}
