//! Surface-rule error typing over the Arabic Learner Corpus taxonomy, plus
//! per-class scoring.
//!
//! Only classes that surface evidence can decide are assigned. Whole-word
//! rewrites that no orthographic rule explains are `UNK`; morphological,
//! syntactic and semantic classes need a lexicon and are never emitted.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::align::{align_by, is_merge_correction, is_split_correction, AlignOp, Edit};
use crate::maxmatch::{match_keys, EditKey};
use crate::text::{Sentence, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Coarse {
    Orthographic,
    Morphological,
    Syntactic,
    Semantic,
    Punctuation,
    Merge,
    Split,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SubClass {
    OH,
    OT,
    OA,
    OW,
    ON,
    OS,
    OG,
    OC,
    OR,
    OD,
    OM,
    OO,
    PC,
    PT,
    PM,
    PO,
    MG,
    SP,
    UNK,
}

impl SubClass {
    pub const ALL: [SubClass; 19] = [
        Self::OH,
        Self::OT,
        Self::OA,
        Self::OW,
        Self::ON,
        Self::OS,
        Self::OG,
        Self::OC,
        Self::OR,
        Self::OD,
        Self::OM,
        Self::OO,
        Self::PC,
        Self::PT,
        Self::PM,
        Self::PO,
        Self::MG,
        Self::SP,
        Self::UNK,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Self::OH => "OH",
            Self::OT => "OT",
            Self::OA => "OA",
            Self::OW => "OW",
            Self::ON => "ON",
            Self::OS => "OS",
            Self::OG => "OG",
            Self::OC => "OC",
            Self::OR => "OR",
            Self::OD => "OD",
            Self::OM => "OM",
            Self::OO => "OO",
            Self::PC => "PC",
            Self::PT => "PT",
            Self::PM => "PM",
            Self::PO => "PO",
            Self::MG => "MG",
            Self::SP => "SP",
            Self::UNK => "UNK",
        }
    }

    pub fn parse(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }

    pub fn coarse(self) -> Coarse {
        match self {
            Self::OH
            | Self::OT
            | Self::OA
            | Self::OW
            | Self::ON
            | Self::OS
            | Self::OG
            | Self::OC
            | Self::OR
            | Self::OD
            | Self::OM
            | Self::OO => Coarse::Orthographic,
            Self::PC | Self::PT | Self::PM | Self::PO => Coarse::Punctuation,
            Self::MG => Coarse::Merge,
            Self::SP => Coarse::Split,
            Self::UNK => Coarse::Unknown,
        }
    }
}

impl fmt::Display for SubClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ErrorClass {
    pub coarse: Coarse,
    pub sub: SubClass,
}

impl ErrorClass {
    pub fn new(sub: SubClass) -> Self {
        Self {
            coarse: sub.coarse(),
            sub,
        }
    }

    pub fn code(&self) -> &'static str {
        self.sub.code()
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{}", self.coarse, self.sub)
    }
}

const HAMZA_FAMILY: &[char] = &['ا', 'أ', 'إ', 'آ', 'ء', 'ؤ', 'ئ'];
const HAMZA_BEARING: &[char] = &['أ', 'إ', 'آ', 'ء', 'ؤ', 'ئ'];
const LONG_VOWELS: &[char] = &['ا', 'و', 'ي'];
const TANWIN: &[char] = &['\u{064B}', '\u{064C}', '\u{064D}'];

/// Classifies an edit by the first rule that fires.
pub fn classify_edit(e: &Edit, src: &Sentence) -> ErrorClass {
    ErrorClass::new(classify_sub(e, src))
}

fn classify_sub(e: &Edit, src: &Sentence) -> SubClass {
    // MG names the source-side error: words run together, so the correction splits.
    if is_split_correction(e, src) {
        return SubClass::MG;
    }
    if is_merge_correction(e, src) {
        return SubClass::SP;
    }
    let mut left: &[Token] = &src.tokens[e.start..e.end];
    let mut right: &[Token] = &e.replacement;
    while let (Some(a), Some(b)) = (left.first(), right.first()) {
        if a.surface() != b.surface() {
            break;
        }
        left = &left[1..];
        right = &right[1..];
    }
    while let (Some(a), Some(b)) = (left.last(), right.last()) {
        if a.surface() != b.surface() {
            break;
        }
        left = &left[..left.len() - 1];
        right = &right[..right.len() - 1];
    }
    if left.is_empty() && right.is_empty() {
        return SubClass::UNK;
    }
    if left.iter().chain(right).all(Token::is_punct) {
        return match (left.is_empty(), right.is_empty()) {
            (false, false) => SubClass::PC,
            (false, true) => SubClass::PT,
            _ => SubClass::PM,
        };
    }
    match (left, right) {
        ([a], [b]) if !a.is_punct() && !b.is_punct() => orthographic(a.surface(), b.surface()),
        _ => SubClass::UNK,
    }
}

fn orthographic(src: &str, tgt: &str) -> SubClass {
    let a: Vec<char> = src.chars().collect();
    let b: Vec<char> = tgt.chars().collect();
    if hamza_only(&a, &b) {
        SubClass::OH
    } else if final_swap(&a, &b, &[('ة', 'ه')]) {
        SubClass::OT
    } else if final_swap(&a, &b, &[('ى', 'ي'), ('ى', 'ا')]) {
        SubClass::OA
    } else if alif_fariqa(&a, &b) {
        SubClass::OW
    } else if nun_tanwin(&a, &b) || nun_tanwin(&b, &a) {
        SubClass::ON
    } else if one_extra(&b, &a, LONG_VOWELS) {
        SubClass::OS
    } else if one_extra(&a, &b, LONG_VOWELS) {
        SubClass::OG
    } else if a.len() == b.len() && sorted(&a) == sorted(&b) {
        SubClass::OC
    } else if a.len() > b.len() && is_subsequence(&b, &a) {
        SubClass::OD
    } else if a.len() < b.len() && is_subsequence(&a, &b) {
        SubClass::OM
    } else if a.len() == b.len() {
        SubClass::OR
    } else {
        SubClass::UNK
    }
}

fn hamza_pair(x: char, y: char) -> bool {
    let pair = |p: char, q: char| (x == p && y == q) || (x == q && y == p);
    (HAMZA_FAMILY.contains(&x) && HAMZA_FAMILY.contains(&y))
        || pair('ؤ', 'و')
        || pair('ئ', 'ي')
        || pair('ئ', 'ى')
}

fn hamza_only(a: &[char], b: &[char]) -> bool {
    let mut bearing = false;
    for op in align_by(a, b, |x, y| x == y) {
        match op {
            AlignOp::Match { .. } => {}
            AlignOp::Substitute { src, tgt } => {
                let (x, y) = (a[src], b[tgt]);
                if !hamza_pair(x, y) {
                    return false;
                }
                bearing |= HAMZA_BEARING.contains(&x) || HAMZA_BEARING.contains(&y);
            }
            AlignOp::Delete { src } if HAMZA_BEARING.contains(&a[src]) => bearing = true,
            AlignOp::Insert { tgt } if HAMZA_BEARING.contains(&b[tgt]) => bearing = true,
            _ => return false,
        }
    }
    bearing
}

fn final_swap(a: &[char], b: &[char], pairs: &[(char, char)]) -> bool {
    match (a.split_last(), b.split_last()) {
        (Some((x, ra)), Some((y, rb))) if ra == rb => pairs
            .iter()
            .any(|&(p, q)| (*x == p && *y == q) || (*x == q && *y == p)),
        _ => false,
    }
}

fn alif_fariqa(a: &[char], b: &[char]) -> bool {
    let ends_wa = |s: &[char]| s.ends_with(&['و', 'ا']);
    let (long, short) = if a.len() > b.len() { (a, b) } else { (b, a) };
    ends_wa(long) && short.ends_with(&['و']) && long[..long.len() - 1] == *short
}

/// `n` ends in nun where `t` ends in tanwin, optionally with a seat alif.
fn nun_tanwin(n: &[char], t: &[char]) -> bool {
    let Some((&'ن', stem)) = n.split_last() else {
        return false;
    };
    let Some((last, rest)) = t.split_last() else {
        return false;
    };
    if !TANWIN.contains(last) {
        return false;
    }
    rest == stem || (rest.ends_with(&['ا']) && rest[..rest.len() - 1] == *stem)
}

/// `long` equals `short` with exactly one extra character from `set`.
fn one_extra(long: &[char], short: &[char], set: &[char]) -> bool {
    if long.len() != short.len() + 1 {
        return false;
    }
    (0..long.len()).any(|i| set.contains(&long[i]) && long[..i] == short[..i] && long[i + 1..] == short[i..])
}

fn sorted(s: &[char]) -> Vec<char> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v
}

fn is_subsequence(needle: &[char], hay: &[char]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|c| it.any(|h| h == c))
}

/// Returns a copy of `edits` with every class field set from [`classify_edit`].
pub fn type_edits(edits: &[Edit], src: &Sentence) -> Vec<Edit> {
    edits
        .iter()
        .map(|e| e.clone().with_class(classify_edit(e, src).code()))
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("system has {system} sentences but gold has {gold}")]
    LengthMismatch { system: usize, gold: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassRow {
    pub class: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Share of gold edits in this class.
    pub share: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    pub rows: Vec<ClassRow>,
    pub micro: Aggregate,
    pub macro_avg: Aggregate,
    pub weighted: Aggregate,
}

// Zero denominators score 0 here, unlike corpus-level MaxMatch.
fn prf(tp: usize, fp: usize, fn_: usize) -> Aggregate {
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Aggregate {
        precision,
        recall,
        f1,
    }
}

fn class_of(e: &Edit) -> &str {
    e.class.as_deref().unwrap_or("UNK")
}

fn keys_of<'a>(edits: &'a [Edit], class: &str) -> Vec<EditKey> {
    edits
        .iter()
        .filter(|e| class_of(e) == class)
        .map(|e: &'a Edit| EditKey {
            start: e.start,
            end: e.end,
            replacement: e.replacement_surfaces().into_iter().map(String::from).collect(),
        })
        .collect()
}

/// Per-class matching over typed edits. An edit counts as a hit only when
/// span, replacement and class all agree. Untyped edits count as `UNK`.
pub fn per_class_report(system: &[Vec<Edit>], gold: &[Vec<Edit>]) -> Result<ClassReport, ReportError> {
    if system.len() != gold.len() {
        return Err(ReportError::LengthMismatch {
            system: system.len(),
            gold: gold.len(),
        });
    }
    let mut counts: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for (sys, gld) in system.iter().zip(gold) {
        let classes: std::collections::BTreeSet<&str> = sys.iter().chain(gld).map(class_of).collect();
        for class in classes {
            let s = keys_of(sys, class);
            let g = keys_of(gld, class);
            let tp = match_keys(&s, &g);
            let entry = counts.entry(class.to_string()).or_default();
            entry.0 += tp;
            entry.1 += s.len() - tp;
            entry.2 += g.len() - tp;
        }
    }
    let gold_total: usize = counts.values().map(|c| c.0 + c.2).sum();
    let rows: Vec<ClassRow> = counts
        .into_iter()
        .map(|(class, (tp, fp, fn_))| {
            let a = prf(tp, fp, fn_);
            ClassRow {
                class,
                tp,
                fp,
                fn_,
                precision: a.precision,
                recall: a.recall,
                f1: a.f1,
                share: if gold_total == 0 {
                    0.0
                } else {
                    (tp + fn_) as f64 / gold_total as f64
                },
            }
        })
        .collect();
    let (tp, fp, fn_) = rows
        .iter()
        .fold((0, 0, 0), |acc, r| (acc.0 + r.tp, acc.1 + r.fp, acc.2 + r.fn_));
    let micro = prf(tp, fp, fn_);
    let mean = |f: &dyn Fn(&ClassRow) -> f64, w: &dyn Fn(&ClassRow) -> f64| {
        let total: f64 = rows.iter().map(w).sum();
        if total == 0.0 {
            0.0
        } else {
            rows.iter().map(|r| f(r) * w(r)).sum::<f64>() / total
        }
    };
    let aggregate = |w: &dyn Fn(&ClassRow) -> f64| Aggregate {
        precision: mean(&|r| r.precision, w),
        recall: mean(&|r| r.recall, w),
        f1: mean(&|r| r.f1, w),
    };
    let macro_avg = aggregate(&|_| 1.0);
    let weighted = aggregate(&|r| (r.tp + r.fn_) as f64);
    Ok(ClassReport {
        rows,
        micro,
        macro_avg,
        weighted,
    })
}

impl ClassReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<10}{:>7}{:>7}{:>7}{:>9}{:>9}{:>9}{:>9}\n",
            "Class", "TP", "FP", "FN", "P", "R", "F1", "Share"
        );
        let pct = |x: f64| format!("{:.2}", x * 100.0);
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10}{:>7}{:>7}{:>7}{:>9}{:>9}{:>9}{:>9}\n",
                r.class,
                r.tp,
                r.fp,
                r.fn_,
                pct(r.precision),
                pct(r.recall),
                pct(r.f1),
                pct(r.share)
            ));
        }
        for (name, a) in [("micro avg", self.micro), ("macro avg", self.macro_avg), ("weighted avg", self.weighted)] {
            out.push_str(&format!(
                "{:<31}{:>9}{:>9}{:>9}\n",
                name,
                pct(a.precision),
                pct(a.recall),
                pct(a.f1)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::diff;
    use crate::text::tokenize;

    fn one(src: &str, tgt: &str) -> ErrorClass {
        let s = tokenize(src);
        let edits = diff(&s, &tokenize(tgt));
        assert_eq!(edits.len(), 1, "{src} -> {tgt}: {edits:?}");
        classify_edit(&edits[0], &s)
    }

    #[test]
    fn merge_and_split_rows() {
        assert_eq!(one("غداالرجل سيركب", "غدا الرجل سيركب").sub, SubClass::MG);
        assert_eq!(one("ير كب", "يركب").sub, SubClass::SP);
        assert_eq!(one("ير كب", "يركب").coarse, Coarse::Split);
    }

    #[test]
    fn orthographic_subclasses() {
        let cases = [
            ("يرب", "يركب", SubClass::OM),
            ("الا", "إلا", SubClass::OH),
            ("مسؤول", "مسوول", SubClass::OH),
            ("جزء", "جز", SubClass::OH),
            ("مدرسه", "مدرسة", SubClass::OT),
            ("على", "علي", SubClass::OA),
            ("كتبو", "كتبوا", SubClass::OW),
            ("كتابن", "كتاباً", SubClass::ON),
            ("كتب", "كتاب", SubClass::OS),
            ("كتاب", "كتب", SubClass::OG),
            ("كبت", "كتب", SubClass::OC),
            ("كتتب", "كتب", SubClass::OD),
            ("كتب", "كسب", SubClass::OR),
            ("ذهب", "مدرسة", SubClass::UNK),
        ];
        for (a, b, want) in cases {
            assert_eq!(one(a, b).sub, want, "{a} -> {b}");
        }
    }

    #[test]
    fn punctuation_classes() {
        assert_eq!(one("الرجل ، يركب", "الرجل يركب").sub, SubClass::PT);
        assert_eq!(one("الرجل يركب", "الرجل يركب .").sub, SubClass::PM);
        assert_eq!(one("الرجل يركب ،", "الرجل يركب .").sub, SubClass::PC);
        assert_eq!(one("الرجل ، يركب", "الرجل يركب").coarse, Coarse::Punctuation);
    }

    #[test]
    fn multiword_rewrite_is_unknown() {
        assert_eq!(one("ذهب الولد", "جاء البنت").sub, SubClass::UNK);
        assert_eq!(one("ذهب", "جاء البنت").sub, SubClass::UNK);
    }

    #[test]
    fn codes_round_trip_and_coarse_grouping() {
        for c in SubClass::ALL {
            assert_eq!(SubClass::parse(c.code()), Some(c));
        }
        assert_eq!(SubClass::MG.coarse(), Coarse::Merge);
        assert_eq!(SubClass::PO.coarse(), Coarse::Punctuation);
        assert_eq!(SubClass::OO.coarse(), Coarse::Orthographic);
    }

    fn typed(src: &str, tgt: &str) -> Vec<Edit> {
        let s = tokenize(src);
        type_edits(&diff(&s, &tokenize(tgt)), &s)
    }

    #[test]
    fn report_identity_and_empty_system() {
        let gold = vec![
            typed("الرجل ، يرب الفرس", "الرجل يركب الفرس ."),
            typed("غداالرجل", "غدا الرجل"),
        ];
        let rep = per_class_report(&gold, &gold).unwrap();
        assert!(rep.rows.iter().all(|r| r.f1 == 1.0));
        assert!((rep.rows.iter().map(|r| r.share).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(rep.micro.f1, 1.0);

        let empty = vec![Vec::new(), Vec::new()];
        let rep = per_class_report(&empty, &gold).unwrap();
        assert!(rep.rows.iter().all(|r| r.recall == 0.0));
        assert_eq!(rep.macro_avg.recall, 0.0);
        assert!(rep.render().contains("weighted avg"));

        assert!(matches!(
            per_class_report(&empty[..1], &gold),
            Err(ReportError::LengthMismatch { system: 1, gold: 2 })
        ));
    }

    #[test]
    fn class_mismatch_is_not_a_hit() {
        let s = tokenize("كتب");
        let e = diff(&s, &tokenize("كسب"));
        let sys = vec![vec![e[0].clone().with_class("OH")]];
        let gold = vec![vec![e[0].clone().with_class("OR")]];
        let rep = per_class_report(&sys, &gold).unwrap();
        assert_eq!(rep.micro.precision, 0.0);
        assert_eq!(rep.rows.len(), 2);
    }
}
