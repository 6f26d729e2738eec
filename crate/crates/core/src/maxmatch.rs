//! MaxMatch-style scoring of hypotheses against gold M² annotations.
//!
//! System edits are extracted from the alignment of the normalized source
//! with the normalized hypothesis. Gold edits are projected onto the
//! normalized source: their spans are re-indexed past dropped punctuation,
//! their replacements are normalized, and edits that become no-ops under the
//! regime are discarded. Matching is exact on `(start, end, replacement)` in
//! those coordinates.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::align::{diff, Edit};
use crate::m2::M2Record;
use crate::text::{NormalizationMode, Sentence, TextConfig};

pub const DEFAULT_BETAS: [f64; 2] = [1.0, 0.5];

/// Annotator selection always maximises sentence-level F0.5.
pub const SELECTION_BETA: f64 = 0.5;

/// An edit in normalized-source coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EditKey {
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoreError {
    #[error("sentence {index}: hypothesis source does not match the gold source")]
    SourceMismatch { index: usize },
    #[error("{pairs} sentence pairs but {gold} gold records")]
    LengthMismatch { pairs: usize, gold: usize },
}

pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if precision + recall == 0.0 || denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

/// Raw match counts; adding them is associative and commutative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub sys: usize,
    pub gold: usize,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            sys: self.sys + o.sys,
            gold: self.gold + o.gold,
        }
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Counts {
        iter.fold(Counts::default(), |a, b| a + b)
    }
}

impl Counts {
    pub fn precision(self) -> f64 {
        if self.sys == 0 {
            1.0
        } else {
            self.tp as f64 / self.sys as f64
        }
    }

    pub fn recall(self) -> f64 {
        if self.gold == 0 {
            1.0
        } else {
            self.tp as f64 / self.gold as f64
        }
    }

    pub fn f(self, beta: f64) -> f64 {
        f_beta(self.precision(), self.recall(), beta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport {
    pub tp: usize,
    pub sys_total: usize,
    pub gold_total: usize,
    pub precision: f64,
    pub recall: f64,
    /// `(beta, F_beta)` in the order requested.
    pub f_scores: Vec<(f64, f64)>,
    pub mode: NormalizationMode,
}

impl ScoreReport {
    pub fn from_counts(c: Counts, betas: &[f64], mode: NormalizationMode) -> Self {
        let (precision, recall) = (c.precision(), c.recall());
        Self {
            tp: c.tp,
            sys_total: c.sys,
            gold_total: c.gold,
            precision,
            recall,
            f_scores: betas.iter().map(|&b| (b, f_beta(precision, recall, b))).collect(),
            mode,
        }
    }

    pub fn counts(&self) -> Counts {
        Counts {
            tp: self.tp,
            sys: self.sys_total,
            gold: self.gold_total,
        }
    }

    pub fn f(&self, beta: f64) -> Option<f64> {
        self.f_scores.iter().find(|(b, _)| *b == beta).map(|&(_, f)| f)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = json!({
            "mode": self.mode.name(),
            "tp": self.tp,
            "sys": self.sys_total,
            "gold": self.gold_total,
            "p": self.precision,
            "r": self.recall,
        });
        for (b, f) in &self.f_scores {
            obj[format!("f{b}")] = json!(f);
        }
        obj
    }
}

fn beta_label(b: f64) -> String {
    if b.fract() == 0.0 {
        format!("F{b:.1}")
    } else {
        format!("F{b}")
    }
}

/// Plain-text table with one row per report, values in percent.
pub fn render_table(reports: &[ScoreReport]) -> String {
    let mut out = String::new();
    let betas: Vec<f64> = reports
        .first()
        .map(|r| r.f_scores.iter().map(|(b, _)| *b).collect())
        .unwrap_or_default();
    let _ = write!(out, "{:<22}{:>8}{:>8}{:>8}{:>9}{:>9}", "Mode", "TP", "Sys", "Gold", "P", "R");
    for &b in &betas {
        let _ = write!(out, "{:>9}", beta_label(b));
    }
    out.push('\n');
    for r in reports {
        let _ = write!(
            out,
            "{:<22}{:>8}{:>8}{:>8}{:>9.2}{:>9.2}",
            r.mode.name(),
            r.tp,
            r.sys_total,
            r.gold_total,
            r.precision * 100.0,
            r.recall * 100.0
        );
        for (_, f) in &r.f_scores {
            let _ = write!(out, "{:>9.2}", f * 100.0);
        }
        out.push('\n');
    }
    out
}

/// Scorer configuration.
#[derive(Clone, Debug)]
pub struct Scorer {
    pub text: TextConfig,
    pub betas: Vec<f64>,
}

impl Default for Scorer {
    fn default() -> Self {
        Self {
            text: TextConfig::default(),
            betas: DEFAULT_BETAS.to_vec(),
        }
    }
}

impl Scorer {
    pub fn with_betas(betas: &[f64]) -> Self {
        Self {
            betas: betas.to_vec(),
            ..Self::default()
        }
    }

    /// Maps an edit on `src` into normalized-source coordinates, or `None`
    /// when the regime turns it into a no-op.
    pub fn project(&self, e: &Edit, src: &Sentence, mode: NormalizationMode) -> Option<EditKey> {
        let norm = |toks: &[crate::text::Token]| -> Vec<String> {
            toks.iter()
                .filter_map(|t| self.text.normalize_token(t, mode))
                .map(|t| t.into_surface())
                .collect()
        };
        let span = norm(&src.tokens[e.start..e.end]);
        let replacement = norm(&e.replacement);
        if span == replacement {
            return None;
        }
        let index = |p: usize| {
            if mode.drops_punct() {
                src.tokens[..p].iter().filter(|t| !t.is_punct()).count()
            } else {
                p
            }
        };
        Some(EditKey {
            start: index(e.start),
            end: index(e.end),
            replacement,
        })
    }

    pub fn project_all(&self, edits: &[Edit], src: &Sentence, mode: NormalizationMode) -> Vec<EditKey> {
        edits.iter().filter_map(|e| self.project(e, src, mode)).collect()
    }

    /// Size of a maximum matching between system and gold edits under `mode`.
    pub fn match_edits(
        &self,
        system: &[Edit],
        gold: &[Edit],
        src: &Sentence,
        mode: NormalizationMode,
    ) -> usize {
        match_keys(&self.project_all(system, src, mode), &self.project_all(gold, src, mode))
    }

    /// System edits for `hyp`, already in normalized coordinates.
    pub fn system_keys(&self, src: &Sentence, hyp: &Sentence, mode: NormalizationMode) -> Vec<EditKey> {
        let nsrc = self.text.normalize(src, mode);
        let nhyp = self.text.normalize(hyp, mode);
        diff(&nsrc, &nhyp)
            .into_iter()
            .map(|e| EditKey {
                start: e.start,
                end: e.end,
                replacement: e.replacement.into_iter().map(|t| t.into_surface()).collect(),
            })
            .collect()
    }

    fn sentence_counts(
        &self,
        index: usize,
        src: &Sentence,
        hyp: &Sentence,
        gold: &M2Record,
        mode: NormalizationMode,
    ) -> Result<Vec<(u32, Counts)>, ScoreError> {
        if !gold.source.same_tokens(src) {
            return Err(ScoreError::SourceMismatch { index });
        }
        let sys = self.system_keys(src, hyp, mode);
        Ok(gold
            .annotations
            .iter()
            .map(|(&annotator, edits)| {
                let gold_keys = self.project_all(edits, src, mode);
                let counts = Counts {
                    tp: match_keys(&sys, &gold_keys),
                    sys: sys.len(),
                    gold: gold_keys.len(),
                };
                (annotator, counts)
            })
            .collect())
    }

    /// One candidate report per annotator, in ascending annotator order.
    pub fn score_sentence(
        &self,
        src: &Sentence,
        hyp: &Sentence,
        gold: &M2Record,
        mode: NormalizationMode,
    ) -> Result<Vec<(u32, ScoreReport)>, ScoreError> {
        Ok(self
            .sentence_counts(0, src, hyp, gold, mode)?
            .into_iter()
            .map(|(a, c)| (a, ScoreReport::from_counts(c, &self.betas, mode)))
            .collect())
    }

    fn best_counts(
        &self,
        index: usize,
        src: &Sentence,
        hyp: &Sentence,
        gold: &M2Record,
        mode: NormalizationMode,
    ) -> Result<Counts, ScoreError> {
        let mut best: Option<Counts> = None;
        for (_, c) in self.sentence_counts(index, src, hyp, gold, mode)? {
            // strict comparison keeps the lowest annotator id on ties
            if best.is_none_or(|b| c.f(SELECTION_BETA) > b.f(SELECTION_BETA)) {
                best = Some(c);
            }
        }
        Ok(best.unwrap_or(Counts {
            tp: 0,
            sys: self.system_keys(src, hyp, mode).len(),
            gold: 0,
        }))
    }

    /// Micro-averaged corpus score.
    pub fn score_corpus(
        &self,
        pairs: &[(Sentence, Sentence)],
        gold: &[M2Record],
        mode: NormalizationMode,
    ) -> Result<ScoreReport, ScoreError> {
        if pairs.len() != gold.len() {
            return Err(ScoreError::LengthMismatch {
                pairs: pairs.len(),
                gold: gold.len(),
            });
        }
        let per_sentence: Vec<Counts> = pairs
            .par_iter()
            .zip(gold.par_iter())
            .enumerate()
            .map(|(i, ((src, hyp), g))| self.best_counts(i, src, hyp, g, mode))
            .collect::<Result<_, _>>()?;
        let total: Counts = per_sentence.into_iter().sum();
        Ok(ScoreReport::from_counts(total, &self.betas, mode))
    }
}

/// Maximum matching under key equality: the sum over distinct keys of the
/// smaller multiplicity.
pub fn match_keys(system: &[EditKey], gold: &[EditKey]) -> usize {
    let mut counts: HashMap<&EditKey, usize> = HashMap::new();
    for k in gold {
        *counts.entry(k).or_default() += 1;
    }
    let mut matched = 0;
    for k in system {
        if let Some(c) = counts.get_mut(k) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }
    matched
}

pub fn match_edits(system: &[Edit], gold: &[Edit], src: &Sentence, mode: NormalizationMode) -> usize {
    Scorer::default().match_edits(system, gold, src, mode)
}

pub fn score_sentence(
    src: &Sentence,
    hyp: &Sentence,
    gold: &M2Record,
    mode: NormalizationMode,
) -> Result<Vec<(u32, ScoreReport)>, ScoreError> {
    Scorer::default().score_sentence(src, hyp, gold, mode)
}

pub fn score_corpus(
    pairs: &[(Sentence, Sentence)],
    gold: &[M2Record],
    mode: NormalizationMode,
    betas: &[f64],
) -> Result<ScoreReport, ScoreError> {
    Scorer::with_betas(betas).score_corpus(pairs, gold, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::m2::{annotate_pair, parse_m2};
    use crate::text::{tokenize, Token};

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn f_score_formula() {
        assert!(approx(f_beta(0.6, 0.4, 1.0), 0.48));
        assert!(approx(f_beta(0.6, 0.4, 0.5), 0.6 / 1.1));
        assert_eq!(f_beta(0.0, 0.0, 1.0), 0.0);
        assert_eq!(f_beta(1.0, 0.0, 0.5), 0.0);
    }

    #[test]
    fn identical_lists_fully_match() {
        let src = tokenize("a b c d");
        let gold = vec![
            Edit::new(0, 1, vec![Token::new("x")]),
            Edit::new(2, 2, vec![Token::new("y")]),
        ];
        assert_eq!(match_edits(&gold, &gold, &src, NormalizationMode::Exact), 2);
    }

    #[test]
    fn alif_only_difference_matches_under_no_alif_ya() {
        let src = tokenize("قال ان الولد");
        let gold = vec![Edit::new(1, 2, vec![Token::new("إن")])];
        let sys = vec![Edit::new(1, 2, vec![Token::new("أن")])];
        assert_eq!(match_edits(&sys, &gold, &src, NormalizationMode::Exact), 0);
        // both edits vanish under alif folding
        assert_eq!(match_edits(&sys, &gold, &src, NormalizationMode::NoAlifYa), 0);
        let s = Scorer::default();
        assert!(s.project_all(&gold, &src, NormalizationMode::NoAlifYa).is_empty());

        let src = tokenize("قال ان الولد");
        let gold = vec![Edit::new(1, 2, vec![Token::new("إن"), Token::new("هذا")])];
        let sys = vec![Edit::new(1, 2, vec![Token::new("ان"), Token::new("هذا")])];
        assert_eq!(match_edits(&sys, &gold, &src, NormalizationMode::Exact), 0);
        assert_eq!(match_edits(&sys, &gold, &src, NormalizationMode::NoAlifYa), 1);
    }

    #[test]
    fn no_punct_projection_reindexes_spans() {
        let s = Scorer::default();
        let src = tokenize("a . b c");
        let e = Edit::new(2, 3, vec![Token::new("x")]);
        let k = s.project(&e, &src, NormalizationMode::NoPunct).unwrap();
        assert_eq!((k.start, k.end), (1, 2));
        let punct_only = Edit::new(1, 2, vec![Token::new(",")]);
        assert!(s.project(&punct_only, &src, NormalizationMode::NoPunct).is_none());
        assert!(s.project(&punct_only, &src, NormalizationMode::Exact).is_some());
    }

    #[test]
    fn perfect_hypothesis_scores_one() {
        let src = tokenize("الرجل ، يرب الفرس");
        let reference = tokenize("الرجل يركب الفرس .");
        let gold = annotate_pair(&src, &reference, 0, false);
        let reports = score_sentence(&src, &reference, &gold, NormalizationMode::Exact).unwrap();
        let r = &reports[0].1;
        assert_eq!((r.precision, r.recall), (1.0, 1.0));
    }

    #[test]
    fn unchanged_hypothesis_is_vacuously_precise() {
        let src = tokenize("الرجل يرب الفرس");
        let reference = tokenize("الرجل يركب الفرس");
        let gold = annotate_pair(&src, &reference, 0, false);
        let r = &score_sentence(&src, &src, &gold, NormalizationMode::Exact).unwrap()[0].1;
        assert_eq!((r.precision, r.recall, r.f(1.0).unwrap()), (1.0, 0.0, 0.0));
    }

    #[test]
    fn half_overlap() {
        let src = tokenize("a b c d");
        let gold = parse_m2(
            "S a b c d\nA 0 1|||NA|||A|||REQUIRED|||-NONE-|||0\nA 2 3|||NA|||C|||REQUIRED|||-NONE-|||0\n\n",
        )
        .unwrap();
        let hyp = tokenize("A b c D");
        let r = &score_sentence(&src, &hyp, &gold[0], NormalizationMode::Exact).unwrap()[0].1;
        assert_eq!((r.tp, r.sys_total, r.gold_total), (1, 2, 2));
        assert!(approx(r.precision, 0.5) && approx(r.recall, 0.5));
        assert!(approx(r.f(1.0).unwrap(), 0.5) && approx(r.f(0.5).unwrap(), 0.5));
    }

    #[test]
    fn source_mismatch_and_length_mismatch() {
        let gold = parse_m2("S a b\n\n").unwrap();
        let err = score_sentence(&tokenize("a c"), &tokenize("a c"), &gold[0], NormalizationMode::Exact);
        assert_eq!(err.unwrap_err(), ScoreError::SourceMismatch { index: 0 });
        let err = score_corpus(&[], &gold, NormalizationMode::Exact, &DEFAULT_BETAS);
        assert_eq!(err.unwrap_err(), ScoreError::LengthMismatch { pairs: 0, gold: 1 });
    }

    #[test]
    fn annotator_selection_prefers_best_then_lowest_id() {
        let text = "S a b c\n\
A 0 1|||NA|||x|||REQUIRED|||-NONE-|||0\n\
A 1 2|||NA|||y|||REQUIRED|||-NONE-|||1\n\
A 1 2|||NA|||y|||REQUIRED|||-NONE-|||2\n\n";
        let gold = parse_m2(text).unwrap();
        let src = tokenize("a b c");
        let hyp = tokenize("a y c");
        let r = score_corpus(&[(src, hyp)], &gold, NormalizationMode::Exact, &DEFAULT_BETAS).unwrap();
        assert_eq!((r.tp, r.sys_total, r.gold_total), (1, 1, 1));
    }

    #[test]
    fn table_and_json_shapes() {
        let r = ScoreReport::from_counts(
            Counts { tp: 3, sys: 5, gold: 4 },
            &DEFAULT_BETAS,
            NormalizationMode::NoPunct,
        );
        let j = r.to_json();
        assert_eq!(j["mode"], "no-punct");
        assert_eq!(j["tp"], 3);
        assert!(j.get("f1").is_some() && j.get("f0.5").is_some());
        let table = render_table(&[r]);
        assert!(table.lines().next().unwrap().contains("F1.0"));
        assert!(table.contains("60.00"));
    }
}
