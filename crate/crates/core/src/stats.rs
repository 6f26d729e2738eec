//! Corpus-level statistics over annotated sentences.

use serde::Serialize;

use crate::align::{apply_edits, classify_actions, ActionKind, EditError};
use crate::m2::M2Record;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub lines: usize,
    /// Source tokens, punctuation included.
    pub tokens: usize,
    /// Source tokens that are not punctuation.
    pub words: usize,
    pub edits: usize,
    /// Tokens of the corrected side.
    pub corrected_tokens: usize,
    pub sentences_with_edits: usize,
    /// Edits per corrected token, capped at 1.
    pub error_rate: f64,
    /// Share of each action among all edits, in [`ActionKind::ALL`] order.
    pub actions: Vec<(ActionKind, usize, f64)>,
}

impl CorpusStats {
    /// Statistics over the first annotator of each record.
    pub fn from_records(records: &[M2Record]) -> Result<Self, EditError> {
        let mut s = CorpusStats {
            lines: records.len(),
            ..Self::default()
        };
        let mut counts = [0usize; 7];
        for r in records {
            let edits = r.first_edits();
            s.tokens += r.source.len();
            s.words += r.source.word_count();
            s.edits += edits.len();
            s.corrected_tokens += apply_edits(&r.source, edits)?.len();
            if !edits.is_empty() {
                s.sentences_with_edits += 1;
            }
            for k in classify_actions(edits, &r.source) {
                counts[k.index()] += 1;
            }
        }
        s.error_rate = if s.corrected_tokens == 0 {
            0.0
        } else {
            (s.edits as f64 / s.corrected_tokens as f64).min(1.0)
        };
        s.actions = ActionKind::ALL
            .iter()
            .map(|&k| {
                let n = counts[k.index()];
                let share = if s.edits == 0 { 0.0 } else { n as f64 / s.edits as f64 };
                (k, n, share)
            })
            .collect();
        Ok(s)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let actions: serde_json::Map<String, serde_json::Value> = self
            .actions
            .iter()
            .map(|(k, n, share)| (k.name().to_string(), serde_json::json!({"count": n, "share": share})))
            .collect();
        serde_json::json!({
            "lines": self.lines,
            "tokens": self.tokens,
            "words": self.words,
            "edits": self.edits,
            "corrected_tokens": self.corrected_tokens,
            "sentences_with_edits": self.sentences_with_edits,
            "error_rate": self.error_rate,
            "actions": actions,
        })
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<10}{:>10}{:>10}{:>10}\n{:<10}{:>10}{:>10}{:>9.2}%\n\n",
            "Lines", "Words", "Edits", "Err.", self.lines, self.words, self.edits, self.error_rate * 100.0
        );
        for (k, _, _) in &self.actions {
            out.push_str(&format!("{:>9}", k.name()));
        }
        out.push('\n');
        for (_, _, share) in &self.actions {
            out.push_str(&format!("{:>8.2}%", share * 100.0));
        }
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::m2::{annotate_pair, parse_m2};
    use crate::text::tokenize;

    #[test]
    fn no_edit_corpus() {
        let recs = parse_m2("S a b .\n\nS c\n\n").unwrap();
        let s = CorpusStats::from_records(&recs).unwrap();
        assert_eq!(s.lines, 2);
        assert_eq!(s.words, 3);
        assert_eq!(s.error_rate, 0.0);
        assert!(s.actions.iter().all(|a| a.2 == 0.0));
    }

    #[test]
    fn shares_sum_to_one() {
        let recs = vec![
            annotate_pair(&tokenize("الرجل ، يرب الفرس"), &tokenize("الرجل يركب الفرس ."), 0, false),
            annotate_pair(&tokenize("غداالرجل سيركب"), &tokenize("غدا الرجل سيركب"), 0, false),
        ];
        let s = CorpusStats::from_records(&recs).unwrap();
        let total: f64 = s.actions.iter().map(|a| a.2).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(s.corrected_tokens, 7);
        assert!(s.error_rate > 0.0 && s.error_rate <= 1.0);
        assert!(s.render().contains("Err."));
    }
}
