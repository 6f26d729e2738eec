//! Prompt builders for correction and corruption requests.
//!
//! Builders are pure: the same template and input always produce the same
//! bytes. Example pairs and the sentence under work are wrapped in
//! `<input>`/`<output>` tags so replies can be parsed mechanically.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{detokenize, Sentence};

pub const ALLOWED_SHOTS: [usize; 4] = [0, 1, 3, 5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    FewShotCoT,
    Expert,
    Corruptor,
}

impl Strategy {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cot" | "few-shot-cot" | "fewshotcot" => Some(Self::FewShotCoT),
            "expert" => Some(Self::Expert),
            "corruptor" | "corrupt" => Some(Self::Corruptor),
            _ => None,
        }
    }
}

/// Which part of the two-stage protocol the prompt carries. The answer stage
/// is the composed prompt: reasoning directive plus answer trigger.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    ReasoningExtraction,
    #[default]
    AnswerExtraction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shot {
    pub source: Sentence,
    pub target: Sentence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub code: String,
    pub description: String,
}

/// Arabic Learner Corpus error classes with merge and split added.
pub fn alc_taxonomy() -> Vec<TaxonomyEntry> {
    [
        ("OH", "hamza error"),
        ("OT", "confusion of final ha and ta marbuta"),
        ("OA", "confusion of final alif maqsura and ya"),
        ("OW", "confusion in the silent alif after plural waw"),
        ("ON", "confusion between nun and tanwin"),
        ("OS", "long vowel shortened"),
        ("OG", "short vowel lengthened"),
        ("OC", "characters of a word in the wrong order"),
        ("OR", "character replaced by another"),
        ("OD", "extra character"),
        ("OM", "missing character"),
        ("OO", "other spelling error"),
        ("MI", "wrong word inflection"),
        ("MT", "wrong verb tense"),
        ("MO", "other morphological error"),
        ("XF", "definiteness error"),
        ("XG", "gender agreement error"),
        ("XN", "number agreement error"),
        ("XT", "unnecessary word"),
        ("XM", "missing word"),
        ("XO", "other syntactic error"),
        ("SW", "wrong word choice"),
        ("SF", "conjunction used or omitted wrongly"),
        ("SO", "other semantic error"),
        ("PC", "wrong punctuation mark"),
        ("PT", "unnecessary punctuation"),
        ("PM", "missing punctuation"),
        ("PO", "other punctuation error"),
        ("MG", "two words written together"),
        ("SP", "one word written apart"),
    ]
    .into_iter()
    .map(|(code, description)| TaxonomyEntry {
        code: code.to_string(),
        description: description.to_string(),
    })
    .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("{0} examples requested; correction prompts take 0, 1, 3 or 5")]
    InvalidShotCount(usize),
    #[error("this strategy needs an error taxonomy")]
    MissingTaxonomy,
    #[error("template strategy is {found:?}, builder expects {expected:?}")]
    WrongStrategy { expected: Strategy, found: Strategy },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptTemplate {
    pub strategy: Strategy,
    pub shots: Vec<Shot>,
    pub taxonomy: Option<Vec<TaxonomyEntry>>,
    pub stage: Stage,
}

impl PromptTemplate {
    pub fn new(
        strategy: Strategy,
        shots: Vec<Shot>,
        taxonomy: Option<Vec<TaxonomyEntry>>,
        stage: Stage,
    ) -> Result<Self, PromptError> {
        let t = Self {
            strategy,
            shots,
            taxonomy,
            stage,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.strategy != Strategy::Corruptor && !ALLOWED_SHOTS.contains(&self.shots.len()) {
            return Err(PromptError::InvalidShotCount(self.shots.len()));
        }
        if self.strategy != Strategy::FewShotCoT && self.taxonomy.is_none() {
            return Err(PromptError::MissingTaxonomy);
        }
        Ok(())
    }

    fn expect(&self, expected: Strategy) -> Result<(), PromptError> {
        if self.strategy != expected {
            return Err(PromptError::WrongStrategy {
                expected,
                found: self.strategy,
            });
        }
        self.validate()
    }
}

pub fn wrap_input(s: &Sentence) -> String {
    format!("<input> {} </input>", detokenize(s))
}

pub fn wrap_output(s: &Sentence) -> String {
    format!("<output> {} </output>", detokenize(s))
}

fn push_examples(out: &mut String, shots: &[Shot]) {
    if shots.is_empty() {
        return;
    }
    out.push_str("Examples:\n\n");
    for shot in shots {
        let _ = writeln!(out, "{}\n{}\n", wrap_input(&shot.source), wrap_output(&shot.target));
    }
}

fn push_taxonomy(out: &mut String, taxonomy: &[TaxonomyEntry]) {
    for (i, e) in taxonomy.iter().enumerate() {
        let _ = writeln!(out, "{}. {}: {}", i + 1, e.code, e.description);
    }
}

const REASONING_TRIGGER: &str = "Let's think step by step about which words in the sentence are wrong and why.";
const ANSWER_TRIGGER: &str =
    "Therefore, the corrected sentence is the following. Write it between <output> and </output> and add nothing else.";

fn push_triggers(out: &mut String, stage: Stage) {
    out.push_str(REASONING_TRIGGER);
    out.push('\n');
    if stage == Stage::AnswerExtraction {
        out.push_str(ANSWER_TRIGGER);
        out.push('\n');
    }
}

pub fn build_cot_prompt(t: &PromptTemplate, input: &Sentence) -> Result<String, PromptError> {
    t.expect(Strategy::FewShotCoT)?;
    let mut out = String::from(
        "You are an Arabic grammatical error correction tool. You receive one Arabic sentence between \
<input> and </input>. Find its spelling, grammar, morphology, punctuation, merged-word and split-word \
errors, reason about how to fix each one, and produce the corrected sentence between <output> and </output>. \
Change only what is wrong.\n\n",
    );
    push_examples(&mut out, &t.shots);
    let _ = writeln!(out, "{}", wrap_input(input));
    push_triggers(&mut out, t.stage);
    Ok(out)
}

pub fn build_expert_prompt(t: &PromptTemplate, input: &Sentence) -> Result<String, PromptError> {
    t.expect(Strategy::Expert)?;
    let taxonomy = t.taxonomy.as_deref().ok_or(PromptError::MissingTaxonomy)?;
    let mut out = String::from(
        "You are a distinguished expert in Arabic linguistics and proofreading, with long experience \
correcting texts written by native speakers and learners of Arabic.\n\n\
You know the following error types of the Arabic Learner Corpus taxonomy:\n",
    );
    push_taxonomy(&mut out, taxonomy);
    out.push_str(
        "\nWork automatically: every sentence you receive is between <input> and </input>. Return its \
corrected form between <output> and </output>, fixing every error of the types above and changing nothing else.\n\n",
    );
    push_examples(&mut out, &t.shots);
    let _ = writeln!(out, "{}", wrap_input(input));
    push_triggers(&mut out, t.stage);
    Ok(out)
}

pub fn build_corruptor_prompt(clean: &Sentence, taxonomy: &[TaxonomyEntry]) -> String {
    let mut out = String::from(
        "You are an AI model whose job is to insert realistic writing errors into correct Arabic sentences, \
so that each pair can serve as synthetic training data for error correction.\n\n\
Draw the errors from the Arabic Learner Corpus taxonomy and mix several types:\n",
    );
    push_taxonomy(&mut out, taxonomy);
    out.push_str(
        "\nThe correct sentence is between <input> and </input>. Return only the sentence with errors, \
between <output> and </output>.\n\n",
    );
    let _ = writeln!(out, "{}", wrap_input(clean));
    out
}

/// Dispatches on the template strategy.
pub fn build_prompt(t: &PromptTemplate, input: &Sentence) -> Result<String, PromptError> {
    match t.strategy {
        Strategy::FewShotCoT => build_cot_prompt(t, input),
        Strategy::Expert => build_expert_prompt(t, input),
        Strategy::Corruptor => Ok(build_corruptor_prompt(
            input,
            t.taxonomy.as_deref().ok_or(PromptError::MissingTaxonomy)?,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn shots(n: usize) -> Vec<Shot> {
        (0..n)
            .map(|i| Shot {
                source: tokenize(&format!("جملة{i} خاطئه")),
                target: tokenize(&format!("جملة{i} خاطئة")),
            })
            .collect()
    }

    #[test]
    fn zero_shots_has_only_directive_and_input() {
        let t = PromptTemplate::new(Strategy::FewShotCoT, vec![], None, Stage::AnswerExtraction).unwrap();
        let p = build_cot_prompt(&t, &tokenize("الرجل يرب الفرس .")).unwrap();
        assert_eq!(p.matches(" </input>\n").count(), 1);
        assert!(!p.contains("Examples:"));
        assert!(p.contains("<input> الرجل يرب الفرس . </input>"));
    }

    #[test]
    fn shots_in_order() {
        let t = PromptTemplate::new(Strategy::FewShotCoT, shots(3), None, Stage::AnswerExtraction).unwrap();
        let p = build_cot_prompt(&t, &tokenize("س")).unwrap();
        assert_eq!(p.matches(" </output>\n").count(), 3);
        let (a, b, c) = (p.find("جملة0").unwrap(), p.find("جملة1").unwrap(), p.find("جملة2").unwrap());
        assert!(a < b && b < c);
    }

    #[test]
    fn stage_controls_answer_trigger() {
        let r = PromptTemplate::new(Strategy::FewShotCoT, vec![], None, Stage::ReasoningExtraction).unwrap();
        let a = PromptTemplate { stage: Stage::AnswerExtraction, ..r.clone() };
        let x = tokenize("س");
        assert!(!build_cot_prompt(&r, &x).unwrap().contains(ANSWER_TRIGGER));
        assert!(build_cot_prompt(&a, &x).unwrap().contains(ANSWER_TRIGGER));
    }

    #[test]
    fn validation() {
        assert_eq!(
            PromptTemplate::new(Strategy::FewShotCoT, shots(2), None, Stage::default()),
            Err(PromptError::InvalidShotCount(2))
        );
        assert_eq!(
            PromptTemplate::new(Strategy::Expert, shots(1), None, Stage::default()),
            Err(PromptError::MissingTaxonomy)
        );
        let t = PromptTemplate::new(Strategy::FewShotCoT, vec![], None, Stage::default()).unwrap();
        assert!(matches!(
            build_expert_prompt(&t, &tokenize("س")),
            Err(PromptError::WrongStrategy { .. })
        ));
        let mut bad = PromptTemplate::new(Strategy::Expert, vec![], Some(alc_taxonomy()), Stage::default()).unwrap();
        bad.taxonomy = None;
        assert_eq!(build_expert_prompt(&bad, &tokenize("س")), Err(PromptError::MissingTaxonomy));
    }

    #[test]
    fn expert_and_corruptor_list_taxonomy() {
        let tax = alc_taxonomy();
        let t = PromptTemplate::new(Strategy::Expert, shots(1), Some(tax.clone()), Stage::default()).unwrap();
        let p = build_expert_prompt(&t, &tokenize("س")).unwrap();
        assert!(p.contains("1. OH: hamza error"));
        assert!(p.contains("30. SP:"));
        let c = build_corruptor_prompt(&tokenize("س"), &tax);
        assert!(c.contains("Arabic Learner Corpus"));
        assert!(c.ends_with("<input> س </input>\n"));
        assert_eq!(c, build_corruptor_prompt(&tokenize("س"), &tax));
    }
}
