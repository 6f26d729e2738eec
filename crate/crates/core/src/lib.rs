//! Arabic grammatical error correction toolkit: alignment, M2 annotation,
//! MaxMatch scoring, edit tags, synthetic corruption, error typing and an
//! LLM correction channel.

pub mod align;
pub mod config;
pub mod corrupt;
pub mod llm;
pub mod m2;
pub mod maxmatch;
pub mod sample;
pub mod stats;
pub mod tags;
pub mod text;
pub mod typer;

pub use config::AppConfig;
pub use align::{align, apply_edits, classify_action, classify_actions, diff, ActionKind, Edit, EditError};
pub use corrupt::{
    corrupt_corpus, corrupt_corpus_par, corrupt_sentence, verify_distribution, ConformanceReport, CorruptError,
    CorruptionConfig, CorruptionRecord, Tolerances,
};
pub use m2::{annotate_pair, emit_m2, parse_m2, M2Error, M2Record};
pub use maxmatch::{f_beta, score_corpus, Counts, EditKey, ScoreError, ScoreReport, Scorer};
pub use stats::CorpusStats;
pub use tags::{decode_tags, encode_tags, iterative_correct, TagError, TagSequence, TokenTag};
pub use text::{detokenize, normalize, tokenize, NormalizationMode, Sentence, TextConfig, Token};
pub use typer::{classify_edit, per_class_report, type_edits, ClassReport, ErrorClass, SubClass};
