//! Shared inputs for the pipeline benchmarks.

use agec_core::corrupt::{corrupt_corpus_par, CorruptionConfig, CorruptionRecord};
use agec_core::m2::M2Record;
use agec_core::sample::toy_corpus;
use agec_core::text::Sentence;

pub const SEED: u64 = 7;

pub struct Fixture {
    pub clean: Vec<Sentence>,
    pub records: Vec<CorruptionRecord>,
    /// Gold annotations on the noisy side.
    pub gold: Vec<M2Record>,
    /// (noisy source, clean hypothesis): a perfect system.
    pub perfect: Vec<(Sentence, Sentence)>,
}

impl Fixture {
    pub fn new(sentences: usize) -> Self {
        let clean = toy_corpus(SEED, sentences);
        let records = corrupt_corpus_par(&clean, &CorruptionConfig::default()).expect("toy corpus corrupts");
        let gold = records.iter().map(CorruptionRecord::to_m2).collect();
        let perfect = records.iter().map(|r| (r.noisy.clone(), r.clean.clone())).collect();
        Self {
            clean,
            records,
            gold,
            perfect,
        }
    }
}
