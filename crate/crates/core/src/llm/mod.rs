//! Prompting protocols and a pluggable chat-completion channel.

pub mod execute;
pub mod parse;
pub mod presets;
pub mod prompt;
pub mod transport;

use std::io::Write;

pub use execute::{execute, Exchange, LlmError, LogEvent};
pub use parse::{parse_model_output, ParseError, ParsedOutput};
pub use prompt::{
    alc_taxonomy, build_corruptor_prompt, build_cot_prompt, build_expert_prompt, build_prompt, wrap_input,
    wrap_output, PromptError, PromptTemplate, Shot, Stage, Strategy, TaxonomyEntry,
};
pub use transport::{Failure, FnTransport, HttpTransport, ReplayTransport, Transport, TransportConfig};

use crate::text::Sentence;

/// Reply for one input sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LlmOutcome {
    pub source: Sentence,
    pub raw: String,
    /// `None` when the reply held no usable sentence.
    pub parsed: Option<ParsedOutput>,
    pub retries: u32,
}

impl LlmOutcome {
    /// Parsed sentence, or the source when the reply was unusable.
    pub fn sentence_or_source(&self) -> Sentence {
        self.parsed
            .as_ref()
            .map_or_else(|| self.source.clone(), |p| p.sentence.clone().with_id(self.source.id.clone()))
    }
}

pub fn build_prompts(template: &PromptTemplate, inputs: &[Sentence]) -> Result<Vec<String>, PromptError> {
    inputs.iter().map(|s| build_prompt(template, s)).collect()
}

/// Builds prompts, sends them and parses every reply.
pub fn run(
    transport: &dyn Transport,
    cfg: &TransportConfig,
    template: &PromptTemplate,
    inputs: &[Sentence],
    log: Option<&mut (dyn Write + Send)>,
) -> Result<Vec<LlmOutcome>, LlmError> {
    let prompts = build_prompts(template, inputs)?;
    let exchanges = execute(transport, cfg, &prompts, log)?;
    Ok(exchanges
        .into_iter()
        .zip(inputs)
        .map(|(x, source)| {
            let parsed = parse_model_output(&x.response).ok();
            if parsed.is_none() {
                log::warn!("prompt {}: reply has no usable sentence", x.ordinal);
            }
            LlmOutcome {
                source: source.clone(),
                raw: x.response,
                parsed,
                retries: x.retries,
            }
        })
        .collect())
}
