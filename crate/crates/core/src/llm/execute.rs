//! Bounded-concurrency request execution with retries and a JSON-lines log.

use std::io::Write;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use super::transport::{Failure, Transport, TransportConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exchange {
    pub ordinal: usize,
    pub prompt: String,
    pub response: String,
    pub retries: u32,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("prompt {ordinal}: authentication failed: {reason}")]
    AuthError { ordinal: usize, reason: String },
    #[error("prompt {ordinal}: gave up after {attempts} attempts: {reason}")]
    RetriesExhausted { ordinal: usize, attempts: u32, reason: String },
    #[error("prompt {ordinal}: {reason}")]
    TransportError { ordinal: usize, reason: String },
    #[error("invalid transport config: {0}")]
    InvalidConfig(String),
    #[error("cannot write request log: {0}")]
    Log(#[from] std::io::Error),
    #[error(transparent)]
    Prompt(#[from] super::prompt::PromptError),
}

impl LlmError {
    pub fn ordinal(&self) -> Option<usize> {
        match self {
            Self::AuthError { ordinal, .. }
            | Self::RetriesExhausted { ordinal, .. }
            | Self::TransportError { ordinal, .. } => Some(*ordinal),
            _ => None,
        }
    }
}

/// One line of the request log.
#[derive(Clone, Debug, Serialize)]
pub struct LogEvent<'a> {
    pub seq: u64,
    pub ordinal: usize,
    pub attempt: u32,
    pub kind: &'static str,
    pub prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Log<'w> {
    seq: u64,
    sink: Option<&'w mut (dyn Write + Send)>,
    failure: Option<std::io::Error>,
}

impl Log<'_> {
    fn record(&mut self, mut event: LogEvent<'_>) {
        event.seq = self.seq;
        self.seq += 1;
        if let (Some(sink), None) = (self.sink.as_mut(), self.failure.as_ref()) {
            let line = serde_json::to_string(&event).expect("log events serialize");
            if let Err(e) = writeln!(sink, "{line}") {
                self.failure = Some(e);
            }
        }
    }
}

/// Sends every prompt, at most `cfg.max_in_flight` at a time, and returns the
/// exchanges in prompt order. Rate limits and transient failures are retried
/// with exponential backoff. On failure the error for the lowest failing
/// ordinal is returned and no new prompts are started.
pub fn execute(
    transport: &dyn Transport,
    cfg: &TransportConfig,
    prompts: &[String],
    log: Option<&mut (dyn Write + Send)>,
) -> Result<Vec<Exchange>, LlmError> {
    cfg.validate().map_err(LlmError::InvalidConfig)?;
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Exchange>>> = Mutex::new(vec![None; prompts.len()]);
    let errors: Mutex<Vec<LlmError>> = Mutex::new(Vec::new());
    let log = Mutex::new(Log {
        seq: 0,
        sink: log,
        failure: None,
    });
    let workers = cfg.max_in_flight.min(prompts.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let ordinal = next.fetch_add(1, Ordering::SeqCst);
                let Some(prompt) = prompts.get(ordinal) else {
                    break;
                };
                match run_one(transport, cfg, ordinal, prompt, &log) {
                    Ok(exchange) => results.lock().expect("results lock")[ordinal] = Some(exchange),
                    Err(e) => {
                        stop.store(true, Ordering::SeqCst);
                        errors.lock().expect("errors lock").push(e);
                    }
                }
            });
        }
    });

    let mut errors = errors.into_inner().expect("errors lock");
    if let Some(i) = (0..errors.len()).min_by_key(|&i| errors[i].ordinal()) {
        return Err(errors.swap_remove(i));
    }
    if let Some(e) = log.into_inner().expect("log lock").failure {
        return Err(LlmError::Log(e));
    }
    Ok(results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every prompt answered"))
        .collect())
}

fn run_one(
    transport: &dyn Transport,
    cfg: &TransportConfig,
    ordinal: usize,
    prompt: &str,
    log: &Mutex<Log<'_>>,
) -> Result<Exchange, LlmError> {
    let event = |attempt: u32, kind: &'static str| LogEvent {
        seq: 0,
        ordinal,
        attempt,
        kind,
        prompt,
        response: None,
        error: None,
    };
    let mut attempt = 0;
    loop {
        attempt += 1;
        log.lock().expect("log lock").record(event(attempt, "request"));
        match transport.complete(prompt) {
            Ok(response) => {
                log.lock().expect("log lock").record(LogEvent {
                    response: Some(&response),
                    ..event(attempt, "response")
                });
                return Ok(Exchange {
                    ordinal,
                    prompt: prompt.to_string(),
                    response,
                    retries: attempt - 1,
                });
            }
            Err(failure) => {
                log.lock().expect("log lock").record(LogEvent {
                    error: Some(failure.to_string()),
                    ..event(attempt, "error")
                });
                let reason = failure.to_string();
                match failure {
                    Failure::Auth(reason) => return Err(LlmError::AuthError { ordinal, reason }),
                    Failure::Fatal(reason) => return Err(LlmError::TransportError { ordinal, reason }),
                    _ if attempt > cfg.max_retries => {
                        return Err(LlmError::RetriesExhausted {
                            ordinal,
                            attempts: attempt,
                            reason,
                        })
                    }
                    _ => std::thread::sleep(cfg.backoff(attempt - 1)),
                }
            }
        }
    }
}
