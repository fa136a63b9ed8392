//! Obtains per-token conditional log-probabilities for candidate label
//! continuations of a prompt, either from a remote inference endpoint or
//! from a deterministic mock table.
//!
//! The label probability itself is never materialized here: a label's score
//! is the sum of its token log-probabilities (the log of the product of
//! conditional token probabilities), which underflows far later than the
//! product would.

mod mock;
mod remote;

pub use mock::{prompt_hash, MockScoreTable, MockScorer, DEFAULT_MOCK_LOGPROB};
pub use remote::{resolve_endpoint, RemoteScorer, ScoreRequest, ScoreResponse, DEFAULT_SCORE_PATH};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::types::{LabelSet, ScoredLabel};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("backend unreachable after {attempts} attempt(s): {detail}")]
    BackendUnreachable { attempts: u32, detail: String },
    #[error("protocol error: {0}")]
    ProtocolError(String),
    #[error("backend retokenized continuation: requested {requested:?}, got {returned:?}")]
    TokenMismatch {
        requested: Vec<String>,
        returned: Vec<String>,
    },
    #[error("scoring label {index} failed: {source}")]
    Label {
        index: usize,
        #[source]
        source: Box<ScoringError>,
    },
    #[error("mock score table: {0}")]
    Table(String),
    #[error("empty prompt")]
    EmptyPrompt,
    #[error("empty continuation")]
    EmptyContinuation,
}

/// Per-token scores for one continuation. `defaulted` is set when a mock
/// table had no entry and filled every position with its default.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenScores {
    pub logprobs: Vec<f64>,
    pub defaulted: bool,
}

/// A scoring backend. Implementations must be safe for concurrent use and
/// deterministic for identical inputs.
pub trait Scorer: Send + Sync {
    /// Returns one conditional log-probability per continuation token, each
    /// conditioned on the prompt plus all earlier continuation tokens.
    fn score_continuation(
        &self,
        prompt: &str,
        continuation_tokens: &[String],
    ) -> Result<TokenScores, ScoringError>;

    /// Maximum number of in-flight requests [`score_label_set`] may issue
    /// against this backend. `1` disables fan-out.
    fn concurrency_limit(&self) -> usize {
        1
    }
}

/// Log of Eq-style joint label probability: the sum of per-token conditional
/// log-probabilities. Identity for single-token labels.
pub fn raw_label_logprob(scored: &ScoredLabel) -> f64 {
    scored.token_logprobs.iter().sum()
}

/// Scores every label of `labels` as a continuation of `prompt`.
///
/// Requests may be issued concurrently up to the scorer's limit, but the
/// returned vector is always in label-set order and identical regardless of
/// completion order. Errors carry the lowest failing label index.
pub fn score_label_set(
    scorer: &dyn Scorer,
    prompt: &str,
    labels: &LabelSet,
) -> Result<Vec<ScoredLabel>, ScoringError> {
    let limit = scorer.concurrency_limit().max(1);
    let n = labels.len();
    let results: Mutex<Vec<Option<Result<TokenScores, ScoringError>>>> =
        Mutex::new((0..n).map(|_| None).collect());

    if limit == 1 || n <= 1 {
        for label in labels.labels() {
            let r = scorer.score_continuation(prompt, &label.tokens);
            results.lock().unwrap()[label.index] = Some(r);
        }
    } else {
        let cursor = AtomicUsize::new(0);
        let workers = limit.min(n);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = cursor.fetch_add(1, Ordering::SeqCst);
                    if i >= n {
                        break;
                    }
                    let label = &labels.labels()[i];
                    let r = scorer.score_continuation(prompt, &label.tokens);
                    results.lock().unwrap()[i] = Some(r);
                });
            }
        });
    }

    let collected = results.into_inner().unwrap();
    let mut scored = Vec::with_capacity(n);
    for (index, slot) in collected.into_iter().enumerate() {
        match slot.expect("every label slot is filled") {
            Ok(ts) => scored.push(ScoredLabel {
                label_index: index,
                token_logprobs: ts.logprobs,
                defaulted: ts.defaulted,
            }),
            Err(e) => {
                return Err(ScoringError::Label {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(scored)
}
