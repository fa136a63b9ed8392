//! Shared data model: labels, label sets, examples, per-label scores, and
//! predictions. Everything downstream (scoring, calibration, metrics,
//! reporting) operates on these types.
//!
//! Log-probabilities are the canonical internal representation (natural log);
//! probabilities are only materialized at calibration and reporting
//! boundaries. All types here are immutable after construction and safe to
//! share read-only across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or validating a [`LabelSet`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelSetError {
    #[error("duplicate label text: {0:?}")]
    DuplicateLabel(String),
    #[error("backend returned zero tokens for label {0:?}")]
    EmptyTokenization(String),
    #[error("label set must contain at least one label")]
    Empty,
    #[error("expected one token list per label: {labels} labels, {token_lists} token lists")]
    TokenReportMismatch { labels: usize, token_lists: usize },
}

/// A class label: display text plus the backend-reported token decomposition
/// of `" " + text` (the scoring-time form, leading space included).
///
/// Token decompositions always come from the scoring backend, never from a
/// local tokenizer — tokenization differs per model and the backend is
/// authoritative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub text: String,
    pub tokens: Vec<String>,
    pub index: usize,
}

impl Label {
    /// Number of tokens in the label's decomposition.
    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }
}

/// An ordered, validated set of candidate labels.
///
/// Ordering is stable across a run: argmax tie-breaking (lowest index wins)
/// depends on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub name: String,
    labels: Vec<Label>,
}

impl LabelSet {
    /// Builds a `LabelSet` from label texts and the backend's per-label token
    /// report. Indices are assigned in input order. Rejects duplicates and
    /// empty tokenizations.
    pub fn validate(
        name: impl Into<String>,
        texts: &[String],
        tokenizer_report: &[Vec<String>],
    ) -> Result<Self, LabelSetError> {
        if texts.is_empty() {
            return Err(LabelSetError::Empty);
        }
        if texts.len() != tokenizer_report.len() {
            return Err(LabelSetError::TokenReportMismatch {
                labels: texts.len(),
                token_lists: tokenizer_report.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        let mut labels = Vec::with_capacity(texts.len());
        for (index, (text, tokens)) in texts.iter().zip(tokenizer_report).enumerate() {
            if !seen.insert(text.as_str()) {
                return Err(LabelSetError::DuplicateLabel(text.clone()));
            }
            if tokens.is_empty() || tokens.iter().all(|t| t.is_empty()) {
                return Err(LabelSetError::EmptyTokenization(text.clone()));
            }
            labels.push(Label {
                text: text.clone(),
                tokens: tokens.clone(),
                index,
            });
        }
        Ok(Self {
            name: name.into(),
            labels,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Label> {
        self.labels.get(index)
    }

    /// Looks a label up by its display text.
    pub fn index_of(&self, text: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.text == text)
    }

    /// Mean token count over the set's labels.
    pub fn mean_n_tokens(&self) -> f64 {
        self.labels.iter().map(|l| l.n_tokens() as f64).sum::<f64>() / self.labels.len() as f64
    }
}

/// A dataset record: input text plus, when labeled, the gold index into the
/// active [`LabelSet`]. Content-free probes and unlabeled records leave
/// `gold` unset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub input: String,
    pub gold: Option<usize>,
}

/// Per-token conditional log-probabilities for one label continuation under
/// one prompt. Each entry is conditioned on the prompt plus all earlier
/// label tokens; their sum is the log of the label's joint probability.
///
/// `defaulted` marks scores that a mock backend filled with its default
/// log-probability because the table had no entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredLabel {
    pub label_index: usize,
    pub token_logprobs: Vec<f64>,
    #[serde(default)]
    pub defaulted: bool,
}

impl ScoredLabel {
    pub fn n_tokens(&self) -> usize {
        self.token_logprobs.len()
    }
}

/// Raw, normalized, baseline, and calibrated scores for one label of one
/// input. `calibrated_score` is `exp(norm_logprob) / baseline_prob`;
/// `confidence` is that score renormalized over the full label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub label_index: usize,
    pub raw_logprob: f64,
    pub norm_logprob: f64,
    pub baseline_prob: f64,
    pub calibrated_score: f64,
    pub confidence: f64,
}

/// The method family. Names (`raw`, `norm`, `cc`, `ncc`, `dc`, `ndc`, `bc`,
/// `nbc`) are the stable CLI and report vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Raw,
    Norm,
    Cc,
    Ncc,
    Dc,
    Ndc,
    Bc,
    Nbc,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Raw,
        Method::Norm,
        Method::Cc,
        Method::Ncc,
        Method::Dc,
        Method::Ndc,
        Method::Bc,
        Method::Nbc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Norm => "norm",
            Method::Cc => "cc",
            Method::Ncc => "ncc",
            Method::Dc => "dc",
            Method::Ndc => "ndc",
            Method::Bc => "bc",
            Method::Nbc => "nbc",
        }
    }

    /// Whether label scores are length-normalized before use.
    pub fn normalized_space(&self) -> bool {
        matches!(self, Method::Norm | Method::Ncc | Method::Ndc | Method::Nbc)
    }

    /// Whether the method divides by a baseline vector.
    pub fn needs_baseline(&self) -> bool {
        !matches!(self, Method::Raw | Method::Norm)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                format!("unknown method {s:?} (expected one of raw, norm, cc, ncc, dc, ndc, bc, nbc)")
            })
    }
}

/// The argmax decision for one input under one method. Ties break to the
/// lowest label index; `confidence` is the winner's renormalized score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label_index: usize,
    pub method: Method,
    pub confidence: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn toks(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter().map(|t| texts(t)).collect()
    }

    #[test]
    fn validate_builds_stable_indices() {
        let set = LabelSet::validate(
            "sentiment",
            &texts(&["positive", "negative"]),
            &toks(&[&[" positive"], &[" negative"]]),
        )
        .unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.get(0).unwrap().text, "positive");
        assert_eq!(set.get(0).unwrap().index, 0);
        assert_eq!(set.get(1).unwrap().index, 1);
        assert_eq!(set.index_of("negative"), Some(1));
    }

    #[test]
    fn validate_rejects_duplicates() {
        let err =
            LabelSet::validate("d", &texts(&["a", "a"]), &toks(&[&[" a"], &[" a"]])).unwrap_err();
        assert_eq!(err, LabelSetError::DuplicateLabel("a".into()));
    }

    #[test]
    fn validate_rejects_empty_tokenization() {
        let err = LabelSet::validate("d", &texts(&["a"]), &[vec![]]).unwrap_err();
        assert_eq!(err, LabelSetError::EmptyTokenization("a".into()));
    }

    #[test]
    fn sst5_mean_token_count() {
        // Two 2-token labels and three 1-token labels: mean 7/5 = 1.40.
        let set = LabelSet::validate(
            "sst5",
            &texts(&[
                "very positive",
                "positive",
                "neutral",
                "negative",
                "very negative",
            ]),
            &toks(&[
                &[" very", " positive"],
                &[" positive"],
                &[" neutral"],
                &[" negative"],
                &[" very", " negative"],
            ]),
        )
        .unwrap();
        assert!((set.mean_n_tokens() - 1.40).abs() < 1e-12);
    }

    #[test]
    fn indices_form_permutation() {
        let set = LabelSet::validate(
            "p",
            &texts(&["x", "y", "z"]),
            &toks(&[&[" x"], &[" y"], &[" z"]]),
        )
        .unwrap();
        let mut idx: Vec<usize> = set.labels().iter().map(|l| l.index).collect();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("sbert".parse::<Method>().is_err());
    }

    #[test]
    fn label_set_serde_round_trip_is_bit_exact() {
        let set = LabelSet::validate(
            "rt",
            &texts(&["very positive", "neutral"]),
            &toks(&[&[" very", " positive"], &[" neutral"]]),
        )
        .unwrap();
        let json = serde_json::to_string(&set).unwrap();
        let back: LabelSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
