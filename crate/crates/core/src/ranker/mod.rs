//! Listwise rankers.
//!
//! Every ranker answers a [`RankRequest`] (a job plus `k` candidates in
//! presentation slots `1..=k`) with a [`RankResponse`] whose ordering is a
//! full permutation of those slots. The LLM-backed ranker repairs imperfect
//! answers and degrades to the identity ordering on transport failure, so a
//! caller never loses or duplicates candidates.

mod answer;
mod http;
mod judge;
mod prompt;
mod reference;

pub use answer::{format_answer, parse_answer, ParsedAnswer};
pub use http::{ChatClient, EndpointConfig, LlmRanker};
pub use judge::{ChatJudge, Judge, RankerJudge, JUDGE_QUESTION};
pub use prompt::{build_prompt, Prompt, DEFAULT_INSTRUCTIONS};
pub use reference::{IdentityRanker, NoisyRanker, OracleRanker};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankerError {
    /// Fatal: bad credentials, missing API key, invalid endpoint settings.
    #[error("ranker configuration error: {0}")]
    Config(String),
    #[error("malformed answer: {0}")]
    MalformedAnswer(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: Option<u32>,
    pub max_tokens: u32,
}

impl SamplingParams {
    /// Stochastic decoding used when estimating per-window difficulty.
    pub fn annotation() -> Self {
        SamplingParams {
            temperature: 0.6,
            top_p: 0.95,
            top_k: Some(20),
            max_tokens: 4096,
        }
    }

    /// Greedy decoding for evaluation-time re-ranking.
    pub fn evaluation() -> Self {
        SamplingParams {
            temperature: 0.0,
            top_p: 1.0,
            top_k: None,
            max_tokens: 4096,
        }
    }
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams::evaluation()
    }
}

/// A permutation of presentation slots, 1-based, best first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotOrder(Vec<usize>);

impl SlotOrder {
    pub fn identity(k: usize) -> Self {
        SlotOrder((1..=k).collect())
    }

    /// Validates that `slots` is exactly a permutation of `1..=k`.
    pub fn new(slots: Vec<usize>, k: usize) -> Option<Self> {
        let mut seen = vec![false; k + 1];
        if slots.len() != k {
            return None;
        }
        for &s in &slots {
            if s == 0 || s > k || seen[s] {
                return None;
            }
            seen[s] = true;
        }
        Some(SlotOrder(slots))
    }

    /// Turns an arbitrary slot list into a permutation of `1..=k`: ids out of
    /// range are dropped, repeats after the first occurrence are dropped, and
    /// missing slots are appended in ascending order. Returns whether any
    /// repair fired.
    pub fn repair(raw: &[usize], k: usize) -> (Self, bool) {
        let mut seen = vec![false; k + 1];
        let mut out = Vec::with_capacity(k);
        let mut repaired = false;
        for &s in raw {
            if s == 0 || s > k || seen[s] {
                repaired = true;
                continue;
            }
            seen[s] = true;
            out.push(s);
        }
        for (s, &present) in seen.iter().enumerate().skip(1) {
            if !present {
                repaired = true;
                out.push(s);
            }
        }
        (SlotOrder(out), repaired)
    }

    pub fn slots(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    /// Reorders `items` (indexed by slot - 1) according to this order.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.0.iter().map(|&s| items[s - 1].clone()).collect()
    }
}

pub struct RankRequest<'a> {
    /// Stable key identifying the call; seeded rankers derive their
    /// randomness from it.
    pub request_id: String,
    pub job: &'a Document,
    /// Candidate in slot `i + 1` is `candidates[i]`.
    pub candidates: Vec<&'a Document>,
    /// Recruiter heuristics; `None` uses [`DEFAULT_INSTRUCTIONS`].
    pub instructions: Option<String>,
    pub hint: Option<String>,
    pub sampling: SamplingParams,
}

impl<'a> RankRequest<'a> {
    pub fn new(
        request_id: impl Into<String>,
        job: &'a Document,
        candidates: Vec<&'a Document>,
    ) -> Result<Self, RankerError> {
        if candidates.len() < 2 {
            return Err(RankerError::InvalidRequest(format!(
                "need at least 2 candidates, got {}",
                candidates.len()
            )));
        }
        Ok(RankRequest {
            request_id: request_id.into(),
            job,
            candidates,
            instructions: None,
            hint: None,
            sampling: SamplingParams::default(),
        })
    }

    pub fn with_sampling(mut self, sampling: SamplingParams) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_hint(mut self, hint: Option<String>) -> Self {
        self.hint = hint;
        self
    }

    pub fn with_instructions(mut self, instructions: Option<String>) -> Self {
        self.instructions = instructions;
        self
    }

    pub fn k(&self) -> usize {
        self.candidates.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResponse {
    pub raw_text: String,
    pub ordering: SlotOrder,
    pub repaired: bool,
    /// The ranker failed and the identity ordering was substituted.
    pub degraded: bool,
    pub retries: u32,
    pub latency_ms: u64,
    pub error: Option<String>,
}

impl RankResponse {
    pub fn from_ordering(ordering: SlotOrder) -> Self {
        RankResponse {
            raw_text: format_answer(&ordering),
            ordering,
            repaired: false,
            degraded: false,
            retries: 0,
            latency_ms: 0,
            error: None,
        }
    }

    pub fn degraded(k: usize, retries: u32, latency_ms: u64, error: String) -> Self {
        RankResponse {
            raw_text: String::new(),
            ordering: SlotOrder::identity(k),
            repaired: true,
            degraded: true,
            retries,
            latency_ms,
            error: Some(error),
        }
    }
}

pub trait Ranker: Send + Sync {
    fn rank(&self, req: &RankRequest<'_>) -> Result<RankResponse, RankerError>;

    fn name(&self) -> String;
}

impl<R: Ranker + ?Sized> Ranker for Box<R> {
    fn rank(&self, req: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
        (**self).rank(req)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

impl<R: Ranker + ?Sized> Ranker for std::sync::Arc<R> {
    fn rank(&self, req: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
        (**self).rank(req)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}
