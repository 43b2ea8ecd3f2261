//! Window judges used by the LLM-filter data strategy.

use std::sync::OnceLock;

use regex::Regex;
use tracing::warn;

use super::http::{ChatClient, ChatOutcome, EndpointConfig};
use super::prompt::Prompt;
use super::{RankRequest, Ranker, RankerError, SamplingParams};

pub const JUDGE_QUESTION: &str = "Is this window's accepted candidate clearly the best fit?";

/// Decides whether a training window is suitable for learning.
pub trait Judge: Send + Sync {
    /// `gold_slot` is the 1-based presentation slot of the accepted candidate.
    fn approve(&self, req: &RankRequest<'_>, gold_slot: usize) -> Result<bool, RankerError>;
}

/// Approves a window when the wrapped ranker puts the accepted candidate
/// first without degrading.
pub struct RankerJudge<R> {
    ranker: R,
}

impl<R: Ranker> RankerJudge<R> {
    pub fn new(ranker: R) -> Self {
        RankerJudge { ranker }
    }
}

impl<R: Ranker> Judge for RankerJudge<R> {
    fn approve(&self, req: &RankRequest<'_>, gold_slot: usize) -> Result<bool, RankerError> {
        let resp = self.ranker.rank(req)?;
        Ok(!resp.degraded && resp.ordering.first() == Some(gold_slot))
    }
}

/// Asks a chat endpoint a yes/no question about the window.
pub struct ChatJudge {
    client: ChatClient,
}

impl ChatJudge {
    pub fn new(cfg: EndpointConfig) -> Result<Self, RankerError> {
        Ok(ChatJudge {
            client: ChatClient::new(cfg)?,
        })
    }

    pub fn prompt(req: &RankRequest<'_>, gold_slot: usize) -> Prompt {
        let resumes = req
            .candidates
            .iter()
            .enumerate()
            .map(|(i, d)| format!("Resume [{}]:\n{}", i + 1, d.render()))
            .collect::<Vec<_>>()
            .join("\n\n");
        Prompt {
            system: "You are an expert technical recruiter reviewing training data for a resume \
                     ranking model. Answer with <answer> yes </answer> or <answer> no </answer>."
                .into(),
            user: format!(
                "JOB DESCRIPTION: [{}]\n\nResumes:\n{resumes}\n\n\
                 The recruiter accepted Resume [{gold_slot}]. {JUDGE_QUESTION}",
                req.job.render()
            ),
        }
    }
}

fn verdict(text: &str) -> Result<bool, RankerError> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?is)<answer>\s*(yes|no)\b.*?</answer>").unwrap());
    match re.captures_iter(text).last() {
        Some(c) => Ok(c[1].eq_ignore_ascii_case("yes")),
        None => Err(RankerError::MalformedAnswer(
            "judge gave no yes/no answer".into(),
        )),
    }
}

impl Judge for ChatJudge {
    fn approve(&self, req: &RankRequest<'_>, gold_slot: usize) -> Result<bool, RankerError> {
        let prompt = ChatJudge::prompt(req, gold_slot);
        match self
            .client
            .complete(&prompt, &SamplingParams::evaluation(), verdict)?
        {
            ChatOutcome::Done { value, .. } => Ok(value),
            ChatOutcome::Failed { error, .. } => {
                warn!(request = %req.request_id, %error, "judge failed; rejecting window");
                Ok(false)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_parsing() {
        assert_eq!(verdict("<answer> yes </answer>"), Ok(true));
        assert_eq!(
            verdict("<think>...</think><answer>No, because</answer>"),
            Ok(false)
        );
        assert!(verdict("maybe").is_err());
    }
}
