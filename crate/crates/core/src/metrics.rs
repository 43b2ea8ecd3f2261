//! Ranking metrics over binary relevance, the two RL rewards, and
//! group-relative advantages.
//!
//! Gains are binary and the discount at (1-based) rank `i` is `1 / log2(i + 1)`;
//! with binary labels this coincides with the `2^rel - 1` gain variant.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("relevance vector is empty")]
    EmptyRelevance,
    #[error("relevance entries must be 0 or 1, found {0}")]
    NonBinary(u8),
    #[error("no positive entries: metric undefined")]
    NoPositives,
    #[error(
        "nDCG values must satisfy 0 <= old, new <= max <= 1 (old={old}, new={new}, max={max})"
    )]
    InvalidNdcg { old: f64, new: f64, max: f64 },
    #[error("candidate {0:?} is not part of the window")]
    UnknownCandidate(String),
    #[error("reward group is empty")]
    EmptyGroup,
}

/// Binary relevance aligned to an ordering, best rank first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceVector(Vec<u8>);

impl RelevanceVector {
    pub fn new(rels: Vec<u8>) -> Result<Self, MetricError> {
        if rels.is_empty() {
            return Err(MetricError::EmptyRelevance);
        }
        if let Some(&bad) = rels.iter().find(|&&r| r > 1) {
            return Err(MetricError::NonBinary(bad));
        }
        Ok(RelevanceVector(rels))
    }

    /// A length-`len` vector with a single positive at 0-based `position`.
    pub fn single_positive(len: usize, position: usize) -> Result<Self, MetricError> {
        let mut rels = vec![0; len];
        if let Some(slot) = rels.get_mut(position) {
            *slot = 1;
        }
        RelevanceVector::new(rels)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn num_positives(&self) -> usize {
        self.0.iter().filter(|&&r| r == 1).count()
    }

    fn ideal(&self) -> RelevanceVector {
        let mut sorted = self.0.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        RelevanceVector(sorted)
    }
}

#[inline]
fn discount(rank0: usize) -> f64 {
    1.0 / ((rank0 + 2) as f64).log2()
}

pub fn dcg(rels: &RelevanceVector, k: usize) -> Result<f64, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    Ok(rels
        .0
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, &r)| r == 1)
        .map(|(i, _)| discount(i))
        .sum())
}

pub fn ndcg(rels: &RelevanceVector, k: usize) -> Result<f64, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    if rels.num_positives() == 0 {
        return Err(MetricError::NoPositives);
    }
    let ideal = dcg(&rels.ideal(), k)?;
    Ok(dcg(rels, k)? / ideal)
}

/// Share of the vector's positives ranked within the first `k`. The
/// denominator is the positives of this (pool-level) vector, not the corpus.
pub fn recall_at_k(rels: &RelevanceVector, k: usize) -> Result<f64, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    let total = rels.num_positives();
    if total == 0 {
        return Err(MetricError::NoPositives);
    }
    let hit = rels.0.iter().take(k).filter(|&&r| r == 1).count();
    Ok(hit as f64 / total as f64)
}

/// Relative nDCG improvement `(new - old) / (max - old)`.
///
/// An already-optimal starting order (`old == max`) has no room to improve
/// and yields 0.
pub fn rearank_reward(ndcg_old: f64, ndcg_new: f64, ndcg_max: f64) -> Result<f64, MetricError> {
    let in_unit = |x: f64| (0.0..=1.0).contains(&x);
    if !(in_unit(ndcg_old) && in_unit(ndcg_new) && in_unit(ndcg_max))
        || ndcg_old > ndcg_max
        || ndcg_new > ndcg_max
    {
        return Err(MetricError::InvalidNdcg {
            old: ndcg_old,
            new: ndcg_new,
            max: ndcg_max,
        });
    }
    if ndcg_old == ndcg_max {
        return Ok(0.0);
    }
    Ok((ndcg_new - ndcg_old) / (ndcg_max - ndcg_old))
}

/// Binary top-1 reward: 1 when the predicted first candidate is the gold one.
pub fn rankr1_reward(
    predicted_top: &str,
    gold: &str,
    window: &[String],
) -> Result<f64, MetricError> {
    for id in [predicted_top, gold] {
        if !window.iter().any(|c| c == id) {
            return Err(MetricError::UnknownCandidate(id.to_string()));
        }
    }
    Ok(if predicted_top == gold { 1.0 } else { 0.0 })
}

/// Standardizes rewards within a group using the population standard
/// deviation. Groups whose rewards are all identical map to all zeros.
pub fn group_advantages(rewards: &[f64]) -> Result<Vec<f64>, MetricError> {
    let first = *rewards.first().ok_or(MetricError::EmptyGroup)?;
    if rewards.iter().all(|&r| r == first) {
        return Ok(vec![0.0; rewards.len()]);
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Ok(vec![0.0; rewards.len()]);
    }
    Ok(rewards.iter().map(|r| (r - mean) / std).collect())
}

/// One sampled ordering of a window, given as 0-based presented slots.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSample {
    pub order: Vec<usize>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardGroup {
    pub window_id: String,
    pub samples: Vec<RewardSample>,
    pub advantages: Vec<f64>,
}

impl RewardGroup {
    pub fn new(
        window_id: impl Into<String>,
        samples: Vec<RewardSample>,
    ) -> Result<Self, MetricError> {
        let rewards: Vec<f64> = samples.iter().map(|s| s.reward).collect();
        let advantages = group_advantages(&rewards)?;
        Ok(RewardGroup {
            window_id: window_id.into(),
            samples,
            advantages,
        })
    }

    pub fn mean_reward(&self) -> f64 {
        self.samples.iter().map(|s| s.reward).sum::<f64>() / self.samples.len() as f64
    }
}
