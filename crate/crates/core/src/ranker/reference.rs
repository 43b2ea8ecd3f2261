//! Deterministic rankers driven by ground-truth labels, for tests and
//! simulation.

use std::sync::Arc;

use rand::Rng;

use super::{RankRequest, RankResponse, Ranker, RankerError, SlotOrder};
use crate::corpus::LabelTable;
use crate::seed::rng_for;

/// Returns the presentation order unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRanker;

impl Ranker for IdentityRanker {
    fn rank(&self, req: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
        Ok(RankResponse::from_ordering(SlotOrder::identity(req.k())))
    }

    fn name(&self) -> String {
        "identity".into()
    }
}

/// Accepted candidates first, stable by slot within each class.
#[derive(Debug, Clone)]
pub struct OracleRanker {
    labels: Arc<LabelTable>,
}

impl OracleRanker {
    pub fn new(labels: Arc<LabelTable>) -> Self {
        OracleRanker { labels }
    }

    pub(crate) fn order(&self, req: &RankRequest<'_>) -> Vec<usize> {
        let mut slots: Vec<usize> = (1..=req.k()).collect();
        // stable: ties keep slot order
        slots.sort_by_key(|&s| {
            !self
                .labels
                .judgement(&req.job.id, &req.candidates[s - 1].id)
                .is_positive()
        });
        slots
    }
}

impl Ranker for OracleRanker {
    fn rank(&self, req: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
        let order =
            SlotOrder::new(self.order(req), req.k()).expect("sorted slots form a permutation");
        Ok(RankResponse::from_ordering(order))
    }

    fn name(&self) -> String {
        "oracle".into()
    }
}

/// The oracle ordering, except that with probability `p_flip` the top
/// (gold) candidate is swapped with a uniformly chosen other slot.
///
/// Randomness comes from `(seed, request_id)`, so the same request always
/// gets the same answer regardless of call order or thread.
#[derive(Debug, Clone)]
pub struct NoisyRanker {
    oracle: OracleRanker,
    p_flip: f64,
    seed: u64,
}

impl NoisyRanker {
    pub fn new(labels: Arc<LabelTable>, p_flip: f64, seed: u64) -> Result<Self, RankerError> {
        if !(0.0..=1.0).contains(&p_flip) {
            return Err(RankerError::Config(format!(
                "p_flip must be in [0, 1], got {p_flip}"
            )));
        }
        Ok(NoisyRanker {
            oracle: OracleRanker::new(labels),
            p_flip,
            seed,
        })
    }

    pub fn p_flip(&self) -> f64 {
        self.p_flip
    }
}

impl Ranker for NoisyRanker {
    fn rank(&self, req: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
        let k = req.k();
        let mut slots = self.oracle.order(req);
        let gold_on_top = self
            .oracle
            .labels
            .judgement(&req.job.id, &req.candidates[slots[0] - 1].id)
            .is_positive();
        let mut rng = rng_for(self.seed, &req.request_id);
        if gold_on_top && rng.random_bool(self.p_flip) {
            let other = rng.random_range(1..k);
            slots.swap(0, other);
        }
        Ok(RankResponse::from_ordering(
            SlotOrder::new(slots, k).expect("swap preserves permutation"),
        ))
    }

    fn name(&self) -> String {
        format!("noisy(p_flip={})", self.p_flip)
    }
}
