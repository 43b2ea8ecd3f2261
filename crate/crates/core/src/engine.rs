//! Multi-pass sliding-window re-ranking over a top-N pool.
//!
//! A window of `k` candidates slides bottom-up with stride `s`: it starts at
//! position `N - k + 1`, moves to `max(1, start - s)` after each call and
//! stops once the window at position 1 has been ranked. Each call rewrites the
//! window's `k` slots in place, so strong candidates bubble toward the top.
//! The whole pass repeats `t` times.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::corpus::{Corpus, RankedPool};
use crate::metrics::{ndcg, recall_at_k, MetricError, RelevanceVector};
use crate::ranker::{RankRequest, Ranker, RankerError, SlotOrder};

pub const EVAL_CUTOFF: usize = 10;

/// (k, s) settings of the window/stride ablation at N = 20.
pub const WINDOW_STRIDE_GRID: [(usize, usize); 6] =
    [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)];

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid engine config: {0}")]
    InvalidConfig(String),
    #[error("job {job_id}: pool has {len} candidates, window needs {k}")]
    PoolTooShort {
        job_id: String,
        len: usize,
        k: usize,
    },
    #[error("document {0:?} not found in corpus")]
    UnknownDocument(String),
    #[error("job {0}: re-ranked candidates are not a permutation of the pool")]
    NotAPermutation(String),
    #[error(transparent)]
    Ranker(#[from] RankerError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub window_size: usize,
    pub stride: usize,
    pub iterations: usize,
    pub pool_size: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            window_size: 4,
            stride: 2,
            iterations: 2,
            pool_size: 20,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let (k, s, n) = (self.window_size, self.stride, self.pool_size);
        if !(1 <= s && s < k && k <= n) {
            return Err(EngineError::InvalidConfig(format!(
                "need 1 <= stride < window_size <= pool_size, got s={s}, k={k}, N={n}"
            )));
        }
        if self.iterations == 0 {
            return Err(EngineError::InvalidConfig("iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub fn comparisons_per_iter(&self) -> usize {
        comparisons_per_iter(self.pool_size, self.window_size, self.stride)
    }
}

/// 1-based window start positions of one pass, in call order.
pub fn window_starts(n: usize, k: usize, s: usize) -> Vec<usize> {
    assert!(
        s >= 1 && k >= 1 && k <= n,
        "invalid schedule n={n} k={k} s={s}"
    );
    let mut start = n - k + 1;
    let mut out = vec![start];
    while start > 1 {
        start = start.saturating_sub(s).max(1);
        out.push(start);
    }
    out
}

/// `1 + ceil((n - k) / s)`: ranker calls per pass.
pub fn comparisons_per_iter(n: usize, k: usize, s: usize) -> usize {
    1 + (n - k).div_ceil(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub pass: usize,
    pub start: usize,
    pub before: Vec<String>,
    pub after: Vec<String>,
    pub raw_text: String,
    pub repaired: bool,
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankTrace {
    pub job_id: String,
    pub initial: Vec<String>,
    pub windows: Vec<WindowRecord>,
    #[serde(rename = "final")]
    pub final_ordering: Vec<String>,
    pub windows_per_pass: usize,
}

impl RerankTrace {
    pub fn degraded_calls(&self) -> usize {
        self.windows.iter().filter(|w| w.degraded).count()
    }

    pub fn to_reranked(&self) -> RerankedPool {
        RerankedPool {
            job_id: self.job_id.clone(),
            candidates: self.final_ordering.clone(),
            calls: self.windows.len(),
            degraded_calls: self.degraded_calls(),
        }
    }
}

/// Final ordering of one job plus call accounting, as written by `rerank`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerankedPool {
    pub job_id: String,
    pub candidates: Vec<String>,
    pub calls: usize,
    pub degraded_calls: usize,
}

/// Runs `cfg.iterations` sliding-window passes over one pool.
///
/// The schedule is computed from the pool's actual length; a length other
/// than `cfg.pool_size` is logged. Ranker config errors abort, while
/// transport or answer failures are absorbed as an identity window and
/// flagged as degraded.
pub fn rerank_pool(
    pool: &RankedPool,
    docs: &Corpus,
    ranker: &dyn Ranker,
    cfg: &EngineConfig,
) -> Result<RerankTrace, EngineError> {
    cfg.validate()?;
    let n = pool.candidates.len();
    let k = cfg.window_size;
    if n < k {
        return Err(EngineError::PoolTooShort {
            job_id: pool.job_id.clone(),
            len: n,
            k,
        });
    }
    if n != cfg.pool_size {
        warn!(job = %pool.job_id, len = n, expected = cfg.pool_size, "pool size differs from config");
    }
    let job = docs
        .get(&pool.job_id)
        .ok_or_else(|| EngineError::UnknownDocument(pool.job_id.clone()))?;
    let starts = window_starts(n, k, cfg.stride);
    let mut order = pool.candidates.clone();
    let mut windows = Vec::with_capacity(starts.len() * cfg.iterations);

    for pass in 0..cfg.iterations {
        for &start in &starts {
            let range = start - 1..start - 1 + k;
            let before: Vec<String> = order[range.clone()].to_vec();
            let candidates = before
                .iter()
                .map(|id| {
                    docs.get(id)
                        .ok_or_else(|| EngineError::UnknownDocument(id.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let req = RankRequest::new(
                format!("{}/pass{pass}/start{start}", pool.job_id),
                job,
                candidates,
            )?;
            let (slots, raw_text, repaired, degraded) = match ranker.rank(&req) {
                Ok(resp) => {
                    let (slots, fixed) = if resp.ordering.len() == k {
                        (resp.ordering, false)
                    } else {
                        SlotOrder::repair(resp.ordering.slots(), k)
                    };
                    (slots, resp.raw_text, resp.repaired || fixed, resp.degraded)
                }
                Err(e @ (RankerError::Config(_) | RankerError::InvalidRequest(_))) => {
                    return Err(e.into())
                }
                Err(e) => {
                    warn!(request = %req.request_id, error = %e, "ranker error; keeping window order");
                    (SlotOrder::identity(k), String::new(), true, true)
                }
            };
            let after = slots.apply(&before);
            order.splice(range, after.iter().cloned());
            windows.push(WindowRecord {
                pass,
                start,
                before,
                after,
                raw_text,
                repaired,
                degraded,
            });
        }
    }

    Ok(RerankTrace {
        job_id: pool.job_id.clone(),
        initial: pool.candidates.clone(),
        windows,
        final_ordering: order,
        windows_per_pass: starts.len(),
    })
}

/// Re-ranks every pool in parallel; traces come back sorted by job id.
pub fn rerank_all(
    pools: &[RankedPool],
    docs: &Corpus,
    ranker: &dyn Ranker,
    cfg: &EngineConfig,
) -> Result<Vec<RerankTrace>, EngineError> {
    cfg.validate()?;
    let mut traces = pools
        .par_iter()
        .map(|p| rerank_pool(p, docs, ranker, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    traces.sort_by(|a, b| a.job_id.cmp(&b.job_id));
    Ok(traces)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcludeReason {
    NoPositives,
    NotReranked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub job_id: String,
    pub reason: ExcludeReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRow {
    pub job_id: String,
    pub ndcg10_before: f64,
    pub ndcg10_after: f64,
    pub recall10_before: f64,
    pub recall10_after: f64,
    pub degraded_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroRow {
    pub jobs: usize,
    pub ndcg10_before: f64,
    pub ndcg10_after: f64,
    pub recall10_before: f64,
    pub recall10_after: f64,
    /// Mean of nDCG@10 and Recall@10.
    pub average_before: f64,
    pub average_after: f64,
    pub calls: usize,
    pub degraded_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankReport {
    pub config: EngineConfig,
    pub per_job: Vec<JobRow>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroRow,
    pub excluded: Vec<Excluded>,
}

impl RerankReport {
    pub fn degraded(&self) -> bool {
        self.macro_avg.degraded_calls > 0
    }
}

fn at_cutoff(pool: &RankedPool, ids: &[String]) -> Result<(f64, f64), MetricError> {
    let rels = RelevanceVector::new(pool.relevance_of(ids))?;
    Ok((ndcg(&rels, EVAL_CUTOFF)?, recall_at_k(&rels, EVAL_CUTOFF)?))
}

/// Scores final orderings against the retrieval order. Pools without a
/// positive or without a re-ranked counterpart are excluded and listed.
pub fn build_report(
    pools: &[RankedPool],
    reranked: &[RerankedPool],
    cfg: &EngineConfig,
) -> Result<RerankReport, EngineError> {
    let by_job: HashMap<&str, &RerankedPool> =
        reranked.iter().map(|r| (r.job_id.as_str(), r)).collect();
    let mut sorted: Vec<&RankedPool> = pools.iter().collect();
    sorted.sort_by(|a, b| a.job_id.cmp(&b.job_id));

    let mut per_job = Vec::new();
    let mut excluded = Vec::new();
    let (mut calls, mut degraded) = (0, 0);
    for pool in sorted {
        let exclude = |reason| Excluded {
            job_id: pool.job_id.clone(),
            reason,
        };
        if pool.num_positives() == 0 {
            excluded.push(exclude(ExcludeReason::NoPositives));
            continue;
        }
        let Some(r) = by_job.get(pool.job_id.as_str()) else {
            excluded.push(exclude(ExcludeReason::NotReranked));
            continue;
        };
        let perm = crate::corpus::Ordering::new(r.candidates.clone());
        if !perm.is_permutation_of(&pool.candidates) {
            return Err(EngineError::NotAPermutation(pool.job_id.clone()));
        }
        let (nb, rb) = at_cutoff(pool, &pool.candidates)?;
        let (na, ra) = at_cutoff(pool, &r.candidates)?;
        calls += r.calls;
        degraded += r.degraded_calls;
        per_job.push(JobRow {
            job_id: pool.job_id.clone(),
            ndcg10_before: nb,
            ndcg10_after: na,
            recall10_before: rb,
            recall10_after: ra,
            degraded_calls: r.degraded_calls,
        });
    }

    let mean = |f: fn(&JobRow) -> f64| match per_job.len() {
        0 => 0.0,
        n => per_job.iter().map(f).sum::<f64>() / n as f64,
    };
    let (nb, na) = (mean(|r| r.ndcg10_before), mean(|r| r.ndcg10_after));
    let (rb, ra) = (mean(|r| r.recall10_before), mean(|r| r.recall10_after));
    Ok(RerankReport {
        config: *cfg,
        macro_avg: MacroRow {
            jobs: per_job.len(),
            ndcg10_before: nb,
            ndcg10_after: na,
            recall10_before: rb,
            recall10_after: ra,
            average_before: (nb + rb) / 2.0,
            average_after: (na + ra) / 2.0,
            calls,
            degraded_calls: degraded,
        },
        per_job,
        excluded,
    })
}

/// Re-ranks the pools that have a positive and reports metrics before and
/// after.
pub fn evaluate_run(
    pools: &[RankedPool],
    docs: &Corpus,
    ranker: &dyn Ranker,
    cfg: &EngineConfig,
) -> Result<(RerankReport, Vec<RerankTrace>), EngineError> {
    let eligible: Vec<RankedPool> = pools
        .iter()
        .filter(|p| p.num_positives() > 0)
        .cloned()
        .collect();
    let traces = rerank_all(&eligible, docs, ranker, cfg)?;
    let reranked: Vec<RerankedPool> = traces.iter().map(RerankTrace::to_reranked).collect();
    Ok((build_report(pools, &reranked, cfg)?, traces))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub window_size: usize,
    pub stride: usize,
    pub iterations: usize,
    pub pool_size: usize,
    pub comparisons_per_iter: Option<usize>,
    pub ndcg10: Option<f64>,
    pub recall10: Option<f64>,
    pub average: Option<f64>,
    pub error: Option<String>,
}

/// Evaluates each grid point. Invalid points yield a row carrying the error
/// while the rest still run.
pub fn ablate(
    pools: &[RankedPool],
    docs: &Corpus,
    ranker: &dyn Ranker,
    grid: &[EngineConfig],
) -> Result<Vec<AblationRow>, EngineError> {
    let mut rows = Vec::with_capacity(grid.len());
    for cfg in grid {
        let mut row = AblationRow {
            window_size: cfg.window_size,
            stride: cfg.stride,
            iterations: cfg.iterations,
            pool_size: cfg.pool_size,
            comparisons_per_iter: None,
            ndcg10: None,
            recall10: None,
            average: None,
            error: None,
        };
        if let Err(e) = cfg.validate() {
            row.error = Some(e.to_string());
            rows.push(row);
            continue;
        }
        row.comparisons_per_iter = Some(cfg.comparisons_per_iter());
        match evaluate_run(pools, docs, ranker, cfg) {
            Ok((report, _)) => {
                row.ndcg10 = Some(report.macro_avg.ndcg10_after);
                row.recall10 = Some(report.macro_avg.recall10_after);
                row.average = Some(report.macro_avg.average_after);
            }
            Err(e @ EngineError::Ranker(RankerError::Config(_))) => return Err(e),
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocKind, Document, Label, LabelTable, PoolRecord};
    use crate::ranker::{IdentityRanker, NoisyRanker, OracleRanker, RankResponse};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn fixture(n: usize, positives: &[usize]) -> (RankedPool, Corpus, Arc<LabelTable>) {
        let mut docs = vec![Document::new("j", DocKind::Job, vec![])];
        docs.extend((1..=n).map(|i| Document::new(format!("r{i}"), DocKind::Resume, vec![])));
        let labels = LabelTable::from_labels(positives.iter().map(|&i| Label {
            job_id: "j".into(),
            resume_id: format!("r{i}"),
            y: 1,
        }))
        .unwrap();
        let pool = RankedPool::join(
            PoolRecord {
                job_id: "j".into(),
                candidates: (1..=n).map(|i| format!("r{i}")).collect(),
            },
            &labels,
        )
        .unwrap();
        (
            pool,
            Corpus::from_documents(docs).unwrap(),
            Arc::new(labels),
        )
    }

    #[test]
    fn schedule_for_default_config() {
        assert_eq!(window_starts(20, 4, 2), vec![17, 15, 13, 11, 9, 7, 5, 3, 1]);
        assert_eq!(window_starts(20, 4, 3), vec![17, 14, 11, 8, 5, 2, 1]);
        assert_eq!(window_starts(4, 4, 1), vec![1]);
    }

    #[test]
    fn comparisons_match_grid_column() {
        let expected = [19, 18, 10, 17, 9, 7];
        for (&(k, s), &c) in WINDOW_STRIDE_GRID.iter().zip(&expected) {
            assert_eq!(comparisons_per_iter(20, k, s), c);
            assert_eq!(window_starts(20, k, s).len(), c);
        }
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig::default().validate().is_ok());
        for (k, s, t) in [(4, 4, 1), (4, 0, 1), (21, 1, 1), (4, 2, 0)] {
            let cfg = EngineConfig {
                window_size: k,
                stride: s,
                iterations: t,
                pool_size: 20,
            };
            assert!(cfg.validate().is_err(), "{k} {s} {t}");
        }
    }

    #[test]
    fn identity_keeps_order() {
        let (pool, docs, _) = fixture(20, &[7]);
        let trace = rerank_pool(&pool, &docs, &IdentityRanker, &EngineConfig::default()).unwrap();
        assert_eq!(trace.final_ordering, pool.candidates);
        assert_eq!(trace.windows.len(), 18);
        assert_eq!(trace.windows_per_pass, 9);
    }

    #[test]
    fn oracle_lifts_bottom_positive_to_top() {
        let (pool, docs, labels) = fixture(20, &[20]);
        let cfg = EngineConfig {
            iterations: 1,
            ..Default::default()
        };
        let trace = rerank_pool(&pool, &docs, &OracleRanker::new(labels), &cfg).unwrap();
        assert_eq!(trace.final_ordering[0], "r20");
        let starts: Vec<usize> = trace.windows.iter().map(|w| w.start).collect();
        assert_eq!(starts, vec![17, 15, 13, 11, 9, 7, 5, 3, 1]);
    }

    #[test]
    fn bubble_up_exhaustive() {
        for k in 2..=4 {
            for s in 1..k {
                for pos in 1..=20 {
                    let (pool, docs, labels) = fixture(20, &[pos]);
                    let cfg = EngineConfig {
                        window_size: k,
                        stride: s,
                        iterations: 1,
                        pool_size: 20,
                    };
                    let t = rerank_pool(&pool, &docs, &OracleRanker::new(labels), &cfg).unwrap();
                    assert_eq!(
                        t.final_ordering[0],
                        format!("r{pos}"),
                        "k={k} s={s} pos={pos}"
                    );
                }
            }
        }
    }

    fn one_pass(pool: &RankedPool, docs: &Corpus, ranker: &dyn Ranker) -> Vec<String> {
        let cfg = EngineConfig {
            iterations: 1,
            ..Default::default()
        };
        rerank_pool(pool, docs, ranker, &cfg)
            .unwrap()
            .final_ordering
    }

    #[test]
    fn oracle_fixed_points() {
        for pos in [1, 8, 20] {
            let (pool, docs, labels) = fixture(20, &[pos]);
            let oracle = OracleRanker::new(labels);
            let first = one_pass(&pool, &docs, &oracle);
            let again = RankedPool {
                candidates: first.clone(),
                ..pool.clone()
            };
            assert_eq!(one_pass(&again, &docs, &oracle), first);
        }
        // several positives may need more passes, but once fixed stay fixed
        let (mut pool, docs, labels) = fixture(20, &[3, 12, 19]);
        let oracle = OracleRanker::new(labels);
        for _ in 0..20 {
            let next = one_pass(&pool, &docs, &oracle);
            if next == pool.candidates {
                break;
            }
            pool.candidates = next;
        }
        assert_eq!(one_pass(&pool, &docs, &oracle), pool.candidates);
        assert_eq!(&pool.candidates[..3], &["r3", "r12", "r19"]);
    }

    /// Answers with a slot order whose length need not match the window.
    struct Adversarial {
        raw: Vec<usize>,
    }

    impl Ranker for Adversarial {
        fn rank(&self, _: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
            let k = self.raw.len().max(1);
            let (order, _) = SlotOrder::repair(&self.raw, k);
            Ok(RankResponse::from_ordering(order))
        }
        fn name(&self) -> String {
            "adversarial".into()
        }
    }

    struct Erroring(RankerError);

    impl Ranker for Erroring {
        fn rank(&self, _: &RankRequest<'_>) -> Result<RankResponse, RankerError> {
            Err(self.0.clone())
        }
        fn name(&self) -> String {
            "erroring".into()
        }
    }

    #[test]
    fn ranker_errors() {
        let (pool, docs, _) = fixture(20, &[1]);
        let cfg = EngineConfig::default();
        let t = rerank_pool(
            &pool,
            &docs,
            &Erroring(RankerError::Transport("down".into())),
            &cfg,
        )
        .unwrap();
        assert_eq!(t.degraded_calls(), 18);
        assert_eq!(t.final_ordering, pool.candidates);
        assert!(matches!(
            rerank_pool(
                &pool,
                &docs,
                &Erroring(RankerError::Config("bad key".into())),
                &cfg
            ),
            Err(EngineError::Ranker(RankerError::Config(_)))
        ));
    }

    proptest! {
        #[test]
        fn permutation_preserved_under_any_output(
            raw in proptest::collection::vec(0usize..8, 0..8),
            k in 2usize..=5,
            s_off in 0usize..4,
        ) {
            let s = 1 + s_off % (k - 1);
            let (pool, docs, _) = fixture(20, &[2]);
            let cfg = EngineConfig { window_size: k, stride: s, iterations: 2, pool_size: 20 };
            let t = rerank_pool(&pool, &docs, &Adversarial { raw }, &cfg).unwrap();
            let ord = crate::corpus::Ordering::new(t.final_ordering.clone());
            prop_assert!(ord.is_permutation_of(&pool.candidates));
            prop_assert_eq!(t.windows_per_pass, comparisons_per_iter(20, k, s));
        }
    }

    #[test]
    fn report_oracle_and_identity() {
        let (pool, docs, labels) = fixture(20, &[5, 15]);
        let (mut empty, _, _) = fixture(20, &[]);
        empty.job_id = "j0".into();
        let pools = vec![pool.clone(), empty];
        let cfg = EngineConfig::default();
        let (rep, _) = evaluate_run(&pools, &docs, &OracleRanker::new(labels), &cfg).unwrap();
        assert_eq!(rep.macro_avg.ndcg10_after, 1.0);
        assert_eq!(rep.macro_avg.recall10_after, 1.0);
        assert_eq!(
            rep.excluded,
            vec![Excluded {
                job_id: "j0".into(),
                reason: ExcludeReason::NoPositives
            }]
        );

        let (rep, _) = evaluate_run(&pools, &docs, &IdentityRanker, &cfg).unwrap();
        assert_eq!(rep.macro_avg.ndcg10_before, rep.macro_avg.ndcg10_after);
        assert_eq!(rep.macro_avg.recall10_before, 0.5);
        assert!(!rep.degraded());
    }

    #[test]
    fn noisier_ranker_scores_lower() {
        let mut pools = Vec::new();
        let mut docs = vec![];
        let mut labels = Vec::new();
        for j in 0..200 {
            let job = format!("j{j}");
            docs.push(Document::new(job.clone(), DocKind::Job, vec![]));
            let cands: Vec<String> = (0..20).map(|i| format!("{job}r{i}")).collect();
            for c in &cands {
                docs.push(Document::new(c.clone(), DocKind::Resume, vec![]));
            }
            let gold = cands[(j * 7) % 20].clone();
            labels.push(Label {
                job_id: job.clone(),
                resume_id: gold,
                y: 1,
            });
            pools.push((job, cands));
        }
        let table = Arc::new(LabelTable::from_labels(labels).unwrap());
        let pools: Vec<RankedPool> = pools
            .into_iter()
            .map(|(job_id, candidates)| {
                RankedPool::join(PoolRecord { job_id, candidates }, &table).unwrap()
            })
            .collect();
        let docs = Corpus::from_documents(docs).unwrap();
        let cfg = EngineConfig::default();
        let clean = NoisyRanker::new(table.clone(), 0.0, 1).unwrap();
        let noisy = NoisyRanker::new(table, 0.5, 1).unwrap();
        let a = evaluate_run(&pools, &docs, &clean, &cfg)
            .unwrap()
            .0
            .macro_avg
            .average_after;
        let b = evaluate_run(&pools, &docs, &noisy, &cfg)
            .unwrap()
            .0
            .macro_avg
            .average_after;
        assert!(b < a, "{b} !< {a}");
    }

    #[test]
    fn ablate_rejects_bad_points_only() {
        let (pool, docs, labels) = fixture(20, &[11]);
        let mut grid: Vec<EngineConfig> = WINDOW_STRIDE_GRID
            .iter()
            .map(|&(k, s)| EngineConfig {
                window_size: k,
                stride: s,
                iterations: 1,
                pool_size: 20,
            })
            .collect();
        grid.push(EngineConfig {
            window_size: 4,
            stride: 4,
            iterations: 1,
            pool_size: 20,
        });
        let rows = ablate(&[pool], &docs, &OracleRanker::new(labels), &grid).unwrap();
        let comps: Vec<Option<usize>> = rows.iter().map(|r| r.comparisons_per_iter).collect();
        assert_eq!(
            comps,
            vec![
                Some(19),
                Some(18),
                Some(10),
                Some(17),
                Some(9),
                Some(7),
                None
            ]
        );
        assert!(rows[6].error.is_some());
        assert!(rows[..6].iter().all(|r| r.ndcg10 == Some(1.0)));
    }

    #[test]
    fn report_rejects_foreign_candidates() {
        let (pool, _, _) = fixture(20, &[1]);
        let mut bad: Vec<String> = pool.candidates.clone();
        bad[3] = "zzz".into();
        let r = RerankedPool {
            job_id: "j".into(),
            candidates: bad,
            calls: 0,
            degraded_calls: 0,
        };
        assert!(matches!(
            build_report(&[pool], &[r], &EngineConfig::default()),
            Err(EngineError::NotAPermutation(_))
        ));
    }
}
