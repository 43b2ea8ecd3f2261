//! Training-window construction from binary-labeled retrieval pools.
//!
//! For each job the top-N pool is split into positives (accepted) and
//! negatives (everything else, unlabeled included). Each positive is paired
//! `n_rep` times with `neg_per_window` negatives drawn uniformly without
//! replacement; windows whose unordered id set repeats an earlier window of
//! the same job are discarded, and the presentation order is shuffled.
//!
//! Windows are then annotated with an empirical difficulty `r_bar` (share of
//! sampled ranker runs that put the gold candidate first) and filtered by one
//! of the data strategies in [`Strategy`].

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Document, RankedPool};
use crate::io::{read_jsonl, write_jsonl, JsonlError};
use crate::ranker::{
    build_prompt, parse_answer, Judge, RankRequest, Ranker, RankerError, SamplingParams,
};
use crate::seed::rng_for;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error("window {0} has no difficulty annotation; run annotate first")]
    MissingDifficulty(String),
    #[error("strategy llm_filter needs a judge")]
    MissingJudge,
    #[error("document {0:?} not found in corpus")]
    UnknownDocument(String),
    #[error("invalid window {window_id}: {message}")]
    InvalidWindow { window_id: String, message: String },
    #[error(transparent)]
    Ranker(#[from] RankerError),
    #[error(transparent)]
    Io(#[from] JsonlError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub window_size: usize,
    pub neg_per_window: usize,
    pub n_rep: usize,
    /// Jobs with at least this many positives are skipped.
    pub m_max: usize,
    pub min_pool: usize,
    pub annotate_trials: usize,
    /// Windows with `r_bar` below this are "hard".
    pub hard_threshold: f64,
    /// Share of hard windows kept by `subsample_hard`.
    pub subsample_ratio: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_size: 4,
            neg_per_window: 3,
            n_rep: 3,
            m_max: 11,
            min_pool: 20,
            annotate_trials: 5,
            hard_threshold: 0.4,
            subsample_ratio: 0.5,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::InvalidConfig(m.to_string()));
        if self.window_size < 2 {
            return bad("window_size must be at least 2");
        }
        if self.neg_per_window + 1 != self.window_size {
            return bad("neg_per_window must equal window_size - 1");
        }
        if self.n_rep == 0 || self.m_max == 0 || self.min_pool == 0 || self.annotate_trials == 0 {
            return bad("n_rep, m_max, min_pool and annotate_trials must be positive");
        }
        if !(0.0..=1.0).contains(&self.hard_threshold) {
            return bad("hard_threshold must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.subsample_ratio) {
            return bad("subsample_ratio must be in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    PoolTooSmall,
    NoPositive,
    TooManyPositives,
    TooFewNegatives,
}

impl SkipReason {
    pub const ALL: [SkipReason; 4] = [
        SkipReason::PoolTooSmall,
        SkipReason::NoPositive,
        SkipReason::TooManyPositives,
        SkipReason::TooFewNegatives,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::PoolTooSmall => "pool_too_small",
            SkipReason::NoPositive => "no_positive",
            SkipReason::TooManyPositives => "too_many_positives",
            SkipReason::TooFewNegatives => "too_few_negatives",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Partition {
    Kept {
        positives: Vec<String>,
        negatives: Vec<String>,
    },
    Skip(SkipReason),
}

/// Splits a pool into positives and negatives, or reports the first skip
/// filter it trips (checked in the order of [`SkipReason`]).
pub fn partition_pool(pool: &RankedPool, cfg: &PipelineConfig) -> Partition {
    let (positives, negatives): (Vec<String>, Vec<String>) = pool
        .candidates
        .iter()
        .cloned()
        .partition(|id| pool.is_positive(id));
    if pool.candidates.len() < cfg.min_pool {
        Partition::Skip(SkipReason::PoolTooSmall)
    } else if positives.is_empty() {
        Partition::Skip(SkipReason::NoPositive)
    } else if positives.len() >= cfg.m_max {
        Partition::Skip(SkipReason::TooManyPositives)
    } else if negatives.len() < cfg.neg_per_window {
        Partition::Skip(SkipReason::TooFewNegatives)
    } else {
        Partition::Kept {
            positives,
            negatives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub window_id: String,
    pub job_id: String,
    /// Gold first, then the sampled negatives.
    pub candidates: Vec<String>,
    pub gold: String,
    /// `presented_order[i]` is the 1-based index into `candidates` shown in
    /// prompt slot `i + 1`.
    pub presented_order: Vec<usize>,
    pub r_bar: Option<f64>,
    pub hint: Option<String>,
}

impl Window {
    pub fn k(&self) -> usize {
        self.candidates.len()
    }

    /// Candidate ids in presentation-slot order.
    pub fn presented(&self) -> Vec<&str> {
        self.presented_order
            .iter()
            .map(|&i| self.candidates[i - 1].as_str())
            .collect()
    }

    /// 1-based presentation slot of the gold candidate.
    pub fn gold_slot(&self) -> usize {
        self.presented()
            .iter()
            .position(|&id| id == self.gold)
            .expect("gold is one of the candidates")
            + 1
    }

    pub fn id_set(&self) -> BTreeSet<&str> {
        self.candidates.iter().map(String::as_str).collect()
    }

    /// `None` when not yet annotated.
    pub fn is_hard(&self, threshold: f64) -> Option<bool> {
        self.r_bar.map(|r| r < threshold)
    }

    /// Structural checks: distinct candidates, gold present exactly once,
    /// presented order a permutation of `1..=k`.
    pub fn check_structure(&self) -> Result<(), PipelineError> {
        let fail = |m: String| {
            Err(PipelineError::InvalidWindow {
                window_id: self.window_id.clone(),
                message: m,
            })
        };
        let k = self.k();
        if k < 2 {
            return fail(format!("needs at least 2 candidates, has {k}"));
        }
        if self.id_set().len() != k {
            return fail("duplicate candidate ids".into());
        }
        if self.candidates.iter().filter(|c| **c == self.gold).count() != 1 {
            return fail("gold must appear exactly once among candidates".into());
        }
        let mut seen = vec![false; k + 1];
        if self.presented_order.len() != k
            || self
                .presented_order
                .iter()
                .any(|&i| i == 0 || i > k || std::mem::replace(&mut seen[i], true))
        {
            return fail(format!(
                "presented_order {:?} is not a permutation of 1..={k}",
                self.presented_order
            ));
        }
        if let Some(r) = self.r_bar {
            if !(0.0..=1.0).contains(&r) {
                return fail(format!("r_bar {r} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Structure plus label checks against the source pool.
    pub fn check_against(&self, pool: &RankedPool) -> Result<(), PipelineError> {
        self.check_structure()?;
        let fail = |m: String| {
            Err(PipelineError::InvalidWindow {
                window_id: self.window_id.clone(),
                message: m,
            })
        };
        if pool.job_id != self.job_id {
            return fail(format!(
                "pool is for job {}, window for {}",
                pool.job_id, self.job_id
            ));
        }
        for c in &self.candidates {
            if !pool.candidates.contains(c) {
                return fail(format!("{c} is not in the job's pool"));
            }
            if (c == &self.gold) != pool.is_positive(c) {
                return fail(format!("label of {c} contradicts its role in the window"));
            }
        }
        Ok(())
    }
}

/// Builds windows for one kept job. Deterministic given the rng state.
pub fn build_windows(
    job_id: &str,
    positives: &[String],
    negatives: &[String],
    cfg: &PipelineConfig,
    rng: &mut impl Rng,
) -> Vec<Window> {
    let mut seen: HashSet<BTreeSet<String>> = HashSet::new();
    let mut windows = Vec::new();
    for gold in positives {
        for _ in 0..cfg.n_rep {
            let mut drawn: Vec<usize> =
                index::sample(rng, negatives.len(), cfg.neg_per_window).into_vec();
            drawn.sort_unstable();
            let mut candidates = Vec::with_capacity(cfg.window_size);
            candidates.push(gold.clone());
            candidates.extend(drawn.iter().map(|&i| negatives[i].clone()));
            let key: BTreeSet<String> = candidates.iter().cloned().collect();
            if !seen.insert(key) {
                continue;
            }
            let mut presented_order: Vec<usize> = (1..=candidates.len()).collect();
            presented_order.shuffle(rng);
            windows.push(Window {
                window_id: format!("{job_id}#{}", windows.len()),
                job_id: job_id.to_string(),
                gold: gold.clone(),
                candidates,
                presented_order,
                r_bar: None,
                hint: None,
            });
        }
    }
    windows
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildReport {
    pub windows: Vec<Window>,
    pub kept_jobs: usize,
    /// (job_id, reason) in pool order.
    pub skipped: Vec<(String, SkipReason)>,
}

impl BuildReport {
    pub fn skip_count(&self, reason: SkipReason) -> usize {
        self.skipped.iter().filter(|(_, r)| *r == reason).count()
    }
}

/// Partitions every pool and builds windows per kept job. Jobs run in
/// parallel, each with its own generator derived from `(cfg.seed, job_id)`.
pub fn build_all(pools: &[RankedPool], cfg: &PipelineConfig) -> Result<BuildReport, PipelineError> {
    cfg.validate()?;
    let per_job: Vec<Result<Vec<Window>, SkipReason>> = pools
        .par_iter()
        .map(|pool| match partition_pool(pool, cfg) {
            Partition::Skip(r) => Err(r),
            Partition::Kept {
                positives,
                negatives,
            } => {
                let mut rng = rng_for(cfg.seed, &format!("build/{}", pool.job_id));
                Ok(build_windows(
                    &pool.job_id,
                    &positives,
                    &negatives,
                    cfg,
                    &mut rng,
                ))
            }
        })
        .collect();
    let mut report = BuildReport::default();
    for (pool, outcome) in pools.iter().zip(per_job) {
        match outcome {
            Ok(w) => {
                report.kept_jobs += 1;
                report.windows.extend(w);
            }
            Err(r) => report.skipped.push((pool.job_id.clone(), r)),
        }
    }
    Ok(report)
}

fn lookup<'a>(docs: &'a Corpus, id: &str) -> Result<&'a Document, PipelineError> {
    docs.get(id)
        .ok_or_else(|| PipelineError::UnknownDocument(id.to_string()))
}

/// Ranker request for a window in its presentation order. `docs` must hold
/// both the job and its resumes.
pub fn window_request<'a>(
    window: &Window,
    docs: &'a Corpus,
    request_id: String,
) -> Result<RankRequest<'a>, PipelineError> {
    let job = lookup(docs, &window.job_id)?;
    let candidates = window
        .presented()
        .into_iter()
        .map(|id| lookup(docs, id))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RankRequest::new(request_id, job, candidates)?)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationReport {
    pub annotated: usize,
    /// Windows left without `r_bar` because a trial failed.
    pub failed: Vec<String>,
}

/// Sets `r_bar` on every window to the share of `cfg.annotate_trials`
/// independent ranker calls that put the gold candidate first. A window with
/// any degraded trial is left unannotated and reported.
pub fn annotate_difficulty(
    windows: &mut [Window],
    docs: &Corpus,
    ranker: &dyn Ranker,
    cfg: &PipelineConfig,
) -> Result<AnnotationReport, PipelineError> {
    cfg.validate()?;
    let results: Vec<Result<Option<f64>, PipelineError>> = windows
        .par_iter()
        .map(|w| {
            let gold_slot = w.gold_slot();
            let mut hits = 0usize;
            for trial in 0..cfg.annotate_trials {
                let req = window_request(w, docs, format!("{}/trial{trial}", w.window_id))?
                    .with_sampling(SamplingParams::annotation());
                let resp = ranker.rank(&req)?;
                if resp.degraded {
                    return Ok(None);
                }
                if resp.ordering.first() == Some(gold_slot) {
                    hits += 1;
                }
            }
            Ok(Some(hits as f64 / cfg.annotate_trials as f64))
        })
        .collect();
    let mut report = AnnotationReport::default();
    for (w, r) in windows.iter_mut().zip(results) {
        w.r_bar = r?;
        match w.r_bar {
            Some(_) => report.annotated += 1,
            None => report.failed.push(w.window_id.clone()),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    All,
    RemoveHard,
    SubsampleHard,
    HintAugment,
    LlmFilter,
}

impl Strategy {
    fn needs_difficulty(self) -> bool {
        matches!(
            self,
            Strategy::RemoveHard | Strategy::SubsampleHard | Strategy::HintAugment
        )
    }
}

pub fn hint_for(window: &Window) -> String {
    format!("The accepted candidate is [{}]", window.gold_slot())
}

/// Applies a data strategy. Output keeps input order.
///
/// `judge` (with the corpus it reads documents from) is only consulted by
/// [`Strategy::LlmFilter`].
pub fn apply_strategy(
    windows: Vec<Window>,
    strategy: Strategy,
    cfg: &PipelineConfig,
    judge: Option<(&dyn Judge, &Corpus)>,
) -> Result<Vec<Window>, PipelineError> {
    if strategy.needs_difficulty() {
        if let Some(w) = windows.iter().find(|w| w.r_bar.is_none()) {
            return Err(PipelineError::MissingDifficulty(w.window_id.clone()));
        }
    }
    let hard = |w: &Window| w.is_hard(cfg.hard_threshold).unwrap_or(false);
    match strategy {
        Strategy::All => Ok(windows),
        Strategy::RemoveHard => Ok(windows.into_iter().filter(|w| !hard(w)).collect()),
        Strategy::SubsampleHard => {
            let hard_idx: Vec<usize> = (0..windows.len()).filter(|&i| hard(&windows[i])).collect();
            let keep_n = (cfg.subsample_ratio * hard_idx.len() as f64).round() as usize;
            let mut rng = rng_for(cfg.seed, "subsample_hard");
            let keep: HashSet<usize> = index::sample(&mut rng, hard_idx.len(), keep_n)
                .into_iter()
                .map(|i| hard_idx[i])
                .collect();
            Ok(windows
                .into_iter()
                .enumerate()
                .filter(|(i, w)| !hard(w) || keep.contains(i))
                .map(|(_, w)| w)
                .collect())
        }
        Strategy::HintAugment => Ok(windows
            .into_iter()
            .map(|mut w| {
                if hard(&w) {
                    w.hint = Some(hint_for(&w));
                }
                w
            })
            .collect()),
        Strategy::LlmFilter => {
            let (judge, docs) = judge.ok_or(PipelineError::MissingJudge)?;
            let verdicts: Vec<Result<bool, PipelineError>> = windows
                .par_iter()
                .map(|w| {
                    let req = window_request(w, docs, format!("{}/judge", w.window_id))?;
                    Ok(judge.approve(&req, w.gold_slot())?)
                })
                .collect();
            let mut out = Vec::new();
            for (w, v) in windows.into_iter().zip(verdicts) {
                if v? {
                    out.push(w);
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub window_id: String,
    pub prompt: String,
    pub completion: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistillReport {
    pub records: Vec<SftRecord>,
    /// Parsed cleanly but the gold candidate was not ranked first.
    pub dropped_wrong: usize,
    /// No answer block, or an answer that needed repair.
    pub dropped_malformed: usize,
    /// Teacher call failed outright.
    pub dropped_degraded: usize,
}

impl DistillReport {
    pub fn total(&self) -> usize {
        self.records.len() + self.dropped_wrong + self.dropped_malformed + self.dropped_degraded
    }

    pub fn keep_rate(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.records.len() as f64 / n as f64,
        }
    }
}

enum Distilled {
    Keep(SftRecord),
    Wrong,
    Malformed,
    Degraded,
}

/// Queries the teacher once per window and keeps its verbatim output only
/// when the parsed answer ranks the gold candidate first.
pub fn distill_sft(
    windows: &[Window],
    docs: &Corpus,
    teacher: &dyn Ranker,
) -> Result<DistillReport, PipelineError> {
    let outcomes: Vec<Result<Distilled, PipelineError>> = windows
        .par_iter()
        .map(|w| {
            let req = window_request(w, docs, format!("{}/distill", w.window_id))?
                .with_hint(w.hint.clone());
            let resp = teacher.rank(&req)?;
            if resp.degraded {
                return Ok(Distilled::Degraded);
            }
            let parsed = match parse_answer(&resp.raw_text, w.k()) {
                Ok(p) if !p.repaired => p,
                _ => return Ok(Distilled::Malformed),
            };
            if parsed.ordering.first() != Some(w.gold_slot()) {
                return Ok(Distilled::Wrong);
            }
            let prompt = build_prompt(&req);
            Ok(Distilled::Keep(SftRecord {
                window_id: w.window_id.clone(),
                prompt: format!("{}\n\n{}", prompt.system, prompt.user),
                completion: resp.raw_text,
            }))
        })
        .collect();
    let mut report = DistillReport::default();
    for o in outcomes {
        match o? {
            Distilled::Keep(r) => report.records.push(r),
            Distilled::Wrong => report.dropped_wrong += 1,
            Distilled::Malformed => report.dropped_malformed += 1,
            Distilled::Degraded => report.dropped_degraded += 1,
        }
    }
    Ok(report)
}

pub fn load_windows(path: &Path) -> Result<Vec<Window>, PipelineError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (line, w) in read_jsonl::<Window>(path)? {
        w.check_structure()
            .map_err(|e| PipelineError::InvalidWindow {
                window_id: w.window_id.clone(),
                message: format!("line {line}: {e}"),
            })?;
        if !ids.insert(w.window_id.clone()) {
            return Err(PipelineError::InvalidWindow {
                window_id: w.window_id,
                message: format!("line {line}: duplicate window_id"),
            });
        }
        out.push(w);
    }
    Ok(out)
}

pub fn write_windows(path: &Path, windows: &[Window]) -> Result<(), PipelineError> {
    Ok(write_jsonl(path, windows)?)
}

pub fn write_sft(path: &Path, records: &[SftRecord]) -> Result<(), PipelineError> {
    Ok(write_jsonl(path, records)?)
}
