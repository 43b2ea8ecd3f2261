use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use jobfit_core::corpus::{
    load_corpus, load_labels, load_pools, write_corpus, write_labels, write_pools, Corpus, DocKind,
    LabelTable, RankedPool,
};
use jobfit_core::engine::{self, EngineConfig, RerankedPool, WINDOW_STRIDE_GRID};
use jobfit_core::grpo::{
    self, sim_window, synthetic_feature_names, synthetic_task, text_feature_names, text_features,
    write_curve, PLPolicy, TaskKind,
};
use jobfit_core::io::{read_jsonl, write_jsonl};
use jobfit_core::pipeline::{
    annotate_difficulty, apply_strategy, build_all, distill_sft, load_windows, write_sft,
    write_windows, SkipReason, Strategy,
};
use jobfit_core::ranker::{
    ChatJudge, IdentityRanker, Judge, LlmRanker, NoisyRanker, OracleRanker, Ranker, RankerJudge,
};
use jobfit_core::seed::derive_seed;
use jobfit_core::synthetic::generate;
use serde::Serialize;
use tracing::warn;

use crate::artifacts::{write_json, write_sidecar, Provenance};
use crate::config::{require_file, RankerSpec, RunConfig};
use crate::Status;

fn load_label_table(cfg: &RunConfig) -> Result<Arc<LabelTable>> {
    require_file("labels", &cfg.paths.labels)?;
    Ok(Arc::new(load_labels(&cfg.paths.labels)?))
}

fn load_all_documents(cfg: &RunConfig) -> Result<Corpus> {
    require_file("corpus", &cfg.paths.corpus)?;
    Ok(load_corpus(&cfg.paths.corpus, None)?)
}

fn resumes_of(corpus: &Corpus) -> Result<Corpus> {
    Ok(Corpus::from_documents(
        corpus
            .iter()
            .filter(|d| d.kind == DocKind::Resume)
            .cloned()
            .collect(),
    )?)
}

struct Data {
    corpus: Corpus,
    labels: Arc<LabelTable>,
    pools: Vec<RankedPool>,
}

fn load_data(cfg: &RunConfig) -> Result<Data> {
    let labels = load_label_table(cfg)?;
    require_file("pools", &cfg.paths.pools)?;
    let corpus = load_all_documents(cfg)?;
    let pools = load_pools(&cfg.paths.pools, &labels, &resumes_of(&corpus)?)?;
    Ok(Data {
        corpus,
        labels,
        pools,
    })
}

fn make_ranker(cfg: &RunConfig, labels: Option<Arc<LabelTable>>) -> Result<Box<dyn Ranker>> {
    let labels = |cfg: &RunConfig| match &labels {
        Some(l) => Ok(l.clone()),
        None => load_label_table(cfg),
    };
    Ok(match &cfg.ranker {
        RankerSpec::Oracle => Box::new(OracleRanker::new(labels(cfg)?)),
        RankerSpec::Identity => Box::new(IdentityRanker),
        RankerSpec::Noisy { p_flip } => {
            Box::new(NoisyRanker::new(labels(cfg)?, *p_flip, cfg.seed)?)
        }
        RankerSpec::Endpoint(e) => Box::new(LlmRanker::new(e.clone())?),
    })
}

fn write_jsonl_artifact<T: Serialize>(path: &Path, prov: &Provenance, records: &[T]) -> Result<()> {
    write_jsonl(path, records)?;
    write_sidecar(path, prov)
}

pub fn gen_synthetic(cfg: &RunConfig, n_jobs: Option<usize>) -> Result<Status> {
    let mut syn = cfg.synthetic.clone();
    if let Some(n) = n_jobs {
        syn.jobs = n;
        syn.plans = None;
    }
    let data = generate(&syn).map_err(|e| anyhow!("config error: {e}"))?;
    let prov = Provenance::new("gen-synthetic", cfg);
    let paths = &cfg.paths;
    write_corpus(&paths.corpus, data.documents())?;
    write_labels(&paths.labels, &data.labels)?;
    write_pools(&paths.pools, &data.pools)?;
    for p in [&paths.corpus, &paths.labels, &paths.pools] {
        write_sidecar(p, &prov)?;
    }
    println!(
        "jobs: {}  resumes: {}  labels: {}",
        data.jobs.len(),
        data.resumes.len(),
        data.labels.len()
    );
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct BuildSummary<'a> {
    kept_jobs: usize,
    skipped_jobs: usize,
    skipped_by_reason: BTreeMap<&'static str, usize>,
    skipped: Vec<(&'a str, &'static str)>,
    windows: usize,
}

pub fn build_windows(cfg: &RunConfig, output: Option<PathBuf>) -> Result<Status> {
    let data = load_data(cfg)?;
    let report = build_all(&data.pools, &cfg.pipeline)?;
    let out = output.unwrap_or_else(|| cfg.out("windows.jsonl"));
    let prov = Provenance::new("build-windows", cfg);
    write_windows(&out, &report.windows)?;
    write_sidecar(&out, &prov)?;
    let summary = BuildSummary {
        kept_jobs: report.kept_jobs,
        skipped_jobs: report.skipped.len(),
        skipped_by_reason: SkipReason::ALL
            .iter()
            .map(|&r| (r.as_str(), report.skip_count(r)))
            .collect(),
        skipped: report
            .skipped
            .iter()
            .map(|(j, r)| (j.as_str(), r.as_str()))
            .collect(),
        windows: report.windows.len(),
    };
    write_json(&cfg.out("build_report.json"), &prov, &summary)?;
    println!("jobs kept: {}", summary.kept_jobs);
    for (reason, n) in &summary.skipped_by_reason {
        println!("jobs skipped ({reason}): {n}");
    }
    println!("windows: {}", summary.windows);
    Ok(Status::Ok)
}

pub fn annotate(
    cfg: &RunConfig,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<Status> {
    let input = input.unwrap_or_else(|| cfg.out("windows.jsonl"));
    require_file("windows", &input)?;
    let mut windows = load_windows(&input)?;
    let corpus = load_all_documents(cfg)?;
    let ranker = make_ranker(cfg, None)?;
    let report = annotate_difficulty(&mut windows, &corpus, ranker.as_ref(), &cfg.pipeline)?;
    let out = output.unwrap_or_else(|| cfg.out("windows.annotated.jsonl"));
    write_windows(&out, &windows)?;
    write_sidecar(&out, &Provenance::new("annotate", cfg))?;
    let hard = windows
        .iter()
        .filter(|w| w.is_hard(cfg.pipeline.hard_threshold) == Some(true))
        .count();
    println!(
        "annotated: {}  hard: {hard}  failed: {}",
        report.annotated,
        report.failed.len()
    );
    if report.failed.is_empty() {
        Ok(Status::Ok)
    } else {
        warn!(
            failed = report.failed.len(),
            "windows left unannotated after degraded ranker calls"
        );
        Ok(Status::Degraded)
    }
}

fn strategy_name(s: Strategy) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn filter(
    cfg: &RunConfig,
    strategy: Strategy,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<Status> {
    let input = input.unwrap_or_else(|| cfg.out("windows.annotated.jsonl"));
    require_file("windows", &input)?;
    let windows = load_windows(&input)?;
    let before = windows.len();
    let kept = if strategy == Strategy::LlmFilter {
        let corpus = load_all_documents(cfg)?;
        let judge: Box<dyn Judge> = match &cfg.ranker {
            RankerSpec::Endpoint(e) => Box::new(ChatJudge::new(e.clone())?),
            _ => Box::new(RankerJudge::new(make_ranker(cfg, None)?)),
        };
        apply_strategy(
            windows,
            strategy,
            &cfg.pipeline,
            Some((judge.as_ref(), &corpus)),
        )?
    } else {
        apply_strategy(windows, strategy, &cfg.pipeline, None)?
    };
    let name = strategy_name(strategy);
    let out = output.unwrap_or_else(|| cfg.out(&format!("windows.{name}.jsonl")));
    write_windows(&out, &kept)?;
    write_sidecar(&out, &Provenance::new("filter", cfg))?;
    println!("{name}: kept {} of {before} windows", kept.len());
    Ok(Status::Ok)
}

pub fn rerank(cfg: &RunConfig, trace: bool) -> Result<Status> {
    let data = load_data(cfg)?;
    let ranker = make_ranker(cfg, Some(data.labels.clone()))?;
    let (eligible, short): (Vec<RankedPool>, Vec<RankedPool>) = data
        .pools
        .into_iter()
        .partition(|p| p.candidates.len() >= cfg.engine.window_size);
    for p in &short {
        warn!(job_id = %p.job_id, len = p.candidates.len(), "pool shorter than the window, not re-ranked");
    }
    let traces = engine::rerank_all(&eligible, &data.corpus, ranker.as_ref(), &cfg.engine)?;
    let reranked: Vec<RerankedPool> = traces.iter().map(|t| t.to_reranked()).collect();
    let prov = Provenance::new("rerank", cfg);
    write_jsonl_artifact(&cfg.out("reranked.jsonl"), &prov, &reranked)?;
    if trace {
        write_jsonl_artifact(&cfg.out("rerank_trace.jsonl"), &prov, &traces)?;
    }
    let calls: usize = reranked.iter().map(|r| r.calls).sum();
    let degraded: usize = reranked.iter().map(|r| r.degraded_calls).sum();
    println!(
        "pools: {}  ranker calls: {calls}  degraded: {degraded}",
        reranked.len()
    );
    Ok(if degraded > 0 {
        Status::Degraded
    } else {
        Status::Ok
    })
}

pub fn evaluate(cfg: &RunConfig, reranked: Option<PathBuf>) -> Result<Status> {
    let data = load_data(cfg)?;
    let path = reranked.unwrap_or_else(|| cfg.out("reranked.jsonl"));
    require_file("reranked", &path)?;
    let reranked: Vec<RerankedPool> = read_jsonl(&path)?.into_iter().map(|(_, r)| r).collect();
    let report = engine::build_report(&data.pools, &reranked, &cfg.engine)?;
    write_json(
        &cfg.out("rerank_report.json"),
        &Provenance::new("evaluate", cfg),
        &report,
    )?;
    let m = &report.macro_avg;
    println!("jobs: {}  excluded: {}", m.jobs, report.excluded.len());
    println!("{:<10} {:>8} {:>8}", "", "before", "after");
    println!(
        "{:<10} {:>8.4} {:>8.4}",
        "nDCG@10", m.ndcg10_before, m.ndcg10_after
    );
    println!(
        "{:<10} {:>8.4} {:>8.4}",
        "Recall@10", m.recall10_before, m.recall10_after
    );
    println!(
        "{:<10} {:>8.4} {:>8.4}",
        "Average", m.average_before, m.average_after
    );
    Ok(if report.degraded() {
        Status::Degraded
    } else {
        Status::Ok
    })
}

fn parse_grid(grid: &[String], base: &EngineConfig) -> Result<Vec<EngineConfig>> {
    if grid.is_empty() {
        return Ok(WINDOW_STRIDE_GRID
            .iter()
            .map(|&(window_size, stride)| EngineConfig {
                window_size,
                stride,
                ..*base
            })
            .collect());
    }
    grid.iter()
        .map(|item| {
            let (k, s) = item
                .split_once(':')
                .ok_or_else(|| anyhow!("config error: grid item {item:?} is not window:stride"))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .with_context(|| format!("config error: grid item {item:?}"))
            };
            Ok(EngineConfig {
                window_size: parse(k)?,
                stride: parse(s)?,
                ..*base
            })
        })
        .collect()
}

#[derive(Serialize)]
struct AblationTable<'a> {
    rows: &'a [engine::AblationRow],
}

pub fn ablate(cfg: &RunConfig, grid: &[String]) -> Result<Status> {
    let grid = parse_grid(grid, &cfg.engine)?;
    let data = load_data(cfg)?;
    let ranker = make_ranker(cfg, Some(data.labels.clone()))?;
    let rows = engine::ablate(&data.pools, &data.corpus, ranker.as_ref(), &grid)?;
    write_json(
        &cfg.out("ablation.json"),
        &Provenance::new("ablate", cfg),
        &AblationTable { rows: &rows },
    )?;
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    println!(
        "{:>3} {:>3} {:>11} {:>8} {:>10} {:>8}",
        "k", "s", "comp./iter", "nDCG@10", "Recall@10", "Avg"
    );
    for r in &rows {
        match &r.error {
            Some(e) => println!("{:>3} {:>3} error: {e}", r.window_size, r.stride),
            None => println!(
                "{:>3} {:>3} {:>11} {:>8} {:>10} {:>8}",
                r.window_size,
                r.stride,
                r.comparisons_per_iter.map_or("-".into(), |c| c.to_string()),
                cell(r.ndcg10),
                cell(r.recall10),
                cell(r.average)
            ),
        }
    }
    Ok(Status::Ok)
}

pub fn distill(cfg: &RunConfig, input: Option<PathBuf>, output: Option<PathBuf>) -> Result<Status> {
    let input = input.unwrap_or_else(|| cfg.out("windows.jsonl"));
    require_file("windows", &input)?;
    let windows = load_windows(&input)?;
    let corpus = load_all_documents(cfg)?;
    let teacher = make_ranker(cfg, None)?;
    let report = distill_sft(&windows, &corpus, teacher.as_ref())?;
    let out = output.unwrap_or_else(|| cfg.out("sft.jsonl"));
    write_sft(&out, &report.records)?;
    write_sidecar(&out, &Provenance::new("distill", cfg))?;
    println!(
        "kept: {}  wrong: {}  malformed: {}  degraded: {}  keep rate: {:.4}",
        report.records.len(),
        report.dropped_wrong,
        report.dropped_malformed,
        report.dropped_degraded,
        report.keep_rate()
    );
    Ok(if report.dropped_degraded > 0 {
        Status::Degraded
    } else {
        Status::Ok
    })
}

pub enum GrpoTask {
    Synthetic(TaskKind),
    Windows(PathBuf),
}

#[derive(Serialize)]
struct GrpoSummary {
    task: String,
    train_windows: usize,
    eval_windows: usize,
    steps: usize,
    initial_reward: f64,
    final_reward: f64,
    reward_gain: f64,
    initial_eval_ndcg4: f64,
    final_eval_ndcg4: f64,
    config: grpo::GrpoConfig,
}

pub fn simulate_grpo(
    cfg: &RunConfig,
    task: GrpoTask,
    n_windows: usize,
    k: usize,
) -> Result<Status> {
    if n_windows == 0 {
        bail!("config error: --n-windows must be >= 1");
    }
    if !(2..=grpo::MAX_ENUM_K).contains(&k) {
        bail!(
            "config error: --window-size must be in 2..={}",
            grpo::MAX_ENUM_K
        );
    }
    let (name, names, train, eval) = match task {
        GrpoTask::Synthetic(kind) => {
            let train = synthetic_task(kind, n_windows, k, cfg.seed);
            let eval = synthetic_task(kind, n_windows, k, derive_seed(cfg.seed, "eval"));
            let name = serde_json::to_value(kind)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            (name, synthetic_feature_names(), train, eval)
        }
        GrpoTask::Windows(path) => {
            require_file("windows", &path)?;
            let corpus = load_all_documents(cfg)?;
            let sim = load_windows(&path)?
                .iter()
                .map(|w| sim_window(w, &corpus, text_features))
                .collect::<Result<Vec<_>, _>>()?;
            (
                "windows".to_string(),
                text_feature_names(),
                sim.clone(),
                sim,
            )
        }
    };
    let policy = PLPolicy::zeros(names);
    let initial_eval = grpo::eval_ndcg(&policy.theta, &eval);
    let outcome = grpo::train(policy, &train, Some(&eval), &cfg.grpo)?;
    let prov = Provenance::new("simulate-grpo", cfg);
    let curve_path = cfg.out("curve.csv");
    write_curve(&curve_path, &outcome.curve)?;
    write_sidecar(&curve_path, &prov)?;
    write_json(&cfg.out("policy.json"), &prov, &outcome.policy)?;
    let summary = GrpoSummary {
        task: name,
        train_windows: train.len(),
        eval_windows: eval.len(),
        steps: outcome.curve.len(),
        initial_reward: outcome.initial_reward,
        final_reward: outcome.final_reward,
        reward_gain: outcome.final_reward - outcome.initial_reward,
        initial_eval_ndcg4: initial_eval,
        final_eval_ndcg4: outcome.curve.last().map_or(initial_eval, |c| c.eval_ndcg4),
        config: cfg.grpo.clone(),
    };
    write_json(&cfg.out("grpo_summary.json"), &prov, &summary)?;
    println!(
        "task: {}  steps: {}  expected reward: {:.4} -> {:.4}  greedy nDCG@{k}: {:.4} -> {:.4}",
        summary.task,
        summary.steps,
        summary.initial_reward,
        summary.final_reward,
        summary.initial_eval_ndcg4,
        summary.final_eval_ndcg4
    );
    Ok(Status::Ok)
}
