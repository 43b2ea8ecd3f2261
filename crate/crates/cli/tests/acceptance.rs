//! Acceptance gate. Runs every criterion and prints one PASS/FAIL line each.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use jobfit_core::corpus::{Corpus, DocKind, Document, Label, LabelTable, PoolRecord, RankedPool};
use jobfit_core::engine::{
    comparisons_per_iter, evaluate_run, rerank_pool, window_starts, EngineConfig,
};
use jobfit_core::grpo::{
    exact_kl, permutations, pl_log_prob, sample_group, surrogate, synthetic_feature_names,
    synthetic_task, train, GrpoConfig, KlEstimator, PLPolicy, RewardKind, SimWindow, TaskKind,
};
use jobfit_core::metrics::{group_advantages, ndcg, rearank_reward, recall_at_k, RelevanceVector};
use jobfit_core::ranker::{format_answer, parse_answer, NoisyRanker, OracleRanker, SlotOrder};
use jobfit_core::seed::{rng_for, SimRng};
use jobfit_core::synthetic::{generate, SyntheticConfig};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::Value;
use statrs::distribution::{ContinuousCDF, StudentsT};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn naive_ndcg(rels: &[u8], k: usize) -> f64 {
    let mut dcg = 0.0;
    for (i, &r) in rels.iter().take(k).enumerate() {
        dcg += r as f64 / ((i + 2) as f64).log2();
    }
    let pos = rels.iter().filter(|&&r| r > 0).count();
    let mut ideal = 0.0;
    for i in 0..pos.min(k) {
        ideal += 1.0 / ((i + 2) as f64).log2();
    }
    if ideal == 0.0 {
        0.0
    } else {
        dcg / ideal
    }
}

fn naive_recall(rels: &[u8], k: usize) -> f64 {
    let pos = rels.iter().filter(|&&r| r > 0).count();
    if pos == 0 {
        return 0.0;
    }
    rels.iter().take(k).filter(|&&r| r > 0).count() as f64 / pos as f64
}

fn all_orderings(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut tail in all_orderings(rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let orderings = all_orderings(vec![0, 1, 2, 3]);
    ensure!(orderings.len() == 24, "expected 24 orderings");
    let mut worst: f64 = 0.0;
    for order in &orderings {
        // candidate 0 is the single positive
        let rels: Vec<u8> = order.iter().map(|&c| (c == 0) as u8).collect();
        let pos = order.iter().position(|&c| c == 0).unwrap() + 1;
        let expected = 1.0 / ((pos + 1) as f64).log2();
        let got = ndcg(&RelevanceVector::new(rels).unwrap(), 4).unwrap();
        worst = worst.max((got - expected).abs());
    }
    ensure!(worst < 1e-12, "nDCG@4 enumeration error {worst:e}");

    let mut rng = rng_for(1, "acceptance/metrics");
    let mut worst_rand: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=30);
        let p = rng.random_range(0.0..0.6);
        let rels: Vec<u8> = (0..n).map(|_| rng.random_bool(p) as u8).collect();
        if rels.iter().all(|&r| r == 0) {
            continue;
        }
        let rv = RelevanceVector::new(rels.clone()).unwrap();
        worst_rand = worst_rand
            .max((ndcg(&rv, 10).unwrap() - naive_ndcg(&rels, 10)).abs())
            .max((recall_at_k(&rv, 10).unwrap() - naive_recall(&rels, 10)).abs());
    }
    ensure!(worst_rand < 1e-9, "randomized metric error {worst_rand:e}");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 5.0, "took {secs:.2}s");
    Ok(format!(
        "24 orderings err {worst:.1e}; 10k cases err {worst_rand:.1e}; {secs:.2}s"
    ))
}

fn reward_properties() -> Outcome {
    let r = |o: f64, n: f64, m: f64| rearank_reward(o, n, m).map_err(|e| e.to_string());
    ensure!(r(0.5, 1.0, 1.0)? == 1.0, "perfect re-rank should give 1");
    ensure!(
        r(0.6309, 0.6309, 1.0)? == 0.0,
        "unchanged ranking should give 0"
    );
    ensure!(r(0.7, 0.4, 1.0)? < 0.0, "regression should be negative");
    ensure!(r(1.0, 0.5, 1.0)? == 0.0, "old already ideal gives 0");
    let literal = r(0.6309, 0.5, 1.0)?;
    ensure!((literal + 0.35462).abs() < 1e-4, "example reward {literal}");
    // exact window: positive moves from slot 2 to slot 3
    let old = 1.0 / 3f64.log2();
    let exact = r(old, 0.5, 1.0)?;
    let oracle = (0.5 - old) / (1.0 - old);
    ensure!(
        (exact - oracle).abs() < 1e-12,
        "exact case {exact} vs {oracle}"
    );

    let mut rng = rng_for(2, "acceptance/advantages");
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let g = rng.random_range(2..=64);
        let rewards: Vec<f64> = (0..g).map(|_| rng.random_range(-1.0..1.0)).collect();
        let adv = group_advantages(&rewards).map_err(|e| e.to_string())?;
        let mean = adv.iter().sum::<f64>() / g as f64;
        let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / g as f64).sqrt();
        worst = worst.max(mean.abs()).max((std - 1.0).abs());
    }
    ensure!(worst < 1e-9, "advantage moments off by {worst:e}");
    Ok(format!(
        "example {literal:.5}; exact {exact:.6}; 1k groups err {worst:.1e}"
    ))
}

fn single_positive_pool(n: usize, positive_at: usize) -> (RankedPool, Corpus, Arc<LabelTable>) {
    let ids: Vec<String> = (0..n).map(|i| format!("r{i:02}")).collect();
    let mut docs = vec![Document::new(
        "job",
        DocKind::Job,
        vec![("title".into(), "Analyst".into())],
    )];
    docs.extend(ids.iter().map(|id| {
        Document::new(
            id.clone(),
            DocKind::Resume,
            vec![("name".into(), id.clone())],
        )
    }));
    let labels = Arc::new(
        LabelTable::from_labels([Label {
            job_id: "job".into(),
            resume_id: ids[positive_at].clone(),
            y: 1,
        }])
        .unwrap(),
    );
    let pool = RankedPool::join(
        PoolRecord {
            job_id: "job".into(),
            candidates: ids,
        },
        &labels,
    )
    .unwrap();
    (pool, Corpus::from_documents(docs).unwrap(), labels)
}

fn engine_schedule() -> Outcome {
    let start = Instant::now();
    let table = [
        ((2, 1), 19),
        ((3, 1), 18),
        ((3, 2), 10),
        ((4, 1), 17),
        ((4, 2), 9),
        ((4, 3), 7),
    ];
    for ((k, s), want) in table {
        let starts = window_starts(20, k, s);
        ensure!(
            comparisons_per_iter(20, k, s) == want,
            "({k},{s}) comparisons"
        );
        ensure!(
            starts.len() == want,
            "({k},{s}) has {} windows",
            starts.len()
        );
        ensure!(
            starts[0] == 20 - k + 1 && *starts.last().unwrap() == 1,
            "({k},{s}) ends {starts:?}"
        );
        ensure!(
            starts.windows(2).all(|p| p[0] - p[1] == s || p[1] == 1),
            "({k},{s}) steps {starts:?}"
        );
    }
    let mut cases = 0;
    for k in 2..=4 {
        for s in 1..k {
            for p in 0..20 {
                let (pool, docs, labels) = single_positive_pool(20, p);
                let cfg = EngineConfig {
                    window_size: k,
                    stride: s,
                    iterations: 1,
                    pool_size: 20,
                };
                let trace = rerank_pool(&pool, &docs, &OracleRanker::new(labels), &cfg)
                    .map_err(|e| e.to_string())?;
                ensure!(
                    trace.final_ordering[0] == pool.candidates[p],
                    "(k={k},s={s}) positive from {} did not reach the top",
                    p + 1
                );
                cases += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.2}s");
    Ok(format!(
        "grid {{19,18,10,17,9,7}}; bubble-up {cases} cases; {secs:.2}s"
    ))
}

fn multi_pass_benefit() -> Outcome {
    let data = generate(&SyntheticConfig {
        jobs: 300,
        no_positive_rate: 0.0,
        seed: 7,
        ..Default::default()
    })?;
    let labels = Arc::new(LabelTable::from_labels(data.labels.clone()).unwrap());
    let pools: Vec<RankedPool> = data
        .pools
        .iter()
        .map(|p| RankedPool::join(p.clone(), &labels).unwrap())
        .collect();
    let docs = Corpus::from_documents(data.documents().cloned().collect()).unwrap();
    let ranker = NoisyRanker::new(labels, 0.3, 7).unwrap();
    let run = |iterations| {
        evaluate_run(
            &pools,
            &docs,
            &ranker,
            &EngineConfig {
                iterations,
                ..Default::default()
            },
        )
        .map(|(r, _)| r)
        .map_err(|e| e.to_string())
    };
    let (one, two) = (run(1)?, run(2)?);
    ensure!(
        one.per_job.len() == 300 && two.per_job.len() == 300,
        "expected 300 scored pools"
    );
    let d: Vec<f64> = one
        .per_job
        .iter()
        .zip(&two.per_job)
        .map(|(a, b)| b.ndcg10_after - a.ndcg10_after)
        .collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = mean / (sd / n.sqrt());
    let p = 1.0 - StudentsT::new(0.0, 1.0, n - 1.0).unwrap().cdf(t);
    let (a, b) = (one.macro_avg.ndcg10_after, two.macro_avg.ndcg10_after);
    ensure!(
        b > a && p < 0.05,
        "t=1 {a:.4}, t=2 {b:.4}, t={t:.2}, p={p:.3}"
    );
    Ok(format!(
        "nDCG@10 t=1 {a:.4} -> t=2 {b:.4}; paired t={t:.2}, p={p:.1e}"
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_jobfit"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "jobfit {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn read_json(path: &Path) -> Result<Value, String> {
    serde_json::from_str(&std::fs::read_to_string(path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())
}

fn read_windows(path: &Path) -> Result<Vec<Value>, String> {
    std::fs::read_to_string(path)
        .map_err(|e| e.to_string())?
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn pipeline_fidelity() -> Outcome {
    let start = Instant::now();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::copy(fixtures.join("pipeline50.toml"), d.join("run.toml"))
        .map_err(|e| e.to_string())?;
    std::fs::write(
        d.join("noisy.toml"),
        std::fs::read_to_string(d.join("run.toml")).unwrap()
            + "\n[ranker]\nkind = \"noisy\"\np_flip = 0.5\n",
    )
    .map_err(|e| e.to_string())?;
    run_cli(d, &["gen-synthetic", "--config", "run.toml"])?;
    run_cli(d, &["build-windows", "--config", "run.toml"])?;

    let expected = read_json(&fixtures.join("pipeline50.expected.json"))?;
    let report = read_json(&d.join("out/build_report.json"))?;
    for key in ["kept_jobs", "skipped_by_reason", "skipped", "windows"] {
        ensure!(
            report[key] == expected[key],
            "{key}: got {} expected {}",
            report[key],
            expected[key]
        );
    }

    let windows = read_windows(&d.join("out/windows.jsonl"))?;
    let mut slots = [0usize; 4];
    for w in &windows {
        let order: Vec<u64> = w["presented_order"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        let gold_slot = order.iter().position(|&c| c == 1).unwrap();
        slots[gold_slot] += 1;
    }
    let e = windows.len() as f64 / 4.0;
    let chi2: f64 = slots.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
    // df = 3, alpha = 0.01
    ensure!(chi2 < 11.345, "gold slot counts {slots:?}, chi2 {chi2:.2}");

    run_cli(d, &["annotate", "--config", "noisy.toml"])?;
    run_cli(
        d,
        &[
            "filter",
            "--config",
            "noisy.toml",
            "--strategy",
            "remove-hard",
        ],
    )?;
    run_cli(
        d,
        &[
            "filter",
            "--config",
            "noisy.toml",
            "--strategy",
            "subsample-hard",
        ],
    )?;
    let annotated = read_windows(&d.join("out/windows.annotated.jsonl"))?;
    let hard = annotated
        .iter()
        .filter(|w| w["r_bar"].as_f64().unwrap() < 0.4)
        .count();
    let easy = annotated.len() - hard;
    let removed = read_windows(&d.join("out/windows.remove_hard.jsonl"))?.len();
    let subsampled = read_windows(&d.join("out/windows.subsample_hard.jsonl"))?.len();
    let half_hard = (hard as f64 * 0.5).round() as usize;
    ensure!(
        removed == easy,
        "remove_hard kept {removed}, expected {easy}"
    );
    ensure!(
        subsampled == easy + half_hard,
        "subsample_hard kept {subsampled}, expected {}",
        easy + half_hard
    );
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.2}s");
    Ok(format!(
        "{} windows, slots {slots:?} chi2 {chi2:.2}; hard {hard}/{}; remove {removed}, subsample {subsampled}; {secs:.2}s",
        windows.len(),
        annotated.len()
    ))
}

fn answer_round_trip() -> Outcome {
    let mut checked = 0;
    for k in 1..=5 {
        for perm in permutations(k) {
            let slots: Vec<usize> = perm.iter().map(|i| i + 1).collect();
            let order = SlotOrder::new(slots.clone(), k).unwrap();
            let parsed = parse_answer(&format_answer(&order), k).map_err(|e| e.to_string())?;
            ensure!(
                parsed.ordering.slots() == slots && !parsed.repaired,
                "round trip failed for {slots:?}"
            );
            checked += 1;
        }
    }
    let mut rng = rng_for(3, "acceptance/fuzz");
    let pieces = [
        "[",
        "]",
        ">",
        " ",
        "<answer>",
        "</answer>",
        "<think>",
        "x",
        "\n",
        ",",
        "[0]",
        "[9]",
        "[1]",
        "[2]",
        "3",
        "4",
        "[10]",
        "[]",
    ];
    let mut parsed_ok = 0;
    for _ in 0..10_000 {
        let k = rng.random_range(2..=8);
        let mut text = String::new();
        if rng.random_bool(0.8) {
            text.push_str("<answer>");
        }
        for _ in 0..rng.random_range(0..20) {
            if rng.random_bool(0.5) {
                text.push_str(&format!("[{}] > ", rng.random_range(0..=k + 2)));
            } else {
                text.push_str(pieces.choose(&mut rng).unwrap());
            }
        }
        if rng.random_bool(0.8) {
            text.push_str("</answer>");
        }
        if let Ok(p) = parse_answer(&text, k) {
            let mut s = p.ordering.slots().to_vec();
            s.sort_unstable();
            ensure!(
                s == (1..=k).collect::<Vec<_>>(),
                "non-permutation from {text:?}"
            );
            parsed_ok += 1;
        }
        let raw: Vec<usize> = (0..rng.random_range(0..2 * k))
            .map(|_| rng.random_range(0..=k + 3))
            .collect();
        let (order, _) = SlotOrder::repair(&raw, k);
        let mut s = order.slots().to_vec();
        s.sort_unstable();
        ensure!(
            s == (1..=k).collect::<Vec<_>>(),
            "repair of {raw:?} is not a permutation"
        );
    }
    Ok(format!(
        "{checked} exhaustive round trips; 10k fuzz cases ({parsed_ok} parsed)"
    ))
}

fn random_window(rng: &mut SimRng) -> SimWindow {
    SimWindow {
        id: "w".into(),
        features: (0..4)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect(),
        gold: rng.random_range(0..4),
    }
}

fn grpo_numerics() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_for(4, "acceptance/grpo");
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let w = random_window(&mut rng);
        let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let theta_old: Vec<f64> = theta
            .iter()
            .map(|t| t + rng.random_range(-0.3..0.3))
            .collect();
        let theta_ref: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let old = PLPolicy {
            theta: theta_old.clone(),
            feature_names: synthetic_feature_names(),
        };
        let group = sample_group(
            &old,
            &w,
            &GrpoConfig {
                group_size: 8,
                ..Default::default()
            },
            &mut rng,
        )
        .map_err(|e| e.to_string())?;
        let beta = rng.random_range(0.0..0.5);
        let kl = if trial % 2 == 0 {
            KlEstimator::Exact
        } else {
            KlEstimator::Sampled
        };
        let at = |t: &[f64]| surrogate(t, &theta_old, &theta_ref, &w, &group, beta, kl);
        let analytic = at(&theta).grad;
        let mut diff = 0.0;
        let mut fd_norm = 0.0;
        for i in 0..3 {
            let (mut plus, mut minus) = (theta.clone(), theta.clone());
            plus[i] += h;
            minus[i] -= h;
            let fd = (at(&plus).value - at(&minus).value) / (2.0 * h);
            diff += (analytic[i] - fd).powi(2);
            fd_norm += fd * fd;
        }
        let a_norm: f64 = analytic.iter().map(|a| a * a).sum();
        worst = worst.max(diff.sqrt() / a_norm.sqrt().max(fd_norm.sqrt()).max(1e-6));
    }
    ensure!(worst < 1e-4, "finite-difference relative error {worst:e}");

    let mut norm_err: f64 = 0.0;
    for _ in 0..50 {
        let w = random_window(&mut rng);
        let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let total: f64 = permutations(4)
            .iter()
            .map(|o| pl_log_prob(&theta, &w, o).unwrap().exp())
            .sum();
        norm_err = norm_err.max((total - 1.0).abs());
        ensure!(
            exact_kl(&theta, &theta, &w).abs() < 1e-12,
            "self KL nonzero"
        );
    }
    ensure!(norm_err < 1e-9, "likelihood sums off by {norm_err:e}");

    let cfg = GrpoConfig::simulator();
    let run = |kind: TaskKind, reward: RewardKind| {
        let windows = synthetic_task(kind, 500, 4, cfg.seed);
        let cfg = GrpoConfig {
            reward,
            ..cfg.clone()
        };
        train(
            PLPolicy::zeros(synthetic_feature_names()),
            &windows,
            None,
            &cfg,
        )
        .map(|o| o.final_reward - o.initial_reward)
        .map_err(|e| e.to_string())
    };
    let gain = run(TaskKind::Informative, RewardKind::Rearank)?;
    let gain_r1 = run(TaskKind::Informative, RewardKind::Rankr1)?;
    let noise = run(TaskKind::Noise, RewardKind::Rearank)?;
    ensure!(gain >= 0.2, "informative gain {gain:.4}");
    ensure!(gain_r1 > 0.0, "binary reward did not improve: {gain_r1:.4}");
    ensure!(noise.abs() < 0.05, "noise task moved by {noise:.4}");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1}s");
    Ok(format!(
        "FD err {worst:.1e}; norm err {norm_err:.1e}; gain rearank {gain:.3}, rankr1 {gain_r1:.3}, noise {noise:+.4}; {secs:.1}s"
    ))
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in std::fs::read_dir(&p).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(files)
}

fn end_to_end_determinism() -> Outcome {
    let run = || -> Result<BTreeMap<String, Vec<u8>>, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d = dir.path();
        std::fs::write(
            d.join("noisy.toml"),
            "[ranker]\nkind = \"noisy\"\np_flip = 0.3\n",
        )
        .unwrap();
        std::fs::write(d.join("oracle.toml"), "[ranker]\nkind = \"oracle\"\n").unwrap();
        for args in [
            &["gen-synthetic", "--seed", "13"][..],
            &["build-windows", "--seed", "13"],
            &["annotate", "--seed", "13", "--config", "noisy.toml"],
            &[
                "filter",
                "--seed",
                "13",
                "--config",
                "noisy.toml",
                "--strategy",
                "remove-hard",
            ],
            &[
                "rerank",
                "--seed",
                "13",
                "--config",
                "oracle.toml",
                "--trace",
            ],
            &["evaluate", "--seed", "13", "--config", "oracle.toml"],
        ] {
            run_cli(d, args)?;
        }
        snapshot(d)
    };
    let (a, b) = (run()?, run()?);
    ensure!(a.keys().eq(b.keys()), "different file sets");
    for (name, bytes) in &a {
        ensure!(b[name] == *bytes, "{name} differs between runs");
    }
    Ok(format!("{} files byte-identical across two runs", a.len()))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("metric oracle equivalence", metric_oracles),
        ("reward and advantage properties", reward_properties),
        ("engine schedule fidelity", engine_schedule),
        ("multi-pass benefit", multi_pass_benefit),
        ("pipeline fidelity", pipeline_fidelity),
        ("answer protocol round trip", answer_round_trip),
        ("GRPO simulator numerics", grpo_numerics),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
