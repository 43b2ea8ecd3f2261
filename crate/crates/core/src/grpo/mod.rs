//! GRPO on a Plackett–Luce listwise policy.
//!
//! Each selection step of an ordering plays the role of one generated token.
//! For a batch `B` of windows, each with a sampled group `G`, the ascent
//! objective is
//!
//! ```text
//! J(θ) = 1/|B| Σ_w 1/|G| Σ_i 1/(k-1) Σ_t [ exp(lp_t(θ) - lp_t(θ_old)) · Â_i  -  β · KL_t(θ) ]
//! ```
//!
//! where `lp_t` is the log-probability of the `t`-th selection and `KL_t` the
//! divergence from the frozen reference policy over the remaining candidates.
//! Sampling is on-policy, so `θ_old = θ` whenever a step is taken.

mod policy;
mod task;

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use policy::{
    exact_kl, expected_reward, greedy_ordering, ndcg_of, permutations, pl_log_prob, reward,
    sample_ordering, scores, step_log_probs, PLPolicy, RewardKind, SimWindow, MAX_ENUM_K,
};
pub use task::{
    sim_window, synthetic_feature_names, synthetic_task, text_feature_names, text_features,
    TaskKind, SYNTHETIC_FEATURES, TEXT_FEATURES,
};

use crate::metrics::{MetricError, RewardGroup, RewardSample};
use crate::seed::rng_for;
use policy::{dot, log_softmax};

#[derive(Debug, Error)]
pub enum GrpoError {
    #[error("invalid GRPO config: {0}")]
    InvalidConfig(String),
    #[error("ordering {0:?} is not a permutation of the window")]
    InvalidOrdering(Vec<usize>),
    #[error("invalid window {window_id}: {message}")]
    InvalidWindow { window_id: String, message: String },
    #[error("non-finite gradient on window {window_id}")]
    NumericalError { window_id: String },
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlEstimator {
    /// Closed-form divergence over the remaining candidates at each step.
    Exact,
    /// `lp_t(θ) - lq_t` at the sampled selection.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrpoConfig {
    pub group_size: usize,
    pub beta: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub reward: RewardKind,
    pub kl_estimator: KlEstimator,
    pub seed: u64,
}

impl Default for GrpoConfig {
    fn default() -> Self {
        GrpoConfig {
            group_size: 32,
            beta: 0.01,
            learning_rate: 1e-6,
            epochs: 2,
            batch_size: 32,
            reward: RewardKind::Rearank,
            kl_estimator: KlEstimator::Exact,
            seed: 0,
        }
    }
}

impl GrpoConfig {
    /// Defaults with a step size suited to a handful of linear weights.
    pub fn simulator() -> Self {
        GrpoConfig {
            learning_rate: 0.2,
            batch_size: 64,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), GrpoError> {
        let bad = |m: &str| Err(GrpoError::InvalidConfig(m.to_string()));
        if self.group_size < 2 {
            return bad("group_size must be >= 2");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be finite and >= 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and > 0");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be >= 1");
        }
        Ok(())
    }
}

/// Samples `cfg.group_size` orderings and scores them.
pub fn sample_group(
    policy: &PLPolicy,
    w: &SimWindow,
    cfg: &GrpoConfig,
    rng: &mut impl rand::Rng,
) -> Result<RewardGroup, GrpoError> {
    let samples = (0..cfg.group_size)
        .map(|_| {
            let order = sample_ordering(&policy.theta, w, rng);
            let r = reward(cfg.reward, w, &order);
            RewardSample { order, reward: r }
        })
        .collect();
    Ok(RewardGroup::new(w.id.clone(), samples)?)
}

/// Value and gradient of one window's share of the surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Mean per-step KL estimate over the group.
    pub kl: f64,
}

pub fn surrogate(
    theta: &[f64],
    theta_old: &[f64],
    theta_ref: &[f64],
    w: &SimWindow,
    group: &RewardGroup,
    beta: f64,
    kl: KlEstimator,
) -> Surrogate {
    let k = w.k();
    let d = theta.len();
    let s = policy::scores(theta, w);
    let s_old = policy::scores(theta_old, w);
    let s_ref = policy::scores(theta_ref, w);
    let norm = 1.0 / (group.samples.len() as f64 * (k - 1) as f64);

    let mut value = 0.0;
    let mut kl_sum = 0.0;
    let mut grad = vec![0.0; d];
    for (sample, &adv) in group.samples.iter().zip(&group.advantages) {
        for t in 0..k - 1 {
            let rem = &sample.order[t..];
            let lp = log_softmax(&s, rem);
            let lq = log_softmax(&s_ref, rem);
            let lp_old = log_softmax(&s_old, rem)[0];
            let p: Vec<f64> = lp.iter().map(|v| v.exp()).collect();
            let mut xbar = vec![0.0; d];
            for (pj, &j) in p.iter().zip(rem) {
                for (xb, x) in xbar.iter_mut().zip(&w.features[j]) {
                    *xb += pj * x;
                }
            }
            let chosen = &w.features[rem[0]];
            let ratio = (lp[0] - lp_old).exp();
            value += norm * ratio * adv;
            for i in 0..d {
                grad[i] += norm * ratio * adv * (chosen[i] - xbar[i]);
            }
            let (kl_t, kl_coef): (f64, Vec<f64>) = match kl {
                KlEstimator::Exact => {
                    let terms: Vec<f64> = lp.iter().zip(&lq).map(|(a, b)| a - b).collect();
                    let kl_t = p.iter().zip(&terms).map(|(pj, tj)| pj * tj).sum();
                    (kl_t, p.iter().zip(&terms).map(|(pj, tj)| pj * tj).collect())
                }
                KlEstimator::Sampled => {
                    let mut c = vec![0.0; rem.len()];
                    c[0] = 1.0;
                    (lp[0] - lq[0], c)
                }
            };
            // ∇KL = Σ_j c_j (x_j - x̄)
            value -= norm * beta * kl_t;
            kl_sum += norm * kl_t;
            for (cj, &j) in kl_coef.iter().zip(rem) {
                for i in 0..d {
                    grad[i] -= norm * beta * cj * (w.features[j][i] - xbar[i]);
                }
            }
        }
    }
    Surrogate {
        value,
        grad,
        kl: kl_sum,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub mean_reward: f64,
    pub kl: f64,
    pub grad_norm: f64,
}

/// One on-policy update over `batch`. `step_key` namespaces the per-window
/// child seeds so results do not depend on thread scheduling.
pub fn grpo_step(
    policy: &PLPolicy,
    reference: &PLPolicy,
    batch: &[&SimWindow],
    cfg: &GrpoConfig,
    step_key: &str,
) -> Result<(PLPolicy, StepStats), GrpoError> {
    if batch.is_empty() {
        return Err(GrpoError::EmptyBatch);
    }
    let per_window: Vec<Result<(Surrogate, f64), GrpoError>> = batch
        .par_iter()
        .map(|w| {
            let mut rng = rng_for(cfg.seed, &format!("{step_key}/{}", w.id));
            let group = sample_group(policy, w, cfg, &mut rng)?;
            let sur = surrogate(
                &policy.theta,
                &policy.theta,
                &reference.theta,
                w,
                &group,
                cfg.beta,
                cfg.kl_estimator,
            );
            if sur.grad.iter().any(|g| !g.is_finite()) || !sur.value.is_finite() {
                return Err(GrpoError::NumericalError {
                    window_id: w.id.clone(),
                });
            }
            Ok((sur, group.mean_reward()))
        })
        .collect();

    let n = batch.len() as f64;
    let mut grad = vec![0.0; policy.dim()];
    let (mut reward_sum, mut kl_sum) = (0.0, 0.0);
    for r in per_window {
        let (sur, mean_reward) = r?;
        for (g, v) in grad.iter_mut().zip(&sur.grad) {
            *g += v / n;
        }
        reward_sum += mean_reward;
        kl_sum += sur.kl;
    }
    let theta = policy
        .theta
        .iter()
        .zip(&grad)
        .map(|(t, g)| t + cfg.learning_rate * g)
        .collect();
    Ok((
        PLPolicy {
            theta,
            feature_names: policy.feature_names.clone(),
        },
        StepStats {
            mean_reward: reward_sum / n,
            kl: kl_sum / n,
            grad_norm: dot(&grad, &grad).sqrt(),
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub mean_reward: f64,
    pub kl: f64,
    pub grad_norm: f64,
    pub eval_ndcg4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub policy: PLPolicy,
    pub curve: Vec<CurvePoint>,
    /// Exact expected reward over the evaluation windows, before and after.
    pub initial_reward: f64,
    pub final_reward: f64,
}

/// Mean nDCG@k of greedy decoding.
pub fn eval_ndcg(theta: &[f64], windows: &[SimWindow]) -> f64 {
    if windows.is_empty() {
        return 0.0;
    }
    windows
        .iter()
        .map(|w| ndcg_of(w, &greedy_ordering(theta, w)))
        .sum::<f64>()
        / windows.len() as f64
}

pub fn mean_expected_reward(theta: &[f64], windows: &[SimWindow], kind: RewardKind) -> f64 {
    if windows.is_empty() {
        return 0.0;
    }
    windows
        .par_iter()
        .map(|w| expected_reward(theta, w, kind))
        .collect::<Vec<_>>()
        .iter()
        .sum::<f64>()
        / windows.len() as f64
}

/// Trains for `cfg.epochs` passes over shuffled mini-batches. The reference
/// policy is the starting policy. `eval` defaults to the training windows.
pub fn train(
    policy: PLPolicy,
    windows: &[SimWindow],
    eval: Option<&[SimWindow]>,
    cfg: &GrpoConfig,
) -> Result<TrainOutcome, GrpoError> {
    cfg.validate()?;
    if windows.is_empty() {
        return Err(GrpoError::EmptyBatch);
    }
    for w in windows.iter().chain(eval.unwrap_or(&[])) {
        w.validate(policy.dim())?;
        if w.k() > MAX_ENUM_K {
            return Err(GrpoError::InvalidWindow {
                window_id: w.id.clone(),
                message: format!("window size {} exceeds {MAX_ENUM_K}", w.k()),
            });
        }
    }
    let eval = eval.unwrap_or(windows);
    let reference = policy.clone();
    let initial_reward = mean_expected_reward(&policy.theta, eval, cfg.reward);
    let mut policy = policy;
    let mut curve = Vec::new();
    let mut step = 0;
    for epoch in 0..cfg.epochs {
        let mut idx: Vec<usize> = (0..windows.len()).collect();
        idx.shuffle(&mut rng_for(cfg.seed, &format!("epoch{epoch}")));
        for chunk in idx.chunks(cfg.batch_size) {
            let batch: Vec<&SimWindow> = chunk.iter().map(|&i| &windows[i]).collect();
            step += 1;
            let (next, stats) =
                grpo_step(&policy, &reference, &batch, cfg, &format!("step{step}"))?;
            policy = next;
            curve.push(CurvePoint {
                step,
                mean_reward: stats.mean_reward,
                kl: stats.kl,
                grad_norm: stats.grad_norm,
                eval_ndcg4: eval_ndcg(&policy.theta, eval),
            });
        }
    }
    let final_reward = mean_expected_reward(&policy.theta, eval, cfg.reward);
    Ok(TrainOutcome {
        policy,
        curve,
        initial_reward,
        final_reward,
    })
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<(), GrpoError> {
    let io_err = |source| GrpoError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    writeln!(out, "step,mean_reward,kl,grad_norm,eval_ndcg4").map_err(io_err)?;
    for p in curve {
        writeln!(
            out,
            "{},{:.6},{:.6e},{:.6e},{:.6}",
            p.step, p.mean_reward, p.kl, p.grad_norm, p.eval_ndcg4
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
