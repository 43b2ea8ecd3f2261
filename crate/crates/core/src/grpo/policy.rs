//! Plackett–Luce listwise policy over small candidate windows.
//!
//! Candidate `j` scores `theta · x_j`; an ordering is drawn by repeatedly
//! picking one of the remaining candidates with softmax probabilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GrpoError;
use crate::metrics::{ndcg, rankr1_reward, rearank_reward, RelevanceVector};

/// Largest window enumerated exactly (`k!` orderings).
pub const MAX_ENUM_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLPolicy {
    pub theta: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl PLPolicy {
    pub fn zeros(feature_names: Vec<String>) -> Self {
        PLPolicy {
            theta: vec![0.0; feature_names.len()],
            feature_names,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

/// A window as seen by the simulator: one feature vector per presented slot
/// and the 0-based slot of the single positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    pub id: String,
    pub features: Vec<Vec<f64>>,
    pub gold: usize,
}

impl SimWindow {
    pub fn k(&self) -> usize {
        self.features.len()
    }

    pub fn validate(&self, dim: usize) -> Result<(), GrpoError> {
        let bad = |m: String| {
            Err(GrpoError::InvalidWindow {
                window_id: self.id.clone(),
                message: m,
            })
        };
        if self.k() < 2 {
            return bad(format!("needs at least 2 candidates, has {}", self.k()));
        }
        if self.gold >= self.k() {
            return bad(format!("gold slot {} out of range", self.gold));
        }
        if let Some(x) = self.features.iter().find(|x| x.len() != dim) {
            return bad(format!(
                "feature length {} != policy dimension {dim}",
                x.len()
            ));
        }
        if self.features.iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite feature".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    Rearank,
    Rankr1,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn scores(theta: &[f64], w: &SimWindow) -> Vec<f64> {
    w.features.iter().map(|x| dot(theta, x)).collect()
}

/// Log-softmax of `scores[rem]`, in `rem` order.
pub(crate) fn log_softmax(scores: &[f64], rem: &[usize]) -> Vec<f64> {
    let m = rem
        .iter()
        .map(|&j| scores[j])
        .fold(f64::NEG_INFINITY, f64::max);
    let lse = m + rem.iter().map(|&j| (scores[j] - m).exp()).sum::<f64>().ln();
    rem.iter().map(|&j| scores[j] - lse).collect()
}

fn check_order(order: &[usize], k: usize) -> Result<(), GrpoError> {
    let mut seen = vec![false; k];
    if order.len() != k
        || order
            .iter()
            .any(|&j| j >= k || std::mem::replace(&mut seen[j], true))
    {
        return Err(GrpoError::InvalidOrdering(order.to_vec()));
    }
    Ok(())
}

/// Per-step log-probabilities of the `k - 1` nontrivial selections.
pub fn step_log_probs(
    theta: &[f64],
    w: &SimWindow,
    order: &[usize],
) -> Result<Vec<f64>, GrpoError> {
    check_order(order, w.k())?;
    let s = scores(theta, w);
    Ok((0..w.k() - 1)
        .map(|t| log_softmax(&s, &order[t..])[0])
        .collect())
}

pub fn pl_log_prob(theta: &[f64], w: &SimWindow, order: &[usize]) -> Result<f64, GrpoError> {
    Ok(step_log_probs(theta, w, order)?.iter().sum())
}

/// Draws an ordering with the Gumbel-max trick: sorting perturbed scores
/// `s_j + g_j` is equivalent to sequential softmax sampling.
pub fn sample_ordering(theta: &[f64], w: &SimWindow, rng: &mut impl Rng) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = scores(theta, w)
        .into_iter()
        .enumerate()
        .map(|(j, s)| {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            (s - (-u.ln()).ln(), j)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, j)| j).collect()
}

/// Highest-score-first ordering, ties broken by slot.
pub fn greedy_ordering(theta: &[f64], w: &SimWindow) -> Vec<usize> {
    let s = scores(theta, w);
    let mut order: Vec<usize> = (0..w.k()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order
}

pub fn ndcg_of(w: &SimWindow, order: &[usize]) -> f64 {
    let pos = order
        .iter()
        .position(|&j| j == w.gold)
        .expect("gold in ordering");
    let rels = RelevanceVector::single_positive(w.k(), pos).expect("valid position");
    ndcg(&rels, w.k()).expect("one positive")
}

/// Reward of a sampled ordering. The ReaRank baseline is the presented order.
pub fn reward(kind: RewardKind, w: &SimWindow, order: &[usize]) -> f64 {
    match kind {
        RewardKind::Rearank => {
            let old = ndcg_of(w, &(0..w.k()).collect::<Vec<_>>());
            rearank_reward(old, ndcg_of(w, order), 1.0).expect("nDCG values lie in [0, 1]")
        }
        RewardKind::Rankr1 => {
            let ids: Vec<String> = (0..w.k()).map(|j| j.to_string()).collect();
            rankr1_reward(&ids[order[0]], &ids[w.gold], &ids).expect("slots are window members")
        }
    }
}

/// All orderings of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    assert!(k <= MAX_ENUM_K, "refusing to enumerate {k}! orderings");
    let mut cur: Vec<usize> = (0..k).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// `E_{o ~ pi_theta}[R(o)]` by exhaustive enumeration.
pub fn expected_reward(theta: &[f64], w: &SimWindow, kind: RewardKind) -> f64 {
    permutations(w.k())
        .iter()
        .map(|o| pl_log_prob(theta, w, o).unwrap().exp() * reward(kind, w, o))
        .sum()
}

/// Sequence-level `KL(pi_theta || pi_ref)` by exhaustive enumeration.
pub fn exact_kl(theta: &[f64], theta_ref: &[f64], w: &SimWindow) -> f64 {
    permutations(w.k())
        .iter()
        .map(|o| {
            let lp = pl_log_prob(theta, w, o).unwrap();
            lp.exp() * (lp - pl_log_prob(theta_ref, w, o).unwrap())
        })
        .sum()
}
