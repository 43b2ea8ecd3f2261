//! Simulator tasks: synthetic feature windows and text-overlap features for
//! windows built from real documents.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::policy::SimWindow;
use super::GrpoError;
use crate::corpus::{Corpus, Document};
use crate::pipeline::Window;
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Gold candidates have shifted feature means.
    Informative,
    /// Features are independent of which candidate is gold.
    Noise,
}

pub const SYNTHETIC_FEATURES: [&str; 3] = ["match_score", "skill_overlap", "noise"];

/// Mean shift of the gold candidate per synthetic feature.
const GOLD_SHIFT: [f64; 3] = [2.0, 1.0, 0.0];

pub fn synthetic_feature_names() -> Vec<String> {
    SYNTHETIC_FEATURES.iter().map(|s| s.to_string()).collect()
}

/// `n` windows of `k` candidates with the gold slot drawn uniformly.
pub fn synthetic_task(kind: TaskKind, n: usize, k: usize, seed: u64) -> Vec<SimWindow> {
    let mut rng = rng_for(seed, &format!("task/{kind:?}"));
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    (0..n)
        .map(|i| {
            let gold = rng.random_range(0..k);
            let features = (0..k)
                .map(|j| {
                    SYNTHETIC_FEATURES
                        .iter()
                        .enumerate()
                        .map(|(f, _)| {
                            let shift = match kind {
                                TaskKind::Informative if j == gold => GOLD_SHIFT[f],
                                _ => 0.0,
                            };
                            shift + std_normal.sample(&mut rng)
                        })
                        .collect()
                })
                .collect();
            SimWindow {
                id: format!("{kind:?}#{i}").to_lowercase(),
                features,
                gold,
            }
        })
        .collect()
}

pub const TEXT_FEATURES: [&str; 3] = ["token_jaccard", "job_term_coverage", "log_length_ratio"];

pub fn text_feature_names() -> Vec<String> {
    TEXT_FEATURES.iter().map(|s| s.to_string()).collect()
}

fn tokens(text: &str) -> HashSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() > 1)
        .map(str::to_lowercase)
        .collect()
}

/// Lexical job/resume match features.
pub fn text_features(job: &Document, resume: &Document) -> Vec<f64> {
    let jt = tokens(&job.render());
    let rt = tokens(&resume.render());
    let inter = jt.intersection(&rt).count() as f64;
    let union = jt.union(&rt).count() as f64;
    let jaccard = if union == 0.0 { 0.0 } else { inter / union };
    let coverage = if jt.is_empty() {
        0.0
    } else {
        inter / jt.len() as f64
    };
    let ratio = ((1 + resume.token_estimate) as f64 / (1 + job.token_estimate) as f64).ln();
    vec![jaccard, coverage, ratio]
}

/// Turns a pipeline window into simulator input, slots in presentation order.
pub fn sim_window(
    w: &Window,
    docs: &Corpus,
    feature_fn: impl Fn(&Document, &Document) -> Vec<f64>,
) -> Result<SimWindow, GrpoError> {
    let missing = |id: &str| GrpoError::InvalidWindow {
        window_id: w.window_id.clone(),
        message: format!("document {id:?} not in corpus"),
    };
    let job = docs.get(&w.job_id).ok_or_else(|| missing(&w.job_id))?;
    let features = w
        .presented()
        .into_iter()
        .map(|id| {
            docs.get(id)
                .map(|r| feature_fn(job, r))
                .ok_or_else(|| missing(id))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimWindow {
        id: w.window_id.clone(),
        features,
        gold: w.gold_slot() - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DocKind;

    #[test]
    fn synthetic_is_seeded() {
        let a = synthetic_task(TaskKind::Informative, 20, 4, 1);
        assert_eq!(a, synthetic_task(TaskKind::Informative, 20, 4, 1));
        assert_ne!(a, synthetic_task(TaskKind::Informative, 20, 4, 2));
        for w in &a {
            w.validate(3).unwrap();
        }
    }

    #[test]
    fn informative_gold_has_higher_match_mean() {
        let ws = synthetic_task(TaskKind::Informative, 2000, 4, 5);
        let gold: f64 = ws.iter().map(|w| w.features[w.gold][0]).sum::<f64>() / 2000.0;
        let neg: f64 = ws
            .iter()
            .flat_map(|w| {
                (0..4)
                    .filter(move |&j| j != w.gold)
                    .map(move |j| w.features[j][0])
            })
            .sum::<f64>()
            / 6000.0;
        assert!((gold - 2.0).abs() < 0.1 && neg.abs() < 0.1, "{gold} {neg}");
        let noise = synthetic_task(TaskKind::Noise, 2000, 4, 5);
        let g: f64 = noise.iter().map(|w| w.features[w.gold][0]).sum::<f64>() / 2000.0;
        assert!(g.abs() < 0.1);
    }

    #[test]
    fn text_overlap() {
        let job = Document::new(
            "j",
            DocKind::Job,
            vec![("skills".into(), "rust python sql".into())],
        );
        let same = Document::new(
            "a",
            DocKind::Resume,
            vec![("skills".into(), "rust python sql".into())],
        );
        let none = Document::new(
            "b",
            DocKind::Resume,
            vec![("hobbies".into(), "gardening".into())],
        );
        let a = text_features(&job, &same);
        let b = text_features(&job, &none);
        assert_eq!(a[1], 1.0);
        assert_eq!(b[1], 0.0);
        assert!(a[0] > b[0]);
    }
}
