//! Listwise re-ranking for person-job fit.
//!
//! - [`corpus`]: documents, labels and retrieval pools.
//! - [`metrics`]: nDCG / Recall, ReaRank and Rank-R1 rewards, group advantages.
//! - [`ranker`]: prompt, answer protocol, LLM client and reference rankers.
//! - [`pipeline`]: training-window construction, difficulty annotation, data strategies, SFT distillation.
//! - [`engine`]: multi-pass sliding-window re-ranking and evaluation.
//! - [`grpo`]: Plackett–Luce policy simulator for the GRPO objective.
//! - [`synthetic`]: seeded synthetic corpora for offline runs.

pub mod corpus;
pub mod engine;
pub mod grpo;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod ranker;
pub mod seed;
pub mod synthetic;
