//! Seeded synthetic corpora: jobs, per-job candidate pools and labels.
//!
//! Every job requires a handful of skills from one domain. Candidates carry a
//! latent match score driven by how many required skills they share and
//! whether their location fits; accepted candidates are drawn from the high
//! end. The pool order mimics a retriever: latent score plus Gaussian noise.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{DocKind, Document, Label, PoolRecord};
use crate::seed::{rng_for, SimRng};

const DOMAINS: [(&str, [&str; 8]); 5] = [
    (
        "Software Engineer",
        [
            "rust",
            "python",
            "kubernetes",
            "postgresql",
            "grpc",
            "react",
            "terraform",
            "kafka",
        ],
    ),
    (
        "Account Manager",
        [
            "negotiation",
            "crm",
            "forecasting",
            "b2b",
            "salesforce",
            "upselling",
            "pipeline",
            "contracts",
        ],
    ),
    (
        "Registered Nurse",
        [
            "triage",
            "icu",
            "phlebotomy",
            "charting",
            "pediatrics",
            "bls",
            "medication",
            "wound",
        ],
    ),
    (
        "Financial Analyst",
        [
            "excel",
            "valuation",
            "gaap",
            "modeling",
            "budgeting",
            "sql",
            "audit",
            "tableau",
        ],
    ),
    (
        "Mechanical Engineer",
        [
            "cad",
            "solidworks",
            "fea",
            "thermodynamics",
            "gd&t",
            "prototyping",
            "matlab",
            "welding",
        ],
    ),
];

const CITIES: [&str; 6] = [
    "Shanghai", "Beijing", "Shenzhen", "Hangzhou", "Chengdu", "Wuhan",
];

const REQUIRED_SKILLS: usize = 4;

/// Shape of one generated job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobPlan {
    pub positives: usize,
    pub pool_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub jobs: usize,
    pub pool_size: usize,
    /// Regular jobs draw their positive count uniformly from `1..=max_positives`.
    pub max_positives: usize,
    pub no_positive_rate: f64,
    pub many_positive_rate: f64,
    pub many_positives: usize,
    pub short_pool_rate: f64,
    pub short_pool_size: usize,
    /// Explicitly rejected (y = 0) candidates per job.
    pub rejected_per_job: usize,
    /// Chance that an accepted label lands on a random low-match candidate.
    pub label_noise: f64,
    /// Std of the noise added to latent scores to form the retrieval order.
    pub retrieval_noise: f64,
    /// Overrides the random per-job shapes when set.
    pub plans: Option<Vec<JobPlan>>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            jobs: 50,
            pool_size: 20,
            max_positives: 4,
            no_positive_rate: 0.1,
            many_positive_rate: 0.05,
            many_positives: 12,
            short_pool_rate: 0.05,
            short_pool_size: 15,
            rejected_per_job: 2,
            label_noise: 0.0,
            retrieval_noise: 3.0,
            plans: None,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("no_positive_rate", self.no_positive_rate),
            ("many_positive_rate", self.many_positive_rate),
            ("short_pool_rate", self.short_pool_rate),
            ("label_noise", self.label_noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must be in [0, 1]"));
            }
        }
        if self.no_positive_rate + self.many_positive_rate + self.short_pool_rate > 1.0 {
            return Err("scenario rates sum above 1".into());
        }
        if !(self.retrieval_noise >= 0.0 && self.retrieval_noise.is_finite()) {
            return Err("retrieval_noise must be finite and >= 0".into());
        }
        if self.max_positives == 0 {
            return Err("max_positives must be >= 1".into());
        }
        for (i, plan) in self.plans().iter().enumerate() {
            if plan.pool_size == 0 || plan.positives > plan.pool_size {
                return Err(format!(
                    "job plan {i} needs 0 <= positives <= pool_size > 0"
                ));
            }
        }
        Ok(())
    }

    /// Per-job shapes: the explicit list, or draws from the scenario rates.
    pub fn plans(&self) -> Vec<JobPlan> {
        if let Some(p) = &self.plans {
            return p.clone();
        }
        let mut rng = rng_for(self.seed, "synthetic/plans");
        (0..self.jobs)
            .map(|_| {
                let u: f64 = rng.random();
                let (positives, pool_size) = if u < self.no_positive_rate {
                    (0, self.pool_size)
                } else if u < self.no_positive_rate + self.many_positive_rate {
                    (self.many_positives, self.pool_size)
                } else if u < self.no_positive_rate + self.many_positive_rate + self.short_pool_rate
                {
                    (1, self.short_pool_size)
                } else {
                    (rng.random_range(1..=self.max_positives), self.pool_size)
                };
                JobPlan {
                    positives: positives.min(pool_size),
                    pool_size,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub jobs: Vec<Document>,
    pub resumes: Vec<Document>,
    pub labels: Vec<Label>,
    pub pools: Vec<PoolRecord>,
    pub plans: Vec<JobPlan>,
}

impl SyntheticDataset {
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.jobs.iter().chain(&self.resumes)
    }
}

struct Candidate {
    doc_fields: Vec<(String, String)>,
    latent: f64,
}

fn candidate(
    rng: &mut SimRng,
    domain: usize,
    required: &[&str],
    city: &str,
    strong: bool,
    serial: usize,
) -> Candidate {
    let overlap = if strong {
        rng.random_range(3..=REQUIRED_SKILLS)
    } else {
        rng.random_range(0..=2)
    };
    let mut skills: Vec<&str> = required.choose_multiple(rng, overlap).copied().collect();
    let others: Vec<&str> = DOMAINS
        .iter()
        .enumerate()
        .flat_map(|(d, (_, s))| {
            s.iter()
                .filter(move |x| d != domain || !required.contains(x))
        })
        .copied()
        .collect();
    let extra = rng.random_range(1..=3);
    skills.extend(others.choose_multiple(rng, extra));
    skills.shuffle(rng);
    let home = if strong || rng.random_bool(0.3) {
        city
    } else {
        CITIES.choose(rng).unwrap()
    };
    let years: u32 = if strong {
        rng.random_range(5..=12)
    } else {
        rng.random_range(0..=8)
    };
    let latent = overlap as f64 + if home == city { 0.5 } else { 0.0 } + years.min(8) as f64 / 8.0;
    let title = DOMAINS[if rng.random_bool(0.8) {
        domain
    } else {
        rng.random_range(0..DOMAINS.len())
    }]
    .0;
    Candidate {
        doc_fields: vec![
            ("name".into(), format!("Candidate {serial:05}")),
            ("current location".into(), home.into()),
            (
                "most recent experience".into(),
                format!("{title}, {years} years"),
            ),
            ("skills".into(), skills.join(", ")),
        ],
        latent,
    }
}

/// Generates the dataset. Each job uses its own child generator, so adding
/// jobs never changes earlier ones.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticDataset, String> {
    cfg.validate()?;
    let plans = cfg.plans();
    let noise = Normal::new(0.0, cfg.retrieval_noise.max(f64::MIN_POSITIVE)).unwrap();
    let mut out = SyntheticDataset {
        jobs: Vec::new(),
        resumes: Vec::new(),
        labels: Vec::new(),
        pools: Vec::new(),
        plans: plans.clone(),
    };
    let mut serial = 0;
    for (j, plan) in plans.iter().enumerate() {
        let job_id = format!("job{j:04}");
        let mut rng = rng_for(cfg.seed, &format!("synthetic/{job_id}"));
        let domain = rng.random_range(0..DOMAINS.len());
        let (title, pool_skills) = DOMAINS[domain];
        let required: Vec<&str> = pool_skills
            .choose_multiple(&mut rng, REQUIRED_SKILLS)
            .copied()
            .collect();
        let city = *CITIES.choose(&mut rng).unwrap();
        out.jobs.push(Document::new(
            job_id.clone(),
            DocKind::Job,
            vec![
                ("title".into(), title.into()),
                ("required skills".into(), required.join(", ")),
                (
                    "required experience".into(),
                    format!("{}+ years", rng.random_range(2..=6)),
                ),
                ("work location".into(), city.into()),
            ],
        ));

        let mut cands: Vec<(Candidate, bool)> = (0..plan.pool_size)
            .map(|i| {
                serial += 1;
                let strong = i < plan.positives;
                (
                    candidate(&mut rng, domain, &required, city, strong, serial),
                    strong,
                )
            })
            .collect();
        // a noisy label swaps an accepted strong candidate for a weak one
        if plan.positives < plan.pool_size {
            for i in 0..plan.positives {
                if rng.random_bool(cfg.label_noise) {
                    let free: Vec<usize> = (plan.positives..plan.pool_size)
                        .filter(|&w| !cands[w].1)
                        .collect();
                    if let Some(&weak) = free.choose(&mut rng) {
                        cands[i].1 = false;
                        cands[weak].1 = true;
                    }
                }
            }
        }
        cands.shuffle(&mut rng);

        let mut scored: Vec<(f64, usize)> = cands
            .iter()
            .enumerate()
            .map(|(i, (c, _))| {
                let n: f64 = if cfg.retrieval_noise > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                };
                (c.latent + n, i)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        let ids: Vec<String> = (0..cands.len())
            .map(|i| format!("{job_id}-r{i:02}"))
            .collect();
        let negatives: Vec<usize> = (0..cands.len()).filter(|&i| !cands[i].1).collect();
        let rejected: Vec<usize> = negatives
            .choose_multiple(&mut rng, cfg.rejected_per_job.min(negatives.len()))
            .copied()
            .collect();
        for (i, (c, accepted)) in cands.into_iter().enumerate() {
            out.resumes
                .push(Document::new(ids[i].clone(), DocKind::Resume, c.doc_fields));
            if accepted || rejected.contains(&i) {
                out.labels.push(Label {
                    job_id: job_id.clone(),
                    resume_id: ids[i].clone(),
                    y: accepted as u8,
                });
            }
        }
        out.pools.push(PoolRecord {
            job_id,
            candidates: scored.into_iter().map(|(_, i)| ids[i].clone()).collect(),
        });
    }
    Ok(out)
}
