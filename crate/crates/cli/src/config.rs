use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jobfit_core::engine::EngineConfig;
use jobfit_core::grpo::GrpoConfig;
use jobfit_core::pipeline::PipelineConfig;
use jobfit_core::ranker::EndpointConfig;
use jobfit_core::synthetic::SyntheticConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub corpus: PathBuf,
    pub labels: PathBuf,
    pub pools: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: "data/corpus.jsonl".into(),
            labels: "data/labels.jsonl".into(),
            pools: "data/pools.jsonl".into(),
            out_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankerSpec {
    #[default]
    Oracle,
    Identity,
    Noisy {
        p_flip: f64,
    },
    Endpoint(EndpointConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub engine: EngineConfig,
    pub pipeline: PipelineConfig,
    pub ranker: RankerSpec,
    pub grpo: GrpoConfig,
    pub synthetic: SyntheticConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            paths: Paths::default(),
            engine: EngineConfig::default(),
            pipeline: PipelineConfig::default(),
            ranker: RankerSpec::default(),
            grpo: GrpoConfig::simulator(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("config error: cannot read config file {}", path.display()))?;
        toml::from_str(&text)
            .with_context(|| format!("config error: invalid config file {}", path.display()))
    }

    /// Propagates the run seed into every sub-config.
    pub fn finalize(mut self, seed: Option<u64>) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.pipeline.seed = self.seed;
        self.grpo.seed = self.seed;
        self.synthetic.seed = self.seed;
        self.engine.validate().context("config error")?;
        self.pipeline.validate().context("config error")?;
        self.grpo.validate().context("config error")?;
        if let RankerSpec::Noisy { p_flip } = self.ranker {
            if !(0.0..=1.0).contains(&p_flip) {
                bail!("config error: ranker.p_flip must be in [0, 1], got {p_flip}");
            }
        }
        Ok(self)
    }

    /// SHA-256 over the canonical JSON form of the effective config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.paths.out_dir.join(name)
    }
}

pub fn require_file(what: &str, path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!(
            "config error: {what} path {} does not exist",
            path.display()
        );
    }
    Ok(())
}
