//! Run configuration shared by every subcommand and saved next to its outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::Markers;
use crate::coref::{CorefConfig, DEFAULT_CLUSTER_THRESHOLD, DEFAULT_WINDOW_TOKENS};
use crate::disambig::{DisambigConfig, DEFAULT_K, DEFAULT_MARGIN};
use crate::encode::{EncoderHandle, EncoderKind, DEFAULT_HASH_DIM};
use crate::error::{Error, Result};
use crate::kb::prune::DEFAULT_MAX_NORM_EDIT;
use crate::kb::PruneConfig;
use crate::mine::{MineConfig, Quota, QuotaWeights, DEFAULT_POSITIVE_CAP, DEFAULT_SPLIT_RATIOS};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// Where the no-match threshold came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ThresholdSource {
    Unset,
    Flag,
    /// Inherited from a loaded config file.
    Config,
    /// Output of a threshold sweep.
    Sweep { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub encoder: EncoderKind,
    pub bridge_endpoint: Option<String>,
    pub bridge_retries: u32,
    /// Hash encoder dimension; ignored by the bridge, which reports its own.
    pub dim: usize,
    pub markers: Markers,
    pub window_tokens: usize,
    /// Width of a date partition in days; 0 means one calendar day.
    pub window_days: u32,
    pub cluster_threshold: f64,
    pub no_match_threshold: Option<f64>,
    pub threshold_source: ThresholdSource,
    pub margin: f64,
    pub k: usize,
    pub use_coref: bool,
    pub use_qrank: bool,
    pub use_birth_filter: bool,
    pub max_norm_edit: f64,
    pub corpus_end: Option<NaiveDate>,
    pub seed: u64,
    pub positives: usize,
    pub negatives: usize,
    pub quota_weights: QuotaWeights,
    pub positive_cap_per_entity: usize,
    pub split_ratios: [f64; 3],
    /// Input and output locations by role (`mentions`, `index`, `out`, ...).
    pub paths: BTreeMap<String, PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            encoder: EncoderKind::Hash,
            bridge_endpoint: None,
            bridge_retries: 3,
            dim: DEFAULT_HASH_DIM,
            markers: Markers::default(),
            window_tokens: DEFAULT_WINDOW_TOKENS,
            window_days: 0,
            cluster_threshold: DEFAULT_CLUSTER_THRESHOLD,
            no_match_threshold: None,
            threshold_source: ThresholdSource::Unset,
            margin: DEFAULT_MARGIN,
            k: DEFAULT_K,
            use_coref: true,
            use_qrank: true,
            use_birth_filter: true,
            max_norm_edit: DEFAULT_MAX_NORM_EDIT,
            corpus_end: None,
            seed: 0,
            positives: 10_000,
            negatives: 10_000,
            quota_weights: QuotaWeights::default(),
            positive_cap_per_entity: DEFAULT_POSITIVE_CAP,
            split_ratios: DEFAULT_SPLIT_RATIOS,
            paths: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = crate::io::read_json(path)?;
        // hand-written files carry no provenance; recorded ones keep theirs
        if cfg.no_match_threshold.is_some() && cfg.threshold_source == ThresholdSource::Unset {
            cfg.threshold_source = ThresholdSource::Config;
        }
        Ok(cfg)
    }

    pub fn save_in(&self, dir: &Path) -> Result<()> {
        crate::io::write_json_pretty(&dir.join(RUN_CONFIG_FILE), self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cluster_threshold.is_finite() && self.cluster_threshold >= 0.0) {
            return Err(Error::Config(format!("cluster threshold {} must be >= 0", self.cluster_threshold)));
        }
        if self.encoder == EncoderKind::Bridge && self.bridge_endpoint.is_none() {
            return Err(Error::Config("the bridge encoder needs an endpoint".into()));
        }
        if self.markers.open.trim().is_empty() || self.markers.close.trim().is_empty() {
            return Err(Error::Config("mention markers must contain visible text".into()));
        }
        Ok(())
    }

    pub fn path(&self, role: &str) -> Option<&Path> {
        self.paths.get(role).map(PathBuf::as_path)
    }

    pub fn require_path(&self, role: &str) -> Result<&Path> {
        self.path(role)
            .ok_or_else(|| Error::Config(format!("missing required path --{}", role.replace('_', "-"))))
    }

    pub fn set_path(&mut self, role: &str, p: Option<PathBuf>) {
        if let Some(p) = p {
            self.paths.insert(role.to_string(), p);
        }
    }

    pub fn encoder(&self) -> Result<EncoderHandle> {
        match self.encoder {
            EncoderKind::Hash => EncoderHandle::hash(self.dim),
            EncoderKind::Bridge => {
                let ep = self
                    .bridge_endpoint
                    .as_deref()
                    .ok_or_else(|| Error::Config("the bridge encoder needs an endpoint".into()))?;
                EncoderHandle::bridge(ep, self.bridge_retries)
            }
        }
    }

    pub fn coref(&self) -> CorefConfig {
        CorefConfig {
            threshold: self.cluster_threshold,
            markers: self.markers.clone(),
            window_tokens: self.window_tokens,
            renormalize_prototypes: true,
        }
    }

    pub fn disambig(&self) -> Result<DisambigConfig> {
        let threshold = self.no_match_threshold.ok_or_else(|| {
            Error::Config("no-match threshold not set; pass --no-match-threshold or --threshold-file".into())
        })?;
        let cfg = DisambigConfig {
            no_match_threshold: threshold,
            margin: self.margin,
            k: self.k,
            use_qrank: self.use_qrank,
            use_coref: self.use_coref,
            use_birth_filter: self.use_birth_filter,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn prune(&self, corpus_end: NaiveDate) -> PruneConfig {
        PruneConfig {
            corpus_end,
            birth_filter: self.use_birth_filter,
            max_norm_edit: self.max_norm_edit,
        }
    }

    pub fn mine(&self) -> Result<MineConfig> {
        Ok(MineConfig {
            seed: self.seed,
            quota: Quota::from_weights(self.positives, self.negatives, &self.quota_weights)?,
            split_ratios: self.split_ratios,
            positive_cap_per_entity: self.positive_cap_per_entity,
            markers: self.markers.clone(),
            window_tokens: self.window_tokens,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig { no_match_threshold: Some(0.6), ..Default::default() };
        cfg.set_path("mentions", Some("m.jsonl".into()));
        let dir = tempfile::tempdir().unwrap();
        cfg.save_in(dir.path()).unwrap();
        let back = RunConfig::load(&dir.path().join(RUN_CONFIG_FILE)).unwrap();
        assert_eq!(back.threshold_source, ThresholdSource::Config);
        assert_eq!(RunConfig { threshold_source: ThresholdSource::Unset, ..back }, cfg);
    }

    #[test]
    fn missing_threshold_is_a_config_error() {
        assert!(matches!(RunConfig::default().disambig(), Err(Error::Config(_))));
    }

    #[test]
    fn partial_files_fill_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"k": 4, "use_qrank": false}"#).unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!((cfg.k, cfg.use_qrank, cfg.dim), (4, false, DEFAULT_HASH_DIM));
    }
}
