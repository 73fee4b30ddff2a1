use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sortcell_core::cellsim::SceneSpec;
use sortcell_core::classify::{BackendDescriptor, BackendSource, LatencyModel};
use sortcell_core::orchestrator::RunConfig;

/// Contents of `--config` (TOML, or JSON for a `.json` file).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub run: RunConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Mock,
    Replay,
    Live,
}

/// Classifier selection shared by `cell run` and `bench`.
#[derive(Clone, Debug, Default, Args)]
pub struct BackendFlags {
    /// Classifier backend; defaults to the config file's, else an ideal mock
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Chat server base URL for the live backend
    #[arg(long, env = "SORTCELL_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Model name sent to the server, or selected from a replay log
    #[arg(long)]
    pub model: Option<String>,
    /// Per-request timeout in seconds
    #[arg(long)]
    pub timeout_s: Option<f64>,
    /// Confusion profile JSON for the mock backend (identity when omitted)
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Response log answered from by the replay backend
    #[arg(long)]
    pub replay_log: Option<PathBuf>,
    /// Fixed simulated latency of the mock backend, seconds
    #[arg(long)]
    pub mock_latency_s: Option<f64>,
    /// Strip punctuation around single-word answers before scoring
    #[arg(long)]
    pub lenient_punctuation: bool,
}

impl BackendFlags {
    /// Applies the flags on top of `base`.
    pub fn resolve(&self, base: &BackendDescriptor) -> Result<BackendDescriptor> {
        let mut d = base.clone();
        let kind = self.backend.unwrap_or(match &d.source {
            BackendSource::MockProfile { .. } => BackendKind::Mock,
            BackendSource::ReplayLog { .. } => BackendKind::Replay,
            BackendSource::LiveHttp { .. } => BackendKind::Live,
        });
        d.source = match (kind, d.source) {
            (BackendKind::Mock, BackendSource::MockProfile { profile, latency }) => BackendSource::MockProfile {
                profile: self.profile.clone().or(profile),
                latency: self.mock_latency_s.map_or(latency, |s| LatencyModel::Fixed { s }),
            },
            (BackendKind::Mock, _) => BackendSource::MockProfile {
                profile: self.profile.clone(),
                latency: self.mock_latency_s.map_or_else(LatencyModel::default, |s| LatencyModel::Fixed { s }),
            },
            (BackendKind::Replay, src) => {
                let log = match (&self.replay_log, src) {
                    (Some(p), _) => p.clone(),
                    (None, BackendSource::ReplayLog { log }) => log,
                    (None, _) => bail!("the replay backend needs --replay-log"),
                };
                BackendSource::ReplayLog { log }
            }
            (BackendKind::Live, src) => {
                let endpoint = match (&self.endpoint, src) {
                    (Some(e), _) => e.clone(),
                    (None, BackendSource::LiveHttp { endpoint }) => endpoint,
                    (None, _) => bail!("the live backend needs --endpoint or SORTCELL_ENDPOINT"),
                };
                BackendSource::LiveHttp { endpoint }
            }
        };
        if let Some(m) = &self.model {
            d.model_name = m.clone();
        } else if kind == BackendKind::Replay && base.model_name == BackendDescriptor::default().model_name {
            // select every record unless a model is named
            d.model_name = String::new();
        }
        if let Some(t) = self.timeout_s {
            d.timeout_s = t;
        }
        d.validate()?;
        Ok(d)
    }
}

pub fn load_scene(path: &Path) -> Result<SceneSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading scene {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing scene {}", path.display()))
}
