use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::event::SegmentSpec;
use crate::gtr::GtrParams;
use crate::providers::ProviderConfig;

/// Everything a command needs, loaded from one JSON file plus overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub provider: ProviderConfig,
    pub segments: SegmentSpec,
    pub gtr: GtrParams,
    /// JSONL `{query_id, relevant_ids}`; replaces corpus links when set.
    pub judgments: Option<PathBuf>,
    pub symmetrize: bool,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::from("corpus.jsonl"),
            provider: ProviderConfig::mock(),
            segments: SegmentSpec::full_prefixed(),
            gtr: GtrParams::default(),
            judgments: None,
            symmetrize: false,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Reads `path` (or starts from defaults) and applies `key.path=value`
    /// overrides in order. Values parse as JSON, falling back to a string.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
            }
            None => serde_json::to_value(Self::default()).expect("default config serializes"),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: Self =
            serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        config
            .gtr
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        config
            .provider
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }

    /// Cache location, defaulting to `<output_dir>/cache`.
    pub fn provider_config(&self) -> ProviderConfig {
        let mut p = self.provider.clone();
        if p.cache_dir.is_none() {
            p.cache_dir = Some(self.output_dir.join("cache"));
        }
        p
    }

    pub fn index_dir(&self) -> PathBuf {
        self.output_dir.join("index")
    }

    /// Fails if a referenced input file is missing.
    pub fn check_inputs(&self) -> Result<(), CliError> {
        let mut paths = vec![&self.corpus];
        paths.extend(self.judgments.as_ref());
        paths.extend(self.provider.overrides_path.as_ref());
        match paths.into_iter().find(|p| !p.exists()) {
            Some(missing) => Err(CliError::Usage(format!(
                "input not found: {}",
                missing.display()
            ))),
            None => Ok(()),
        }
    }
}

/// Sets `a.b.c=value` inside a JSON object, creating objects on the way.
pub fn apply_override(target: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{assignment}` is not key=value")))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = target;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Usage(format!(
                "override `{assignment}` has an empty key segment"
            )));
        }
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                return Err(CliError::Usage(format!(
                    "override `{assignment}`: `{part}` is not inside an object"
                )));
            }
        }
        let map = node.as_object_mut().expect("checked object");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let config = RunConfig::load(
            None,
            &[
                "gtr.tau_d=300".into(),
                "corpus=data/x.jsonl".into(),
                "provider.cache_dir=\"c\"".into(),
            ],
        )
        .unwrap();
        assert_eq!(config.gtr.tau_d, 300.0);
        assert_eq!(config.corpus, PathBuf::from("data/x.jsonl"));
        assert_eq!(config.provider.cache_dir, Some(PathBuf::from("c")));
        assert_eq!(config.gtr.beta_d, 2.0);
    }

    #[test]
    fn bad_overrides() {
        assert!(RunConfig::load(None, &["gtr.tau_d".into()]).is_err());
        assert!(RunConfig::load(None, &["gtr.w_s=-1".into()]).is_err());
        assert!(RunConfig::load(None, &["nope=1".into()]).is_err());
        assert!(RunConfig::load(None, &["seed.x=1".into()]).is_err());
    }

    #[test]
    fn round_trips() {
        let config = RunConfig::default();
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), config);
    }
}
