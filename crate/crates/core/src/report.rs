//! Versioned JSON documents shared by the CLI and the tuning service.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{DetectionResult, InvalidConfig, PipelineConfig, StageTrace};
use crate::region::BoundingBox;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: u32,
    pub image: ImageDims,
    pub config_echo: PipelineConfig,
    pub stages: Vec<StageTrace>,
    pub expanded_boxes: Vec<BoundingBox>,
    pub final_boxes: Vec<BoundingBox>,
    pub primary_box: Option<BoundingBox>,
    pub timing_ms: BTreeMap<String, f64>,
}

impl From<&DetectionResult> for ResultDocument {
    fn from(r: &DetectionResult) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            image: ImageDims { width: r.image_size.0, height: r.image_size.1 },
            config_echo: r.config.clone(),
            stages: r.trace.stages.clone(),
            expanded_boxes: r.trace.expanded_boxes.clone(),
            final_boxes: r.trace.final_boxes.clone(),
            primary_box: r.trace.primary_box,
            timing_ms: r.timing.iter().map(|(k, d)| (k.to_string(), d.as_secs_f64() * 1e3)).collect(),
        }
    }
}

pub fn result_json(result: &DetectionResult) -> String {
    serde_json::to_string_pretty(&ResultDocument::from(result)).expect("result document serializes")
}

/// Drops `timing_ms` so two result documents can be compared for equality.
pub fn without_timing(mut doc: serde_json::Value) -> serde_json::Value {
    if let Some(obj) = doc.as_object_mut() {
        obj.remove("timing_ms");
    }
    doc
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] InvalidConfig),
}

/// Parses a config document. Missing fields take defaults, unknown keys are
/// errors, and a blank document is the default config.
pub fn parse_config(text: &str) -> Result<PipelineConfig, ConfigError> {
    let config: PipelineConfig = if text.trim().is_empty() { PipelineConfig::default() } else { serde_json::from_str(text)? };
    config.validate()?;
    Ok(config)
}

pub fn config_from_value(value: serde_json::Value) -> Result<PipelineConfig, ConfigError> {
    let config: PipelineConfig = serde_json::from_value(value)?;
    config.validate()?;
    Ok(config)
}

/// Ground-truth sidecar written next to generated fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureTruth {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}
