use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boxcrop::CROP_SIZE;
use crate::error::{Error, Result};
use crate::score::{Gender, GenderScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChannelOrder {
    Rgb,
    Bgr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Neural,
    Mock,
}

/// What the exported graph's final tensor holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    #[default]
    Logits,
    Probabilities,
}

/// Per-channel input transform: `value = (pixel - mean[c]) * scale[c]`, with
/// `pixel` in [0, 255] and `c` indexing the channels in the model's order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f32>,
    pub scale: Vec<f32>,
}

impl Normalization {
    /// ImageNet statistics expressed on the 0..=255 pixel scale.
    pub fn imagenet() -> Self {
        Normalization {
            mean: vec![123.675, 116.28, 103.53],
            scale: vec![1.0 / 58.395, 1.0 / 57.12, 1.0 / 57.375],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MockRule {
    /// Piecewise-linear map of mean crop intensity onto `p_man`, sending 0 to 0,
    /// `threshold` to 0.5 and 255 to 1. With the default threshold (127.5)
    /// this is exactly `p_man = mean / 255`.
    MeanIntensityThreshold {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    /// Exact lookup keyed by the SHA-256 hex digest of the crop's RGB bytes.
    FixedTable { table: BTreeMap<String, GenderScore> },
}

pub const DEFAULT_MOCK_THRESHOLD: f64 = 127.5;

fn default_threshold() -> f64 {
    DEFAULT_MOCK_THRESHOLD
}

impl Default for MockRule {
    fn default() -> Self {
        MockRule::MeanIntensityThreshold {
            threshold: DEFAULT_MOCK_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MockSpec {
    #[serde(flatten)]
    pub rule: MockRule,
    /// Artificial per-crop cost, for exercising the parallel paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_latency_us: Option<u64>,
}

impl MockSpec {
    /// Parses the compact `threshold=128,latency_us=500` form used on the command line.
    pub fn parse_options(options: &str) -> Result<Self> {
        let mut spec = MockSpec::default();
        for item in options.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("mock option {item:?} is not key=value")))?;
            let bad = |_| Error::InvalidInput(format!("mock option {key} has invalid value {value:?}"));
            match key.trim() {
                "threshold" => {
                    spec.rule = MockRule::MeanIntensityThreshold {
                        threshold: value.trim().parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                    }
                }
                "latency_us" => {
                    spec.simulated_latency_us =
                        Some(value.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?)
                }
                other => return Err(Error::InvalidInput(format!("unknown mock option {other:?}"))),
            }
        }
        Ok(spec)
    }
}

/// Metadata binding a serialized network to its input and output contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    pub input_size: u32,
    pub channel_order: ChannelOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    pub class_order: Vec<String>,
    pub backend_kind: BackendKind,
    #[serde(default)]
    pub output: OutputKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock: Option<MockSpec>,
}

impl ModelManifest {
    pub fn mock(spec: MockSpec) -> Self {
        ModelManifest {
            model_path: None,
            input_size: CROP_SIZE,
            channel_order: ChannelOrder::Rgb,
            normalization: None,
            class_order: vec!["Man".into(), "Woman".into()],
            backend_kind: BackendKind::Mock,
            output: OutputKind::Probabilities,
            mock: Some(spec),
        }
    }

    /// Reads a JSON manifest. A relative `model_path` is resolved against the
    /// manifest's own directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: ModelManifest = serde_json::from_str(&text)?;
        if let (Some(model), Some(dir)) = (manifest.model_path.as_mut(), path.parent()) {
            if model.is_relative() {
                *model = dir.join(&*model);
            }
        }
        Ok(manifest)
    }

    /// Resolves a command-line model argument: `mock`, `mock:<options>`, or a
    /// path to a manifest file.
    pub fn from_arg(arg: &str) -> Result<Self> {
        if arg == "mock" {
            return Ok(ModelManifest::mock(MockSpec::default()));
        }
        if let Some(options) = arg.strip_prefix("mock:") {
            return Ok(ModelManifest::mock(MockSpec::parse_options(options)?));
        }
        ModelManifest::from_path(arg)
    }

    /// Checks every invariant and reports all offending fields at once.
    pub fn validate(&self) -> Result<ValidManifest> {
        let mut problems = Vec::new();
        if self.input_size != CROP_SIZE {
            problems.push(format!("input_size must be {CROP_SIZE}, got {}", self.input_size));
        }

        let class_order = self.parse_class_order(&mut problems);

        match (&self.normalization, self.backend_kind) {
            (Some(n), _) => {
                if n.mean.len() != 3 {
                    problems.push(format!("normalization.mean must have 3 entries, got {}", n.mean.len()));
                }
                if n.scale.len() != 3 {
                    problems.push(format!("normalization.scale must have 3 entries, got {}", n.scale.len()));
                }
                if n.mean.iter().chain(&n.scale).any(|v| !v.is_finite()) {
                    problems.push("normalization values must be finite".into());
                }
            }
            (None, BackendKind::Neural) => problems.push("normalization is required for a neural backend".into()),
            (None, BackendKind::Mock) => {}
        }

        match self.backend_kind {
            BackendKind::Neural if self.model_path.is_none() => {
                problems.push("model_path is required for a neural backend".into())
            }
            BackendKind::Mock => {
                if let Some(MockSpec {
                    rule: MockRule::MeanIntensityThreshold { threshold },
                    ..
                }) = &self.mock
                {
                    if !(0.0..=255.0).contains(threshold) {
                        problems.push(format!("mock threshold must lie in [0, 255], got {threshold}"));
                    }
                }
            }
            _ => {}
        }

        match class_order {
            Some(class_order) if problems.is_empty() => Ok(ValidManifest {
                manifest: self.clone(),
                class_order,
            }),
            _ => Err(Error::Validation(problems)),
        }
    }

    fn parse_class_order(&self, problems: &mut Vec<String>) -> Option<[Gender; 2]> {
        if self.class_order.len() != 2 {
            problems.push(format!("class_order must have 2 entries, got {}", self.class_order.len()));
            return None;
        }
        let parsed: Vec<Gender> = self
            .class_order
            .iter()
            .filter_map(|s| match s.as_str() {
                "Man" => Some(Gender::Man),
                "Woman" => Some(Gender::Woman),
                other => {
                    problems.push(format!("class_order entry {other:?} is not Man or Woman"));
                    None
                }
            })
            .collect();
        match parsed.as_slice() {
            [a, b] if a != b => Some([*a, *b]),
            [_, _] => {
                problems.push("class_order must be a permutation of [Man, Woman]".into());
                None
            }
            _ => None,
        }
    }
}

/// A manifest that passed [`ModelManifest::validate`].
#[derive(Debug, Clone)]
pub struct ValidManifest {
    pub manifest: ModelManifest,
    pub class_order: [Gender; 2],
}
