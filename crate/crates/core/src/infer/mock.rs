use std::time::Duration;

use image::RgbImage;

use super::{crop_digest, Backend, MockRule, MockSpec};
use crate::error::{Error, Result};
use crate::score::{Gender, GenderScore};

/// Deterministic stand-in for a trained network.
#[derive(Debug, Clone)]
pub struct MockBackend {
    spec: MockSpec,
    class_order: [Gender; 2],
}

impl MockBackend {
    pub fn new(spec: MockSpec, class_order: [Gender; 2]) -> Self {
        MockBackend { spec, class_order }
    }

    fn score(&self, crop: &RgbImage) -> Result<GenderScore> {
        match &self.spec.rule {
            MockRule::MeanIntensityThreshold { threshold } => {
                Ok(GenderScore::from_p_man(intensity_to_p_man(mean_intensity(crop), *threshold)))
            }
            MockRule::FixedTable { table } => {
                let digest = crop_digest(crop);
                table.get(&digest).copied().ok_or(Error::MissingDigest(digest))
            }
        }
    }
}

impl Backend for MockBackend {
    fn classify(&self, crop: &RgbImage) -> Result<GenderScore> {
        if let Some(us) = self.spec.simulated_latency_us {
            std::thread::sleep(Duration::from_micros(us));
        }
        // The mock emits scores in canonical order; a permuted class order is
        // applied the way a real model's output index mapping would be.
        let score = self.score(crop)?;
        Ok(match self.class_order {
            [Gender::Man, _] => score,
            _ => GenderScore::from_p_man(score.p_woman()),
        })
    }

    fn describe(&self) -> String {
        match &self.spec.rule {
            MockRule::MeanIntensityThreshold { threshold } => format!("mock:threshold={threshold}"),
            MockRule::FixedTable { table } => format!("mock:table[{}]", table.len()),
        }
    }
}

pub(crate) fn mean_intensity(crop: &RgbImage) -> f64 {
    let raw = crop.as_raw();
    let sum: u64 = raw.iter().map(|&v| u64::from(v)).sum();
    sum as f64 / raw.len() as f64
}

fn intensity_to_p_man(mean: f64, threshold: f64) -> f64 {
    if mean == threshold {
        0.5
    } else if mean < threshold {
        0.5 * mean / threshold
    } else {
        0.5 + 0.5 * (mean - threshold) / (255.0 - threshold)
    }
}
