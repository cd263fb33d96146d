use serde::{Deserialize, Serialize};

use super::{FrameResult, StageLatency};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageStats {
    pub mean_ms: f64,
    /// Nearest-rank 95th percentile.
    pub p95_ms: f64,
}

impl StageStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return StageStats::default();
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = ((0.95 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        StageStats {
            mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p95_ms: sorted[rank - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerStage {
    pub detect_intake: StageStats,
    pub geometry: StageStats,
    pub inference: StageStats,
    pub aggregate: StageStats,
    pub annotate: StageStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub frames: u64,
    pub faces: u64,
    pub wall_time_s: f64,
    /// `frames / wall_time_s`, everything included.
    pub fps: f64,
    /// Frames per second counting only geometry, inference and aggregation.
    pub fps_crop_ensemble_only: f64,
    pub per_stage: PerStage,
    pub parallelism: usize,
    pub backend: String,
    /// False when the run stopped early (see `failure`).
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ThroughputReport {
    pub(crate) fn build(
        results: &[FrameResult],
        wall_time_s: f64,
        parallelism: usize,
        backend: String,
        failure: Option<String>,
    ) -> Self {
        let frames = results.len() as u64;
        let column = |f: fn(&StageLatency) -> f64| -> Vec<f64> { results.iter().map(|r| f(&r.latency)).collect() };
        let per_stage = PerStage {
            detect_intake: StageStats::from_samples(&column(|l| l.detect_intake_ms)),
            geometry: StageStats::from_samples(&column(|l| l.geometry_ms)),
            inference: StageStats::from_samples(&column(|l| l.inference_ms)),
            aggregate: StageStats::from_samples(&column(|l| l.aggregate_ms)),
            annotate: StageStats::from_samples(&column(|l| l.annotate_ms)),
        };
        let ensemble_s: f64 = results
            .iter()
            .map(|r| (r.latency.geometry_ms + r.latency.inference_ms + r.latency.aggregate_ms) / 1e3)
            .sum();
        ThroughputReport {
            frames,
            faces: results.iter().map(|r| r.faces.len() as u64).sum(),
            wall_time_s,
            fps: rate(frames, wall_time_s),
            fps_crop_ensemble_only: rate(frames, ensemble_s),
            per_stage,
            parallelism,
            backend,
            complete: failure.is_none(),
            failure,
        }
    }
}

fn rate(frames: u64, seconds: f64) -> f64 {
    if seconds > 0.0 {
        frames as f64 / seconds
    } else {
        0.0
    }
}
