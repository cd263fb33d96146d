//! Per-frame orchestration: detections → reference frame → margin → box
//! triple → crops → classifier → vote, plus the video loop and benchmark.

mod ablation;
mod annotate;
mod bench;
mod report;
mod video;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use ablation::{ablation, AblationReport};
pub use annotate::{annotate_frame, label_color, BLUE, RED};
pub use bench::{bench, BenchConfig, SyntheticFrames};
pub use report::{PerStage, StageStats, ThroughputReport};
pub use video::{
    run_video, AnnotationSink, DetectionProvider, DirectorySink, FixedDetections, ImageSequence, MemorySink,
    NullSink, SidecarDetections, VideoRun,
};

use crate::boxcrop::{
    expand_margin_within, extract_and_squeeze, make_box_triple, reference_window, squeeze_region, BoxTriple,
    CropPosition, CropSet, FaceBox, Frame, ReferenceScale, DEFAULT_DELTA, REFERENCE_SIZE,
};
use crate::ensemble::{aggregate, single_crop_decision, Decision, VoteMode};
use crate::error::{Error, Result};
use crate::infer::{classify_crop, classify_cropset, classify_cropset_parallel, ClassifierHandle};

/// Which crops of the expanded face box reach the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CropScheme {
    /// Left, middle and right crops, fused by the vote mode.
    #[default]
    TwoBoxThreeCrop,
    /// The whole expanded box as one crop; the baseline for ablations.
    SingleCrop,
}

/// Wall-clock milliseconds spent in each stage for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageLatency {
    pub detect_intake_ms: f64,
    pub geometry_ms: f64,
    pub inference_ms: f64,
    pub aggregate_ms: f64,
    pub annotate_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FaceOutcome {
    Classified {
        /// Margin-expanded box, reference coordinates.
        expanded: FaceBox,
        /// Crop boxes, reference coordinates.
        triple: BoxTriple,
        decision: Decision,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceResult {
    /// The detection as supplied, native frame coordinates.
    pub detection: FaceBox,
    pub outcome: FaceOutcome,
}

impl FaceResult {
    pub fn decision(&self) -> Option<&Decision> {
        match &self.outcome {
            FaceOutcome::Classified { decision, .. } => Some(decision),
            FaceOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame_index: u64,
    pub faces: Vec<FaceResult>,
    pub latency: StageLatency,
}

/// A classifier plus vote settings and an optional worker pool for the
/// per-face crop fan-out.
pub struct Pipeline {
    handle: ClassifierHandle,
    mode: VoteMode,
    delta: u32,
    scheme: CropScheme,
    pool: Option<rayon::ThreadPool>,
}

impl Pipeline {
    /// `parallelism` is the number of workers used for the three crops of a
    /// face; 1 classifies them on the calling thread.
    pub fn new(handle: ClassifierHandle, mode: VoteMode, parallelism: usize) -> Result<Self> {
        if parallelism == 0 {
            return Err(Error::InvalidInput("parallelism must be at least 1".into()));
        }
        let pool = if parallelism > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(parallelism)
                    .thread_name(|i| format!("crop-worker-{i}"))
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Pipeline {
            handle,
            mode,
            delta: DEFAULT_DELTA,
            scheme: CropScheme::default(),
            pool,
        })
    }

    pub fn with_scheme(mut self, scheme: CropScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn scheme(&self) -> CropScheme {
        self.scheme
    }

    pub fn mode(&self) -> VoteMode {
        self.mode
    }

    pub fn handle(&self) -> &ClassifierHandle {
        &self.handle
    }

    pub fn parallelism(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Runs every face of one frame. Geometry failures are recorded per face as
    /// skipped; classifier failures abort the frame.
    pub fn process(&self, frame_index: u64, frame: &Frame, boxes: &[FaceBox]) -> Result<FrameResult> {
        let mut latency = StageLatency::default();
        let mut faces = Vec::with_capacity(boxes.len());
        if boxes.is_empty() {
            return Ok(FrameResult { frame_index, faces, latency });
        }

        // Only the part of the reference frame under the expanded boxes is
        // resampled; crops are taken from that window.
        let started = Instant::now();
        let scale = ReferenceScale::for_frame(frame);
        let expanded: Vec<FaceBox> = boxes
            .iter()
            .map(|b| expand_margin_within(&scale.to_reference(b), REFERENCE_SIZE, REFERENCE_SIZE))
            .collect();
        let window = expanded
            .iter()
            .map(FaceBox::rect)
            .reduce(|a, b| a.union(&b))
            .expect("at least one box");
        let reference = reference_window(frame, window);
        let (dx, dy) = (-window.x_min, -window.y_min);
        latency.geometry_ms += ms_since(started);

        for (detection, &expanded) in boxes.iter().zip(&expanded) {
            let started = Instant::now();
            let geometry = match self.scheme {
                CropScheme::TwoBoxThreeCrop => make_box_triple(&expanded, self.delta).and_then(|triple| {
                    let mut crops = extract_and_squeeze(&reference, &shift_triple(&triple, dx, dy))?;
                    crops.regions = triple;
                    Ok(crops)
                }),
                CropScheme::SingleCrop => single_crop(&reference, &expanded, dx, dy),
            };
            latency.geometry_ms += ms_since(started);

            let crops = match geometry {
                Ok(crops) => crops,
                Err(e @ (Error::DegenerateCrop { .. } | Error::InvalidInput(_))) => {
                    log::debug!("frame {frame_index}: skipping face {detection}: {e}");
                    faces.push(FaceResult {
                        detection: *detection,
                        outcome: FaceOutcome::Skipped { reason: e.to_string() },
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };

            let decision = match self.scheme {
                CropScheme::TwoBoxThreeCrop => {
                    let started = Instant::now();
                    let scores = match &self.pool {
                        Some(pool) => classify_cropset_parallel(&self.handle, &crops, pool)?,
                        None => classify_cropset(&self.handle, &crops)?,
                    };
                    latency.inference_ms += ms_since(started);

                    let started = Instant::now();
                    let decision = aggregate(&scores, self.mode)?;
                    latency.aggregate_ms += ms_since(started);
                    decision
                }
                CropScheme::SingleCrop => {
                    let started = Instant::now();
                    let score = classify_crop(&self.handle, &crops.images[1])?;
                    latency.inference_ms += ms_since(started);
                    single_crop_decision(score)
                }
            };

            faces.push(FaceResult {
                detection: *detection,
                outcome: FaceOutcome::Classified {
                    expanded,
                    triple: crops.regions,
                    decision,
                },
            });
        }
        Ok(FrameResult { frame_index, faces, latency })
    }
}

fn shift_triple(t: &BoxTriple, dx: i32, dy: i32) -> BoxTriple {
    BoxTriple {
        left_box: t.left_box.shifted(dx, dy),
        right_box: t.right_box.shifted(dx, dy),
        middle: t.middle.shifted(dx, dy),
        delta: t.delta,
    }
}

// The single crop sits in the middle slot; the other two slots are unused copies.
fn single_crop(window: &Frame, expanded: &FaceBox, dx: i32, dy: i32) -> Result<CropSet> {
    if expanded.width() == 0 || expanded.height() == 0 {
        return Err(Error::InvalidInput(format!("expanded box {expanded} has no extent")));
    }
    let image = squeeze_region(window, &expanded.shifted(dx, dy), CropPosition::Middle)?;
    Ok(CropSet {
        regions: BoxTriple {
            left_box: *expanded,
            right_box: *expanded,
            middle: *expanded,
            delta: 0,
        },
        images: [image.clone(), image.clone(), image],
    })
}

/// Single-threaded convenience wrapper around [`Pipeline::process`].
pub fn process_frame(
    frame: &Frame,
    boxes: &[FaceBox],
    handle: &ClassifierHandle,
    mode: VoteMode,
) -> Result<FrameResult> {
    Pipeline::new(handle.clone(), mode, 1)?.process(0, frame, boxes)
}

pub(crate) fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::{load_backend, ModelManifest};
    use crate::score::Gender;

    fn mock() -> ClassifierHandle {
        load_backend(&ModelManifest::from_arg("mock").unwrap()).unwrap()
    }

    #[test]
    fn zero_detections_yield_empty_result() {
        let frame = Frame::filled(64, 48, [10, 20, 30]).unwrap();
        let r = process_frame(&frame, &[], &mock(), VoteMode::SoftMean).unwrap();
        assert!(r.faces.is_empty());
    }

    #[test]
    fn degenerate_face_is_skipped_without_touching_others() {
        let frame = Frame::filled(816, 816, [200, 200, 200]).unwrap();
        let good = FaceBox::from_coords(300, 300, 500, 500);
        let flat = FaceBox::from_coords(100, 100, 100, 300);
        let alone = process_frame(&frame, &[good], &mock(), VoteMode::SoftMean).unwrap();
        let mixed = process_frame(&frame, &[flat, good], &mock(), VoteMode::SoftMean).unwrap();
        assert!(matches!(mixed.faces[0].outcome, FaceOutcome::Skipped { .. }));
        assert_eq!(mixed.faces[1].outcome, alone.faces[0].outcome);
        assert_eq!(mixed.faces[1].decision().unwrap().label, Gender::Man);
    }

    #[test]
    fn parallelism_must_be_positive() {
        assert!(Pipeline::new(mock(), VoteMode::SoftMean, 0).is_err());
    }
}
