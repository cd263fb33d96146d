use std::collections::BTreeMap;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{run_video, NullSink, Pipeline, SidecarDetections, ThroughputReport};
use crate::boxcrop::{FaceBox, Frame};
use crate::ensemble::VoteMode;
use crate::error::{Error, Result};
use crate::infer::ClassifierHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub frames: usize,
    pub parallelism: usize,
    pub mode: VoteMode,
    pub seed: u64,
    pub frame_width: u32,
    pub frame_height: u32,
    pub faces_per_frame: usize,
    /// Number of distinct synthetic frames cycled through the run.
    pub distinct_frames: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            frames: 1000,
            parallelism: 1,
            mode: VoteMode::SoftMean,
            seed: 0,
            frame_width: 640,
            frame_height: 480,
            faces_per_frame: 1,
            distinct_frames: 8,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.frames == 0 {
            problems.push("frames must be at least 1".to_string());
        }
        if self.parallelism == 0 {
            problems.push("parallelism must be at least 1".to_string());
        }
        if self.frame_width == 0 || self.frame_height == 0 {
            problems.push(format!(
                "frame size must be non-zero, got {}x{}",
                self.frame_width, self.frame_height
            ));
        }
        if self.distinct_frames == 0 {
            problems.push("distinct_frames must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// Runs `config.frames` synthetic frames through the full pipeline without
/// annotation output and reports per-stage timings.
pub fn bench(config: &BenchConfig, handle: ClassifierHandle) -> Result<ThroughputReport> {
    config.validate()?;
    let synthetic = SyntheticFrames::generate(
        config.seed,
        config.distinct_frames.min(config.frames),
        config.frame_width,
        config.frame_height,
        config.faces_per_frame,
    )?;
    let pipeline = Pipeline::new(handle, config.mode, config.parallelism)?;
    let mut detections = synthetic.detections(config.frames);
    let run = run_video(synthetic.cycle(config.frames), &mut detections, &pipeline, &mut NullSink)?;
    Ok(run.report)
}

/// Seeded frames with rectangular "faces" of varying brightness, and the
/// matching detections.
#[derive(Debug, Clone)]
pub struct SyntheticFrames {
    frames: Vec<Frame>,
    boxes: Vec<Vec<FaceBox>>,
}

impl SyntheticFrames {
    pub fn generate(seed: u64, count: usize, width: u32, height: u32, faces_per_frame: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("synthetic source needs at least one frame".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut frames = Vec::with_capacity(count);
        let mut boxes = Vec::with_capacity(count);
        for _ in 0..count {
            let base: u8 = rng.gen_range(40..200);
            let mut image = RgbImage::from_fn(width, height, |x, y| {
                let v = base.wrapping_add(((x / 16 + y / 16) % 4) as u8 * 8);
                Rgb([v, v / 2 + 20, 255 - v])
            });
            let mut faces = Vec::with_capacity(faces_per_frame);
            for _ in 0..faces_per_frame {
                let max_side = (width.min(height) / 3).max(4);
                let side_w = rng.gen_range(max_side / 2..=max_side);
                let side_h = rng.gen_range(max_side / 2..=max_side);
                let x0 = rng.gen_range(0..=width.saturating_sub(side_w + 1));
                let y0 = rng.gen_range(0..=height.saturating_sub(side_h + 1));
                // Left and right halves differ so the three crops can disagree.
                let left: u8 = rng.gen();
                let right: u8 = rng.gen();
                for y in y0..(y0 + side_h).min(height) {
                    for x in x0..(x0 + side_w).min(width) {
                        let v = if x < x0 + side_w / 2 { left } else { right };
                        image.put_pixel(x, y, Rgb([v, v, v]));
                    }
                }
                faces.push(FaceBox::from_coords(
                    x0 as i32,
                    y0 as i32,
                    (x0 + side_w) as i32,
                    (y0 + side_h) as i32,
                ));
            }
            frames.push(Frame::from_image(image)?);
            boxes.push(faces);
        }
        Ok(SyntheticFrames { frames, boxes })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, index: usize) -> &Frame {
        &self.frames[index % self.frames.len()]
    }

    pub fn boxes(&self, index: usize) -> &[FaceBox] {
        &self.boxes[index % self.boxes.len()]
    }

    /// `total` frames, cycling through the distinct ones.
    pub fn cycle(&self, total: usize) -> impl Iterator<Item = Result<Frame>> + Send + '_ {
        (0..total).map(move |i| Ok(self.frame(i).clone()))
    }

    pub fn detections(&self, total: usize) -> SidecarDetections {
        let map: BTreeMap<u64, Vec<FaceBox>> = (0..total).map(|i| (i as u64, self.boxes(i).to_vec())).collect();
        SidecarDetections::from_map(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::{load_backend, ModelManifest};

    fn mock() -> ClassifierHandle {
        load_backend(&ModelManifest::from_arg("mock").unwrap()).unwrap()
    }

    #[test]
    fn zero_frames_is_a_validation_error() {
        let config = BenchConfig { frames: 0, ..BenchConfig::default() };
        assert!(matches!(bench(&config, mock()), Err(Error::Validation(_))));
    }

    #[test]
    fn report_accounts_for_every_frame() {
        let config = BenchConfig { frames: 20, ..BenchConfig::default() };
        let report = bench(&config, mock()).unwrap();
        assert_eq!(report.frames, 20);
        assert_eq!(report.faces, 20);
        assert!(report.complete);
        assert!(report.per_stage.geometry.mean_ms > 0.0);
        assert!(((report.fps - 20.0 / report.wall_time_s) / report.fps).abs() < 1e-9);
    }

    #[test]
    fn synthetic_frames_are_seeded() {
        let a = SyntheticFrames::generate(9, 3, 120, 90, 2).unwrap();
        let b = SyntheticFrames::generate(9, 3, 120, 90, 2).unwrap();
        for i in 0..3 {
            assert_eq!(a.frame(i), b.frame(i));
            assert_eq!(a.boxes(i), b.boxes(i));
        }
    }
}
