use std::collections::BTreeMap;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use image::RgbImage;

use super::annotate::annotate_frame;
use super::{ms_since, FrameResult, Pipeline, ThroughputReport};
use crate::boxcrop::{FaceBox, Frame, Point};
use crate::error::{Error, Result};

const PREFETCH_DEPTH: usize = 4;

/// Supplies face boxes, in native frame coordinates, for each frame.
///
/// Sidecar files and fixed box lists ship with the crate; a live detector
/// plugs in by implementing this trait.
pub trait DetectionProvider {
    fn detect(&mut self, frame_index: u64, frame: &Frame) -> Result<Vec<FaceBox>>;
}

/// Pre-computed detections: one `frame_index, x_a, y_a, x_b, y_b` record per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SidecarDetections {
    by_frame: BTreeMap<u64, Vec<FaceBox>>,
}

impl SidecarDetections {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file), path)
    }

    /// Fields may be separated by commas and/or whitespace; `#` starts a comment.
    pub fn parse(reader: impl BufRead, origin: &Path) -> Result<Self> {
        let mut by_frame: BTreeMap<u64, Vec<FaceBox>> = BTreeMap::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: n + 1,
                message,
            };
            let fields: Vec<&str> = content
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 5 {
                return Err(parse_err(format!("expected 5 fields, found {}", fields.len())));
            }
            let index: u64 = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad frame index {:?}", fields[0])))?;
            let mut c = [0i32; 4];
            for (slot, field) in c.iter_mut().zip(&fields[1..]) {
                *slot = field
                    .parse()
                    .map_err(|_| parse_err(format!("bad coordinate {field:?}")))?;
            }
            by_frame
                .entry(index)
                .or_default()
                .push(FaceBox::from_coords(c[0], c[1], c[2], c[3]));
        }
        Ok(SidecarDetections { by_frame })
    }

    pub fn from_map(by_frame: BTreeMap<u64, Vec<FaceBox>>) -> Self {
        SidecarDetections { by_frame }
    }

    pub fn boxes(&self, frame_index: u64) -> &[FaceBox] {
        self.by_frame.get(&frame_index).map_or(&[], Vec::as_slice)
    }
}

impl DetectionProvider for SidecarDetections {
    fn detect(&mut self, frame_index: u64, frame: &Frame) -> Result<Vec<FaceBox>> {
        Ok(self
            .boxes(frame_index)
            .iter()
            .map(|b| clamp_to_frame(b, frame))
            .collect())
    }
}

/// The same boxes on every frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixedDetections(pub Vec<FaceBox>);

impl DetectionProvider for FixedDetections {
    fn detect(&mut self, _frame_index: u64, frame: &Frame) -> Result<Vec<FaceBox>> {
        Ok(self.0.iter().map(|b| clamp_to_frame(b, frame)).collect())
    }
}

impl<F> DetectionProvider for F
where
    F: FnMut(u64, &Frame) -> Result<Vec<FaceBox>>,
{
    fn detect(&mut self, frame_index: u64, frame: &Frame) -> Result<Vec<FaceBox>> {
        self(frame_index, frame)
    }
}

fn clamp_to_frame(b: &FaceBox, frame: &Frame) -> FaceBox {
    let (w, h) = (frame.width() as i32 - 1, frame.height() as i32 - 1);
    let clamp = |p: Point| Point::new(p.x.clamp(0, w), p.y.clamp(0, h));
    FaceBox::new(clamp(b.corner_a()), clamp(b.corner_b()))
}

/// Receives annotated frames in frame order.
pub trait AnnotationSink {
    fn write(&mut self, frame_index: u64, image: &RgbImage) -> Result<()>;

    /// When false the run skips drawing entirely.
    fn wants_frames(&self) -> bool {
        true
    }
}

/// Discards output and disables annotation.
#[derive(Debug, Default)]
pub struct NullSink;

impl AnnotationSink for NullSink {
    fn write(&mut self, _frame_index: u64, _image: &RgbImage) -> Result<()> {
        Ok(())
    }

    fn wants_frames(&self) -> bool {
        false
    }
}

#[derive(Debug, Default)]
pub struct MemorySink {
    pub frames: Vec<(u64, RgbImage)>,
}

impl AnnotationSink for MemorySink {
    fn write(&mut self, frame_index: u64, image: &RgbImage) -> Result<()> {
        self.frames.push((frame_index, image.clone()));
        Ok(())
    }
}

/// Writes `frame_000000.png`, `frame_000001.png`, … into a directory.
#[derive(Debug)]
pub struct DirectorySink {
    dir: PathBuf,
}

impl DirectorySink {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(DirectorySink { dir })
    }

    pub fn frame_path(&self, frame_index: u64) -> PathBuf {
        self.dir.join(format!("frame_{frame_index:06}.png"))
    }
}

impl AnnotationSink for DirectorySink {
    fn write(&mut self, frame_index: u64, image: &RgbImage) -> Result<()> {
        let path = self.frame_path(frame_index);
        image.save(&path).map_err(|e| Error::Sink {
            frame: frame_index,
            message: format!("{}: {e}", path.display()),
        })
    }
}

/// Numbered still images in a directory, read in file-name order.
#[derive(Debug, Clone)]
pub struct ImageSequence {
    paths: std::vec::IntoIter<PathBuf>,
}

impl ImageSequence {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            let is_image = path
                .extension()
                .and_then(|e| e.to_str())
                .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
                .unwrap_or(false);
            if is_image && path.is_file() {
                paths.push(path);
            }
        }
        if paths.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} contains no png or jpeg frames",
                dir.display()
            )));
        }
        paths.sort();
        Ok(ImageSequence {
            paths: paths.into_iter(),
        })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.len() == 0
    }
}

impl Iterator for ImageSequence {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        let path = self.paths.next()?;
        Some(Frame::open(path))
    }
}

/// Results of a video run, in frame order.
#[derive(Debug, Clone)]
pub struct VideoRun {
    pub report: ThroughputReport,
    pub frames: Vec<FrameResult>,
}

/// Processes every frame in order. Frames are decoded on a reader thread
/// while the previous frame is classified.
///
/// An empty source or a frame that fails to decode is an error. A sink
/// failure stops the run and returns the partial report with
/// `complete = false`.
pub fn run_video<S>(
    frames: S,
    provider: &mut dyn DetectionProvider,
    pipeline: &Pipeline,
    sink: &mut dyn AnnotationSink,
) -> Result<VideoRun>
where
    S: IntoIterator<Item = Result<Frame>>,
    S::IntoIter: Send,
{
    let source = frames.into_iter();
    let started = Instant::now();
    let mut results = Vec::new();
    let mut failure = None;

    std::thread::scope(|scope| -> Result<()> {
        let (tx, rx) = mpsc::sync_channel(PREFETCH_DEPTH);
        scope.spawn(move || {
            for frame in source {
                if tx.send(frame).is_err() {
                    break;
                }
            }
        });

        for (index, frame) in rx.into_iter().enumerate() {
            let frame = frame?;
            let index = index as u64;

            let t = Instant::now();
            let boxes = provider.detect(index, &frame)?;
            let intake_ms = ms_since(t);

            let mut result = pipeline.process(index, &frame, &boxes)?;
            result.latency.detect_intake_ms = intake_ms;

            if sink.wants_frames() {
                let t = Instant::now();
                let annotated = annotate_frame(&frame, &result.faces);
                result.latency.annotate_ms = ms_since(t);
                if let Err(e) = sink.write(index, &annotated) {
                    log::error!("stopping at frame {index}: {e}");
                    failure = Some(e.to_string());
                    results.push(result);
                    break;
                }
            }
            results.push(result);
        }
        Ok(())
    })?;

    if results.is_empty() {
        return Err(Error::InvalidInput("frame source yielded no frames".into()));
    }
    let wall_time_s = started.elapsed().as_secs_f64();
    let report = ThroughputReport::build(
        &results,
        wall_time_s,
        pipeline.parallelism(),
        pipeline.handle().describe(),
        failure,
    );
    Ok(VideoRun {
        report,
        frames: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::VoteMode;
    use crate::infer::{load_backend, ModelManifest};

    #[test]
    fn sidecar_parsing() {
        let text = "# frame, xa, ya, xb, yb\n0, 10, 20, 110, 140\n0 200 20 260 90\n\n3,5,5,50,50 # late\n";
        let d = SidecarDetections::parse(text.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(d.boxes(0).len(), 2);
        assert_eq!(d.boxes(1), &[]);
        assert_eq!(d.boxes(3)[0].coords(), (5, 5, 50, 50));
    }

    #[test]
    fn sidecar_errors_carry_line_numbers() {
        let err = SidecarDetections::parse("0,1,2,3\n".as_bytes(), Path::new("d.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = SidecarDetections::parse("\n0,1,2,x,4\n".as_bytes(), Path::new("d.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn detections_are_clamped_to_the_frame() {
        let frame = Frame::filled(100, 50, [0, 0, 0]).unwrap();
        let mut fixed = FixedDetections(vec![FaceBox::from_coords(-5, 10, 130, 70)]);
        assert_eq!(fixed.detect(0, &frame).unwrap()[0].coords(), (0, 10, 99, 49));
    }

    #[test]
    fn missing_directory_fails_before_processing() {
        assert!(ImageSequence::open("/definitely/not/here").is_err());
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(ImageSequence::open(empty.path()), Err(Error::InvalidInput(_))));
    }

    struct FailingSink {
        fail_at: u64,
    }

    impl AnnotationSink for FailingSink {
        fn write(&mut self, frame_index: u64, _image: &RgbImage) -> Result<()> {
            if frame_index == self.fail_at {
                Err(Error::Sink { frame: frame_index, message: "disk full".into() })
            } else {
                Ok(())
            }
        }
    }

    fn pipeline() -> Pipeline {
        let handle = load_backend(&ModelManifest::from_arg("mock").unwrap()).unwrap();
        Pipeline::new(handle, VoteMode::SoftMean, 1).unwrap()
    }

    #[test]
    fn sink_failure_returns_partial_report() {
        let frames = (0..10).map(|_| Frame::filled(64, 64, [100, 100, 100]));
        let mut detections = FixedDetections(vec![FaceBox::from_coords(20, 20, 40, 40)]);
        let run = run_video(frames, &mut detections, &pipeline(), &mut FailingSink { fail_at: 4 }).unwrap();
        assert!(!run.report.complete);
        assert_eq!(run.report.frames, 5);
        assert!(run.report.failure.unwrap().contains("disk full"));
    }

    #[test]
    fn empty_source_is_an_error() {
        let frames = std::iter::empty::<Result<Frame>>();
        let err = run_video(frames, &mut FixedDetections::default(), &pipeline(), &mut NullSink);
        assert!(err.is_err());
    }

    #[test]
    fn closures_are_providers() {
        let frames = (0..3).map(|_| Frame::filled(64, 64, [250, 250, 250]));
        let mut calls = Vec::new();
        let mut provider = |i: u64, _f: &Frame| -> Result<Vec<FaceBox>> {
            calls.push(i);
            Ok(vec![FaceBox::from_coords(10, 10, 50, 50)])
        };
        let run = run_video(frames, &mut provider, &pipeline(), &mut NullSink).unwrap();
        assert_eq!(run.report.frames, 3);
        assert_eq!(calls, [0, 1, 2]);
    }
}
