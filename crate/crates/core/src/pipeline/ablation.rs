use serde::{Deserialize, Serialize};

use super::{CropScheme, Pipeline};
use crate::boxcrop::{FaceBox, Frame};
use crate::datakit::{evaluate_labels, EvalReport, ImageRecord};
use crate::ensemble::VoteMode;
use crate::error::Result;
use crate::infer::ClassifierHandle;
use crate::score::Gender;

/// Accuracy of the three-crop ensemble next to the single-crop baseline, on
/// the same images and the same classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub ensemble: EvalReport,
    pub single_crop: EvalReport,
    /// Records that could not be scored by both arms (unreadable image or
    /// degenerate face).
    pub skipped: usize,
}

/// Classifies each record's face with both crop schemes. A record without a
/// `face_box` uses the whole image as the detection.
pub fn ablation(
    records: &[ImageRecord],
    handle: &ClassifierHandle,
    mode: VoteMode,
    parallelism: usize,
) -> Result<AblationReport> {
    let ensemble = Pipeline::new(handle.clone(), mode, parallelism)?;
    let baseline = Pipeline::new(handle.clone(), mode, 1)?.with_scheme(CropScheme::SingleCrop);

    let mut with_crops: Vec<(ImageRecord, Gender)> = Vec::new();
    let mut without: Vec<(ImageRecord, Gender)> = Vec::new();
    let mut skipped = 0;
    for (i, record) in records.iter().enumerate() {
        let frame = match Frame::open(&record.path) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("skipping {}: {e}", record.path.display());
                skipped += 1;
                continue;
            }
        };
        let face = match record.face_box {
            Some([xa, ya, xb, yb]) => FaceBox::from_coords(xa, ya, xb, yb),
            None => FaceBox::from_coords(0, 0, frame.width() as i32 - 1, frame.height() as i32 - 1),
        };
        let a = ensemble.process(i as u64, &frame, &[face])?;
        let b = baseline.process(i as u64, &frame, &[face])?;
        match (a.faces[0].decision(), b.faces[0].decision()) {
            (Some(da), Some(db)) => {
                with_crops.push((record.clone(), da.label));
                without.push((record.clone(), db.label));
            }
            _ => skipped += 1,
        }
    }
    Ok(AblationReport {
        ensemble: evaluate_labels(&with_crops)?,
        single_crop: evaluate_labels(&without)?,
        skipped,
    })
}
