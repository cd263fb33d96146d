use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ImageRecord, Source};
use crate::boxcrop::{normalize_to_reference, Frame, REFERENCE_SIZE};
use crate::error::{Error, Result};

pub const PRE_NORMALIZED_NOTE: &str = "pre-normalized 816x816";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordError {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareReport {
    /// Input records in order, LFW entries pointing at their rescaled copies.
    pub records: Vec<ImageRecord>,
    pub rescaled: usize,
    pub pre_normalized: usize,
    pub errors: Vec<RecordError>,
}

enum Outcome {
    Rescaled(ImageRecord),
    Untouched(ImageRecord),
    Skipped,
    Failed(ImageRecord, RecordError),
}

/// Rescales every LFW image to the 816×816 reference resolution, writing PNG
/// copies under `out_dir/<subject_id>/`. Images already at the reference size
/// are left in place and flagged. Unreadable images are reported and their
/// records kept unchanged; the pass carries on.
pub fn prepare_lfw(records: &[ImageRecord], out_dir: &Path) -> Result<PrepareReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let outcomes: Vec<Outcome> = records.par_iter().map(|r| prepare_one(r, out_dir)).collect();

    let mut report = PrepareReport {
        records: Vec::with_capacity(records.len()),
        rescaled: 0,
        pre_normalized: 0,
        errors: Vec::new(),
    };
    for (original, outcome) in records.iter().zip(outcomes) {
        match outcome {
            Outcome::Rescaled(r) => {
                report.rescaled += 1;
                report.records.push(r);
            }
            Outcome::Untouched(r) => {
                report.pre_normalized += 1;
                report.records.push(r);
            }
            Outcome::Skipped => report.records.push(original.clone()),
            Outcome::Failed(r, e) => {
                log::warn!("{}: {}", e.path.display(), e.message);
                report.errors.push(e);
                report.records.push(r);
            }
        }
    }
    Ok(report)
}

fn prepare_one(record: &ImageRecord, out_dir: &Path) -> Outcome {
    if record.source != Source::Lfw {
        return Outcome::Skipped;
    }
    let fail = |message: String| {
        Outcome::Failed(
            record.clone(),
            RecordError {
                path: record.path.clone(),
                message,
            },
        )
    };
    let frame: Frame = match Frame::open(&record.path) {
        Ok(f) => f,
        Err(e) => return fail(e.to_string()),
    };
    if frame.width() == REFERENCE_SIZE && frame.height() == REFERENCE_SIZE {
        let mut r = record.clone();
        r.provenance.get_or_insert_with(|| PRE_NORMALIZED_NOTE.to_string());
        return Outcome::Untouched(r);
    }

    let stem = record
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    let dir = out_dir.join(sanitize(&record.subject_id));
    if let Err(e) = fs::create_dir_all(&dir) {
        return fail(format!("{}: {e}", dir.display()));
    }
    let target = dir.join(format!("{stem}.png"));
    let rescaled = normalize_to_reference(&frame);
    if let Err(e) = rescaled.image().save(&target) {
        return fail(format!("{}: {e}", target.display()));
    }

    let mut r = record.clone();
    r.provenance = Some(format!(
        "rescaled {}x{} -> {REFERENCE_SIZE}x{REFERENCE_SIZE} bilinear from {}",
        frame.width(),
        frame.height(),
        record.path.display()
    ));
    r.path = target;
    Outcome::Rescaled(r)
}

fn sanitize(subject: &str) -> String {
    subject
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}
