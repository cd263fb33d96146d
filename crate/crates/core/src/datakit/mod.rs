//! Dataset manifests, subject-disjoint splitting, LFW rescaling and accuracy
//! evaluation.
//!
//! A manifest is JSON lines: one [`ImageRecord`] object per line.

pub mod adapters;
mod evaluate;
mod prepare;
mod split;

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use evaluate::{evaluate, evaluate_labels, percent, EvalReport, PredictionRecord, SourceEval};
pub use prepare::{prepare_lfw, PrepareReport, RecordError};
pub use split::{split, SplitSpec};

use crate::error::{Error, Result};
use crate::score::Gender;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    Adience,
    #[serde(rename = "LFW")]
    Lfw,
    Other,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Adience => "Adience",
            Source::Lfw => "LFW",
            Source::Other => "Other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub path: PathBuf,
    pub subject_id: String,
    pub label: Gender,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    /// Notes on any rewriting applied to the image file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    /// Face detection `[x_a, y_a, x_b, y_b]` in image pixels, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_box: Option<[i32; 4]>,
}

impl ImageRecord {
    pub fn new(path: impl Into<PathBuf>, subject_id: impl Into<String>, label: Gender, source: Source) -> Self {
        ImageRecord {
            path: path.into(),
            subject_id: subject_id.into(),
            label,
            source,
            split: None,
            provenance: None,
            face_box: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.path.as_os_str().is_empty() {
            return Err(Error::InvalidInput("record path must not be empty".into()));
        }
        Ok(())
    }
}

/// Reads a JSON-lines manifest. Blank lines are ignored.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ImageRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(BufReader::new(file), path)
}

pub fn parse_manifest(reader: impl BufRead, origin: &Path) -> Result<Vec<ImageRecord>> {
    let mut records = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: n + 1,
            message,
        };
        let record: ImageRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        record.check().map_err(|e| parse_err(e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[ImageRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records(&mut out, records).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records(out: &mut (impl Write + ?Sized), records: &[ImageRecord]) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut *out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_line_format() {
        let mut r = ImageRecord::new("a/b.jpg", "s1", Gender::Woman, Source::Lfw);
        r.split = Some(Split::Val);
        let mut buf = Vec::new();
        write_records(&mut buf, &[r.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"path\":\"a/b.jpg\",\"subject_id\":\"s1\",\"label\":\"Woman\",\"source\":\"LFW\",\"split\":\"val\"}\n"
        );
        let back = parse_manifest(text.as_bytes(), Path::new("m")).unwrap();
        assert_eq!(back, vec![r]);
    }

    #[test]
    fn empty_path_and_bad_json_report_line() {
        let text = "\n{\"path\":\"\",\"subject_id\":\"s\",\"label\":\"Man\",\"source\":\"Other\"}\n";
        assert!(matches!(
            parse_manifest(text.as_bytes(), Path::new("m")),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "{\"path\":\"x\",\"subject_id\":\"s\",\"label\":\"Child\",\"source\":\"Other\"}\n";
        assert!(parse_manifest(text.as_bytes(), Path::new("m")).is_err());
    }
}
