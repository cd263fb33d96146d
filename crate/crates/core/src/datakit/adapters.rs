//! Turning raw dataset metadata into manifest records.
//!
//! Each adapter keeps records with an unambiguous gender label and counts the
//! rest as excluded.

use std::io::BufRead;
use std::path::Path;

use super::{ImageRecord, Source};
use crate::error::{Error, Result};
use crate::score::Gender;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Imported {
    pub records: Vec<ImageRecord>,
    pub excluded: usize,
}

/// Adience fold file (`fold_N_data.txt`): tab-separated with a header row and
/// columns `user_id, original_image, face_id, age, gender, ...`.
///
/// Images resolve to `<root>/<user_id>/coarse_tilt_aligned_face.<face_id>.<original_image>`.
/// The subject is `<user_id>/<face_id>`. Gender `m`/`f` is kept; `u` or blank
/// is excluded.
pub fn adience_fold(reader: impl BufRead, root: &Path, origin: &Path) -> Result<Imported> {
    let mut out = Imported::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if n == 0 && line.starts_with("user_id") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 5 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: n + 1,
                message: format!("expected at least 5 tab-separated columns, found {}", cols.len()),
            });
        }
        let (user, image, face, gender) = (cols[0].trim(), cols[1].trim(), cols[2].trim(), cols[4].trim());
        let label = match gender {
            "m" => Gender::Man,
            "f" => Gender::Woman,
            _ => {
                out.excluded += 1;
                continue;
            }
        };
        out.records.push(ImageRecord::new(
            root.join(user)
                .join(format!("coarse_tilt_aligned_face.{face}.{image}")),
            format!("{user}/{face}"),
            label,
            Source::Adience,
        ));
    }
    Ok(out)
}

/// LFW gender list: one image file name per line (`Name_Surname_0001.jpg`).
/// Images resolve to `<root>/<Name_Surname>/<file>`; the subject is the name.
pub fn lfw_names(reader: impl BufRead, label: Gender, root: &Path, origin: &Path) -> Result<Imported> {
    let mut out = Imported::default();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let file = line.trim();
        if file.is_empty() {
            continue;
        }
        match lfw_subject(file) {
            Some(subject) => out.records.push(ImageRecord::new(
                root.join(subject).join(file),
                subject,
                label,
                Source::Lfw,
            )),
            None => out.excluded += 1,
        }
    }
    Ok(out)
}

fn lfw_subject(file: &str) -> Option<&str> {
    let stem = file.rsplit_once('.').map_or(file, |(s, _)| s);
    let (name, number) = stem.rsplit_once('_')?;
    (!name.is_empty() && !number.is_empty() && number.chars().all(|c| c.is_ascii_digit())).then_some(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adience_rows() {
        let text = "user_id\toriginal_image\tface_id\tage\tgender\tx\n\
                    u1\t100.jpg\t5\t(25, 32)\tm\t0\n\
                    u1\t101.jpg\t6\t(25, 32)\tf\t0\n\
                    u2\t102.jpg\t1\t(0, 2)\tu\t0\n\
                    u2\t103.jpg\t2\tNone\t\t0\n";
        let got = adience_fold(text.as_bytes(), Path::new("faces"), Path::new("fold0")).unwrap();
        assert_eq!(got.excluded, 2);
        assert_eq!(got.records.len(), 2);
        assert_eq!(got.records[0].path, Path::new("faces/u1/coarse_tilt_aligned_face.5.100.jpg"));
        assert_eq!(got.records[1].subject_id, "u1/6");
        assert_eq!(got.records[1].label, Gender::Woman);
    }

    #[test]
    fn lfw_rows() {
        let text = "Aaron_Eckhart_0001.jpg\nbadname.jpg\n\nAJ_Cook_0002.jpg\n";
        let got = lfw_names(text.as_bytes(), Gender::Man, Path::new("lfw"), Path::new("male.txt")).unwrap();
        assert_eq!(got.excluded, 1);
        assert_eq!(got.records[0].subject_id, "Aaron_Eckhart");
        assert_eq!(got.records[1].path, Path::new("lfw/AJ_Cook/AJ_Cook_0002.jpg"));
    }
}
