use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ImageRecord, Source, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub subject_disjoint: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.50,
            val: 0.15,
            test: 0.35,
            subject_disjoint: true,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec { seed, ..SplitSpec::default() }
    }

    fn fractions(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let f = self.fractions();
        if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
            problems.push(format!("fractions must be non-negative, got {f:?}"));
        }
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            problems.push(format!("fractions must sum to 1, got {sum}"));
        }
        if !self.subject_disjoint {
            problems.push("subject_disjoint must be true".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Integer set sizes for `total` images by largest remainder; remainder
    /// ties go to the earlier split.
    pub fn target_counts(&self, total: usize) -> [usize; 3] {
        let exact = self.fractions().map(|f| f * total as f64);
        let mut counts = exact.map(|e| e.floor() as usize);
        let assigned: usize = counts.iter().sum();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().take(total.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }
}

/// Assigns every record to train, val or test so that no subject spans two
/// sets. Each source is split on its own.
///
/// Subjects are taken largest first (equal sizes in seeded random order) and
/// each goes to the set currently furthest below its target size.
pub fn split(records: &[ImageRecord], spec: &SplitSpec) -> Result<Vec<ImageRecord>> {
    spec.validate()?;
    if records.is_empty() {
        return Err(Error::Validation(vec!["record list is empty".into()]));
    }
    if let Some(r) = records.iter().find(|r| r.subject_id.is_empty()) {
        return Err(Error::Validation(vec![format!(
            "record {} has no subject_id",
            r.path.display()
        )]));
    }

    let mut by_source: BTreeMap<Source, BTreeMap<&str, Vec<usize>>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_source
            .entry(r.source)
            .or_default()
            .entry(r.subject_id.as_str())
            .or_default()
            .push(i);
    }

    let mut assignment = vec![Split::Train; records.len()];
    for (source, subjects) in &by_source {
        let total: usize = subjects.values().map(Vec::len).sum();
        if let Some((subject, images)) = subjects.iter().find(|(_, v)| 2 * v.len() > total) {
            return Err(Error::InfeasibleSplit {
                subject: subject.to_string(),
                images: images.len(),
                total,
                source_name: source.to_string(),
            });
        }

        let mut order: Vec<(&str, &Vec<usize>)> = subjects.iter().map(|(s, v)| (*s, v)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ source_salt(*source));
        order.shuffle(&mut rng);
        order.sort_by_key(|s| std::cmp::Reverse(s.1.len()));

        let targets = spec.target_counts(total);
        let mut filled = [0usize; 3];
        for (_, images) in order {
            let k = (0..3)
                .max_by(|&a, &b| {
                    let da = targets[a] as i64 - filled[a] as i64;
                    let db = targets[b] as i64 - filled[b] as i64;
                    da.cmp(&db).then(b.cmp(&a))
                })
                .expect("three splits");
            filled[k] += images.len();
            for &i in images {
                assignment[i] = Split::ALL[k];
            }
        }
    }

    Ok(records
        .iter()
        .zip(assignment)
        .map(|(r, s)| ImageRecord {
            split: Some(s),
            ..r.clone()
        })
        .collect())
}

fn source_salt(source: Source) -> u64 {
    match source {
        Source::Adience => 0,
        Source::Lfw => 0x9E37_79B9_7F4A_7C15,
        Source::Other => 0xC2B2_AE3D_27D4_EB4F,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::Gender;
    use std::collections::{HashMap, HashSet};

    fn synthetic(subjects: usize, per_subject: usize, source: Source) -> Vec<ImageRecord> {
        (0..subjects)
            .flat_map(|s| {
                (0..per_subject).map(move |i| {
                    ImageRecord::new(format!("{s}/{i}.jpg"), format!("subj{s}"), Gender::Man, source)
                })
            })
            .collect()
    }

    fn counts(records: &[ImageRecord]) -> [usize; 3] {
        let mut c = [0; 3];
        for r in records {
            c[Split::ALL.iter().position(|s| Some(*s) == r.split).unwrap()] += 1;
        }
        c
    }

    #[test]
    fn target_counts_match_published_tables() {
        let spec = SplitSpec::default();
        assert_eq!(spec.target_counts(26580), [13290, 3987, 9303]);
        assert_eq!(spec.target_counts(13233), [6616, 1985, 4632]);
        assert_eq!(spec.target_counts(100), [50, 15, 35]);
    }

    #[test]
    fn ten_subjects_of_ten() {
        let out = split(&synthetic(10, 10, Source::Other), &SplitSpec::with_seed(7)).unwrap();
        assert_eq!(counts(&out), [50, 20, 30]);
        let mut subject_split: HashMap<&str, HashSet<Split>> = HashMap::new();
        for r in &out {
            subject_split.entry(&r.subject_id).or_default().insert(r.split.unwrap());
        }
        assert!(subject_split.values().all(|s| s.len() == 1));
        let mut per_split = [0; 3];
        for s in subject_split.values() {
            per_split[Split::ALL.iter().position(|x| s.contains(x)).unwrap()] += 1;
        }
        assert_eq!(per_split, [5, 2, 3]);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(split(&[], &SplitSpec::default()), Err(Error::Validation(_))));
    }

    #[test]
    fn dominant_subject_is_infeasible() {
        let mut records = synthetic(3, 2, Source::Lfw);
        records.extend(synthetic(1, 7, Source::Lfw).into_iter().map(|mut r| {
            r.subject_id = "big".into();
            r
        }));
        match split(&records, &SplitSpec::default()) {
            Err(Error::InfeasibleSplit { subject, .. }) => assert_eq!(subject, "big"),
            other => panic!("expected infeasible split, got {other:?}"),
        }
    }

    #[test]
    fn invalid_specs() {
        let r = synthetic(4, 1, Source::Other);
        let bad_sum = SplitSpec { train: 0.6, ..SplitSpec::default() };
        assert!(split(&r, &bad_sum).is_err());
        let shared = SplitSpec { subject_disjoint: false, ..SplitSpec::default() };
        assert!(split(&r, &shared).is_err());
    }

    #[test]
    fn seed_determines_assignment() {
        let records = synthetic(40, 3, Source::Adience);
        let a = split(&records, &SplitSpec::with_seed(1)).unwrap();
        let b = split(&records, &SplitSpec::with_seed(1)).unwrap();
        assert_eq!(a, b);
        let c = split(&records, &SplitSpec::with_seed(2)).unwrap();
        assert_ne!(a, c);
    }
}
