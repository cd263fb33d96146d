//! Fusion of the three per-crop scores into one decision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::{Gender, GenderScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    /// Mean of the three probability vectors, then argmax.
    #[default]
    SoftMean,
    /// Each crop votes its argmax; two votes win.
    HardMajority,
}

impl FromStr for VoteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" | "soft_mean" => Ok(VoteMode::SoftMean),
            "hard" | "hard_majority" => Ok(VoteMode::HardMajority),
            other => Err(Error::InvalidInput(format!("unknown vote mode {other:?}"))),
        }
    }
}

impl fmt::Display for VoteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VoteMode::SoftMean => "soft_mean",
            VoteMode::HardMajority => "hard_majority",
        })
    }
}

/// How a [`Decision`] was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSource {
    Ensemble(VoteMode),
    SingleCrop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: Gender,
    pub aggregate: GenderScore,
    /// Inputs in the order they were supplied.
    pub per_crop: Vec<GenderScore>,
    pub source: DecisionSource,
    /// Set when the aggregate is exactly (0.5, 0.5) and the label fell back to Man.
    pub tie: bool,
}

impl Decision {
    /// The parts of a decision that must not depend on input order.
    pub fn outcome(&self) -> (Gender, GenderScore, bool) {
        (self.label, self.aggregate, self.tie)
    }
}

/// Combines exactly three per-crop scores.
pub fn aggregate(scores: &[GenderScore], mode: VoteMode) -> Result<Decision> {
    let [a, b, c] = scores else {
        return Err(Error::InvalidInput(format!(
            "aggregation needs exactly 3 scores, got {}",
            scores.len()
        )));
    };
    let aggregate = match mode {
        VoteMode::SoftMean => {
            let p_man = order_free_mean([a.p_man(), b.p_man(), c.p_man()]);
            let p_woman = order_free_mean([a.p_woman(), b.p_woman(), c.p_woman()]);
            GenderScore::from_masses(p_man, p_woman)?
        }
        VoteMode::HardMajority => {
            let men = [a, b, c].iter().filter(|s| s.argmax() == Gender::Man).count();
            GenderScore::from_masses(men as f64, (3 - men) as f64)?
        }
    };
    Ok(Decision {
        label: aggregate.argmax(),
        aggregate,
        per_crop: scores.to_vec(),
        source: DecisionSource::Ensemble(mode),
        tie: aggregate.is_tie(),
    })
}

/// The single-crop baseline: argmax of one score.
pub fn single_crop_decision(score: GenderScore) -> Decision {
    Decision {
        label: score.argmax(),
        aggregate: score,
        per_crop: vec![score],
        source: DecisionSource::SingleCrop,
        tie: score.is_tie(),
    }
}

// Summing in sorted order makes the float result independent of input order.
fn order_free_mean(mut values: [f64; 3]) -> f64 {
    values.sort_by(f64::total_cmp);
    (values[0] + values[1] + values[2]) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p_man: f64) -> GenderScore {
        GenderScore::from_p_man(p_man)
    }

    #[test]
    fn hard_two_men_one_woman_is_man() {
        let d = aggregate(&[s(0.9), s(0.8), s(0.1)], VoteMode::HardMajority).unwrap();
        assert_eq!(d.label, Gender::Man);
    }

    #[test]
    fn hard_unanimous_woman() {
        let d = aggregate(&[s(0.1), s(0.2), s(0.3)], VoteMode::HardMajority).unwrap();
        assert_eq!(d.label, Gender::Woman);
        assert_eq!((d.aggregate.p_man(), d.aggregate.p_woman()), (0.0, 1.0));
    }

    #[test]
    fn soft_mean_example() {
        let scores = [
            GenderScore::new(0.9, 0.1).unwrap(),
            GenderScore::new(0.6, 0.4).unwrap(),
            GenderScore::new(0.2, 0.8).unwrap(),
        ];
        let d = aggregate(&scores, VoteMode::SoftMean).unwrap();
        assert!((d.aggregate.p_man() - 1.7 / 3.0).abs() < 1e-12);
        assert!((d.aggregate.p_woman() - 1.3 / 3.0).abs() < 1e-12);
        assert_eq!(format!("{:.4}", d.aggregate.p_man()), "0.5667");
        assert_eq!(d.label, Gender::Man);
        assert!(!d.tie);
    }

    #[test]
    fn wrong_arity_is_rejected() {
        assert!(aggregate(&[s(0.5), s(0.5)], VoteMode::SoftMean).is_err());
        assert!(aggregate(&[s(0.5); 4], VoteMode::HardMajority).is_err());
        assert!(aggregate(&[], VoteMode::HardMajority).is_err());
    }

    #[test]
    fn soft_tie_goes_to_man_with_flag() {
        let d = aggregate(&[s(0.5), s(0.5), s(0.5)], VoteMode::SoftMean).unwrap();
        assert_eq!(d.label, Gender::Man);
        assert!(d.tie);
    }

    #[test]
    fn single_crop_examples() {
        assert_eq!(single_crop_decision(s(0.7)).label, Gender::Man);
        let tie = single_crop_decision(GenderScore::new(0.5, 0.5).unwrap());
        assert_eq!(tie.label, Gender::Man);
        assert!(tie.tie);
        assert_eq!(single_crop_decision(s(0.3)).label, Gender::Woman);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("soft".parse::<VoteMode>().unwrap(), VoteMode::SoftMean);
        assert_eq!("hard".parse::<VoteMode>().unwrap(), VoteMode::HardMajority);
        assert!("median".parse::<VoteMode>().is_err());
    }
}
