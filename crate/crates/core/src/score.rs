//! Class labels and per-class probability vectors shared by inference,
//! aggregation and evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `p_man + p_woman = 1`.
pub const SCORE_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    Man,
    Woman,
}

impl Gender {
    /// Canonical class order. Ties resolve to the first entry.
    pub const CANONICAL: [Gender; 2] = [Gender::Man, Gender::Woman];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Man => "Man",
            Gender::Woman => "Woman",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "man" | "male" | "m" => Ok(Gender::Man),
            "woman" | "female" | "f" => Ok(Gender::Woman),
            other => Err(Error::InvalidInput(format!("unknown gender label {other:?}"))),
        }
    }
}

/// Probability vector over {Man, Woman}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScore")]
pub struct GenderScore {
    p_man: f64,
    p_woman: f64,
}

#[derive(Deserialize)]
struct RawScore {
    p_man: f64,
    p_woman: f64,
}

impl TryFrom<RawScore> for GenderScore {
    type Error = Error;

    fn try_from(raw: RawScore) -> Result<Self> {
        GenderScore::new(raw.p_man, raw.p_woman)
    }
}

impl GenderScore {
    pub fn new(p_man: f64, p_woman: f64) -> Result<Self> {
        let valid = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        if !valid(p_man) || !valid(p_woman) {
            return Err(Error::InvalidInput(format!(
                "probabilities must lie in [0, 1], got ({p_man}, {p_woman})"
            )));
        }
        if (p_man + p_woman - 1.0).abs() > SCORE_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "probabilities must sum to 1, got {p_man} + {p_woman}"
            )));
        }
        Ok(GenderScore { p_man, p_woman })
    }

    /// Score with `p_man` given and `p_woman = 1 - p_man`. `p_man` is clamped to [0, 1].
    pub fn from_p_man(p_man: f64) -> Self {
        let p_man = if p_man.is_nan() { 0.5 } else { p_man.clamp(0.0, 1.0) };
        GenderScore {
            p_man,
            p_woman: 1.0 - p_man,
        }
    }

    /// Normalizes two non-negative masses into a probability vector.
    pub fn from_masses(man: f64, woman: f64) -> Result<Self> {
        if !(man >= 0.0 && woman >= 0.0) || !(man + woman).is_finite() || man + woman <= 0.0 {
            return Err(Error::Inference(format!(
                "cannot normalize class masses ({man}, {woman})"
            )));
        }
        let total = man + woman;
        Ok(GenderScore {
            p_man: man / total,
            p_woman: woman / total,
        })
    }

    pub fn one_hot(label: Gender) -> Self {
        match label {
            Gender::Man => GenderScore { p_man: 1.0, p_woman: 0.0 },
            Gender::Woman => GenderScore { p_man: 0.0, p_woman: 1.0 },
        }
    }

    pub fn p_man(&self) -> f64 {
        self.p_man
    }

    pub fn p_woman(&self) -> f64 {
        self.p_woman
    }

    pub fn probability(&self, label: Gender) -> f64 {
        match label {
            Gender::Man => self.p_man,
            Gender::Woman => self.p_woman,
        }
    }

    /// Highest-probability label; an exact tie goes to [`Gender::Man`].
    pub fn argmax(&self) -> Gender {
        if self.p_man >= self.p_woman {
            Gender::Man
        } else {
            Gender::Woman
        }
    }

    pub fn is_tie(&self) -> bool {
        self.p_man == self.p_woman
    }
}
