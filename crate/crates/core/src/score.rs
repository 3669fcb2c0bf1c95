//! Strategy fitness scores and the directive state machine that decides,
//! at the start of every step, whether the holistic plan is initialized,
//! revised, kept, or whether the episode is over.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("fitness score {0} is outside 0..=100")]
    OutOfRange(i64),
    #[error("step index must be >= 1")]
    ZeroStep,
    #[error("step {0} requires the previous step's score")]
    MissingPrevScore(usize),
    #[error("step 1 has no previous score, got {0}")]
    UnexpectedPrevScore(FitnessScore),
}

/// Progress judgement for a single step, an integer in `0..=100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct FitnessScore(u8);

impl FitnessScore {
    pub const MIN: FitnessScore = FitnessScore(0);
    pub const MAX: FitnessScore = FitnessScore(100);

    pub fn new(value: i64) -> Result<Self, ScoreError> {
        if (0..=100).contains(&value) {
            Ok(FitnessScore(value as u8))
        } else {
            Err(ScoreError::OutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn band(self) -> FitnessBand {
        match self.0 {
            0 => FitnessBand::NoProgress,
            1..=49 => FitnessBand::Ongoing,
            50..=99 => FitnessBand::Milestone,
            _ => FitnessBand::Complete,
        }
    }
}

impl TryFrom<i64> for FitnessScore {
    type Error = ScoreError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        FitnessScore::new(value)
    }
}

impl From<FitnessScore> for u8 {
    fn from(score: FitnessScore) -> u8 {
        score.0
    }
}

impl fmt::Display for FitnessScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitnessBand {
    /// `0`: stagnation.
    NoProgress,
    /// `1..=49`: still working inside the current sub-goal.
    Ongoing,
    /// `50..=99`: a sub-goal was reached.
    Milestone,
    /// `100`: the whole task is done.
    Complete,
}

/// Maps a raw integer to its band, rejecting anything outside `0..=100`.
pub fn classify_score(value: i64) -> Result<FitnessBand, ScoreError> {
    FitnessScore::new(value).map(FitnessScore::band)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyDirective {
    UseInitial,
    Update,
    Maintain,
    Terminate,
}

/// Directive for step `step_index`, computed from the score of the step before it.
///
/// `prev_score` must be `None` exactly when `step_index == 1`.
pub fn next_directive(
    step_index: usize,
    prev_score: Option<FitnessScore>,
) -> Result<StrategyDirective, ScoreError> {
    match (step_index, prev_score) {
        (0, _) => Err(ScoreError::ZeroStep),
        (1, None) => Ok(StrategyDirective::UseInitial),
        (1, Some(s)) => Err(ScoreError::UnexpectedPrevScore(s)),
        (t, None) => Err(ScoreError::MissingPrevScore(t)),
        (_, Some(s)) => Ok(match s.band() {
            FitnessBand::NoProgress | FitnessBand::Milestone => StrategyDirective::Update,
            FitnessBand::Ongoing => StrategyDirective::Maintain,
            FitnessBand::Complete => StrategyDirective::Terminate,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> FitnessScore {
        FitnessScore::new(v).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_score(0), Ok(FitnessBand::NoProgress));
        assert_eq!(classify_score(25), Ok(FitnessBand::Ongoing));
        assert_eq!(classify_score(50), Ok(FitnessBand::Milestone));
        assert_eq!(classify_score(100), Ok(FitnessBand::Complete));
        assert_eq!(classify_score(49), Ok(FitnessBand::Ongoing));
        assert_eq!(classify_score(99), Ok(FitnessBand::Milestone));
        assert_eq!(classify_score(1), Ok(FitnessBand::Ongoing));
    }

    #[test]
    fn classify_rejects_out_of_range() {
        assert_eq!(classify_score(101), Err(ScoreError::OutOfRange(101)));
        assert_eq!(classify_score(-1), Err(ScoreError::OutOfRange(-1)));
    }

    #[test]
    fn directive_examples() {
        assert_eq!(next_directive(1, None), Ok(StrategyDirective::UseInitial));
        assert_eq!(next_directive(7, Some(s(0))), Ok(StrategyDirective::Update));
        assert_eq!(next_directive(4, Some(s(30))), Ok(StrategyDirective::Maintain));
        assert_eq!(next_directive(9, Some(s(100))), Ok(StrategyDirective::Terminate));
    }

    #[test]
    fn directive_contract_violations() {
        assert_eq!(next_directive(0, None), Err(ScoreError::ZeroStep));
        assert_eq!(next_directive(3, None), Err(ScoreError::MissingPrevScore(3)));
        assert!(matches!(
            next_directive(1, Some(s(10))),
            Err(ScoreError::UnexpectedPrevScore(_))
        ));
    }

    #[test]
    fn bands_partition_the_range() {
        let mut counts = [0usize; 4];
        for v in 0..=100 {
            let idx = match classify_score(v).unwrap() {
                FitnessBand::NoProgress => 0,
                FitnessBand::Ongoing => 1,
                FitnessBand::Milestone => 2,
                FitnessBand::Complete => 3,
            };
            counts[idx] += 1;
        }
        assert_eq!(counts, [1, 49, 50, 1]);
    }

    #[test]
    fn update_exactly_on_zero_and_milestones() {
        for v in 0..=100 {
            let d = next_directive(2, Some(s(v))).unwrap();
            let expect_update = v == 0 || (50..=99).contains(&v);
            assert_eq!(d == StrategyDirective::Update, expect_update, "score {v}");
        }
    }

    #[test]
    fn serde_rejects_out_of_range() {
        assert!(serde_json::from_str::<FitnessScore>("101").is_err());
        assert_eq!(serde_json::from_str::<FitnessScore>("75").unwrap(), s(75));
        assert_eq!(serde_json::to_string(&s(75)).unwrap(), "75");
    }
}
