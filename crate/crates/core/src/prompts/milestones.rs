use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileError(pub String);

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ProfileError {}

/// Task-type specific score thresholds shown to the scorer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilestoneProfile {
    pub task_type: String,
    thresholds: Vec<(String, u8)>,
}

impl MilestoneProfile {
    /// Scores must be strictly increasing and end at 100.
    pub fn new(
        task_type: impl Into<String>,
        thresholds: Vec<(String, u8)>,
    ) -> Result<Self, ProfileError> {
        let task_type = task_type.into();
        if thresholds.is_empty() {
            return Err(ProfileError(format!("profile `{task_type}` has no thresholds")));
        }
        for pair in thresholds.windows(2) {
            if pair[0].1 >= pair[1].1 {
                return Err(ProfileError(format!(
                    "profile `{task_type}`: scores not strictly increasing ({} then {})",
                    pair[0].1, pair[1].1
                )));
            }
        }
        if thresholds.last().map(|t| t.1) != Some(100) {
            return Err(ProfileError(format!("profile `{task_type}` must end at 100")));
        }
        Ok(MilestoneProfile {
            task_type,
            thresholds,
        })
    }

    pub fn thresholds(&self) -> &[(String, u8)] {
        &self.thresholds
    }

    pub fn scores(&self) -> Vec<u8> {
        self.thresholds.iter().map(|t| t.1).collect()
    }

    /// One `- <score>: <description>` line per threshold.
    pub fn render(&self) -> String {
        self.thresholds
            .iter()
            .map(|(d, s)| format!("- {s}: {d}"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Parses the scenario file format: one `<score>: <description>` per
    /// line, `#` comments and blank lines ignored.
    pub fn parse(task_type: &str, text: &str) -> Result<Self, ProfileError> {
        let mut thresholds = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let line = line.trim_start_matches('-').trim();
            let (score, desc) = line.split_once(':').ok_or_else(|| {
                ProfileError(format!("{task_type} line {}: expected `<score>: <description>`", i + 1))
            })?;
            let score: u8 = score
                .trim()
                .parse()
                .ok()
                .filter(|s| *s <= 100)
                .ok_or_else(|| ProfileError(format!("{task_type} line {}: bad score", i + 1)))?;
            thresholds.push((desc.trim().to_string(), score));
        }
        MilestoneProfile::new(task_type, thresholds)
    }
}

fn profile(task_type: &str, items: &[(&str, u8)]) -> MilestoneProfile {
    MilestoneProfile::new(
        task_type,
        items.iter().map(|(d, s)| (d.to_string(), *s)).collect(),
    )
    .expect("built-in profile is valid")
}

/// Built-in profile for a task type; unknown types get the generic profile.
pub fn milestone_profile(task_type: &str) -> MilestoneProfile {
    match task_type.trim().to_ascii_lowercase().as_str() {
        "put" => profile(
            "put",
            &[("object found", 50), ("object picked up", 75), ("object placed", 100)],
        ),
        "examine" => profile(
            "examine",
            &[
                ("both objects found", 50),
                ("object positioned under the desklamp", 75),
                ("desklamp used", 100),
            ],
        ),
        "clean" => profile(
            "clean",
            &[
                ("object picked", 50),
                ("object cleaned", 75),
                ("object placed", 90),
                ("task complete", 100),
            ],
        ),
        "heat" => profile(
            "heat",
            &[
                ("object picked", 50),
                ("object heated", 75),
                ("object placed", 90),
                ("task complete", 100),
            ],
        ),
        "cool" => profile(
            "cool",
            &[
                ("object picked", 50),
                ("object cooled", 75),
                ("object placed", 90),
                ("task complete", 100),
            ],
        ),
        "puttwo" => profile(
            "puttwo",
            &[
                ("first object found", 25),
                ("first object picked", 50),
                ("second object found", 75),
                ("second object picked", 90),
                ("both objects placed", 100),
            ],
        ),
        _ => profile(
            "generic",
            &[
                ("sub-goal reached", 50),
                ("most sub-goals reached", 75),
                ("task complete", 100),
            ],
        ),
    }
}
