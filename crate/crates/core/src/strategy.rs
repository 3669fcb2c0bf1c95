use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::score::FitnessScore;

/// Versioned high-level plan: ordered sub-goals plus free-form rationale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolisticStrategy {
    pub version: u32,
    pub subgoals: Vec<String>,
    pub rationale: String,
    /// Step at which this version was produced; `0` for the initial plan.
    pub created_at_step: usize,
    /// Set when the completion had no list structure and was kept as one sub-goal.
    #[serde(default)]
    pub parse_warning: bool,
}

impl HolisticStrategy {
    /// Renders the plan as a numbered list, one sub-goal per line.
    pub fn numbered(&self) -> String {
        self.subgoals
            .iter()
            .enumerate()
            .map(|(i, g)| format!("{}. {}", i + 1, g))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Step-level guidance produced from the current observation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStrategy {
    pub guidance: String,
    pub candidate_actions: Vec<String>,
    pub alignment_note: String,
}

impl LocalStrategy {
    pub fn is_empty(&self) -> bool {
        self.guidance.is_empty() && self.candidate_actions.is_empty() && self.alignment_note.is_empty()
    }
}

/// One entry of the explore trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreStep {
    pub step_index: usize,
    /// Observation received after `action` was executed.
    pub observation: String,
    pub action: String,
    pub reward: f64,
    pub local_log: String,
    pub score: FitnessScore,
    /// Holistic plan version in effect while the step was taken; `0` when no plan exists.
    pub holistic_version: u32,
}

/// Which reflecting calls run each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    #[default]
    Full,
    HolisticOnly,
    LocalOnly,
    NaiveConcat,
    ReactBaseline,
}

impl AgentMode {
    pub const ALL: [AgentMode; 5] = [
        AgentMode::Full,
        AgentMode::HolisticOnly,
        AgentMode::LocalOnly,
        AgentMode::NaiveConcat,
        AgentMode::ReactBaseline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentMode::Full => "full",
            AgentMode::HolisticOnly => "holistic_only",
            AgentMode::LocalOnly => "local_only",
            AgentMode::NaiveConcat => "naive_concat",
            AgentMode::ReactBaseline => "react_baseline",
        }
    }
}

impl fmt::Display for AgentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "full" => Ok(AgentMode::Full),
            "holistic_only" | "oh" => Ok(AgentMode::HolisticOnly),
            "local_only" | "ol" => Ok(AgentMode::LocalOnly),
            "naive_concat" | "na" => Ok(AgentMode::NaiveConcat),
            "react_baseline" | "react" => Ok(AgentMode::ReactBaseline),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_round_trip() {
        for mode in AgentMode::ALL {
            assert_eq!(mode.as_str().parse::<AgentMode>().unwrap(), mode);
        }
        assert_eq!("OH".parse::<AgentMode>().unwrap(), AgentMode::HolisticOnly);
        assert!("bogus".parse::<AgentMode>().is_err());
    }

    #[test]
    fn numbered_plan() {
        let plan = HolisticStrategy {
            version: 1,
            subgoals: vec!["Locate apple".into(), "Pick up apple".into()],
            rationale: String::new(),
            created_at_step: 0,
            parse_warning: false,
        };
        assert_eq!(plan.numbered(), "1. Locate apple\n2. Pick up apple");
    }
}
