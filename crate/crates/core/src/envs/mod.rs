//! Environments the agent loop can drive, plus the deterministic TextHouse
//! world and its breadth-first planner.
//!
//! An environment only has to produce text observations and a list of legal
//! action strings; nothing in the loop depends on TextHouse specifics. A DOM
//! adapter, for example, would render the top-ranked elements as the
//! observation and expose `CLICK [id]`-style actions.

mod generate;
mod planner;
mod taskfile;
mod texthouse;

use std::any::Any;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_task, generate_tasks, min_plan_length};
pub use planner::{oracle_plan, plan_from};
pub use taskfile::{load_task_file, parse_task_file};
pub use texthouse::{Goal, Layout, ObjectDef, Receptacle, TaskSpec, TextHouse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("illegal action `{action}`")]
    IllegalAction { action: String },
    #[error("task is unsolvable: {0}")]
    Unsolvable(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("task file line {line}: {message}")]
    TaskFile { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub text: String,
    pub available: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: String,
    pub reward: f64,
    pub done: bool,
    pub available: Vec<String>,
}

pub trait Environment: Send {
    /// Restores the initial state and returns the first observation.
    fn reset(&mut self) -> Observation;

    /// Executes one action from the current available set.
    fn step(&mut self, action: &str) -> Result<StepOutcome, EnvError>;

    /// Ground-truth goal predicate.
    fn goal_satisfied(&self) -> bool;

    fn instruction(&self) -> &str;

    fn task_type(&self) -> &str;

    fn as_any(&self) -> &dyn Any;
}

/// The six household task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskFamily {
    Put,
    Examine,
    Clean,
    Heat,
    Cool,
    PutTwo,
}

impl TaskFamily {
    pub const ALL: [TaskFamily; 6] = [
        TaskFamily::Put,
        TaskFamily::Examine,
        TaskFamily::Clean,
        TaskFamily::Heat,
        TaskFamily::Cool,
        TaskFamily::PutTwo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskFamily::Put => "put",
            TaskFamily::Examine => "examine",
            TaskFamily::Clean => "clean",
            TaskFamily::Heat => "heat",
            TaskFamily::Cool => "cool",
            TaskFamily::PutTwo => "puttwo",
        }
    }

    /// How many objects the agent may hold at once.
    pub fn capacity(self) -> usize {
        match self {
            TaskFamily::PutTwo => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskFamily {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "put" | "pickandplace" => Ok(TaskFamily::Put),
            "examine" | "lookatobj" => Ok(TaskFamily::Examine),
            "clean" | "pickcleanthenplace" => Ok(TaskFamily::Clean),
            "heat" | "pickheatthenplace" => Ok(TaskFamily::Heat),
            "cool" | "pickcoolthenplace" => Ok(TaskFamily::Cool),
            "puttwo" | "picktwoobj" => Ok(TaskFamily::PutTwo),
            other => Err(EnvError::InvalidTask(format!("unknown task type `{other}`"))),
        }
    }
}
