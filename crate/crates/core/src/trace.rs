//! Append-only explore trace with a sliding-window view and line-delimited
//! persistence.
//!
//! # File format
//!
//! UTF-8, one JSON object per line, `\n` terminated (conventional extension
//! `.trace.jsonl`). The first line is the metadata record, every following
//! line is one step. Keys appear in exactly this order:
//!
//! ```text
//! {"record":"meta","format":"dusar-trace/1","task":"...","window_size":10,"mode":"full"}
//! {"record":"step","step":1,"observation":"...","action":"...","reward":0.0,"local_log":"...","score":25,"holistic_version":1}
//! ```
//!
//! `reward` is a finite decimal, `score` an integer in `0..=100`, and `step`
//! runs `1, 2, 3, ...` without gaps. Serialization of equal traces is
//! byte-identical.

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::score::FitnessScore;
use crate::strategy::{AgentMode, ExploreStep};

pub const DEFAULT_WINDOW: usize = 10;
pub const FORMAT_TAG: &str = "dusar-trace/1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("window size must be >= 1")]
    InvalidWindow,
    #[error("expected step index {expected}, got {got}")]
    NonConsecutive { expected: usize, got: usize },
    #[error("step {step}: reward must be finite")]
    NonFiniteReward { step: usize },
    #[error("trace document is empty (missing metadata record)")]
    Empty,
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: &'static str,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExploreTrace {
    task_instruction: String,
    window_size: usize,
    mode: AgentMode,
    steps: Vec<ExploreStep>,
}

impl ExploreTrace {
    pub fn new(
        task_instruction: impl Into<String>,
        window_size: usize,
        mode: AgentMode,
    ) -> Result<Self, TraceError> {
        if window_size == 0 {
            return Err(TraceError::InvalidWindow);
        }
        Ok(ExploreTrace {
            task_instruction: task_instruction.into(),
            window_size,
            mode,
            steps: Vec::new(),
        })
    }

    pub fn task_instruction(&self) -> &str {
        &self.task_instruction
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn mode(&self) -> AgentMode {
        self.mode
    }

    pub fn steps(&self) -> &[ExploreStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&ExploreStep> {
        self.steps.last()
    }

    /// Appends the next step. Storage keeps the full history; only
    /// [`window`](Self::window) is truncated.
    pub fn append(&mut self, step: ExploreStep) -> Result<(), TraceError> {
        let expected = self.steps.len() + 1;
        if step.step_index != expected {
            return Err(TraceError::NonConsecutive {
                expected,
                got: step.step_index,
            });
        }
        if !step.reward.is_finite() {
            return Err(TraceError::NonFiniteReward {
                step: step.step_index,
            });
        }
        self.steps.push(step);
        Ok(())
    }

    /// The last `min(K, len)` steps, oldest first.
    pub fn window(&self) -> &[ExploreStep] {
        let start = self.steps.len().saturating_sub(self.window_size);
        &self.steps[start..]
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let meta = MetaRecord {
            record: "meta",
            format: FORMAT_TAG,
            task: &self.task_instruction,
            window_size: self.window_size,
            mode: self.mode,
        };
        push_line(&mut out, &meta);
        for s in &self.steps {
            let rec = StepRecord {
                record: "step",
                step: s.step_index,
                observation: &s.observation,
                action: &s.action,
                reward: s.reward,
                local_log: &s.local_log,
                score: s.score.value(),
                holistic_version: s.holistic_version,
            };
            push_line(&mut out, &rec);
        }
        out
    }

    /// Strict parse: any schema or invariant violation is an error.
    pub fn deserialize(text: &str) -> Result<Self, TraceError> {
        let raw = RawTrace::parse(text)?;
        if let Some(v) = raw.violations().into_iter().next() {
            return Err(v);
        }
        raw.into_trace()
    }
}

fn push_line<T: Serialize>(out: &mut String, value: &T) {
    // Only string/integer/finite-float fields: serialization cannot fail.
    out.push_str(&serde_json::to_string(value).expect("trace record serializes"));
    out.push('\n');
}

#[derive(Serialize)]
struct MetaRecord<'a> {
    record: &'static str,
    format: &'static str,
    task: &'a str,
    window_size: usize,
    mode: AgentMode,
}

#[derive(Serialize)]
struct StepRecord<'a> {
    record: &'static str,
    step: usize,
    observation: &'a str,
    action: &'a str,
    reward: f64,
    local_log: &'a str,
    score: u8,
    holistic_version: u32,
}

/// A step record as written, before invariant checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStep {
    pub line: usize,
    pub step: i64,
    pub observation: String,
    pub action: String,
    pub reward: f64,
    pub local_log: String,
    pub score: i64,
    pub holistic_version: u32,
}

/// Structurally parsed trace document whose invariants may not hold yet.
///
/// Replay uses this to list every violation instead of stopping at the first.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrace {
    pub task_instruction: String,
    pub window_size: usize,
    pub mode: AgentMode,
    pub steps: Vec<RawStep>,
}

impl RawTrace {
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (meta_line, meta_text) = lines.next().ok_or(TraceError::Empty)?;
        let meta = parse_object(meta_line, meta_text)?;
        expect_record(meta_line, &meta, "meta")?;
        let format = get_str(meta_line, &meta, "format")?;
        if format != FORMAT_TAG {
            return Err(TraceError::Field {
                line: meta_line,
                field: "format",
                message: format!("unsupported format `{format}`"),
            });
        }
        let task_instruction = get_str(meta_line, &meta, "task")?;
        let window_size = get_int(meta_line, &meta, "window_size")?;
        if window_size < 1 {
            return Err(TraceError::Field {
                line: meta_line,
                field: "window_size",
                message: format!("{window_size} is not >= 1"),
            });
        }
        let mode = get_str(meta_line, &meta, "mode")?
            .parse::<AgentMode>()
            .map_err(|message| TraceError::Field {
                line: meta_line,
                field: "mode",
                message,
            })?;

        let mut steps = Vec::new();
        for (line, text) in lines {
            let obj = parse_object(line, text)?;
            expect_record(line, &obj, "step")?;
            let version = get_int(line, &obj, "holistic_version")?;
            let holistic_version = u32::try_from(version).map_err(|_| TraceError::Field {
                line,
                field: "holistic_version",
                message: format!("{version} is not a valid version"),
            })?;
            steps.push(RawStep {
                line,
                step: get_int(line, &obj, "step")?,
                observation: get_str(line, &obj, "observation")?,
                action: get_str(line, &obj, "action")?,
                reward: get_float(line, &obj, "reward")?,
                local_log: get_str(line, &obj, "local_log")?,
                score: get_int(line, &obj, "score")?,
                holistic_version,
            });
        }
        Ok(RawTrace {
            task_instruction,
            window_size: window_size as usize,
            mode,
            steps,
        })
    }

    /// Every index-continuity and score-range violation, in file order.
    pub fn violations(&self) -> Vec<TraceError> {
        let mut out = Vec::new();
        for (i, s) in self.steps.iter().enumerate() {
            let expected = i as i64 + 1;
            if s.step != expected {
                out.push(TraceError::Field {
                    line: s.line,
                    field: "step",
                    message: format!("expected {expected}, got {}", s.step),
                });
            }
            if FitnessScore::new(s.score).is_err() {
                out.push(TraceError::Field {
                    line: s.line,
                    field: "score",
                    message: format!("{} is outside 0..=100", s.score),
                });
            }
        }
        out
    }

    pub fn into_trace(self) -> Result<ExploreTrace, TraceError> {
        let mut trace = ExploreTrace::new(self.task_instruction, self.window_size, self.mode)?;
        for s in self.steps {
            let line = s.line;
            let score = FitnessScore::new(s.score).map_err(|e| TraceError::Field {
                line,
                field: "score",
                message: e.to_string(),
            })?;
            let step_index = usize::try_from(s.step).map_err(|_| TraceError::Field {
                line,
                field: "step",
                message: format!("{} is not a valid index", s.step),
            })?;
            trace
                .append(ExploreStep {
                    step_index,
                    observation: s.observation,
                    action: s.action,
                    reward: s.reward,
                    local_log: s.local_log,
                    score,
                    holistic_version: s.holistic_version,
                })
                .map_err(|e| TraceError::Field {
                    line,
                    field: "step",
                    message: e.to_string(),
                })?;
        }
        Ok(trace)
    }
}

fn parse_object(line: usize, text: &str) -> Result<Map<String, Value>, TraceError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(TraceError::Malformed {
            line,
            message: "record is not an object".into(),
        }),
        Err(e) => Err(TraceError::Malformed {
            line,
            message: e.to_string(),
        }),
    }
}

fn expect_record(line: usize, obj: &Map<String, Value>, kind: &str) -> Result<(), TraceError> {
    let got = get_str(line, obj, "record")?;
    if got != kind {
        return Err(TraceError::Field {
            line,
            field: "record",
            message: format!("expected `{kind}`, got `{got}`"),
        });
    }
    Ok(())
}

fn field<'a>(
    line: usize,
    obj: &'a Map<String, Value>,
    name: &'static str,
) -> Result<&'a Value, TraceError> {
    obj.get(name).ok_or(TraceError::Field {
        line,
        field: name,
        message: "missing".into(),
    })
}

fn get_str(line: usize, obj: &Map<String, Value>, name: &'static str) -> Result<String, TraceError> {
    field(line, obj, name)?
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| TraceError::Field {
            line,
            field: name,
            message: "expected a string".into(),
        })
}

fn get_int(line: usize, obj: &Map<String, Value>, name: &'static str) -> Result<i64, TraceError> {
    field(line, obj, name)?.as_i64().ok_or_else(|| TraceError::Field {
        line,
        field: name,
        message: "expected an integer".into(),
    })
}

fn get_float(line: usize, obj: &Map<String, Value>, name: &'static str) -> Result<f64, TraceError> {
    field(line, obj, name)?.as_f64().ok_or_else(|| TraceError::Field {
        line,
        field: name,
        message: "expected a number".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(i: usize, score: u8) -> ExploreStep {
        ExploreStep {
            step_index: i,
            observation: format!("obs {i}"),
            action: format!("act {i}"),
            reward: 0.0,
            local_log: String::new(),
            score: FitnessScore::new(score as i64).unwrap(),
            holistic_version: 1,
        }
    }

    fn trace_of(n: usize) -> ExploreTrace {
        let mut t = ExploreTrace::new("task", DEFAULT_WINDOW, AgentMode::Full).unwrap();
        for i in 1..=n {
            t.append(step(i, 25)).unwrap();
        }
        t
    }

    #[test]
    fn append_base_case() {
        let t = trace_of(1);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn window_boundaries() {
        assert!(trace_of(0).window().is_empty());
        let t = trace_of(10);
        assert_eq!(t.window(), t.steps());
        let t = trace_of(12);
        let idx: Vec<_> = t.window().iter().map(|s| s.step_index).collect();
        assert_eq!(idx, (3..=12).collect::<Vec<_>>());
        let t = trace_of(25);
        let idx: Vec<_> = t.window().iter().map(|s| s.step_index).collect();
        assert_eq!(idx, (16..=25).collect::<Vec<_>>());
        assert_eq!(t.len(), 25);
    }

    #[test]
    fn append_rejects_gaps_and_duplicates() {
        let mut t = trace_of(2);
        assert_eq!(
            t.append(step(4, 1)),
            Err(TraceError::NonConsecutive { expected: 3, got: 4 })
        );
        assert_eq!(
            t.append(step(2, 1)),
            Err(TraceError::NonConsecutive { expected: 3, got: 2 })
        );
        let mut bad = step(3, 1);
        bad.reward = f64::NAN;
        assert_eq!(t.append(bad), Err(TraceError::NonFiniteReward { step: 3 }));
    }

    #[test]
    fn zero_window_rejected() {
        assert_eq!(
            ExploreTrace::new("t", 0, AgentMode::Full),
            Err(TraceError::InvalidWindow)
        );
    }

    #[test]
    fn empty_trace_is_header_only() {
        let t = trace_of(0);
        let text = t.serialize();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(
            text,
            "{\"record\":\"meta\",\"format\":\"dusar-trace/1\",\"task\":\"task\",\"window_size\":10,\"mode\":\"full\"}\n"
        );
        assert_eq!(ExploreTrace::deserialize(&text).unwrap(), t);
    }

    #[test]
    fn empty_document_is_error() {
        assert_eq!(ExploreTrace::deserialize(""), Err(TraceError::Empty));
    }

    #[test]
    fn score_101_rejected_with_field_error() {
        let text = trace_of(2).serialize().replace("\"score\":25,\"holistic_version\":1}\n{\"record\":\"step\",\"step\":2", "\"score\":101,\"holistic_version\":1}\n{\"record\":\"step\",\"step\":2");
        let err = ExploreTrace::deserialize(&text).unwrap_err();
        match err {
            TraceError::Field { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "score");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gap_in_file_is_reported() {
        let text = trace_of(3).serialize().replace("\"step\":2", "\"step\":5");
        let raw = RawTrace::parse(&text).unwrap();
        let v = raw.violations();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], TraceError::Field { line: 3, field: "step", .. }));
    }

    #[test]
    fn missing_field_named() {
        let text = trace_of(1).serialize().replace(",\"action\":\"act 1\"", "");
        assert!(matches!(
            ExploreTrace::deserialize(&text),
            Err(TraceError::Field { line: 2, field: "action", .. })
        ));
    }

    #[test]
    fn garbage_line_is_malformed() {
        let text = format!("{}not json\n", trace_of(1).serialize());
        assert!(matches!(
            ExploreTrace::deserialize(&text),
            Err(TraceError::Malformed { line: 3, .. })
        ));
    }

    fn arb_step_body() -> impl Strategy<Value = (String, String, f64, String, u8, u32)> {
        (
            any::<String>(),
            "[a-z ]{0,20}",
            prop_oneof![Just(0.0), Just(1.0), -1e6f64..1e6f64],
            any::<String>(),
            0u8..=100,
            0u32..50,
        )
    }

    proptest! {
        #[test]
        fn round_trip_and_byte_stable(
            task in any::<String>(),
            window in 1usize..20,
            mode_idx in 0usize..5,
            bodies in proptest::collection::vec(arb_step_body(), 0..15),
        ) {
            let mut t = ExploreTrace::new(task, window, AgentMode::ALL[mode_idx]).unwrap();
            for (i, (obs, act, reward, log, score, ver)) in bodies.into_iter().enumerate() {
                t.append(ExploreStep {
                    step_index: i + 1,
                    observation: obs,
                    action: act,
                    reward,
                    local_log: log,
                    score: FitnessScore::new(score as i64).unwrap(),
                    holistic_version: ver,
                }).unwrap();
            }
            let text = t.serialize();
            let back = ExploreTrace::deserialize(&text).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(back.serialize(), text);
            prop_assert!(t.window().len() <= window);
            prop_assert_eq!(t.window().len(), window.min(t.len()));
            if let Some(last) = t.window().last() {
                prop_assert_eq!(last.step_index, t.len());
            }
        }
    }
}
