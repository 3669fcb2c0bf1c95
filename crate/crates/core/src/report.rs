//! Human-readable step tables and batch summaries.
//!
//! # Summary file format
//!
//! Line-delimited JSON. One `episode` record per task in run order, then one
//! `row` record per task type (family order) and a final row with
//! `task_type` `"All"`:
//!
//! ```text
//! {"record":"episode","task_type":"put","seed":0,"mode":"full","success":true,"steps":5,"prompt_tokens":2210,"completion_tokens":160,"final_score":100,"abort_reason":null}
//! {"record":"row","task_type":"put","mode":"full","episodes":10,"successes":10,"success_rate":1.0,"mean_steps":5.4,"mean_prompt_tokens_per_step":431.2,"mean_completion_tokens_per_step":30.1}
//! ```

use std::fmt::Write as _;

use serde::Serialize;

use crate::envs::TaskFamily;
use crate::episode::EpisodeReport;
use crate::prompts::excerpt;
use crate::provider::Usage;
use crate::strategy::AgentMode;
use crate::trace::{ExploreTrace, RawTrace};

const TABLE_OBS: usize = 48;
const TABLE_ACTION: usize = 32;
const TABLE_REASON: usize = 40;

/// One row of the step table: step, observation, action, score, reasoning.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub step: i64,
    pub observation: String,
    pub action: String,
    pub score: i64,
    pub reasoning: String,
}

fn one_line(text: &str, max: usize) -> String {
    excerpt(&text.split_whitespace().collect::<Vec<_>>().join(" "), max)
}

pub fn rows_from_trace(trace: &ExploreTrace) -> Vec<TableRow> {
    trace
        .steps()
        .iter()
        .map(|s| TableRow {
            step: s.step_index as i64,
            observation: s.observation.clone(),
            action: s.action.clone(),
            score: i64::from(s.score.value()),
            reasoning: s.local_log.clone(),
        })
        .collect()
}

pub fn rows_from_raw(trace: &RawTrace) -> Vec<TableRow> {
    trace
        .steps
        .iter()
        .map(|s| TableRow {
            step: s.step,
            observation: s.observation.clone(),
            action: s.action.clone(),
            score: s.score,
            reasoning: s.local_log.clone(),
        })
        .collect()
}

pub fn render_table(rows: &[TableRow]) -> String {
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.step.to_string(),
                one_line(&r.observation, TABLE_OBS),
                one_line(&r.action, TABLE_ACTION),
                r.score.to_string(),
                one_line(r.reasoning.lines().next().unwrap_or(""), TABLE_REASON),
            ]
        })
        .collect();
    let header = ["Step", "Observation", "Action", "Score", "Reasoning"];
    let mut widths = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, row: &[String]| {
        let padded: Vec<String> = row
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        out.push_str(padded.join(" | ").trim_end());
        out.push('\n');
    };
    line(&mut out, &header.map(String::from));
    line(&mut out, &widths.map(|w| "-".repeat(w)));
    for row in &cells {
        line(&mut out, row);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub task_type: String,
    pub mode: AgentMode,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_steps: f64,
    pub mean_prompt_tokens_per_step: f64,
    pub mean_completion_tokens_per_step: f64,
}

fn row(task_type: &str, mode: AgentMode, reports: &[&EpisodeReport]) -> SummaryRow {
    let episodes = reports.len();
    let successes = reports.iter().filter(|r| r.success).count();
    let steps: usize = reports.iter().map(|r| r.per_step_usage.len()).sum();
    let usage = reports
        .iter()
        .flat_map(|r| r.per_step_usage.iter())
        .fold(Usage::default(), |a, u| a + *u);
    let per_step = |t: u64| if steps == 0 { 0.0 } else { t as f64 / steps as f64 };
    SummaryRow {
        task_type: task_type.to_string(),
        mode,
        episodes,
        successes,
        success_rate: if episodes == 0 { 0.0 } else { successes as f64 / episodes as f64 },
        mean_steps: if episodes == 0 {
            0.0
        } else {
            reports.iter().map(|r| r.steps_taken).sum::<usize>() as f64 / episodes as f64
        },
        mean_prompt_tokens_per_step: per_step(usage.prompt_tokens),
        mean_completion_tokens_per_step: per_step(usage.completion_tokens),
    }
}

/// One row per task type present (family order, unknown types after), then `All`.
pub fn summarize(reports: &[EpisodeReport]) -> Vec<SummaryRow> {
    let mode = reports.first().map_or(AgentMode::Full, |r| r.mode);
    let mut types: Vec<String> = Vec::new();
    for f in TaskFamily::ALL {
        if reports.iter().any(|r| r.task_type == f.as_str()) {
            types.push(f.as_str().to_string());
        }
    }
    for r in reports {
        if !types.contains(&r.task_type) {
            types.push(r.task_type.clone());
        }
    }
    let mut rows: Vec<SummaryRow> = types
        .iter()
        .map(|t| {
            let rs: Vec<&EpisodeReport> = reports.iter().filter(|r| &r.task_type == t).collect();
            row(t, mode, &rs)
        })
        .collect();
    rows.push(row("All", mode, &reports.iter().collect::<Vec<_>>()));
    rows
}

#[derive(Serialize)]
struct EpisodeRecord<'a> {
    record: &'static str,
    task_type: &'a str,
    seed: u64,
    mode: AgentMode,
    success: bool,
    steps: usize,
    prompt_tokens: u64,
    completion_tokens: u64,
    final_score: u8,
    abort_reason: Option<&'a str>,
}

#[derive(Serialize)]
struct RowRecord<'a> {
    record: &'static str,
    #[serde(flatten)]
    row: &'a SummaryRow,
}

pub fn summary_jsonl(reports: &[EpisodeReport], rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    for r in reports {
        let rec = EpisodeRecord {
            record: "episode",
            task_type: &r.task_type,
            seed: r.seed,
            mode: r.mode,
            success: r.success,
            steps: r.steps_taken,
            prompt_tokens: r.total_usage.prompt_tokens,
            completion_tokens: r.total_usage.completion_tokens,
            final_score: r.final_score.value(),
            abort_reason: r.abort_reason.as_deref(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    for row in rows {
        let rec = RowRecord { record: "row", row };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<10} {:>8} {:>8} {:>10} {:>14} {:>14}\n",
        "Type", "Episodes", "SR(%)", "MeanSteps", "PromptTok/step", "ComplTok/step"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>8.1} {:>10.2} {:>14.1} {:>14.1}",
            r.task_type,
            r.episodes,
            r.success_rate * 100.0,
            r.mean_steps,
            r.mean_prompt_tokens_per_step,
            r.mean_completion_tokens_per_step
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::FitnessScore;

    fn report(t: &str, success: bool, steps: usize) -> EpisodeReport {
        EpisodeReport {
            task_type: t.into(),
            seed: 0,
            mode: AgentMode::Full,
            success,
            steps_taken: steps,
            per_step_usage: vec![
                Usage {
                    prompt_tokens: 100,
                    completion_tokens: 10
                };
                steps
            ],
            total_usage: Usage::default(),
            holistic_versions: Vec::new(),
            scores: Vec::new(),
            final_score: FitnessScore::MIN,
            abort_reason: None,
            parse_warnings: 0,
        }
    }

    #[test]
    fn rows_per_type_plus_all() {
        let rs = vec![report("heat", true, 4), report("put", false, 2), report("put", true, 6)];
        let rows = summarize(&rs);
        let names: Vec<_> = rows.iter().map(|r| r.task_type.as_str()).collect();
        assert_eq!(names, ["put", "heat", "All"]);
        assert_eq!(rows[0].success_rate, 0.5);
        assert_eq!(rows[0].mean_steps, 4.0);
        assert_eq!(rows[2].successes, 2);
        assert_eq!(rows[2].mean_prompt_tokens_per_step, 100.0);
        let text = summary_jsonl(&rs, &rows);
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().last().unwrap().starts_with("{\"record\":\"row\",\"task_type\":\"All\""));
    }

    #[test]
    fn table_has_five_columns() {
        let rows = vec![TableRow {
            step: 1,
            observation: "You are at countertop 2.\nYou see: apple 1.".into(),
            action: "go to countertop 2".into(),
            score: 25,
            reasoning: "Exploring\nmore".into(),
        }];
        let t = render_table(&rows);
        let lines: Vec<_> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("Step | Observation"));
        assert!(lines[2].contains("| 25    | Exploring"));
    }
}
