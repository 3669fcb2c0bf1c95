//! Command implementations behind the `dusar` binary: `run`, `eval` and
//! `replay`. The binary only parses arguments into a [`RunConfig`].

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::envs::{generate_task, generate_tasks, load_task_file, EnvError, TaskFamily, TaskSpec, TextHouse};
use crate::episode::{run_batch, run_episode, BatchConfig, EpisodeConfig, DEFAULT_MAX_STEPS};
use crate::prompts::PromptSet;
use crate::provider::{load_fixture, ProviderError, WireProvider, WireSettings, WireSettingsFile};
use crate::reflect::{LlmReflector, OracleReflector, Reflector};
use crate::report::{render_summary, render_table, rows_from_raw, rows_from_trace, summarize, summary_jsonl};
use crate::strategy::AgentMode;
use crate::trace::{RawTrace, DEFAULT_WINDOW};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl SessionError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SessionError::Config(_) => EXIT_CONFIG,
            SessionError::Parse(_) => EXIT_PARSE,
        }
    }
}

impl From<ProviderError> for SessionError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Config(m) => SessionError::Config(m),
            other => SessionError::Config(other.to_string()),
        }
    }
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> SessionError {
    SessionError::Config(format!("{what} {}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderChoice {
    Wire,
    /// Fixture path, or `None` to take it from `--fixture`.
    Scripted(Option<PathBuf>),
    Oracle,
}

impl FromStr for ProviderChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wire" => Ok(ProviderChoice::Wire),
            "oracle" => Ok(ProviderChoice::Oracle),
            "scripted" => Ok(ProviderChoice::Scripted(None)),
            other => match other.strip_prefix("scripted:") {
                Some(p) if !p.is_empty() => Ok(ProviderChoice::Scripted(Some(PathBuf::from(p)))),
                _ => Err(format!("unknown provider `{other}` (wire, oracle, scripted:<path>)")),
            },
        }
    }
}

impl fmt::Display for ProviderChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProviderChoice::Wire => f.write_str("wire"),
            ProviderChoice::Oracle => f.write_str("oracle"),
            ProviderChoice::Scripted(None) => f.write_str("scripted"),
            ProviderChoice::Scripted(Some(p)) => write!(f, "scripted:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Run,
    Eval,
    Replay { trace: PathBuf },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub provider: ProviderChoice,
    pub fixture: Option<PathBuf>,
    pub mode: AgentMode,
    pub tasks: Vec<PathBuf>,
    pub task_type: Option<TaskFamily>,
    pub seed: u64,
    /// Tasks per family for `eval` when no task files are given.
    pub per_family: usize,
    pub max_steps: usize,
    pub window: usize,
    pub templates: Option<PathBuf>,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub parallelism: usize,
    /// `endpoint`, `model` and friends given as flags.
    pub wire: WireSettingsFile,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Run,
            provider: ProviderChoice::Oracle,
            fixture: None,
            mode: AgentMode::Full,
            tasks: Vec::new(),
            task_type: None,
            seed: 0,
            per_family: 10,
            max_steps: DEFAULT_MAX_STEPS,
            window: DEFAULT_WINDOW,
            templates: None,
            out: PathBuf::from("dusar-out"),
            config: None,
            parallelism: 1,
            wire: WireSettingsFile::default(),
        }
    }
}

impl RunConfig {
    fn episode(&self) -> Result<EpisodeConfig, SessionError> {
        if self.max_steps == 0 {
            return Err(SessionError::Config("--max-steps must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(SessionError::Config("--window must be at least 1".into()));
        }
        Ok(EpisodeConfig {
            max_steps: self.max_steps,
            window_size: self.window,
            mode: self.mode,
            seed: self.seed,
            task_type: String::new(),
        })
    }

    fn prompts(&self) -> Result<Arc<PromptSet>, SessionError> {
        match &self.templates {
            None => Ok(Arc::new(PromptSet::builtin())),
            Some(dir) => {
                if !dir.is_dir() {
                    return Err(SessionError::Config(format!(
                        "template directory {} does not exist",
                        dir.display()
                    )));
                }
                PromptSet::load_dir(dir)
                    .map(Arc::new)
                    .map_err(|e| SessionError::Parse(e.to_string()))
            }
        }
    }

    /// Builds the reflector for the selected provider. `env` looks up
    /// environment variables.
    pub fn reflector(&self, env: &dyn Fn(&str) -> Option<String>) -> Result<Arc<dyn Reflector>, SessionError> {
        let prompts = self.prompts()?;
        match &self.provider {
            ProviderChoice::Oracle => Ok(Arc::new(OracleReflector::new(prompts))),
            ProviderChoice::Scripted(path) => {
                let path = path.as_ref().or(self.fixture.as_ref()).ok_or_else(|| {
                    SessionError::Config("scripted provider needs a fixture (scripted:<path> or --fixture)".into())
                })?;
                if !path.is_file() {
                    return Err(SessionError::Config(format!("fixture {} not found", path.display())));
                }
                let provider = load_fixture(path)?;
                Ok(Arc::new(LlmReflector::new(Arc::new(provider), prompts, "scripted")))
            }
            ProviderChoice::Wire => {
                let file = match &self.config {
                    Some(p) => WireSettingsFile::load(p)?,
                    None => WireSettingsFile::default(),
                };
                let settings = WireSettings::resolve(self.wire.clone(), env, file)?;
                let mut request = crate::provider::CompletionRequest::new(settings.model.clone(), Vec::new());
                request.max_tokens = Some(settings.max_tokens);
                let model = settings.model.clone();
                let provider = WireProvider::new(settings)?;
                Ok(Arc::new(
                    LlmReflector::new(Arc::new(provider), prompts, model).with_request(request),
                ))
            }
        }
    }

    fn load_task(&self, path: &Path) -> Result<TaskSpec, SessionError> {
        if !path.is_file() {
            return Err(SessionError::Config(format!("task file {} not found", path.display())));
        }
        load_task_file(path).map_err(|e| match e {
            EnvError::TaskFile { .. } | EnvError::InvalidTask(_) => {
                SessionError::Parse(format!("{}: {e}", path.display()))
            }
            other => SessionError::Config(other.to_string()),
        })
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), SessionError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err("cannot create", dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err("cannot write", path, e))
}

fn say(out: &mut dyn Write, text: &str) -> Result<(), SessionError> {
    out.write_all(text.as_bytes())
        .map_err(|e| SessionError::Config(format!("cannot write output: {e}")))
}

/// File stem for an episode's outputs.
pub fn episode_stem(task_type: &str, seed: u64, mode: AgentMode) -> String {
    format!("{task_type}-s{seed}-{mode}")
}

pub fn cmd_run(
    cfg: &RunConfig,
    env_vars: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
) -> Result<(), SessionError> {
    let mut ecfg = cfg.episode()?;
    let task = match cfg.tasks.as_slice() {
        [] => {
            let family = cfg.task_type.unwrap_or(TaskFamily::Put);
            generate_task(cfg.seed, family).map_err(|e| SessionError::Config(e.to_string()))?
        }
        [one] => cfg.load_task(one)?,
        _ => return Err(SessionError::Config("run takes a single --task".into())),
    };
    let reflector = cfg.reflector(env_vars)?;
    ecfg.seed = task.seed;
    ecfg.task_type = task.family.as_str().to_string();
    let mut env = TextHouse::new(task).map_err(|e| SessionError::Parse(e.to_string()))?;
    let episode = run_episode(&ecfg, &mut env, reflector.as_ref())
        .map_err(|e| SessionError::Config(e.to_string()))?;
    let r = &episode.report;

    let stem = episode_stem(&r.task_type, r.seed, r.mode);
    let trace_path = cfg.out.join(format!("{stem}.trace.jsonl"));
    let report_path = cfg.out.join(format!("{stem}.report.json"));
    write_file(&trace_path, &episode.trace.serialize())?;
    let report_json = serde_json::to_string_pretty(r).expect("report serializes") + "\n";
    write_file(&report_path, &report_json)?;

    let scores: Vec<String> = r.scores.iter().map(u8::to_string).collect();
    let (p, c) = r.mean_step_usage();
    let mut text = format!(
        "task: {}\ntype: {}  mode: {}  provider: {}\n\n",
        episode.trace.task_instruction(),
        r.task_type,
        r.mode,
        cfg.provider
    );
    text.push_str(&render_table(&rows_from_trace(&episode.trace)));
    text.push_str(&format!(
        "\nsuccess: {}\nsteps: {}\nscores: {}\nmean tokens/step: prompt {p:.1}, completion {c:.1}\n",
        r.success,
        r.steps_taken,
        scores.join(",")
    ));
    if let Some(reason) = &r.abort_reason {
        text.push_str(&format!("abort: {reason}\n"));
    }
    text.push_str(&format!("trace: {}\nreport: {}\n", trace_path.display(), report_path.display()));
    say(out, &text)
}

pub fn cmd_eval(
    cfg: &RunConfig,
    env_vars: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
) -> Result<(), SessionError> {
    let ecfg = cfg.episode()?;
    let mut tasks = if cfg.tasks.is_empty() {
        generate_tasks(cfg.seed, cfg.per_family).map_err(|e| SessionError::Config(e.to_string()))?
    } else {
        cfg.tasks.iter().map(|p| cfg.load_task(p)).collect::<Result<Vec<_>, _>>()?
    };
    if let Some(f) = cfg.task_type {
        tasks.retain(|t| t.family == f);
    }
    let reflector = cfg.reflector(env_vars)?;
    let batch = BatchConfig {
        episode: ecfg,
        parallelism: cfg.parallelism,
    };
    let episodes =
        run_batch(&tasks, &batch, reflector.as_ref()).map_err(|e| SessionError::Config(e.to_string()))?;
    let reports: Vec<_> = episodes.iter().map(|e| e.report.clone()).collect();
    let rows = summarize(&reports);

    let traces = cfg.out.join("traces");
    for e in &episodes {
        let stem = episode_stem(&e.report.task_type, e.report.seed, e.report.mode);
        write_file(&traces.join(format!("{stem}.trace.jsonl")), &e.trace.serialize())?;
    }
    let summary_path = cfg.out.join(format!("summary-{}.jsonl", cfg.mode));
    write_file(&summary_path, &summary_jsonl(&reports, &rows))?;

    let mut text = format!("mode: {}  provider: {}  episodes: {}\n\n", cfg.mode, cfg.provider, reports.len());
    text.push_str(&render_summary(&rows));
    text.push_str(&format!("\nsummary: {}\n", summary_path.display()));
    say(out, &text)
}

pub fn cmd_replay(path: &Path, out: &mut dyn Write) -> Result<(), SessionError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err("cannot read", path, e))?;
    let raw = RawTrace::parse(&text).map_err(|e| SessionError::Parse(format!("{}: {e}", path.display())))?;
    let mut report = format!("task: {}\nmode: {}\n\n", raw.task_instruction, raw.mode);
    report.push_str(&render_table(&rows_from_raw(&raw)));
    let violations = raw.violations();
    if violations.is_empty() {
        report.push_str("\ninvariants: ok\n");
        say(out, &report)
    } else {
        report.push_str(&format!("\ninvariants: {} violation(s)\n", violations.len()));
        for v in &violations {
            report.push_str(&format!("  {v}\n"));
        }
        say(out, &report)?;
        Err(SessionError::Parse(format!(
            "{}: {} invariant violation(s)",
            path.display(),
            violations.len()
        )))
    }
}

/// Runs the configured command and returns the process exit code. Errors are
/// written to `err`.
pub fn execute(
    cfg: &RunConfig,
    env_vars: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let result = match &cfg.command {
        Command::Run => cmd_run(cfg, env_vars, out),
        Command::Eval => cmd_eval(cfg, env_vars, out),
        Command::Replay { trace } => cmd_replay(trace, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
