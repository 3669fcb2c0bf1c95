use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dusar_core::envs::TaskFamily;
use dusar_core::provider::WireSettingsFile;
use dusar_core::session::{self, Command, ProviderChoice, RunConfig, EXIT_CONFIG};
use dusar_core::AgentMode;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "dusar", version, about = "Run and evaluate reflective agents on TextHouse tasks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one episode and print its step table.
    Run(Opts),
    /// Run a batch and write per-type summaries.
    Eval(Opts),
    /// Validate a trace file and print its step table.
    Replay {
        trace: PathBuf,
    },
}

#[derive(Args)]
struct Opts {
    /// Task file; repeatable. Without one, tasks are generated.
    #[arg(long = "task")]
    tasks: Vec<PathBuf>,
    /// Task family for generated tasks (put, clean, heat, cool, examine, puttwo).
    #[arg(long)]
    task_type: Option<TaskFamily>,
    /// full, holistic_only, local_only, naive_concat or react_baseline.
    #[arg(long, default_value = "full")]
    mode: AgentMode,
    /// wire, oracle, scripted or scripted:<fixture>.
    #[arg(long, default_value = "oracle")]
    provider: ProviderChoice,
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 30)]
    max_steps: usize,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generated tasks per family for `eval`.
    #[arg(long, default_value_t = 10)]
    per_family: usize,
    /// Directory of prompt template overrides.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long, default_value = "dusar-out")]
    out: PathBuf,
    /// TOML file with wire provider settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
}

impl Opts {
    fn into_config(self, command: Command) -> RunConfig {
        RunConfig {
            command,
            provider: self.provider,
            fixture: self.fixture,
            mode: self.mode,
            tasks: self.tasks,
            task_type: self.task_type,
            seed: self.seed,
            per_family: self.per_family,
            max_steps: self.max_steps,
            window: self.window,
            templates: self.templates,
            out: self.out,
            config: self.config,
            parallelism: self.parallelism,
            wire: WireSettingsFile {
                endpoint: self.endpoint,
                model: self.model,
                ..Default::default()
            },
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("DUSAR_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match cli.command {
        Cmd::Run(o) => o.into_config(Command::Run),
        Cmd::Eval(o) => o.into_config(Command::Eval),
        Cmd::Replay { trace } => RunConfig {
            command: Command::Replay { trace },
            ..Default::default()
        },
    };
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = session::execute(&cfg, &|k| std::env::var(k).ok(), &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
