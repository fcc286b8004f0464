//! Batch front-end: reads an experiment config, runs one task and writes
//! `result.json`, `table.csv` and optional plot data.

pub mod config;
pub mod output;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use entrolab::caps::{Caps, CAP_CELLS_ENV};

use config::{ExperimentConfig, Task};
use output::{ResultRecord, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] entrolab::error::Error),
    #[error("plot data: {0}")]
    Plot(String),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_CERTIFICATION_UNAVAILABLE: u8 = 2;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "entrolab",
    version,
    about = "Entropy experiments on symbolic dynamical systems"
)]
pub struct Args {
    #[arg(value_enum)]
    pub task: Task,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to the config's `output`, then `entrolab-out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write `plot.tsv` and, for schedules, `plot_running_min.tsv`.
    #[arg(long)]
    pub emit_plotdata: bool,
}

pub struct RunSummary {
    pub record: ResultRecord,
    pub out_dir: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> u8 {
        match self.record.status {
            Status::Ok => EXIT_OK,
            Status::CertificationUnavailable => EXIT_CERTIFICATION_UNAVAILABLE,
        }
    }
}

fn caps_for(config: &ExperimentConfig) -> Result<Caps, CliError> {
    let mut caps = Caps::default();
    if let Some(c) = config.caps {
        if let Some(g) = c.group_elements {
            caps.group_elements = g;
        }
        if let Some(cells) = c.cells {
            caps.cells = cells;
        }
    }
    if std::env::var_os(CAP_CELLS_ENV).is_some() {
        caps.cells = Caps::from_env()?.cells;
    }
    Ok(caps)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Runs one experiment and writes its outputs.
///
/// Certification failures are a successful run with a non-ok status; the
/// record is written either way.
pub fn run(args: &Args) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(task) = config.task {
        if task != args.task {
            return Err(CliError::Schema {
                path: "task".into(),
                message: format!("config is for {}, not {}", task.name(), args.task.name()),
            });
        }
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    tasks::check_fields(args.task, &config)?;
    if let Some(threads) = args.threads {
        // Fails only if a pool already exists, as in repeated in-process runs.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let base = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let out_dir = match (&args.out, &config.output) {
        (Some(out), _) => out.clone(),
        (None, Some(out)) => base.join(out),
        (None, None) => PathBuf::from("entrolab-out"),
    };
    let mut ctx = tasks::Context {
        config: &config,
        base,
        caps: caps_for(&config)?,
        inputs: Vec::new(),
    };
    let outcome = tasks::run_task(args.task, &mut ctx)?;
    let record = ResultRecord {
        tool: output::TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        task: args.task.name().into(),
        config_hash: output::config_hash(&config.canonical_json(), &ctx.inputs),
        seed: config.seed,
        status: outcome.status,
        items: outcome.items,
        details: outcome.details,
    };

    std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
    let json = serde_json::to_string_pretty(&record).expect("serializable") + "\n";
    output::write_atomic(&out_dir, "result.json", &json)?;
    output::write_atomic(&out_dir, "table.csv", &output::csv_table(&record))?;
    for (name, body) in &outcome.files {
        output::write_atomic(&out_dir, name, body)?;
    }
    let timing = serde_json::json!({
        "config_hash": record.config_hash,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    output::write_atomic(&out_dir, "timing.json", &(timing.to_string() + "\n"))?;
    if args.emit_plotdata {
        let (values, running) = output::plot_series(&record)?;
        output::write_atomic(&out_dir, "plot.tsv", &values)?;
        if let Some(running) = running {
            output::write_atomic(&out_dir, "plot_running_min.tsv", &running)?;
        }
    }
    Ok(RunSummary { record, out_dir })
}
