use std::process::ExitCode;

use clap::Parser;
use entrolab_cli::{run, Args, EXIT_ERROR};

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(summary) => {
            let status = serde_json::to_value(summary.record.status).expect("serializable");
            eprintln!(
                "{}: {} items, status {}, written to {}",
                summary.record.task,
                summary.record.items.len(),
                status.as_str().unwrap_or("?"),
                summary.out_dir.display()
            );
            ExitCode::from(summary.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
