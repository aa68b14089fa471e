//! Command-line front end for the `groupfx-core` estimators: CSV input,
//! config files, report rendering and parallel simulation.

pub mod cli;
pub mod commands;
pub mod data;
pub mod error;
pub mod parallel;
pub mod render;

use std::io::Write;

use cli::{CommandConfig, ParseOutcome, RunConfig};
use error::{CliError, CliResult};
use render::{Format, Report};

/// Runs a resolved configuration and returns the report.
pub fn execute(cfg: &RunConfig) -> CliResult<Report> {
    match &cfg.command {
        CommandConfig::Uniform(u) => commands::uniform(u),
        CommandConfig::Analyze(a) => commands::analyze(a),
        CommandConfig::Simulate(s) => {
            let pool = parallel::build_pool(cfg.threads)?;
            commands::simulate(s, cfg.seed, &pool)
        }
        CommandConfig::Clr(c) => commands::clr(c, cfg.seed),
    }
}

fn write_output(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::data(format!("cannot write to stdout: {e}"))),
    }
}

fn report_error(err: &CliError, format: Format, stderr: &mut dyn Write) {
    let _ = match format {
        Format::Json => writeln!(stderr, "{}", err.to_json()),
        _ => writeln!(stderr, "error: {err}"),
    };
}

/// Whole-program entry point; returns the exit code.
pub fn run_main<I, T>(argv: I, threads_env: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match cli::parse_args(argv, threads_env) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Clap(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
        Err(ParseOutcome::Usage(e)) => {
            report_error(&e, Format::Csv, stderr);
            return e.exit_code();
        }
    };
    let result = execute(&cfg).and_then(|report| write_output(&cfg, &report.render(cfg.format), stdout));
    match result {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e, cfg.format, stderr);
            e.exit_code()
        }
    }
}
