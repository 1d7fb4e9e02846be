pub mod args;
pub mod config;
pub mod emit;
pub mod error;
pub mod model;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use crate::args::{Cli, Command};
use crate::emit::{
    csv_from_json, format_of, json_text, render_svg, write_file, write_sidecar, Format, Report,
};
use crate::error::{CliError, Result};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "ISOCHRONE_THREADS";

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::usage(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn outputs(cmd: &Command) -> &[PathBuf] {
    match cmd {
        Command::Simulate(a) => &a.output.out,
        Command::PeriodMap(a) => &a.output.out,
        Command::Monodromy(a) => &a.output.out,
        Command::Blowup(a) => &a.output.out,
        Command::Sabatini(a) => &a.output.out,
        Command::Involution(a) => &a.output.out,
        Command::Field(a) => &a.output.out,
        Command::Crossing(a) => &a.output.out,
        Command::Convert(a) => &a.output.out,
    }
}

fn meta(analysis: &str, argv: &[OsString], path: &Path, elapsed: f64) -> serde_json::Value {
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "tool": "isochrone",
        "version": env!("CARGO_PKG_VERSION"),
        "analysis": analysis,
        "file": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "argv": argv.iter().map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "unix_time": unix_time,
        "elapsed_seconds": elapsed,
        "threads": rayon::current_num_threads(),
    })
}

fn analyse(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Simulate(a) => run::simulate(a),
        Command::PeriodMap(a) => run::period_map(a),
        Command::Monodromy(a) => run::monodromy_run(a),
        Command::Blowup(a) => run::blowup(a),
        Command::Sabatini(a) => run::sabatini(a),
        Command::Involution(a) => run::involution(a),
        Command::Field(a) => run::field(a),
        Command::Crossing(a) => run::crossing(a),
        Command::Convert(_) => unreachable!("convert produces no report"),
    }
}

fn convert(input: &Path, outs: &[PathBuf], argv: &[OsString], started: Instant) -> Result<String> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let csv = csv_from_json(&text, input)?;
    if outs.is_empty() {
        print!("{csv}");
    }
    for path in outs {
        write_file(path, &csv)?;
        write_sidecar(
            path,
            &meta("convert", argv, path, started.elapsed().as_secs_f64()),
        )?;
    }
    Ok(format!(
        "convert {}: {} rows",
        input.display(),
        csv.lines().count().saturating_sub(1)
    ))
}

fn execute(cli: &Cli, argv: &[OsString]) -> Result<()> {
    let started = Instant::now();
    configure_threads()?;
    let outs = outputs(&cli.command);
    let formats = outs
        .iter()
        .map(|p| format_of(p))
        .collect::<Result<Vec<_>>>()?;

    if let Command::Convert(a) = &cli.command {
        if formats.iter().any(|f| *f != Format::Csv) {
            return Err(CliError::usage("convert writes CSV only"));
        }
        let summary = convert(&a.input, outs, argv, started)?;
        if !outs.is_empty() {
            println!("{summary}");
        }
        return Ok(());
    }
    let plots = !matches!(cli.command, Command::Monodromy(_) | Command::Crossing(_));
    if formats.contains(&Format::Svg) && !plots {
        return Err(CliError::usage(format!(
            "{} has no plot; use .csv or .json",
            cli.command.name()
        )));
    }

    let report = analyse(&cli.command)?;
    if outs.is_empty() {
        print!("{}", json_text(&report.to_json()));
        eprintln!("{}", report.summary);
        return Ok(());
    }
    for (path, format) in outs.iter().zip(&formats) {
        let contents = match format {
            Format::Csv => report.table.to_csv()?,
            Format::Json => json_text(&report.to_json()),
            Format::Svg => render_svg(report.plot.as_ref().expect("plot checked above")),
        };
        write_file(path, &contents)?;
        write_sidecar(
            path,
            &meta(report.analysis, argv, path, started.elapsed().as_secs_f64()),
        )?;
    }
    println!("{}", report.summary);
    Ok(())
}

/// Runs one invocation and returns its exit code.
pub fn run<I, S>(argv: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let expanded = match config::expand_argv(argv.clone()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli, &argv) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
