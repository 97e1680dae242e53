//! The `assurkit` command line.
//!
//! | Exit | Meaning |
//! |---|---|
//! | 0 | no errors (and no warnings under `--fail-on-warnings`) |
//! | 1 | errors, failed obligations, or warnings under `--fail-on-warnings` |
//! | 2 | usage or I/O error |

mod report;
mod watch;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use assurkit::checker::{
    discharge, elaborate, full_check, parse_source, render_json, render_text, CheckConfig, CheckReport,
    ObligationOutcome, Source,
};
use assurkit::depgraph::{build_graph, export_dot};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use report::render_html;
pub use watch::{diff_lines, watch_loop, Watcher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "assurkit", version, about = "Check assurance cases and discharge their formal obligations")]
pub struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,

    /// Largest state space an obligation may enumerate
    #[arg(long, global = true, env = "ASSURKIT_STATE_CAP", default_value_t = gcl_cap())]
    pub state_cap: u64,

    /// Exit with 1 when there are warnings
    #[arg(long, global = true)]
    pub fail_on_warnings: bool,

    #[command(subcommand)]
    pub command: Command,
}

fn gcl_cap() -> u64 {
    CheckConfig::default().state_cap
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, resolve and check, discharging every obligation
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Discharge obligations only
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Discharge just this obligation
        #[arg(long)]
        only: Option<String>,
    },
    /// Write the dependency graph in DOT
    Graph {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, required = true)]
        dot: PathBuf,
    },
    /// Write an HTML report of claims, artifacts, verdicts and statuses
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, required = true)]
        html: PathBuf,
    },
    /// Check, then recheck incrementally whenever an input changes
    Watch {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Stop after this many rechecks
        #[arg(long, hide = true)]
        max_batches: Option<usize>,
    },
    /// Print the elaborated model as JSON
    Export {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure(String);

fn read_sources(files: &[PathBuf]) -> Result<Vec<Source>, Failure> {
    files
        .iter()
        .map(|p| {
            fs::read_to_string(p)
                .map(|text| Source::new(p.display().to_string(), text))
                .map_err(|e| Failure(format!("cannot read {}: {e}", p.display())))
        })
        .collect()
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
}

/// Run with `args` (including the program name) and return the exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn exit_code(report: &CheckReport, fail_on_warnings: bool) -> i32 {
    if report.errors() > 0 || (fail_on_warnings && report.warnings() > 0) {
        1
    } else {
        0
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure(format!("cannot write output: {e}"))
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let config = CheckConfig { state_cap: cli.state_cap };
    match &cli.command {
        Command::Check { files } => {
            let report = full_check(&read_sources(files)?, &config);
            match cli.format {
                Format::Text => {
                    write!(out, "{}", render_text(&report.diagnostics)).map_err(io)?;
                    writeln!(out, "{} error(s), {} warning(s)", report.errors(), report.warnings()).map_err(io)?;
                }
                Format::Json => writeln!(out, "{}", render_json(&report.diagnostics)).map_err(io)?,
            }
            Ok(exit_code(&report, cli.fail_on_warnings))
        }
        Command::Verify { files, only } => verify(&read_sources(files)?, only.as_deref(), cli.format, config, out),
        Command::Graph { files, dot } => {
            let sources = read_sources(files)?;
            let parsed: Vec<_> = sources.iter().map(parse_source).collect();
            let elab = elaborate(&parsed.iter().collect::<Vec<_>>());
            write_file(dot, &export_dot(&build_graph(&elab), &elab))?;
            Ok(0)
        }
        Command::Report { files, html } => {
            let report = full_check(&read_sources(files)?, &config);
            let dot_path = html.with_extension("dot");
            let dot = export_dot(&build_graph(&report.elaboration), &report.elaboration);
            write_file(&dot_path, &dot)?;
            let svg = report::render_svg(&dot);
            let link = dot_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            write_file(html, &render_html(&report, svg.as_deref(), &link))?;
            Ok(exit_code(&report, cli.fail_on_warnings))
        }
        Command::Watch { files, max_batches } => {
            let mut watcher = Watcher::new(files.clone());
            let sources = watcher.sources();
            let mut batches = 0;
            let final_state = watch_loop(
                &sources,
                config,
                || {
                    if max_batches.is_some_and(|m| batches >= m) {
                        return None;
                    }
                    let edits = watcher.next_batch();
                    batches += 1;
                    Some(edits)
                },
                out,
            )
            .map_err(io)?;
            let _ = writeln!(err, "stopped after {batches} recheck(s)");
            Ok(exit_code(&final_state.report(), cli.fail_on_warnings))
        }
        Command::Export { files } => {
            let sources = read_sources(files)?;
            let parsed: Vec<_> = sources.iter().map(parse_source).collect();
            let elab = elaborate(&parsed.iter().collect::<Vec<_>>());
            let text = serde_json::to_string_pretty(&elab.model.to_json()).map_err(|e| Failure(e.to_string()))?;
            writeln!(out, "{text}").map_err(io)?;
            Ok(if elab.diagnostics.iter().any(|d| d.is_error()) { 1 } else { 0 })
        }
    }
}

fn verify(
    sources: &[Source],
    only: Option<&str>,
    format: Format,
    config: CheckConfig,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let parsed: Vec<_> = sources.iter().map(parse_source).collect();
    let elab = elaborate(&parsed.iter().collect::<Vec<_>>());
    let selected: Vec<_> = elab
        .model
        .obligations
        .values()
        .filter(|o| only.is_none_or(|g| o.gid.as_str() == g))
        .collect();
    if let (Some(g), true) = (only, selected.is_empty()) {
        return Err(Failure(format!("no obligation named `{g}`")));
    }
    let results: Vec<_> = selected.iter().map(|o| (o.gid.clone(), discharge(o, &elab.models, config.state_cap))).collect();
    match format {
        Format::Text => {
            for (gid, outcome) in &results {
                match outcome {
                    ObligationOutcome::Pass { model } => writeln!(out, "{gid}: Pass over {model}"),
                    ObligationOutcome::Fail { model, counterexample } => {
                        writeln!(out, "{gid}: Fail over {model}; counterexample:").and_then(|_| {
                            counterexample.lines().try_for_each(|l| writeln!(out, "    {l}"))
                        })
                    }
                    ObligationOutcome::Error { code, message } => writeln!(out, "{gid}: error[{code}]: {message}"),
                }
                .map_err(io)?;
            }
        }
        Format::Json => {
            let items: Vec<_> = results
                .iter()
                .map(|(gid, outcome)| {
                    let mut v = serde_json::to_value(outcome).expect("outcome serialises");
                    v["gid"] = json!(gid.as_str());
                    v
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&items).expect("json")).map_err(io)?;
        }
    }
    Ok(if results.iter().all(|(_, o)| o.passed()) { 0 } else { 1 })
}
