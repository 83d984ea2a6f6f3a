use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use synthgrid::analytics::{
    compare_signatures, compute_signature, emit_plot_data, read_reference_csv, render_summary_table,
    signature_from_points, summarize_run, PlotSource, DEFAULT_BIN_WIDTH,
};
use synthgrid::calendar::read_yearly_csv;
use synthgrid::config::{load_config, parse_override, RunConfig};
use synthgrid::domain::StageId;
use synthgrid::pipeline::{
    assemble_from_disk, read_exchanges, run_pipeline, validate_run_dir, PipelineEnv, RunLayout, RunReport,
};
use synthgrid::prompts::{dump_prompts, stage_of_messages};
use synthgrid::transport::UreqTransport;
use synthgrid::weather::Severity;

const EXIT_PARTIAL: u8 = 2;

#[derive(Parser)]
#[command(name = "synthgrid", version, about = "Synthetic household load profiles from chat models")]
struct Cli {
    /// Write the prompt templates to this directory.
    #[arg(long, global = true, value_name = "DIR")]
    dump_prompts: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline up to a stage.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Last stage to run (family-types, weather-ranges, weather-data, energy-patterns).
        #[arg(long, default_value = "energy-patterns")]
        through: String,
        /// Answer every request from this fixture directory; no network.
        #[arg(long, value_name = "DIR")]
        replay: Option<PathBuf>,
        /// Override a config key, e.g. `--set year=2024`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Re-check every artifact of a run directory.
    Validate { dir: PathBuf },
    /// Rebuild yearly CSVs from the daily profiles of a run.
    AssembleYear {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Energy signature of a yearly CSV, optionally against a reference dataset.
    Signature {
        yearly: PathBuf,
        /// `timestamp,temp_c,total_kwh[,building_id]` CSV.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 18.0)]
        balance_point: f64,
        /// Also write the plot CSV (`series,x,y`).
        #[arg(long, value_name = "CSV")]
        plot: Option<PathBuf>,
    },
    /// Per-stage responses, time and tokens of a run.
    Report { run_dir: PathBuf },
}

fn load(config: &Path, overrides: &[String]) -> Result<RunConfig> {
    let pairs = overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(load_config(config, &pairs)?)
}

fn print_report(r: &RunReport) {
    for s in &r.stages {
        println!(
            "{:<16} {:>4} ok {:>4} failed {:>4} skipped {:>5} requests {:>4} retries {:>4} warnings",
            s.stage.name(),
            s.succeeded,
            s.failed,
            s.skipped,
            s.requests,
            s.retries,
            s.warnings
        );
        for f in &s.failures {
            println!("  {}: {}", f.item, f.error);
        }
    }
    for f in &r.assembly_failures {
        println!("  assembly {}: {}", f.item, f.error);
    }
    println!("{} yearly profiles written", r.yearly_outputs.len());
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(dir) = &cli.dump_prompts {
        for p in dump_prompts(dir).with_context(|| format!("writing prompts to {}", dir.display()))? {
            println!("{}", p.display());
        }
    }
    let Some(command) = cli.command else {
        if cli.dump_prompts.is_some() {
            return Ok(0);
        }
        bail!("no subcommand given; see --help");
    };
    match command {
        Command::Run { config, through, replay, overrides } => {
            let mut cfg = load(&config, &overrides)?;
            if replay.is_some() {
                cfg.fixture_dir = replay;
            }
            let through: StageId = through.parse()?;
            let env = PipelineEnv::new(Arc::new(UreqTransport));
            let report = run_pipeline(&cfg, through, &env)?;
            print_report(&report);
            Ok(if report.has_failures() { EXIT_PARTIAL } else { 0 })
        }
        Command::Validate { dir } => {
            if !dir.is_dir() {
                bail!("{} is not a directory", dir.display());
            }
            let findings = validate_run_dir(&dir);
            for f in &findings {
                let sev = if f.severity == Severity::Error { "error" } else { "warning" };
                println!("{sev}: {}: {}", f.path.display(), f.message);
            }
            let errors = findings.iter().filter(|f| f.severity == Severity::Error).count();
            println!("{errors} errors, {} warnings", findings.len() - errors);
            Ok(if errors > 0 { EXIT_PARTIAL } else { 0 })
        }
        Command::AssembleYear { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let out = assemble_from_disk(&cfg, &RunLayout::new(cfg.output_dir.clone()))?;
            for w in &out.written {
                println!("{w}");
            }
            for f in &out.failures {
                println!("  {}: {}", f.item, f.error);
            }
            Ok(if out.failures.is_empty() { 0 } else { EXIT_PARTIAL })
        }
        Command::Signature { yearly, reference, balance_point, plot } => {
            let y = read_yearly_csv(&yearly)?;
            let id = yearly.file_stem().and_then(|s| s.to_str()).unwrap_or("yearly").to_string();
            let sig = compute_signature(&y, &id, balance_point)?;
            if let Some(p) = &plot {
                emit_plot_data(PlotSource::Signature(&sig), p)?;
            }
            match reference {
                None => println!("{}", sig.to_json()),
                Some(r) => {
                    let buildings = read_reference_csv(&r)?;
                    let pooled: Vec<(f64, f64)> = buildings.values().flatten().copied().collect();
                    let name = format!("{} ({} buildings)", r.display(), buildings.len());
                    let reference = signature_from_points(&name, pooled, balance_point, DEFAULT_BIN_WIDTH)?;
                    let cmp = compare_signatures(&sig, &reference)?;
                    println!("{}", serde_json::to_string_pretty(&cmp)?);
                }
            }
            Ok(0)
        }
        Command::Report { run_dir } => {
            let layout = RunLayout::new(run_dir);
            let log = read_exchanges(&layout.exchanges())?;
            let entries: Vec<_> = log.into_iter().map(|e| e.exchange).collect();
            let summary = summarize_run(&entries, |ex| stage_of_messages(&ex.request_messages));
            print!("{}", render_summary_table(&summary));
            if let Ok(text) = std::fs::read_to_string(layout.report()) {
                let r: RunReport = serde_json::from_str(&text).context("reading report.json")?;
                if r.has_failures() {
                    println!("run has failures; see {}", layout.report().display());
                    return Ok(EXIT_PARTIAL);
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // several library errors already print their source
            let mut msg = e.to_string();
            for cause in e.chain().skip(1).map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    msg = format!("{msg}: {cause}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
