use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use fractal_lab::table::{self, MeasureMetadata};
use fractal_lab::FractalSpec;
use fractal_lab_runner::config::DEFAULT_OUTPUT_DIR;
use fractal_lab_runner::report::{EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use fractal_lab_runner::{output, run_scenario, Report, RunnerError, ScenarioConfig, REGISTRY};

#[derive(Parser)]
#[command(name = "fraclab", version, about = "Seeded fractal projection experiments")]
struct Cli {
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root; overrides the config's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a fractal from a spec file and write it as a measure table.
    Build {
        spec: PathBuf,
        /// File stem under `<out>/measures/`; defaults to the spec's stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Run one scenario, or `all` of them with their defaults.
    Run { scenario: Option<String> },
    /// List registered scenarios.
    List,
    /// Summarize stored records.
    Report {
        /// Record files or directories to search (default: the output root).
        paths: Vec<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.downcast_ref::<RunnerError>().map_or("error", RunnerError::code);
            eprintln!("error [{code}]: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<u8> {
    set_threads(cli.threads)?;
    match &cli.command {
        Command::List => {
            for s in REGISTRY {
                println!("{:<22} {}", s.name, s.claim);
            }
            Ok(EXIT_PASS)
        }
        Command::Build { spec, name } => build(cli, spec, name.as_deref()),
        Command::Run { scenario } => run(cli, scenario.as_deref()),
        Command::Report { paths, scenario, json } => {
            let paths = if paths.is_empty() { vec![out_root(cli, None)] } else { paths.clone() };
            let mut records = Vec::new();
            for p in output::find_records(&paths)? {
                let r = output::read_record(&p).with_context(|| format!("reading {}", p.display()))?;
                if scenario.as_ref().is_none_or(|s| *s == r.scenario) {
                    records.push(r);
                }
            }
            let report = Report::new(&records);
            if *json {
                println!("{}", serde_json::to_string_pretty(&report.to_json())?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(report.exit_code())
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if threads.is_some_and(|k| k > 1) {
        log::warn!("built without the parallel feature; --threads is ignored");
    }
    Ok(())
}

fn out_root(cli: &Cli, cfg: Option<&ScenarioConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn build(cli: &Cli, spec_path: &Path, name: Option<&str>) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let spec: FractalSpec = serde_json::from_str(&text).context("parsing fractal spec")?;
    let set = spec.build()?;
    let stem = match name {
        Some(n) => n.to_string(),
        None => spec_path.file_stem().map_or("set".into(), |s| s.to_string_lossy().into_owned()),
    };
    let path = out_root(cli, None).join("measures").join(format!("{stem}.tbl"));
    let meta = MeasureMetadata {
        provenance: serde_json::to_value(&set.provenance)?,
        seed: Some(spec.seed),
        nominal_dimension: Some(set.nominal_dimension),
    };
    table::write_measure(&path, &set.measure, &meta)?;
    println!(
        "{}: {} atoms in R^{}, nominal dimension {:.4}",
        path.display(),
        set.measure.len(),
        set.measure.ambient_dim(),
        set.nominal_dimension
    );
    Ok(EXIT_PASS)
}

fn run(cli: &Cli, scenario: Option<&str>) -> anyhow::Result<u8> {
    let loaded = cli.config.as_deref().map(ScenarioConfig::load).transpose()?;
    let configs: Vec<ScenarioConfig> = match (scenario, loaded) {
        (Some("all"), Some(_)) => bail!("`run all` uses scenario defaults and takes no --config"),
        (Some("all"), None) => REGISTRY.iter().map(|s| ScenarioConfig::new(s.name)).collect(),
        (Some(name), Some(cfg)) if cfg.scenario != name => {
            bail!("--config is for scenario {:?}, not {name:?}", cfg.scenario)
        }
        (_, Some(cfg)) => vec![cfg],
        (Some(name), None) => vec![ScenarioConfig::new(name)],
        (None, None) => bail!("name a scenario or pass --config"),
    };
    let mut records = Vec::new();
    for mut cfg in configs {
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        let root = out_root(cli, Some(&cfg));
        let (record, art) = run_scenario(&cfg)?;
        let dir = output::write_run(&root, &record, &art)?;
        println!("{} {} -> {}", record.scenario, if record.pass { "pass" } else { "FAIL" }, dir.display());
        records.push(record);
    }
    if records.len() > 1 {
        print!("\n{}", Report::new(&records).to_text());
    }
    Ok(if records.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
}
