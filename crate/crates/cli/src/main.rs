use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use swarm_tactics::encoding::EncodingMode;
use swarm_tactics::harness::eval::EvalMode;
use swarm_tactics::harness::experiment::{run_eval_spec, run_training, ExperimentSpec, RunMode, RESULTS_FILE};
use swarm_tactics::harness::map::{default_graph, DEFAULT_MAP};
use swarm_tactics::harness::pool::{generate_pool, write_pool, PoolSpec};
use swarm_tactics::harness::report::{report, summary_csv, summary_table};
use swarm_tactics::harness::scenario::{load_map, load_scenario};

#[derive(Parser)]
#[command(name = "swarm-tactics", version, about = "Train and evaluate swarm tactics policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy from an experiment spec.
    Train {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_encoding)]
        encoding: Option<EncodingMode>,
        /// Survivability coefficient (0, 1 or any non-negative value).
        #[arg(long)]
        cs: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the spec.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a directory of scenarios.
    Eval {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long, default_value = "independent", value_parser = parse_eval_mode)]
        mode: EvalMode,
        /// Survivability coefficient for the reward column; defaults to the
        /// checkpoint's training value.
        #[arg(long)]
        cs: Option<f64>,
        #[arg(long, default_value = "runs/eval")]
        out: PathBuf,
    },
    /// Summarize every results CSV under a directory.
    Report {
        dir: PathBuf,
        /// Where to write the summary CSV; defaults to `<dir>/summary.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a scenario pool on the bundled map.
    Generate {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PoolSpec::NAMES))]
        pool: String,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a road graph as `node`/`edge` records.
    Graph {
        /// Map file, or `@default` for the bundled map.
        #[arg(long, default_value = "@default")]
        map: String,
        /// Include the building nodes of this scenario.
        #[arg(long, conflicts_with = "map")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the bundled ASCII map.
    Map {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_encoding(s: &str) -> Result<EncodingMode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_eval_mode(s: &str) -> Result<EvalMode, String> {
    s.parse()
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn train(spec_path: &Path, encoding: Option<EncodingMode>, cs: Option<f64>, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let text = std::fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let mut spec = ExperimentSpec::parse(&text, spec_path)?;
    if spec.mode == RunMode::Eval {
        bail!("{}: train needs a train-neuro or train-a2c spec", spec_path.display());
    }
    if let Some(e) = encoding {
        spec.encoding = e;
    }
    if let Some(c) = cs {
        spec.c_s = c;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(o) = out {
        spec.output_dir = absolute(&o)?;
    }
    let spec = spec.resolved(spec_path.parent().unwrap_or(Path::new(".")))?;
    let outcome = run_training(&spec)?;
    println!(
        "{} ({} encoding, C_S {}): best fitness {:.4}; wrote {}",
        spec.mode,
        spec.encoding,
        spec.c_s,
        outcome.best_fitness,
        outcome.output_dir.display()
    );
    Ok(())
}

fn eval(policy: PathBuf, scenarios: PathBuf, mode: EvalMode, cs: Option<f64>, out: PathBuf) -> Result<()> {
    let checkpoint = swarm_tactics::harness::policy::PolicyFile::load(&policy)?;
    let mut spec = ExperimentSpec::new(RunMode::Eval, vec![scenarios]);
    spec.policy = Some(policy);
    spec.eval_mode = mode;
    spec.c_s = cs.unwrap_or(checkpoint.c_s);
    spec.output_dir = out;
    let spec = spec.resolved(&std::env::current_dir()?)?;
    let records = run_eval_spec(&spec)?;
    let successes = records.iter().filter(|r| r.row.success).count();
    println!(
        "{} scenarios ({mode}): {successes} successful; wrote {}",
        records.len(),
        spec.output_dir.join(RESULTS_FILE).display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { spec, encoding, cs, seed, out } => train(&spec, encoding, cs, seed, out),
        Command::Eval { policy, scenarios, mode, cs, out } => eval(policy, scenarios, mode, cs, out),
        Command::Report { dir, out } => {
            let summaries = report(&dir)?;
            let out = out.unwrap_or_else(|| dir.join("summary.csv"));
            emit(&summary_csv(&summaries), Some(&out))?;
            print!("{}", summary_table(&summaries));
            Ok(())
        }
        Command::Generate { pool, count, seed, out } => {
            let spec = PoolSpec::named(&pool, count, seed).ok_or_else(|| anyhow!("unknown pool `{pool}`"))?;
            let files = write_pool(&generate_pool(&spec), &out, &pool)?;
            println!("wrote {} scenarios to {}", files.len(), out.display());
            Ok(())
        }
        Command::Graph { map, scenario, out } => {
            let graph = match scenario {
                Some(path) => load_scenario(&path)?.mission.graph,
                None if map == "@default" => default_graph(),
                None => load_map(&map, &std::env::current_dir()?)?.0,
            };
            emit(&graph.to_export_text(), out.as_deref())
        }
        Command::Map { out } => emit(DEFAULT_MAP, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let cause = cause.to_string();
                if !msg.contains(&cause) {
                    msg = format!("{msg}: {cause}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
