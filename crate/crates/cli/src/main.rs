//! `ucsearch`: evolve unit-commitment priority rules, run the GA and oracle
//! baselines, and export results.
//!
//! Exit status is 0 on success, 2 for invalid input or configuration and 3
//! when the sampling backend fails.

mod artifacts;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use ucsearch::instance::validate_commitment_shape;
use ucsearch::oracle::DEFAULT_ENUMERATION_LIMIT;
use ucsearch::report::{BestSolution, InstanceSummary, TimingSummary};
use ucsearch::sampler::{LlmSampler, MutationSampler, Sampler};
use ucsearch::search::{CandidateLimits, SearchError};
use ucsearch::{
    dispatch, evaluate, evaluate_candidate, load_instance, run_ga, run_search, solve_exhaustive,
    SearchReport, UcInstance,
};

use artifacts::Row;
use settings::{ga_settings, search_settings, GaFlags, SamplerKind, SearchFlags};

#[derive(Parser)]
#[command(
    name = "ucsearch",
    version,
    about = "Unit commitment by evolved priority rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a priority program and write its report
    Evolve(EvolveArgs),
    /// Run the genetic-algorithm baseline
    Ga(GaArgs),
    /// Enumerate every schedule of a tiny instance
    Oracle(OracleArgs),
    /// Score one program or one 0/1 schedule
    Evaluate(EvaluateArgs),
    /// Best-of-N program search vs GA under a matched evaluation budget
    Compare(CompareArgs),
    /// Export a report's best schedule as CSV for plotting
    Heatmap(HeatmapArgs),
}

#[derive(Args)]
struct EvolveArgs {
    /// Instance JSON file
    instance: PathBuf,
    /// Candidate programs to draw
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for the report and timing files
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct GaArgs {
    instance: PathBuf,
    /// Cap on evaluated individuals
    #[arg(long)]
    evaluations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    ga: GaFlags,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Largest number of schedules to enumerate
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    limit: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct EvaluateTarget {
    /// Priority program source
    #[arg(long, allow_hyphen_values = true)]
    program: Option<String>,
    /// JSON file holding a units x periods array of 0/1
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    instance: PathBuf,
    #[command(flatten)]
    target: EvaluateTarget,
}

#[derive(Args)]
struct CompareArgs {
    instance: PathBuf,
    /// Independent runs per approach; the best run is reported
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Evaluations per run, identical for both approaches
    #[arg(long, default_value_t = 10_000)]
    evaluations: usize,
    /// Seed of the first run; run r uses seed + r
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct HeatmapArgs {
    /// Report JSON written by evolve, ga, oracle or compare
    report: PathBuf,
    /// Output directory (default: the report's directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(a) => cmd_evolve(a),
        Command::Ga(a) => cmd_ga(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Heatmap(a) => cmd_heatmap(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_status(&err))
        }
    }
}

fn exit_status(err: &anyhow::Error) -> u8 {
    let backend = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<SearchError>(),
            Some(SearchError::Sampler { .. })
        )
    });
    if backend {
        3
    } else {
        2
    }
}

fn instance_at(path: &Path) -> Result<UcInstance> {
    load_instance(path).with_context(|| format!("loading instance {}", path.display()))
}

fn make_sampler(kind: SamplerKind, llm: ucsearch::sampler::LlmConfig) -> Result<Box<dyn Sampler>> {
    Ok(match kind {
        SamplerKind::Mutate => Box::new(MutationSampler),
        SamplerKind::Llm => {
            Box::new(LlmSampler::new(llm.with_env_key()?).context("configuring LLM sampler")?)
        }
    })
}

fn cmd_evolve(args: EvolveArgs) -> Result<()> {
    let instance = instance_at(&args.instance)?;
    let cfg = search_settings(&args.search, args.samples, args.seed, args.workers)?;
    let sampler = make_sampler(args.search.sampler, cfg.llm)?;
    let started = Instant::now();
    let report = run_search(&instance, sampler.as_ref(), &cfg.search)?;
    let path = artifacts::write_report(&args.out, "funsearch", &report, started.elapsed())?;
    println!("{}", artifacts::summary_line(&report, &path));
    Ok(())
}

fn cmd_ga(args: GaArgs) -> Result<()> {
    let instance = instance_at(&args.instance)?;
    let cfg = ga_settings(&args.ga, args.evaluations, args.seed, args.workers)?;
    let started = Instant::now();
    let report = run_ga(&instance, &cfg)?;
    let path = artifacts::write_report(&args.out, "ga", &report, started.elapsed())?;
    println!("{}", artifacts::summary_line(&report, &path));
    Ok(())
}

/// Exhaustive optimum packaged in the common report format.
fn oracle_report(instance: &UcInstance, limit: u64) -> Result<SearchReport> {
    let started = Instant::now();
    let solution = solve_exhaustive(instance, limit)?;
    let elapsed = started.elapsed();
    let bits = instance.num_units() * instance.num_periods();
    let best = BestSolution::new(
        instance,
        None,
        0,
        None,
        solution.commitment,
        solution.dispatch,
        solution.evaluation,
    );
    Ok(SearchReport {
        approach: "oracle".into(),
        sampler: None,
        seed: 0,
        config: json!({ "enumeration_limit": limit }),
        instance: InstanceSummary::of(instance),
        samples: 1usize << bits,
        discarded: 0,
        discard_reasons: Default::default(),
        best: Some(best),
        trajectory: Vec::new(),
        timing: TimingSummary {
            samples: 1,
            sampling: Duration::ZERO,
            evaluation: elapsed,
        },
    })
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let instance = instance_at(&args.instance)?;
    let started = Instant::now();
    let report = oracle_report(&instance, args.limit)?;
    let path = artifacts::write_report(&args.out, "oracle", &report, started.elapsed())?;
    println!("{}", artifacts::summary_line(&report, &path));
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let instance = instance_at(&args.instance)?;
    let out = if let Some(src) = args.target.program {
        let scored = evaluate_candidate(&instance, &src, &CandidateLimits::default())
            .map_err(|reason| anyhow!("program discarded: {reason}"))?;
        json!({
            "program": src,
            "commitment": scored.commitment,
            "dispatch": scored.dispatch,
            "evaluation": scored.evaluation,
        })
    } else {
        let path = args.target.schedule.expect("clap enforces one target");
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let grid: Vec<Vec<i64>> =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let commitment = validate_commitment_shape(&instance, &grid)?;
        let power = dispatch(&instance, &commitment);
        let evaluation = evaluate(&instance, &commitment, &power)?;
        json!({
            "commitment": commitment,
            "dispatch": power,
            "evaluation": evaluation,
        })
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

/// Lowest-scoring report; earlier runs win ties.
fn best_of(reports: Vec<SearchReport>) -> Option<SearchReport> {
    reports
        .into_iter()
        .fold(None, |acc: Option<SearchReport>, r| {
            let score = r.best_score().unwrap_or(f64::INFINITY);
            match acc {
                Some(a) if a.best_score().unwrap_or(f64::INFINITY) <= score => Some(a),
                _ => Some(r),
            }
        })
}

fn row_for(label: &str, report: &SearchReport, has_sampling: bool) -> Row {
    Row {
        approach: label.into(),
        sampling_secs: has_sampling.then_some(report.timing.sampling.as_secs_f64()),
        evaluation_secs: report.timing.evaluation.as_secs_f64(),
        operating_cost: report.best.as_ref().map(|b| b.evaluation.operating_cost),
    }
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    anyhow::ensure!(args.runs > 0, "--runs must be positive");
    anyhow::ensure!(args.evaluations > 0, "--evaluations must be positive");
    let instance = instance_at(&args.instance)?;
    let cfg = search_settings(
        &args.search,
        Some(args.evaluations),
        Some(args.seed),
        args.workers,
    )?;
    let sampler = make_sampler(args.search.sampler, cfg.llm)?;
    let ga_base = ga_settings(
        &GaFlags {
            config: None,
            population: None,
            generations: Some(args.evaluations),
            tournament: None,
            crossover_prob: None,
            mutation_prob: None,
            elitism: None,
        },
        Some(args.evaluations),
        Some(args.seed),
        Some(cfg.search.workers),
    )?;

    let started = Instant::now();
    let mut fs_runs = Vec::with_capacity(args.runs);
    let mut ga_runs = Vec::with_capacity(args.runs);
    for r in 0..args.runs as u64 {
        let seed = args.seed.wrapping_add(r);
        let search = ucsearch::SearchConfig {
            seed,
            ..cfg.search.clone()
        };
        fs_runs.push(run_search(&instance, sampler.as_ref(), &search)?);
        let ga = ucsearch::GaConfig {
            seed,
            ..ga_base.clone()
        };
        ga_runs.push(run_ga(&instance, &ga)?);
    }
    let fs = best_of(fs_runs).expect("at least one run");
    let ga = best_of(ga_runs).expect("at least one run");
    let wall = started.elapsed();

    let mut rows = vec![row_for("GA", &ga, true), row_for("FunSearch", &fs, true)];
    artifacts::write_report(&args.out, "ga", &ga, wall)?;
    artifacts::write_report(&args.out, "funsearch", &fs, wall)?;
    let bits = instance.num_units() * instance.num_periods();
    if bits < 64 && (1u64 << bits) <= DEFAULT_ENUMERATION_LIMIT {
        let oracle = oracle_report(&instance, DEFAULT_ENUMERATION_LIMIT)?;
        artifacts::write_report(&args.out, "oracle", &oracle, oracle.timing.evaluation)?;
        rows.push(row_for("Oracle", &oracle, false));
    }

    let mut text = artifacts::render_table(&rows);
    text.push_str(&format!(
        "Best of {} runs per approach, {} evaluations per run. Times are totals for the selected run.\n",
        args.runs, args.evaluations
    ));
    for (label, report) in [("GA", &ga), ("FunSearch", &fs)] {
        if let Some(b) = report.best.as_ref().filter(|b| !b.evaluation.feasible) {
            text.push_str(&format!(
                "{label}: best schedule carries penalties (total cost {:.2}).\n",
                b.evaluation.total_cost
            ));
        }
    }
    text.push_str(artifacts::REFERENCE_FOOTER);
    text.push('\n');
    std::fs::write(args.out.join("comparison.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.report)
        .with_context(|| format!("reading {}", args.report.display()))?;
    let report = SearchReport::from_json(&text)
        .with_context(|| format!("parsing report {}", args.report.display()))?;
    let dir = args.out.unwrap_or_else(|| {
        args.report
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    });
    let stem = args
        .report
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report")
        .trim_end_matches("-report")
        .to_string();
    for path in artifacts::write_heatmap(&report, &dir, &stem)? {
        println!("{}", path.display());
    }
    Ok(())
}
