use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use serde_json::json;

use svc_knapsack::eval::{evaluate_seeds, CompareSummary};
use svc_knapsack::io::{generate, load_bundle, BundleSource, Format, GenParams, ProblemBundle};
use svc_knapsack::oracle::{greedy_baseline, oracle_min, DEFAULT_ORACLE_LIMIT};
use svc_knapsack::report::{bench_bundle, compose, BenchReport};
use svc_knapsack::solver::{CostRule, ItemOrder, SolverConfig, DEFAULT_MAX_INPUT_BITS};
use svc_knapsack::{Error, Result};

/// Semantic web service composition with a knapsack-variant dynamic program.
#[derive(Parser, Debug)]
#[command(name = "svc-knapsack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the graph, solve it and print the plan with timings.
    Compose {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Leave wall-clock timings out of the output.
        #[arg(long)]
        no_timings: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive minimum (and the greedy baseline) for a small instance.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solver vs oracle vs greedy over generated instances.
    Compare {
        #[command(flatten)]
        gen: GenArgs,
        /// Number of instances; seeds run from --seed upwards.
        #[arg(long, default_value_t = 200)]
        instances: u64,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        limit: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Include one row per instance.
        #[arg(long)]
        detail: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic bundle.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated timing runs over one or more problems.
    Bench {
        /// Bundle files (json) or dataset directories (wsc08).
        paths: Vec<PathBuf>,
        #[arg(long, default_value = "json")]
        format: Format,
        /// Also bench this many generated instances (seeds from --seed).
        #[arg(long, default_value_t = 0)]
        generated: u64,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 2)]
        warmups: usize,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Combined bundle file (json) or dataset directory (wsc08).
    #[arg(long, conflicts_with_all = ["repo", "taxonomy", "request"])]
    bundle: Option<PathBuf>,
    #[arg(long, requires_all = ["taxonomy", "request"])]
    repo: Option<PathBuf>,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    request: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

impl InputArgs {
    fn load(&self) -> Result<ProblemBundle> {
        let source = match (&self.bundle, &self.repo, &self.taxonomy, &self.request) {
            (Some(b), ..) => BundleSource::Single(b.clone()),
            (None, Some(r), Some(t), Some(q)) => BundleSource::Split {
                taxonomy: t.clone(),
                repository: r.clone(),
                request: q.clone(),
            },
            _ => {
                return Err(Error::InvalidRequest(
                    "give --bundle, or all of --repo, --taxonomy and --request".into(),
                ))
            }
        };
        let bundle = load_bundle(&source, self.format)?;
        info!(
            "loaded `{}`: {} services, {} concepts",
            bundle.metadata.name,
            bundle.repository.len(),
            bundle.taxonomy.len()
        );
        Ok(bundle)
    }
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Worker threads for intra-layer parallelism (1 = sequential, 0 = all cores).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "len")]
    order: ItemOrder,
    /// Add one to every item cost.
    #[arg(long)]
    cost_plus_one: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_INPUT_BITS)]
    max_input_bits: u32,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            order: self.order,
            cost_rule: if self.cost_plus_one {
                CostRule::PlusOne
            } else {
                CostRule::NewServices
            },
            max_input_bits: self.max_input_bits,
            threads: self.threads,
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    services: usize,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 30)]
    concepts: usize,
    #[arg(long, default_value_t = 1)]
    fan_in_min: usize,
    #[arg(long, default_value_t = 3)]
    fan_in_max: usize,
    #[arg(long, default_value_t = 1)]
    fan_out_min: usize,
    #[arg(long, default_value_t = 3)]
    fan_out_max: usize,
    /// Length of the planted feasible chain.
    #[arg(long, default_value_t = 4)]
    planted: usize,
    /// Do not plant a feasible chain.
    #[arg(long)]
    no_plant: bool,
    #[arg(long, default_value_t = 2)]
    wanted: usize,
    #[arg(long, default_value_t = 0.3)]
    subsumption: f64,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        GenParams {
            services: self.services,
            depth: self.depth,
            concepts: self.concepts,
            fan_in: (self.fan_in_min, self.fan_in_max),
            fan_out: (self.fan_out_min, self.fan_out_max),
            planted: (!self.no_plant).then_some(self.planted),
            wanted: self.wanted,
            subsumption: self.subsumption,
        }
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Compose {
            input,
            solver,
            no_timings,
            out,
        } => {
            let bundle = input.load()?;
            let output = compose(&bundle, &solver.config(), !no_timings)?;
            info!("#C.Services = {}, G.Size = {}", output.c_services, output.g_size);
            emit(&output, out.as_ref())
        }
        Command::Oracle { input, limit, out } => {
            let b = input.load()?;
            let exact = oracle_min(&b.repository, &b.request, &b.taxonomy, limit)?;
            let greedy = greedy_baseline(&b.repository, &b.request, &b.taxonomy)?;
            emit(
                &json!({
                    "name": b.metadata.name,
                    "oracle": exact,
                    "greedy": { "len": greedy.len(), "services": greedy },
                }),
                out.as_ref(),
            )
        }
        Command::Compare {
            gen,
            instances,
            limit,
            solver,
            detail,
            out,
        } => {
            let seeds = gen.seed..gen.seed + instances;
            let evals = evaluate_seeds(seeds, &gen.params(), &solver.config(), limit)?;
            let summary = CompareSummary::from_evals(&evals);
            eprintln!(
                "solver optimal on {}/{} instances ({:.1}%), mean gap {:.3}, max gap {}; greedy optimal on {}",
                summary.solver_optimal,
                summary.instances,
                100.0 * summary.optimal_rate,
                summary.mean_gap,
                summary.max_gap,
                summary.greedy_optimal
            );
            let mut doc = json!({ "params": gen.params(), "summary": summary });
            if detail {
                doc["instances"] = serde_json::to_value(&evals).expect("serializes");
            }
            emit(&doc, out.as_ref())
        }
        Command::Gen { gen, out } => {
            let doc = generate(gen.seed, &gen.params())?;
            match out {
                Some(path) => fs::write(path, doc.to_json())?,
                None => print!("{}", doc.to_json()),
            }
            Ok(())
        }
        Command::Bench {
            paths,
            format,
            generated,
            gen,
            warmups,
            runs,
            solver,
            out,
        } => {
            let cfg = solver.config();
            let mut rows = Vec::new();
            for path in &paths {
                let bundle = load_bundle(&BundleSource::Single(path.clone()), format)?;
                rows.push(bench_bundle(&bundle, &cfg, warmups, runs)?);
            }
            for seed in gen.seed..gen.seed + generated {
                let bundle = generate(seed, &gen.params())?.resolve()?;
                rows.push(bench_bundle(&bundle, &cfg, warmups, runs)?);
            }
            let report = BenchReport::new(warmups, runs, rows);
            eprint!("{}", report.table());
            emit(&report, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            println!("{}", json!({ "error": { "kind": "usage", "message": e.to_string().trim() } }));
            return ExitCode::from(3);
        }
    };

    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
