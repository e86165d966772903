use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ubem::config::PipelineConfig;
use ubem::orchestrator::SchedulePolicy;
use ubem::stages::{self, BenchArgs, StageReport};

/// Urban building energy pipeline: synthetic city or GIS layers in,
/// per-building energy, retrofit scenarios and scaling tables out.
#[derive(Debug, Parser)]
#[command(name = "ubem", version)]
struct Cli {
    /// Pipeline configuration (TOML, one section per module).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic city into <out>/synth.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
        /// Number of buildings.
        #[arg(long)]
        buildings: Option<usize>,
    },
    /// Integrate footprints, volumetric units, civic numbers and neighborhoods.
    Ingest,
    /// Fill missing heights from the DSM and DTM rasters.
    Heights,
    /// Build one LoD1 model per building.
    Genmodels {
        /// Shading radius in meters.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Simulate baseline and retrofit variants on the worker pool.
    Simulate {
        /// Shading radius the models were generated with.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        retries: Option<usize>,
    },
    /// Evaluate all 256 retrofit scenarios and their Pareto front.
    Scenarios,
    /// Write the report bundle.
    Report,
    /// Cluster makespan table over node counts and radii.
    Bench(BenchCmd),
    /// Relative change of mean intensities across shading radii.
    Sensitivity {
        /// Comma-separated radii in meters.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        baseline_radius: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct BenchCmd {
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    /// Comma-separated radii in meters.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    cores_per_node: Option<usize>,
    /// lpt or fifo.
    #[arg(long)]
    policy: Option<SchedulePolicy>,
    /// Fit the cost model to N measured tasks per extreme radius.
    #[arg(long, value_name = "N")]
    calibrate: Option<usize>,
    /// Measure simulate throughput on N fresh synthetic buildings.
    #[arg(long, value_name = "N")]
    throughput: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: Cli) -> ubem::Result<StageReport> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    match cli.command {
        Command::Synth { seed, buildings } => {
            cfg.synth.seed = seed.unwrap_or(cfg.synth.seed);
            cfg.synth.n_buildings = buildings.unwrap_or(cfg.synth.n_buildings);
            stages::synth(&cfg)
        }
        Command::Ingest => stages::ingest(&cfg),
        Command::Heights => stages::heights(&cfg),
        Command::Genmodels { radius } => {
            cfg.model.radius_m = radius.unwrap_or(cfg.model.radius_m);
            stages::genmodels(&cfg)
        }
        Command::Simulate {
            radius,
            workers,
            retries,
        } => {
            cfg.model.radius_m = radius.unwrap_or(cfg.model.radius_m);
            cfg.orchestrator.workers = workers.or(cfg.orchestrator.workers);
            cfg.orchestrator.retries = retries.unwrap_or(cfg.orchestrator.retries);
            stages::simulate(&cfg)
        }
        Command::Scenarios => stages::scenarios(&cfg),
        Command::Report => stages::report(&cfg),
        Command::Bench(b) => {
            cfg.bench.nodes = b.nodes.unwrap_or(cfg.bench.nodes);
            cfg.bench.radii = b.radii.unwrap_or(cfg.bench.radii);
            cfg.bench.cores_per_node = b.cores_per_node.unwrap_or(cfg.bench.cores_per_node);
            cfg.bench.policy = b.policy.unwrap_or(cfg.bench.policy);
            cfg.orchestrator.workers = b.workers.or(cfg.orchestrator.workers);
            let args = BenchArgs {
                calibrate_samples: b.calibrate,
                throughput_buildings: b.throughput,
            };
            stages::bench(&cfg, &args)
        }
        Command::Sensitivity { radii, baseline_radius } => {
            cfg.sensitivity.radii = radii.unwrap_or(cfg.sensitivity.radii);
            cfg.sensitivity.baseline_radius_m = baseline_radius.unwrap_or(cfg.sensitivity.baseline_radius_m);
            stages::sensitivity(&cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error kind={} message={:?}", e.kind(), message);
            ExitCode::from(match e {
                ubem::Error::Config(_) | ubem::Error::Validation(_) => 2,
                ubem::Error::MissingStage { .. } => 3,
                _ => 1,
            })
        }
    }
}
