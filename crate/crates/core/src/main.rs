use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coop_relay::assignment::{assign, build_weight_matrix, Strategy};
use coop_relay::channel::{Point, SystemParams};
use coop_relay::harness::oracle::{oracle_assign, Objective};
use coop_relay::harness::topology::{generate_topology, read_topology, Layout};
use coop_relay::harness::{run_experiment_records, summarize, write_csv, ConfigFile, ExperimentSpec};
use coop_relay::matching::{bottleneck_matching, hungarian_min_weight, minimum_bottleneck_matching};
use coop_relay::power::Policy;
use coop_relay::Result;

const SEED_ENV: &str = "COOP_RELAY_SEED";

#[derive(Parser)]
#[command(version, about = "Relay assignment and lifetime simulation for cooperative relay networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign relays and powers for a topology file.
    Assign(AssignArgs),
    /// Run a Monte-Carlo experiment and write CSV.
    Simulate(SimulateArgs),
    /// Run one of the four reference comparisons (same as `simulate --fig`).
    Sweep(SweepArgs),
    /// Cross-check the solvers against exhaustive search on small random instances.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct AssignArgs {
    /// Topology file (`bs x y`, `s x y energy`, `r x y energy` lines).
    topology: PathBuf,
    #[arg(long, default_value = "GLM-MBM")]
    strategy: Strategy,
    #[arg(long, default_value_t = 1e-4)]
    ser: f64,
    /// Configuration file supplying the channel parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Override the number of random topologies.
    #[arg(long)]
    topologies: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write per-update assignments of topology 0 to this CSV file.
    #[arg(long)]
    timeline: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Start from a figure preset instead of the configuration defaults.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    fig: Option<u8>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    fig: u8,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 4)]
    sources: usize,
    #[arg(long, default_value_t = 6)]
    relays: usize,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Assign(args) => cmd_assign(args),
        Command::Simulate(args) => cmd_simulate(args.fig, args.run),
        Command::Sweep(args) => cmd_simulate(Some(args.fig), args.run),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_assign(args: AssignArgs) -> Result<ExitCode> {
    let topology = read_topology(&args.topology)?;
    let params = match &args.config {
        Some(path) => ConfigFile::read(path)?.params()?,
        None => SystemParams::default(),
    };
    let targets = vec![args.ser; topology.num_sources()];
    let a = assign(&topology, &params, args.strategy, &targets)?;
    let mut out = io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &a).map_err(io::Error::from)?;
        writeln!(out)?;
        return Ok(ExitCode::SUCCESS);
    }
    writeln!(out, "# strategy {}  ser_target {}", args.strategy, args.ser)?;
    writeln!(out, "source relay ps_w pr_w weight")?;
    for p in &a.pairs {
        writeln!(out, "{} {} {:.6e} {:.6e} {:.6e}", p.source, p.relay, p.ps, p.pr, p.weight)?;
    }
    match args.strategy.policy() {
        Policy::Glm => writeln!(out, "# max weight {:.6e} (first death after {:.3} s)", a.max_weight(), 1.0 / a.max_weight())?,
        Policy::Mwtp => writeln!(out, "# total weight {:.6e}", a.total_weight())?,
    }
    if let Some(certified) = a.certified {
        writeln!(out, "# minimum bottleneck certified: {certified}")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(fig: Option<u8>, run: RunArgs) -> Result<ExitCode> {
    let mut spec = match (&run.config, fig) {
        (Some(path), _) => ConfigFile::read(path)?.into_spec()?,
        (None, Some(f)) => ExperimentSpec::figure(f)?,
        (None, None) => ExperimentSpec::default(),
    };
    if let (Some(_), Some(f)) = (&run.config, fig) {
        let preset = ExperimentSpec::figure(f)?;
        spec.sweep = preset.sweep;
        spec.sweep_values = preset.sweep_values;
    }
    if let Some(seed) = run.seed {
        spec.seed = seed;
    }
    if let Some(k) = run.topologies {
        spec.topologies = k;
    }
    if run.timeline.is_some() {
        spec.sim.record_timeline = true;
    }
    let records = run_experiment_records(&spec)?;
    let rows = summarize(&spec, &records);
    match &run.output {
        Some(path) => write_csv(BufWriter::new(File::create(path)?), &rows)?,
        None => write_csv(io::stdout().lock(), &rows)?,
    }
    if let Some(path) = &run.timeline {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["strategy", "sweep_value", "packets_delivered", "source", "relay", "ps_w", "pr_w"])?;
        for rec in records.iter().filter(|r| r.topology_index == 0) {
            for snap in rec.result.timeline.iter().flatten() {
                for p in &snap.pairs {
                    w.write_record([
                        rec.strategy.to_string(),
                        rec.sweep_value.to_string(),
                        snap.packets_delivered.to_string(),
                        p.source.to_string(),
                        p.relay.to_string(),
                        p.ps.to_string(),
                        p.pr.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let params = SystemParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (mut sum_ok, mut bn_ok, mut lex_ok, mut certified) = (0usize, 0usize, 0usize, 0usize);
    for k in 0..args.instances {
        let layout = Layout {
            area_side: 100.0,
            bs: Point::new(50.0, 50.0),
            sources: args.sources,
            relays: args.relays,
            initial_energy: 10.0,
        };
        let mut topology = generate_topology(args.seed, k as u64, &layout)?;
        // uneven residual energies make the comparison less trivial
        let es: Vec<f64> = (0..args.sources).map(|_| rng.gen_range(1.0..10.0)).collect();
        let er: Vec<f64> = (0..args.relays).map(|_| rng.gen_range(1.0..10.0)).collect();
        topology = topology.with_energies(&es, &er)?;
        let targets = vec![1e-4; args.sources];

        let w_mwtp = build_weight_matrix(&topology, &params, Policy::Mwtp, &targets)?;
        let oracle_sum = oracle_assign(&topology, &params, Policy::Mwtp, Objective::Sum, &targets)?;
        if hungarian_min_weight(&w_mwtp).1 == oracle_sum.total_weight() {
            sum_ok += 1;
        }

        let w_glm = build_weight_matrix(&topology, &params, Policy::Glm, &targets)?;
        let oracle_bn = oracle_assign(&topology, &params, Policy::Glm, Objective::Bottleneck, &targets)?;
        if bottleneck_matching(&w_glm).bottleneck_value == oracle_bn.max_weight() {
            bn_ok += 1;
        }

        let mbm = minimum_bottleneck_matching(&w_glm);
        if mbm.certified {
            certified += 1;
            let oracle_lex = oracle_assign(&topology, &params, Policy::Glm, Objective::LexBottleneck, &targets)?;
            let mut want: Vec<f64> = oracle_lex.pairs.iter().map(|p| p.weight).collect();
            want.sort_by(|a, b| b.total_cmp(a));
            if mbm.matching.descending_weights(&w_glm) == want {
                lex_ok += 1;
            }
        }
    }
    let n = args.instances;
    println!("instances {n} ({} sources, {} relays, seed {})", args.sources, args.relays, args.seed);
    println!("hungarian sum     agrees {sum_ok}/{n}");
    println!("bottleneck value  agrees {bn_ok}/{n}");
    println!("certified MBM lex agrees {lex_ok}/{certified} (certified {certified}/{n})");
    let all = sum_ok == n && bn_ok == n && lex_ok == certified;
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
