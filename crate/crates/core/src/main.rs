//! Command-line harness: exact reachability runs, fill-rate and speedup
//! benchmarks, analytic probe bounds, and the bucket-protocol checker.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reachstore::bench::{
    bench_fill, bench_speedup, check_protocol_all, explore_record, probe_bounds, run_explore,
    write_report, FillConfig, ReportFormat, RunRecord, SpeedupConfig, StorageKind, Variant,
};
use reachstore::reachability::{ExploreOptions, Order};
use reachstore::Strategy;

#[derive(Parser)]
#[command(
    name = "reachstore",
    about = "Lockless shared state storage with a parallel reachability engine and benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Explore a model's state space and report exact counts.
    Reach(ReachArgs),
    /// Throughput and scalability experiments.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Evaluate the analytic probe-count bounds at given fill fractions.
    ProbeBounds(ProbeBoundsArgs),
    /// Exhaustively check the bucket protocol over a tiny table.
    CheckProtocol(CheckProtocolArgs),
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Throughput across fill rates with a mixed read/insert stream.
    Fill(FillArgs),
    /// Speedup and efficiency across storages and worker counts.
    Speedup(SpeedupArgs),
}

fn parse_order(s: &str) -> Result<Order, String> {
    match s {
        "bfs" => Ok(Order::Bfs),
        "dfs" => Ok(Order::Dfs),
        other => Err(format!("unknown order `{other}` (expected bfs or dfs)")),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    match s {
        "static" => Ok(Strategy::Static),
        "srp" => Ok(Strategy::Srp),
        other => Err(format!("unknown balancer `{other}` (expected static or srp)")),
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output path, or `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    /// Report format.
    #[arg(long, default_value = "csv", value_parser = ReportFormat::parse)]
    format: ReportFormat,
}

impl OutputArgs {
    fn write(&self, records: &[RunRecord]) -> Result<(), Box<dyn std::error::Error>> {
        if self.out == "-" {
            let mut stdout = std::io::stdout().lock();
            write_report(records, self.format, &mut stdout)?;
        } else {
            let mut file = File::create(PathBuf::from(&self.out))?;
            write_report(records, self.format, &mut file)?;
            file.flush()?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct ReachArgs {
    /// Model: hanoi:N, phils:N, diamond:W,D, helix:W,D, or ets:PATH.
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "lockless", value_parser = StorageKind::parse)]
    storage: StorageKind,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "bfs", value_parser = parse_order)]
    order: Order,
    /// Load balancing strategy.
    #[arg(long, default_value = "srp", value_parser = parse_strategy)]
    lb: Strategy,
    /// log2 of the table size.
    #[arg(long, default_value_t = 22)]
    table_bits: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Also write a run record to this path (`-` for stdout).
    #[arg(long)]
    out: Option<String>,
    #[arg(long, default_value = "csv", value_parser = ReportFormat::parse)]
    format: ReportFormat,
}

#[derive(Args)]
struct FillArgs {
    /// Fill-rate targets in (0,1), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9")]
    fill: Vec<f64>,
    /// Worker counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    threads: Vec<usize>,
    /// Reads per insert in the measured stream.
    #[arg(long, default_value_t = 4)]
    rw_ratio: u32,
    #[arg(long, default_value_t = 22)]
    table_bits: u32,
    /// Stored vector length.
    #[arg(long, default_value_t = 8)]
    vector_len: usize,
    #[arg(long, default_value_t = 4)]
    reps: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Measured operations per point (capped by table headroom).
    #[arg(long, default_value_t = 1_000_000)]
    ops: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SpeedupArgs {
    /// Model: hanoi:N, phils:N, diamond:W,D, helix:W,D, or ets:PATH.
    #[arg(long)]
    model: String,
    /// Storages to compare, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "lockless", value_parser = StorageKind::parse)]
    storage: Vec<StorageKind>,
    /// Worker counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    threads: Vec<usize>,
    #[arg(long, default_value = "bfs", value_parser = parse_order)]
    order: Order,
    #[arg(long, default_value = "srp", value_parser = parse_strategy)]
    lb: Strategy,
    #[arg(long, default_value_t = 22)]
    table_bits: u32,
    #[arg(long, default_value_t = 4)]
    reps: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ProbeBoundsArgs {
    /// Fill fractions in (0,1), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9")]
    alpha: Vec<f64>,
}

#[derive(Args)]
struct CheckProtocolArgs {
    /// Protocol ordering to check.
    #[arg(long, default_value = "correct", value_parser = Variant::parse)]
    variant: Variant,
}

fn cmd_reach(args: &ReachArgs) -> Result<(), Box<dyn std::error::Error>> {
    let model = reachstore::models::from_spec(&args.model)?;
    let opts = ExploreOptions {
        workers: args.threads,
        order: args.order,
        strategy: args.lb,
        seed: args.seed,
        ..ExploreOptions::default()
    };
    let report = run_explore(args.storage, model.as_ref(), args.table_bits, &opts)?;
    println!("model        {}", report.model);
    println!("storage      {}", report.storage);
    println!(
        "workers      {} ({}, {})",
        report.workers,
        report.order.label(),
        report.strategy.label()
    );
    println!("states       {}", report.states);
    println!("transitions  {}", report.transitions);
    println!(
        "trans/state  {:.3}",
        report.transitions as f64 / report.states.max(1) as f64
    );
    println!("deadlocks    {}", report.deadlocks);
    for (i, d) in report.deadlock_samples.iter().enumerate() {
        println!("  deadlock[{i}]  {d:?}");
    }
    println!("wall         {:.3} ms", report.wall.as_secs_f64() * 1e3);
    println!("fop calls    {}", report.totals.fop_calls());
    println!("lock waits   {}", report.totals.lock_waits());
    println!("cas failures {}", report.totals.cas_failures());
    println!(
        "probes/op    {:.4}",
        report.totals.probes_total() as f64 / report.totals.fop_calls().max(1) as f64
    );
    if report.balance.polls > 0 {
        println!(
            "balancing    {} polls, {} handoffs, {} states moved",
            report.balance.polls, report.balance.handoffs_given, report.balance.states_given
        );
    }
    if let Some(out) = &args.out {
        let record = explore_record("reach", &report, args.table_bits, 1.0, 1.0, vec![]);
        let output = OutputArgs {
            out: out.clone(),
            format: args.format,
        };
        output.write(&[record])?;
    }
    Ok(())
}

fn cmd_fill(args: &FillArgs) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = FillConfig {
        table_bits: args.table_bits,
        vector_len: args.vector_len,
        fills: args.fill.clone(),
        workers: args.threads.clone(),
        rw_ratio: args.rw_ratio,
        reps: args.reps,
        seed: args.seed,
        ops_target: args.ops,
    };
    let records = bench_fill(&cfg)?;
    args.output.write(&records)?;
    Ok(())
}

fn cmd_speedup(args: &SpeedupArgs) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SpeedupConfig {
        model_spec: args.model.clone(),
        storages: args.storage.clone(),
        workers: args.threads.clone(),
        reps: args.reps,
        table_bits: args.table_bits,
        order: args.order,
        strategy: args.lb,
        seed: args.seed,
    };
    let records = bench_speedup(&cfg)?;
    args.output.write(&records)?;
    Ok(())
}

fn cmd_probe_bounds(args: &ProbeBoundsArgs) -> Result<(), Box<dyn std::error::Error>> {
    println!("alpha,successful_bound,unsuccessful_bound");
    for &alpha in &args.alpha {
        let b = probe_bounds(alpha)?;
        println!("{},{},{}", b.alpha, b.successful, b.unsuccessful);
    }
    Ok(())
}

fn cmd_check_protocol(args: &CheckProtocolArgs) -> Result<bool, Box<dyn std::error::Error>> {
    match check_protocol_all(args.variant) {
        Ok(reports) => {
            for (scenario, report) in reports {
                println!(
                    "ok  {:<16} {:>4} states explored, {:>2} terminal configurations",
                    scenario.label(),
                    report.states_explored,
                    report.terminal_states
                );
            }
            Ok(true)
        }
        Err(violation) => {
            println!("violation: {:?}", violation.kind);
            for line in &violation.trace {
                println!("  {line}");
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Reach(args) => cmd_reach(args).map(|()| true),
        Cmd::Bench(BenchCmd::Fill(args)) => cmd_fill(args).map(|()| true),
        Cmd::Bench(BenchCmd::Speedup(args)) => cmd_speedup(args).map(|()| true),
        Cmd::ProbeBounds(args) => cmd_probe_bounds(args).map(|()| true),
        Cmd::CheckProtocol(args) => cmd_check_protocol(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
