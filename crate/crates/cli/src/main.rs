//! `cpn`: command-line front end for continuous Petri net analysis.
//!
//! Exit codes: 0 success or decision true, 1 decision false, 2 input
//! error, 3 MILP exclusion budget exhausted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cpn_core::generators::provenance;
use cpn_core::harness::{run_bench, write_csv, BenchConfig};
use cpn_core::io::{parikh_map, parse_marking, parse_parikh, serialize_net_with, support_ids};
use cpn_core::witness::certificate_report;
use cpn_core::{
    enumerate_solutions, fireable, gen_lattice, max_yield_binsearch, milp_max, parse_net, reachable, BisectOptions,
    Cpn, Marking, MilpMaxOptions, Rational, ReachMode, ResultRecord, YieldResult, YieldStatus,
};

const EXIT_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cpn",
    version,
    about = "Reachability and yield analysis for continuous Petri nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a transition set is a firing set.
    Fireable {
        net: PathBuf,
        /// Comma-separated transition ids.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        subset: Vec<String>,
    },
    /// Decide reachability of a target marking.
    Reach {
        net: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        limit: bool,
    },
    /// Maximise the mass on a goal place.
    MaxYield(MaxYieldArgs),
    /// Validate a Parikh certificate for a target marking.
    CheckWitness {
        net: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        parikh: PathBuf,
        #[arg(long)]
        limit: bool,
        /// Accept any marking covering the target.
        #[arg(long)]
        at_least: bool,
    },
    /// Generate a benchmark instance.
    #[command(subcommand)]
    Gen(Gen),
    /// Run a benchmark config and print CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Binsearch,
    Milp,
}

#[derive(Args)]
struct MaxYieldArgs {
    net: PathBuf,
    #[arg(long)]
    goal: String,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    epsilon: Option<Rational>,
    #[arg(long)]
    cap: Option<usize>,
    /// Limit reachability (default for milp).
    #[arg(long, conflicts_with = "finite")]
    limit: bool,
    /// Finite reachability (default for binsearch).
    #[arg(long)]
    finite: bool,
    /// Return the K best solutions with distinct supports (MILP only).
    #[arg(long, value_name = "K")]
    n_best: Option<usize>,
}

#[derive(Subcommand)]
enum Gen {
    /// East/south lattice with a random resource placement and goal.
    Lattice {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "1/10")]
        fraction: Rational,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Fireable { net, subset } => {
            let (net, m0) = load_net(&net)?;
            let sub = net.transition_set(&subset)?;
            let start = Instant::now();
            let res = fireable(&net, &m0, &sub)?;
            let record = ResultRecord {
                verdict: Some(res.is_member),
                support: support_ids(&net, &res.max_subset),
                ..record("fireable", start)
            };
            emit(&record)?;
            Ok(if res.is_member { 0 } else { EXIT_FALSE })
        }
        Command::Reach { net, target, limit } => {
            let (net, m0) = load_net(&net)?;
            let target = load_marking(&net, &target)?;
            let mode = mode(limit);
            let start = Instant::now();
            let res = reachable(&net, &m0, &target, mode)?;
            let record = ResultRecord {
                mode: Some(mode_name(mode).into()),
                verdict: Some(res.reachable),
                support: if res.reachable {
                    support_ids(&net, &res.support)
                } else {
                    Vec::new()
                },
                parikh: res.parikh.as_ref().map(|v| parikh_map(&net, v)).unwrap_or_default(),
                queries_or_cuts: res.iterations,
                ..record("reach", start)
            };
            emit(&record)?;
            Ok(if res.reachable { 0 } else { EXIT_FALSE })
        }
        Command::MaxYield(args) => max_yield(args),
        Command::CheckWitness {
            net,
            target,
            parikh,
            limit,
            at_least,
        } => {
            let (net, m0) = load_net(&net)?;
            let target = load_marking(&net, &target)?;
            let text = read(&parikh)?;
            let v = parse_parikh(&net, &text).with_context(|| format!("in {}", parikh.display()))?;
            let mode = mode(limit);
            let start = Instant::now();
            let report = certificate_report(&net, &m0, &target, &v, mode, at_least)?;
            let holds = report.holds();
            log::info!(
                "state equation {}, forward {}, backward {}",
                report.state_equation,
                report.forward,
                report.backward
            );
            let record = ResultRecord {
                mode: Some(mode_name(mode).into()),
                verdict: Some(holds),
                support: support_ids(&net, &v.support()),
                parikh: parikh_map(&net, &v),
                ..record("check-witness", start)
            };
            emit(&record)?;
            Ok(if holds { 0 } else { EXIT_FALSE })
        }
        Command::Gen(Gen::Lattice {
            rows,
            cols,
            seed,
            fraction,
        }) => {
            let inst = gen_lattice(rows, cols, seed, &fraction)?;
            let goal = &inst.net.places()[inst.goal];
            let generator = format!(
                "{} rows={rows} cols={cols} fraction={fraction} goal={goal}",
                provenance("lattice", seed)
            );
            let text = serialize_net_with(&inst.net, &inst.m0, Some(&generator))?;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(0)
        }
        Command::Bench { config } => {
            let text = read(&config)?;
            let cfg =
                BenchConfig::from_toml(&text, config.parent()).with_context(|| format!("in {}", config.display()))?;
            let rows = run_bench(&cfg)?;
            write_csv(&rows, std::io::stdout().lock())?;
            Ok(0)
        }
    }
}

fn max_yield(args: MaxYieldArgs) -> anyhow::Result<u8> {
    let (net, m0) = load_net(&args.net)?;
    let goal = net.place_index(&args.goal)?;
    // The MILP checks forward fireability only unless finite mode is asked
    // for explicitly.
    let mode = match args.method {
        Method::Binsearch => mode(args.limit),
        Method::Milp => mode(!args.finite),
    };
    let method = match args.method {
        Method::Binsearch => "binsearch",
        Method::Milp => "milp",
    };
    match args.method {
        Method::Binsearch => {
            if args.n_best.is_some() {
                bail!("--n-best requires --method milp");
            }
            if args.cap.is_some() {
                bail!("--cap requires --method milp");
            }
            let mut opts = BisectOptions::default();
            opts.reach.mode = mode;
            if let Some(eps) = args.epsilon {
                opts.epsilon = eps;
            }
            let start = Instant::now();
            let res = max_yield_binsearch(&net, &m0, goal, &opts)?;
            let rec = yield_record(&net, &res, mode, method, start);
            emit(&rec)?;
            Ok(yield_exit(&res))
        }
        Method::Milp => {
            if args.epsilon.is_some() {
                bail!("--epsilon requires --method binsearch");
            }
            let opts = MilpMaxOptions {
                cap: args.cap.unwrap_or(400),
                strict_finite: mode == ReachMode::Finite,
                ..MilpMaxOptions::default()
            };
            let start = Instant::now();
            match args.n_best {
                None => {
                    let res = milp_max(&net, &m0, goal, &opts)?;
                    emit(&yield_record(&net, &res, mode, method, start))?;
                    Ok(yield_exit(&res))
                }
                Some(k) => {
                    let found = enumerate_solutions(&net, &m0, goal, k, &opts)?;
                    let records: Vec<ResultRecord> = found
                        .solutions
                        .iter()
                        .map(|res| ResultRecord {
                            queries_or_cuts: found.cuts,
                            ..yield_record(&net, res, mode, method, start)
                        })
                        .collect();
                    emit(&records)?;
                    Ok(if found.budget_exhausted { EXIT_BUDGET } else { 0 })
                }
            }
        }
    }
}

fn yield_record(net: &Cpn, res: &YieldResult, mode: ReachMode, method: &str, start: Instant) -> ResultRecord {
    let status = match res.status {
        YieldStatus::Optimal => "optimal",
        YieldStatus::Unbounded => "unbounded",
        YieldStatus::BudgetExhausted => "budget_exhausted",
        YieldStatus::Infeasible => "infeasible",
    };
    ResultRecord {
        mode: Some(mode_name(mode).into()),
        method: Some(method.into()),
        yield_value: (res.status != YieldStatus::Unbounded).then(|| res.value.clone()),
        status: Some(status.into()),
        support: support_ids(net, &res.support),
        parikh: res.parikh.as_ref().map(|v| parikh_map(net, v)).unwrap_or_default(),
        queries_or_cuts: if method == "milp" { res.cuts } else { res.queries },
        ..record("max-yield", start)
    }
}

fn yield_exit(res: &YieldResult) -> u8 {
    match res.status {
        YieldStatus::Optimal | YieldStatus::Unbounded => 0,
        YieldStatus::BudgetExhausted => EXIT_BUDGET,
        YieldStatus::Infeasible => EXIT_FALSE,
    }
}

fn record(query: &str, start: Instant) -> ResultRecord {
    ResultRecord {
        query: query.into(),
        mode: None,
        method: None,
        verdict: None,
        yield_value: None,
        status: None,
        support: Vec::new(),
        parikh: Default::default(),
        queries_or_cuts: 0,
        wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
    }
}

fn emit<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn mode(limit: bool) -> ReachMode {
    if limit {
        ReachMode::Limit
    } else {
        ReachMode::Finite
    }
}

fn mode_name(mode: ReachMode) -> &'static str {
    match mode {
        ReachMode::Finite => "finite",
        ReachMode::Limit => "limit",
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_net(path: &Path) -> anyhow::Result<(Cpn, Marking)> {
    let text = read(path)?;
    parse_net(&text).with_context(|| format!("in {}", path.display()))
}

fn load_marking(net: &Cpn, path: &Path) -> anyhow::Result<Marking> {
    let text = read(path)?;
    parse_marking(net, &text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cpn_core::q;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn default_fraction_parses() {
        assert_eq!("1/10".parse::<Rational>().unwrap(), q(1, 10));
    }
}
