//! Command-line front end: run experiments, emit constructed graphs, verify
//! equilibria, check stability flags and query the regime oracle.
//!
//! Exit codes: 0 on success, 1 on usage or validation failures, 2 when an
//! analysis requested as a positive check comes back negative.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use greedy_peering::harness::{load_config, run_experiment};
use greedy_peering::{
    build_capped_general_nash, build_capped_unit_nash, build_stable_topology, build_uncapped_nash,
    check_structural_stability, gen_random, regime_oracle, verify_nash, GameParams, NashMode,
    PeerGraph, ProtocolRng, TieRule,
};

#[derive(Parser)]
#[command(name = "greedy-peering", version, about = "Greedy peer-selection simulator and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write its CSV artifacts
    Simulate {
        /// Flat key=value configuration file
        config: PathBuf,
    },
    /// Emit a constructed graph as an edge list on stdout
    Construct {
        #[command(subcommand)]
        family: Family,
    },
    /// Verify a graph snapshot for best-response stability
    VerifyNash {
        /// Edge-list file; '-' or absent reads stdin
        edgelist: Option<PathBuf>,
        /// Enforce the inbound cap on deviation targets
        #[arg(long)]
        capped: bool,
        /// exhaustive | single-swap
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        /// Abort after this many candidate actions
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Structural stability flags for a graph snapshot
    CheckStability {
        /// Edge-list file; '-' or absent reads stdin
        edgelist: Option<PathBuf>,
        /// Analyze under this tie rule instead of the one in the header
        #[arg(long)]
        tie: Option<String>,
    },
    /// Existence of stable topologies for a parameter regime
    Regime {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        din: Option<usize>,
        /// random | fifo | lifo | global
        #[arg(long)]
        rule: String,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Hub-centred uncapped equilibrium
    UncappedNash { n: usize, m: usize, d: usize },
    /// Triangle-plus-trees capped equilibrium with unit out-degree
    CappedUnitNash { d_in: usize, k: u32, k_prime: u32 },
    /// Layered capped equilibrium over a butterfly middle component
    Butterfly { k: u32, d: usize, n: usize },
    /// Stable topology for the round protocol
    Stable {
        n: usize,
        m: usize,
        d: usize,
        /// random | fifo | lifo | global
        tie: String,
    },
    /// Seeded uniform random initial graph
    Random {
        n: usize,
        m: usize,
        d: usize,
        seed: u64,
        /// Optional inbound cap
        #[arg(long)]
        din: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load_config(&config).map_err(|e| e.to_string())?;
            for warning in &cfg.warnings {
                eprintln!("warning: {warning}");
            }
            let series = run_experiment(&cfg).map_err(|e| e.to_string())?;
            let last = series.rows.last().expect("round 0 always present");
            println!(
                "rounds={} reps={} final_avg_score_all={:.6} final_diameter={:.3} final_miner_diameter={:.3}",
                cfg.rounds,
                cfg.repetitions,
                rat_f64(&last.avg_score_all),
                rat_f64(&last.diameter),
                rat_f64(&last.miner_diameter),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Construct { family } => {
            let g = construct(family)?;
            print!("{}", g.export_edge_list());
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyNash {
            edgelist,
            capped,
            mode,
            budget,
        } => {
            let g = read_graph(edgelist.as_deref())?;
            let mode = match mode.as_str() {
                "exhaustive" => NashMode::Exhaustive,
                "single-swap" => NashMode::SingleSwap,
                other => return Err(format!("unknown mode '{other}'")),
            };
            let verdict = verify_nash(&g, capped, mode, budget).map_err(|e| e.to_string())?;
            println!(
                "is_nash={} mode={} actions_examined={}",
                verdict.is_nash, verdict.mode, verdict.actions_examined
            );
            if let Some(w) = &verdict.witness {
                let action: Vec<String> = w.action.iter().map(|t| t.to_string()).collect();
                println!(
                    "witness node={} action=[{}] old_score={} new_score={}",
                    w.node,
                    action.join(","),
                    w.old_score,
                    w.new_score
                );
            }
            Ok(if verdict.is_nash {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::CheckStability { edgelist, tie } => {
            let g = read_graph(edgelist.as_deref())?;
            let mut params = g.params().clone();
            if let Some(tie) = tie {
                params.tie_rule =
                    TieRule::parse(&tie).ok_or_else(|| format!("unknown tie rule '{tie}'"))?;
            }
            let verdict = check_structural_stability(&g, &params);
            println!("{}", verdict.report_line());
            Ok(ExitCode::SUCCESS)
        }
        Command::Regime { n, m, d, din, rule } => {
            let rule = TieRule::parse(&rule).ok_or_else(|| format!("unknown tie rule '{rule}'"))?;
            let answer = regime_oracle(n, m, d, din, rule);
            println!("{}", answer.report_line());
            println!("citations={}", answer.citations.join(","));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn construct(family: Family) -> Result<PeerGraph, String> {
    match family {
        Family::UncappedNash { n, m, d } => build_uncapped_nash(n, m, d).map_err(|e| e.to_string()),
        Family::CappedUnitNash { d_in, k, k_prime } => {
            build_capped_unit_nash(d_in, k, k_prime).map_err(|e| e.to_string())
        }
        Family::Butterfly { k, d, n } => {
            build_capped_general_nash(k, d, n).map_err(|e| e.to_string())
        }
        Family::Stable { n, m, d, tie } => {
            let tie = TieRule::parse(&tie).ok_or_else(|| format!("unknown tie rule '{tie}'"))?;
            build_stable_topology(n, m, d, tie).map_err(|e| e.to_string())
        }
        Family::Random { n, m, d, seed, din } => {
            use rand::SeedableRng;
            let params =
                GameParams::new(n, m, d, din, TieRule::Lifo, 1).map_err(|e| e.to_string())?;
            let mut rng = ProtocolRng::seed_from_u64(seed);
            gen_random(&params, &mut rng).map_err(|e| e.to_string())
        }
    }
}

fn read_graph(path: Option<&std::path::Path>) -> Result<PeerGraph, String> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?
        }
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("cannot read stdin: {e}"))?;
            buf
        }
    };
    PeerGraph::import_edge_list(&text).map_err(|e| e.to_string())
}

fn rat_f64(v: &num::BigRational) -> f64 {
    use num::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}
