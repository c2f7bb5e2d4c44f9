//! Command-line front end: run scenarios, sweep directories, certify graph
//! robustness, and search for robust topologies.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asns_core::graph::DirectedGraph;
use asns_core::harness::{
    parse_graph_literal, parse_scenario, random_robust_graph, run_scenario,
    serialize_graph_literal, write_trace, Defense, Scenario, SimTrace,
};
use asns_core::rng::SplitMix64;

#[derive(Parser)]
#[command(
    name = "asns",
    about = "Resilient consensus simulator: active secure neighbor selection, W-MSR baseline, and exact graph robustness certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its trace.
    Run {
        /// Scenario file path.
        scenario: PathBuf,
        /// Output directory for states.csv, events.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario's defense (asns, wmsr, none, connectivity-baseline).
        #[arg(long)]
        defense: Option<String>,
        /// Override the scenario's horizon.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Run every `.scn` scenario in a directory, in parallel.
    Sweep {
        /// Directory containing scenario files.
        dir: PathBuf,
        /// Root output directory (default: `<dir>/traces`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the robustness of a graph literal file.
    Robustness {
        /// Graph literal file path.
        graph: PathBuf,
    },
    /// Search for an r-robust graph and print its literal.
    GenRobust {
        /// Node count (at most 12).
        #[arg(long)]
        n: u32,
        /// Target robustness.
        #[arg(long)]
        r: usize,
        /// Search seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rejection-sampling budget.
        #[arg(long, default_value_t = 2000)]
        tries: usize,
    },
}

fn load_scenario(
    path: &Path,
    defense: Option<&str>,
    horizon: Option<u64>,
) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut scenario =
        parse_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(name) = defense {
        scenario.defense = Defense::from_name(name)
            .ok_or_else(|| format!("unknown defense override {name:?}"))?;
    }
    if let Some(k) = horizon {
        scenario.horizon = k;
    }
    scenario
        .validate()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(scenario)
}

fn report(trace: &SimTrace) {
    let s = &trace.summary;
    let status = if s.converged {
        "converged".to_string()
    } else if let Some(failure) = &s.defense_failure {
        format!("defense failure ({failure})")
    } else {
        "not converged".to_string()
    };
    println!(
        "{}: {} [defense {}, steps {}, epochs {}, final hull width {:.3e}]",
        s.name, status, s.defense, s.last_step, s.epoch_count, s.final_hull_width
    );
}

fn cmd_run(
    scenario_path: &Path,
    out: Option<PathBuf>,
    defense: Option<String>,
    horizon: Option<u64>,
) -> Result<bool, String> {
    let scenario = load_scenario(scenario_path, defense.as_deref(), horizon)?;
    let trace = run_scenario(&scenario).map_err(|e| e.to_string())?;
    let out = out.unwrap_or_else(|| {
        let stem = scenario_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "scenario".to_string());
        PathBuf::from(format!("{stem}-trace"))
    });
    let paths = write_trace(&trace, &out).map_err(|e| e.to_string())?;
    report(&trace);
    println!("trace written to {}", paths.states_csv.parent().unwrap().display());
    Ok(trace.summary.converged)
}

fn cmd_sweep(dir: &Path, out: Option<PathBuf>) -> Result<bool, String> {
    let out_root = out.unwrap_or_else(|| dir.join("traces"));
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("cannot read {}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "scn"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(format!("no .scn files in {}", dir.display()));
    }

    let results: Vec<Result<bool, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|path| {
                let out_root = out_root.clone();
                scope.spawn(move || -> Result<bool, String> {
                    let scenario = load_scenario(path, None, None)?;
                    let trace = run_scenario(&scenario).map_err(|e| e.to_string())?;
                    let stem = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().to_string())
                        .unwrap_or_else(|| "scenario".to_string());
                    write_trace(&trace, &out_root.join(stem)).map_err(|e| e.to_string())?;
                    report(&trace);
                    Ok(trace.summary.converged)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("worker panicked".to_string())))
            .collect()
    });

    let mut all_converged = true;
    for result in results {
        all_converged &= result?;
    }
    Ok(all_converged)
}

fn cmd_robustness(path: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let graph = parse_graph_literal(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let robustness = graph.max_robustness().map_err(|e| e.to_string())?;
    println!("max robustness: {robustness}");
    match graph.has_rooted_spanning_tree() {
        (true, Some(root)) => println!("rooted spanning tree: yes (root {root})"),
        _ => println!("rooted spanning tree: no"),
    }
    Ok(())
}

fn cmd_gen_robust(n: u32, r: usize, seed: u64, tries: usize) -> Result<(), String> {
    let mut rng = SplitMix64::new(seed);
    let graph: DirectedGraph = random_robust_graph(n, r, &mut rng, tries)
        .ok_or_else(|| format!("no {r}-robust graph on {n} nodes found within {tries} tries"))?;
    let certified = graph.max_robustness().map_err(|e| e.to_string())?;
    eprintln!("# certified robustness: {certified}");
    print!("{}", serialize_graph_literal(&graph));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool, String> = match cli.command {
        Command::Run { scenario, out, defense, horizon } => {
            cmd_run(&scenario, out, defense, horizon)
        }
        Command::Sweep { dir, out } => cmd_sweep(&dir, out),
        Command::Robustness { graph } => cmd_robustness(&graph).map(|()| true),
        Command::GenRobust { n, r, seed, tries } => cmd_gen_robust(n, r, seed, tries).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
