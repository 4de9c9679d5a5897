use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use icn5gc::scenario::{
    emit_comparison, emit_report, load_scenario, presets, run_scenario, Mode, Outcome, ScenarioConfig, ScenarioError,
};

#[derive(Parser)]
#[command(name = "icn5gc", version, about = "Discrete-event simulator of an ICN-enabled 5G core")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its report.
    Run {
        /// Scenario file, or the name of a bundled scenario.
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write counters here, one `name labels value` record per line.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Write the machine-readable report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long = "max-time", value_name = "MS")]
        max_time: Option<u64>,
        /// Print every node's final state after the report.
        #[arg(long)]
        dump_state: bool,
    },
    /// Run two scenarios and print them side by side.
    Compare {
        a: String,
        b: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print a generated connected-car scenario.
    Generate {
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value_t = 10)]
        vehicles: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "ip-mec" => Ok(Mode::IpMec),
        "icn-mec" => Ok(Mode::IcnMec),
        _ => Err(format!("'{s}' is not a mec mode (ip-mec, icn-mec)")),
    }
}

/// Exit codes: 0 quiescent success, 1 aborted run, 2 bad input or I/O.
const ABORTED: u8 = 1;
const INVALID: u8 = 2;

fn load(spec: &str, seed: Option<u64>, max_time: Option<u64>) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = if Path::new(spec).exists() {
        load_scenario(spec)?
    } else {
        match presets::bundled(spec) {
            Some(cfg) => cfg,
            None => load_scenario(spec)?,
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = max_time {
        cfg.max_time_ms = t;
    }
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn verdict(o: &Outcome) -> Option<String> {
    if !o.report.quiescent {
        return Some(format!("stopped at {} ms with {} events pending", o.summary.final_clock, o.summary.pending));
    }
    if !o.report.abort_reasons.is_empty() {
        return Some(format!("handover aborted: {}", o.report.abort_reasons.join("; ")));
    }
    None
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INVALID)
        }
    }
}

fn execute(command: Command) -> Result<u8, ScenarioError> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Run {
            scenario,
            seed,
            trace,
            metrics,
            report,
            max_time,
            dump_state,
        } => {
            let cfg = load(&scenario, seed, max_time)?;
            let outcome = if dump_state {
                let mut sim = icn5gc::scenario::Simulation::new(&cfg);
                let summary = sim.run();
                for line in sim.network.dump(&sim.kernel) {
                    println!("{line}");
                }
                Outcome {
                    report: sim.report(&summary),
                    residue: sim.sweep(),
                    trace: sim.kernel.trace().to_vec(),
                    metrics: sim.kernel.metrics.render(),
                    summary,
                }
            } else {
                run_scenario(&cfg)
            };
            if let Some(p) = trace {
                write(&p, &outcome.trace_text())?;
            }
            if let Some(p) = metrics {
                write(&p, &outcome.metrics)?;
            }
            emit_report(&outcome.report, &mut stdout, report.as_deref())?;
            for line in &outcome.residue {
                eprintln!("residue {line}");
            }
            match verdict(&outcome) {
                Some(why) => {
                    eprintln!("{why}");
                    Ok(ABORTED)
                }
                None => Ok(0),
            }
        }
        Command::Compare { a, b, seed, report } => {
            let (ca, cb) = (load(&a, seed, None)?, load(&b, seed, None)?);
            let (oa, ob) = std::thread::scope(|s| {
                let ha = s.spawn(|| run_scenario(&ca));
                let ob = run_scenario(&cb);
                (ha.join().expect("simulation thread"), ob)
            });
            emit_comparison(&oa.report, &ob.report, &mut stdout, report.as_deref())?;
            let failed: Vec<String> = [&oa, &ob].into_iter().filter_map(verdict).collect();
            for why in &failed {
                eprintln!("{why}");
            }
            Ok(if failed.is_empty() { 0 } else { ABORTED })
        }
        Command::Generate { mode, vehicles, seed } => {
            print!("{}", presets::mec(mode, vehicles, seed));
            Ok(0)
        }
    }
}
