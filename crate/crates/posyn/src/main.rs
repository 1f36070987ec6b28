//! Command-line driver for the mapping toolchain.
//!
//! Exit codes: 0 ok, 1 usage, 2 validation, 3 equivalence failure,
//! 4 infeasible mapping.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use posyn::assign::AssignmentMode;
use posyn::config::RunConfig;
use posyn::flow::{
    self, default_grid, AttackReport, DesignChoice, FlowError, GridReport, MiReport, TvlaReport,
};

#[derive(Parser)]
#[command(name = "posyn", about = "Power side-channel aware technology mapping", version)]
struct Cli {
    /// Toolchain config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the seed every flow derives its randomness from.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map the design both ways, verify equivalence, write artifacts.
    Synth {
        /// Assignment mode override.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<AssignmentMode>,
    },
    /// Run the repeated-attempt DPA/CPA protocol on a mapped netlist.
    Attack {
        #[arg(long, value_parser = parse_choice, default_value = "posyn")]
        design: DesignChoice,
    },
    /// Fixed-vs-random leakage assessment on a mapped netlist.
    Tvla {
        #[arg(long, value_parser = parse_choice, default_value = "posyn")]
        design: DesignChoice,
    },
    /// Mutual information between the sub-key and noiseless trace energy.
    Mi {
        #[arg(long, value_parser = parse_choice, default_value = "posyn")]
        design: DesignChoice,
    },
    /// Sweep cost weights against the CPA success rate.
    Gridsearch,
    /// Summarize the reports in the output directory.
    Report,
    /// Export a deterministic trace set for inspection.
    Traces {
        #[arg(long, value_parser = parse_choice, default_value = "posyn")]
        design: DesignChoice,
        #[arg(long, default_value_t = 256)]
        count: usize,
    },
}

fn parse_mode(s: &str) -> Result<AssignmentMode, String> {
    match s {
        "replicated" => Ok(AssignmentMode::Replicated),
        "exclusive" => Ok(AssignmentMode::Exclusive),
        other => Err(format!("expected replicated|exclusive, got `{other}`")),
    }
}

fn parse_choice(s: &str) -> Result<DesignChoice, String> {
    match s {
        "conventional" => Ok(DesignChoice::Conventional),
        "posyn" => Ok(DesignChoice::Posyn),
        other => Err(format!("expected conventional|posyn, got `{other}`")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, FlowError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| FlowError::Other("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.sa.seed = seed;
        cfg.model.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), FlowError> {
    match &cli.command {
        Command::Synth { mode } => {
            let mut cfg = load_config(&cli)?;
            if let Some(mode) = mode {
                cfg.mode = *mode;
            }
            let result = flow::cmd_synth(&cfg)?;
            println!(
                "mapped `{}` with {} ({} vulnerable, {} conventional blocks)",
                result.report.design, result.report.library,
                result.report.vulnerable_blocks, result.report.conventional_blocks
            );
            println!(
                "leakage-aware total cost {:.4}, netlist change {:.1}%",
                result.report.posyn_total_cost, result.report.netlist_change_percent
            );
            print!("{}", result.equivalence_posyn.summary());
            println!("artifacts written to {}", cfg.out_dir.display());
        }
        Command::Attack { design } => {
            let cfg = load_config(&cli)?;
            let report: AttackReport = flow::cmd_attack(&cfg, *design)?;
            println!(
                "{}: CPA success rate {:.3}, DPA success rate {:.3} ({} attempts x {} traces)",
                report.design,
                report.cpa_success_rate,
                report.dpa_success_rate,
                report.attempts,
                report.num_traces
            );
        }
        Command::Tvla { design } => {
            let cfg = load_config(&cli)?;
            let report: TvlaReport = flow::cmd_tvla(&cfg, *design)?;
            println!(
                "{}: max |t| = {:.2} over {} samples, {} exceed {:.1} ({})",
                report.design,
                report.max_abs_t,
                report.t_values.len(),
                report.exceed_count,
                report.threshold,
                if report.below_threshold { "below threshold" } else { "LEAKING" }
            );
        }
        Command::Mi { design } => {
            let cfg = load_config(&cli)?;
            let report: MiReport = flow::cmd_mi(&cfg, *design)?;
            println!(
                "{}: I(K; energy) = {:.4} bits of {:.1} (bins {}, samples {})",
                report.design, report.bits, report.key_entropy_bits, report.bins, report.samples
            );
        }
        Command::Gridsearch => {
            let cfg = load_config(&cli)?;
            let report: GridReport = flow::cmd_gridsearch(&cfg, &default_grid())?;
            for point in &report.points {
                println!(
                    "alpha {:<5} beta {:<5} gamma {:<5} cpa {:.3} dpa {:.3} change {:.1}%",
                    point.alpha,
                    point.beta,
                    point.gamma,
                    point.cpa_success_rate,
                    point.dpa_success_rate,
                    point.netlist_change_percent
                );
            }
            for note in &report.skipped {
                println!("skipped {note}");
            }
            if let Some(best) = &report.best {
                println!(
                    "best: alpha {} beta {} gamma {} (cpa {:.3}, change {:.1}%)",
                    best.alpha, best.beta, best.gamma,
                    best.cpa_success_rate, best.netlist_change_percent
                );
            }
        }
        Command::Report => {
            let cfg = load_config(&cli)?;
            print_report_summary(&cfg)?;
        }
        Command::Traces { design, count } => {
            let cfg = load_config(&cli)?;
            let ts = flow::export_traces(&cfg, *design, *count)?;
            println!(
                "wrote {} traces x {} samples to {}",
                ts.traces.len(),
                ts.num_samples,
                cfg.out_dir.display()
            );
        }
    }
    Ok(())
}

fn print_report_summary(cfg: &RunConfig) -> Result<(), FlowError> {
    let dir = &cfg.out_dir;
    let read = |name: &str| std::fs::read_to_string(dir.join(name));
    if let Ok(text) = read("synth_report.json") {
        let report: flow::SynthReport =
            serde_json::from_str(&text).map_err(|e| FlowError::Other(e.to_string()))?;
        println!(
            "synthesis: {} on {} ({} mode): {} vulnerable / {} conventional blocks",
            report.design, report.library, report.mode,
            report.vulnerable_blocks, report.conventional_blocks
        );
        println!(
            "  total cost {:.4}, netlist change {:.1}%, equivalence conv={} posyn={}",
            report.posyn_total_cost,
            report.netlist_change_percent,
            report.equivalence_conventional,
            report.equivalence_posyn
        );
    }
    for choice in ["conventional", "posyn"] {
        if let Ok(text) = read(&format!("attack_{choice}.json")) {
            let report: AttackReport =
                serde_json::from_str(&text).map_err(|e| FlowError::Other(e.to_string()))?;
            println!(
                "attack {}: CPA {:.3}, DPA {:.3} ({} x {})",
                choice,
                report.cpa_success_rate,
                report.dpa_success_rate,
                report.attempts,
                report.num_traces
            );
        }
        if let Ok(text) = read(&format!("tvla_{choice}.json")) {
            let report: TvlaReport =
                serde_json::from_str(&text).map_err(|e| FlowError::Other(e.to_string()))?;
            println!(
                "tvla {}: max |t| {:.2}, exceed {}, excluded {}",
                choice, report.max_abs_t, report.exceed_count, report.excluded
            );
        }
        if let Ok(text) = read(&format!("mi_{choice}.json")) {
            let report: MiReport =
                serde_json::from_str(&text).map_err(|e| FlowError::Other(e.to_string()))?;
            println!("mi {}: {:.4} bits", choice, report.bits);
        }
    }
    Ok(())
}
