//! `subnodal <scenario> --config <path>`: run one scenario, write its CSV
//! tables and JSON summary, and exit 0 (all verdicts pass), 2 (some verdict
//! fails) or 1 (error).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use subnodal::experiments::{emit_report, load_config_for, run_scenario, Format, ScenarioId};

#[derive(Parser, Debug)]
#[command(name = "subnodal", version, about = "Run a sub-Riemannian nodal-set scenario")]
struct Args {
    /// grushin-scaling, heisenberg-yau, density, courant, ballbox, boxcount,
    /// desing-check, riemannian-limit or flag-report
    scenario: ScenarioId,
    /// Config file (`key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config (default `reports`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled points; overrides `seed` in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// One thread and no timings in the summary, so reruns are byte-identical
    #[arg(long)]
    deterministic: bool,
}

fn run(args: Args) -> Result<bool, String> {
    let mut cfg = load_config_for(&args.config, Some(args.scenario)).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let threads = if args.deterministic { Some(1) } else { args.threads };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| e.to_string())?;
    }
    let report = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let dir = args.out.or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("reports"));
    let files = emit_report(&report, &dir, &[Format::Csv, Format::Json], !args.deterministic).map_err(|e| e.to_string())?;
    for v in &report.verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.criterion, v.detail);
    }
    for (stage, secs) in &report.timings {
        eprintln!("{stage}: {secs:.2}s");
    }
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
