use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holoxl_harness::config::parse_seeds;
use holoxl_harness::{emit_results, run_sweep, Baseline, ExperimentConfig, HarnessError, Kind, Result, SetSpec};

/// Near-field wideband HMA uplink simulator.
#[derive(Parser)]
#[command(name = "holoxl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario per seed (any [sweep] table is ignored).
    Run(Common),
    /// Evaluate every point of the config's sweep axis.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; falls back to the config's `output`, then `holoxl-out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seeds, e.g. `0..10` or `1,4,9`.
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Feasible sets, e.g. `UC,LP,AO[0.001,5]`.
    #[arg(long)]
    sets: Option<String>,
    /// Baselines, e.g. `narrowband,fd_upa,hybrid`; `none` clears them.
    #[arg(long)]
    baselines: Option<String>,
}

fn load(common: &Common, kind: Kind) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.kind = kind;
    if let Some(s) = &common.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(s) = &common.sets {
        cfg.sets = split(s)
            .map(|t| SetSpec::try_from(t.to_string()).map_err(|e| HarnessError::config("--sets", e)))
            .collect::<Result<_>>()?;
    }
    if let Some(s) = &common.baselines {
        cfg.baselines = if s.trim() == "none" {
            Vec::new()
        } else {
            split(s).map(str::parse::<Baseline>).collect::<Result<_>>()?
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

// Commas inside `AO[a,b]` / `BA{0,c}` do not split.
fn split(s: &str) -> impl Iterator<Item = &str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts.into_iter().map(str::trim).filter(|p| !p.is_empty())
}

fn execute(common: &Common, kind: Kind) -> Result<usize> {
    let cfg = load(common, kind)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::config("--threads", e.to_string()))?;
    let out = pool.install(|| run_sweep(&cfg))?;
    let dir = common.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("holoxl-out"));
    let emitted = emit_results(&out, &dir)?;
    let failures = out.failures();
    eprintln!(
        "{} records ({} failed), config {} -> {}",
        out.records.len(),
        failures,
        &out.config_hash[..12],
        emitted.summary.display()
    );
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, kind) = match &cli.command {
        Command::Run(c) => (c, Kind::Single),
        Command::Sweep(c) => (c, Kind::Sweep),
    };
    match execute(common, kind) {
        Ok(0) => ExitCode::SUCCESS,
        // Results were written, but some cells failed.
        Ok(_) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
