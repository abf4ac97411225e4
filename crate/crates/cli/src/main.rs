use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use wicktorus::harness::{execute, verify_run, Experiment, ExperimentConfig, Status};

#[derive(Parser)]
#[command(
    name = "wicktorus",
    version,
    about = "Numerical experiments for the Wick-ordered cubic NLS on irrational tori"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resonance counting studies and the strip/annulus vs oracle check.
    CountVerify(RunArgs),
    /// Differences w_{2N} - w_N of the nonlinear part.
    Converge(RunArgs),
    /// Integrate the truncated flow and check conservation.
    Evolve(RunArgs),
    /// Picard iteration for the Duhamel map.
    Picard(RunArgs),
    /// Chaos tails and sup-norm growth of random data.
    ProbVerify(RunArgs),
    /// L^4 / L^2 ratio of free waves against N.
    StrichartzScan(RunArgs),
    /// Norm of a time-localized free wave against delta.
    TlocScan(RunArgs),
    /// Random matrix Cauchy-Schwarz bound.
    CsCheck(RunArgs),
    /// Divisor-pair records by decade.
    DivisorScan(RunArgs),
    /// Recheck the checksums of a finished run directory.
    Verify { dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; missing keys take the reference values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the small smoke configuration instead of the reference one.
    #[arg(long, conflicts_with = "config")]
    smoke: bool,
    /// Output directory (overrides the config and WICKTORUS_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Half-open seed range, e.g. `0..5`.
    #[arg(long, value_parser = parse_seed_range)]
    seed_range: Option<(u64, u64)>,
    /// Preset (`sqrt2`, `golden`, `one`, `three_halves`), `p/q` or a decimal.
    #[arg(long)]
    gamma: Option<String>,
}

fn parse_seed_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad start `{a}`: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad end `{b}`: {e}"))?;
    if b <= a {
        return Err(format!("empty seed range `{s}`"));
    }
    Ok((a, b))
}

fn resolve(experiment: Experiment, args: RunArgs) -> anyhow::Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
            if cfg.experiment != experiment {
                bail!("{} configures `{}`, not `{experiment}`", path.display(), cfg.experiment);
            }
            cfg
        }
        None if args.smoke => ExperimentConfig::smoke(experiment),
        None => ExperimentConfig::reference(experiment),
    };
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some((a, b)) = args.seed_range {
        cfg.seed_start = a;
        cfg.seed_end = b;
    }
    if let Some(g) = args.gamma {
        cfg.gamma = g.parse::<wicktorus::TorusSpec>()?.gamma_string();
    }
    let dir = args.out.unwrap_or_else(|| cfg.out_dir());
    cfg.out = dir.clone();
    cfg.validate()?;
    Ok((cfg, dir))
}

fn run(experiment: Experiment, args: RunArgs) -> anyhow::Result<ExitCode> {
    let (cfg, dir) = resolve(experiment, args)?;
    log::info!(
        "running {experiment} into {} (config {})",
        dir.display(),
        &cfg.hash()[..12]
    );
    let (out, manifest) = execute(&cfg, &dir)?;
    for row in std::iter::once(&out.table.headers).chain(&out.table.rows) {
        println!("{}", row.join("\t"));
    }
    println!();
    for v in &manifest.verdicts {
        println!("{v}");
    }
    println!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
    Ok(if out.failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CountVerify(a) => run(Experiment::CountVerify, a),
        Command::Converge(a) => run(Experiment::Converge, a),
        Command::Evolve(a) => run(Experiment::Evolve, a),
        Command::Picard(a) => run(Experiment::Picard, a),
        Command::ProbVerify(a) => run(Experiment::ProbVerify, a),
        Command::StrichartzScan(a) => run(Experiment::StrichartzScan, a),
        Command::TlocScan(a) => run(Experiment::TlocScan, a),
        Command::CsCheck(a) => run(Experiment::CsCheck, a),
        Command::DivisorScan(a) => run(Experiment::DivisorScan, a),
        Command::Verify { dir } => verify_run(&dir).map_err(Into::into).map(|m| {
            let failed = m.verdicts.iter().any(|v| v.status == Status::Fail);
            println!(
                "{}: {} files verified for {}",
                dir.display(),
                m.files.len(),
                m.experiment
            );
            if failed {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
