use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use elwave::harness::suites::make_data;
use elwave::harness::{parse_config, run_suite, write_outcome, Outcome, RunConfig, Suite, PRESETS};

/// Shock-formation experiments for planar elastic waves.
#[derive(Parser, Debug)]
#[command(name = "elwave", version)]
struct Cli {
    /// Config file (`[section]` + `key = value`); defaults to the chosen preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in preset used when no config file is given.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print a built-in preset as a config file and exit.
    #[arg(long, value_name = "PRESET")]
    dump_preset: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sampled checks of the eigenstructure.
    EigenCheck,
    /// Reconstruct the initial data and write it.
    MakeData,
    /// Fractional Sobolev norms of the seed over the η sweep.
    SobolevScan,
    /// One evolution with snapshots and shock detection.
    Evolve {
        /// Grid points per η.
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long)]
        cfl: Option<f64>,
        #[arg(long)]
        dissipation: Option<f64>,
        /// Final time (absolute).
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// θ and η sweeps with shock, exclusivity, trend and blow-up verdicts.
    ShockScan,
    /// Everything, including the numerical hygiene studies.
    Report,
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = parse_config(&text)?;
            if let Some(p) = &cli.preset {
                if *p != cfg.preset {
                    bail!("--preset {p} conflicts with preset = \"{}\" in {}", cfg.preset, path.display());
                }
            }
            cfg
        }
        (None, Some(p)) => RunConfig::preset(p)?,
        (None, None) => RunConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.to_string_lossy().into_owned();
    }
    if let Some(Command::Evolve {
        resolution,
        cfl,
        dissipation,
        t_max,
    }) = &cli.command
    {
        if let Some(r) = resolution {
            cfg.grid.resolution = *r;
        }
        if let Some(c) = cfl {
            cfg.evolve.cfl = *c;
        }
        if let Some(d) = dissipation {
            cfg.evolve.dissipation = *d;
        }
        if let Some(t) = t_max {
            cfg.evolve.t_max = Some(*t);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(name) = &cli.dump_preset {
        let cfg = RunConfig::preset(name).with_context(|| format!("known presets: {}", PRESETS.join(", ")))?;
        print!("{}", cfg.to_text());
        return Ok(true);
    }
    let Some(command) = &cli.command else {
        bail!("no subcommand given (try --help)");
    };
    let cfg = load_config(&cli)?;
    let outcome: Outcome = match command {
        Command::MakeData => make_data(&cfg)?,
        Command::EigenCheck => run_suite(&cfg, Suite::EigenCheck)?,
        Command::SobolevScan => run_suite(&cfg, Suite::SobolevScan)?,
        Command::Evolve { .. } => run_suite(&cfg, Suite::Evolve)?,
        Command::ShockScan => run_suite(&cfg, Suite::ShockScan)?,
        Command::Report => run_suite(&cfg, Suite::Full)?,
    };
    let dir = PathBuf::from(&cfg.output.dir);
    let manifest = write_outcome(&dir, &outcome).with_context(|| format!("writing to {}", dir.display()))?;
    for line in elwave::harness::report::summary_lines(&outcome.report) {
        println!("{line}");
    }
    println!("{} files written to {}", manifest.files.len() + 1, dir.display());
    Ok(outcome.report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
