use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eepn_core::analytics::phase_noise_budget;
use eepn_core::harness::{
    emit_chart, emit_csv, parse_link_params, preset, read_csv, run_sweep, ExperimentConfig, HarnessError,
    HarnessResult, PRESET_NAMES,
};

/// Monte-Carlo simulator for EEPN in DP-QPSK links with electronic
/// dispersion compensation.
#[derive(Debug, Parser)]
#[command(name = "eepn", version)]
struct Cli {
    /// Override the master seed of every experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the number of trials per grid point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the experiment described by an INI file.
    Run {
        config: PathBuf,
        /// CSV output path (overrides `csv` in the file).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in experiment and write its CSV and SVG files.
    Preset {
        /// Preset name; omit to list them.
        name: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render an SVG chart from a result CSV.
    Chart {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "ber")]
        y: String,
        /// Column(s) separating the lines; join several with `+`.
        #[arg(long, default_value = "scenario")]
        series: String,
        /// Defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Print the phase-noise budget of a link.
    Analytics {
        /// Comma-separated `key=value` link parameters, e.g.
        /// `fiber_length_km=1000,tx_linewidth_hz=1e5,lo_linewidth_hz=1e5`.
        #[arg(long, default_value = "")]
        link: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rho: f64,
    },
}

enum Outcome {
    Ok,
    Diverged,
}

fn apply_overrides(cfg: &mut ExperimentConfig, cli: &Cli) {
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
}

/// Runs one config and writes its CSV (and chart, if configured).
fn execute(cfg: &ExperimentConfig, csv: &Path, chart_dir: Option<&Path>, jobs: Option<usize>) -> HarnessResult<bool> {
    let n_points = cfg.grid()?.len();
    eprintln!(
        "{}: {} grid points x {} trials",
        cfg.name, n_points, cfg.trials
    );
    let table = run_sweep(cfg, jobs)?;
    let diverged = table.any_diverged();
    let t = table.to_table();
    emit_csv(csv, &t)?;
    eprintln!("wrote {}", csv.display());
    if let Some(spec) = &cfg.chart {
        let path = match chart_dir {
            Some(d) => d.join(spec.path.file_name().unwrap_or(spec.path.as_os_str())),
            None => spec.path.clone(),
        };
        emit_chart(&path, &t, spec, &cfg.name)?;
        eprintln!("wrote {}", path.display());
    }
    if diverged {
        eprintln!("{}: LMS divergence flagged in at least one trial", cfg.name);
    }
    Ok(diverged)
}

fn run(cli: &Cli) -> HarnessResult<Outcome> {
    let mut diverged = false;
    match &cli.cmd {
        Cmd::Run { config, out } => {
            let mut cfg = ExperimentConfig::from_file(config)?;
            apply_overrides(&mut cfg, cli);
            cfg.validate()?;
            let csv = out
                .clone()
                .or_else(|| cfg.csv.clone())
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.name)));
            diverged = execute(&cfg, &csv, None, cli.jobs)?;
        }
        Cmd::Preset { name: None, .. } => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
        }
        Cmd::Preset { name: Some(name), out } => {
            let cfgs = preset(name).ok_or_else(|| {
                HarnessError::Config {
                    key: "preset".into(),
                    reason: format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", ")),
                }
            })?;
            for mut cfg in cfgs {
                apply_overrides(&mut cfg, cli);
                cfg.validate()?;
                let csv = out.join(format!("{}.csv", cfg.name));
                diverged |= execute(&cfg, &csv, Some(out), cli.jobs)?;
            }
        }
        Cmd::Chart { csv, x, y, series, out, title } => {
            let t = read_csv(csv)?;
            let spec = eepn_core::harness::ChartSpec {
                path: out.clone().unwrap_or_else(|| csv.with_extension("svg")),
                x: x.clone(),
                y: y.clone(),
                series: series.clone(),
            };
            emit_chart(&spec.path, &t, &spec, title)?;
            eprintln!("wrote {}", spec.path.display());
        }
        Cmd::Analytics { link, rho } => {
            let l = parse_link_params(link)?;
            let b = phase_noise_budget(&l, *rho)?;
            println!("fiber_length_km        {}", l.length / 1e3);
            println!("tx_linewidth_hz        {}", l.tx_linewidth);
            println!("lo_linewidth_hz        {}", l.lo_linewidth);
            println!("var_tx_rad2            {:.6e}", b.var_tx);
            println!("var_lo_rad2            {:.6e}", b.var_lo);
            println!("var_eepn_rad2          {:.6e}", b.var_eepn);
            println!("rho                    {}", b.correlation_rho);
            println!("var_total_rad2         {:.6e}", b.var_total);
            println!("effective_linewidth_hz {:.6e}", b.effective_linewidth);
        }
    }
    Ok(if diverged { Outcome::Diverged } else { Outcome::Ok })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Diverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
