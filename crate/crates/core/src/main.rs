use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pension_ruin::calibration::{
    estimate_moments, load_panel, ColumnMap, InflationColumn, MomentMethod,
};
use pension_ruin::output::{fmt_sig6, moments_json, safe_returns_csv};
use pension_ruin::scenario::{run_scenario, run_sweep, ScenarioError, ScenarioFile};
use pension_ruin::yield_curve::{load_spot_curve, safe_returns, CurveLayout};
use pension_ruin::{ConfigError, DataError};

/// Ruin and overfunding probabilities for a closed defined-benefit pension fund.
#[derive(Debug, Parser)]
#[command(name = "pension-ruin", version)]
struct Cli {
    /// Override the scenario's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the number of simulated paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write fan, exhaustion, surplus and summary outputs.
    Simulate { scenario: PathBuf },
    /// Exhaustion curves for several equity weights.
    Sweep {
        scenario: PathBuf,
        /// Comma-separated equity weights; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Mean and standard deviation of real equity returns from a country-year panel.
    EstimateReturns {
        panel: PathBuf,
        #[arg(long, default_value = "unweighted-pooled")]
        method: MomentMethod,
        /// Column renames as `role=name` pairs (roles: country, year, eq_tr,
        /// inflation, population, rgdppc).
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// The inflation column holds a price index rather than a rate.
        #[arg(long)]
        price_index: bool,
        /// First calendar year to include.
        #[arg(long)]
        from: Option<i32>,
        /// Last calendar year to include.
        #[arg(long)]
        to: Option<i32>,
    },
    /// Print per-period discount factors and bond returns for a spot curve.
    Yield {
        curve: PathBuf,
        /// RPI adjustment in percentage points.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        delta: f64,
        /// Periods to print; defaults to the last quoted maturity.
        #[arg(long)]
        horizon: Option<usize>,
        /// Curve file uses the wide layout (maturities across the header row).
        #[arg(long)]
        wide: bool,
        /// Row key to select in a wide file; defaults to the last row.
        #[arg(long, requires = "wide")]
        row: Option<String>,
    },
}

enum Failure {
    Config(String),
    Data(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e.exit_code() {
            1 => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(format!("configuration error: {e}"))
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        Failure::Data(format!("data file error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(cli: &Cli, path: &Path) -> Result<ScenarioFile, Failure> {
    let mut s = ScenarioFile::load(path)?;
    if let Some(seed) = cli.seed {
        s.simulation.seed = seed;
    }
    if let Some(paths) = cli.paths {
        s.simulation.paths = paths;
    }
    if let Some(out) = &cli.out {
        s.output.dir = out.clone();
    }
    if let Some(w) = cli.workers {
        s.simulation.workers = w;
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate { scenario } => {
            let scenario = load_scenario(&cli, scenario)?.build()?;
            let (stats, written) = run_scenario(&scenario)?;
            let first = stats.years.first().copied().unwrap_or_default();
            let last = stats.years.last().copied().unwrap_or_default();
            println!(
                "P(exhausted by {last}) = {} over {} paths ({first}-{last})",
                fmt_sig6(stats.overall_exhaustion_prob()),
                stats.n_paths
            );
            for (thr, p) in &stats.surplus_exceedance {
                println!(
                    "P(terminal assets >= £{}bn) = {}",
                    fmt_sig6(*thr),
                    fmt_sig6(*p)
                );
            }
            for w in written {
                println!("wrote {}", w.display());
            }
        }
        Command::Sweep { scenario, alphas } => {
            let scenario = load_scenario(&cli, scenario)?.build()?;
            let alphas = alphas
                .clone()
                .unwrap_or_else(|| scenario.file.output.alphas.clone());
            let (sweep, written) = run_sweep(&scenario, &alphas)?;
            let last = sweep.years.last().copied().unwrap_or_default();
            for (alpha, curve) in &sweep.curves {
                println!(
                    "alpha {}: P(exhausted by {last}) = {}",
                    fmt_sig6(*alpha),
                    fmt_sig6(curve.last().copied().unwrap_or(0.0))
                );
            }
            for w in written {
                println!("wrote {}", w.display());
            }
        }
        Command::EstimateReturns {
            panel,
            method,
            columns,
            price_index,
            from,
            to,
        } => {
            let mut map = ColumnMap::default();
            for spec in columns {
                let (role, name) = spec.split_once('=').ok_or_else(|| {
                    ConfigError::field("columns", format!("expected role=name, got `{spec}`"))
                })?;
                let slot = match role {
                    "country" => &mut map.country,
                    "year" => &mut map.year,
                    "eq_tr" => &mut map.equity_total_return,
                    "inflation" => &mut map.inflation,
                    "population" => &mut map.population,
                    "rgdppc" => &mut map.real_gdp_per_capita,
                    other => {
                        return Err(ConfigError::field(
                            "columns",
                            format!("unknown role `{other}`"),
                        )
                        .into())
                    }
                };
                *slot = name.to_string();
            }
            if *price_index {
                map.inflation_kind = InflationColumn::PriceIndex;
            }
            let mut panel = load_panel::<f64>(panel, &map)?;
            if from.is_some() || to.is_some() {
                panel = panel.restrict_years(from.unwrap_or(i32::MIN), to.unwrap_or(i32::MAX));
            }
            let r = &panel.report;
            eprintln!(
                "{} rows; {} rejected; {} without return data; {} without GDP data",
                r.rows, r.rejected, r.missing_return, r.missing_gdp
            );
            let est = estimate_moments(&panel, *method)
                .map_err(|e| Failure::Data(format!("data file error: {e}")))?;
            println!(
                "{}: mean {}% sd {}% ({} values, {} years, {}-{})",
                est.method,
                fmt_sig6(est.mean_pct),
                fmt_sig6(est.sd_pct),
                est.n_values,
                est.n_years,
                est.first_year,
                est.last_year
            );
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)
                    .and_then(|()| std::fs::write(dir.join("moments.json"), moments_json(&est)))
                    .map_err(|e| Failure::Data(format!("output error: {}: {e}", dir.display())))?;
            }
        }
        Command::Yield {
            curve,
            delta,
            horizon,
            wide,
            row,
        } => {
            let layout = if *wide {
                CurveLayout::Wide { row: row.clone() }
            } else {
                CurveLayout::Long
            };
            let curve = load_spot_curve::<f64>(curve, &layout)?;
            let horizon = horizon.unwrap_or((curve.last_maturity() as usize).max(1));
            let series = safe_returns(&curve, *delta, horizon)?;
            print!("{}", safe_returns_csv(&curve, &series));
        }
    }
    Ok(())
}
