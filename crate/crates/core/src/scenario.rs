//! Scenario files and the `simulate` / `sweep` runs built on them.
//!
//! A scenario is a TOML document with one section per model part:
//!
//! ```toml
//! name = "closed fund, March 2020 assets"
//!
//! [fund]
//! initial_assets = 66.5      # £bn at t = 0
//! alpha = 0.75               # equity weight
//!
//! [equity]
//! mu = 0.045                 # mean annual log return
//! sigma = 0.175              # sd of annual log return innovations
//! ma_q = 0                   # optional MA(q) lag count
//! ma_beta = 0.0              # optional MA coefficient
//!
//! [bonds]
//! curve = "real_spot.csv"    # or: flat_rate_pct = -1.0
//! curve_layout = "long"      # "long" | "wide"
//! curve_row = "2020-03-31"   # wide layout only; default last row
//! rpi_adjustment = 0.5       # percentage points, default 0.5
//!
//! [cashflows]
//! file = "cashflows.csv"
//! components = ["accrued", "new_accrual"]   # default: all columns
//!
//! [simulation]
//! paths = 10000
//! seed = 1
//! workers = 0                # 0 = all cores
//!
//! [output]
//! dir = "out"
//! thresholds = [50, 100, 200, 400]
//! percentiles = [5, 25, 50, 75, 95]
//! alphas = [0.25, 0.35, 0.45, 0.55, 0.65, 0.75]
//! ```
//!
//! Relative paths are resolved against the scenario file's directory.
//! Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cashflows::{load_cashflows, CashflowSchedule};
use crate::engine::{
    simulate_ensemble, sweep_allocation, validate_percentiles, AllocationSweep, EnsembleStats,
    ReportSpec, SimulationConfig, DEFAULT_PATHS, DEFAULT_PERCENTILES, DEFAULT_THRESHOLDS,
};
use crate::error::{ConfigError, DataError};
use crate::output;
use crate::return_models::EquityReturnParams;
use crate::yield_curve::{load_spot_curve, safe_returns, CurveLayout, SpotCurve};

/// Default equity weights for allocation sweeps.
pub const DEFAULT_ALPHAS: [f64; 6] = [0.25, 0.35, 0.45, 0.55, 0.65, 0.75];
/// Default RPI adjustment in percentage points.
pub const DEFAULT_RPI_ADJUSTMENT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("data file error: {0}")]
    Data(#[from] DataError),
    #[error("output error: {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    /// Process exit code: 1 for configuration problems, 2 for data files.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 1,
            ScenarioError::Data(_) | ScenarioError::Output { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundSection {
    pub initial_assets: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquitySection {
    pub mu: f64,
    pub sigma: f64,
    #[serde(default)]
    pub ma_q: usize,
    #[serde(default)]
    pub ma_beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutName {
    #[default]
    Long,
    Wide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<PathBuf>,
    #[serde(default)]
    pub curve_layout: LayoutName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_row: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_rate_pct: Option<f64>,
    #[serde(default = "default_rpi")]
    pub rpi_adjustment: f64,
}

fn default_rpi() -> f64 {
    DEFAULT_RPI_ADJUSTMENT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CashflowSection {
    pub file: PathBuf,
    #[serde(default)]
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
}

fn default_paths() -> usize {
    DEFAULT_PATHS
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            paths: DEFAULT_PATHS,
            seed: 0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_percentiles")]
    pub percentiles: Vec<f64>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_thresholds() -> Vec<f64> {
    DEFAULT_THRESHOLDS.to_vec()
}
fn default_percentiles() -> Vec<f64> {
    DEFAULT_PERCENTILES.to_vec()
}
fn default_alphas() -> Vec<f64> {
    DEFAULT_ALPHAS.to_vec()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out(),
            thresholds: default_thresholds(),
            percentiles: default_percentiles(),
            alphas: default_alphas(),
        }
    }
}

/// Parsed scenario file. Paths are absolute after [`ScenarioFile::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub fund: FundSection,
    pub equity: EquitySection,
    pub bonds: BondsSection,
    pub cashflows: CashflowSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::field("scenario", format!("{}: {e}", path.display())))?;
        let mut s = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        s.resolve_paths(base);
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "scenario".to_string());
            ConfigError::field(field, e.message().trim().to_string())
        })
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(c) = self.bonds.curve.as_mut() {
            fix(c);
        }
        fix(&mut self.cashflows.file);
        fix(&mut self.output.dir);
    }

    /// Checks scalar fields in declaration order, reporting the first failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::field(name, "must be finite"))
            }
        };
        finite("fund.initial_assets", self.fund.initial_assets)?;
        if self.fund.initial_assets < 0.0 {
            return Err(ConfigError::field("fund.initial_assets", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.fund.alpha) {
            return Err(ConfigError::field("fund.alpha", "must lie in [0, 1]"));
        }
        finite("equity.mu", self.equity.mu)?;
        finite("equity.sigma", self.equity.sigma)?;
        if self.equity.sigma < 0.0 {
            return Err(ConfigError::field("equity.sigma", "must be >= 0"));
        }
        finite("equity.ma_beta", self.equity.ma_beta)?;
        match (&self.bonds.curve, self.bonds.flat_rate_pct) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::field(
                    "bonds.curve",
                    "give either `curve` or `flat_rate_pct`, not both",
                ))
            }
            (None, None) => {
                return Err(ConfigError::field(
                    "bonds.curve",
                    "one of `curve` or `flat_rate_pct` is required",
                ))
            }
            (Some(p), None) if !p.is_file() => {
                return Err(ConfigError::field(
                    "bonds.curve",
                    format!("file not found: {}", p.display()),
                ))
            }
            (None, Some(r)) => finite("bonds.flat_rate_pct", r)?,
            _ => {}
        }
        finite("bonds.rpi_adjustment", self.bonds.rpi_adjustment)?;
        if !self.cashflows.file.is_file() {
            return Err(ConfigError::field(
                "cashflows.file",
                format!("file not found: {}", self.cashflows.file.display()),
            ));
        }
        if self.simulation.paths == 0 {
            return Err(ConfigError::field("simulation.paths", "must be at least 1"));
        }
        if let Some(t) = self.output.thresholds.iter().find(|t| !t.is_finite()) {
            return Err(ConfigError::field(
                "output.thresholds",
                format!("{t} is not finite"),
            ));
        }
        if let Some(a) = self
            .output
            .alphas
            .iter()
            .find(|a| !(0.0..=1.0).contains(*a))
        {
            return Err(ConfigError::field(
                "output.alphas",
                format!("{a} is outside [0, 1]"),
            ));
        }
        Ok(())
    }

    /// Loads the referenced data files and assembles the model inputs.
    pub fn build(&self) -> Result<Scenario, ScenarioError> {
        self.validate()?;
        let schedule: CashflowSchedule<f64> =
            load_cashflows(&self.cashflows.file, &self.cashflows.components)?;
        let curve: SpotCurve<f64> = match (&self.bonds.curve, self.bonds.flat_rate_pct) {
            (Some(path), _) => {
                let layout = match self.bonds.curve_layout {
                    LayoutName::Long => CurveLayout::Long,
                    LayoutName::Wide => CurveLayout::Wide {
                        row: self.bonds.curve_row.clone(),
                    },
                };
                load_spot_curve(path, &layout)?
            }
            (None, Some(rate)) => SpotCurve::flat(rate),
            (None, None) => unreachable!("validated"),
        };
        let safe = safe_returns(&curve, self.bonds.rpi_adjustment, schedule.horizon())?;
        let equity = EquityReturnParams::new(self.equity.mu, self.equity.sigma)?
            .with_mean_reversion(self.equity.ma_q, self.equity.ma_beta)?;
        let mut config = SimulationConfig::new(
            self.fund.initial_assets,
            self.fund.alpha,
            equity,
            safe,
            schedule,
        )?;
        config.n_paths = self.simulation.paths;
        config.seed = self.simulation.seed;
        config.workers = self.simulation.workers;
        let report = ReportSpec {
            thresholds: self.output.thresholds.clone(),
            percentiles: self.output.percentiles.clone(),
        };
        validate_percentiles(&report.percentiles)?;
        Ok(Scenario {
            file: self.clone(),
            curve,
            config,
            report,
        })
    }
}

/// A scenario with its data loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub curve: SpotCurve<f64>,
    pub config: SimulationConfig<f64>,
    pub report: ReportSpec<f64>,
}

impl Scenario {
    pub fn out_dir(&self) -> &Path {
        &self.file.output.dir
    }

    pub fn run(&self) -> Result<EnsembleStats<f64>, ConfigError> {
        simulate_ensemble(&self.config)?.summarize(&self.report)
    }

    pub fn sweep(&self, alphas: &[f64]) -> Result<AllocationSweep<f64>, ConfigError> {
        sweep_allocation(&self.config, alphas)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ScenarioError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ScenarioError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Output {
        path: dir.to_path_buf(),
        source,
    })
}

/// Simulates the scenario and writes `fan.csv`, `exhaustion.csv`,
/// `surplus.csv`, `fan.svg` and `summary.json` to the output directory.
pub fn run_scenario(
    scenario: &Scenario,
) -> Result<(EnsembleStats<f64>, Vec<PathBuf>), ScenarioError> {
    let stats = scenario.run()?;
    let dir = scenario.out_dir();
    ensure_dir(dir)?;
    let title = if scenario.file.name.is_empty() {
        "Projected fund assets".to_string()
    } else {
        scenario.file.name.clone()
    };
    let written = vec![
        write_file(dir, "fan.csv", &output::fan_csv(&stats.fan))?,
        write_file(dir, "exhaustion.csv", &output::exhaustion_csv(&stats))?,
        write_file(dir, "surplus.csv", &output::surplus_csv(&stats))?,
        write_file(
            dir,
            "fan.svg",
            &output::fan_svg(&stats.fan, scenario.config.initial_assets, &title),
        )?,
        write_file(dir, "summary.json", &output::summary_json(scenario, &stats))?,
    ];
    Ok((stats, written))
}

/// Runs an allocation sweep and writes `sweep.csv` and `sweep.svg`.
pub fn run_sweep(
    scenario: &Scenario,
    alphas: &[f64],
) -> Result<(AllocationSweep<f64>, Vec<PathBuf>), ScenarioError> {
    let sweep = scenario.sweep(alphas)?;
    let dir = scenario.out_dir();
    ensure_dir(dir)?;
    let written = vec![
        write_file(dir, "sweep.csv", &output::sweep_csv(&sweep))?,
        write_file(
            dir,
            "sweep.svg",
            &output::sweep_svg(&sweep, "Probability of exhaustion by equity weight"),
        )?,
    ];
    Ok((sweep, written))
}
