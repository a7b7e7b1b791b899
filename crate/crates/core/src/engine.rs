//! Asset evolution of a closed fund and ensemble statistics.
//!
//! Each period the fund earns the blended gross return
//! `alpha * R_equity + (1 - alpha) * R_bond` on last period's assets and then
//! pays that period's pension cashflow. The first period ending with a
//! negative balance is the exhaustion period; assets are 0 from then on.
//!
//! Paths depend only on `(seed, path_index)`, so the ensemble is computed on
//! any number of rayon workers and collected in path order.

use rayon::prelude::*;

use crate::cashflows::CashflowSchedule;
use crate::error::ConfigError;
use crate::return_models::EquityReturnParams;
use crate::scalar::Real;
use crate::yield_curve::SafeReturnSeries;

/// Default number of simulated paths.
pub const DEFAULT_PATHS: usize = 10_000;
/// Default surplus thresholds in £bn.
pub const DEFAULT_THRESHOLDS: [f64; 4] = [50.0, 100.0, 200.0, 400.0];
/// Default fan chart percentiles.
pub const DEFAULT_PERCENTILES: [f64; 5] = [5.0, 25.0, 50.0, 75.0, 95.0];

/// Supplies per-path gross equity returns.
pub trait ReturnSource<T>: Sync {
    /// `horizon` gross returns for the path identified by `(seed, path_index)`.
    fn equity_returns(&self, horizon: usize, seed: u64, path_index: u64) -> Vec<T>;
}

impl<T: Real> ReturnSource<T> for EquityReturnParams<T> {
    fn equity_returns(&self, horizon: usize, seed: u64, path_index: u64) -> Vec<T> {
        self.sample_path(horizon, seed, path_index)
            .expect("horizon checked by config validation")
            .into_inner()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig<T> {
    /// Assets at t = 0, £bn.
    pub initial_assets: T,
    /// Equity weight in [0, 1]; the rest is held in bonds.
    pub alpha: T,
    pub equity: EquityReturnParams<T>,
    pub safe: SafeReturnSeries<T>,
    pub schedule: CashflowSchedule<T>,
    pub n_paths: usize,
    pub seed: u64,
    /// Rayon worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl<T: Real> SimulationConfig<T> {
    pub fn new(
        initial_assets: T,
        alpha: T,
        equity: EquityReturnParams<T>,
        safe: SafeReturnSeries<T>,
        schedule: CashflowSchedule<T>,
    ) -> Result<Self, ConfigError> {
        let cfg = Self {
            initial_assets,
            alpha,
            equity,
            safe,
            schedule,
            n_paths: DEFAULT_PATHS,
            seed: 0,
            workers: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.initial_assets.is_finite() && self.initial_assets >= T::zero()) {
            return Err(ConfigError::field(
                "fund.initial_assets",
                "must be finite and >= 0",
            ));
        }
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(ConfigError::field("fund.alpha", "must lie in [0, 1]"));
        }
        if self.n_paths == 0 {
            return Err(ConfigError::field("simulation.paths", "must be at least 1"));
        }
        if self.safe.len() < self.schedule.horizon() {
            return Err(ConfigError::field(
                "bonds",
                format!(
                    "bond returns cover {} periods but the schedule has {}",
                    self.safe.len(),
                    self.schedule.horizon()
                ),
            ));
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult<T> {
    /// `A_0 ..= A_T`, clamped at 0 from the exhaustion period on.
    pub assets: Vec<T>,
    /// First period whose post-payment balance was negative.
    pub exhaustion_period: Option<usize>,
    /// `A_T`, 0 when exhausted.
    pub terminal_assets: T,
}

/// Runs the asset recursion against given equity returns.
pub fn evolve<T: Real>(config: &SimulationConfig<T>, equity_returns: &[T]) -> PathResult<T> {
    let horizon = config.horizon();
    let alpha = config.alpha;
    let bond_weight = T::one() - alpha;
    let payments = config.schedule.payments();
    let mut assets = Vec::with_capacity(horizon + 1);
    let mut a = config.initial_assets;
    assets.push(a);
    let mut exhaustion_period = None;
    for t in 1..=horizon {
        if exhaustion_period.is_none() {
            let growth = alpha * equity_returns[t - 1] + bond_weight * config.safe.gross_return(t);
            a = growth * a - payments[t - 1];
            if a < T::zero() {
                exhaustion_period = Some(t);
                a = T::zero();
            }
        }
        assets.push(a);
    }
    PathResult {
        assets,
        exhaustion_period,
        terminal_assets: a,
    }
}

pub fn simulate_path<T: Real>(
    config: &SimulationConfig<T>,
    path_index: u64,
) -> Result<PathResult<T>, ConfigError> {
    simulate_path_with(config, &config.equity, path_index)
}

/// [`simulate_path`] with an arbitrary equity return source.
pub fn simulate_path_with<T: Real, S: ReturnSource<T> + ?Sized>(
    config: &SimulationConfig<T>,
    source: &S,
    path_index: u64,
) -> Result<PathResult<T>, ConfigError> {
    config.validate()?;
    let r = source.equity_returns(config.horizon(), config.seed, path_index);
    if r.len() < config.horizon() {
        return Err(ConfigError::field(
            "equity",
            "return source produced too few periods",
        ));
    }
    Ok(evolve(config, &r))
}

/// All simulated paths of one configuration, in path-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T> {
    paths: Vec<PathResult<T>>,
    start_year: i32,
}

pub fn simulate_ensemble<T: Real>(
    config: &SimulationConfig<T>,
) -> Result<Ensemble<T>, ConfigError> {
    simulate_ensemble_with(config, &config.equity)
}

pub fn simulate_ensemble_with<T: Real, S: ReturnSource<T> + ?Sized>(
    config: &SimulationConfig<T>,
    source: &S,
) -> Result<Ensemble<T>, ConfigError> {
    config.validate()?;
    let horizon = config.horizon();
    let run = || -> Result<Vec<PathResult<T>>, ConfigError> {
        (0..config.n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let r = source.equity_returns(horizon, config.seed, i);
                if r.len() < horizon {
                    return Err(ConfigError::field(
                        "equity",
                        "return source produced too few periods",
                    ));
                }
                Ok(evolve(config, &r))
            })
            .collect()
    };
    let paths = with_workers(config.workers, run)??;
    Ok(Ensemble {
        paths,
        start_year: config.schedule.start_year(),
    })
}

fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R, ConfigError> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ConfigError::field("simulation.workers", e.to_string()))?;
    Ok(pool.install(f))
}

impl<T: Real> Ensemble<T> {
    pub fn from_paths(paths: Vec<PathResult<T>>, start_year: i32) -> Self {
        Self { paths, start_year }
    }

    pub fn paths(&self) -> &[PathResult<T>] {
        &self.paths
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn horizon(&self) -> usize {
        self.paths.first().map_or(0, |p| p.assets.len() - 1)
    }

    /// Calendar years of periods `1..=T`.
    pub fn years(&self) -> Vec<i32> {
        (1..=self.horizon())
            .map(|t| self.start_year + t as i32 - 1)
            .collect()
    }

    /// Fraction of paths exhausted at or before each period `1..=T`.
    pub fn exhaustion_prob_by_year(&self) -> Vec<f64> {
        let horizon = self.horizon();
        let mut counts = vec![0usize; horizon + 1];
        for p in &self.paths {
            if let Some(t) = p.exhaustion_period {
                counts[t] += 1;
            }
        }
        let n = self.paths.len().max(1) as f64;
        let mut cumulative = 0;
        counts[1..]
            .iter()
            .map(|c| {
                cumulative += c;
                cumulative as f64 / n
            })
            .collect()
    }

    /// Probability of exhaustion before the final scheduled payment is met.
    pub fn overall_exhaustion_prob(&self) -> f64 {
        let n = self.paths.len().max(1) as f64;
        self.paths
            .iter()
            .filter(|p| p.exhaustion_period.is_some())
            .count() as f64
            / n
    }

    /// Cumulative exhaustion probability by the end of calendar `year`.
    /// Years before the schedule give 0; years after it give the overall value.
    pub fn exhaustion_prob_by(&self, year: i32) -> f64 {
        let t = i64::from(year) - i64::from(self.start_year) + 1;
        if t < 1 {
            return 0.0;
        }
        let t = (t as usize).min(self.horizon());
        let n = self.paths.len().max(1) as f64;
        self.paths
            .iter()
            .filter(|p| p.exhaustion_period.is_some_and(|e| e <= t))
            .count() as f64
            / n
    }

    /// `P(terminal assets >= threshold)` for each threshold, in input order.
    pub fn surplus_exceedance(&self, thresholds: &[T]) -> Vec<(T, f64)> {
        let mut terminal: Vec<T> = self.paths.iter().map(|p| p.terminal_assets).collect();
        terminal.sort_by(|a, b| a.partial_cmp(b).expect("finite assets"));
        let n = terminal.len().max(1) as f64;
        thresholds
            .iter()
            .map(|&thr| {
                let below = terminal.partition_point(|&x| x < thr);
                (thr, (terminal.len() - below) as f64 / n)
            })
            .collect()
    }

    /// Nearest-rank percentiles of clamped assets for each period `1..=T`.
    pub fn quantile_fan(&self, percentiles: &[f64]) -> Result<FanTable<T>, ConfigError> {
        validate_percentiles(percentiles)?;
        let horizon = self.horizon();
        let mut column = Vec::with_capacity(self.paths.len());
        let rows = (1..=horizon)
            .map(|t| {
                column.clear();
                column.extend(self.paths.iter().map(|p| p.assets[t]));
                column.sort_by(|a, b| a.partial_cmp(b).expect("finite assets"));
                percentiles
                    .iter()
                    .map(|&p| nearest_rank(&column, p))
                    .collect()
            })
            .collect();
        Ok(FanTable {
            years: self.years(),
            percentiles: percentiles.to_vec(),
            rows,
        })
    }

    pub fn summarize(&self, report: &ReportSpec<T>) -> Result<EnsembleStats<T>, ConfigError> {
        Ok(EnsembleStats {
            years: self.years(),
            exhaustion_prob_by_year: self.exhaustion_prob_by_year(),
            surplus_exceedance: self.surplus_exceedance(&report.thresholds),
            fan: self.quantile_fan(&report.percentiles)?,
            n_paths: self.n_paths(),
        })
    }
}

/// Percentiles must be non-empty, strictly increasing and inside (0, 100).
pub fn validate_percentiles(percentiles: &[f64]) -> Result<(), ConfigError> {
    if percentiles.is_empty() {
        return Err(ConfigError::field("output.percentiles", "list is empty"));
    }
    if percentiles.iter().any(|&p| !(p > 0.0 && p < 100.0)) {
        return Err(ConfigError::field(
            "output.percentiles",
            "each must lie in (0, 100)",
        ));
    }
    if percentiles.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::field(
            "output.percentiles",
            "must be strictly increasing",
        ));
    }
    Ok(())
}

/// Nearest-rank percentile of an ascending, non-empty slice: the element of
/// rank `ceil(p/100 * n)`, clamped to `[1, n]`.
pub fn nearest_rank<T: Copy>(sorted: &[T], percentile: f64) -> T {
    let n = sorted.len();
    assert!(n > 0, "nearest_rank of empty sample");
    let x = percentile * n as f64 / 100.0;
    let nearest = x.round();
    // absorb representation error such as 0.95 * 20 = 19.000000000000004
    let rank = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    let rank = (rank as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Percentile table: `rows[t-1][k]` is percentile `percentiles[k]` at `years[t-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FanTable<T> {
    pub years: Vec<i32>,
    pub percentiles: Vec<f64>,
    pub rows: Vec<Vec<T>>,
}

/// Which statistics to extract from an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSpec<T> {
    pub thresholds: Vec<T>,
    pub percentiles: Vec<f64>,
}

impl<T: Real> Default for ReportSpec<T> {
    fn default() -> Self {
        Self {
            thresholds: DEFAULT_THRESHOLDS.iter().map(|&x| T::lit(x)).collect(),
            percentiles: DEFAULT_PERCENTILES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats<T> {
    pub years: Vec<i32>,
    /// Cumulative, aligned with `years`.
    pub exhaustion_prob_by_year: Vec<f64>,
    /// `(threshold £bn, probability)` in threshold order.
    pub surplus_exceedance: Vec<(T, f64)>,
    pub fan: FanTable<T>,
    pub n_paths: usize,
}

impl<T> EnsembleStats<T> {
    pub fn overall_exhaustion_prob(&self) -> f64 {
        self.exhaustion_prob_by_year.last().copied().unwrap_or(0.0)
    }

    pub fn exhaustion_prob_by(&self, year: i32) -> Option<f64> {
        let i = self.years.iter().position(|&y| y == year)?;
        Some(self.exhaustion_prob_by_year[i])
    }
}

pub fn run_ensemble<T: Real>(
    config: &SimulationConfig<T>,
    report: &ReportSpec<T>,
) -> Result<EnsembleStats<T>, ConfigError> {
    simulate_ensemble(config)?.summarize(report)
}

/// Exhaustion curves for several equity weights, all driven by the base
/// config's seed so each path sees the same equity draws at every weight.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSweep<T> {
    pub years: Vec<i32>,
    pub curves: Vec<(T, Vec<f64>)>,
}

pub fn sweep_allocation<T: Real>(
    base: &SimulationConfig<T>,
    alphas: &[T],
) -> Result<AllocationSweep<T>, ConfigError> {
    if alphas.is_empty() {
        return Err(ConfigError::field("alphas", "list is empty"));
    }
    let mut years = Vec::new();
    let mut curves = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let cfg = SimulationConfig {
            alpha,
            ..base.clone()
        };
        cfg.validate()
            .map_err(|_| ConfigError::field("alphas", format!("{alpha} is outside [0, 1]")))?;
        let ens = simulate_ensemble(&cfg)?;
        years = ens.years();
        curves.push((alpha, ens.exhaustion_prob_by_year()));
    }
    Ok(AllocationSweep { years, curves })
}
