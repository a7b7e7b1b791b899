//! Monte Carlo model of a closed defined-benefit pension fund paying its
//! promised cashflows from an equity/bond portfolio, with no further
//! contributions. Estimates the probability that the fund runs out of money
//! and the probability of ending with a surplus above given thresholds.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are the double precision instantiations used by the CLI.

pub mod calibration;
pub mod cashflows;
pub mod engine;
pub mod error;
pub mod output;
pub mod return_models;
pub mod scalar;
pub mod scenario;
pub mod yield_curve;

pub use error::{ConfigError, DataError, NumericError};
pub use scalar::Real;

pub type EquityReturnParams64 = return_models::EquityReturnParams<f64>;
pub type ReturnPath64 = return_models::ReturnPath<f64>;
pub type SpotCurve64 = yield_curve::SpotCurve<f64>;
pub type SafeReturnSeries64 = yield_curve::SafeReturnSeries<f64>;
pub type CashflowSchedule64 = cashflows::CashflowSchedule<f64>;
pub type SimulationConfig64 = engine::SimulationConfig<f64>;
pub type PathResult64 = engine::PathResult<f64>;
pub type Ensemble64 = engine::Ensemble<f64>;
pub type EnsembleStats64 = engine::EnsembleStats<f64>;
pub type FanTable64 = engine::FanTable<f64>;
pub type AllocationSweep64 = engine::AllocationSweep<f64>;
pub type CountryYearRecord64 = calibration::CountryYearRecord<f64>;
pub type Panel64 = calibration::Panel<f64>;

pub type EquityReturnParams32 = return_models::EquityReturnParams<f32>;
pub type SimulationConfig32 = engine::SimulationConfig<f32>;
