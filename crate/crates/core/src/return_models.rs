//! Stochastic gross returns for the equity ("risky") asset.
//!
//! Log returns are `mu + e_t`. Without mean reversion the errors are i.i.d.
//! N(0, sigma^2); with mean reversion they follow an MA(q) process
//! `e_t = v_t + beta * (v_{t-1} + ... + v_{t-q})` driven by N(0, sigma^2)
//! innovations. Innovations before the first period are taken to be zero.
//!
//! Normal variates come from [`PathStream`]: a ChaCha8 generator seeded with
//! the ensemble seed and switched to the stream numbered by the path index,
//! then fed through the ziggurat sampler of `rand_distr::StandardNormal`.
//! A path's draws therefore depend on `(seed, path_index)` only.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::scalar::Real;

/// MA(q) error structure. `q` is always at least 1; "no mean reversion" is
/// represented by the absence of this value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanReversion<T> {
    pub q: usize,
    pub beta: T,
}

/// Mean and volatility of annual log equity returns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquityReturnParams<T> {
    pub mu: T,
    pub sigma: T,
    mean_reversion: Option<MeanReversion<T>>,
}

impl<T: Real> EquityReturnParams<T> {
    pub fn new(mu: T, sigma: T) -> Result<Self, ConfigError> {
        if !mu.is_finite() {
            return Err(ConfigError::field("equity.mu", "must be finite"));
        }
        if !sigma.is_finite() || sigma < T::zero() {
            return Err(ConfigError::field(
                "equity.sigma",
                "must be finite and >= 0",
            ));
        }
        Ok(Self {
            mu,
            sigma,
            mean_reversion: None,
        })
    }

    /// Adds MA(q) errors. `q == 0` means no mean reversion and `beta` is ignored.
    pub fn with_mean_reversion(mut self, q: usize, beta: T) -> Result<Self, ConfigError> {
        if q == 0 {
            self.mean_reversion = None;
            return Ok(self);
        }
        if !beta.is_finite() {
            return Err(ConfigError::field("equity.ma_beta", "must be finite"));
        }
        self.mean_reversion = Some(MeanReversion { q, beta });
        Ok(self)
    }

    pub fn mean_reversion(&self) -> Option<MeanReversion<T>> {
        self.mean_reversion
    }

    /// Lag count, 0 without mean reversion.
    pub fn q(&self) -> usize {
        self.mean_reversion.map_or(0, |m| m.q)
    }

    /// MA coefficient, 0 without mean reversion.
    pub fn beta(&self) -> T {
        self.mean_reversion.map_or(T::zero(), |m| m.beta)
    }

    /// Full pipeline for one path: innovations, MA filter, exponentiation.
    pub fn sample_path(
        &self,
        horizon: usize,
        seed: u64,
        path_index: u64,
    ) -> Result<ReturnPath<T>, ConfigError> {
        let mut stream = PathStream::new(seed, path_index);
        let v = sample_innovations(self, horizon, &mut stream)?;
        let e = apply_moving_average(&v, self.q(), self.beta());
        Ok(gross_equity_returns(self, &e))
    }
}

/// Per-period gross equity return factors; every element is `exp(x) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPath<T> {
    gross_returns: Vec<T>,
}

impl<T: Real> ReturnPath<T> {
    pub fn gross_returns(&self) -> &[T] {
        &self.gross_returns
    }

    pub fn horizon(&self) -> usize {
        self.gross_returns.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.gross_returns
    }
}

/// Deterministic random stream for one simulated path.
#[derive(Debug, Clone)]
pub struct PathStream(ChaCha8Rng);

impl PathStream {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        PathStream(rng)
    }
}

impl RngCore for PathStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Draws `horizon` i.i.d. N(0, sigma^2) innovations from `stream`.
pub fn sample_innovations<T: Real, R: RngCore + ?Sized>(
    params: &EquityReturnParams<T>,
    horizon: usize,
    stream: &mut R,
) -> Result<Vec<T>, ConfigError> {
    if horizon == 0 {
        return Err(ConfigError::EmptyHorizon);
    }
    Ok((0..horizon)
        .map(|_| T::standard_normal(stream) * params.sigma)
        .collect())
}

/// `e_t = v_t + beta * sum_{i=1..q} v_{t-i}` with `v` zero before the sample.
pub fn apply_moving_average<T: Real>(innovations: &[T], q: usize, beta: T) -> Vec<T> {
    if q == 0 {
        return innovations.to_vec();
    }
    (0..innovations.len())
        .map(|t| {
            let lagged: T = innovations[t.saturating_sub(q)..t].iter().copied().sum();
            innovations[t] + beta * lagged
        })
        .collect()
}

pub fn gross_equity_returns<T: Real>(
    params: &EquityReturnParams<T>,
    errors: &[T],
) -> ReturnPath<T> {
    ReturnPath {
        gross_returns: errors.iter().map(|&e| (params.mu + e).exp()).collect(),
    }
}
