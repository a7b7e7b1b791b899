//! Equity return moments from a country-year macrohistory panel.
//!
//! Real returns are `(1 + R) / (1 + pi) - 1`. The pooled estimate treats every
//! available country-year as one observation. The weighted-portfolio estimate
//! first averages countries within each year using weights proportional to
//! population times real GDP per capita, then takes moments of that series.
//! A year uses whichever countries have complete data; the weights are
//! renormalized over them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{DataError, NumericError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CountryYearRecord<T> {
    pub country: String,
    pub year: i32,
    /// Nominal equity total return as a fraction.
    pub nominal_total_return: Option<T>,
    /// Consumer price inflation as a fraction.
    pub inflation: Option<T>,
    pub population: Option<T>,
    pub real_gdp_per_capita: Option<T>,
}

impl<T: Real> CountryYearRecord<T> {
    /// Output weight numerator `N * rgdp`, when both are present.
    pub fn gdp(&self) -> Option<T> {
        Some(self.population? * self.real_gdp_per_capita?)
    }

    fn is_complete(&self) -> bool {
        self.nominal_total_return.is_some() && self.inflation.is_some() && self.gdp().is_some()
    }
}

/// `(1 + R) / (1 + pi) - 1`, or `None` when either input is missing.
pub fn real_return<T: Real>(record: &CountryYearRecord<T>) -> Option<T> {
    let r = record.nominal_total_return?;
    let pi = record.inflation?;
    Some((T::one() + r) / (T::one() + pi) - T::one())
}

/// Output weights of the countries with complete data in one year's records,
/// keyed by country. `None` if no record is complete.
pub fn gdp_weights<T: Real>(records: &[&CountryYearRecord<T>]) -> Option<BTreeMap<String, T>> {
    let complete: Vec<(&str, T)> = records
        .iter()
        .filter(|r| r.is_complete())
        .filter_map(|r| Some((r.country.as_str(), r.gdp()?)))
        .collect();
    let total: T = complete.iter().map(|c| c.1).sum();
    if complete.is_empty() || total.is_nan() || total <= T::zero() {
        return None;
    }
    Some(
        complete
            .into_iter()
            .map(|(c, g)| (c.to_string(), g / total))
            .collect(),
    )
}

/// GDP-weighted real return per year.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSeries<T> {
    pub years: Vec<i32>,
    pub returns: Vec<T>,
    /// Years present in the panel with no complete record.
    pub skipped_years: Vec<i32>,
}

pub fn global_weighted_return_series<T: Real>(panel: &Panel<T>) -> WeightedSeries<T> {
    let mut by_year: BTreeMap<i32, Vec<&CountryYearRecord<T>>> = BTreeMap::new();
    for r in &panel.records {
        by_year.entry(r.year).or_default().push(r);
    }
    let mut out = WeightedSeries {
        years: Vec::new(),
        returns: Vec::new(),
        skipped_years: Vec::new(),
    };
    for (year, recs) in by_year {
        match gdp_weights(&recs) {
            Some(weights) => {
                let ret = recs
                    .iter()
                    .filter_map(|r| Some(real_return(r)? * *weights.get(&r.country)?))
                    .sum();
                out.years.push(year);
                out.returns.push(ret);
            }
            None => out.skipped_years.push(year),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentMethod {
    UnweightedPooled,
    GdpWeightedPortfolio,
}

impl MomentMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MomentMethod::UnweightedPooled => "unweighted-pooled",
            MomentMethod::GdpWeightedPortfolio => "gdp-weighted-portfolio",
        }
    }
}

impl fmt::Display for MomentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MomentMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unweighted-pooled" => Ok(MomentMethod::UnweightedPooled),
            "gdp-weighted-portfolio" => Ok(MomentMethod::GdpWeightedPortfolio),
            other => Err(format!(
                "unknown method `{other}` (expected unweighted-pooled or gdp-weighted-portfolio)"
            )),
        }
    }
}

/// Arithmetic mean and sample standard deviation, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub mean_pct: f64,
    pub sd_pct: f64,
    /// Values the moments were computed from.
    pub n_values: usize,
    /// Distinct calendar years covered.
    pub n_years: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub method: MomentMethod,
}

/// Mean and `n-1` standard deviation of fractional returns, as percentages.
pub fn sample_moments<T: Real>(values: &[T]) -> Result<(f64, f64), NumericError> {
    let n = values.len();
    if n < 2 {
        return Err(NumericError::TooFewValues(n));
    }
    let xs: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    Ok((mean * 100.0, (ss / (n - 1) as f64).sqrt() * 100.0))
}

/// Moments of the panel's equity real returns by the chosen method.
pub fn estimate_moments<T: Real>(
    panel: &Panel<T>,
    method: MomentMethod,
) -> Result<MomentEstimate, NumericError> {
    let (years, values): (Vec<i32>, Vec<T>) = match method {
        MomentMethod::UnweightedPooled => panel
            .records
            .iter()
            .filter_map(|r| Some((r.year, real_return(r)?)))
            .unzip(),
        MomentMethod::GdpWeightedPortfolio => {
            let s = global_weighted_return_series(panel);
            (s.years, s.returns)
        }
    };
    let (mean_pct, sd_pct) = sample_moments(&values)?;
    let mut distinct = years.clone();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(MomentEstimate {
        mean_pct,
        sd_pct,
        n_values: values.len(),
        n_years: distinct.len(),
        first_year: distinct.first().copied().unwrap_or_default(),
        last_year: distinct.last().copied().unwrap_or_default(),
        method,
    })
}

/// How inflation is given in the panel file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InflationColumn {
    /// Inflation rate as a fraction.
    #[default]
    Rate,
    /// Price index level; inflation is the change from the country's
    /// previous year, missing when that year is absent.
    PriceIndex,
}

/// Column names of the panel file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub country: String,
    pub year: String,
    pub equity_total_return: String,
    pub inflation: String,
    pub population: String,
    pub real_gdp_per_capita: String,
    pub inflation_kind: InflationColumn,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            country: "country".into(),
            year: "year".into(),
            equity_total_return: "eq_tr".into(),
            inflation: "inflation".into(),
            population: "population".into(),
            real_gdp_per_capita: "rgdppc".into(),
            inflation_kind: InflationColumn::Rate,
        }
    }
}

/// Per-load diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: usize,
    /// Rows dropped because `1 + R <= 0` or `1 + pi <= 0`.
    pub rejected: usize,
    /// Kept rows lacking a return or inflation value.
    pub missing_return: usize,
    /// Kept rows lacking population or GDP per capita.
    pub missing_gdp: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel<T> {
    pub records: Vec<CountryYearRecord<T>>,
    pub report: LoadReport,
}

impl<T: Real> Panel<T> {
    /// Builds a panel, dropping records that violate `1 + R > 0` or `1 + pi > 0`.
    pub fn from_records(records: Vec<CountryYearRecord<T>>) -> Self {
        let mut report = LoadReport {
            rows: records.len(),
            ..LoadReport::default()
        };
        let records: Vec<_> = records
            .into_iter()
            .filter(|r| {
                let bad = |v: Option<T>| v.is_some_and(|x| x.is_nan() || T::one() + x <= T::zero());
                if bad(r.nominal_total_return) || bad(r.inflation) {
                    report.rejected += 1;
                    false
                } else {
                    true
                }
            })
            .collect();
        report.missing_return = records
            .iter()
            .filter(|r| r.nominal_total_return.is_none() || r.inflation.is_none())
            .count();
        report.missing_gdp = records.iter().filter(|r| r.gdp().is_none()).count();
        Panel { records, report }
    }
}

impl<T: Clone> Panel<T> {
    /// Records with `first <= year <= last`.
    pub fn restrict_years(&self, first: i32, last: i32) -> Panel<T> {
        Panel {
            records: self
                .records
                .iter()
                .filter(|r| (first..=last).contains(&r.year))
                .cloned()
                .collect(),
            report: self.report.clone(),
        }
    }
}

fn parse_cell<T: Real>(s: &str) -> Result<Option<T>, ()> {
    match s {
        "" | "NA" | "na" | "NaN" | "." => Ok(None),
        _ => {
            let v: f64 = s.parse().map_err(|_| ())?;
            if v.is_finite() {
                Ok(Some(T::lit(v)))
            } else {
                Ok(None)
            }
        }
    }
}

pub fn load_panel<T: Real>(path: &Path, columns: &ColumnMap) -> Result<Panel<T>, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let perr = |line: usize, message: String| DataError::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::UnknownColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let i_country = col(&columns.country)?;
    let i_year = col(&columns.year)?;
    let i_ret = col(&columns.equity_total_return)?;
    let i_infl = col(&columns.inflation)?;
    let i_pop = col(&columns.population)?;
    let i_gdp = col(&columns.real_gdp_per_capita)?;

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| perr(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize, name: &str| {
            parse_cell::<T>(get(i))
                .map_err(|_| perr(line, format!("bad {name} value `{}`", get(i))))
        };
        let year: i32 = get(i_year)
            .parse()
            .map_err(|_| perr(line, format!("bad year `{}`", get(i_year))))?;
        records.push(CountryYearRecord {
            country: get(i_country).to_string(),
            year,
            nominal_total_return: num(i_ret, &columns.equity_total_return)?,
            inflation: num(i_infl, &columns.inflation)?,
            population: num(i_pop, &columns.population)?,
            real_gdp_per_capita: num(i_gdp, &columns.real_gdp_per_capita)?,
        });
    }
    if columns.inflation_kind == InflationColumn::PriceIndex {
        let levels: HashMap<(String, i32), Option<T>> = records
            .iter()
            .map(|r| ((r.country.clone(), r.year), r.inflation))
            .collect();
        for r in &mut records {
            let prev = levels
                .get(&(r.country.clone(), r.year - 1))
                .copied()
                .flatten();
            r.inflation = match (r.inflation, prev) {
                (Some(now), Some(before)) if before > T::zero() => Some(now / before - T::one()),
                _ => None,
            };
        }
    }
    Ok(Panel::from_records(records))
}
