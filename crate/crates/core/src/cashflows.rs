//! Yearly pension payment schedule.

use std::path::{Path, PathBuf};

use crate::error::{ConfigError, DataError};
use crate::scalar::Real;

/// Real (CPI basis) payments in £bn. `payments[t-1]` is paid at the end of
/// period `t`, calendar year `start_year + t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CashflowSchedule<T> {
    start_year: i32,
    payments: Vec<T>,
}

impl<T: Real> CashflowSchedule<T> {
    pub fn new(start_year: i32, payments: Vec<T>) -> Result<Self, ConfigError> {
        if payments.is_empty() {
            return Err(ConfigError::field("cashflows", "schedule is empty"));
        }
        if let Some(p) = payments
            .iter()
            .find(|p| !(p.is_finite() && **p >= T::zero()))
        {
            return Err(ConfigError::field(
                "cashflows",
                format!("payment {p} is negative or not finite"),
            ));
        }
        Ok(Self {
            start_year,
            payments,
        })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn payments(&self) -> &[T] {
        &self.payments
    }

    pub fn horizon(&self) -> usize {
        self.payments.len()
    }

    /// Calendar year of period `t` (1-based).
    pub fn year_of(&self, t: usize) -> i32 {
        self.start_year + t as i32 - 1
    }

    pub fn final_year(&self) -> i32 {
        self.year_of(self.horizon())
    }

    /// Period whose payment falls in `year`, if inside the schedule.
    pub fn period_of(&self, year: i32) -> Option<usize> {
        let t = i64::from(year) - i64::from(self.start_year) + 1;
        (t >= 1 && t as usize <= self.horizon()).then_some(t as usize)
    }
}

/// Reads a `year,<component...>` CSV and sums the selected component columns
/// year by year. An empty `components` slice selects every column after
/// `year`. Blank cells count as 0; the schedule ends at the last row where
/// any selected column has a value.
pub fn load_cashflows<T: Real>(
    path: &Path,
    components: &[String],
) -> Result<CashflowSchedule<T>, DataError> {
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
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if headers.get(0) != Some("year") {
        return Err(perr(1, "first column must be `year`".into()));
    }
    let columns: Vec<(usize, String)> = if components.is_empty() {
        headers
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, h)| (i, h.to_string()))
            .collect()
    } else {
        components
            .iter()
            .map(|c| {
                headers
                    .iter()
                    .position(|h| h == c)
                    .filter(|&i| i > 0)
                    .map(|i| (i, c.clone()))
                    .ok_or_else(|| DataError::UnknownColumn {
                        path: path.to_path_buf(),
                        column: c.clone(),
                    })
            })
            .collect::<Result<_, _>>()?
    };
    if columns.is_empty() {
        return Err(perr(1, "no payment columns".into()));
    }

    let mut start_year = None;
    let mut prev_year = None;
    let mut rows: Vec<(T, bool)> = Vec::new();
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| perr(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let year: i32 = rec[0]
            .parse()
            .map_err(|_| perr(line, format!("bad year `{}`", &rec[0])))?;
        if let Some(p) = prev_year {
            if year != p + 1 {
                return Err(perr(line, format!("year {year} does not follow {p}")));
            }
        }
        prev_year = Some(year);
        start_year.get_or_insert(year);

        let mut total = T::zero();
        let mut any = false;
        for (idx, name) in &columns {
            let cell = rec.get(*idx).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| perr(line, format!("bad value `{cell}` in column `{name}`")))?;
            if !v.is_finite() {
                return Err(perr(line, format!("non-finite value in column `{name}`")));
            }
            if v < 0.0 {
                return Err(DataError::NegativePayment {
                    path: path.to_path_buf(),
                    line,
                    column: name.clone(),
                    value: v,
                });
            }
            total = total + T::lit(v);
            any = true;
        }
        rows.push((total, any));
    }
    let horizon = rows.iter().rposition(|r| r.1).map_or(0, |i| i + 1);
    let payments: Vec<T> = rows.into_iter().take(horizon).map(|r| r.0).collect();
    let start_year = start_year.unwrap_or_default();
    CashflowSchedule::new(start_year, payments).map_err(|e| DataError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
