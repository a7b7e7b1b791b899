//! Deterministic bond returns bootstrapped from a real spot-rate curve.
//!
//! Cumulative factors are `DR_t = (1 + (s_t + delta)/100)^t` with `DR_0 = 1`,
//! where `s_t` is the real spot rate (percent) for maturity `t` and `delta` an
//! additive RPI-to-CPI adjustment in percentage points. The one-period gross
//! bond return is `DR_t / DR_{t-1}`. Spot rates between quoted maturities are
//! interpolated linearly; outside the quoted range the nearest rate is held.

use std::path::{Path, PathBuf};

use crate::error::{ConfigError, DataError, NumericError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SpotCurve<T> {
    points: Vec<(u32, T)>,
    label: String,
}

impl<T: Real> SpotCurve<T> {
    /// `points` are `(maturity_years, real_spot_rate_pct)`, strictly increasing in
    /// maturity. A maturity-0 point, if given, must carry a zero rate.
    pub fn new(points: Vec<(u32, T)>, label: impl Into<String>) -> Result<Self, ConfigError> {
        if points.is_empty() {
            return Err(ConfigError::EmptyCurve);
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(ConfigError::field(
                    "curve",
                    format!("maturity {} does not follow {}", w[1].0, w[0].0),
                ));
            }
        }
        if let Some(&(m, r)) = points.iter().find(|p| !p.1.is_finite()) {
            return Err(ConfigError::field(
                "curve",
                format!("rate {r} at maturity {m} is not finite"),
            ));
        }
        if let Some(&(0, r)) = points.first() {
            if r != T::zero() {
                return Err(ConfigError::field(
                    "curve",
                    format!("spot rate at maturity 0 is defined as 0, got {r}"),
                ));
            }
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }

    /// Curve with the same rate at every maturity.
    pub fn flat(rate_pct: T) -> Self {
        Self::new(vec![(1, rate_pct)], format!("flat {rate_pct}%")).expect("valid flat curve")
    }

    pub fn points(&self) -> &[(u32, T)] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn last_maturity(&self) -> u32 {
        self.points.last().map_or(0, |p| p.0)
    }

    /// Spot rate in percent for maturity `t` years.
    pub fn spot_rate(&self, t: u32) -> T {
        if t == 0 {
            return T::zero();
        }
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        // t lies strictly inside (first, last)
        let hi = pts.partition_point(|p| p.0 < t);
        let (m1, r1) = pts[hi];
        if m1 == t {
            return r1;
        }
        let (m0, r0) = pts[hi - 1];
        let w = T::lit(f64::from(t - m0)) / T::lit(f64::from(m1 - m0));
        r0 + (r1 - r0) * w
    }
}

/// `DR_0 ..= DR_horizon` for the curve shifted by `delta_pct`.
pub fn discount_factors<T: Real>(
    curve: &SpotCurve<T>,
    delta_pct: T,
    horizon: usize,
) -> Result<Vec<T>, ConfigError> {
    if !delta_pct.is_finite() {
        return Err(ConfigError::field("bonds.rpi_adjustment", "must be finite"));
    }
    let hundred = T::lit(100.0);
    (0..=horizon)
        .map(|t| {
            let t32 =
                u32::try_from(t).map_err(|_| ConfigError::field("horizon", "too many periods"))?;
            let base = T::one() + (curve.spot_rate(t32) + delta_pct) / hundred;
            Ok(base.powi(t as i32))
        })
        .collect()
}

/// Per-period gross bond returns with their cumulative discount factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeReturnSeries<T> {
    /// `gross_returns[t-1]` is the return earned over period `t`.
    gross_returns: Vec<T>,
    /// `discount_factors[t]` is `DR_t`, starting at `DR_0 = 1`.
    discount_factors: Vec<T>,
}

impl<T: Real> SafeReturnSeries<T> {
    /// Same gross return every period.
    pub fn constant(gross: T, horizon: usize) -> Result<Self, NumericError> {
        let dr: Vec<T> = (0..=horizon).map(|t| gross.powi(t as i32)).collect();
        let mut s = forward_gross_returns(&dr)?;
        s.gross_returns = vec![gross; horizon];
        Ok(s)
    }

    pub fn gross_returns(&self) -> &[T] {
        &self.gross_returns
    }

    pub fn discount_factors(&self) -> &[T] {
        &self.discount_factors
    }

    /// Number of periods covered.
    pub fn len(&self) -> usize {
        self.gross_returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gross_returns.is_empty()
    }

    /// Gross return over period `t` (1-based).
    pub fn gross_return(&self, t: usize) -> T {
        self.gross_returns[t - 1]
    }
}

/// Ratios of consecutive discount factors.
pub fn forward_gross_returns<T: Real>(dr: &[T]) -> Result<SafeReturnSeries<T>, NumericError> {
    match dr.first() {
        Some(&d0) if d0 == T::one() => {}
        Some(&d0) => return Err(NumericError::BadInitialDiscountFactor(d0.to_f64_lossy())),
        None => return Err(NumericError::BadInitialDiscountFactor(f64::NAN)),
    }
    if let Some((period, &value)) = dr
        .iter()
        .enumerate()
        .find(|(_, &d)| d.is_nan() || d <= T::zero())
    {
        return Err(NumericError::NonPositiveDiscountFactor {
            period,
            value: value.to_f64_lossy(),
        });
    }
    Ok(SafeReturnSeries {
        gross_returns: dr.windows(2).map(|w| w[1] / w[0]).collect(),
        discount_factors: dr.to_vec(),
    })
}

/// Bootstraps the bond return series for `horizon` periods.
pub fn safe_returns<T: Real>(
    curve: &SpotCurve<T>,
    delta_pct: T,
    horizon: usize,
) -> Result<SafeReturnSeries<T>, ConfigError> {
    let dr = discount_factors(curve, delta_pct, horizon)?;
    forward_gross_returns(&dr).map_err(|e| ConfigError::field("curve", e.to_string()))
}

/// Layout of a spot-curve file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CurveLayout {
    /// Header `maturity_years,real_spot_rate_pct`, one row per maturity.
    #[default]
    Long,
    /// One header row of maturities after a leading key column (e.g. a date),
    /// then one row per curve. The row whose key equals `row` is flattened to
    /// one point per maturity; `None` takes the last row. Blank cells and
    /// columns whose maturity is not a whole number of years are dropped.
    Wide { row: Option<String> },
}

pub fn load_spot_curve<T: Real>(
    path: &Path,
    layout: &CurveLayout,
) -> Result<SpotCurve<T>, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (points, label) = match layout {
        CurveLayout::Long => (parse_long(path, &text)?, file_label(path)),
        CurveLayout::Wide { row } => parse_wide(path, &text, row.as_deref())?,
    };
    let points = points
        .into_iter()
        .map(|(m, r, line)| (m, T::lit(r), line))
        .collect::<Vec<_>>();
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(DataError::NonMonotoneMaturity {
                path: path.to_path_buf(),
                line: w[1].2,
                maturity: w[1].0,
            });
        }
    }
    SpotCurve::new(points.into_iter().map(|(m, r, _)| (m, r)).collect(), label).map_err(|e| {
        DataError::Invalid {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    })
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> DataError {
    DataError::Parse {
        path: PathBuf::from(path),
        line,
        message: message.into(),
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn parse_maturity(s: &str) -> Option<u32> {
    let x: f64 = s.parse().ok()?;
    (x >= 0.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX)).then_some(x as u32)
}

/// `(maturity, rate_pct, line)` triples.
type RawPoints = Vec<(u32, f64, usize)>;

fn parse_long(path: &Path, text: &str) -> Result<RawPoints, DataError> {
    let mut rdr = csv_reader(text);
    let mut out = Vec::new();
    let mut header_seen = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let line = record_line(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if !header_seen {
            header_seen = true;
            let cols: Vec<&str> = rec.iter().collect();
            if cols != ["maturity_years", "real_spot_rate_pct"] {
                return Err(parse_err(
                    path,
                    line,
                    "expected header `maturity_years,real_spot_rate_pct`",
                ));
            }
            continue;
        }
        if rec.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        let m = parse_maturity(&rec[0])
            .ok_or_else(|| parse_err(path, line, format!("bad maturity `{}`", &rec[0])))?;
        let r: f64 = rec[1]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad rate `{}`", &rec[1])))?;
        if !r.is_finite() {
            return Err(parse_err(path, line, "rate is not finite"));
        }
        out.push((m, r, line));
    }
    if !header_seen {
        return Err(parse_err(path, 1, "empty file"));
    }
    Ok(out)
}

fn parse_wide(
    path: &Path,
    text: &str,
    row: Option<&str>,
) -> Result<(RawPoints, String), DataError> {
    let mut rdr = csv_reader(text);
    let mut records = rdr
        .records()
        .filter(|r| !r.as_ref().is_ok_and(|r| r.iter().all(str::is_empty)));
    let header = records
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let header_line = record_line(&header);
    let maturities: Vec<Option<u32>> = header.iter().skip(1).map(parse_maturity).collect();
    let mut chosen = None;
    for rec in records {
        let rec = rec.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let key = rec.get(0).unwrap_or("");
        if row.is_none_or(|want| want == key) {
            chosen = Some(rec);
            if row.is_some() {
                break;
            }
        }
    }
    let rec = chosen.ok_or_else(|| match row {
        Some(want) => parse_err(path, header_line, format!("no row keyed `{want}`")),
        None => parse_err(path, header_line, "no data rows"),
    })?;
    let line = record_line(&rec);
    let mut out = Vec::new();
    for (cell, m) in rec.iter().skip(1).zip(&maturities) {
        let Some(m) = *m else { continue };
        if cell.is_empty() {
            continue;
        }
        let r: f64 = cell
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad rate `{cell}` for maturity {m}")))?;
        out.push((m, r, line));
    }
    let label = format!("{} {}", file_label(path), rec.get(0).unwrap_or(""));
    Ok((out, label.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn zero_curve_gives_unit_factors() {
        let dr = discount_factors(&SpotCurve::flat(0.0_f64), 0.0, 10).unwrap();
        assert!(dr.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn discount_factor_examples() {
        let dr = discount_factors(&SpotCurve::flat(2.0_f64), 0.0, 3).unwrap();
        assert!(rel(dr[3], 1.061208) < 1e-14);
        let dr = discount_factors(&SpotCurve::flat(0.0_f64), 0.5, 2).unwrap();
        assert!(rel(dr[2], 1.010025) < 1e-14);
        assert_eq!(dr[0], 1.0);
    }

    #[test]
    fn forward_examples() {
        let s = forward_gross_returns(&[1.0_f64, 1.0, 1.0]).unwrap();
        assert_eq!(s.gross_returns(), &[1.0, 1.0]);
        let s = forward_gross_returns(&[1.0_f64, 1.02, 1.061208]).unwrap();
        assert!(rel(s.gross_returns()[0], 1.02) < 1e-14);
        assert!(rel(s.gross_returns()[1], 1.0404) < 1e-14);
    }

    #[test]
    fn forward_rejects_bad_factors() {
        assert!(matches!(
            forward_gross_returns(&[1.0_f64, 0.0, 1.0]),
            Err(NumericError::NonPositiveDiscountFactor { period: 1, .. })
        ));
        assert!(matches!(
            forward_gross_returns(&[1.1_f64, 1.2]),
            Err(NumericError::BadInitialDiscountFactor(_))
        ));
    }

    #[test]
    fn interpolation_and_extrapolation() {
        let c = SpotCurve::new(vec![(2, -2.0_f64), (6, 0.0), (10, 1.0)], "t").unwrap();
        assert_eq!(c.spot_rate(0), 0.0);
        assert_eq!(c.spot_rate(1), -2.0);
        assert_eq!(c.spot_rate(2), -2.0);
        assert_eq!(c.spot_rate(4), -1.0);
        assert_eq!(c.spot_rate(6), 0.0);
        assert_eq!(c.spot_rate(8), 0.5);
        assert_eq!(c.spot_rate(40), 1.0);
    }

    #[test]
    fn delta_scales_flat_factors() {
        let c = SpotCurve::flat(-1.5_f64);
        let a = discount_factors(&c, 0.0, 30).unwrap();
        let b = discount_factors(&c, 0.5, 30).unwrap();
        for t in 0..=30 {
            let expect = (1.0 + (-1.5 + 0.5) / 100.0_f64).powi(t as i32);
            assert_eq!(b[t], expect);
            assert!(a[t] > 0.0);
        }
    }

    #[test]
    fn curve_validation() {
        assert_eq!(
            SpotCurve::<f64>::new(vec![], "x"),
            Err(ConfigError::EmptyCurve)
        );
        assert!(SpotCurve::new(vec![(3, 1.0_f64), (3, 2.0)], "x").is_err());
        assert!(SpotCurve::new(vec![(0, 1.0_f64), (3, 2.0)], "x").is_err());
        assert!(SpotCurve::new(vec![(0, 0.0_f64), (3, 2.0)], "x").is_ok());
    }

    #[test]
    fn load_long_file() {
        let f = write_tmp("maturity_years,real_spot_rate_pct\n1,-2.4\n40,-1.8\n");
        let c: SpotCurve<f64> = load_spot_curve(f.path(), &CurveLayout::Long).unwrap();
        assert_eq!(c.points(), &[(1, -2.4), (40, -1.8)]);
    }

    #[test]
    fn load_rejects_duplicate_maturity() {
        let f = write_tmp("maturity_years,real_spot_rate_pct\n1,-2.4\n5,-2.0\n5,-1.9\n");
        let err = load_spot_curve::<f64>(f.path(), &CurveLayout::Long).unwrap_err();
        assert!(
            matches!(
                err,
                DataError::NonMonotoneMaturity {
                    line: 4,
                    maturity: 5,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn load_reports_line_of_parse_error() {
        let f = write_tmp("maturity_years,real_spot_rate_pct\n1,-2.4\n2,abc\n");
        let err = load_spot_curve::<f64>(f.path(), &CurveLayout::Long).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 3, .. }), "{err}");
        let f = write_tmp("years,rate\n1,-2.4\n");
        assert!(load_spot_curve::<f64>(f.path(), &CurveLayout::Long).is_err());
    }

    #[test]
    fn load_wide_file() {
        let f = write_tmp(
            "date,0.5,1,2,3\n2020-03-31,-3.0,-2.5,,-2.1\n2021-03-31,-3.1,-2.9,-2.8,-2.7\n",
        );
        let c: SpotCurve<f64> = load_spot_curve(
            f.path(),
            &CurveLayout::Wide {
                row: Some("2020-03-31".into()),
            },
        )
        .unwrap();
        assert_eq!(c.points(), &[(1, -2.5), (3, -2.1)]);
        assert!(c.label().ends_with("2020-03-31"));
        let last: SpotCurve<f64> =
            load_spot_curve(f.path(), &CurveLayout::Wide { row: None }).unwrap();
        assert_eq!(last.points().len(), 3);
        assert!(load_spot_curve::<f64>(
            f.path(),
            &CurveLayout::Wide {
                row: Some("1999".into())
            }
        )
        .is_err());
    }

    proptest::proptest! {
        #[test]
        fn flat_curve_round_trip(r in -5.0..8.0f64, delta in -1.0..1.0f64, horizon in 1usize..120) {
            let s = safe_returns(&SpotCurve::flat(r), delta, horizon).unwrap();
            let g = 1.0 + (r + delta) / 100.0;
            for &x in s.gross_returns() {
                proptest::prop_assert!(rel(x, g) < 1e-12);
            }
            let prod: f64 = s.gross_returns().iter().product();
            proptest::prop_assert!(rel(prod, s.discount_factors()[horizon]) < 1e-12);
        }

        #[test]
        fn cumulative_product_matches_factors(
            rates in proptest::collection::vec(-4.0..6.0f64, 1..8),
            horizon in 1usize..90,
        ) {
            let pts = rates.iter().enumerate().map(|(i, &r)| ((i as u32 + 1) * 7, r)).collect();
            let c = SpotCurve::new(pts, "p").unwrap();
            let s = safe_returns(&c, 0.5, horizon).unwrap();
            let prod: f64 = s.gross_returns().iter().product();
            proptest::prop_assert!(rel(prod, s.discount_factors()[horizon]) < 1e-12);
        }
    }
}
