//! CSV, SVG and JSON writers.
//!
//! CSV numbers carry 6 significant digits: fixed notation when the decimal
//! exponent is in `-5..=5`, scientific (`1.23457e9`) otherwise.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::calibration::MomentEstimate;
use crate::engine::{AllocationSweep, EnsembleStats, FanTable};
use crate::scenario::Scenario;
use crate::yield_curve::{SafeReturnSeries, SpotCurve};

/// Formats a finite value with 6 significant digits.
pub fn fmt_sig6(x: f64) -> String {
    assert!(x.is_finite(), "non-finite value in output: {x}");
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..=5).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let (mantissa, e) = sci.split_once('e').expect("exponent");
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".into()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}

fn percentile_label(p: f64) -> String {
    format!("p{}", fmt_sig6(p))
}

pub fn fan_csv(fan: &FanTable<f64>) -> String {
    let mut out = String::from("year");
    for &p in &fan.percentiles {
        out.push(',');
        out.push_str(&percentile_label(p));
    }
    out.push('\n');
    for (year, row) in fan.years.iter().zip(&fan.rows) {
        out.push_str(&year.to_string());
        for &v in row {
            out.push(',');
            out.push_str(&fmt_sig6(v));
        }
        out.push('\n');
    }
    out
}

pub fn exhaustion_csv(stats: &EnsembleStats<f64>) -> String {
    let mut out = String::from("year,exhaustion_probability\n");
    for (year, p) in stats.years.iter().zip(&stats.exhaustion_prob_by_year) {
        let _ = writeln!(out, "{year},{}", fmt_sig6(*p));
    }
    out
}

pub fn surplus_csv(stats: &EnsembleStats<f64>) -> String {
    let mut out = String::from("threshold_gbp_bn,probability\n");
    for (thr, p) in &stats.surplus_exceedance {
        let _ = writeln!(out, "{},{}", fmt_sig6(*thr), fmt_sig6(*p));
    }
    out
}

pub fn sweep_csv(sweep: &AllocationSweep<f64>) -> String {
    let mut out = String::from("year");
    for (alpha, _) in &sweep.curves {
        let _ = write!(out, ",alpha_{}", fmt_sig6(*alpha));
    }
    out.push('\n');
    for (i, year) in sweep.years.iter().enumerate() {
        out.push_str(&year.to_string());
        for (_, curve) in &sweep.curves {
            out.push(',');
            out.push_str(&fmt_sig6(curve[i]));
        }
        out.push('\n');
    }
    out
}

/// `period,spot_rate_pct,discount_factor,forward_gross_return` for periods `1..=T`.
pub fn safe_returns_csv(curve: &SpotCurve<f64>, series: &SafeReturnSeries<f64>) -> String {
    let mut out = String::from("period,spot_rate_pct,discount_factor,forward_gross_return\n");
    for t in 1..=series.len() {
        let _ = writeln!(
            out,
            "{t},{},{},{}",
            fmt_sig6(curve.spot_rate(t as u32)),
            fmt_sig6(series.discount_factors()[t]),
            fmt_sig6(series.gross_return(t)),
        );
    }
    out
}

/// Headline statistics plus every input needed to rerun the scenario.
pub fn summary_json(scenario: &Scenario, stats: &EnsembleStats<f64>) -> String {
    let cfg = &scenario.config;
    let file = &scenario.file;
    let schedule = &cfg.schedule;
    let surplus: Vec<Value> = stats
        .surplus_exceedance
        .iter()
        .map(|(t, p)| json!({ "threshold_gbp_bn": t, "probability": p }))
        .collect();
    let by_year: Vec<Value> = stats
        .years
        .iter()
        .zip(&stats.exhaustion_prob_by_year)
        .map(|(y, p)| json!({ "year": y, "probability": p }))
        .collect();
    let value = json!({
        "name": file.name,
        "seed": cfg.seed,
        "n_paths": cfg.n_paths,
        "results": {
            "overall_exhaustion_probability": stats.overall_exhaustion_prob(),
            "first_year": stats.years.first(),
            "final_year": stats.years.last(),
            "exhaustion_probability_by_year": by_year,
            "surplus_exceedance": surplus,
        },
        "parameters": {
            "initial_assets_gbp_bn": cfg.initial_assets,
            "alpha": cfg.alpha,
            "equity": {
                "mu": cfg.equity.mu,
                "sigma": cfg.equity.sigma,
                "ma_q": cfg.equity.q(),
                "ma_beta": cfg.equity.beta(),
            },
            "bonds": {
                "curve_file": file.bonds.curve,
                "curve_layout": file.bonds.curve_layout,
                "curve_row": file.bonds.curve_row,
                "flat_rate_pct": file.bonds.flat_rate_pct,
                "curve_label": scenario.curve.label(),
                "curve_points": scenario.curve.points(),
                "rpi_adjustment_pct": file.bonds.rpi_adjustment,
                "gross_returns": cfg.safe.gross_returns(),
            },
            "cashflows": {
                "file": file.cashflows.file,
                "components": file.cashflows.components,
                "start_year": schedule.start_year(),
                "payments_gbp_bn": schedule.payments(),
            },
            "thresholds_gbp_bn": scenario.report.thresholds,
            "percentiles": scenario.report.percentiles,
        },
    });
    let mut s = serde_json::to_string_pretty(&value).expect("serializable summary");
    s.push('\n');
    s
}

pub fn moments_json(est: &MomentEstimate) -> String {
    let mut s = serde_json::to_string_pretty(&json!({
        "method": est.method.as_str(),
        "mean_pct": est.mean_pct,
        "sd_pct": est.sd_pct,
        "n_values": est.n_values,
        "n_years": est.n_years,
        "first_year": est.first_year,
        "last_year": est.last_year,
    }))
    .expect("serializable estimate");
    s.push('\n');
    s
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x1 - self.x0).max(1e-12);
        LEFT + (v - self.x0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y1 - self.y0).max(1e-12);
        HEIGHT - BOTTOM - (v - self.y0) / span * (HEIGHT - TOP - BOTTOM)
    }
}

fn nice_step(range: f64, target_ticks: f64) -> f64 {
    let raw = (range / target_ticks).max(1e-12);
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    step * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn svg_open(title: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    s
}

fn axes(s: &mut String, f: &Frame, y_fmt: impl Fn(f64) -> String) {
    let _ = writeln!(
        s,
        r##"<g stroke="#000000" fill="none"><line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}"/></g>"##,
        HEIGHT - BOTTOM,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM,
        HEIGHT - BOTTOM
    );
    let ystep = nice_step(f.y1 - f.y0, 6.0);
    let mut v = (f.y0 / ystep).ceil() * ystep;
    while v <= f.y1 + ystep * 1e-9 {
        let y = f.y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0,
            y_fmt(v)
        );
        v += ystep;
    }
    let xstep = nice_step(f.x1 - f.x0, 8.0).max(1.0);
    let mut v = (f.x0 / xstep).ceil() * xstep;
    while v <= f.x1 + 1e-9 {
        let x = f.x(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#000000"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0,
            HEIGHT - BOTTOM + 20.0,
            v.round()
        );
        v += xstep;
    }
}

fn points(f: &Frame, xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> String {
    xs.zip(ys)
        .map(|(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Percentile bands of assets by year, starting from `initial_assets`.
pub fn fan_svg(fan: &FanTable<f64>, initial_assets: f64, title: &str) -> String {
    let first = fan.years.first().copied().unwrap_or(0);
    let years: Vec<f64> = std::iter::once(f64::from(first - 1))
        .chain(fan.years.iter().map(|&y| f64::from(y)))
        .collect();
    let column = |k: usize| -> Vec<f64> {
        std::iter::once(initial_assets)
            .chain(fan.rows.iter().map(|r| r[k]))
            .collect()
    };
    let y_max = fan
        .rows
        .iter()
        .flatten()
        .copied()
        .fold(initial_assets, f64::max)
        .max(1.0);
    let f = Frame {
        x0: years[0],
        x1: *years.last().unwrap(),
        y0: 0.0,
        y1: y_max * 1.05,
    };
    let mut s = svg_open(title, "Assets (£bn, real)");
    axes(&mut s, &f, fmt_sig6);
    let k = fan.percentiles.len();
    for i in 0..k / 2 {
        let lo = column(i);
        let hi = column(k - 1 - i);
        let upper = points(&f, years.iter().copied(), hi.into_iter());
        let lower = points(&f, years.iter().rev().copied(), lo.into_iter().rev());
        let opacity = 0.25 + 0.2 * i as f64;
        let _ = writeln!(
            s,
            r##"<polygon points="{upper} {lower}" fill="#3366cc" fill-opacity="{opacity:.2}" stroke="none"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}–{}</text>"#,
            WIDTH - RIGHT + 10.0,
            TOP + 16.0 * i as f64 + 10.0,
            percentile_label(fan.percentiles[i]),
            percentile_label(fan.percentiles[k - 1 - i])
        );
    }
    if k % 2 == 1 {
        let mid = column(k / 2);
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#003399" stroke-width="2"/>"##,
            points(&f, years.iter().copied(), mid.into_iter())
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - RIGHT + 10.0,
            TOP + 16.0 * (k / 2) as f64 + 10.0,
            percentile_label(fan.percentiles[k / 2])
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One exhaustion-probability curve per equity weight.
pub fn sweep_svg(sweep: &AllocationSweep<f64>, title: &str) -> String {
    let years: Vec<f64> = sweep.years.iter().map(|&y| f64::from(y)).collect();
    let f = Frame {
        x0: years.first().copied().unwrap_or(0.0),
        x1: years.last().copied().unwrap_or(1.0),
        y0: 0.0,
        y1: 1.0,
    };
    let mut s = svg_open(title, "Probability fund exhausted");
    axes(&mut s, &f, |v| format!("{}%", (v * 100.0).round()));
    for (i, (alpha, curve)) in sweep.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points(&f, years.iter().copied(), curve.iter().copied())
        );
        let y = TOP + 16.0 * i as f64 + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}% equities</text>"#,
            WIDTH - RIGHT + 10.0,
            y - 4.0,
            WIDTH - RIGHT + 28.0,
            y - 4.0,
            WIDTH - RIGHT + 34.0,
            y,
            fmt_sig6(alpha * 100.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(1.0), "1");
        assert_eq!(fmt_sig6(0.4012), "0.4012");
        assert_eq!(fmt_sig6(66.16), "66.16");
        assert_eq!(fmt_sig6(123.456789), "123.457");
        assert_eq!(fmt_sig6(9.9999996), "10");
        assert_eq!(fmt_sig6(-2.4), "-2.4");
        assert_eq!(fmt_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_sig6(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig6(0.0000123456789), "0.0000123457");
        assert_eq!(fmt_sig6(0.00000123456789), "1.23457e-6");
        assert_eq!(fmt_sig6(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig6(-0.0000001), "-1e-7");
    }

    #[test]
    fn csv_layouts() {
        let fan = FanTable {
            years: vec![2021, 2022],
            percentiles: vec![5.0, 50.0, 97.5],
            rows: vec![vec![1.0, 2.0, 3.0], vec![0.0, 1.5, 2.5]],
        };
        assert_eq!(
            fan_csv(&fan),
            "year,p5,p50,p97.5\n2021,1,2,3\n2022,0,1.5,2.5\n"
        );
        let sweep = AllocationSweep {
            years: vec![2021, 2022],
            curves: vec![(0.25, vec![0.0, 0.5]), (0.75, vec![0.1, 0.2])],
        };
        assert_eq!(
            sweep_csv(&sweep),
            "year,alpha_0.25,alpha_0.75\n2021,0,0.1\n2022,0.5,0.2\n"
        );
        let svg = sweep_svg(&sweep, "a < b");
        assert!(svg.starts_with("<svg xmlns"));
        assert!(svg.contains("a &lt; b"));
        assert!(!svg.contains("href"));
        let svg = fan_svg(&fan, 1.0, "fan");
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
