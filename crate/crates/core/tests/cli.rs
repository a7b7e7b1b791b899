use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pension-ruin"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(dir: &Path, extra: &str) {
    let mut cf = String::from("year,accrued,projected_accrual\n");
    for i in 0..60 {
        let x = f64::from(i) / 59.0;
        cf.push_str(&format!(
            "{},{:.3},{:.3}\n",
            2021 + i,
            2.5 * (1.0 - x) * (1.0 + x),
            0.05 * (1.0 - x)
        ));
    }
    fs::write(dir.join("cashflows.csv"), cf).unwrap();
    fs::write(
        dir.join("curve.csv"),
        "maturity_years,real_spot_rate_pct\n1,-2.4\n10,-2.0\n40,-1.8\n",
    )
    .unwrap();
    let scenario = format!(
        "name = \"test\"\n[fund]\ninitial_assets = 66.5\nalpha = 0.75\n[equity]\nmu = 0.045\nsigma = 0.175\n\
         [bonds]\ncurve = \"curve.csv\"\nrpi_adjustment = 0.5\n[cashflows]\nfile = \"cashflows.csv\"\n\
         [simulation]\npaths = 2000\nseed = 5\n[output]\ndir = \"out\"\n{extra}"
    );
    fs::write(dir.join("s.toml"), scenario).unwrap();
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), "");
    let o = run(&["simulate", "s.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in [
        "fan.csv",
        "exhaustion.csv",
        "surplus.csv",
        "fan.svg",
        "summary.json",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let fan = csv_rows(&out.join("fan.csv"));
    assert_eq!(fan[0], ["year", "p5", "p25", "p50", "p75", "p95"]);
    assert_eq!(fan.len(), 61);
    assert_eq!(
        csv_rows(&out.join("exhaustion.csv"))[0],
        ["year", "exhaustion_probability"]
    );
    let surplus = csv_rows(&out.join("surplus.csv"));
    assert_eq!(surplus[0], ["threshold_gbp_bn", "probability"]);
    assert_eq!(
        surplus[1..]
            .iter()
            .map(|r| r[0].as_str())
            .collect::<Vec<_>>(),
        ["50", "100", "200", "400"]
    );
    for row in fan.iter().skip(1) {
        for v in row {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
    }

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["n_paths"], 2000);
    let params = &summary["parameters"];
    assert_eq!(params["initial_assets_gbp_bn"], 66.5);
    assert_eq!(params["equity"]["sigma"], 0.175);
    assert_eq!(params["bonds"]["rpi_adjustment_pct"], 0.5);
    assert_eq!(params["cashflows"]["start_year"], 2021);
    assert_eq!(
        params["cashflows"]["payments_gbp_bn"]
            .as_array()
            .unwrap()
            .len(),
        60
    );
    let p = summary["results"]["overall_exhaustion_probability"]
        .as_f64()
        .unwrap();
    let last = csv_rows(&out.join("exhaustion.csv")).last().unwrap()[1]
        .parse::<f64>()
        .unwrap();
    assert!((p - last).abs() < 1e-6);

    let svg = fs::read_to_string(out.join("fan.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href") && !svg.contains("url("));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), "");
    let mut first = Vec::new();
    for (i, workers) in ["1", "4"].iter().enumerate() {
        let out = format!("run{i}");
        let o = run(
            &["--out", &out, "--workers", workers, "simulate", "s.toml"],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let files: Vec<Vec<u8>> = [
            "fan.csv",
            "exhaustion.csv",
            "surplus.csv",
            "fan.svg",
            "summary.json",
        ]
        .iter()
        .map(|f| fs::read(dir.path().join(&out).join(f)).unwrap())
        .collect();
        if i == 0 {
            first = files;
        } else {
            assert_eq!(first, files);
        }
    }
}

#[test]
fn degenerate_run_has_identical_fan_columns() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), "");
    let text = fs::read_to_string(dir.path().join("s.toml"))
        .unwrap()
        .replace("sigma = 0.175", "sigma = 0.0");
    fs::write(dir.path().join("s.toml"), text).unwrap();
    let o = run(&["--paths", "1", "simulate", "s.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for row in csv_rows(&dir.path().join("out/fan.csv")).iter().skip(1) {
        assert!(row[1..].iter().all(|v| v == &row[1]), "{row:?}");
    }
}

#[test]
fn single_alpha_sweep_matches_exhaustion_csv() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), "");
    assert!(run(&["simulate", "s.toml"], dir.path()).status.success());
    let o = run(&["sweep", "s.toml", "--alphas", "0.75"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = csv_rows(&dir.path().join("out/sweep.csv"));
    let exhaustion = csv_rows(&dir.path().join("out/exhaustion.csv"));
    assert_eq!(sweep[0], ["year", "alpha_0.75"]);
    assert_eq!(sweep[1..], exhaustion[1..]);
    assert!(dir.path().join("out/sweep.svg").is_file());
}

#[test]
fn default_sweep_has_six_curves_and_more_assets_lowers_them() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), "");
    assert!(run(&["--out", "low", "sweep", "s.toml"], dir.path())
        .status
        .success());
    let text = fs::read_to_string(dir.path().join("s.toml"))
        .unwrap()
        .replace("66.5", "80.6");
    fs::write(dir.path().join("s.toml"), text).unwrap();
    assert!(run(&["--out", "high", "sweep", "s.toml"], dir.path())
        .status
        .success());
    let low = csv_rows(&dir.path().join("low/sweep.csv"));
    let high = csv_rows(&dir.path().join("high/sweep.csv"));
    assert_eq!(
        low[0],
        [
            "year",
            "alpha_0.25",
            "alpha_0.35",
            "alpha_0.45",
            "alpha_0.55",
            "alpha_0.65",
            "alpha_0.75"
        ]
    );
    for (l, h) in low.iter().zip(&high).skip(1) {
        for (a, b) in l[1..].iter().zip(&h[1..]) {
            assert!(b.parse::<f64>().unwrap() <= a.parse::<f64>().unwrap());
        }
    }
}

#[test]
fn invalid_scenario_exits_one_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), "");
    let text = fs::read_to_string(dir.path().join("s.toml"))
        .unwrap()
        .replace("alpha = 0.75", "alpha = 1.75");
    fs::write(dir.path().join("bad.toml"), text).unwrap();
    let o = run(&["simulate", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fund.alpha"), "{}", stderr(&o));

    let o = run(&["simulate", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_data_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), "");
    fs::write(
        dir.path().join("curve.csv"),
        "maturity_years,real_spot_rate_pct\n1,-2.4\n1,-2.0\n",
    )
    .unwrap();
    let o = run(&["simulate", "s.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("strictly increasing"), "{}", stderr(&o));
}

#[test]
fn yield_prints_series() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("flat.csv"),
        "maturity_years,real_spot_rate_pct\n1,2\n30,2\n",
    )
    .unwrap();
    let o = run(
        &["yield", "flat.csv", "--delta", "0", "--horizon", "3"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "period,spot_rate_pct,discount_factor,forward_gross_return\n\
         1,2,1.02,1.02\n2,2,1.0404,1.02\n3,2,1.06121,1.02\n"
    );
    let o = run(&["yield", "flat.csv", "--delta", "-0.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 31);

    fs::write(
        dir.path().join("wide.csv"),
        "date,1,2\n2020-03-31,-2.5,-2.4\n",
    )
    .unwrap();
    let o = run(
        &[
            "yield",
            "wide.csv",
            "--wide",
            "--row",
            "2020-03-31",
            "--horizon",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("\n2,-2.4,"));
}

#[test]
fn estimate_returns_constant_panel() {
    let dir = tempfile::tempdir().unwrap();
    let mut panel = String::from("country,year,eq_tr,inflation,population,rgdppc\n");
    for y in 1900..1950 {
        panel.push_str(&format!("GBR,{y},0.0404,0.02,40,100\n"));
    }
    fs::write(dir.path().join("panel.csv"), panel).unwrap();
    for method in ["unweighted-pooled", "gdp-weighted-portfolio"] {
        let o = run(
            &[
                "--out",
                "m",
                "estimate-returns",
                "panel.csv",
                "--method",
                method,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let s = stdout(&o);
        assert!(s.contains("mean 2%"), "{s}");
        assert!(s.contains("sd 0%"), "{s}");
        assert!(s.contains("1900-1949"), "{s}");
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("m/moments.json")).unwrap())
                .unwrap();
        assert_eq!(m["method"], method);
        assert!((m["mean_pct"].as_f64().unwrap() - 2.0).abs() < 1e-9);
        assert!(m["sd_pct"].as_f64().unwrap() < 1e-9);
    }
    let o = run(
        &["estimate-returns", "panel.csv", "--method", "median"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let o = run(
        &[
            "estimate-returns",
            "panel.csv",
            "--columns",
            "inflation=cpi",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &[
            "estimate-returns",
            "panel.csv",
            "--from",
            "1940",
            "--to",
            "1941",
        ],
        dir.path(),
    );
    assert!(stdout(&o).contains("1940-1941"), "{}", stdout(&o));
}
