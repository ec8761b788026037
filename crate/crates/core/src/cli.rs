//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input or usage error, 3 numerical
//! non-convergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::calibration::{
    calibrate_sensor, fit_bet, load_fixed_points_path, CalibrationDataset, ParameterMask,
    DEFAULT_BET_RANGE,
};
use crate::config::{params_to_string, RunConfig};
use crate::error::{Error, Result};
use crate::hysteresis::Direction;
use crate::io::{fmt_sig9, read_numeric_csv};
use crate::pore::{fit_lorentzian, LorentzianParams, ScatteringCurve};
use crate::quantities::{RelHumidity, Temperature};
use crate::twin::{
    average_sensitivity, compare_bake_schedule, read_trace_path, readings_to_csv, simulate_trace,
    SensorParams, TwinState,
};

#[derive(Debug, Parser)]
#[command(name = "rh-twin", version, about = "Porous-alumina humidity sensor model")]
pub struct Cli {
    /// TOML file of `key = value` settings.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one setting; repeatable, applied after --config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Major hysteresis loop as `rh_percent,c_asc_pf,c_desc_pf`.
    Loop {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        temp_c: Option<f64>,
    },
    /// Run the twin over an environment trace.
    Simulate { trace: PathBuf },
    /// Fit sensor parameters to a calibration CSV or a salt table (`.toml`).
    Calibrate {
        data: PathBuf,
        /// Comma-separated parameter keys to fit.
        #[arg(long)]
        mask: Option<String>,
        /// Write the human-readable report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// BET fit of an adsorption isotherm `p_over_p0,amount`.
    BetFit { isotherm: PathBuf },
    /// Lorentzian fit of a scattering curve `q_inv_angstrom,intensity`.
    GisaxsFit { curve: PathBuf },
    /// Peak drift offset with and without scheduled bakes.
    Maintenance {
        trace: PathBuf,
        #[arg(long)]
        bake_interval_h: Option<f64>,
    },
}

const DEFAULT_SAMPLES: usize = 101;
const DEFAULT_TEMP_C: f64 = 25.0;
const DEFAULT_BAKE_INTERVAL_H: f64 = 24.0;

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    for assignment in &cli.set {
        cfg.set(assignment)?;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Loop { samples, temp_c } => {
            let samples = match samples {
                Some(n) => *n,
                None => cfg.count("loop.samples")?.unwrap_or(DEFAULT_SAMPLES),
            };
            let t = temp_c.or(cfg.number("loop.temp_c")).unwrap_or(DEFAULT_TEMP_C);
            emit(out, &loop_csv(&cfg.sensor_params()?, Temperature::from_celsius(t)?, samples)?)
        }
        Command::Simulate { trace } => {
            let params = cfg.sensor_params()?;
            let env = read_trace_path(trace)?;
            let start = env
                .first()
                .map(|r| r.ambient.t)
                .unwrap_or(Temperature::from_celsius(DEFAULT_TEMP_C)?);
            let readings = simulate_trace(&env, &params, TwinState::baked(start))?;
            emit(out, &readings_to_csv(&readings))
        }
        Command::Calibrate { data, mask, report } => {
            let mask = match mask.as_deref().or(cfg.text("calibrate.mask")) {
                Some(list) => ParameterMask::parse(list)?,
                None => ParameterMask::typical(),
            };
            calibrate(&cfg.sensor_params()?, data, &mask, out, report.as_deref())
        }
        Command::BetFit { isotherm } => emit(out, &bet_report(isotherm)?),
        Command::GisaxsFit { curve } => emit(out, &gisaxs_report(curve)?),
        Command::Maintenance {
            trace,
            bake_interval_h,
        } => {
            let hours = bake_interval_h
                .or(cfg.number("maintenance.bake_interval_h"))
                .unwrap_or(DEFAULT_BAKE_INTERVAL_H);
            if !(hours.is_finite() && hours > 0.0) {
                return Err(Error::Usage(format!("bake interval must be positive, got {hours} h")));
            }
            let params = cfg.sensor_params()?;
            let env = read_trace_path(trace)?;
            let start = env
                .first()
                .map(|r| r.ambient.t)
                .unwrap_or(Temperature::from_celsius(DEFAULT_TEMP_C)?);
            let r = compare_bake_schedule(&env, &params, &TwinState::baked(start), hours * 3600.0)?;
            let mut text = String::new();
            let _ = writeln!(text, "bake_interval_h = {}", fmt_sig9(hours));
            let _ = writeln!(text, "bakes = {}", r.bakes);
            let _ = writeln!(text, "peak_offset_without_bakes_pf = {}", fmt_sig9(r.peak_offset_unbaked_pf));
            let _ = writeln!(text, "peak_offset_with_bakes_pf = {}", fmt_sig9(r.peak_offset_baked_pf));
            emit(out, &text)
        }
    }
}

/// `rh_percent,c_asc_pf,c_desc_pf` over an even grid.
pub fn loop_csv(params: &SensorParams, t: Temperature, samples: usize) -> Result<String> {
    let asc = params.response_curve(t, Direction::Ascending, samples)?;
    let desc = params.response_curve(t, Direction::Descending, samples)?;
    let mut text = String::from("rh_percent,c_asc_pf,c_desc_pf\n");
    for ((x, a), (_, d)) in asc.points().iter().zip(desc.points()) {
        let _ = writeln!(text, "{},{},{}", fmt_sig9(x.percent()), fmt_sig9(a.pf()), fmt_sig9(d.pf()));
    }
    Ok(text)
}

fn calibrate(
    init: &SensorParams,
    data: &Path,
    mask: &ParameterMask,
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<()> {
    if mask.is_empty() {
        return Err(Error::Usage("no free parameters in the calibration mask".into()));
    }
    let dataset = if data.extension().is_some_and(|e| e == "toml") {
        load_fixed_points_path(data)?
    } else {
        CalibrationDataset::from_csv_path(data)?
    };
    if dataset.points.is_empty() {
        return Err(Error::Data(format!("{} holds no calibration points", data.display())));
    }
    let outcome = calibrate_sensor(&dataset, init, mask)?;
    let t = dataset.points[0].t;
    let fitted = &outcome.params;

    let mut report = String::new();
    let r = &outcome.report;
    let _ = writeln!(report, "source: {}", dataset.metadata.source);
    let _ = writeln!(report, "points: {}", dataset.points.len());
    let _ = writeln!(
        report,
        "free parameters: {}",
        outcome.mask.params().iter().map(|p| p.key()).collect::<Vec<_>>().join(", ")
    );
    for w in &outcome.warnings {
        let _ = writeln!(report, "warning: {w}");
    }
    let _ = writeln!(report, "converged: {}", r.converged);
    let _ = writeln!(report, "iterations: {}", r.iterations);
    let _ = writeln!(report, "residual_norm_pf: {}", fmt_sig9(r.residual_norm));
    let _ = writeln!(report, "temperature_c: {}", fmt_sig9(t.celsius()));
    let curve = fitted.response_curve(t, Direction::Ascending, 101)?;
    let s = |lo: f64, hi: f64| -> Result<f64> {
        average_sensitivity(&curve, RelHumidity::new(lo)?, RelHumidity::new(hi)?)
    };
    let _ = writeln!(report, "average_sensitivity_20_90_pf_per_pct: {}", fmt_sig9(s(0.2, 0.9)?));
    let _ = writeln!(report, "slope_40_70_pf_per_pct: {}", fmt_sig9(s(0.4, 0.7)?));
    let _ = writeln!(report, "slope_80_95_pf_per_pct: {}", fmt_sig9(s(0.8, 0.95)?));

    emit(out, &params_to_string(fitted))?;
    match report_path {
        Some(path) => std::fs::write(path, &report).map_err(|e| Error::io(path, e))?,
        None if out.is_some() => print!("{report}"),
        None => eprint!("{report}"),
    }
    if !r.converged {
        return Err(Error::NonConvergence {
            best: r.params.clone(),
            residual_norm: r.residual_norm,
            iterations: r.iterations,
        });
    }
    Ok(())
}

/// Least-squares line through the points with `lo <= x <= hi`.
fn line_fit(points: &[(f64, f64)], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let sel: Vec<_> = points.iter().filter(|p| p.0 >= lo && p.0 <= hi).collect();
    if sel.len() < 2 {
        return None;
    }
    let n = sel.len() as f64;
    let mx = sel.iter().map(|p| p.0).sum::<f64>() / n;
    let my = sel.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = sel.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = sel.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| (sxy / sxx, my - sxy / sxx * mx))
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (x0 <= x && x <= x1 && x1 > x0).then(|| y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    })
}

/// True when uptake at `x = 0.9` exceeds 1.5 times the straight-line
/// extrapolation of the 0.15–0.70 region.
pub fn type_iv_flag(isotherm: &[(f64, f64)]) -> Option<bool> {
    let mut pts = isotherm.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (slope, intercept) = line_fit(&pts, 0.15, 0.70)?;
    let at = interpolate(&pts, 0.9)?;
    Some(at > 1.5 * (slope * 0.9 + intercept))
}

fn bet_report(path: &Path) -> Result<String> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = read_numeric_csv(file, &["p_over_p0", "amount"])?;
    let iso: Vec<(f64, f64)> = rows.into_iter().map(|r| (r[0], r[1])).collect();
    let fit = fit_bet(&iso, DEFAULT_BET_RANGE)?;
    let mut text = String::new();
    let _ = writeln!(text, "v_m = {}", fmt_sig9(fit.v_m));
    let _ = writeln!(text, "c = {}", fmt_sig9(fit.c));
    let _ = writeln!(text, "r_squared = {}", fmt_sig9(fit.r_squared));
    let _ = writeln!(text, "monolayer_p_over_p0 = {}", fmt_sig9(fit.monolayer_point()));
    let flag = match type_iv_flag(&iso) {
        Some(true) => "yes",
        Some(false) => "no",
        None => "undetermined",
    };
    let _ = writeln!(text, "type_iv = {flag}");
    Ok(text)
}

/// IUPAC class of a pore width in nm.
pub fn pore_class(width_nm: f64) -> &'static str {
    if width_nm < 2.0 {
        "microporous"
    } else if width_nm <= 50.0 {
        "mesoporous"
    } else {
        "macroporous"
    }
}

/// Starting point from the first intensity and the half-maximum crossing.
pub fn lorentzian_guess(curve: &ScatteringCurve) -> Result<LorentzianParams> {
    let pts = curve.points();
    let (q0, i0) = *pts
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Data("scattering curve is empty".into()))?;
    let half = pts
        .iter()
        .filter(|p| p.0 > q0 && p.1 <= 0.5 * i0)
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min);
    let q_max = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let r = if half.is_finite() { 1.0 / half } else { 1.0 / q_max.max(f64::MIN_POSITIVE) };
    LorentzianParams::new(i0.max(f64::MIN_POSITIVE), r)
}

fn gisaxs_report(path: &Path) -> Result<String> {
    let curve = ScatteringCurve::from_csv_path(path)?;
    let report = fit_lorentzian(&curve, lorentzian_guess(&curve)?)?;
    let (i0, r) = (report.params[0], report.params[1]);
    let width_nm = 2.0 * r / 10.0;
    let mut text = String::new();
    let _ = writeln!(text, "i0 = {}", fmt_sig9(i0));
    let _ = writeln!(text, "r_angstrom = {}", fmt_sig9(r));
    let _ = writeln!(text, "width_nm = {width_nm:.2}");
    let _ = writeln!(text, "class = {}", pore_class(width_nm));
    Ok(text)
}
