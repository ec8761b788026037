//! Time-stepping forward model of the sensor and its inverse readout.
//!
//! One lumped element temperature is driven by ambient temperature and the
//! eight heater segments. Moisture diffusing into the pore walls is a slow
//! scalar state that widens pores and wets the skeleton; chemisorbed OH
//! groups accumulate as a capacitance offset that a bake removes.

use std::io::Read;
use std::path::Path;

use crate::dielectric::{
    capacitance, effective_permittivity_with_wall, DielectricParams, ResponseCurve,
};
use crate::error::{Error, Result};
use crate::hysteresis::{filled_fraction_widened, Branch, Direction, HysteresisState};
use crate::io::{fmt_sig9, parse_fields};
use crate::pore::{default_alumina_distribution, PoreDistribution};
use crate::quantities::{
    saturation_pressure, Capacitance, RelHumidity, Temperature, CELSIUS_OFFSET, GAS_CONSTANT,
};
use crate::sorption::{BetParams, ContactAngles};

pub const HEATER_SEGMENTS: usize = 8;

/// Reference temperature of the wall-diffusion equilibrium, K.
const DIFFUSION_REFERENCE_K: f64 = 373.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeaterSegment {
    pub resistance_ohm: f64,
    /// Temperature rise at the sensing area per watt, K/W.
    pub thermal_resistance: f64,
    pub max_power_w: f64,
}

impl Default for HeaterSegment {
    fn default() -> Self {
        HeaterSegment {
            resistance_ohm: 100.0,
            thermal_resistance: 40.0,
            max_power_w: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Relative pore widening at full wall saturation.
    pub widening_amplitude: f64,
    /// Activation energy of moisture diffusion into the walls, J/mol.
    pub widening_activation: f64,
    pub tau_in_s: f64,
    pub tau_out_s: f64,
    pub heater: [HeaterSegment; HEATER_SEGMENTS],
    pub time_constant_s: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            widening_amplitude: 0.5,
            widening_activation: 20_000.0,
            tau_in_s: 60.0,
            tau_out_s: 300.0,
            heater: [HeaterSegment::default(); HEATER_SEGMENTS],
            time_constant_s: 5.0,
        }
    }
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(self.widening_amplitude.is_finite() && self.widening_amplitude >= 0.0) {
            return Err(Error::Precondition("widening amplitude must be >= 0".into()));
        }
        if !self.widening_activation.is_finite() {
            return Err(Error::Precondition("widening activation must be finite".into()));
        }
        if !(positive(self.tau_in_s) && positive(self.tau_out_s) && positive(self.time_constant_s)) {
            return Err(Error::Precondition("time constants must be positive".into()));
        }
        for (i, seg) in self.heater.iter().enumerate() {
            if !(positive(seg.resistance_ohm)
                && seg.thermal_resistance.is_finite()
                && seg.thermal_resistance >= 0.0
                && seg.max_power_w.is_finite()
                && seg.max_power_w >= 0.0)
            {
                return Err(Error::Precondition(format!("heater segment {} is invalid", i + 1)));
            }
        }
        Ok(())
    }

    /// Steady-state element temperature for the given heater powers.
    pub fn steady_temperature(&self, ambient: Temperature, powers: &[f64; HEATER_SEGMENTS]) -> f64 {
        ambient.kelvin()
            + self
                .heater
                .iter()
                .zip(powers)
                .map(|(seg, p)| seg.thermal_resistance * p)
                .sum::<f64>()
    }

    pub fn full_power(&self) -> [f64; HEATER_SEGMENTS] {
        std::array::from_fn(|i| self.heater[i].max_power_w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParams {
    /// Chemisorption rate per unit RH, 1/s.
    pub rate_per_s: f64,
    pub max_offset_pf: f64,
    pub bake_temp_c: f64,
    pub bake_time_s: f64,
}

impl Default for DriftParams {
    fn default() -> Self {
        DriftParams {
            rate_per_s: 1e-6,
            max_offset_pf: 50.0,
            bake_temp_c: 100.0,
            bake_time_s: 600.0,
        }
    }
}

impl DriftParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_per_s.is_finite() && self.rate_per_s >= 0.0) {
            return Err(Error::Precondition("drift rate must be >= 0".into()));
        }
        if !(self.max_offset_pf.is_finite() && self.max_offset_pf >= 0.0) {
            return Err(Error::Precondition("drift offset must be >= 0".into()));
        }
        if !(self.bake_time_s.is_finite() && self.bake_time_s > 0.0 && self.bake_temp_c.is_finite()) {
            return Err(Error::Precondition("bake protocol must be finite and positive".into()));
        }
        Ok(())
    }

    /// Drift decays with time constant `bake_time / 5` while baking.
    pub fn bake_time_constant(&self) -> f64 {
        self.bake_time_s / 5.0
    }
}

/// Complete parameter set of the sensor model.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorParams {
    pub dist: PoreDistribution,
    pub angles: ContactAngles,
    pub bet: BetParams,
    pub diel: DielectricParams,
    pub thermal: ThermalParams,
    pub drift: DriftParams,
}

impl Default for SensorParams {
    fn default() -> Self {
        SensorParams {
            dist: default_alumina_distribution(),
            angles: ContactAngles::default(),
            bet: BetParams::default(),
            diel: DielectricParams::default(),
            thermal: ThermalParams::default(),
            drift: DriftParams::default(),
        }
    }
}

impl SensorParams {
    pub fn validate(&self) -> Result<()> {
        self.diel.validate()?;
        self.thermal.validate()?;
        self.drift.validate()?;
        if self.dist.porosity() != self.diel.porosity {
            return Err(Error::Precondition(format!(
                "pore distribution porosity {} differs from dielectric porosity {}",
                self.dist.porosity(),
                self.diel.porosity
            )));
        }
        Ok(())
    }

    /// Sets the porosity shared by the pore distribution and the dielectric.
    pub fn set_porosity(&mut self, porosity: f64) -> Result<()> {
        self.dist = self.dist.with_porosity(porosity)?;
        self.diel.porosity = porosity;
        Ok(())
    }

    /// Equilibrium wall-moisture state: `x exp(-(E_d/R)(1/T - 1/373.15 K))`.
    pub fn diffusion_equilibrium(&self, x: RelHumidity, t: Temperature) -> f64 {
        let arrhenius = (-(self.thermal.widening_activation / GAS_CONSTANT)
            * (1.0 / t.kelvin() - 1.0 / DIFFUSION_REFERENCE_K))
            .exp();
        (x.fraction() * arrhenius).clamp(0.0, 1.0)
    }

    /// Capacitance for a given memory state, element temperature, wall
    /// moisture state `s` and drift level `d`.
    pub fn reading(
        &self,
        hysteresis: &HysteresisState,
        t: Temperature,
        s: f64,
        d: f64,
    ) -> Result<Capacitance> {
        let widening = 1.0 + self.thermal.widening_amplitude * s;
        let fill = filled_fraction_widened(
            hysteresis,
            &self.dist,
            &self.angles,
            &self.bet,
            water_range(t),
            widening,
        )?;
        let wall = self.diel.porosity * (widening * widening - 1.0);
        let kappa = effective_permittivity_with_wall(&fill, wall, &self.diel);
        Capacitance::from_pf(capacitance(kappa, &self.diel)?.pf() + d * self.drift.max_offset_pf)
    }

    /// Steady-state reading at constant `t` (wall moisture equilibrated, no drift).
    pub fn static_reading(&self, hysteresis: &HysteresisState, t: Temperature) -> Result<Capacitance> {
        let s = self.diffusion_equilibrium(hysteresis.current(), t);
        self.reading(hysteresis, t, s, 0.0)
    }

    /// Static major-loop branch as a response curve ordered by increasing RH.
    pub fn response_curve(
        &self,
        t: Temperature,
        direction: Direction,
        samples: usize,
    ) -> Result<ResponseCurve> {
        if samples < 2 {
            return Err(Error::Usage(format!(
                "response curve needs at least 2 samples, got {samples}"
            )));
        }
        let grid = (0..samples).map(|i| i as f64 / (samples - 1) as f64);
        let base = match direction {
            Direction::Ascending => HysteresisState::baked(),
            Direction::Descending => HysteresisState::saturated(),
        };
        let points = grid
            .map(|x| {
                let x = RelHumidity::new(x)?;
                Ok((x, self.static_reading(&base.update(x), t)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let branch = match direction {
            Direction::Ascending => Branch::Ascending,
            Direction::Descending => Branch::Descending,
        };
        ResponseCurve::new(points, branch)
    }
}

/// Clamps into the validity range of the water property fit.
fn water_range(t: Temperature) -> Temperature {
    let k = t.kelvin().clamp(CELSIUS_OFFSET, CELSIUS_OFFSET + 100.0);
    Temperature::from_kelvin(k).expect("clamped temperature is valid")
}

/// Ambient conditions seen by the package.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ambient {
    pub x: RelHumidity,
    pub t: Temperature,
}

/// Mutable simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinState {
    pub hysteresis: HysteresisState,
    /// Chemisorption drift level in `[0, 1]`.
    pub drift_level: f64,
    pub element_temp: Temperature,
    /// Wall moisture state in `[0, 1]`.
    pub diffusion_state: f64,
    pub clock_s: f64,
}

impl TwinState {
    /// Freshly baked sensor sitting at `ambient`.
    pub fn baked(ambient: Temperature) -> Self {
        TwinState {
            hysteresis: HysteresisState::baked(),
            drift_level: 0.0,
            element_temp: ambient,
            diffusion_state: 0.0,
            clock_s: 0.0,
        }
    }

    /// Relative humidity at the sensing layer when it sits at `element_temp`
    /// while the surrounding air has `ambient`.
    pub fn local_humidity(ambient: &Ambient, element_temp: Temperature) -> RelHumidity {
        let ratio = saturation_pressure(ambient.t) / saturation_pressure(element_temp);
        RelHumidity::new((ambient.x.fraction() * ratio).clamp(0.0, 1.0))
            .expect("clamped humidity is valid")
    }

    /// Current reading of this state.
    pub fn reading(&self, params: &SensorParams) -> Result<Capacitance> {
        params.reading(
            &self.hysteresis,
            self.element_temp,
            self.diffusion_state,
            self.drift_level,
        )
    }

    /// Inverts `c` on this state's branch, using its own temperature, wall
    /// moisture and drift.
    pub fn invert(&self, c: Capacitance, params: &SensorParams) -> Result<RelHumidity> {
        let (t, s, d) = (self.element_temp, self.diffusion_state, self.drift_level);
        invert_with(c, &self.hysteresis, |h| params.reading(h, t, s, d))
    }

    fn advance(
        &mut self,
        ambient: &Ambient,
        powers: &[f64; HEATER_SEGMENTS],
        dt: f64,
        params: &SensorParams,
    ) -> Result<Capacitance> {
        let thermal = &params.thermal;
        let target = thermal.steady_temperature(ambient.t, powers);
        let relax = (-dt / thermal.time_constant_s).exp();
        let element = target + (self.element_temp.kelvin() - target) * relax;
        self.element_temp = Temperature::from_kelvin(element)?;

        let x_local = Self::local_humidity(ambient, self.element_temp);

        let s_target = params.diffusion_equilibrium(x_local, self.element_temp);
        let tau = if s_target > self.diffusion_state {
            thermal.tau_in_s
        } else {
            thermal.tau_out_s
        };
        self.diffusion_state =
            (s_target + (self.diffusion_state - s_target) * (-dt / tau).exp()).clamp(0.0, 1.0);

        self.hysteresis.apply(x_local);

        let drift = &params.drift;
        let baking = self.element_temp.kelvin() >= drift.bake_temp_c + CELSIUS_OFFSET;
        self.drift_level = if baking {
            self.drift_level * (-dt / drift.bake_time_constant()).exp()
        } else {
            1.0 - (1.0 - self.drift_level) * (-drift.rate_per_s * x_local.fraction() * dt).exp()
        }
        .clamp(0.0, 1.0);

        self.clock_s += dt;
        self.reading(params)
    }
}

fn check_powers(powers: &[f64; HEATER_SEGMENTS]) -> Result<()> {
    if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Precondition(format!(
            "heater power {p} W must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Advances the twin by `dt` seconds and returns the new state and reading.
pub fn step(
    state: &TwinState,
    ambient: Ambient,
    heater_power: [f64; HEATER_SEGMENTS],
    dt: f64,
    params: &SensorParams,
) -> Result<(TwinState, Capacitance)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Precondition(format!("time step {dt} s must be positive")));
    }
    check_powers(&heater_power)?;
    let mut next = state.clone();
    let reading = next.advance(&ambient, &heater_power, dt, params)?;
    Ok((next, reading))
}

/// One row of an environment trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSample {
    pub t_s: f64,
    pub ambient: Ambient,
    pub heater_w: [f64; HEATER_SEGMENTS],
}

impl EnvSample {
    pub fn new(t_s: f64, rh_percent: f64, temp_c: f64) -> Result<Self> {
        Ok(EnvSample {
            t_s,
            ambient: Ambient {
                x: RelHumidity::from_percent(rh_percent)?,
                t: Temperature::from_celsius(temp_c)?,
            },
            heater_w: [0.0; HEATER_SEGMENTS],
        })
    }

    pub fn with_heaters(mut self, heater_w: [f64; HEATER_SEGMENTS]) -> Self {
        self.heater_w = heater_w;
        self
    }
}

/// Reading emitted for one trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReading {
    pub t_s: f64,
    pub capacitance: Capacitance,
}

/// Runs `step` over a trace; the first row is observed without elapsed time.
pub fn simulate_trace(
    env: &[EnvSample],
    params: &SensorParams,
    initial: TwinState,
) -> Result<Vec<TraceReading>> {
    simulate_trace_states(env, params, initial).map(|(readings, _)| readings)
}

/// As [`simulate_trace`], also returning the final state.
pub fn simulate_trace_states(
    env: &[EnvSample],
    params: &SensorParams,
    initial: TwinState,
) -> Result<(Vec<TraceReading>, TwinState)> {
    let mut state = initial;
    let mut out = Vec::with_capacity(env.len());
    for (i, row) in env.iter().enumerate() {
        if !row.t_s.is_finite() {
            return Err(Error::Format {
                row: i + 1,
                message: "timestamp is not finite".into(),
            });
        }
        check_powers(&row.heater_w).map_err(|e| Error::Format {
            row: i + 1,
            message: e.to_string(),
        })?;
        let dt = if i == 0 {
            state.clock_s = row.t_s;
            0.0
        } else {
            let dt = row.t_s - env[i - 1].t_s;
            if dt <= 0.0 {
                return Err(Error::Format {
                    row: i + 1,
                    message: format!(
                        "timestamps must be strictly increasing ({} after {})",
                        row.t_s,
                        env[i - 1].t_s
                    ),
                });
            }
            dt
        };
        let c = state.advance(&row.ambient, &row.heater_w, dt, params)?;
        out.push(TraceReading {
            t_s: row.t_s,
            capacitance: c,
        });
    }
    Ok((out, state))
}

const TRACE_PREFIX: [&str; 3] = ["t_s", "rh_percent", "temp_c"];

/// Reads the environment trace CSV `t_s,rh_percent,temp_c[,p1_w,...,p8_w]`.
///
/// Power columns may be omitted from the right, or left empty, and then
/// read as zero.
pub fn read_trace<R: Read>(reader: R) -> Result<Vec<EnvSample>> {
    let expected = format!(
        "{},p1_w,...,p{}_w",
        TRACE_PREFIX.join(","),
        HEATER_SEGMENTS
    );
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        _ => {
            return Err(Error::Format {
                row: 0,
                message: format!("missing header; expected `{expected}`"),
            })
        }
    };
    let names: Vec<&str> = header.iter().collect();
    let header_ok = names.len() >= 3
        && names.len() <= 3 + HEATER_SEGMENTS
        && names[..3] == TRACE_PREFIX
        && names[3..]
            .iter()
            .enumerate()
            .all(|(i, n)| *n == format!("p{}_w", i + 1));
    if !header_ok {
        return Err(Error::Format {
            row: 0,
            message: format!("expected header `{expected}`, found `{}`", names.join(",")),
        });
    }
    let width = names.len();
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Format {
            row,
            message: e.to_string(),
        })?;
        if rec.len() < 3 || rec.len() > width {
            return Err(Error::Format {
                row,
                message: format!("expected 3 to {width} fields, found {}", rec.len()),
            });
        }
        let head = parse_fields(row, rec.iter().take(3))?;
        let mut powers = [0.0; HEATER_SEGMENTS];
        for (k, field) in rec.iter().skip(3).enumerate() {
            if !field.is_empty() {
                powers[k] = parse_fields(row, std::iter::once(field))?[0];
            }
        }
        let sample = EnvSample::new(head[0], head[1], head[2])
            .map_err(|e| Error::Format {
                row,
                message: e.to_string(),
            })?
            .with_heaters(powers);
        check_powers(&powers).map_err(|e| Error::Format {
            row,
            message: e.to_string(),
        })?;
        if let Some(prev) = rows.last().map(|r: &EnvSample| r.t_s) {
            if sample.t_s <= prev {
                return Err(Error::Format {
                    row,
                    message: format!("timestamps must be strictly increasing ({} after {prev})", sample.t_s),
                });
            }
        }
        rows.push(sample);
    }
    Ok(rows)
}

pub fn read_trace_path(path: &Path) -> Result<Vec<EnvSample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(file)
}

/// Serializes readings as `t_s,capacitance_pf`.
pub fn readings_to_csv(readings: &[TraceReading]) -> String {
    let mut out = String::from("t_s,capacitance_pf\n");
    for r in readings {
        out.push_str(&format!("{},{}\n", fmt_sig9(r.t_s), fmt_sig9(r.capacitance.pf())));
    }
    out
}

/// Bisection for the lowest RH on the hinted branch reproducing `c`.
fn invert_with<F>(
    c: Capacitance,
    hint: &HysteresisState,
    forward: F,
) -> Result<RelHumidity>
where
    F: Fn(&HysteresisState) -> Result<Capacitance>,
{
    let base = hint.at_last_reversal();
    let eval = |x: f64| -> Result<f64> {
        Ok(forward(&base.update(RelHumidity::new(x)?))?.pf())
    };
    let target = c.pf();
    let (c_lo, c_hi) = (eval(0.0)?, eval(1.0)?);
    if target < c_lo {
        return Err(Error::ReadingOutOfRange {
            clamped: RelHumidity::DRY,
        });
    }
    if target > c_hi {
        return Err(Error::ReadingOutOfRange {
            clamped: RelHumidity::SATURATED,
        });
    }
    if target == c_lo {
        return Ok(RelHumidity::DRY);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if eval(hi - 1e-12)? < target {
        return Ok(RelHumidity::SATURATED);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RelHumidity::new(hi)
}

/// RH reproducing `c` at temperature `t` on the branch of `state_hint`,
/// assuming equilibrated wall moisture and no drift.
pub fn invert_reading(
    c: Capacitance,
    t: Temperature,
    state_hint: &HysteresisState,
    params: &SensorParams,
) -> Result<RelHumidity> {
    invert_with(c, state_hint, |h| params.static_reading(h, t))
}

/// Mean slope `(C(hi) - C(lo)) / (100 (hi - lo))` in pF per %RH.
pub fn average_sensitivity(curve: &ResponseCurve, lo: RelHumidity, hi: RelHumidity) -> Result<f64> {
    if lo >= hi {
        return Err(Error::OutOfRange {
            what: "sensitivity interval width (RH fraction)",
            value: hi.fraction() - lo.fraction(),
            lo: f64::MIN_POSITIVE,
            hi: 1.0,
        });
    }
    let span = |x: RelHumidity| {
        curve.interpolate(x).ok_or_else(|| {
            let pts = curve.points();
            Error::OutOfRange {
                what: "RH for sensitivity (curve coverage)",
                value: x.fraction(),
                lo: pts.first().map(|p| p.0.fraction()).unwrap_or(f64::NAN),
                hi: pts.last().map(|p| p.0.fraction()).unwrap_or(f64::NAN),
            }
        })
    };
    Ok((span(hi)? - span(lo)?) / (hi.percent() - lo.percent()))
}

/// Peak drift offsets of a trace with and without scheduled bakes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaintenanceReport {
    pub peak_offset_unbaked_pf: f64,
    pub peak_offset_baked_pf: f64,
    pub bakes: usize,
}

fn peak_offset(env: &[EnvSample], params: &SensorParams, initial: &TwinState) -> Result<f64> {
    let mut state = initial.clone();
    let mut peak = state.drift_level * params.drift.max_offset_pf;
    for (i, row) in env.iter().enumerate() {
        let dt = if i == 0 { 0.0 } else { row.t_s - env[i - 1].t_s };
        state.advance(&row.ambient, &row.heater_w, dt, params)?;
        peak = peak.max(state.drift_level * params.drift.max_offset_pf);
    }
    Ok(peak)
}

/// Runs the trace as given and again with a full-power bake of
/// `bake_time_s` every `interval_s`, counted from the first timestamp.
///
/// Bake windows are resampled finely enough to resolve the heater
/// transient; ambient conditions are held from the latest trace row.
pub fn compare_bake_schedule(
    env: &[EnvSample],
    params: &SensorParams,
    initial: &TwinState,
    interval_s: f64,
) -> Result<MaintenanceReport> {
    if !(interval_s.is_finite() && interval_s > 0.0) {
        return Err(Error::Usage(format!("bake interval must be positive, got {interval_s} s")));
    }
    let unbaked = peak_offset(env, params, initial)?;
    let (Some(first), Some(last)) = (env.first(), env.last()) else {
        return Ok(MaintenanceReport {
            peak_offset_unbaked_pf: unbaked,
            peak_offset_baked_pf: unbaked,
            bakes: 0,
        });
    };
    let bake = params.drift.bake_time_s;
    let sub = (params.thermal.time_constant_s / 2.0).min(bake / 100.0);
    let per_bake = (bake / sub).ceil() as usize;
    let windows: Vec<f64> = (1..)
        .map(|k| first.t_s + k as f64 * interval_s)
        .take_while(|&b| b < last.t_s)
        .collect();

    let mut times: Vec<f64> = env.iter().map(|r| r.t_s).collect();
    for &b in &windows {
        times.extend((0..=per_bake).map(|j| (b + j as f64 * sub).min(b + bake)));
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    times.dedup();

    let full = params.thermal.full_power();
    let mut w = 0;
    let mut src = 0;
    let schedule: Vec<EnvSample> = times
        .into_iter()
        .map(|t| {
            while src + 1 < env.len() && env[src + 1].t_s <= t {
                src += 1;
            }
            while w < windows.len() && windows[w] + bake < t {
                w += 1;
            }
            let baking = w < windows.len() && windows[w] <= t;
            EnvSample {
                t_s: t,
                ambient: env[src].ambient,
                heater_w: if baking { full } else { env[src].heater_w },
            }
        })
        .collect();
    let baked = peak_offset(&schedule, params, initial)?;
    Ok(MaintenanceReport {
        peak_offset_unbaked_pf: unbaked,
        peak_offset_baked_pf: baked,
        bakes: windows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hysteresis::branch_curve;
    use crate::dielectric::effective_permittivity;
    use approx::assert_relative_eq;

    fn rh(x: f64) -> RelHumidity {
        RelHumidity::new(x).unwrap()
    }

    fn celsius(c: f64) -> Temperature {
        Temperature::from_celsius(c).unwrap()
    }

    fn plain_params() -> SensorParams {
        let mut p = SensorParams::default();
        p.thermal.widening_amplitude = 0.0;
        p.drift.rate_per_s = 0.0;
        p
    }

    #[test]
    fn plain_step_matches_branch_curve() {
        let p = plain_params();
        let t = celsius(25.0);
        let asc = branch_curve(&p.dist, &p.angles, &p.bet, t, Direction::Ascending, 21).unwrap();
        let mut state = TwinState::baked(t);
        for (x, fill) in asc.iter().skip(1) {
            let (next, c) = step(&state, Ambient { x: *x, t }, [0.0; 8], 10.0, &p).unwrap();
            state = next;
            let expected = capacitance(effective_permittivity(fill, &p.diel), &p.diel).unwrap();
            assert_relative_eq!(c.pf(), expected.pf(), max_relative = 1e-12);
        }
    }

    #[test]
    fn bake_removes_drift() {
        let p = SensorParams::default();
        let t = celsius(100.0);
        let mut state = TwinState::baked(t);
        state.drift_level = 0.5;
        let ambient = Ambient { x: rh(0.3), t };
        for _ in 0..600 {
            state = step(&state, ambient, [0.0; 8], 1.0, &p).unwrap().0;
        }
        assert!(state.drift_level <= 0.5 * (-5f64).exp() * (1.0 + 1e-9));
        for _ in 0..600 {
            state = step(&state, ambient, [0.0; 8], 1.0, &p).unwrap().0;
        }
        assert!(state.drift_level <= 2.3e-5);
    }

    #[test]
    fn drift_offset_is_separable() {
        let p = SensorParams::default();
        let t = celsius(25.0);
        let mut state = TwinState::baked(t);
        state = step(&state, Ambient { x: rh(0.4), t }, [0.0; 8], 1.0, &p).unwrap().0;
        state.drift_level = 0.0;
        let mut drifted = state.clone();
        drifted.drift_level = 0.25;
        let diff = drifted.reading(&p).unwrap().pf() - state.reading(&p).unwrap().pf();
        assert_relative_eq!(diff, 0.25 * p.drift.max_offset_pf, max_relative = 1e-9);
    }

    #[test]
    fn element_cools_to_ambient() {
        let p = SensorParams::default();
        let t = celsius(25.0);
        let mut state = TwinState::baked(celsius(90.0));
        let gap = 65.0;
        let dt = p.thermal.time_constant_s / 10.0;
        for _ in 0..50 {
            state = step(&state, Ambient { x: rh(0.3), t }, [0.0; 8], dt, &p).unwrap().0;
        }
        assert!((state.element_temp.kelvin() - t.kelvin()).abs() <= 0.01 * gap);
    }

    #[test]
    fn full_heater_power_reaches_eighty_celsius() {
        let p = SensorParams::default();
        let steady = p
            .thermal
            .steady_temperature(celsius(25.0), &p.thermal.full_power());
        assert!(steady - CELSIUS_OFFSET >= 80.0, "{steady}");
    }

    #[test]
    fn step_rejects_bad_inputs() {
        let p = SensorParams::default();
        let s = TwinState::baked(celsius(25.0));
        let a = Ambient { x: rh(0.3), t: celsius(25.0) };
        assert!(step(&s, a, [0.0; 8], 0.0, &p).is_err());
        assert!(step(&s, a, [0.0; 8], f64::NAN, &p).is_err());
        let mut bad = [0.0; 8];
        bad[3] = -1.0;
        assert!(step(&s, a, bad, 1.0, &p).is_err());
        bad[3] = f64::INFINITY;
        assert!(step(&s, a, bad, 1.0, &p).is_err());
    }

    #[test]
    fn trace_edge_cases() {
        let p = SensorParams::default();
        let init = TwinState::baked(celsius(25.0));
        assert!(simulate_trace(&[], &p, init.clone()).unwrap().is_empty());
        let one = [EnvSample::new(0.0, 40.0, 25.0).unwrap()];
        assert_eq!(simulate_trace(&one, &p, init.clone()).unwrap().len(), 1);
        let bad = [
            EnvSample::new(0.0, 40.0, 25.0).unwrap(),
            EnvSample::new(5.0, 40.0, 25.0).unwrap(),
            EnvSample::new(5.0, 40.0, 25.0).unwrap(),
        ];
        assert!(matches!(
            simulate_trace(&bad, &p, init),
            Err(Error::Format { row: 3, .. })
        ));
    }

    #[test]
    fn trace_csv_parsing() {
        let csv = "t_s,rh_percent,temp_c,p1_w,p2_w\n0,40,25\n1,45,25,0.1,\n2,50,25,0.1,0.2\n";
        let rows = read_trace(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].heater_w, [0.0; 8]);
        assert_eq!(rows[1].heater_w[0], 0.1);
        assert_eq!(rows[2].heater_w[1], 0.2);
        let err = read_trace("time,rh\n0,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("expected header"), "{err}");
        let err = read_trace("t_s,rh_percent,temp_c\n0,40,25\n0,41,25\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { row: 2, .. }));
        let err = read_trace("t_s,rh_percent,temp_c\n0,140,25\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { row: 1, .. }));
    }

    #[test]
    fn sensitivity_arithmetic() {
        let pf = |v| Capacitance::from_pf(v).unwrap();
        let line = ResponseCurve::new(
            (0..=10).map(|i| (rh(i as f64 / 10.0), pf(15.0 * 10.0 * i as f64))).collect(),
            Branch::Ascending,
        )
        .unwrap();
        assert_relative_eq!(average_sensitivity(&line, rh(0.13), rh(0.71)).unwrap(), 15.0, max_relative = 1e-12);
        let two = ResponseCurve::new(vec![(rh(0.2), pf(200.0)), (rh(0.9), pf(1250.0))], Branch::Unknown).unwrap();
        assert_relative_eq!(average_sensitivity(&two, rh(0.2), rh(0.9)).unwrap(), 15.0, max_relative = 1e-12);
        assert!(average_sensitivity(&two, rh(0.5), rh(0.5)).is_err());
        assert!(average_sensitivity(&two, rh(0.1), rh(0.5)).is_err());
    }

    #[test]
    fn inversion_round_trip_and_range() {
        let p = SensorParams::default();
        let t = celsius(25.0);
        let state = HysteresisState::baked().update(rh(0.5));
        let c = p.static_reading(&state, t).unwrap();
        let x = invert_reading(c, t, &state, &p).unwrap();
        assert!((x.fraction() - 0.5).abs() <= 0.005);

        let dry = p.static_reading(&HysteresisState::baked(), t).unwrap();
        let below = Capacitance::from_pf(dry.pf() - 1.0).unwrap();
        assert!(matches!(
            invert_reading(below, t, &state, &p),
            Err(Error::ReadingOutOfRange { clamped }) if clamped == RelHumidity::DRY
        ));
        let sat = p.static_reading(&HysteresisState::saturated(), t).unwrap();
        assert_eq!(invert_reading(sat, t, &state, &p).unwrap(), RelHumidity::SATURATED);
    }
}
