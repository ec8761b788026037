//! Shared helpers for the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rh_twin::hysteresis::HysteresisState;
use rh_twin::pore::{volume_cdf, PoreDistribution};
use rh_twin::quantities::water_properties;
use rh_twin::sorption::{inverse_kelvin, ContactAngles};
use rh_twin::twin::{step, Ambient, SensorParams, TwinState};
use rh_twin::{RelHumidity, Temperature};

pub fn rh(x: f64) -> RelHumidity {
    RelHumidity::new(x).unwrap()
}

pub fn celsius(c: f64) -> Temperature {
    Temperature::from_celsius(c).unwrap()
}

pub const PORES: usize = 10_000;

/// Per-pore boolean hysterons on a log-spaced radius grid.
pub struct PoreGrid {
    pub weight: Vec<f64>,
    fill_at: Vec<f64>,
    empty_at: Vec<f64>,
    pub on: Vec<bool>,
    /// Largest single-cell volume fraction.
    pub resolution: f64,
}

impl PoreGrid {
    pub fn new(dist: &PoreDistribution, angles: &ContactAngles, t: Temperature) -> Self {
        let w = water_properties(t).unwrap();
        let (lo, hi) = (0.01f64.ln(), 1000f64.ln());
        let edges: Vec<f64> = (0..=PORES)
            .map(|i| (lo + (hi - lo) * i as f64 / PORES as f64).exp())
            .collect();
        let mut weight = Vec::with_capacity(PORES);
        let mut fill_at = Vec::with_capacity(PORES);
        let mut empty_at = Vec::with_capacity(PORES);
        for e in edges.windows(2) {
            let r = (e[0] * e[1]).sqrt();
            weight.push(volume_cdf(dist, e[1]) - volume_cdf(dist, e[0]));
            fill_at.push(inverse_kelvin(r, t, angles.advancing_deg(), &w).unwrap().fraction());
            empty_at.push(inverse_kelvin(r, t, angles.receding_deg(), &w).unwrap().fraction());
        }
        let resolution = weight.iter().cloned().fold(0.0, f64::max);
        PoreGrid {
            weight,
            fill_at,
            empty_at,
            on: vec![false; PORES],
            resolution,
        }
    }

    pub fn reset(&mut self) {
        self.on.iter_mut().for_each(|b| *b = false);
    }

    pub fn apply(&mut self, x: f64) {
        for i in 0..PORES {
            if x >= self.fill_at[i] {
                self.on[i] = true;
            } else if x <= self.empty_at[i] {
                self.on[i] = false;
            }
        }
    }

    pub fn liquid(&self) -> f64 {
        self.on
            .iter()
            .zip(&self.weight)
            .filter(|(on, _)| **on)
            .map(|(_, w)| w)
            .sum()
    }
}

/// A memory state reached by `prefix` then `a`, and a `b` such that the
/// excursion `a -> b -> a` stays inside the stored memory (a minor cycle).
pub struct MinorCycle {
    pub prefix: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

pub fn random_minor_cycle<R: Rng>(rng: &mut R) -> MinorCycle {
    loop {
        let len = rng.gen_range(1..20);
        let prefix: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut state = HysteresisState::baked();
        for &x in &prefix {
            state.apply(rh(x));
        }
        let c = state.current().fraction();
        let descend = rng.gen_bool(0.5);
        let (a, bound) = if descend && c > 1e-3 {
            let a = rng.gen_range(1e-3..c);
            let s = state.update(rh(a));
            let e = s.extrema();
            (a, e[e.len() - 2])
        } else if c < 1.0 - 1e-3 {
            let a = rng.gen_range(c..1.0);
            if a == c {
                continue;
            }
            let s = state.update(rh(a));
            let e = s.extrema();
            (a, if e.len() >= 2 { e[e.len() - 2] } else { 0.0 })
        } else {
            continue;
        };
        let (lo, hi) = if bound > a { (a, bound) } else { (bound, a) };
        if hi - lo < 1e-9 {
            continue;
        }
        let b = rng.gen_range(lo..hi);
        if b == a || b == lo {
            continue;
        }
        return MinorCycle { prefix, a, b };
    }
}

/// Readings of a temperature sweep at constant RH, sampled every kelvin.
pub struct TemperatureLoop {
    pub heating: Vec<(f64, f64)>,
    pub cooling: Vec<(f64, f64)>,
    pub start_pf: f64,
    pub end_pf: f64,
}

impl TemperatureLoop {
    /// Trapezoid area between the branches over temperature, pF K.
    pub fn area(&self) -> f64 {
        let mut cool = self.cooling.clone();
        cool.reverse();
        self.heating
            .windows(2)
            .zip(cool.windows(2))
            .map(|(h, c)| {
                let gap0 = c[0].1 - h[0].1;
                let gap1 = c[1].1 - h[1].1;
                0.5 * (gap0 + gap1) * (h[1].0 - h[0].0)
            })
            .sum()
    }
}

/// Baked sensor, dwell at `lo`, ramp to `hi` at `seconds_per_kelvin`,
/// dwell, ramp back, dwell. Dwells last `dwell_s`.
pub fn temperature_loop(
    params: &SensorParams,
    x: f64,
    (lo, hi): (f64, f64),
    seconds_per_kelvin: f64,
    dwell_s: f64,
) -> TemperatureLoop {
    let dt = 10.0;
    let x = rh(x);
    let mut state = TwinState::baked(celsius(lo));
    let mut advance = |tc: f64| {
        let (next, c) = step(&state, Ambient { x, t: celsius(tc) }, [0.0; 8], dt, params).unwrap();
        state = next;
        c.pf()
    };
    let dwell = |adv: &mut dyn FnMut(f64) -> f64, tc: f64| {
        let mut c = 0.0;
        for _ in 0..(dwell_s / dt).ceil() as usize {
            c = adv(tc);
        }
        c
    };
    let per = (seconds_per_kelvin / dt).round().max(1.0) as usize;
    let span = (hi - lo).round() as usize;
    let ramp = |adv: &mut dyn FnMut(f64) -> f64, from: f64, sign: f64, first: f64| {
        let mut out = vec![(from, first)];
        let mut c = first;
        for k in 0..span {
            for j in 1..=per {
                c = adv(from + sign * (k as f64 + j as f64 / per as f64));
            }
            out.push((from + sign * (k + 1) as f64, c));
        }
        out
    };
    let start_pf = dwell(&mut advance, lo);
    let heating = ramp(&mut advance, lo, 1.0, start_pf);
    let top = dwell(&mut advance, hi);
    let cooling = ramp(&mut advance, hi, -1.0, top);
    let end_pf = dwell(&mut advance, lo);
    TemperatureLoop {
        heating,
        cooling,
        start_pf,
        end_pf,
    }
}
