mod common;

use common::{celsius, rh, temperature_loop};
use proptest::prelude::*;
use rh_twin::dielectric::{capacitance, effective_permittivity};
use rh_twin::hysteresis::{branch_curve, Direction, HysteresisState};
use rh_twin::twin::{
    compare_bake_schedule, simulate_trace, step, Ambient, EnvSample, SensorParams, TwinState,
};

/// RH staircase 0 -> 95 -> 0 % in 5 % steps, `dwell` seconds per step,
/// sampled every `dt`. Returns the trace and the index of each step's last row.
fn staircase(dwell: f64, dt: f64) -> (Vec<EnvSample>, Vec<(usize, f64)>) {
    let levels: Vec<f64> = (0..=19).chain((0..19).rev()).map(|k| k as f64 * 5.0).collect();
    let per = (dwell / dt) as usize;
    let mut env = Vec::new();
    let mut ends = Vec::new();
    for (i, &level) in levels.iter().enumerate() {
        for j in 0..per {
            let t = (i * per + j) as f64 * dt;
            env.push(EnvSample::new(t, level, 25.0).unwrap());
        }
        ends.push((env.len() - 1, level));
    }
    (env, ends)
}

#[test]
fn slow_staircase_reproduces_quasi_static_loop() {
    // drift would add a slow offset over the 38 h staircase
    let mut params = SensorParams::default();
    params.drift.rate_per_s = 0.0;
    let (env, ends) = staircase(3600.0, 60.0);
    let out = simulate_trace(&env, &params, TwinState::baked(celsius(25.0))).unwrap();
    let mut memory = HysteresisState::baked();
    let t = celsius(25.0);
    let asc = params.response_curve(t, Direction::Ascending, 21).unwrap();
    for (k, &(row, level)) in ends.iter().enumerate() {
        memory.apply(rh(level / 100.0));
        let quasi = params.static_reading(&memory, t).unwrap().pf();
        let got = out[row].capacitance.pf();
        assert!(((got - quasi) / quasi).abs() < 1e-3, "step {level}%: {got} vs {quasi}");
        if k < 20 {
            let major = asc.points()[k].1.pf();
            assert!(((got - major) / major).abs() < 1e-3, "ascending {level}%: {got} vs {major}");
        }
    }
}

#[test]
fn without_extensions_the_twin_is_the_static_pipeline() {
    let mut params = SensorParams::default();
    params.thermal.widening_amplitude = 0.0;
    params.drift.rate_per_s = 0.0;
    let t = celsius(25.0);
    let (env, ends) = staircase(10.0, 10.0);
    let out = simulate_trace(&env, &params, TwinState::baked(t)).unwrap();
    let asc = branch_curve(&params.dist, &params.angles, &params.bet, t, Direction::Ascending, 21)
        .unwrap();
    for (k, (x, fill)) in asc.iter().enumerate().take(20) {
        assert_eq!(ends[k].1, (x.percent() / 5.0).round() * 5.0);
        let expected = capacitance(effective_permittivity(fill, &params.diel), &params.diel)
            .unwrap()
            .pf();
        let got = out[ends[k].0].capacitance.pf();
        assert!(((got - expected) / expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

#[test]
fn temperature_sweep_traces_a_closed_loop() {
    let mut params = SensorParams::default();
    params.drift.rate_per_s = 0.0;
    let lp = temperature_loop(&params, 0.35, (5.0, 95.0), 120.0, 3600.0);
    assert!(lp.heating.windows(2).all(|w| w[1].1 > w[0].1));
    assert!(lp.cooling.windows(2).all(|w| w[1].1 < w[0].1));
    let n = lp.heating.len();
    for i in 1..n - 1 {
        assert!(lp.cooling[n - 1 - i].1 > lp.heating[i].1, "branches cross at {} C", lp.heating[i].0);
    }
    assert!(lp.area() > 0.0);
    assert!(((lp.end_pf - lp.start_pf) / lp.start_pf).abs() < 1e-6);
}

#[test]
fn symmetric_lag_loop_shrinks_with_sweep_rate() {
    let mut params = SensorParams::default();
    params.drift.rate_per_s = 0.0;
    params.thermal.tau_out_s = params.thermal.tau_in_s;
    let fast = temperature_loop(&params, 0.35, (5.0, 95.0), 120.0, 3600.0).area();
    let slow = temperature_loop(&params, 0.35, (5.0, 95.0), 1200.0, 3600.0).area();
    assert!(slow < 0.15 * fast, "{slow} vs {fast}");
    let mut asym = params.clone();
    asym.thermal.tau_out_s = 5.0 * asym.thermal.tau_in_s;
    let wider = temperature_loop(&asym, 0.35, (5.0, 95.0), 120.0, 3600.0).area();
    assert!(wider > fast);
}

fn month_trace(rate_h: usize) -> Vec<EnvSample> {
    (0..=30 * 24 / rate_h)
        .map(|h| {
            let hour = (h * rate_h) as f64;
            let rh = 50.0 + 30.0 * (2.0 * std::f64::consts::PI * hour / 24.0).sin();
            EnvSample::new(hour * 3600.0, rh, 25.0).unwrap()
        })
        .collect()
}

#[test]
fn daily_bakes_lower_the_peak_drift() {
    let params = SensorParams::default();
    let env = month_trace(1);
    let init = TwinState::baked(celsius(25.0));
    let r = compare_bake_schedule(&env, &params, &init, 24.0 * 3600.0).unwrap();
    assert_eq!(r.bakes, 29);
    assert!(r.peak_offset_baked_pf < r.peak_offset_unbaked_pf);
    assert!(r.peak_offset_baked_pf < 0.2 * r.peak_offset_unbaked_pf);

    let mut off = params.clone();
    off.drift.rate_per_s = 0.0;
    let r = compare_bake_schedule(&env, &off, &init, 24.0 * 3600.0).unwrap();
    assert_eq!((r.peak_offset_unbaked_pf, r.peak_offset_baked_pf), (0.0, 0.0));
    assert!(compare_bake_schedule(&env, &params, &init, 0.0).is_err());
}

#[test]
fn heaters_keep_the_element_above_ambient() {
    let params = SensorParams::default();
    let ambient = Ambient { x: rh(0.4), t: celsius(25.0) };
    let mut state = TwinState::baked(celsius(25.0));
    let mut powers = [0.0; 8];
    powers[2] = 0.1;
    powers[5] = 0.2;
    for _ in 0..100 {
        state = step(&state, ambient, powers, 0.5, &params).unwrap().0;
        assert!(state.element_temp.kelvin() >= ambient.t.kelvin());
    }
    let steady = ambient.t.kelvin() + 0.3 * params.thermal.heater[0].thermal_resistance;
    assert!((state.element_temp.kelvin() - steady).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drift_never_decreases_without_bakes(
        xs in proptest::collection::vec(0.01f64..1.0, 1..40),
        dt in 1.0f64..5000.0,
    ) {
        let params = SensorParams::default();
        let mut state = TwinState::baked(celsius(25.0));
        for x in xs {
            let before = state.drift_level;
            state = step(&state, Ambient { x: rh(x), t: celsius(25.0) }, [0.0; 8], dt, &params).unwrap().0;
            prop_assert!(state.drift_level >= before);
            prop_assert!(state.drift_level <= 1.0);
        }
    }
}
