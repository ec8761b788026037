//! Time-stepped readings of an RH step with a short heater pulse.

use rh_twin::twin::{simulate_trace, EnvSample, SensorParams, TwinState};
use rh_twin::Temperature;

fn main() -> rh_twin::Result<()> {
    let params = SensorParams::default();
    let mut env = Vec::new();
    for i in 0..=120 {
        let t_s = i as f64 * 10.0;
        let rh = if t_s < 300.0 { 30.0 } else { 70.0 };
        let mut row = EnvSample::new(t_s, rh, 25.0)?;
        if (800.0..900.0).contains(&t_s) {
            row = row.with_heaters(params.thermal.full_power());
        }
        env.push(row);
    }
    let readings = simulate_trace(&env, &params, TwinState::baked(Temperature::from_celsius(25.0)?))?;
    for r in readings.iter().step_by(10) {
        println!("{:>6.0} s  {:>8.2} pF", r.t_s, r.capacitance.pf());
    }
    Ok(())
}
