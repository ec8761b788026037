//! Slow temperature sweep at constant 35 %RH. Moisture enters the pore
//! walls faster than it leaves, so cooling retraces above heating.

use rh_twin::twin::{step, Ambient, SensorParams, TwinState};
use rh_twin::{RelHumidity, Temperature};

fn main() -> rh_twin::Result<()> {
    let mut params = SensorParams::default();
    params.drift.rate_per_s = 0.0;
    let x = RelHumidity::new(0.35)?;
    let dt = 10.0;
    let mut state = TwinState::baked(Temperature::from_celsius(5.0)?);

    let hold = |tc: f64, seconds: f64, state: &mut TwinState| -> rh_twin::Result<f64> {
        let ambient = Ambient { x, t: Temperature::from_celsius(tc)? };
        let mut c = 0.0;
        for _ in 0..(seconds / dt) as usize {
            let (next, reading) = step(state, ambient, [0.0; 8], dt, &params)?;
            *state = next;
            c = reading.pf();
        }
        Ok(c)
    };

    hold(5.0, 3600.0, &mut state)?;
    let mut heating = Vec::new();
    for k in 0..=90 {
        heating.push(hold(5.0 + k as f64, 120.0, &mut state)?);
    }
    hold(95.0, 3600.0, &mut state)?;
    let mut cooling = Vec::new();
    for k in 0..=90 {
        cooling.push(hold(95.0 - k as f64, 120.0, &mut state)?);
    }
    cooling.reverse();

    println!("{:>5} {:>10} {:>10}", "T °C", "heat pF", "cool pF");
    for k in (0..=90).step_by(10) {
        println!("{:>5} {:>10.1} {:>10.1}", 5 + k, heating[k], cooling[k]);
    }
    let area: f64 = cooling.iter().zip(&heating).map(|(c, h)| c - h).sum();
    println!("loop area about {area:.0} pF K");
    Ok(())
}
