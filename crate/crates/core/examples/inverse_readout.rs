//! Turning capacitance back into RH. The same reading maps to different
//! humidities depending on which branch the sensor is on.

use rh_twin::hysteresis::HysteresisState;
use rh_twin::twin::{invert_reading, SensorParams};
use rh_twin::{Capacitance, Error, RelHumidity, Temperature};

fn main() -> rh_twin::Result<()> {
    let params = SensorParams::default();
    let t = Temperature::from_celsius(25.0)?;
    let c = Capacitance::from_pf(1300.0)?;

    let rising = HysteresisState::baked().update(RelHumidity::new(0.3)?);
    let falling = HysteresisState::saturated().update(RelHumidity::new(0.9)?);
    let up = invert_reading(c, t, &rising, &params)?;
    let down = invert_reading(c, t, &falling, &params)?;
    println!("{:.0} pF is {:.1} %RH rising, {:.1} %RH falling", c.pf(), up.percent(), down.percent());

    match invert_reading(Capacitance::from_pf(50.0)?, t, &rising, &params) {
        Err(Error::ReadingOutOfRange { clamped }) => println!("50 pF is below the dry reading, clamped to {} %RH", clamped.percent()),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
