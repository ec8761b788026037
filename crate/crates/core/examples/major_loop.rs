//! Adsorption and desorption branches of the default sensor at 25 °C.

use rh_twin::hysteresis::Direction;
use rh_twin::twin::{average_sensitivity, SensorParams};
use rh_twin::{RelHumidity, Temperature};

fn main() -> rh_twin::Result<()> {
    let params = SensorParams::default();
    let t = Temperature::from_celsius(25.0)?;
    let asc = params.response_curve(t, Direction::Ascending, 21)?;
    let desc = params.response_curve(t, Direction::Descending, 21)?;

    println!("{:>6} {:>10} {:>10}", "RH %", "asc pF", "desc pF");
    for ((x, a), (_, d)) in asc.points().iter().zip(desc.points()) {
        println!("{:>6.1} {:>10.2} {:>10.2}", x.percent(), a.pf(), d.pf());
    }

    let fine = params.response_curve(t, Direction::Ascending, 101)?;
    let s = average_sensitivity(&fine, RelHumidity::new(0.2)?, RelHumidity::new(0.9)?)?;
    println!("\naverage sensitivity 20-90 %RH: {s:.2} pF/%RH");
    Ok(())
}
