//! Return-point memory: a minor excursion leaves no trace once the humidity
//! comes back to where it turned.

use rh_twin::hysteresis::{filled_fraction, HysteresisState};
use rh_twin::pore::default_alumina_distribution;
use rh_twin::sorption::{BetParams, ContactAngles};
use rh_twin::{RelHumidity, Temperature};

fn main() -> rh_twin::Result<()> {
    let dist = default_alumina_distribution();
    let angles = ContactAngles::default();
    let bet = BetParams::default();
    let t = Temperature::from_celsius(20.0)?;
    let rh = |pct: f64| RelHumidity::from_percent(pct);

    let mut state = HysteresisState::baked();
    for pct in [95.0, 40.0, 80.0] {
        state.apply(rh(pct)?);
        let f = filled_fraction(&state, &dist, &angles, &bet, t)?;
        println!("at {pct:>4} %: extrema {:?}, liquid {:.5}", state.extrema(), f.liquid);
    }

    // minor cycle 80 -> 60 -> 80
    let before = filled_fraction(&state, &dist, &angles, &bet, t)?;
    let back = state.update(rh(60.0)?).update(rh(80.0)?);
    let after = filled_fraction(&back, &dist, &angles, &bet, t)?;
    println!("after 80 -> 60 -> 80: extrema {:?}", back.extrema());
    println!("liquid before {:.12}, after {:.12}", before.liquid, after.liquid);

    // rising past 95 % wipes out everything below it
    let wiped = back.update(rh(97.0)?);
    println!("after 97 %: extrema {:?}", wiped.extrema());
    Ok(())
}
