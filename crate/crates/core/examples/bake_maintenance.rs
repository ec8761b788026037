//! A month at 60 %RH with and without a daily heater bake.

use rh_twin::twin::{compare_bake_schedule, EnvSample, SensorParams, TwinState};
use rh_twin::Temperature;

fn main() -> rh_twin::Result<()> {
    let params = SensorParams::default();
    let env = (0..=30 * 24)
        .map(|h| EnvSample::new(h as f64 * 3600.0, 60.0, 25.0))
        .collect::<rh_twin::Result<Vec<_>>>()?;
    let initial = TwinState::baked(Temperature::from_celsius(25.0)?);

    for hours in [6.0, 24.0, 24.0 * 7.0] {
        let r = compare_bake_schedule(&env, &params, &initial, hours * 3600.0)?;
        println!(
            "bake every {hours:>5} h: {:>3} bakes, peak offset {:.2} pF (unbaked {:.2} pF)",
            r.bakes, r.peak_offset_baked_pf, r.peak_offset_unbaked_pf
        );
    }
    Ok(())
}
