//! BET fit of a type-IV water isotherm: a monolayer knee, a linear
//! multilayer stretch and a capillary-condensation upturn.

use rh_twin::calibration::{fit_bet, DEFAULT_BET_RANGE};
use rh_twin::cli::type_iv_flag;

fn main() -> rh_twin::Result<()> {
    let isotherm: Vec<(f64, f64)> = (1..=19)
        .map(|i| {
            let x = i as f64 * 0.05;
            let v = 40.0 * x / (1.0 + 39.0 * x) + 0.8 * x + 40.0 * (x - 0.7f64).max(0.0).powi(2);
            (x, v)
        })
        .collect();

    let fit = fit_bet(&isotherm, DEFAULT_BET_RANGE)?;
    println!("v_m = {:.4}", fit.v_m);
    println!("c = {:.2}", fit.c);
    println!("r^2 = {:.6} over {} points", fit.r_squared, fit.points_used);
    println!("one monolayer at p/p0 = {:.3}", fit.monolayer_point());
    println!("type IV: {:?}", type_iv_flag(&isotherm));
    Ok(())
}
