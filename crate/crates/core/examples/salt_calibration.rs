//! Fixed-point calibration from five saturated-salt readings.
//!
//! Five points cannot support the full parameter set, so the structural
//! parameters are dropped and only C0, porosity and the BET energy move.

use rh_twin::calibration::{calibrate_sensor, load_fixed_points, ParameterMask};
use rh_twin::twin::SensorParams;

const SALTS: &str = r#"
[salt.LiCl]
rh_percent = 11.3
capacitance_pf = 859.9

[salt.MgCl2]
rh_percent = 32.8
capacitance_pf = 1039.1

[salt.MgNO3]
rh_percent = 52.9
capacitance_pf = 1250.7
branch = "asc"

[salt.NaCl]
rh_percent = 75.3
capacitance_pf = 1587.2
branch = "asc"

[salt.K2SO4]
rh_percent = 97.3
capacitance_pf = 2396.3
branch = "asc"
"#;

fn main() -> rh_twin::Result<()> {
    let data = load_fixed_points(SALTS)?;
    let out = calibrate_sensor(&data, &SensorParams::default(), &ParameterMask::typical())?;
    for w in &out.warnings {
        println!("warning: {w}");
    }
    println!("converged: {}, residual {:.3} pF", out.report.converged, out.report.residual_norm);
    println!("C0 = {:.2} pF", out.params.diel.c0_pf);
    println!("porosity = {:.4}", out.params.diel.porosity);
    println!("E1 - EL = {:.0} J/mol", out.params.bet.e1_minus_el);
    Ok(())
}
