//! Chamber calibration: synthesize labeled readings from a known sensor,
//! start from the defaults and recover it.

use rh_twin::calibration::{calibrate_sensor, CalibrationDataset, FitParam, ParameterMask};
use rh_twin::hysteresis::Branch;
use rh_twin::twin::SensorParams;
use rh_twin::{RelHumidity, Temperature};

fn main() -> rh_twin::Result<()> {
    let t = Temperature::from_celsius(25.0)?;
    let mut truth = SensorParams::default();
    truth.diel.c0_pf = 128.0;
    truth.set_porosity(0.34)?;
    truth.bet.e1_minus_el = 8_500.0;

    let mut grid = Vec::new();
    for i in 1..20 {
        let x = RelHumidity::new(i as f64 * 0.05)?;
        grid.push((x, Branch::Ascending));
        grid.push((x, Branch::Descending));
    }
    let data = CalibrationDataset::synthesize(&truth, t, &grid)?;

    let mask = ParameterMask::new(vec![
        FitParam::GeometryFactor,
        FitParam::Porosity,
        FitParam::BetEnergy,
        FitParam::AdvancingAngle,
        FitParam::RecedingAngle,
    ]);
    let out = calibrate_sensor(&data, &SensorParams::default(), &mask)?;
    println!("{} iterations, residual {:.2e} pF", out.report.iterations, out.report.residual_norm);
    println!("C0        {:>8.3} (true {:.3})", out.params.diel.c0_pf, truth.diel.c0_pf);
    println!("porosity  {:>8.4} (true {:.4})", out.params.diel.porosity, truth.diel.porosity);
    println!("E1 - EL   {:>8.1} (true {:.1})", out.params.bet.e1_minus_el, truth.bet.e1_minus_el);
    println!(
        "angles    {:.2} / {:.2} deg",
        out.params.angles.advancing_deg(),
        out.params.angles.receding_deg()
    );
    Ok(())
}
