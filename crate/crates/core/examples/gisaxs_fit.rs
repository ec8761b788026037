//! Lorentzian fit of a noisy scattering curve from 8.6 A micropores.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rh_twin::cli::{lorentzian_guess, pore_class};
use rh_twin::pore::{fit_lorentzian, lorentzian_intensity, LorentzianParams, ScatteringCurve};

fn main() -> rh_twin::Result<()> {
    let truth = LorentzianParams::new(100.0, 8.6)?;
    let noise = Normal::new(0.0, 0.05).expect("valid sigma");
    let mut rng = StdRng::seed_from_u64(7);
    let points = (1..=60)
        .map(|i| {
            let q = i as f64 * 0.01;
            (q, lorentzian_intensity(truth, q) * (1.0 + noise.sample(&mut rng)))
        })
        .collect();
    let curve = ScatteringCurve::new(points)?;

    let init = lorentzian_guess(&curve)?;
    let report = fit_lorentzian(&curve, init)?;
    let r = report.params[1];
    let sd = report.covariance[(1, 1)].sqrt();
    println!("start r = {:.2} A, fitted r = {r:.3} +/- {sd:.3} A in {} iterations", init.r, report.iterations);
    let width_nm = 2.0 * r / 10.0;
    println!("pore width {width_nm:.2} nm: {}", pore_class(width_nm));
    Ok(())
}
