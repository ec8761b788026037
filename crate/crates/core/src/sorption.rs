//! Multilayer (BET) adsorption and Kelvin capillary condensation.

use crate::error::{Error, Result};
use crate::quantities::{RelHumidity, Temperature, WaterProperties};

/// BET constants of the alumina/water system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetParams {
    /// Monolayer capacity in the isotherm's amount units.
    pub v_m: f64,
    /// Heat of adsorption of the first layer minus heat of condensation, J/mol.
    pub e1_minus_el: f64,
    /// Thickness of one adsorbed water layer, nm.
    pub t_mono_nm: f64,
}

impl BetParams {
    pub fn new(v_m: f64, e1_minus_el: f64, t_mono_nm: f64) -> Result<Self> {
        if !(v_m.is_finite() && v_m > 0.0) {
            return Err(Error::Precondition(format!("v_m = {v_m} must be positive")));
        }
        if !e1_minus_el.is_finite() {
            return Err(Error::Precondition("E1 - EL must be finite".into()));
        }
        if !(t_mono_nm.is_finite() && t_mono_nm > 0.0) {
            return Err(Error::Precondition(format!(
                "monolayer thickness {t_mono_nm} nm must be positive"
            )));
        }
        Ok(BetParams {
            v_m,
            e1_minus_el,
            t_mono_nm,
        })
    }
}

impl Default for BetParams {
    fn default() -> Self {
        BetParams {
            v_m: 1.0,
            e1_minus_el: 10_000.0,
            t_mono_nm: 0.3,
        }
    }
}

/// Advancing and receding water contact angles on alumina, in degrees.
///
/// Equal angles are accepted: they describe a surface without wetting
/// hysteresis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactAngles {
    advancing_deg: f64,
    receding_deg: f64,
}

impl ContactAngles {
    pub fn new(advancing_deg: f64, receding_deg: f64) -> Result<Self> {
        if !(advancing_deg.is_finite() && receding_deg.is_finite()) {
            return Err(Error::Precondition("contact angles must be finite".into()));
        }
        if !(0.0 <= receding_deg && receding_deg <= advancing_deg && advancing_deg < 90.0) {
            return Err(Error::Precondition(format!(
                "contact angles need 0 <= receding ({receding_deg}) <= advancing ({advancing_deg}) < 90 degrees"
            )));
        }
        Ok(ContactAngles {
            advancing_deg,
            receding_deg,
        })
    }

    pub fn advancing_deg(&self) -> f64 {
        self.advancing_deg
    }

    pub fn receding_deg(&self) -> f64 {
        self.receding_deg
    }
}

impl Default for ContactAngles {
    fn default() -> Self {
        ContactAngles {
            advancing_deg: 70.0,
            receding_deg: 38.0,
        }
    }
}

/// `c = exp((E1 - EL) / RT)`.
pub fn bet_c(params: &BetParams, t: Temperature) -> f64 {
    (params.e1_minus_el / t.thermal_energy()).exp()
}

/// Adsorbed amount in monolayers, `v/v_m = c x / ((1 - x)(1 + (c - 1) x))`.
pub fn bet_coverage(x: RelHumidity, c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain(format!("BET constant c = {c} must be positive")));
    }
    let x = x.fraction();
    if x >= 1.0 {
        return Err(Error::Singular(
            "BET adsorption diverges at saturation (p = p0)".into(),
        ));
    }
    Ok(c * x / ((1.0 - x) * (1.0 + (c - 1.0) * x)))
}

/// BET transform `x / (v (1 - x))`, linear in `x`.
pub fn bet_linear_point(x: RelHumidity, v: f64) -> Result<f64> {
    let x = x.fraction();
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!(
            "BET transform needs 0 < p/p0 < 1, got {x}"
        )));
    }
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!(
            "BET transform needs a positive adsorbed amount, got {v}"
        )));
    }
    Ok(x / (v * (1.0 - x)))
}

/// `2 gamma V / (R T)` in nm.
pub(crate) fn kelvin_length_nm(t: Temperature, w: &WaterProperties) -> f64 {
    2.0 * w.surface_tension * w.molar_volume / t.thermal_energy() * 1e9
}

fn check_angle(theta_deg: f64) -> Result<f64> {
    if !(theta_deg.is_finite() && (0.0..90.0).contains(&theta_deg)) {
        return Err(Error::Domain(format!(
            "contact angle {theta_deg} deg must lie in [0, 90)"
        )));
    }
    Ok(theta_deg.to_radians().cos())
}

/// Kelvin radius in nm: pores narrower than this are filled at `x`.
pub fn kelvin_radius(
    x: RelHumidity,
    t: Temperature,
    theta_deg: f64,
    w: &WaterProperties,
) -> Result<f64> {
    let cos = check_angle(theta_deg)?;
    let x = x.fraction();
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!(
            "Kelvin radius needs 0 < p/p0 < 1, got {x}"
        )));
    }
    Ok(-kelvin_length_nm(t, w) * cos / x.ln())
}

/// Relative humidity at which a pore of radius `r` nm condenses (or empties).
pub fn inverse_kelvin(
    r: f64,
    t: Temperature,
    theta_deg: f64,
    w: &WaterProperties,
) -> Result<RelHumidity> {
    let cos = check_angle(theta_deg)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("pore radius {r} nm must be positive")));
    }
    RelHumidity::new((-kelvin_length_nm(t, w) * cos / r).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::water_properties;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rh(x: f64) -> RelHumidity {
        RelHumidity::new(x).unwrap()
    }

    fn t20() -> Temperature {
        Temperature::from_kelvin(293.15).unwrap()
    }

    #[test]
    fn bet_c_reference_values() {
        let t = t20();
        let zero = BetParams::new(1.0, 0.0, 0.3).unwrap();
        assert_eq!(bet_c(&zero, t), 1.0);
        let two_rt = BetParams::new(1.0, 2.0 * t.thermal_energy(), 0.3).unwrap();
        assert_relative_eq!(bet_c(&two_rt, t), std::f64::consts::E.powi(2), max_relative = 1e-12);
        let p = BetParams::new(1.0, 10_000.0, 0.3).unwrap();
        // exp(10000 / 2437.41)
        assert!((bet_c(&p, t) - 60.507).abs() < 1e-3);
    }

    #[test]
    fn bet_coverage_reference_values() {
        assert_eq!(bet_coverage(rh(0.0), 5.0).unwrap(), 0.0);
        assert!((bet_coverage(rh(0.15), 100.0).unwrap() - 1.1134).abs() < 1e-4);
        assert_relative_eq!(bet_coverage(rh(0.5), 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(matches!(bet_coverage(rh(1.0), 10.0), Err(Error::Singular(_))));
    }

    #[test]
    fn bet_transform_is_linear_on_bet_data() {
        let (vm, c) = (1.0, 50.0);
        let y1 = bet_linear_point(rh(0.1), vm * bet_coverage(rh(0.1), c).unwrap()).unwrap();
        let y3 = bet_linear_point(rh(0.3), vm * bet_coverage(rh(0.3), c).unwrap()).unwrap();
        let (slope, intercept) = (49.0 / 50.0, 1.0 / 50.0);
        assert_relative_eq!(y1, intercept + slope * 0.1, max_relative = 1e-13);
        assert_relative_eq!(y3, intercept + slope * 0.3, max_relative = 1e-13);
        assert_eq!(bet_linear_point(rh(0.5), 1.0).unwrap(), 1.0);
        assert!(bet_linear_point(rh(0.0), 1.0).is_err());
        assert!(bet_linear_point(rh(0.5), 0.0).is_err());
    }

    #[test]
    fn kelvin_radius_hand_value() {
        let w = WaterProperties::new(72.74e-3, 1.805e-5).unwrap();
        let r = kelvin_radius(rh(0.5), t20(), 0.0, &w).unwrap();
        // 2.626e-6 / (2437.3 * 0.6931) m
        assert!((r - 1.554).abs() / 1.554 < 5e-3, "{r}");
        let near_90 = kelvin_radius(rh(0.5), t20(), 89.999_999, &w).unwrap();
        assert!(near_90 < 1e-6);
        let near_sat = kelvin_radius(rh(1.0 - 1e-12), t20(), 0.0, &w).unwrap();
        assert!(near_sat > 1e9);
        assert!(kelvin_radius(rh(1.0), t20(), 0.0, &w).is_err());
        assert!(kelvin_radius(rh(0.0), t20(), 0.0, &w).is_err());
        assert!(kelvin_radius(rh(0.5), t20(), 90.0, &w).is_err());
    }

    #[test]
    fn fill_and_empty_thresholds_for_two_nm_pore() {
        let w = water_properties(t20()).unwrap();
        let fill = inverse_kelvin(2.0, t20(), 70.0, &w).unwrap().fraction();
        let empty = inverse_kelvin(2.0, t20(), 38.0, &w).unwrap().fraction();
        assert!((fill - 0.832).abs() < 1e-3, "{fill}");
        assert!((empty - 0.654).abs() < 1e-3, "{empty}");
        assert!(inverse_kelvin(0.0, t20(), 70.0, &w).is_err());
    }

    #[test]
    fn contact_angle_validation() {
        assert!(ContactAngles::new(38.0, 70.0).is_err());
        assert!(ContactAngles::new(90.0, 38.0).is_err());
        assert!(ContactAngles::new(70.0, -1.0).is_err());
        assert!(ContactAngles::new(50.0, 50.0).is_ok());
        let d = ContactAngles::default();
        assert_eq!((d.advancing_deg(), d.receding_deg()), (70.0, 38.0));
    }

    proptest! {
        #[test]
        fn coverage_increasing(a in 0.0f64..0.999, b in 0.0f64..0.999, c in 0.01f64..1e4) {
            prop_assume!(a < b);
            prop_assert!(bet_coverage(rh(a), c).unwrap() < bet_coverage(rh(b), c).unwrap());
        }

        #[test]
        fn kelvin_round_trip(r in 0.05f64..500.0, theta in 0.0f64..89.0, tk in 274.0f64..372.0) {
            let t = Temperature::from_kelvin(tk).unwrap();
            let w = water_properties(t).unwrap();
            let x = inverse_kelvin(r, t, theta, &w).unwrap();
            prop_assume!(x.fraction() < 1.0);
            let back = kelvin_radius(x, t, theta, &w).unwrap();
            // rounding x costs eps / |ln x| in r
            let tol = 1e-12 + 4.0 * f64::EPSILON / -x.fraction().ln();
            prop_assert!((back - r).abs() / r < tol);
        }

        #[test]
        fn receding_threshold_below_advancing(r in 0.05f64..100.0, ta in 1.0f64..89.0, frac in 0.0f64..0.999) {
            let tr = ta * frac;
            let t = t20();
            let w = water_properties(t).unwrap();
            let empty = inverse_kelvin(r, t, tr, &w).unwrap();
            let fill = inverse_kelvin(r, t, ta, &w).unwrap();
            prop_assert!(empty < fill);
        }
    }
}
